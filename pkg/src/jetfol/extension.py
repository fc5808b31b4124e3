"""The extension class of Maurer-Cartan data and the one-order extension problem."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Sequence

from .cdga import Element, PreconditionError, twisted_matrices
from .linalg import AffineSolution, scalar, solve_affine
from .mc import MaurerCartanData, WeightedElement, extension_cocycle, mc_check, require_mc


@dataclass
class ExtensionClass:
    cocycle: WeightedElement
    is_trivial: bool
    primitive: WeightedElement | None


def _degree_one_system(d: MaurerCartanData, rhs: Element) -> AffineSolution | None:
    """Solve ``(d - k gamma) x = rhs`` for a 1-form ``x`` of weight ``-k``."""
    m = d.model
    mat = twisted_matrices(m, d.gamma, -d.k)[1]
    return solve_affine(mat, rhs.component(2))


def extension_class(d: MaurerCartanData) -> ExtensionClass:
    require_mc(d)
    c = extension_cocycle(d)
    closed = c.d() - (d.gamma * c).scale(d.k)
    if closed:
        raise PreconditionError(f"extension cocycle is not closed: {closed}")
    sol = _degree_one_system(d, c)
    primitive = None
    if sol is not None:
        primitive = WeightedElement(d.model.from_vector(1, sol.particular), -d.k)
    return ExtensionClass(WeightedElement(c, -d.k), sol is not None, primitive)


@dataclass
class Extension:
    eta_k: Element
    solution_space_dim: int
    nullspace: list  # of Elements
    data: MaurerCartanData  # the order k+1 data


def extend_order(d: MaurerCartanData) -> Extension | None:
    """Solve ``d eta_k - k gamma eta_k = -c`` for ``eta_k``; ``None`` when obstructed."""
    require_mc(d)
    c = extension_cocycle(d)
    sol = _degree_one_system(d, c.scale(-1))
    if sol is None:
        return None
    m = d.model
    eta = m.from_vector(1, sol.particular)
    ext = d.with_eta(eta)
    assert mc_check(ext).passed
    return Extension(eta, sol.dim, [m.from_vector(1, v) for v in sol.nullspace_basis], ext)


@dataclass
class ExtensionSearch:
    achieved: int
    data: MaurerCartanData
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"achieved_order": self.achieved, "trace": self.trace}


def max_extension(d: MaurerCartanData, k_max: int, search: str = "greedy",
                  grid: Sequence = (), max_candidates: int = 10_000) -> ExtensionSearch:
    """Extend order by order up to ``k_max``.

    ``greedy`` keeps the particular solution at each step.  ``exhaustive``
    also tries ``particular + sum c_j n_j`` with every ``c`` from ``grid`` along
    the nullspace vectors ``n_j``, backtracking when a later step is obstructed.
    """
    require_mc(d)
    if search not in ("greedy", "exhaustive"):
        raise ValueError("search must be 'greedy' or 'exhaustive'")
    if not isinstance(k_max, int) or k_max < d.k:
        raise ValueError(f"k_max must be an integer >= {d.k}")
    grid = [scalar(g) for g in grid]
    if search == "exhaustive" and not grid:
        raise ValueError("exhaustive search needs a non-empty coefficient grid")

    def candidates(ext: Extension):
        yield ext.eta_k, ()
        if search == "greedy" or not ext.nullspace:
            return
        count = len(grid) ** len(ext.nullspace)
        if count > max_candidates:
            raise ValueError(f"grid too large: {count} candidates at one step")
        for coeffs in cartesian(grid, repeat=len(ext.nullspace)):
            if not any(coeffs):
                continue
            eta = ext.eta_k
            for c, n in zip(coeffs, ext.nullspace):
                eta = eta + n.scale(c)
            yield eta, coeffs

    def explore(cur: MaurerCartanData, trace: list) -> ExtensionSearch:
        if cur.k >= k_max:
            return ExtensionSearch(cur.k, cur, trace)
        ext = extend_order(cur)
        if ext is None:
            step = {"from_order": cur.k, "obstructed": True,
                    "class": str(extension_class(cur).cocycle.base)}
            return ExtensionSearch(cur.k, cur, trace + [step])
        best = None
        tried = 0
        for eta, coeffs in candidates(ext):
            tried += 1
            step = {"from_order": cur.k, "obstructed": False, "eta": str(eta),
                    "solution_space_dim": ext.solution_space_dim,
                    "nullspace_coefficients": [str(c) for c in coeffs]}
            res = explore(cur.with_eta(eta), trace + [step])
            if best is None or res.achieved > best.achieved:
                best = res
            if best.achieved >= k_max:
                break
        best.trace[len(trace)]["candidates_tried"] = tried
        return best

    return explore(d, [])
