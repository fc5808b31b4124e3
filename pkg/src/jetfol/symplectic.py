"""Two-forms on the algebroid: the data ``(beta, alpha_0..alpha_k)``.

``beta`` is a closed 2-form of the model and ``alpha_r`` is a 1-form valued
in the ``r``-th power of the line bundle.  Restriction to the hypersurface
combines them into ``gamma = beta + sum_{r<k} alpha_r eta_r`` and ``alpha_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cdga import Element, PreconditionError, evaluate_poly0
from .extension import extension_class
from .linalg import Matrix, determinant, kernel_basis, scalar, solve_affine
from .mc import MaurerCartanData, WeightedElement, extension_cocycle, require_mc


class InternalConsistencyError(RuntimeError):
    """The closedness system holds but a derived identity does not."""


@dataclass
class AlgebroidTwoForm:
    beta: Element
    alphas: dict  # r -> Element, r = 0..k

    def alpha(self, r: int) -> Element:
        return self.alphas.get(r, self.beta.algebra.zero())


@dataclass
class SympReport:
    passed: bool = True
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failures": self.failures}


def _check_shapes(w: AlgebroidTwoForm, d: MaurerCartanData):
    m = d.model
    if w.beta.algebra is not m:
        raise ValueError("beta does not lie in the model")
    if w.beta and w.beta.degree != 2:
        raise ValueError("beta must have degree 2")
    for r, a in w.alphas.items():
        if not isinstance(r, int) or not 0 <= r <= d.k:
            raise ValueError(f"alpha index {r} outside 0..{d.k}")
        if a.algebra is not m:
            raise ValueError(f"alpha_{r} does not lie in the model")
        if a and a.degree != 1:
            raise ValueError(f"alpha_{r} must have degree 1")


def closedness_residual(w: AlgebroidTwoForm, d: MaurerCartanData, p: int) -> Element:
    """``d alpha_p + p gamma alpha_p - p sum_{r>p} eta_{r-p} alpha_r``."""
    a = w.alpha(p)
    out = a.d() + (d.gamma * a).scale(p)
    for r in range(p + 1, d.k + 1):
        out = out - (d.eta(r - p) * w.alpha(r)).scale(p)
    return out


def symp_check_closed(w: AlgebroidTwoForm, d: MaurerCartanData) -> SympReport:
    require_mc(d)
    _check_shapes(w, d)
    rep = SympReport()
    if w.beta.d():
        rep.passed = False
        rep.failures.append({"p": "beta", "residual": str(w.beta.d())})
    for p in range(d.k, -1, -1):
        res = closedness_residual(w, d, p)
        if res:
            rep.passed = False
            rep.failures.append({"p": p, "residual": str(res)})
    return rep


def _require_closed(w, d):
    rep = symp_check_closed(w, d)
    if not rep.passed:
        f = rep.failures[0]
        raise PreconditionError(f"closedness system fails at p = {f['p']}: {f['residual']}")


def symp_restrict(w: AlgebroidTwoForm, d: MaurerCartanData,
                  at: Mapping[str, Fraction] | None = None) -> tuple[Element, WeightedElement]:
    """``(beta + sum_{r<k} alpha_r eta_r, alpha_k)``.

    With ``at`` the poly0 variables are evaluated at the given values; by
    default they are kept, so the transverse coordinate stays visible.
    """
    _require_closed(w, d)
    gamma2 = w.beta
    for r in range(d.k):
        gamma2 = gamma2 + w.alpha(r) * d.eta(r)
    top = w.alpha(d.k)
    if at is not None:
        gamma2 = evaluate_poly0(gamma2, at)
        top = evaluate_poly0(top, at)
    return gamma2, WeightedElement(top, d.k)


# -- nondegeneracy on a coframe ----------------------------------------------

def poly0_free_basis(model, p: int) -> list[int]:
    """Degree-``p`` basis monomials that involve no poly0 variable."""
    idx = model.by_degree.get(p, [])
    if model.monomials is None:
        return list(idx)
    poly0 = set(model.poly0_vars)
    names = model.generator_names
    return [i for i in idx
            if all(not e for nm, e in zip(names, model.monomials[i]) if nm in poly0)]


class Coframe:
    """The poly0-free degree-1 basis of a model, whose degree-2 part is its exterior square."""

    def __init__(self, model, frame_dim: int):
        self.model = model
        self.frame = poly0_free_basis(model, 1)
        if len(self.frame) != frame_dim:
            raise ValueError(f"frame_dim {frame_dim} does not match the {len(self.frame)} "
                             "poly0-free degree-1 basis elements")
        self.pair_of = {}
        for a in range(len(self.frame)):
            for b in range(a + 1, len(self.frame)):
                prod = model.mul_basis(self.frame[a], self.frame[b])
                if len(prod) != 1:
                    raise ValueError("degree-1 coframe products are not basis monomials")
                (m, s), = prod.items()
                if m in self.pair_of:
                    raise ValueError("degree-1 coframe is not free in degree 2")
                self.pair_of[m] = (a, b, s)
        free2 = poly0_free_basis(model, 2)
        if set(free2) != set(self.pair_of):
            raise ValueError("degree-2 poly0-free part is not the exterior square of the coframe")

    def covector(self, x: Element) -> list[Fraction]:
        vec = [Fraction(0)] * len(self.frame)
        pos = {b: i for i, b in enumerate(self.frame)}
        for b, c in x.coeffs.items():
            if b not in pos:
                raise ValueError(f"{x} is not a constant-coefficient 1-form")
            vec[pos[b]] = c
        return vec

    def skew_matrix(self, x: Element) -> Matrix:
        n = len(self.frame)
        ent = {}
        for m, c in x.coeffs.items():
            if m not in self.pair_of:
                raise ValueError(f"{x} is not a constant-coefficient 2-form")
            a, b, s = self.pair_of[m]
            # m = s * e_a e_b
            ent[a, b] = c * s
            ent[b, a] = -c * s
        return Matrix(n, n, ent)


def nondeg_check(w: AlgebroidTwoForm, d: MaurerCartanData,
                 eval_points: Sequence[Mapping[str, Fraction]], frame_dim: int) -> SympReport:
    """At each point: ``alpha_k != 0`` and ``gamma`` is nondegenerate on ``ker alpha_k``."""
    frame = Coframe(d.model, frame_dim)
    rep = SympReport()
    points = list(eval_points) or [{}]
    for pt in points:
        pt = {k: scalar(v) for k, v in pt.items()}
        gamma2, top = symp_restrict(w, d, at=pt)
        a = frame.covector(top.base)
        entry = {"point": {k: str(v) for k, v in pt.items()}}
        if not any(a):
            entry["reason"] = "alpha_k vanishes"
            rep.passed = False
            rep.failures.append(entry)
            continue
        kern = kernel_basis(Matrix.from_rows([a], len(a)))
        k_mat = Matrix.from_columns(kern, len(a))
        m = frame.skew_matrix(gamma2)
        det = determinant(k_mat.transpose() @ m @ k_mat)
        if det == 0:
            entry["reason"] = "gamma is degenerate on ker alpha_k"
            rep.passed = False
            rep.failures.append(entry)
    return rep


# -- variation ----------------------------------------------------------

@dataclass
class Variation:
    value: WeightedElement  # -c, weight -k
    quotient: Element  # the solution of xi * alpha_k = d gamma found by elimination
    ambiguity_dim: int
    is_trivial: bool


def variation(w: AlgebroidTwoForm, d: MaurerCartanData) -> Variation:
    """Divide ``d gamma`` by ``alpha_k``; the quotient is ``-c`` modulo the ideal of ``alpha_k``."""
    gamma2, top = symp_restrict(w, d)
    m = d.model
    ak = top.base
    dg = gamma2.d()
    cols = [(m.basis_element(b) * ak).component(3) for b in m.by_degree.get(2, [])]
    mat = Matrix.from_columns(cols, m.dim(3)) if cols else Matrix(m.dim(3), 0)
    sol = solve_affine(mat, dg.component(3))
    if sol is None:
        raise InternalConsistencyError(f"d gamma = {dg} is not divisible by alpha_k = {ak}")
    c = extension_cocycle(d)
    if dg != (c * ak).scale(-1):
        raise InternalConsistencyError(f"d gamma = {dg} differs from -c*alpha_k = {(c * ak).scale(-1)}")
    return Variation(WeightedElement(c.scale(-1), -d.k), m.from_vector(2, sol.particular),
                     sol.dim, extension_class(d).is_trivial)
