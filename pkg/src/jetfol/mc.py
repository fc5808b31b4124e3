"""Maurer-Cartan data for algebroids over a line bundle and their cohomology.

The data is an order ``k``, a model algebra ``C`` standing in for the forms on
the hypersurface, a closed connection 1-form ``gamma`` and 1-forms
``eta_1..eta_{k-1}`` of weights ``-1..-(k-1)``.  ``eta_0`` is always zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cdga import (
    Element,
    FiniteCDGA,
    PreconditionError,
    twisted_betti_weight,
    twisted_cohomology,
)
from .linalg import Matrix, Subquotient, rank
from .universal import TwistedComplex


@dataclass(frozen=True)
class WeightedElement:
    """A form valued in the ``weight``-th power of the line bundle."""

    base: Element
    weight: int

    def __mul__(self, other: "WeightedElement") -> "WeightedElement":
        return WeightedElement(self.base * other.base, self.weight + other.weight)

    def nabla(self, gamma: Element) -> Element:
        """``d + weight * gamma`` applied to the underlying form."""
        return self.base.d() + (gamma * self.base).scale(self.weight)

    def __str__(self) -> str:
        return f"{self.base} [weight {self.weight}]"


class MaurerCartanData:
    def __init__(self, k: int, model: FiniteCDGA, gamma: Element | None = None,
                 etas: Mapping[int, Element] | None = None, name: str = "mc"):
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise ValueError("order k must be a non-negative integer")
        if model.unit is None:
            raise PreconditionError("the model must be unital")
        self.k = k
        self.model = model
        self.name = name
        self.gamma = gamma if gamma is not None else model.zero()
        if self.gamma.algebra is not model:
            raise ValueError("gamma does not lie in the model")
        etas = dict(etas or {})
        for i, e in etas.items():
            if not isinstance(i, int) or not 1 <= i <= max(k - 1, 0):
                if e:
                    raise ValueError(f"eta_{i} is outside 1..{k - 1}")
            if e.algebra is not model:
                raise ValueError(f"eta_{i} does not lie in the model")
        self.etas = {i: etas.get(i, model.zero()) for i in range(1, k)}

    def eta(self, i: int) -> Element:
        if i <= 0 or i >= self.k:
            return self.model.zero()
        return self.etas[i]

    def weighted_eta(self, i: int) -> WeightedElement:
        return WeightedElement(self.eta(i), -i)

    def with_eta(self, eta_k: Element) -> "MaurerCartanData":
        """The order-(k+1) data obtained by appending ``eta_k``."""
        etas = dict(self.etas)
        etas[self.k] = eta_k
        return MaurerCartanData(self.k + 1, self.model, self.gamma, etas, self.name)

    def quadratic_term(self, r: int) -> Element:
        """``1/2 sum_{i+j=r} (j-i) eta_i eta_j`` over ``i, j >= 1``."""
        out = self.model.zero()
        for i in range(1, r):
            j = r - i
            if j - i:
                out = out + (self.eta(i) * self.eta(j)).scale(Fraction(j - i, 2))
        return out


@dataclass
class MCReport:
    passed: bool = True
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failures": self.failures}


def mc_residual(d: MaurerCartanData, r: int) -> Element:
    """``d eta_r - r gamma eta_r + 1/2 sum (j-i) eta_i eta_j``."""
    e = d.eta(r)
    return e.d() - (d.gamma * e).scale(r) + d.quadratic_term(r)


def mc_check(d: MaurerCartanData) -> MCReport:
    rep = MCReport()
    if d.gamma and d.gamma.degree != 1:
        rep.passed = False
        rep.failures.append({"r": 0, "identity": "gamma has degree 1", "residual": str(d.gamma)})
    elif d.gamma.d():
        rep.passed = False
        rep.failures.append({"r": 0, "identity": "d gamma = 0", "residual": str(d.gamma.d())})
    for r in range(1, d.k):
        e = d.eta(r)
        if e and e.degree != 1:
            rep.passed = False
            rep.failures.append({"r": r, "identity": "eta_r has degree 1", "residual": str(e)})
            continue
        res = mc_residual(d, r)
        if res:
            rep.passed = False
            rep.failures.append({"r": r, "identity": "Maurer-Cartan equation", "residual": str(res)})
    return rep


def require_mc(d: MaurerCartanData):
    rep = mc_check(d)
    if not rep.passed:
        f = rep.failures[0]
        raise PreconditionError(f"Maurer-Cartan check failed at r = {f['r']}: {f['residual']}")


def build_twisted(d: MaurerCartanData) -> TwistedComplex:
    """The complex ``(+)_r C (x) t_r`` with ``d t_r = r gamma t_r + sum (i-r) eta_i t_{r-i}``."""
    require_mc(d)
    zero = d.model.zero()
    diff = [d.gamma.scale(-1) if d.k else zero] + [d.eta(i) for i in range(1, d.k)]
    prod = [zero] + [d.eta(i) for i in range(1, d.k)]
    tc = TwistedComplex(d.model, d.k, diff[: d.k], prod[: d.k], f"twisted({d.name})")
    for p in range(tc.min_degree - 1, tc.top_degree + 1):
        if not (tc.d_matrix(p + 1) @ tc.d_matrix(p)).is_zero():
            raise PreconditionError(f"twisted differential does not square to zero in degree {p}")
    return tc


def twisted_betti(d: MaurerCartanData) -> list[int]:
    return build_twisted(d).betti()


def _pad(xs: Sequence[int], n: int) -> list[int]:
    return list(xs) + [0] * (n - len(xs))


def algebroid_betti(d: MaurerCartanData) -> list[int]:
    """``betti(model)_i + twisted_betti_i``; the ambient space is modelled by ``D``."""
    tw = twisted_betti(d)
    base = d.model.betti()
    n = max(len(tw), len(base))
    return [a + b for a, b in zip(_pad(base, n), _pad(tw, n))]


# -- ring structure -----------------------------------------------------------

class CohomologyRing:
    """Cohomology of the twisted complex with products reduced modulo coboundaries."""

    def __init__(self, complex_: TwistedComplex):
        self.complex = complex_
        self.spaces = complex_._cohomology

    def space(self, p: int) -> Subquotient:
        return self.complex.cohomology(p)

    def representatives(self, p: int) -> list[Element]:
        return [self.complex.from_vector(p, v) for v in self.space(p).representatives]

    def classes(self) -> list[tuple[int, int, Element]]:
        out = []
        for p in range(self.complex.min_degree, self.complex.top_degree + 1):
            for i, e in enumerate(self.representatives(p)):
                out.append((p, i, e))
        return out

    def reduce(self, x: Element) -> dict[int, list[Fraction]]:
        """Per-degree class coordinates of a cocycle."""
        if x.d():
            raise ValueError(f"{x} is not a cocycle")
        return {p: self.space(p).coordinates(x.component(p)) for p in sorted(x.degrees())}

    def is_coboundary(self, x: Element) -> bool:
        return all(not any(v) for v in self.reduce(x).values())

    def same_class(self, x: Element, y: Element) -> bool:
        return self.is_coboundary(x - y)

    def product_table(self) -> dict:
        """``(p, i, q, j) -> coordinates`` of the product of representative classes."""
        table = {}
        cls = self.classes()
        for p, i, x in cls:
            for q, j, y in cls:
                prod = x * y
                table[p, i, q, j] = self.reduce(prod).get(p + q, []) if prod else []
        return table

    def nonvanishing_products(self, elements: Sequence[Element]) -> list[tuple[int, int]]:
        """Unordered index pairs ``(i <= j)`` whose product is a nonzero class."""
        for e in elements:
            if e.d():
                raise ValueError(f"{e} is not a cocycle")
        out = []
        for i in range(len(elements)):
            for j in range(i, len(elements)):
                if not self.is_coboundary(elements[i] * elements[j]):
                    out.append((i, j))
        return out


def cohomology_ring(d: MaurerCartanData) -> CohomologyRing:
    return CohomologyRing(build_twisted(d))


# -- spectral sequence ----------------------------------------------------

@dataclass
class E1Page:
    k: int
    columns: dict  # p (0, -1, ..., -k) -> betti list of H(L^{-p}) by degree
    mass: list  # total degree n -> sum of E1^{p,q} with p+q = n
    twisted: list
    majorizes: bool
    euler_equal: bool

    def entry(self, p: int, q: int) -> int:
        col = self.columns[p]
        n = p + q - 1
        return col[n] if 0 <= n < len(col) else 0

    def to_dict(self) -> dict:
        return {"k": self.k, "columns": {str(p): v for p, v in self.columns.items()},
                "mass": self.mass, "twisted_betti": self.twisted,
                "majorizes": self.majorizes, "euler_equal": self.euler_equal}


def spectral_E1(d: MaurerCartanData) -> E1Page:
    """``E1^{p,q} = H^{p+q-1}(C, d + (-p) gamma)`` for ``p = 0, -1, ..., -k``."""
    tw = twisted_betti(d)
    columns = {}
    for w in range(0, d.k + 1):
        columns[-w] = twisted_betti_weight(d.model, d.gamma, w)
    n_max = len(tw)
    mass = []
    for n in range(n_max):
        mass.append(sum(col[n - 1] for col in columns.values() if 0 <= n - 1 < len(col)))
    majorizes = all(m >= t for m, t in zip(mass, tw))
    euler = sum((-1) ** n * m for n, m in enumerate(mass)) == sum((-1) ** n * t for n, t in enumerate(tw))
    return E1Page(d.k, columns, mass, tw, majorizes, euler)


# -- restriction to the hypersurface and the Gysin sequence ----------------

def extension_cocycle(d: MaurerCartanData) -> Element:
    """``sum_{i<k/2} (k-2i) eta_i eta_{k-i}``, a weight -k 2-form."""
    out = d.model.zero()
    for i in range(1, d.k):
        if 2 * i < d.k:
            out = out + (d.eta(i) * d.eta(d.k - i)).scale(d.k - 2 * i)
    return out


def restrict(x: Element, d: MaurerCartanData) -> tuple[Element, WeightedElement]:
    """``(sum_{r<k} alpha_r eta_r, alpha_k)`` for ``x = sum alpha_r (x) t_r``."""
    tc = x.algebra
    if not isinstance(tc, TwistedComplex) or tc.base is not d.model or tc.k != d.k:
        raise ValueError("restrict expects an element of the twisted complex of this data")
    parts = tc.components(x)
    boundary = d.model.zero()
    for r in range(d.k):
        boundary = boundary + parts[r] * d.eta(r)
    return boundary, WeightedElement(parts[d.k], d.k)


class RestrictedComplex:
    """Pairs ``(beta, alpha)`` with ``beta`` in ``C^n`` and ``alpha`` in ``C^{n-1}``.

    ``d'(beta, alpha) = (d beta + (-1)^{|alpha|+1} c alpha, (d + k gamma) alpha)``
    where ``c`` is the extension cocycle.  The projection to ``alpha`` and the
    inclusion of ``beta`` give the Gysin sequence.
    """

    def __init__(self, d: MaurerCartanData):
        require_mc(d)
        self.data = d
        self.model = d.model
        self.c = extension_cocycle(d)
        self.top = d.model.top_degree + 1

    def dim(self, n: int) -> int:
        return self.model.dim(n) + self.model.dim(n - 1)

    def apply(self, beta: Element, alpha: Element) -> tuple[Element, Element]:
        d = self.data
        out_b = beta.d()
        for p in alpha.degrees():
            out_b = out_b + (self.c * alpha.homogeneous_part(p)).scale((-1) ** (p + 1))
        out_a = alpha.d() + (d.gamma * alpha).scale(d.k)
        return out_b, out_a

    def matrix(self, n: int) -> Matrix:
        m = self.model
        cols = []
        for b in m.by_degree.get(n, []):
            cols.append(self._vec(n + 1, *self.apply(m.basis_element(b), m.zero())))
        for a in m.by_degree.get(n - 1, []):
            cols.append(self._vec(n + 1, *self.apply(m.zero(), m.basis_element(a))))
        return Matrix.from_columns(cols, self.dim(n + 1)) if cols else Matrix(self.dim(n + 1), 0)

    def _vec(self, n: int, beta: Element, alpha: Element) -> list:
        return beta.component(n) + alpha.component(n - 1)

    def betti(self) -> list[int]:
        out = []
        for n in range(0, self.top + 1):
            sq = Subquotient(self.matrix(n), self.matrix(n - 1))
            out.append(sq.dim)
        return out


def gysin_betti(d: MaurerCartanData) -> list[int]:
    """Dimensions of H(A|_D) from the long exact sequence.

    ``H^i = coker(c: H^{i-2}(L^k) -> H^i(D)) (+) ker(c: H^{i-1}(L^k) -> H^{i+1}(D))``.
    """
    require_mc(d)
    m = d.model
    c = extension_cocycle(d)
    hd = m._cohomology
    hl = twisted_cohomology(m, d.gamma, d.k)

    def cup_rank(src_deg: int) -> tuple[int, int]:
        """(rank, source dim) of cup with c from H^src(L^k) to H^{src+2}(D)."""
        if src_deg not in hl:
            return 0, 0
        src = hl[src_deg]
        if src.dim == 0:
            return 0, 0
        tgt = hd.get(src_deg + 2)
        if tgt is None or tgt.dim == 0:
            return 0, src.dim
        cols = []
        for v in src.representatives:
            x = m.from_vector(src_deg, v)
            cols.append(tgt.coordinates((c * x).component(src_deg + 2)))
        return rank(Matrix.from_columns(cols, tgt.dim)), src.dim

    top = m.top_degree + 1
    out = []
    for i in range(0, top + 1):
        h_i = hd[i].dim if i in hd else 0
        r_in, _ = cup_rank(i - 2)
        r_out, s_out = cup_rank(i - 1)
        out.append(h_i - r_in + s_out - r_out)
    return out
