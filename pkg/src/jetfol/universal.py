"""The jet Lie algebra g_k, its Chevalley-Eilenberg algebra and the universal
algebra S_k, together with base change along a morphism out of CE(g_k).

Base change is also the engine behind :func:`jetfol.mc.build_twisted`: the
twisted complex over a model is ``S_k`` with the generators ``x_i`` replaced
by 1-forms of the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .cdga import (
    Element,
    FiniteCDGA,
    ModelPresentation,
    PreconditionError,
    compile_presentation,
    format_linear_combination,
)
from .polyparse import parse_polynomial

MAX_K = 8


class MaurerCartanViolation(ValueError):
    def __init__(self, r: int, residual):
        super().__init__(f"Maurer-Cartan violation at r = {r}: residual {residual}")
        self.r = r
        self.residual = residual


def _check_k(k):
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
        raise ValueError(f"k must be an integer in 1..{MAX_K}")


class TwistedComplex(FiniteCDGA):
    """``(+)_{r=0..k} C (x) t_r`` with ``t_r`` odd of degree 1.

    Basis index ``r*N + b`` is ``e_b (x) t_r`` where ``N = len(base)``; its
    total degree is ``deg e_b + 1``.  ``diff_images[i]`` enters ``d(t_r)``
    through ``(i-r) * diff_images[i] * t_{r-i}`` and ``product_images[i]``
    enters ``t_s t_r = sum_{i=s}^{r-1} product_images[i] * t_{s+r-i}``.
    """

    def __init__(self, base: FiniteCDGA, k: int, diff_images: Sequence[Element],
                 product_images: Sequence[Element], name: str):
        if not isinstance(k, int) or k < 0:
            raise ValueError("order k must be a non-negative integer")
        if len(diff_images) != k or len(product_images) != k:
            raise ValueError(f"expected {k} images x_0..x_{k - 1}")
        for e in list(diff_images) + list(product_images):
            if e.algebra is not base:
                raise ValueError("images must lie in the base algebra")
            if e and e.degree != 1:
                raise ValueError("images of the x_i must have degree 1")
        self.base = base
        self.k = k
        self.diff_images = tuple(diff_images)
        self.product_images = tuple(product_images)
        N = len(base)
        self.base_size = N
        labels, degrees = [], []
        for r in range(k + 1):
            for b in range(N):
                lab = base.labels[b]
                labels.append(f"t{r}" if b == base.unit else f"{lab}*t{r}")
                degrees.append(base.degrees[b] + 1)
        self._dt = {r: self._dt_coeffs(r) for r in range(k + 1)}
        diff = {}
        for r in range(k + 1):
            for b in range(N):
                diff[r * N + b] = self._d_rule(b, r)
        super().__init__(name, labels, degrees, self._product_rule_twisted, diff, None,
                         poly0_vars=base.poly0_vars,
                         metadata={"base": base.name, "k": k})
        self.weights = tuple(r for r in range(k + 1) for _ in range(N))

    # d(t_r) as a map  r -> [(base element, r')]
    def _dt_coeffs(self, r: int) -> list:
        out = []
        for i in range(0, r + 1):
            if i - r == 0 or i >= self.k:
                continue
            img = self.diff_images[i]
            if img:
                out.append((img.scale(i - r), r - i))
        return out

    def _lift(self, x: Element, r: int) -> dict:
        N = self.base_size
        return {r * N + b: c for b, c in x.coeffs.items()}

    def _d_rule(self, b: int, r: int) -> dict:
        base = self.base
        N = self.base_size
        out: dict = {}
        for k2, c in base.d_basis(b).items():
            out[r * N + k2] = out.get(r * N + k2, 0) + c
        sign = (-1) ** base.degrees[b]
        eb = base.basis_element(b)
        for coeff, r2 in self._dt[r]:
            for k2, c in (eb * coeff).coeffs.items():
                out[r2 * N + k2] = out.get(r2 * N + k2, 0) + sign * c
        return out

    def t_product(self, s: int, r: int) -> list:
        """``t_s t_r`` as a list of (base coefficient, index)."""
        if s == r:
            return []
        if s > r:
            return [(c.scale(-1), m) for c, m in self.t_product(r, s)]
        out = []
        for i in range(s, r):
            img = self.product_images[i]
            if img:
                out.append((img, s + r - i))
        return out

    def _product_rule_twisted(self, i: int, j: int) -> dict:
        N = self.base_size
        r1, b1 = divmod(i, N)
        r2, b2 = divmod(j, N)
        base = self.base
        sign = (-1) ** base.degrees[b2]
        phipsi = Element(base, base.mul_basis(b1, b2))
        if not phipsi:
            return {}
        out: dict = {}
        for coeff, m in self.t_product(r1, r2):
            for k2, c in (phipsi * coeff).coeffs.items():
                out[m * N + k2] = out.get(m * N + k2, 0) + sign * c
        return out

    # -- conveniences ---------------------------------------------------
    def basis_index(self, b: int, r: int) -> int:
        return r * self.base_size + b

    def tensor(self, phi: Element, r: int) -> Element:
        """The element ``phi (x) t_r``."""
        if phi.algebra is not self.base:
            raise ValueError("coefficient must lie in the base algebra")
        if not 0 <= r <= self.k:
            raise ValueError(f"t index must lie in 0..{self.k}")
        return Element(self, self._lift(phi, r))

    def t(self, r: int) -> Element:
        return self.tensor(self.base.one(), r)

    def components(self, x: Element) -> list[Element]:
        """Coefficients ``alpha_0..alpha_k`` with ``x = sum alpha_r (x) t_r``."""
        N = self.base_size
        parts = [dict() for _ in range(self.k + 1)]
        for i, c in x.coeffs.items():
            r, b = divmod(i, N)
            parts[r][b] = c
        return [Element(self.base, p) for p in parts]

    def parse(self, text: str) -> Element:
        """Parse sums like ``a*t4 + 1/2*b*t3 - c*t2``; each term has one ``t_r``."""
        base = self.base
        out = self.zero()
        for term in parse_polynomial(text):
            left = base.one().scale(term.coefficient)
            right = base.one()
            r = None
            for name, e in term.factors:
                if name.startswith("t") and name[1:].isdigit() and name not in base.index:
                    if r is not None or e != 1:
                        raise ValueError(f"each term needs exactly one t factor: {text!r}")
                    r = int(name[1:])
                    continue
                if name not in base.index:
                    raise KeyError(f"unknown name {name!r} in {text!r}")
                f = base.basis_element(name)
                for _ in range(e):
                    if r is None:
                        left = left * f
                    else:
                        right = right * f
            if r is None:
                raise ValueError(f"term without a t factor in {text!r}")
            # t_r * right = (-1)^{deg right} right * t_r
            left = (left * right).scale((-1) ** (right.degree or 0))
            out = out + self.tensor(left, r)
        return out

    def format(self, x: Element) -> str:
        N = self.base_size
        items = []
        for i in sorted(x.coeffs, key=lambda i: (-(i // N), i % N)):
            items.append((self.labels[i], x.coeffs[i], False))
        return format_linear_combination(items)


def tensor_twisted(base: FiniteCDGA, k: int, diff_images, product_images, name: str) -> TwistedComplex:
    return TwistedComplex(base, k, diff_images, product_images, name)


# -- g_k and its Chevalley-Eilenberg algebra ----------------------------------

def jet_bracket(i: int, j: int, k: int) -> tuple[int, Fraction] | None:
    """``[e_i, e_j] = (i - j) e_{i+j}`` in g_k, basis ``e_0..e_{k-1}``.

    Returns ``(i + j, i - j)`` or ``None`` when the bracket leaves g_k.
    """
    _check_k(k)
    for x in (i, j):
        if not isinstance(x, int) or not 0 <= x < k:
            raise ValueError(f"index {x} outside 0..{k - 1}")
    if i + j >= k:
        return None
    return i + j, Fraction(i - j)


def jacobi_defects(k: int) -> list[tuple]:
    """Triples violating the Jacobi identity (empty when it holds)."""
    def br(u: dict, v: dict) -> dict:
        out: dict = {}
        for a, ca in u.items():
            for b, cb in v.items():
                hit = jet_bracket(a, b, k)
                if hit:
                    out[hit[0]] = out.get(hit[0], 0) + ca * cb * hit[1]
        return {x: c for x, c in out.items() if c}

    bad = []
    for a in range(k):
        for b in range(k):
            for c in range(k):
                ea, eb, ec = {a: 1}, {b: 1}, {c: 1}
                tot: dict = {}
                for x in (br(ea, br(eb, ec)), br(eb, br(ec, ea)), br(ec, br(ea, eb))):
                    for key, v in x.items():
                        tot[key] = tot.get(key, 0) + v
                if any(tot.values()):
                    bad.append((a, b, c))
    return bad


def ce_presentation(k: int) -> ModelPresentation:
    _check_k(k)
    diff = {}
    for r in range(k):
        terms = [f"{'-' if i < r else '+'} {r - i}*x{i}*x{r - i}" for i in range(r)]
        if terms:
            diff[f"x{r}"] = " ".join(terms)
    return ModelPresentation(f"CE(g_{k})", [(f"x{i}", 1) for i in range(k)], diff)


def ce_algebra(k: int) -> FiniteCDGA:
    """CE(g_k): odd generators ``x_0..x_{k-1}``, ``d x_r = sum_i (i-r) x_i x_{r-i}``."""
    return compile_presentation(ce_presentation(k))


@dataclass
class UniversalAlgebra:
    k: int
    ce: FiniteCDGA
    S: TwistedComplex

    def x(self, i: int) -> Element:
        return self.ce.basis_element(f"x{i}")


def universal_S(k: int) -> UniversalAlgebra:
    """S_k over CE(g_k): base change of the universal formulas along the identity."""
    ce = ce_algebra(k)
    gens = [ce.basis_element(f"x{i}") for i in range(k)]
    return UniversalAlgebra(k, ce, TwistedComplex(ce, k, gens, gens, f"S_{k}"))


def morphism_defects(u: UniversalAlgebra, target: FiniteCDGA,
                     images: Mapping[int, Element]) -> list[tuple[int, Element]]:
    """``(r, d psi(x_r) - psi(dx_r))`` for every generator where the two differ."""
    ce = u.ce
    psi = {i: images.get(i, target.zero()) for i in range(u.k)}
    for i, e in psi.items():
        if e.algebra is not target:
            raise ValueError(f"image of x{i} is not in the target algebra")
        if e and e.degree != 1:
            raise ValueError(f"image of x{i} must have degree 1")
    # psi on CE monomials
    cache: dict = {}

    def on_basis(b: int) -> Element:
        if b in cache:
            return cache[b]
        m = ce.monomials[b]
        val = target.one()
        for i, e in enumerate(m):
            if e:
                val = val * psi[i]
        cache[b] = val
        return val

    def apply(x: Element) -> Element:
        out = target.zero()
        for b, c in x.coeffs.items():
            out = out + on_basis(b).scale(c)
        return out

    bad = []
    for r in range(u.k):
        lhs = psi[r].d()
        rhs = apply(u.x(r).d())
        if lhs != rhs:
            bad.append((r, lhs - rhs))
    return bad


def base_change(u: UniversalAlgebra, target: FiniteCDGA,
                images: Mapping[int, Element], name: str | None = None) -> TwistedComplex:
    """``S_k (x)_{CE} target`` along ``x_i -> images[i]`` (missing images are 0).

    Rejects images that do not define a morphism of cdgas; that condition is
    the Maurer-Cartan equation for the data ``x_0 -> -gamma``, ``x_i -> eta_i``.
    """
    if target.unit is None:
        raise PreconditionError("base change needs a unital target")
    bad = morphism_defects(u, target, images)
    if bad:
        r, res = bad[0]
        raise MaurerCartanViolation(r, res)
    imgs = [images.get(i, target.zero()) for i in range(u.k)]
    return TwistedComplex(target, u.k, imgs, imgs, name or f"S_{u.k}(x){target.name}")
