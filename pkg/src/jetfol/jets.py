"""Truncated jet groups G_{k,l} of diffeomorphisms of (Q^l, 0).

A jet is a tuple of ``l`` polynomials in ``z1..zl`` with no constant term,
truncated above total degree ``k``.  The group law is composition
``compose(f, g) = f o g``, words are read the same way, so the word
``f g`` evaluates to ``f o g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Mapping, Sequence

from .linalg import Matrix, determinant, format_scalar, inverse as matrix_inverse, scalar, solve_affine
from .polyparse import parse_polynomial

Poly = dict  # exponent tuple -> Fraction


def _pmul(p: Poly, q: Poly, k: int) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        d1 = sum(e1)
        for e2, c2 in q.items():
            if d1 + sum(e2) > k:
                continue
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def _padd(p: Poly, q: Poly, s=1) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + s * c
    return {e: c for e, c in out.items() if c != 0}


def _degree_part(p: Poly, m: int) -> Poly:
    return {e: c for e, c in p.items() if sum(e) == m}


def _truncate(p: Poly, k: int) -> Poly:
    return {e: c for e, c in p.items() if sum(e) <= k}


def monomials(l: int, m: int) -> list[tuple]:
    """Exponent tuples of total degree ``m`` in ``l`` variables, in a fixed order."""
    out = []
    for combo in combinations_with_replacement(range(l), m):
        e = [0] * l
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def variable_names(l: int) -> list[str]:
    return ["z"] if l == 1 else [f"z{i}" for i in range(1, l + 1)]


def _format_poly(p: Poly, names: Sequence[str]) -> str:
    if not p:
        return "0"
    pieces = []
    for e in sorted(p, key=lambda e: (sum(e), tuple(-x for x in e))):
        c = p[e]
        mono = "*".join(n if x == 1 else f"{n}^{x}" for n, x in zip(names, e) if x)
        mag = abs(c)
        body = mono if mag == 1 else f"{format_scalar(mag)}*{mono}"
        pieces.append(("-" if c < 0 else "+", body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for s, b in pieces[1:]:
        out += f" {s} {b}"
    return out


def parse_jet_component(text: str, l: int) -> Poly:
    names = variable_names(l)
    aliases = {n: i for i, n in enumerate(names)}
    if l == 1:
        aliases["z1"] = 0
    out: Poly = {}
    for term in parse_polynomial(text):
        e = [0] * l
        for name, x in term.factors:
            if name not in aliases:
                raise ValueError(f"unknown jet variable {name!r}; expected one of {names}")
            e[aliases[name]] += x
        key = tuple(e)
        out[key] = out.get(key, 0) + term.coefficient
    return {e: c for e, c in out.items() if c != 0}


class JetMap:
    """A k-jet at 0 of a diffeomorphism of Q^l fixing 0."""

    __slots__ = ("l", "k", "components")

    def __init__(self, l: int, k: int, components: Sequence[Poly], *, check: bool = True):
        if not isinstance(l, int) or not isinstance(k, int) or l < 1 or k < 1:
            raise ValueError("jets need l >= 1 and k >= 1")
        if len(components) != l:
            raise ValueError(f"expected {l} components, got {len(components)}")
        comps = []
        for p in components:
            q = {}
            for e, c in p.items():
                e = tuple(e)
                if len(e) != l:
                    raise ValueError("exponent length does not match l")
                if sum(e) == 0 and c != 0:
                    raise ValueError("jets fix the origin: constant terms are not allowed")
                if 1 <= sum(e) <= k and c != 0:
                    q[e] = scalar(c)
            comps.append(q)
        self.l, self.k, self.components = l, k, tuple(comps)
        if check and determinant(self.linear_part()) == 0:
            raise ValueError("linear part is not invertible")

    @classmethod
    def identity(cls, l: int, k: int) -> "JetMap":
        return cls(l, k, [{tuple(1 if j == i else 0 for j in range(l)): Fraction(1)}
                          for i in range(l)])

    @classmethod
    def parse(cls, l: int, k: int, texts: Sequence[str] | str) -> "JetMap":
        if isinstance(texts, str):
            texts = [texts]
        polys = [parse_jet_component(t, l) for t in texts]
        for p in polys:
            if any(sum(e) > k for e in p):
                raise ValueError(f"component has terms above order {k}")
        return cls(l, k, polys)

    @classmethod
    def linear(cls, rows: Sequence[Sequence], k: int) -> "JetMap":
        l = len(rows)
        comps = []
        for i in range(l):
            comps.append({tuple(1 if t == j else 0 for t in range(l)): scalar(rows[i][j])
                          for j in range(l) if rows[i][j] != 0})
        return cls(l, k, comps)

    def linear_part(self) -> Matrix:
        ent = {}
        for i, p in enumerate(self.components):
            for j in range(self.l):
                c = p.get(tuple(1 if t == j else 0 for t in range(self.l)), 0)
                if c:
                    ent[i, j] = c
        return Matrix(self.l, self.l, ent)

    def homogeneous(self, m: int) -> list[Poly]:
        return [_degree_part(p, m) for p in self.components]

    def __eq__(self, other) -> bool:
        return (isinstance(other, JetMap) and (self.l, self.k) == (other.l, other.k)
                and self.components == other.components)

    def __hash__(self):
        return hash((self.l, self.k, tuple(frozenset(p.items()) for p in self.components)))

    def is_identity(self) -> bool:
        return self == JetMap.identity(self.l, self.k)

    def strings(self) -> list[str]:
        names = variable_names(self.l)
        return [_format_poly(p, names) for p in self.components]

    def __repr__(self) -> str:
        return f"JetMap(l={self.l}, k={self.k}, {self.strings()})"

    def __matmul__(self, other: "JetMap") -> "JetMap":
        return compose(self, other)


def _same_group(f: JetMap, g: JetMap):
    if (f.l, f.k) != (g.l, g.k):
        raise ValueError(f"jets live in different groups: G_{{{f.k},{f.l}}} vs G_{{{g.k},{g.l}}}")


def substitute(p: Poly, g: Sequence[Poly], k: int) -> Poly:
    """``p(g_1, ..., g_l)`` truncated above degree ``k``."""
    l = len(g)
    powers: list[list[Poly]] = [[{tuple([0] * l): Fraction(1)}] for _ in range(l)]
    out: Poly = {}
    for e, c in p.items():
        term: Poly = {tuple([0] * l): c}
        for i, x in enumerate(e):
            while len(powers[i]) <= x:
                powers[i].append(_pmul(powers[i][-1], g[i], k))
            if x:
                term = _pmul(term, powers[i][x], k)
        out = _padd(out, term)
    return out


def compose(f: JetMap, g: JetMap) -> JetMap:
    """``f o g`` by truncated substitution."""
    _same_group(f, g)
    return JetMap(f.l, f.k, [substitute(p, g.components, f.k) for p in f.components], check=False)


def inverse(f: JetMap) -> JetMap:
    """Two-sided inverse, solved one homogeneous degree at a time."""
    l, k = f.l, f.k
    ainv = matrix_inverse(f.linear_part())
    h = [dict() for _ in range(l)]
    for i in range(l):
        for j in range(l):
            c = ainv[i, j]
            if c:
                h[i][tuple(1 if t == j else 0 for t in range(l))] = c
    for m in range(2, k + 1):
        err = [_degree_part(substitute(p, h, k), m) for p in f.components]
        for i in range(l):
            for j in range(l):
                c = ainv[i, j]
                if c:
                    h[i] = _padd(h[i], err[j], -c)
    out = JetMap(l, k, h, check=False)
    assert compose(f, out).is_identity()
    return out


def project(f: JetMap, k2: int) -> JetMap:
    if not isinstance(k2, int) or not 1 <= k2 <= f.k:
        raise ValueError(f"projection order must lie in 1..{f.k}")
    return JetMap(f.l, k2, [_truncate(p, k2) for p in f.components], check=False)


def section(f: JetMap) -> JetMap:
    """Zero-padding lift to order k+1."""
    return JetMap(f.l, f.k + 1, f.components, check=False)


# -- the abelian kernel of G_{k+1,l} -> G_{k,l} -------------------------------

@dataclass(frozen=True)
class KernelElement:
    """Homogeneous degree-(k+1) part of a jet over the identity in G_{k+1,l}."""

    l: int
    k: int
    coefficients: tuple  # l dicts: exponent tuple of degree k+1 -> Fraction

    @classmethod
    def zero(cls, l: int, k: int) -> "KernelElement":
        return cls(l, k, tuple({} for _ in range(l)))

    @classmethod
    def from_polys(cls, l: int, k: int, polys: Sequence[Poly]) -> "KernelElement":
        comps = []
        for p in polys:
            if any(sum(e) != k + 1 for e, c in p.items() if c != 0):
                raise ValueError(f"kernel elements are homogeneous of degree {k + 1}")
            comps.append({tuple(e): scalar(c) for e, c in p.items() if c != 0})
        return cls(l, k, tuple(comps))

    @classmethod
    def from_vector(cls, l: int, k: int, vec: Sequence) -> "KernelElement":
        basis = kernel_basis_monomials(l, k)
        comps = [dict() for _ in range(l)]
        for (i, e), c in zip(basis, vec):
            if c != 0:
                comps[i][e] = Fraction(c)
        return cls(l, k, tuple(comps))

    def vector(self) -> list[Fraction]:
        return [self.coefficients[i].get(e, Fraction(0)) for i, e in kernel_basis_monomials(self.l, self.k)]

    def __add__(self, other: "KernelElement") -> "KernelElement":
        if (self.l, self.k) != (other.l, other.k):
            raise ValueError("kernel elements from different groups")
        return KernelElement(self.l, self.k,
                             tuple(_padd(p, q) for p, q in zip(self.coefficients, other.coefficients)))

    def scale(self, c) -> "KernelElement":
        c = scalar(c)
        return KernelElement(self.l, self.k,
                             tuple({e: c * v for e, v in p.items() if c * v != 0} for p in self.coefficients))

    def __neg__(self) -> "KernelElement":
        return self.scale(-1)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def strings(self) -> list[str]:
        names = variable_names(self.l)
        return [_format_poly(p, names) for p in self.coefficients]


def kernel_basis_monomials(l: int, k: int) -> list[tuple]:
    """Coordinates of the kernel: (component, degree-(k+1) monomial)."""
    return [(i, e) for i in range(l) for e in monomials(l, k + 1)]


def kernel_dim(l: int, k: int) -> int:
    return l * comb(l + k, k + 1)


def kernel_embed(b: KernelElement) -> JetMap:
    ident = JetMap.identity(b.l, b.k + 1)
    return JetMap(b.l, b.k + 1, [_padd(p, q) for p, q in zip(ident.components, b.coefficients)],
                  check=False)


def kernel_part(f: JetMap) -> KernelElement:
    """The degree-(k+1) part of ``f`` in G_{k+1,l}, which must project to the identity."""
    if not project(f, f.k - 1).is_identity():
        raise ValueError("jet does not lie in the kernel of the projection")
    return KernelElement(f.l, f.k - 1, tuple(f.homogeneous(f.k)))


def section_cocycle(c1: JetMap, c2: JetMap) -> KernelElement:
    """``sigma(c1 c2)^-1 sigma(c1) sigma(c2)`` for the zero-padding section."""
    _same_group(c1, c2)
    val = compose(inverse(section(compose(c1, c2))), compose(section(c1), section(c2)))
    return kernel_part(val)


def module_action(psi: JetMap, b: KernelElement) -> KernelElement:
    """Conjugation ``psi^-1 o (id + b) o psi`` in G_{k+1,l}.

    It depends only on the linear part of ``psi``; for l = 1 it scales ``b``
    by ``a(psi)^k``.
    """
    if (psi.l, psi.k) not in {(b.l, b.k), (b.l, b.k + 1)}:
        raise ValueError("module action needs psi in G_{k,l} (or G_{k+1,l}) and b over G_{k,l}")
    s = section(psi) if psi.k == b.k else psi
    return kernel_part(compose(inverse(s), compose(kernel_embed(b), s)))


# -- representations of finitely presented groups ------------------------

def parse_letter(tok: str) -> tuple[str, int]:
    tok = tok.strip()
    for suffix in ("^-1", "^(-1)", "⁻¹"):
        if tok.endswith(suffix):
            return tok[: -len(suffix)], -1
    if tok.endswith("^1"):
        return tok[:-2], 1
    return tok, 1


@dataclass
class GroupPresentation:
    generators: list
    relations: list = field(default_factory=list)  # each a list of (name, +-1)

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate group generators")
        rels = []
        for word in self.relations:
            if isinstance(word, str):
                word = word.split()
            w = [parse_letter(x) if isinstance(x, str) else (x[0], int(x[1])) for x in word]
            for name, _ in w:
                if name not in self.generators:
                    raise ValueError(f"relation mentions undeclared generator {name!r}")
            rels.append(w)
        self.relations = rels


@dataclass
class JetRepresentation:
    presentation: GroupPresentation
    images: dict  # generator -> JetMap

    def __post_init__(self):
        gens = self.presentation.generators
        missing = [g for g in gens if g not in self.images]
        if missing:
            raise ValueError(f"no image for generators {missing}")
        groups = {(f.l, f.k) for f in self.images.values()}
        if len(groups) > 1:
            raise ValueError("images must share (l, k)")
        if not gens:
            raise ValueError("a presentation needs at least one generator")

    @property
    def l(self) -> int:
        return next(iter(self.images.values())).l

    @property
    def k(self) -> int:
        return next(iter(self.images.values())).k


def evaluate_word(word, images: Mapping[str, JetMap]) -> JetMap:
    first = next(iter(images.values()))
    out = JetMap.identity(first.l, first.k)
    inv_cache: dict = {}
    for name, e in word:
        f = images[name]
        if e < 0:
            if name not in inv_cache:
                inv_cache[name] = inverse(f)
            f = inv_cache[name]
        out = compose(out, f)
    return out


def word_string(word) -> str:
    return " ".join(n if e > 0 else f"{n}^-1" for n, e in word)


@dataclass
class RepReport:
    passed: bool
    offenders: list

    def to_dict(self) -> dict:
        return {"passed": self.passed, "offenders": self.offenders}


def rep_validate(r: JetRepresentation, images: Mapping[str, JetMap] | None = None) -> RepReport:
    imgs = images if images is not None else r.images
    offenders = []
    for word in r.presentation.relations:
        val = evaluate_word(word, imgs)
        if not val.is_identity():
            offenders.append({"relation": word_string(word), "value": val.strings()})
    return RepReport(not offenders, offenders)


@dataclass
class LiftResult:
    images: dict  # generator -> JetMap in G_{k+1,l}
    solution_space_dim: int
    corrections: dict  # generator -> KernelElement


def rep_lift(r: JetRepresentation) -> LiftResult | None:
    """Lift a representation from G_{k,l} to G_{k+1,l}, or ``None`` if obstructed.

    Each lift is ``sigma(g) o K(b_g)``.  In a relation word the kernel factors
    are moved to the right end with ``K(b) o h = h o K(module_action(h, b))``,
    so the word evaluates to ``K(p + sum of transported corrections)`` where
    ``p`` is the defect of the zero-padded lifts.  Cancelling ``p`` is an
    affine system in the unknown corrections.
    """
    rep = rep_validate(r)
    if not rep.passed:
        raise ValueError(f"representation is not valid: {rep.offenders[0]['relation']}")
    l, k = r.l, r.k
    gens = r.presentation.generators
    kb = kernel_basis_monomials(l, k)
    nk = len(kb)
    sig = {g: section(r.images[g]) for g in gens}
    sig_inv = {g: inverse(sig[g]) for g in gens}
    unit = [KernelElement.from_vector(l, k, [1 if t == s else 0 for t in range(nk)]) for s in range(nk)]

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for word in r.presentation.relations:
        letters = [sig[n] if e > 0 else sig_inv[n] for n, e in word]
        total = JetMap.identity(l, k + 1)
        for f in letters:
            total = compose(total, f)
        p = kernel_part(total).vector()
        # suffix[j] = composite of the sigma parts strictly after the kernel factor of letter j
        block = [[Fraction(0)] * (len(gens) * nk) for _ in range(nk)]
        suffix = JetMap.identity(l, k + 1)
        for j in range(len(word) - 1, -1, -1):
            name, e = word[j]
            if e > 0:
                after = suffix
            else:
                after = compose(sig_inv[name], suffix)
            gpos = gens.index(name)
            for s in range(nk):
                moved = module_action(after, unit[s]).vector()
                for t in range(nk):
                    block[t][gpos * nk + s] += e * moved[t]
            suffix = compose(letters[j], suffix)
        rows.extend(block)
        rhs.extend(-x for x in p)

    ncols = len(gens) * nk
    a = Matrix.from_rows(rows, cols=ncols) if rows else Matrix(0, ncols)
    sol = solve_affine(a, rhs)
    if sol is None:
        return None
    corrections = {g: KernelElement.from_vector(l, k, sol.particular[i * nk:(i + 1) * nk])
                   for i, g in enumerate(gens)}
    lifted = {g: compose(sig[g], kernel_embed(corrections[g])) for g in gens}
    assert rep_validate(r, lifted).passed
    assert all(project(lifted[g], k) == r.images[g] for g in gens)
    return LiftResult(lifted, sol.dim, corrections)
