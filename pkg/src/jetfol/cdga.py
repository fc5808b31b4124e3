"""Finite graded commutative differential algebras.

A :class:`FiniteCDGA` is given by a finite homogeneous basis, a product table
and a differential.  Presentations by generators compile to one, with the
monomial normal form fixed once for the whole project: generators ordered by
declaration, each transposition of two odd generators costing a sign.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product as cartesian
from typing import Callable, Mapping, Sequence

from .linalg import Matrix, Subquotient, format_scalar, scalar
from .polyparse import parse_polynomial


class InconsistentPresentationError(ValueError):
    """A compiled presentation violates one of the CDGA identities."""


class AlgebraMismatchError(ValueError):
    """Elements from different algebras were combined."""


class PreconditionError(ValueError):
    pass


def koszul(a: int, b: int) -> int:
    return -1 if (a * b) % 2 else 1


class Element:
    """An exact, possibly inhomogeneous, element of a finite algebra."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: "FiniteCDGA", coeffs: Mapping[int, Fraction] | None = None):
        self.algebra = algebra
        self.coeffs = {i: Fraction(v) for i, v in (coeffs or {}).items() if v != 0}

    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            raise TypeError(f"expected an Element, got {type(other).__name__}")
        if other.algebra is not self.algebra:
            raise AlgebraMismatchError(
                f"elements of {self.algebra.name!r} and {other.algebra.name!r} cannot be combined"
            )

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        out = dict(self.coeffs)
        for i, v in other.coeffs.items():
            out[i] = out.get(i, 0) + v
        return Element(self.algebra, out)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __neg__(self) -> "Element":
        return Element(self.algebra, {i: -v for i, v in self.coeffs.items()})

    def scale(self, c) -> "Element":
        c = scalar(c)
        return Element(self.algebra, {i: c * v for i, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, Element):
            return self.algebra.multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def d(self) -> "Element":
        return self.algebra.differential(self)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.coeffs
        if not isinstance(other, Element):
            return NotImplemented
        return self.algebra is other.algebra and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.algebra), frozenset(self.coeffs.items())))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def degrees(self) -> set[int]:
        return {self.algebra.degrees[i] for i in self.coeffs}

    @property
    def degree(self) -> int | None:
        """The degree of a homogeneous element (``None`` for zero)."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise ValueError(f"element {self} is not homogeneous")
        return ds.pop()

    def component(self, p: int) -> list[Fraction]:
        """Dense coordinate vector of the degree-``p`` part."""
        alg = self.algebra
        vec = [Fraction(0)] * alg.dim(p)
        for i, v in self.coeffs.items():
            if alg.degrees[i] == p:
                vec[alg.position[i]] = v
        return vec

    def homogeneous_part(self, p: int) -> "Element":
        return Element(self.algebra, {i: v for i, v in self.coeffs.items()
                                      if self.algebra.degrees[i] == p})

    def __str__(self) -> str:
        return self.algebra.format(self)

    def __repr__(self) -> str:
        return f"<{self.algebra.name}: {self}>"


@dataclass
class ValidationReport:
    passed: bool = True
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    mode: str = "full"

    def fail(self, identity: str, witness: str):
        self.passed = False
        self.failures.append({"identity": identity, "witness": witness})

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failures": self.failures,
                "notes": self.notes, "mode": self.mode}

    def first_failure(self) -> str:
        if not self.failures:
            return ""
        f = self.failures[0]
        return f"{f['identity']}: {f['witness']}"


class FiniteCDGA:
    """Finite-dimensional graded commutative differential algebra.

    ``product`` is a table ``(i, j) -> {k: coefficient}`` or a callable with
    the same signature; ``differential`` maps each basis index to its image.
    ``unit`` may be ``None`` for non-unital algebras (twisted complexes).
    """

    def __init__(
        self,
        name: str,
        labels: Sequence[str],
        degrees: Sequence[int],
        product: Mapping | Callable,
        differential: Mapping[int, Mapping[int, Fraction]],
        unit: int | None = None,
        *,
        generators: Sequence[int] | None = None,
        monomials: Sequence[tuple] | None = None,
        generator_names: Sequence[str] | None = None,
        poly0_vars: Sequence[str] = (),
        truncated_pairs: frozenset = frozenset(),
        metadata: dict | None = None,
    ):
        if len(labels) != len(degrees):
            raise ValueError("labels and degrees differ in length")
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be unique")
        self.name = name
        self.labels = tuple(labels)
        self.degrees = tuple(int(d) for d in degrees)
        self.unit = unit
        self._product_table = product if not callable(product) else None
        self._product_rule = product if callable(product) else None
        self._product_cache: dict = {}
        self._d = {i: {j: Fraction(v) for j, v in img.items() if v != 0}
                   for i, img in differential.items()}
        self.generators = tuple(generators) if generators is not None else None
        self.monomials = tuple(monomials) if monomials is not None else None
        self.generator_names = tuple(generator_names) if generator_names is not None else None
        self.poly0_vars = tuple(poly0_vars)
        self.truncated_pairs = truncated_pairs
        self.metadata = dict(metadata or {})
        self.metadata.setdefault("quasi_isomorphism", "assumed, not verified")
        self.min_degree = min(self.degrees) if self.degrees else 0
        self.top_degree = max(self.degrees) if self.degrees else 0
        self.by_degree: dict[int, list[int]] = {}
        self.position: dict[int, int] = {}
        for i, p in enumerate(self.degrees):
            lst = self.by_degree.setdefault(p, [])
            self.position[i] = len(lst)
            lst.append(i)
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    # -- basic structure ------------------------------------------------
    def __repr__(self) -> str:
        return f"FiniteCDGA({self.name!r}, dims={self.dims()})"

    def __len__(self) -> int:
        return len(self.labels)

    def dim(self, p: int) -> int:
        return len(self.by_degree.get(p, ()))

    def dims(self) -> list[int]:
        return [self.dim(p) for p in range(0, self.top_degree + 1)]

    def zero(self) -> Element:
        return Element(self)

    def one(self) -> Element:
        if self.unit is None:
            raise PreconditionError(f"{self.name!r} has no unit")
        return Element(self, {self.unit: 1})

    def basis_element(self, i: int | str) -> Element:
        if isinstance(i, str):
            if i not in self.index:
                raise KeyError(f"{self.name!r} has no basis element {i!r}")
            i = self.index[i]
        return Element(self, {i: 1})

    __getitem__ = basis_element

    def from_vector(self, p: int, vec: Sequence) -> Element:
        idx = self.by_degree.get(p, [])
        if len(vec) != len(idx):
            raise ValueError(f"degree {p} has dimension {len(idx)}, got {len(vec)} coordinates")
        return Element(self, {i: v for i, v in zip(idx, vec)})

    def mul_basis(self, i: int, j: int) -> dict:
        if self._product_table is not None:
            return self._product_table.get((i, j), {})
        key = (i, j)
        hit = self._product_cache.get(key)
        if hit is None:
            hit = {k: Fraction(v) for k, v in self._product_rule(i, j).items() if v != 0}
            self._product_cache[key] = hit
        return hit

    def multiply(self, x: Element, y: Element) -> Element:
        if x.algebra is not self or y.algebra is not self:
            raise AlgebraMismatchError(f"multiply expects elements of {self.name!r}")
        out: dict = {}
        for i, a in x.coeffs.items():
            for j, b in y.coeffs.items():
                for k, c in self.mul_basis(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return Element(self, out)

    def d_basis(self, i: int) -> dict:
        return self._d.get(i, {})

    def differential(self, x: Element) -> Element:
        if x.algebra is not self:
            raise AlgebraMismatchError(f"differential expects an element of {self.name!r}")
        out: dict = {}
        for i, a in x.coeffs.items():
            for k, c in self.d_basis(i).items():
                out[k] = out.get(k, 0) + a * c
        return Element(self, out)

    def d_matrix(self, p: int) -> Matrix:
        """Matrix of ``d`` from degree ``p`` to degree ``p + 1``."""
        src = self.by_degree.get(p, [])
        entries = {}
        for col, i in enumerate(src):
            for k, c in self.d_basis(i).items():
                entries[self.position[k], col] = c
        return Matrix(self.dim(p + 1), len(src), entries)

    def left_multiplication_matrix(self, x: Element, p: int) -> Matrix:
        """Matrix of ``y -> x*y`` from degree ``p`` to ``p + deg x``."""
        q = p + (x.degree or 0)
        src = self.by_degree.get(p, [])
        entries: dict = {}
        for col, j in enumerate(src):
            for k, c in self.multiply(x, Element(self, {j: 1})).coeffs.items():
                key = (self.position[k], col)
                entries[key] = entries.get(key, 0) + c
        return Matrix(self.dim(q), len(src), entries)

    # -- cohomology -----------------------------------------------------
    @cached_property
    def _cohomology(self) -> dict:
        mats = {p: self.d_matrix(p) for p in range(self.min_degree - 1, self.top_degree + 1)}
        return cohomology_spaces(self, mats)

    def cohomology(self, p: int) -> Subquotient:
        if p not in self._cohomology:
            return Subquotient(Matrix(0, 0), Matrix(0, 0))
        return self._cohomology[p]

    def betti(self) -> list[int]:
        return [self.cohomology(p).dim for p in range(0, self.top_degree + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** p * self.dim(p) for p in range(0, self.top_degree + 1))

    # -- text -----------------------------------------------------------
    def parse(self, text: str) -> Element:
        """Build an element from a polynomial string over this algebra's labels."""
        out = self.zero()
        for term in parse_polynomial(text):
            value = Element(self, {self.unit: term.coefficient}) if self.unit is not None else None
            first = value is None
            coeff = term.coefficient
            for name, exp in term.factors:
                if name not in self.index:
                    raise KeyError(f"unknown name {name!r} in {text!r} for algebra {self.name!r}")
                for _ in range(exp):
                    b = self.basis_element(name)
                    if first:
                        value = b.scale(coeff)
                        first = False
                    else:
                        value = value * b
            if value is None:
                if coeff != 0:
                    raise PreconditionError(f"{self.name!r} has no unit; constant term in {text!r}")
                continue
            out = out + value
        return out

    def format(self, x: Element) -> str:
        return format_linear_combination(
            (self.labels[i], x.coeffs[i], i == self.unit) for i in sorted(x.coeffs)
        )

    def element_strings(self, x: Element) -> str:
        return self.format(x)


def format_linear_combination(items) -> str:
    pieces = []
    for label, c, is_unit in items:
        mag = abs(c)
        if is_unit:
            body = format_scalar(mag)
        elif mag == 1:
            body = label
        else:
            body = f"{format_scalar(mag)}*{label}"
        sign = "-" if c < 0 else "+"
        pieces.append((sign, body))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def cohomology_spaces(alg: FiniteCDGA, mats: Mapping[int, Matrix]) -> dict[int, Subquotient]:
    """One :class:`Subquotient` per degree for the differential ``mats``."""
    out = {}
    for p in range(alg.min_degree, alg.top_degree + 1):
        outgoing = mats.get(p, Matrix(alg.dim(p + 1), alg.dim(p)))
        incoming = mats.get(p - 1, Matrix(alg.dim(p), alg.dim(p - 1)))
        out[p] = Subquotient(outgoing, incoming)
    return out


# -- validation ---------------------------------------------------------

def _axpy(acc: dict, a, x: Mapping):
    for k, v in x.items():
        acc[k] = acc.get(k, 0) + a * v

def validate(c: FiniteCDGA, *, max_pairs: int = 250_000, max_triples: int = 250_000,
             seed: int = 0) -> ValidationReport:
    """Check unit, graded commutativity, associativity, d^2 = 0 and Leibniz.

    Algebras compiled from a presentation are checked against generators in
    one slot, which suffices because every basis monomial is a product of a
    shorter basis monomial and a generator.  Other algebras are checked on all
    pairs and triples, falling back to a seeded sample above the caps.
    """
    rep = ValidationReport()
    n = len(c)
    basis = list(range(n))
    rng = random.Random(seed)
    e = [Element(c, {i: 1}) for i in basis]

    def lbl(i):
        return c.labels[i]

    # degree bookkeeping
    for i in basis:
        for k in c.d_basis(i):
            if c.degrees[k] != c.degrees[i] + 1:
                rep.fail("degree(d x) = degree(x) + 1", f"d({lbl(i)}) hits {lbl(k)}")

    if c.generators is not None and c.monomials is not None:
        rep.mode = "generator-reduced"
        right = list(c.generators)
        pairs = [(i, g) for i in basis for g in right]
        triples = [(i, j, g) for i in basis for j in basis for g in right]
    else:
        pairs = [(i, j) for i in basis for j in basis]
        triples = None
        if n * n > max_pairs:
            rep.mode = "sampled"
            pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(max_pairs)]
    if triples is None:
        if n ** 3 <= max_triples:
            triples = list(cartesian(basis, basis, basis))
        else:
            rep.mode = "sampled"
            triples = [(rng.randrange(n), rng.randrange(n), rng.randrange(n))
                       for _ in range(max_triples)]
    elif len(triples) > max_triples * 4:
        rep.mode = "generator-reduced, sampled"
        triples = rng.sample(triples, max_triples)

    if c.unit is not None:
        u = e[c.unit]
        if c.degrees[c.unit] != 0:
            rep.fail("unit has degree 0", lbl(c.unit))
        for i in basis:
            if u * e[i] != e[i] or e[i] * u != e[i]:
                rep.fail("1*x = x = x*1", lbl(i))

    for i, j in pairs:
        xy = c.mul_basis(i, j)
        for k in xy:
            if c.degrees[k] != c.degrees[i] + c.degrees[j]:
                rep.fail("degree(xy) = degree(x) + degree(y)", f"{lbl(i)}*{lbl(j)} hits {lbl(k)}")
        sgn = koszul(c.degrees[i], c.degrees[j])
        yx = {k: sgn * v for k, v in c.mul_basis(j, i).items()}
        if xy != yx:
            rep.fail("x*y = (-1)^(|x||y|) y*x", f"x={lbl(i)}, y={lbl(j)}")

    for i, j, k in triples:
        if (e[i] * e[j]) * e[k] != e[i] * (e[j] * e[k]):
            rep.fail("(x*y)*z = x*(y*z)", f"x={lbl(i)}, y={lbl(j)}, z={lbl(k)}")

    for i in basis:
        dd = e[i].d().d()
        if dd:
            rep.fail("d(d(x)) = 0", f"d(d({lbl(i)})) = {dd}")

    relaxed = 0
    dcache = [c.d_basis(i) for i in basis]
    for i, j in pairs:
        lhs: dict = {}
        for k, a in c.mul_basis(i, j).items():
            _axpy(lhs, a, dcache[k])
        rhs: dict = {}
        for k, a in dcache[i].items():
            _axpy(rhs, a, c.mul_basis(k, j))
        s = (-1) ** c.degrees[i]
        for k, a in dcache[j].items():
            _axpy(rhs, s * a, c.mul_basis(i, k))
        diff = {k: v for k, v in lhs.items() if v != rhs.get(k, 0)}
        diff.update({k: -v for k, v in rhs.items() if k not in lhs and v != 0})
        if diff:
            if (i, j) in c.truncated_pairs:
                relaxed += 1
                continue
            rep.fail("d(x*y) = dx*y + (-1)^|x| x*dy",
                     f"x={lbl(i)}, y={lbl(j)}: {Element(c, diff)}")
    if c.truncated_pairs:
        rep.notes.append(
            f"Leibniz not required on {len(c.truncated_pairs)} pairs whose product is "
            f"truncated; {relaxed} of the checked ones differ"
        )
    if c.poly0_vars:
        rep.notes.append("poly0 truncation in effect for " + ", ".join(c.poly0_vars))
    return rep


# -- presentations ------------------------------------------------------

@dataclass
class ModelPresentation:
    name: str
    generators: list  # (name, degree)
    differential: dict = field(default_factory=dict)  # generator -> polynomial string
    relations: list = field(default_factory=list)  # monomial strings declared zero
    poly0_vars: list = field(default_factory=list)
    truncation: int = 4


def _mono_label(names, exps) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def compile_presentation(p: ModelPresentation, *, check: bool = True) -> FiniteCDGA:
    """Compile generators, relations and differential rules to a FiniteCDGA."""
    names = [g[0] for g in p.generators]
    degs = [int(g[1]) for g in p.generators]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate generator names in {p.name!r}")
    if len(names) == 0:
        raise ValueError("a presentation needs at least one generator")
    poly0 = set(p.poly0_vars)
    unknown = poly0 - set(names)
    if unknown:
        raise ValueError(f"poly0 variables {sorted(unknown)} are not generators")
    for nm, dg in zip(names, degs):
        if dg < 0:
            raise ValueError(f"generator {nm!r} has negative degree")
        if dg == 0 and nm not in poly0:
            raise ValueError(f"degree-0 generator {nm!r} must be declared as a poly0 variable")
        if nm in poly0 and dg != 0:
            raise ValueError(f"poly0 variable {nm!r} must have degree 0")
        if dg > 0 and dg % 2 == 0:
            raise ValueError(f"even generator {nm!r} of positive degree is not supported")
    for g in p.differential:
        if g not in names:
            raise ValueError(f"differential given for unknown generator {g!r}")
    ng = len(names)
    gi = {nm: i for i, nm in enumerate(names)}
    odd = [d % 2 == 1 for d in degs]
    N = int(p.truncation)
    if N < 0:
        raise ValueError("truncation must be non-negative")

    # A variable's differential du counts towards the truncation weight so
    # that the truncated ideal is closed under d.
    weight = [1 if nm in poly0 else 0 for nm in names]
    for v in p.poly0_vars:
        rule = p.differential.get(v)
        if rule is None:
            continue
        terms = parse_polynomial(rule)
        if len(terms) == 1 and len(terms[0].factors) == 1:
            g, e = terms[0].factors[0]
            if e == 1 and g in gi and degs[gi[g]] == 1 and g not in poly0:
                weight[gi[g]] = 1

    relations = []
    for r in p.relations:
        terms = parse_polynomial(r)
        if len(terms) != 1:
            raise ValueError(f"relation {r!r} must be a single monomial")
        exps = [0] * ng
        for nm, e in terms[0].factors:
            if nm not in gi:
                raise ValueError(f"relation {r!r} mentions unknown generator {nm!r}")
            exps[gi[nm]] += e
        relations.append(tuple(exps))

    def killed(exps) -> bool:
        return any(all(a >= b for a, b in zip(exps, r)) for r in relations)

    ranges = [range(0, 2) if odd[i] else range(0, N + 1) for i in range(ng)]
    monos = []
    for exps in cartesian(*ranges):
        if sum(w * e for w, e in zip(weight, exps)) > N:
            continue
        if killed(exps):
            continue
        monos.append(exps)

    def sort_key(exps):
        deg = sum(d * e for d, e in zip(degs, exps))
        seq = [i for i in range(ng) for _ in range(exps[i])]
        return deg, seq

    monos.sort(key=sort_key)
    mindex = {m: k for k, m in enumerate(monos)}
    labels = [_mono_label(names, m) for m in monos]
    bdeg = [sum(d * e for d, e in zip(degs, m)) for m in monos]

    def mono_mul(m1, m2):
        """(sign, exps) of m1*m2 in normal form; (0, None) if it vanishes, (0, 'cut') if truncated."""
        sign = 1
        for i in range(ng):
            if odd[i] and m1[i] and m2[i]:
                return 0, None
        # moving each odd factor of m2 left past the larger odd factors of m1
        inversions = 0
        for j in range(ng):
            if odd[j] and m2[j]:
                inversions += sum(1 for i in range(j + 1, ng) if odd[i] and m1[i])
        if inversions % 2:
            sign = -1
        m = tuple(a + b for a, b in zip(m1, m2))
        if sum(w * e for w, e in zip(weight, m)) > N:
            return 0, "cut"
        if killed(m):
            return 0, None
        return sign, m

    table: dict = {}
    truncated = set()
    for a, m1 in enumerate(monos):
        for b, m2 in enumerate(monos):
            s, m = mono_mul(m1, m2)
            if m == "cut":
                truncated.add((a, b))
            elif s:
                table[a, b] = {mindex[m]: s}

    gen_idx = []
    for i in range(ng):
        m = tuple(1 if j == i else 0 for j in range(ng))
        if m in mindex:
            gen_idx.append(mindex[m])
    unit = mindex[tuple([0] * ng)]

    proto = FiniteCDGA(p.name, labels, bdeg, table, {}, unit)

    dgen: dict[int, Element] = {}
    for nm in names:
        m = tuple(1 if j == gi[nm] else 0 for j in range(ng))
        if m not in mindex:
            continue
        rule = p.differential.get(nm)
        if rule is None:
            dgen[gi[nm]] = proto.zero()
            continue
        img = proto.zero()
        for term in parse_polynomial(rule):
            val = Element(proto, {unit: term.coefficient})
            for fn, fe in term.factors:
                if fn not in gi:
                    raise ValueError(f"differential of {nm!r} mentions unknown generator {fn!r}")
                gm = tuple(1 if j == gi[fn] else 0 for j in range(ng))
                if gm not in mindex:
                    val = proto.zero()
                    break
                for _ in range(fe):
                    val = val * Element(proto, {mindex[gm]: 1})
            img = img + val
        bad = {bdeg[k] for k in img.coeffs} - {degs[gi[nm]] + 1}
        if bad:
            raise InconsistentPresentationError(
                f"d({nm}) = {rule!r} is not homogeneous of degree {degs[gi[nm]] + 1}"
            )
        dgen[gi[nm]] = img

    diff: dict[int, dict] = {}
    for k, m in enumerate(monos):
        seq = [i for i in range(ng) for _ in range(m[i])]
        total = proto.zero()
        for pos, g in enumerate(seq):
            pre = [0] * ng
            for q in seq[:pos]:
                pre[q] += 1
            suf = [0] * ng
            for q in seq[pos + 1:]:
                suf[q] += 1
            pre_e = Element(proto, {mindex[tuple(pre)]: 1})
            suf_e = Element(proto, {mindex[tuple(suf)]: 1})
            sign = (-1) ** sum(degs[q] for q in seq[:pos])
            total = total + (pre_e * dgen[g] * suf_e).scale(sign)
        diff[k] = dict(total.coeffs)

    alg = FiniteCDGA(
        p.name, labels, bdeg, table, diff, unit,
        generators=gen_idx, monomials=monos, generator_names=names,
        poly0_vars=list(p.poly0_vars), truncated_pairs=frozenset(truncated),
        metadata={"truncation": N if poly0 else None},
    )
    if check:
        rep = validate(alg)
        if not rep.passed:
            raise InconsistentPresentationError(
                f"presentation {p.name!r} is inconsistent: {rep.first_failure()}"
            )
    return alg


def presentation_from_dict(data: Mapping) -> ModelPresentation:
    """Read the JSON model-file layout."""
    try:
        gens = [(g["name"], int(g["degree"])) for g in data["generators"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed generator list: {exc}") from exc
    poly0 = data.get("poly0") or {}
    return ModelPresentation(
        name=str(data.get("name", "model")),
        generators=gens,
        differential=dict(data.get("differential") or {}),
        relations=list(data.get("relations") or []),
        poly0_vars=list(poly0.get("vars") or []),
        truncation=int(poly0.get("truncation", 4)),
    )


# -- twisted cohomology of rank-one local systems -------------------------

def twisted_matrices(c: FiniteCDGA, gamma: Element, w: int) -> dict[int, Matrix]:
    """Matrices of ``x -> dx + w*gamma*x``, checked to square to zero."""
    if gamma.algebra is not c:
        raise AlgebraMismatchError("gamma lives in a different algebra")
    if gamma and gamma.degree != 1:
        raise PreconditionError("the connection form must have degree 1")
    if gamma.d():
        raise PreconditionError(f"connection form {gamma} is not closed")
    mats = {}
    for p in range(c.min_degree - 1, c.top_degree + 1):
        m = c.d_matrix(p)
        if w and gamma:
            lm = c.left_multiplication_matrix(gamma.scale(w), p)
            m = Matrix(m.rows, m.cols, _add_entries(m, lm))
        mats[p] = m
    for p in mats:
        if p + 1 in mats and not (mats[p + 1] @ mats[p]).is_zero():
            raise PreconditionError(f"twisted differential does not square to zero in degree {p}")
    return mats


def _add_entries(a: Matrix, b: Matrix) -> dict:
    out = a.entries()
    for k, v in b.entries().items():
        out[k] = out.get(k, 0) + v
    return out


def twisted_cohomology(c: FiniteCDGA, gamma: Element, w: int) -> dict[int, Subquotient]:
    return cohomology_spaces(c, twisted_matrices(c, gamma, w))


def twisted_betti_weight(c: FiniteCDGA, gamma: Element, w: int) -> list[int]:
    """Cohomology dimensions of the complex ``(C, d + w*gamma)``."""
    spaces = twisted_cohomology(c, gamma, w)
    return [spaces[p].dim if p in spaces else 0 for p in range(0, c.top_degree + 1)]


def betti(c: FiniteCDGA) -> list[int]:
    return c.betti()


# -- built-in models ----------------------------------------------------

def heisenberg_ce() -> FiniteCDGA:
    """Chevalley-Eilenberg model of the Heisenberg nilmanifold: dc = ab."""
    return compile_presentation(
        ModelPresentation("heisenberg", [("a", 1), ("b", 1), ("c", 1)], {"c": "a*b"})
    )


def torus_ce(n: int) -> FiniteCDGA:
    """Exterior algebra on ``e1..en`` with zero differential."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("torus dimension must be a positive integer")
    return compile_presentation(
        ModelPresentation(f"torus{n}", [(f"e{i}", 1) for i in range(1, n + 1)])
    )


def genus_surface_ring(g: int) -> FiniteCDGA:
    """Cohomology ring of a genus-``g`` surface, zero differential.

    Basis ``1; alpha1..alphag, beta1..betag; omega`` with
    ``alpha_i*beta_j = delta_ij omega`` and all other degree-one products zero.
    """
    if not isinstance(g, int) or g < 1:
        raise ValueError("genus must be a positive integer")
    labels = ["1"] + [f"alpha{i}" for i in range(1, g + 1)] + \
        [f"beta{i}" for i in range(1, g + 1)] + ["omega"]
    degs = [0] + [1] * (2 * g) + [2]
    n = len(labels)
    omega = n - 1
    table = {}
    for i in range(n):
        table[0, i] = {i: 1}
        table[i, 0] = {i: 1}
    for i in range(1, g + 1):
        table[i, g + i] = {omega: 1}
        table[g + i, i] = {omega: -1}
    return FiniteCDGA(f"genus{g}", labels, degs, table, {}, 0,
                      metadata={"model": "cohomology ring; cohomology-level claims only"})


def interval_model(truncation: int = 4, var: str = "u") -> FiniteCDGA:
    """Polynomial functions of one variable with their differentials, truncated."""
    return compile_presentation(ModelPresentation(
        f"interval_{var}", [(var, 0), (f"d{var}", 1)], {var: f"d{var}"},
        poly0_vars=[var], truncation=truncation,
    ))


def tensor_product(a: FiniteCDGA, b: FiniteCDGA, name: str | None = None) -> FiniteCDGA:
    """Graded tensor product with the Koszul sign rule."""
    if a.unit is None or b.unit is None:
        raise PreconditionError("tensor products need unital factors")
    pairs = sorted(((i, j) for i in range(len(a)) for j in range(len(b))),
                   key=lambda ij: (a.degrees[ij[0]] + b.degrees[ij[1]], ij))
    idx = {ij: k for k, ij in enumerate(pairs)}

    def lab(i, j):
        la, lb = a.labels[i], b.labels[j]
        if la == "1":
            return lb
        if lb == "1":
            return la
        return f"{la}*{lb}"

    labels = [lab(i, j) for i, j in pairs]
    degs = [a.degrees[i] + b.degrees[j] for i, j in pairs]

    def rule(k, l):
        (i1, j1), (i2, j2) = pairs[k], pairs[l]
        s = koszul(b.degrees[j1], a.degrees[i2])
        out = {}
        for ka, ca in a.mul_basis(i1, i2).items():
            for kb, cb in b.mul_basis(j1, j2).items():
                out[idx[ka, kb]] = out.get(idx[ka, kb], 0) + s * ca * cb
        return out

    diff = {}
    for k, (i, j) in enumerate(pairs):
        img = {}
        for ka, ca in a.d_basis(i).items():
            img[idx[ka, j]] = img.get(idx[ka, j], 0) + ca
        s = (-1) ** a.degrees[i]
        for kb, cb in b.d_basis(j).items():
            img[idx[i, kb]] = img.get(idx[i, kb], 0) + s * cb
        diff[k] = img
    table = {}
    for k in range(len(pairs)):
        for l in range(len(pairs)):
            r = rule(k, l)
            r = {x: v for x, v in r.items() if v != 0}
            if r:
                table[k, l] = r
    return FiniteCDGA(name or f"{a.name}(x){b.name}", labels, degs, table, diff,
                      idx[a.unit, b.unit], poly0_vars=a.poly0_vars + b.poly0_vars)


# -- evaluation of poly0 variables --------------------------------------

def evaluate_poly0(x: Element, assignment: Mapping[str, Fraction]) -> Element:
    """Substitute rational values for the poly0 variables of a compiled model.

    The result stays in the same algebra but involves only poly0-free
    monomials.  Unassigned poly0 variables default to 0.
    """
    alg = x.algebra
    if alg.monomials is None:
        if alg.poly0_vars:
            raise PreconditionError("evaluation needs a compiled model")
        return x
    names = alg.generator_names
    vals = {nm: scalar(assignment.get(nm, 0)) for nm in alg.poly0_vars}
    extra = set(assignment) - set(alg.poly0_vars)
    if extra:
        raise KeyError(f"not poly0 variables: {sorted(extra)}")
    mindex = {m: k for k, m in enumerate(alg.monomials)}
    out: dict = {}
    for k, c in x.coeffs.items():
        m = list(alg.monomials[k])
        factor = Fraction(1)
        for i, nm in enumerate(names):
            if nm in vals and m[i]:
                factor *= vals[nm] ** m[i]
                m[i] = 0
        if factor == 0:
            continue
        target = mindex.get(tuple(m))
        if target is None:
            continue
        out[target] = out.get(target, 0) + c * factor
    return Element(alg, out)
