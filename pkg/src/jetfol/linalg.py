"""Exact linear algebra over the rationals.

Scalars are :class:`fractions.Fraction` values, matrices are sparse maps from
``(row, col)`` to nonzero entries.  Everything here is deterministic: the
elimination always pivots on the first nonzero entry in row-major order, so
kernel bases and cohomology representatives are reproducible between runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

Vector = list  # list[Fraction]


class NotAComplexError(ValueError):
    """Raised when a proposed image space is not contained in a kernel."""


def scalar(x) -> Fraction:
    """Coerce ``x`` to an exact rational.

    Accepts ints, Fractions and strings like ``"3/2"``.  Floats are refused:
    they would silently bring rounding into an exact computation.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(ch in s for ch in ".eE"):
            raise ValueError(f"not an exact rational: {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


def format_scalar(x: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` for integers)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def zero_vector(n: int) -> Vector:
    return [Fraction(0)] * n


def is_zero(v: Iterable) -> bool:
    return all(x == 0 for x in v)


class Matrix:
    """Immutable sparse rational matrix."""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: int, cols: int, entries=None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.rows = rows
        self.cols = cols
        data = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            v = scalar(v)
            if v != 0:
                data[i, j] = v
        self._entries = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != cols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                if v != 0:
                    entries[i, j] = v
        return cls(len(rows), cols, entries)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "Matrix":
        entries = {}
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ValueError("column length does not match row count")
            for i, v in enumerate(col):
                if v != 0:
                    entries[i, j] = v
        return cls(rows, len(columns), entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def entries(self) -> dict:
        return dict(self._entries)

    def __getitem__(self, key) -> Fraction:
        i, j = key
        return self._entries.get((i, j), Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self._entries.items())))

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols}, nnz={len(self._entries)})"

    def to_rows(self) -> list[list[Fraction]]:
        out = [zero_vector(self.cols) for _ in range(self.rows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def column(self, j: int) -> Vector:
        col = zero_vector(self.rows)
        for (i, jj), v in self._entries.items():
            if jj == j:
                col[i] = v
        return col

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows, {(j, i): v for (i, j), v in self._entries.items()})

    def apply(self, v: Sequence) -> Vector:
        if len(v) != self.cols:
            raise ValueError(f"vector of length {len(v)} for matrix with {self.cols} columns")
        out = zero_vector(self.rows)
        for (i, j), a in self._entries.items():
            if v[j]:
                out[i] += a * v[j]
        return out

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        by_row: dict[int, list] = {}
        for (k, j), b in other._entries.items():
            by_row.setdefault(k, []).append((j, b))
        acc: dict = {}
        for (i, k), a in self._entries.items():
            for j, b in by_row.get(k, ()):
                acc[i, j] = acc.get((i, j), 0) + a * b
        return Matrix(self.rows, other.cols, acc)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row counts differ")
        entries = dict(self._entries)
        for (i, j), v in other._entries.items():
            entries[i, j + self.cols] = v
        return Matrix(self.rows, self.cols + other.cols, entries)

    def is_zero(self) -> bool:
        return not self._entries


@dataclass(frozen=True)
class Echelon:
    """Reduced row echelon form: ``rows[i]`` has a leading 1 in ``pivots[i]``."""

    rows: tuple  # tuple of dict col -> Fraction
    pivots: tuple
    cols: int

    @property
    def rank(self) -> int:
        return len(self.pivots)


def echelon(m: Matrix) -> Echelon:
    """Gauss-Jordan elimination, pivoting on the first nonzero entry."""
    raw: dict[int, dict] = {}
    for (i, j), v in m._entries.items():
        raw.setdefault(i, {})[j] = v
    reduced: list[dict] = []
    pivots: list[int] = []
    for i in range(m.rows):
        row = dict(raw.get(i, {}))
        for r, p in zip(reduced, pivots):
            f = row.get(p)
            if f:
                for j, v in r.items():
                    x = row.get(j, 0) - f * v
                    if x:
                        row[j] = x
                    else:
                        row.pop(j, None)
        if not row:
            continue
        p = min(row)
        inv = 1 / row[p]
        row = {j: v * inv for j, v in row.items()}
        for r in reduced:
            f = r.get(p)
            if f:
                for j, v in row.items():
                    x = r.get(j, 0) - f * v
                    if x:
                        r[j] = x
                    else:
                        r.pop(j, None)
        reduced.append(row)
        pivots.append(p)
    order = sorted(range(len(pivots)), key=pivots.__getitem__)
    return Echelon(tuple(reduced[i] for i in order), tuple(pivots[i] for i in order), m.cols)


def rank(m: Matrix) -> int:
    return echelon(m).rank


def _kernel_from_echelon(e: Echelon) -> list[Vector]:
    pivot_set = set(e.pivots)
    basis = []
    for f in range(e.cols):
        if f in pivot_set:
            continue
        v = zero_vector(e.cols)
        v[f] = Fraction(1)
        for row, p in zip(e.rows, e.pivots):
            c = row.get(f)
            if c:
                v[p] = -c
        basis.append(v)
    return basis


def kernel_basis(m: Matrix) -> list[Vector]:
    """Basis of ``{v : m v = 0}``, one vector per free column."""
    return _kernel_from_echelon(echelon(m))


@dataclass(frozen=True)
class AffineSolution:
    particular: Vector
    nullspace_basis: list

    @property
    def dim(self) -> int:
        return len(self.nullspace_basis)


def solve_affine(a: Matrix, b: Sequence) -> AffineSolution | None:
    """Solve ``a x = b`` exactly; ``None`` when ``b`` is outside the column space."""
    if len(b) != a.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {a.rows}")
    aug = a.hstack(Matrix.from_columns([[scalar(x) for x in b]], a.rows))
    e = echelon(aug)
    if a.cols in e.pivots:
        return None
    x = zero_vector(a.cols)
    for row, p in zip(e.rows, e.pivots):
        x[p] = row.get(a.cols, Fraction(0))
    coeff = Echelon(tuple({j: v for j, v in r.items() if j < a.cols} for r in e.rows), e.pivots, a.cols)
    return AffineSolution(x, _kernel_from_echelon(coeff))


def column_space_basis(m: Matrix) -> list[Vector]:
    """The pivot columns of ``m`` (a basis of its image, in column order)."""
    e = echelon(m.transpose())
    # row space of m^T == column space of m; RREF rows are a canonical basis
    out = []
    for row in e.rows:
        v = zero_vector(m.rows)
        for j, x in row.items():
            v[j] = x
        out.append(v)
    return out


class Subquotient:
    """The space ``ker(cocycles) / im(coboundaries)`` with a fixed basis.

    ``cocycles`` is the outgoing differential (its kernel is the cocycle
    space) and ``coboundaries`` the incoming one.  Representatives are kernel
    basis vectors chosen greedily to complement the image.
    """

    def __init__(self, cocycles: Matrix, coboundaries: Matrix):
        if cocycles.cols != coboundaries.rows:
            raise ValueError(
                f"incompatible shapes {cocycles.shape} and {coboundaries.shape}"
            )
        if not (cocycles @ coboundaries).is_zero():
            raise NotAComplexError("image of the incoming map is not inside the kernel")
        self.ambient = cocycles.cols
        self.image_basis = column_space_basis(coboundaries)
        kernel = kernel_basis(cocycles)
        self.kernel_dim = len(kernel)
        spanned = list(self.image_basis)
        reps = []
        current = len(spanned)
        for v in kernel:
            trial = spanned + [v]
            r = rank(Matrix.from_columns(trial, self.ambient)) if self.ambient else 0
            if r > current:
                spanned = trial
                reps.append(v)
                current = r
        self.representatives = reps
        self._frame = self.image_basis + reps
        self._solver = _LeftInverse(self._frame, self.ambient)

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def coordinates(self, v: Sequence) -> Vector:
        """Coordinates of a cocycle in the representative basis, modulo the image."""
        full = self._solver.solve(v)
        if full is None:
            raise ValueError("vector is not a cocycle")
        return full[len(self.image_basis):]

    def is_coboundary(self, v: Sequence) -> bool:
        return is_zero(self.coordinates(v))

    def lift(self, coords: Sequence) -> Vector:
        out = zero_vector(self.ambient)
        for c, r in zip(coords, self.representatives):
            if c:
                for i, x in enumerate(r):
                    if x:
                        out[i] += c * x
        return out


class _LeftInverse:
    """Solves ``F y = v`` for a full-column-rank frame ``F``, verifying the result."""

    def __init__(self, columns: list, n: int):
        self.columns = columns
        self.n = n
        m = len(columns)
        if m == 0:
            self.rows_used = []
            self.inverse = []
            return
        frame = Matrix.from_columns(columns, n)
        e = echelon(frame.transpose())  # pivots pick independent rows of F
        self.rows_used = list(e.pivots)
        square = Matrix.from_rows([[frame[i, j] for j in range(m)] for i in self.rows_used], m)
        self.inverse = _invert(square)

    def solve(self, v: Sequence):
        if len(v) != self.n:
            raise ValueError("vector length mismatch")
        m = len(self.columns)
        if m == 0:
            return [] if is_zero(v) else None
        picked = [scalar(v[i]) for i in self.rows_used]
        y = [sum((self.inverse[i][j] * picked[j] for j in range(m) if picked[j]), Fraction(0))
             for i in range(m)]
        check = zero_vector(self.n)
        for c, col in zip(y, self.columns):
            if c:
                for i, x in enumerate(col):
                    if x:
                        check[i] += c * x
        if any(check[i] != v[i] for i in range(self.n)):
            return None
        return y


def _invert(m: Matrix) -> list[list[Fraction]]:
    n = m.rows
    aug = m.hstack(Matrix.identity(n))
    e = echelon(aug)
    if e.pivots != tuple(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [[row.get(n + j, Fraction(0)) for j in range(n)] for row in e.rows]


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ValueError("only square matrices can be inverted")
    return Matrix.from_rows(_invert(m), m.cols) if m.rows else Matrix(0, 0)


def determinant(m: Matrix) -> Fraction:
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    a = m.to_rows()
    n = m.rows
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] * inv
            if f:
                for j in range(c, n):
                    a[r][j] -= f * a[c][j]
    return det
