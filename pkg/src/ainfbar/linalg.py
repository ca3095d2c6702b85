"""Exact sparse linear algebra over prime fields.

Vectors are dicts {index: coeff} with coefficients in 1..p-1 (zeros never
stored).  Matrices are immutable sparse wrappers; the elimination engine
works on lists of row dicts and is shared by the reduced-row-echelon
routines here and by the incremental block eliminations upstream.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Optional


class PrimeField:
    """Arithmetic context for F_p.  Primality checked by trial division."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if p < 2:
            raise ValueError(f"p must be a prime >= 2, got {p}")
        d = 2
        while d * d <= p:
            if p % d == 0:
                raise ValueError(f"p must be prime, got {p} = {d} * {p // d}")
            d += 1
        self.p = p

    def normalize(self, a: int) -> int:
        return a % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        """Multiplicative inverse by the extended Euclidean algorithm."""
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 is not invertible in F_p")
        r0, r1 = a, self.p
        s0, s1 = 1, 0
        while r1:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        return s0 % self.p

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


# -- sparse vector helpers ---------------------------------------------------

def vec_clean(v: dict, p: int) -> dict:
    return {i: c % p for i, c in v.items() if c % p}

def vec_add_scaled(dst: dict, src: dict, scale: int, p: int) -> None:
    """dst += scale * src, in place, zeros dropped."""
    if scale % p == 0:
        return
    for i, c in src.items():
        new = (dst.get(i, 0) + scale * c) % p
        if new:
            dst[i] = new
        else:
            dst.pop(i, None)

def vec_scale(v: dict, scale: int, p: int) -> dict:
    scale %= p
    if scale == 0:
        return {}
    return {i: (c * scale) % p for i, c in v.items()}

def vec_eq(u: dict, v: dict) -> bool:
    return u == v


class Eliminator:
    """Incremental Gaussian elimination over F_p on sparse row dicts.

    Rows are fed one at a time.  Each surviving row is normalized to a
    leading 1 at its smallest column; pivots are kept per column.  Pivot
    rows are not inter-reduced, which is enough for rank, membership and
    canonical remainders: reducing a vector against the pivots until no
    pivot column remains occupied yields the unique representative of its
    coset supported off the pivot columns.
    """

    def __init__(self, field: PrimeField):
        self.field = field
        self.pivots: dict[int, dict] = {}
        self.pivot_order: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: dict) -> dict:
        """Canonical remainder of v modulo the current row space.

        Columns are cleared in ascending order; pivot rows only touch
        columns at or past their lead, so fill-in always lands ahead of
        the cursor and every column is visited once.
        """
        p = self.field.p
        v = vec_clean(v, p)
        heap = list(v.keys())
        heapq.heapify(heap)
        while heap:
            col = heapq.heappop(heap)
            coef = v.get(col)
            if not coef:
                continue
            row = self.pivots.get(col)
            if row is None:
                continue
            scale = p - coef
            for c, pc in row.items():
                new = (v.get(c, 0) + scale * pc) % p
                if new:
                    if c not in v and c > col:
                        heapq.heappush(heap, c)
                    v[c] = new
                else:
                    v.pop(c, None)
        return v

    def add_row(self, v: dict) -> Optional[int]:
        """Insert a row; returns its pivot column, or None if dependent.

        A row whose lead column is unoccupied is stored as-is: pivot rows
        are never inter-reduced, so skipping the reduction changes nothing
        downstream and saves most of the work on near-triangular input.
        """
        rem = vec_clean(v, self.field.p)
        if rem:
            lead = min(rem)
            if lead in self.pivots:
                rem = self.reduce(rem)
        if not rem:
            return None
        lead = min(rem)
        inv = self.field.inv(rem[lead])
        self.pivots[lead] = vec_scale(rem, inv, self.field.p)
        self.pivot_order.append(lead)
        return lead

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)


class FpMatrix:
    """Immutable sparse matrix over F_p with explicit shape."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: PrimeField, rows: int, cols: int,
                 entries: dict | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix shape must be non-negative")
        self.field = field
        self.rows = rows
        self.cols = cols
        clean: dict[tuple[int, int], int] = {}
        for (r, c), val in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) outside {rows}x{cols} shape")
            val %= field.p
            if val:
                clean[(r, c)] = val
        self.entries = clean

    @classmethod
    def from_rows(cls, field: PrimeField, data: Iterable[Iterable[int]],
                  cols: int | None = None) -> "FpMatrix":
        rows = [list(r) for r in data]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for j, val in enumerate(row):
                entries[(i, j)] = val
        return cls(field, len(rows), ncols, entries)

    def row_dicts(self) -> list[dict]:
        out: list[dict] = [dict() for _ in range(self.rows)]
        for (r, c), val in self.entries.items():
            out[r][c] = val
        return out

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), val in self.entries.items():
            out[r][c] = val
        return out

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.field, self.cols, self.rows,
                        {(c, r): v for (r, c), v in self.entries.items()})

    def mat_vec(self, v: dict) -> dict:
        """Apply to a sparse column vector."""
        p = self.field.p
        cols: dict[int, dict] = {}
        for (r, c), val in self.entries.items():
            cols.setdefault(c, {})[r] = val
        out: dict[int, int] = {}
        for c, coeff in v.items():
            if c >= self.cols:
                raise ValueError("vector index outside matrix columns")
            col = cols.get(c)
            if col:
                vec_add_scaled(out, col, coeff, p)
        return out

    def matmul(self, other: "FpMatrix") -> "FpMatrix":
        if self.field != other.field or self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        p = self.field.p
        by_row: dict[int, dict] = {}
        for (r, c), val in self.entries.items():
            by_row.setdefault(r, {})[c] = val
        other_rows: dict[int, dict] = {}
        for (r, c), val in other.entries.items():
            other_rows.setdefault(r, {})[c] = val
        entries: dict[tuple[int, int], int] = {}
        for r, row in by_row.items():
            acc: dict[int, int] = {}
            for k, coeff in row.items():
                orow = other_rows.get(k)
                if orow:
                    vec_add_scaled(acc, orow, coeff, p)
            for c, val in acc.items():
                entries[(r, c)] = val
        return FpMatrix(self.field, self.rows, other.cols, entries)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FpMatrix) and self.field == other.field
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.field, self.rows, self.cols,
                     tuple(sorted(self.entries.items()))))

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.field.p}, {self.rows}x{self.cols}, nnz={len(self.entries)})"


def rref(m: FpMatrix) -> tuple[FpMatrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns.

    Pivoting is leftmost nonzero column, smallest row index.  The output
    matrix is the unique RREF of m padded with zero rows to m's shape.
    """
    p = m.field.p
    rows = m.row_dicts()
    pivot_rows: list[tuple[int, dict]] = []  # (pivot col, normalized row)
    for row in rows:
        work = dict(row)
        for col, prow in pivot_rows:
            if col in work:
                vec_add_scaled(work, prow, p - work[col], p)
        if not work:
            continue
        lead = min(work)
        work = vec_scale(work, m.field.inv(work[lead]), p)
        # keep earlier pivot rows fully reduced
        for col, prow in pivot_rows:
            if lead in prow:
                vec_add_scaled(prow, work, p - prow[lead], p)
        pivot_rows.append((lead, work))
    pivot_rows.sort(key=lambda t: t[0])
    entries = {}
    for i, (_, row) in enumerate(pivot_rows):
        for c, val in row.items():
            entries[(i, c)] = val
    pivots = tuple(col for col, _ in pivot_rows)
    return FpMatrix(m.field, m.rows, m.cols, entries), pivots


def rank(m: FpMatrix) -> int:
    elim = Eliminator(m.field)
    for row in m.row_dicts():
        elim.add_row(row)
    return elim.rank


def kernel_basis(m: FpMatrix) -> list[dict]:
    """Basis of {v : m v = 0} by the standard free-variable rule.

    One basis vector per non-pivot column j: entry 1 at j, minus the
    pivot-row coefficients at the pivot columns.
    """
    red, pivots = rref(m)
    pivot_set = set(pivots)
    col_of_pivot = {col: i for i, col in enumerate(pivots)}
    rows = red.row_dicts()
    basis = []
    p = m.field.p
    for j in range(m.cols):
        if j in pivot_set:
            continue
        v = {j: 1}
        for col in pivots:
            coeff = rows[col_of_pivot[col]].get(j, 0)
            if coeff:
                v[col] = (-coeff) % p
        basis.append(v)
    return basis


def solve(m: FpMatrix, b: dict) -> Optional[dict]:
    """One solution of m x = b, or None when inconsistent.

    Free variables are set to zero, so the solution is the deterministic
    pivot-variable one.
    """
    p = m.field.p
    for i in b:
        if not (0 <= i < m.rows):
            raise ValueError("rhs index outside matrix rows")
    # eliminate on [m^T rows as columns]: work directly on augmented rows of m
    rows = m.row_dicts()
    aug: list[dict] = []
    for i, row in enumerate(rows):
        r = dict(row)
        if b.get(i):
            r[m.cols] = b[i] % p
        aug.append(r)
    red_rows: list[tuple[int, dict]] = []
    for row in aug:
        work = dict(row)
        for col, prow in red_rows:
            if col in work:
                vec_add_scaled(work, prow, p - work[col], p)
        if not work:
            continue
        lead = min(work)
        if lead == m.cols:
            return None  # 0 = nonzero
        work = vec_scale(work, m.field.inv(work[lead]), p)
        for col, prow in red_rows:
            if lead in prow:
                vec_add_scaled(prow, work, p - prow[lead], p)
        red_rows.append((lead, work))
    x: dict[int, int] = {}
    for col, row in red_rows:
        val = row.get(m.cols, 0)
        if val:
            x[col] = val
    # verify (free vars zero): m x must equal b
    if m.mat_vec(x) != vec_clean(b, p):
        return None
    return x
