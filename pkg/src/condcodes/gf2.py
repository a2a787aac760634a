"""Dense matrices over GF(2).

Rows are stored as Python ints; bit ``j`` of a row is column ``j``.  Bit
vectors throughout the package use the same little-endian convention, so a
vector of length ``n`` is an int in ``[0, 2**n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class InconsistentSystem(ValueError):
    """Raised when ``A x = b`` has no solution."""


def parity(x: int) -> int:
    return x.bit_count() & 1


def weight(x: int) -> int:
    return x.bit_count()


def bits_to_int(bits: Iterable[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b & 1:
            out |= 1 << j
    return out


def int_to_bits(x: int, length: int) -> np.ndarray:
    return np.array([(x >> j) & 1 for j in range(length)], dtype=np.uint8)


@dataclass(frozen=True)
class BitMatrix:
    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        if len(self.data) != self.rows:
            raise ValueError(f"expected {self.rows} rows, got {len(self.data)}")
        limit = 1 << self.cols
        for r in self.data:
            if r < 0 or r >= limit:
                raise ValueError("row has bits beyond the column count")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[int], cols: int) -> "BitMatrix":
        return cls(len(rows), cols, tuple(int(r) for r in rows))

    @classmethod
    def from_array(cls, arr) -> "BitMatrix":
        a = np.asarray(arr, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(a.shape[0], a.shape[1], tuple(bits_to_int(row) for row in a))

    @classmethod
    def from_columns(cls, columns: Sequence[int], rows: int) -> "BitMatrix":
        data = []
        for i in range(rows):
            r = 0
            for j, c in enumerate(columns):
                if (c >> i) & 1:
                    r |= 1 << j
            data.append(r)
        return cls(rows, len(columns), tuple(data))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "BitMatrix":
        return cls.from_array(rng.integers(0, 2, size=(rows, cols)))

    # -- views ----------------------------------------------------------
    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.data):
            out[i] = int_to_bits(r, self.cols)
        return out

    def columns(self) -> list[int]:
        """Column ``j`` as an int whose bit ``i`` is entry ``(i, j)``."""
        cols = [0] * self.cols
        for i, r in enumerate(self.data):
            j = 0
            while r:
                if r & 1:
                    cols[j] |= 1 << i
                r >>= 1
                j += 1
        return cols

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows, tuple(self.columns()))

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def select_columns(self, idx: Sequence[int]) -> "BitMatrix":
        data = []
        for r in self.data:
            v = 0
            for new, old in enumerate(idx):
                if (r >> old) & 1:
                    v |= 1 << new
            data.append(v)
        return BitMatrix(self.rows, len(idx), tuple(data))

    def select_rows(self, idx: Sequence[int]) -> "BitMatrix":
        return BitMatrix(len(idx), self.cols, tuple(self.data[i] for i in idx))

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.cols != self.cols:
            raise ValueError("column mismatch")
        return BitMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.rows != self.rows:
            raise ValueError("row mismatch")
        return BitMatrix(
            self.rows,
            self.cols + other.cols,
            tuple(a | (b << self.cols) for a, b in zip(self.data, other.data)),
        )

    # -- arithmetic -----------------------------------------------------
    def mul_vec(self, x: int) -> int:
        """``M x`` for a column vector ``x`` packed as an int."""
        out = 0
        for i, r in enumerate(self.data):
            if (r & x).bit_count() & 1:
                out |= 1 << i
        return out

    def vec_mul(self, x: int) -> int:
        """``x M`` for a row vector ``x`` of length ``rows``."""
        out = 0
        i = 0
        while x:
            if x & 1:
                out ^= self.data[i]
            x >>= 1
            i += 1
        return out

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return BitMatrix(self.rows, other.cols, tuple(other.vec_mul(r) for r in self.data))

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(self.rows, self.cols, tuple(a ^ b for a, b in zip(self.data, other.data)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return not any(self.data)

    def __str__(self) -> str:
        return "\n".join("".join(str((r >> j) & 1) for j in range(self.cols)) for r in self.data)

    # -- text format ----------------------------------------------------
    def dumps(self) -> str:
        width = max(1, (self.cols + 3) // 4)
        lines = [f"{self.rows} {self.cols}"]
        lines += [format(r, "x").zfill(width) for r in self.data]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "BitMatrix":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        rows, cols = (int(t) for t in lines[0].split())
        data = [int(ln, 16) for ln in lines[1 : 1 + rows]]
        if len(data) != rows:
            raise ValueError(f"expected {rows} row lines, got {len(data)}")
        return cls.from_rows(data, cols)


@dataclass(frozen=True)
class Echelon:
    """Reduced row echelon form plus the row operations that produced it.

    ``transform`` rows are ints over the original row indices, so
    ``reduced[i] == XOR of original rows j with bit j of transform[i]``.
    """

    reduced: tuple[int, ...]
    pivots: tuple[int, ...]
    transform: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def echelon(m: BitMatrix, pivot_cols: int | None = None) -> Echelon:
    """Gauss-Jordan elimination: leftmost column first, topmost row as pivot.

    Only the first ``pivot_cols`` columns are eligible as pivots, which lets
    callers carry an augmented right-hand side along.
    """
    limit = m.cols if pivot_cols is None else pivot_cols
    rows = list(m.data)
    trans = [1 << i for i in range(m.rows)]
    pivots = []
    top = 0
    for col in range(limit):
        bit = 1 << col
        piv = next((i for i in range(top, len(rows)) if rows[i] & bit), None)
        if piv is None:
            continue
        if piv != top:
            rows[top], rows[piv] = rows[piv], rows[top]
            trans[top], trans[piv] = trans[piv], trans[top]
        prow, ptr = rows[top], trans[top]
        for i in range(len(rows)):
            if i != top and rows[i] & bit:
                rows[i] ^= prow
                trans[i] ^= ptr
        pivots.append(col)
        top += 1
        if top == len(rows):
            break
    return Echelon(tuple(rows), tuple(pivots), tuple(trans))


def rank_of_ints(vectors: Iterable[int]) -> int:
    """Rank of a collection of bit vectors (XOR basis insertion)."""
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return len(basis)


def rank(m: BitMatrix) -> int:
    return rank_of_ints(m.data)


def right_kernel_basis(m: BitMatrix) -> BitMatrix:
    """Basis of ``{v : M v = 0}``, one row per free column in ascending order."""
    ech = echelon(m)
    pivset = set(ech.pivots)
    basis = []
    for f in range(m.cols):
        if f in pivset:
            continue
        v = 1 << f
        for i, pc in enumerate(ech.pivots):
            if (ech.reduced[i] >> f) & 1:
                v |= 1 << pc
        basis.append(v)
    return BitMatrix(len(basis), m.cols, tuple(basis))


def solve_affine(a: BitMatrix, b: int) -> tuple[int, BitMatrix]:
    """One solution of ``A x = b`` (free variables zero) and a kernel basis.

    ``b`` has one bit per row of ``A``.  Raises :class:`InconsistentSystem`
    when ``b`` is outside the column space.
    """
    aug = BitMatrix(a.rows, a.cols + 1, tuple(r | (((b >> i) & 1) << a.cols) for i, r in enumerate(a.data)))
    ech = echelon(aug, pivot_cols=a.cols)
    rhs = 1 << a.cols
    for i in range(ech.rank, a.rows):
        if ech.reduced[i] & rhs:
            raise InconsistentSystem("right-hand side not in the column space")
    x = 0
    for i, pc in enumerate(ech.pivots):
        if ech.reduced[i] & rhs:
            x |= 1 << pc
    return x, right_kernel_basis(a)


def is_full_row_rank(m: BitMatrix) -> bool:
    return rank(m) == m.rows
