"""Dense GF(2) linear algebra on Python-int bitsets.

Bit ``i`` of a packed integer is column ``i``. Python ints are arbitrary
width, so a row of any length is a single machine-word-backed object and
row XOR / popcount happen in C.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


def _pack(bits: Iterable[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b:
            out |= 1 << i
    return out


@dataclass(frozen=True)
class BitVec:
    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits do not fit in length {self.n}")

    @classmethod
    def zeros(cls, n: int) -> BitVec:
        return cls(0, n)

    @classmethod
    def unit(cls, n: int, i: int) -> BitVec:
        if not 0 <= i < n:
            raise IndexError(i)
        return cls(1 << i, n)

    @classmethod
    def from_array(cls, arr: Sequence[int] | np.ndarray) -> BitVec:
        arr = np.asarray(arr).astype(np.uint8).ravel()
        if arr.size == 0:
            return cls(0, 0)
        # little bit order: element 0 -> bit 0
        packed = np.packbits(arr, bitorder="little")
        return cls(int.from_bytes(packed.tobytes(), "little"), int(arr.size))

    @classmethod
    def from_str(cls, s: str) -> BitVec:
        if s and set(s) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {s!r}")
        return cls(_pack(c == "1" for c in s), len(s))

    def to_array(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.uint8)
        raw = self.bits.to_bytes((self.n + 7) // 8, "little")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: self.n]

    def to_list(self) -> list[int]:
        return self.to_array().tolist()

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: BitVec) -> BitVec:
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return BitVec(self.bits ^ other.bits, self.n)

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def any(self) -> bool:
        return self.bits != 0


class BitMatrix:
    """Immutable row-major GF(2) matrix; each row is a packed int."""

    def __init__(self, rows: Sequence[int], n_cols: int):
        rows = tuple(int(r) for r in rows)
        for r in rows:
            if r < 0 or r >> n_cols:
                raise ValueError(f"row does not fit in {n_cols} columns")
        self.rows = rows
        self.n_rows = len(rows)
        self.n_cols = n_cols

    @classmethod
    def from_array(cls, arr) -> BitMatrix:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls([BitVec.from_array(row).bits for row in arr], arr.shape[1])

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> BitMatrix:
        return cls([0] * n_rows, n_cols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls([1 << i for i in range(n)], n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for j, r in enumerate(self.rows):
            out[j] = BitVec(r, self.n_cols).to_array()
        return out

    def row(self, j: int) -> BitVec:
        return BitVec(self.rows[j], self.n_cols)

    def column(self, i: int) -> BitVec:
        return BitVec(_pack((r >> i) & 1 for r in self.rows), self.n_rows)

    def transpose(self) -> BitMatrix:
        return BitMatrix([self.column(i).bits for i in range(self.n_cols)], self.n_rows)

    def nnz(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.n_cols == other.n_cols
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.n_cols))

    def __repr__(self) -> str:
        return f"BitMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz()})"

    @cached_property
    def echelon(self) -> dict[int, int]:
        """Row-space basis keyed by each basis row's lowest set bit."""
        basis: dict[int, int] = {}
        for r in self.rows:
            while r:
                low = (r & -r).bit_length() - 1
                if low in basis:
                    r ^= basis[low]
                else:
                    basis[low] = r
                    break
        return basis


def _as_bits(v: BitVec | Sequence[int] | np.ndarray, n: int) -> int:
    if not isinstance(v, BitVec):
        v = BitVec.from_array(v)
    if v.n != n:
        raise ValueError(f"vector length {v.n} does not match {n} columns")
    return v.bits


def mat_vec_mul(m: BitMatrix, v: BitVec | Sequence[int] | np.ndarray) -> BitVec:
    bits = _as_bits(v, m.n_cols)
    out = 0
    for j, r in enumerate(m.rows):
        if (r & bits).bit_count() & 1:
            out |= 1 << j
    return BitVec(out, m.n_rows)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """``a @ b`` over GF(2)."""
    if a.n_cols != b.n_rows:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    bt = b.transpose()
    return BitMatrix([mat_vec_mul(bt, BitVec(r, a.n_cols)).bits for r in a.rows], b.n_cols)


def rank(m: BitMatrix) -> int:
    return len(m.echelon)


def in_row_space(m: BitMatrix, v: BitVec | Sequence[int] | np.ndarray) -> bool:
    bits = _as_bits(v, m.n_cols)
    basis = m.echelon
    while bits:
        low = (bits & -bits).bit_length() - 1
        row = basis.get(low)
        if row is None:
            return False
        bits ^= row
    return True


def symplectic_check(hx: BitMatrix, hz: BitMatrix) -> bool:
    """True iff ``hx @ hz.T == 0``, the CSS commutation condition."""
    if hx.n_cols != hz.n_cols:
        raise ValueError(f"column mismatch: {hx.n_cols} vs {hz.n_cols}")
    return all(((a & b).bit_count() & 1) == 0 for a in hx.rows for b in hz.rows)
