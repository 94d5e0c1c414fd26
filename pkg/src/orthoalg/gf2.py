"""Exact arithmetic over Z/2 and Z/4 on int-encoded subsets, plus GF(2) matrices.

Subsets of a carrier {0, ..., n-1} are encoded as Python int bitmasks
(bit v set iff point v is in the subset).  Functions V -> Z/2 use the
same encoding, so a GF(2) function and the subset it indicates are the
same object.  All operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

MAX_CARRIER = 64  # points of V; carriers over A are sized dynamically


def mask_of(points: Sequence[int]) -> int:
    """Bitmask of an iterable of point indices."""
    m = 0
    for p in points:
        m |= 1 << p
    return m


def points_of(mask: int) -> List[int]:
    """Sorted point indices of a bitmask."""
    out = []
    while mask:
        low = mask & (-mask)
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & (-mask)
        yield low.bit_length() - 1
        mask ^= low


def card(mask: int) -> int:
    return mask.bit_count() if hasattr(mask, "bit_count") else bin(mask).count("1")


def card_mod4(mask: int) -> int:
    """Cardinality of a subset viewed in Z/4."""
    return card(mask) & 3


def card_mod2(mask: int) -> int:
    return card(mask) & 1


def parity_sum(phi: int, subset: int) -> int:
    """Sum of phi over the subset, in Z/2.

    Both arguments are bitmasks over the same carrier; the sum is the
    parity of the overlap.
    """
    return card(phi & subset) & 1


@dataclass(frozen=True)
class Subset:
    """A subset of a finite carrier, with explicit carrier size."""

    bits: int
    carrier_size: int

    def __post_init__(self) -> None:
        if self.bits >> self.carrier_size:
            raise ValueError("bits beyond carrier_size must be zero")

    def cardinality(self) -> int:
        return card(self.bits)

    def points(self) -> List[int]:
        return points_of(self.bits)

    def complement(self) -> "Subset":
        full = (1 << self.carrier_size) - 1
        return Subset(full & ~self.bits, self.carrier_size)

    def __and__(self, other: "Subset") -> "Subset":
        self._check(other)
        return Subset(self.bits & other.bits, self.carrier_size)

    def __or__(self, other: "Subset") -> "Subset":
        self._check(other)
        return Subset(self.bits | other.bits, self.carrier_size)

    def __xor__(self, other: "Subset") -> "Subset":
        """Symmetric difference."""
        self._check(other)
        return Subset(self.bits ^ other.bits, self.carrier_size)

    def _check(self, other: "Subset") -> None:
        if self.carrier_size != other.carrier_size:
            raise ValueError("carrier mismatch")


# GF(2) square matrices: rows[i] is the bitmask of row i.

Matrix = Tuple[int, ...]


def mat_identity(n: int) -> Matrix:
    return tuple(1 << i for i in range(n))


def mat_mul(m1: Matrix, m2: Matrix) -> Matrix:
    """Matrix product over GF(2); both operands are n rows of n-bit masks."""
    n = len(m1)
    if len(m2) != n:
        raise ValueError("dimension mismatch")
    # column masks of m2
    cols = [0] * n
    for i, row in enumerate(m2):
        r = row
        while r:
            low = r & (-r)
            cols[low.bit_length() - 1] |= 1 << i
            r ^= low
    out = []
    for row in m1:
        acc = 0
        for j in range(n):
            if card(row & cols[j]) & 1:
                acc |= 1 << j
        out.append(acc)
    return tuple(out)


def mat_apply(m: Matrix, vec: int) -> int:
    """Apply the matrix to a column vector (bitmask)."""
    out = 0
    for i, row in enumerate(m):
        if card(row & vec) & 1:
            out |= 1 << i
    return out


def mat_from_columns(cols: Sequence[int], n: int) -> Matrix:
    """Build a matrix from its column bitmasks."""
    rows = [0] * n
    for j, c in enumerate(cols):
        for i in iter_bits(c):
            rows[i] |= 1 << j
    return tuple(rows)


def mat_rank(rows: Sequence[int], n_cols: int) -> int:
    """Rank over GF(2) via elimination on int bitsets."""
    work = list(rows)
    rank = 0
    row_idx = 0
    for col in range(n_cols):
        pivot = None
        for r in range(row_idx, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[row_idx], work[pivot] = work[pivot], work[row_idx]
        for r in range(len(work)):
            if r != row_idx and ((work[r] >> col) & 1):
                work[r] ^= work[row_idx]
        rank += 1
        row_idx += 1
        if row_idx == len(work):
            break
    return rank


__all__ = [
    "MAX_CARRIER",
    "Subset",
    "card",
    "card_mod2",
    "card_mod4",
    "iter_bits",
    "mask_of",
    "mat_apply",
    "mat_from_columns",
    "mat_identity",
    "mat_mul",
    "mat_rank",
    "parity_sum",
    "points_of",
]
