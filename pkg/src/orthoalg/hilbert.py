"""Exact integer realization of the canonical 4-point instance by 120
projective lines in dimension 8.

The four points split as three tensor slots plus a distinguished point.
Elements with singleton shadow get explicit product lines: the ones over
the distinguished point are standard basis tensors; the ones over a slot
point mix one slot in the plus/minus basis.  Every other element's line is
pinned down (up to scale) by orthogonality to the singleton lines it must
be orthogonal to; the resulting homogeneous systems are solved exactly
over the rationals and must each have a one-dimensional nullspace.

Irrational normalization factors are dropped throughout: orthogonality is
a homogeneous condition, so lines live as primitive integer 8-vectors.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .family import FamilyInstance, tc_related_raw
from .gf2 import card

STAR = 3  # the distinguished point of V; points 0,1,2 are the slots
DIM = 8

Vec = Tuple[int, ...]


def sign_table(alpha: int, beta: int) -> int:
    """The two-by-two sign table: -1 only at (1, 1)."""
    return -1 if (alpha & 1) and (beta & 1) else 1


def verify_sign_table_properties() -> bool:
    """Symmetry, multiplicativity in the second slot, the delta summation
    identity, and triviality on complementary arguments."""
    for a in range(2):
        for b in range(2):
            if sign_table(a, b) != sign_table(b, a):
                return False
            for g in range(2):
                if sign_table(a, (b + g) & 1) != sign_table(a, b) * sign_table(a, g):
                    return False
        if sign_table(a, 1 ^ a) != 1:
            return False
    for a in range(2):
        for g in range(2):
            s = sum(sign_table(a, b) * sign_table(b, g) for b in range(2))
            if s != (2 if a == g else 0):
                return False
    return True


def _phi_vec(a: int) -> Tuple[int, int]:
    return (1, 0) if a == 0 else (0, 1)


def _psi_vec(b: int) -> Tuple[int, int]:
    return (1, 1) if b == 0 else (1, -1)


def _tensor3(slots: Sequence[Tuple[int, int]]) -> Vec:
    out = []
    for c in range(DIM):
        bits = ((c >> 2) & 1, (c >> 1) & 1, c & 1)
        out.append(slots[0][bits[0]] * slots[1][bits[1]] * slots[2][bits[2]])
    return tuple(out)


def normalize_line(vec: Sequence[int]) -> Vec:
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector is not a line")
    out = [x // g for x in vec]
    for x in out:
        if x != 0:
            if x < 0:
                out = [-y for y in out]
            break
    return tuple(out)


def dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def singleton_line(v: int, xi: int) -> Vec:
    """Line of the element over the singleton {v} with function bitmask xi."""
    bit = lambda z: (xi >> z) & 1
    if v == STAR:
        # basis tensor: slot 2i mod 3 carries the value at slot point i
        slots = [_phi_vec(bit(0)), _phi_vec(bit(2)), _phi_vec(bit(1))]
        return normalize_line(_tensor3(slots))
    k = v
    slots: List[Optional[Tuple[int, int]]] = [None, None, None]
    slots[(2 * k) % 3] = _phi_vec(bit(STAR))
    for j in range(3):
        if j == k:
            continue
        slots[(k + j) % 3] = _psi_vec(bit(j))
    return normalize_line(_tensor3(slots))  # type: ignore[arg-type]


def build_singleton_lines(inst: FamilyInstance) -> Dict[int, Vec]:
    """Lines for all 32 singleton-shadow elements, keyed by element index."""
    _require_canonical_four(inst)
    out: Dict[int, Vec] = {}
    for i, (u, phi) in enumerate(inst.elements):
        if card(u) == 1:
            out[i] = singleton_line(u.bit_length() - 1, phi)
    if len(set(out.values())) != len(out):
        raise AssertionError("singleton lines are not pairwise distinct")
    return out


class RealizationError(RuntimeError):
    pass


def _require_canonical_four(inst: FamilyInstance) -> None:
    if inst.n != 4 or inst.params.b != (1, 0, 0, 0) or inst.params.c != (1, 0, 0, 0):
        raise RealizationError("realization is defined for the canonical 4-point instance")


def rational_nullspace(rows: List[Sequence[int]], width: int) -> List[List[Fraction]]:
    """Nullspace basis of an integer matrix, by exact row reduction."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots: List[int] = []
    r = 0
    for c in range(width):
        pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * width
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -mat[ri][fc]
        basis.append(vec)
    return basis


def _primitive(vec: List[Fraction]) -> Vec:
    denom = 1
    for x in vec:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in vec]
    return normalize_line(ints)


def solve_line_coefficients(inst: FamilyInstance, u_mask: int, eta: int) -> Vec:
    """Line of the element over U (|U| >= 2) with function eta, from the
    homogeneous orthogonality system against related singleton lines.

    Raises when the nullspace dimension differs from one (either no line
    exists or the system underdetermines it)."""
    _require_canonical_four(inst)
    if card(u_mask) < 2:
        raise ValueError("use singleton_line for singleton shadows")
    p = inst.params
    rows: List[Vec] = []
    for v in range(4):
        for xi in range(16):
            if ((xi >> v) & 1) != p.b[1]:
                continue  # not in the singleton level of v
            if tc_related_raw(p, u_mask, eta, 1 << v, xi):
                rows.append(singleton_line(v, xi))
    basis = rational_nullspace(rows, DIM)
    if len(basis) == 0:
        raise RealizationError(f"no line for U={u_mask:#x} eta={eta:#x}")
    if len(basis) > 1:
        raise RealizationError(
            f"underdetermined line for U={u_mask:#x} eta={eta:#x} (nullity {len(basis)})"
        )
    return _primitive(basis[0])


def realize_configuration(inst: FamilyInstance) -> List[Vec]:
    """All 120 lines, indexed like the instance elements; pairwise distinct."""
    _require_canonical_four(inst)
    lines: List[Optional[Vec]] = [None] * inst.size
    for i, vec in build_singleton_lines(inst).items():
        lines[i] = vec
    for i, (u, phi) in enumerate(inst.elements):
        if lines[i] is None:
            lines[i] = solve_line_coefficients(inst, u, phi)
    out = [v for v in lines if v is not None]
    if len(out) != inst.size:
        raise RealizationError("missing lines")
    if len(set(out)) != inst.size:
        raise RealizationError("lines are not pairwise distinct")
    return out  # type: ignore[return-value]


def compare_orthogonality(
    inst: FamilyInstance, lines: Sequence[Vec]
) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """Exact check over all pairs: zero dot product iff related."""
    m = inst.size
    for i in range(m):
        u, phi = inst.elements[i]
        li = lines[i]
        for j in range(i + 1, m):
            v, psi = inst.elements[j]
            if (dot(li, lines[j]) == 0) != tc_related_raw(inst.params, u, phi, v, psi):
                return False, (i, j)
    return True, None


def integer_rank(rows: Sequence[Sequence[int]], width: int) -> int:
    return width - len(rational_nullspace(list(rows), width))


__all__ = [
    "DIM",
    "RealizationError",
    "build_singleton_lines",
    "compare_orthogonality",
    "dot",
    "integer_rank",
    "normalize_line",
    "rational_nullspace",
    "realize_configuration",
    "sign_table",
    "singleton_line",
    "solve_line_coefficients",
    "verify_sign_table_properties",
]
