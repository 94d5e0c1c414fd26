"""The two-parameter family of orthogonality relations on parity classes.

Points of V are indices 0..n-1.  For parameters b, c : Z/4 -> Z/2 the
ground set collects, for every subset U of V, the functions phi with
sum of phi over U equal to b(|U| mod 4); two elements are related when
they differ over the same U, or, across distinct U, U1, when the sum of
both functions over the symmetric difference misses c(|U xor U1| mod 4).

Functions phi are bitmasks over V, so elements are (u_mask, phi_mask)
pairs, indexed lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .gf2 import card, card_mod4, iter_bits, parity_sum, points_of
from .relation import FiniteRelation

Params4 = Tuple[int, int, int, int]


@dataclass(frozen=True)
class FamilyParams:
    """The residue tables b, c : Z/4 -> Z/2."""

    b: Params4
    c: Params4

    def __post_init__(self):
        for t in (self.b, self.c):
            if len(t) != 4 or any(x not in (0, 1) for x in t):
                raise ValueError("b and c must be 4-tuples of bits")


CANONICAL = FamilyParams((1, 0, 0, 0), (1, 0, 0, 0))


def validate_params(p: FamilyParams) -> Tuple[bool, List[str]]:
    """The saturation conditions: b(0)=1, c(0)=1, b(2)+c(2)=0, and
    b(1)+c(1)+b(3)+c(3)=0."""
    violations = []
    if p.b[0] != 1:
        violations.append("b(0) != 1")
    if p.c[0] != 1:
        violations.append("c(0) != 1")
    if (p.b[2] ^ p.c[2]) != 0:
        violations.append("b(2) + c(2) != 0")
    if (p.b[1] ^ p.c[1] ^ p.b[3] ^ p.c[3]) != 0:
        violations.append("b(1) + c(1) + b(3) + c(3) != 0")
    return (not violations, violations)


class InvalidFamilyError(ValueError):
    pass


@dataclass
class FamilyInstance:
    n: int
    params: FamilyParams
    elements: List[Tuple[int, int]]
    index: Dict[Tuple[int, int], int] = field(repr=False)
    _adjacency: Optional[List[int]] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.elements)

    def tc_related(self, i: int, j: int) -> bool:
        u, phi = self.elements[i]
        u1, phi1 = self.elements[j]
        return tc_related_raw(self.params, u, phi, u1, phi1)

    def adjacency(self) -> List[int]:
        if self._adjacency is None:
            self._adjacency = _build_adjacency(self.params, self.elements)
        return self._adjacency

    def relation(self) -> FiniteRelation:
        return FiniteRelation(self.size, self.adjacency())

    def level_sizes(self) -> Dict[int, int]:
        sizes: Dict[int, int] = {}
        for u, _ in self.elements:
            sizes[u] = sizes.get(u, 0) + 1
        return sizes


def tc_related_raw(p: FamilyParams, u: int, phi: int, u1: int, phi1: int) -> bool:
    if u == u1:
        return phi != phi1
    d = u ^ u1
    return (card((phi ^ phi1) & d) & 1) != p.c[card_mod4(d)]


def _build_adjacency(p: FamilyParams, elements: Sequence[Tuple[int, int]]) -> List[int]:
    m = len(elements)
    rows = [0] * m
    for i in range(m):
        u, phi = elements[i]
        for j in range(i + 1, m):
            u1, phi1 = elements[j]
            if tc_related_raw(p, u, phi, u1, phi1):
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return rows


def build_family(
    n: int,
    params: FamilyParams = CANONICAL,
    allow_invalid: bool = False,
    max_elements: int = 200_000,
) -> FamilyInstance:
    """Enumerate the ground set and index it lexicographically by (U, phi).

    Requires 4 | n and validated parameters unless allow_invalid is set
    (negative controls deliberately probe broken configurations).
    """
    ok, violations = validate_params(params)
    if n % 4 != 0 and not allow_invalid:
        raise InvalidFamilyError(f"carrier size {n} not divisible by 4")
    if not ok and not allow_invalid:
        raise InvalidFamilyError("invalid parameters: " + "; ".join(violations))
    expected = ((1 << n) - 1) << (n - 1) if params.b[0] == 1 else None
    if expected is not None and expected > max_elements:
        raise InvalidFamilyError(f"instance would have {expected} elements (cap {max_elements})")
    elements: List[Tuple[int, int]] = []
    for u in range(1 << n):
        bu = params.b[card_mod4(u)]
        for phi in range(1 << n):
            if parity_sum(phi, u) == bu:
                elements.append((u, phi))
    if expected is not None and len(elements) != expected:
        raise AssertionError("element count does not match (2^n - 1) * 2^(n-1)")
    index = {e: i for i, e in enumerate(elements)}
    return FamilyInstance(n, params, elements, index)


def join_parity(p: FamilyParams, u1: int, u2: int) -> int:
    """b(|U'|) + b(|U''|) + c(|U' xor U''|) + 1 over Z/2 (mod-4 residues)."""
    return p.b[card_mod4(u1)] ^ p.b[card_mod4(u2)] ^ p.c[card_mod4(u1 ^ u2)] ^ 1


def shadow(inst: FamilyInstance, subset_mask: int) -> List[int]:
    """Distinct U-components of the selected elements, sorted."""
    seen = set()
    for i in iter_bits(subset_mask):
        seen.add(inst.elements[i][0])
    return sorted(seen)


class BlockConsistencyError(ValueError):
    pass


TauLike = Mapping[Tuple[int, int], int]


def _tau_hat(p: FamilyParams, tau: TauLike, v: int, z: int) -> int:
    if v == z:
        return p.b[1]
    if v < z:
        return tau[(v, z)] & 1
    return (tau[(z, v)] & 1) ^ p.c[2] ^ 1


def _tau_tilde(p: FamilyParams, tau: TauLike, u_mask: int, v: int) -> int:
    if u_mask == (1 << v):
        return p.b[1]
    acc = 0
    for z in iter_bits(u_mask):
        acc ^= _tau_hat(p, tau, v, z)
    acc ^= p.b[card_mod4(u_mask)] ^ p.b[1]
    acc ^= p.c[card_mod4(u_mask ^ (1 << v))] ^ 1
    return acc


def build_canonical_block(
    inst: FamilyInstance,
    omega_mask: int,
    tau: Optional[TauLike] = None,
    verify: bool = True,
) -> int:
    """The maximal clique generated by a point set Omega and pair function tau.

    For every odd-cardinality U inside Omega, the block collects the
    elements over U whose values on Omega are pinned by tau (via the
    two-step extension), values off Omega free.  Returns a bitmask over
    the element index set.
    """
    if omega_mask == 0:
        raise ValueError("omega must be nonempty")
    p = inst.params
    n = inst.n
    if tau is None:
        tau = {}
    tau = dict(tau)
    for a in iter_bits(omega_mask):
        for b in iter_bits(omega_mask):
            if a < b:
                tau.setdefault((a, b), 0)
    omega_points = points_of(omega_mask)
    free_points = [v for v in range(n) if not (omega_mask >> v) & 1]
    block = 0
    # odd-cardinality subsets of omega
    k = len(omega_points)
    for s in range(1, 1 << k):
        if card(s) & 1 == 0:
            continue
        u_mask = 0
        for t in range(k):
            if (s >> t) & 1:
                u_mask |= 1 << omega_points[t]
        pinned = 0
        for z in omega_points:
            if _tau_tilde(p, tau, u_mask, z):
                pinned |= 1 << z
        # internal consistency: the pinned values must satisfy membership
        if parity_sum(pinned, u_mask) != p.b[card_mod4(u_mask)]:
            raise BlockConsistencyError(
                f"pinned values violate membership on U={u_mask:#x} (invalid parameters)"
            )
        for fs in range(1 << len(free_points)):
            phi = pinned
            for t in range(len(free_points)):
                if (fs >> t) & 1:
                    phi |= 1 << free_points[t]
            idx = inst.index.get((u_mask, phi))
            if idx is None:
                raise BlockConsistencyError("constructed element missing from ground set")
            block |= 1 << idx
    if verify:
        _verify_block(inst, block)
    return block


def _verify_block(inst: FamilyInstance, block: int) -> None:
    size = card(block)
    if size != 1 << (inst.n - 1):
        raise BlockConsistencyError(f"block size {size} != 2^(n-1)")
    adj = inst.adjacency()
    common = inst.relation().full
    for i in iter_bits(block):
        rest = block & ~(1 << i)
        if rest & ~adj[i]:
            raise BlockConsistencyError("block is not a clique")
        common &= adj[i]
    if common:
        raise BlockConsistencyError("block is not maximal")


def all_canonical_blocks(inst: FamilyInstance, verify: bool = False) -> List[int]:
    """Every canonical block: all nonempty Omega and all pair functions."""
    out = []
    n = inst.n
    for omega in range(1, 1 << n):
        pts = points_of(omega)
        pairs = [(a, b) for ai, a in enumerate(pts) for b in pts[ai + 1 :]]
        for bits in range(1 << len(pairs)):
            tau = {pr: (bits >> t) & 1 for t, pr in enumerate(pairs)}
            out.append(build_canonical_block(inst, omega, tau, verify=verify))
    return out


def singleton_block(inst: FamilyInstance, v: int) -> int:
    """All elements whose shadow is the single point v."""
    block = 0
    target = 1 << v
    for i, (u, _) in enumerate(inst.elements):
        if u == target:
            block |= 1 << i
    return block


def full_shadow_block(inst: FamilyInstance) -> int:
    """All elements whose shadow is the full carrier V."""
    block = 0
    target = (1 << inst.n) - 1
    for i, (u, _) in enumerate(inst.elements):
        if u == target:
            block |= 1 << i
    return block


__all__ = [
    "BlockConsistencyError",
    "CANONICAL",
    "FamilyInstance",
    "FamilyParams",
    "InvalidFamilyError",
    "all_canonical_blocks",
    "build_canonical_block",
    "build_family",
    "full_shadow_block",
    "join_parity",
    "shadow",
    "singleton_block",
    "tc_related_raw",
    "validate_params",
]
