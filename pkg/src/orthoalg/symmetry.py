"""Symmetry maps of the family: subset reflections, shifted reflections of
the ground set, the linear system for their offsets, gauge transformations,
solvability conditions, and orbits on maximal cliques.

For a subset S of V the reflection sends U to itself when |U n S| is even
and to the complement of U xor S when odd; it is an involution and linear
over GF(2), and the family of all such reflections generates the full
general linear group.  Lifting a reflection to the family elements needs a
per-(S, U) additive offset table; its defining linear system is solved
here in closed form and verified exhaustively.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .family import FamilyInstance, FamilyParams, tc_related_raw
from .gf2 import (
    card,
    card_mod2,
    card_mod4,
    iter_bits,
    mat_from_columns,
    mat_identity,
    mat_mul,
    parity_sum,
    points_of,
)


def reflect_subset(s_mask: int, u_mask: int, n: int) -> int:
    """U when |U n S| is even, else the complement of U xor S."""
    if card(u_mask & s_mask) & 1 == 0:
        return u_mask
    full = (1 << n) - 1
    return full & ~(u_mask ^ s_mask)


def reflect_function(s_mask: int, phi: int, n: int) -> int:
    """Adds the off-S total of phi to every on-S value; an involution."""
    full = (1 << n) - 1
    if card(phi & full & ~s_mask) & 1:
        return phi ^ s_mask
    return phi


def reflection_matrix(s_mask: int, n: int) -> Tuple[int, ...]:
    """The linear map of reflect_subset as a GF(2) matrix (row bitmasks)."""
    cols = [reflect_subset(s_mask, 1 << v, n) for v in range(n)]
    return mat_from_columns(cols, n)


class ClosureTooLargeError(RuntimeError):
    pass


def _apply_cols(cols: Tuple[int, ...], vec: int) -> int:
    acc = 0
    while vec:
        low = vec & (-vec)
        acc ^= cols[low.bit_length() - 1]
        vec ^= low
    return acc


def gl_closure_size(n: int, max_order: int = 2_000_000) -> int:
    """Order of the group generated by the subset reflections (breadth-first
    closure under multiplication); verifies that each generator is an
    involution and the three-fold reflection identity on singletons."""
    full = (1 << n) - 1
    gens = {tuple(reflect_subset(s, 1 << v, n) for v in range(n)) for s in range(1 << n)}
    ident = tuple(1 << v for v in range(n))
    for g in gens:
        if tuple(_apply_cols(g, g[v]) for v in range(n)) != ident:
            raise AssertionError("reflection generator is not an involution")
    for s in range(1 << n):
        if s == full:
            continue
        for w in range(n):
            if (s >> w) & 1:
                continue
            for v in range(n):
                got = reflect_subset(
                    s, reflect_subset(s | (1 << w), reflect_subset(s, 1 << v, n), n), n
                )
                want = (full & ~s) if v == w else (1 << v)
                if got != want:
                    raise AssertionError("three-fold reflection identity fails")
    gen_list = list(gens)
    seen = set(gens)
    frontier = gen_list
    while frontier:
        new = []
        for a in gen_list:
            for b in frontier:
                c = tuple(_apply_cols(a, bj) for bj in b)
                if c not in seen:
                    seen.add(c)
                    new.append(c)
                    if len(seen) > max_order:
                        raise ClosureTooLargeError(
                            f"group closure exceeds {max_order} elements "
                            f"(full general linear groups grow near 2^(n*n))"
                        )
        frontier = new
    return len(seen)


class GaugeFunction:
    """A Z/2 function on unordered point pairs, stored as symmetric bitmask
    rows with zero diagonal."""

    def __init__(self, n: int, rows: Optional[Sequence[int]] = None):
        self.n = n
        if rows is None:
            rows = [0] * n
        rows = list(rows)
        for v in range(n):
            if (rows[v] >> v) & 1:
                raise ValueError("diagonal must be zero")
            for z in iter_bits(rows[v]):
                if not (rows[z] >> v) & 1:
                    raise ValueError("rows must be symmetric")
        self.rows = rows

    @classmethod
    def from_pairs(cls, n: int, pairs: Dict[Tuple[int, int], int]) -> "GaugeFunction":
        rows = [0] * n
        for (a, b), bit in pairs.items():
            if a == b:
                raise ValueError("pairs must have distinct points")
            if bit & 1:
                rows[a] |= 1 << b
                rows[b] |= 1 << a
        return cls(n, rows)

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "GaugeFunction":
        rows = [0] * n
        for a in range(n):
            for b in range(a + 1, n):
                if rng.getrandbits(1):
                    rows[a] |= 1 << b
                    rows[b] |= 1 << a
        return cls(n, rows)

    def value(self, a: int, b: int) -> int:
        if a == b:
            return 0  # formal agreement for the diagonal
        return (self.rows[a] >> b) & 1


def gauge_chi(mu: GaugeFunction, q_mask: int, v: int) -> int:
    """Sum of mu(v, z) over z in Q minus v."""
    return card(mu.rows[v] & (q_mask & ~(1 << v))) & 1


def gauge_map(mu: GaugeFunction, u_mask: int, phi: int) -> int:
    """phi(v) + chi_mu^U(v), as a function bitmask; preserves membership."""
    out = phi
    for v in range(mu.n):
        if gauge_chi(mu, u_mask, v):
            out ^= 1 << v
    return out


def gauge_conjugate(s_mask: int, mu: GaugeFunction, n: int) -> GaugeFunction:
    """The unique gauge making the reflection square commute: applying mu
    after the reflection equals applying the conjugated gauge before it."""
    rows = [0] * n
    for v in range(n):
        ts_v = reflect_subset(s_mask, 1 << v, n)
        for v1 in range(v + 1, n):
            ts_v1 = reflect_subset(s_mask, 1 << v1, n)
            bit = (
                mu.value(v, v1)
                ^ (card(mu.rows[v1] & ts_v) & 1)
                ^ (card(mu.rows[v] & ts_v1) & 1)
            )
            if bit:
                rows[v] |= 1 << v1
                rows[v1] |= 1 << v
    return GaugeFunction(n, rows)


@dataclass
class ShiftTable:
    """Offsets a(S, U)(v) for one fixed S, as per-U bitmasks over v."""

    n: int
    s_mask: int
    offsets: List[int]  # indexed by u_mask

    def offset(self, u_mask: int) -> int:
        return self.offsets[u_mask]

    def gauge_shifted(self, mu: GaugeFunction) -> "ShiftTable":
        """Add chi_mu over the reflected subset to every row; a symmetry of
        the defining system."""
        out = []
        for u in range(1 << self.n):
            ts_u = reflect_subset(self.s_mask, u, self.n)
            row = self.offsets[u]
            for v in range(self.n):
                if gauge_chi(mu, ts_u, v):
                    row ^= 1 << v
            out.append(row)
        return ShiftTable(self.n, self.s_mask, out)


def _b_of(p: FamilyParams, u: int) -> int:
    return p.b[card_mod4(u)]


def _c_of(p: FamilyParams, d: int) -> int:
    return p.c[card_mod4(d)]


def _bs(p: FamilyParams, s: int, u: int, n: int) -> int:
    return _b_of(p, u) ^ _b_of(p, reflect_subset(s, u, n))


def _cs(p: FamilyParams, s: int, u: int, u1: int, n: int) -> int:
    if u == u1:
        return 0  # formal convention
    tu = reflect_subset(s, u, n)
    tu1 = reflect_subset(s, u1, n)
    return (
        _c_of(p, u ^ u1)
        ^ _b_of(p, u)
        ^ _b_of(p, u1)
        ^ _c_of(p, tu ^ tu1)
        ^ _b_of(p, tu)
        ^ _b_of(p, tu1)
    )


def solve_shift_table(inst_or_params, n_or_none=None, s_mask: int = 0) -> ShiftTable:
    """Closed-form particular solution of the offset system for one S.

    Singleton rows come from the four case tables over the fixed point
    order; larger rows follow by elimination (off-S points first, then
    on-S points).  The empty row is chosen so that the paired equations
    involving the empty subset hold for valid parameters.
    """
    if isinstance(inst_or_params, FamilyInstance):
        p, n = inst_or_params.params, inst_or_params.n
    else:
        p, n = inst_or_params, n_or_none
    full = (1 << n) - 1
    s = s_mask
    sbar = full & ~s
    in_s = [(s >> v) & 1 for v in range(n)]

    single = [0] * n  # single[z] = bitmask over v of a(S, {z})(v)
    for z in range(n):
        row = 0
        for v in range(n):
            if in_s[z] == in_s[v]:
                # both on-S or both off-S: ordered case table
                if z < v:
                    bit = 0
                elif v < z:
                    bit = _cs(p, s, 1 << z, 1 << v, n)
                else:
                    bit = _bs(p, s, 1 << z, n)
            elif in_s[z] == 0:
                # z off S, v on S
                acc = _bs(p, s, 1 << z, n) ^ _cs(p, s, 1 << v, 1 << z, n)
                for w1 in iter_bits(sbar & ((1 << z) - 1)):
                    acc ^= _cs(p, s, 1 << w1, 1 << z, n)
                bit = acc
            else:
                # z on S, v off S
                bit = 0
            if bit:
                row |= 1 << v
        single[z] = row

    offsets = [0] * (1 << n)
    # empty row: makes the cross equations with the empty subset hold
    empty_row = 0
    coeff = p.b[1] ^ p.c[1]
    if coeff:
        for v in range(n):
            if 1 ^ card_mod2(reflect_subset(s, 1 << v, n)):
                empty_row |= 1 << v
    offsets[0] = empty_row
    for z in range(n):
        offsets[1 << z] = single[z]
    for q in range(1, 1 << n):
        if card(q) < 2:
            continue
        ts_q = reflect_subset(s, q, n)
        row = 0
        for w in iter_bits(sbar):
            bit = (card(single[w] & ts_q) & 1) ^ _cs(p, s, q, 1 << w, n)
            if bit:
                row |= 1 << w
        off_s_total = card(row & sbar) & 1
        for u in iter_bits(s):
            # from the cross equation at (Q, {u}): the singleton sum runs
            # over the reflection of Q itself
            bit = off_s_total ^ (card(single[u] & ts_q) & 1) ^ _cs(p, s, q, 1 << u, n)
            if bit:
                row |= 1 << u
        offsets[q] = row
    return ShiftTable(n, s, offsets)


def verify_shift_table(
    inst_or_params, table: ShiftTable, n_or_none=None
) -> Tuple[bool, Optional[tuple]]:
    """Exhaustive check of the two defining equation families over all U
    and all pairs U != U1."""
    if isinstance(inst_or_params, FamilyInstance):
        p, n = inst_or_params.params, inst_or_params.n
    else:
        p, n = inst_or_params, n_or_none
    s = table.s_mask
    ts = [reflect_subset(s, u, n) for u in range(1 << n)]
    for u in range(1 << n):
        lhs = card(table.offsets[u] & ts[u]) & 1
        if lhs != _bs(p, s, u, n):
            return False, ("membership", u)
    for u in range(1 << n):
        for u1 in range(1 << n):
            if u1 == u:
                continue
            m = ts[u ^ u1]
            lhs = card((table.offsets[u] ^ table.offsets[u1]) & m) & 1
            rhs = _c_of(p, u ^ u1) ^ _c_of(p, ts[u] ^ ts[u1])
            if lhs != rhs:
                return False, ("cross", u, u1)
    return True, None


def shift_permutation(inst: FamilyInstance, table: ShiftTable) -> np.ndarray:
    """The ground-set bijection: reflect the level, reflect the function,
    add the offset row.  Raises if any image leaves its target level."""
    n = inst.n
    s = table.s_mask
    perm = np.empty(inst.size, dtype=np.int64)
    for i, (u, phi) in enumerate(inst.elements):
        u2 = reflect_subset(s, u, n)
        phi2 = reflect_function(s, phi, n) ^ table.offsets[u]
        j = inst.index.get((u2, phi2))
        if j is None:
            raise AssertionError("image parity failed; offset table inconsistent")
        perm[i] = j
    if len(np.unique(perm)) != inst.size:
        raise AssertionError("shift map is not a bijection")
    return perm


def relation_preserved(inst: FamilyInstance, perm: np.ndarray) -> Tuple[bool, Optional[tuple]]:
    """Exhaustive pair check that the permutation preserves relatedness."""
    adj = inst.adjacency()
    m = inst.size
    for i in range(m):
        pi = int(perm[i])
        row = adj[i]
        for j in range(i + 1, m):
            if ((row >> j) & 1) != ((adj[pi] >> int(perm[j])) & 1):
                return False, (i, j)
    return True, None


def relation_preserved_sampled(
    inst: FamilyInstance, tables: Dict[int, ShiftTable], samples: int, seed: int = 0
) -> Tuple[bool, int]:
    """Sampled preservation check for large instances: random (S, i, j)."""
    rng = random.Random(seed)
    n = inst.n
    checked = 0
    for _ in range(samples):
        s = rng.randrange(1 << n)
        i = rng.randrange(inst.size)
        j = rng.randrange(inst.size)
        if i == j:
            continue
        t = tables[s]
        u, phi = inst.elements[i]
        u1, phi1 = inst.elements[j]
        iu = reflect_subset(s, u, n)
        iphi = reflect_function(s, phi, n) ^ t.offsets[u]
        ju = reflect_subset(s, u1, n)
        jphi = reflect_function(s, phi1, n) ^ t.offsets[u1]
        if tc_related_raw(inst.params, u, phi, u1, phi1) != tc_related_raw(
            inst.params, iu, iphi, ju, jphi
        ):
            return False, checked
        checked += 1
    return True, checked


@dataclass
class SolvabilityReport:
    ok: bool
    triples_checked: int
    witness: Optional[tuple] = None
    sampled: bool = False


def _pc4(arr: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(arr) & 3).astype(np.int64)


def _reflect_vec(s: int, u: np.ndarray, n: int) -> np.ndarray:
    full = (1 << n) - 1
    odd = (np.bitwise_count(u & s) & 1).astype(bool)
    return np.where(odd, full & ~(u ^ s), u)


def verify_solvability_conditions(
    params: FamilyParams,
    n: int,
    samples: Optional[int] = None,
    seed: int = 0,
) -> SolvabilityReport:
    """Check the two solvability equation families by direct enumeration.

    Full enumeration over all (S, Q, Q1) for n <= 8; for larger n a uniform
    sample of at least the requested size is drawn.  The formal convention
    assigns zero to the paired quantity at equal arguments.
    """
    if samples is None and n > 8:
        samples = 1_000_000
    if samples is None:
        return _solvability_full(params, n)
    return _solvability_sampled(params, n, samples, seed)


def _solvability_full(params: FamilyParams, n: int) -> SolvabilityReport:
    size = 1 << n
    full = size - 1
    barr = np.array(params.b, dtype=np.int64)
    carr = np.array(params.c, dtype=np.int64)
    Q = np.arange(size, dtype=np.int64)
    pc4_q = _pc4(Q)
    b4 = barr[pc4_q]  # b(|Q|) per subset
    bits = np.zeros((size, n), dtype=np.int64)
    for z in range(n):
        bits[:, z] = (Q >> z) & 1
    checked = 0
    for s in range(size):
        ts = _reflect_vec(s, Q, n)
        b4t = barr[pc4_q[ts]]
        bs_vec = b4 ^ b4t  # paired membership defect per subset
        # paired cross quantity for all (Q, Q1)
        x = Q[:, None] ^ Q[None, :]
        tx = ts[:, None] ^ ts[None, :]
        cs_pair = (
            carr[_pc4(x)]
            ^ b4[:, None]
            ^ b4[None, :]
            ^ carr[_pc4(tx)]
            ^ b4t[:, None]
            ^ b4t[None, :]
        )
        np.fill_diagonal(cs_pair, 0)
        c_q_single = cs_pair[:, 1 << np.arange(n)]  # (size, n)
        cs_single = c_q_single[1 << np.arange(n), :]  # (n, n), zero diagonal
        # membership-family condition per Q
        term1 = ((c_q_single & bits).sum(axis=1)) & 1
        upper = np.triu(cs_single, 1)
        term2 = ((bits @ upper) * bits).sum(axis=1) & 1
        rhs = bs_vec ^ ((bits * bs_vec[1 << np.arange(n)]).sum(axis=1) & 1)
        bad_b = (term1 ^ term2) != rhs
        if bad_b.any():
            q = int(np.flatnonzero(bad_b)[0])
            return SolvabilityReport(False, checked, ("membership", s, q))
        # cross-family condition per (Q, Q1)
        a_mat = (c_q_single @ bits.T) & 1  # XOR_{z1 in Q1} cs(Q, {z1})
        b_mat = a_mat.T  # symmetry of the paired quantity
        c_mat = (bits @ cs_single @ bits.T) & 1
        lhs = cs_pair ^ a_mat ^ b_mat ^ c_mat
        np.fill_diagonal(lhs, 0)
        if lhs.any():
            qq = int(np.flatnonzero(lhs.ravel())[0])
            return SolvabilityReport(False, checked, ("cross", s, qq // size, qq % size))
        checked += size * size
    return SolvabilityReport(True, checked)


def _solvability_sampled(
    params: FamilyParams, n: int, samples: int, seed: int
) -> SolvabilityReport:
    rng = np.random.default_rng(seed)
    size = 1 << n
    barr = np.array(params.b, dtype=np.int64)
    carr = np.array(params.c, dtype=np.int64)

    def b_of(u):
        return barr[_pc4(u)]

    def c_of(d):
        return carr[_pc4(d)]

    def refl(s, u):
        return _reflect_vec(s, u, n)

    def cs(s, u, u1):
        tu = refl(s, u)
        tu1 = refl(s, u1)
        out = c_of(u ^ u1) ^ b_of(u) ^ b_of(u1) ^ c_of(tu ^ tu1) ^ b_of(tu) ^ b_of(tu1)
        return np.where(u == u1, 0, out)

    def bs(s, u):
        return b_of(u) ^ b_of(refl(s, u))

    total = 0
    batch = 250_000
    while total < samples:
        t = min(batch, samples - total)
        S = rng.integers(0, size, t, dtype=np.int64)
        Qa = rng.integers(0, size, t, dtype=np.int64)
        Qb = rng.integers(0, size, t, dtype=np.int64)
        # cross-family condition
        lhs = cs(S, Qa, Qb)
        for z in range(n):
            zz = np.int64(1 << z)
            inb = ((Qb >> z) & 1).astype(bool)
            lhs ^= np.where(inb, cs(S, Qa, np.full(t, zz)), 0)
            ina = ((Qa >> z) & 1).astype(bool)
            lhs ^= np.where(ina, cs(S, np.full(t, zz), Qb), 0)
        for z in range(n):
            for z1 in range(n):
                if z == z1:
                    continue
                both = (((Qa >> z) & 1) & ((Qb >> z1) & 1)).astype(bool)
                if not both.any():
                    continue
                val = cs(S, np.full(t, np.int64(1 << z)), np.full(t, np.int64(1 << z1)))
                lhs ^= np.where(both, val, 0)
        bad = (lhs != 0) & (Qa != Qb)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            return SolvabilityReport(
                False, total, ("cross", int(S[i]), int(Qa[i]), int(Qb[i])), sampled=True
            )
        # membership-family condition on (S, Qa)
        lhs2 = np.zeros(t, dtype=np.int64)
        for z in range(n):
            zz = np.int64(1 << z)
            inq = ((Qa >> z) & 1).astype(bool)
            lhs2 ^= np.where(inq, cs(S, Qa, np.full(t, zz)), 0)
        for z in range(n):
            for z1 in range(z + 1, n):
                both = (((Qa >> z) & 1) & ((Qa >> z1) & 1)).astype(bool)
                if not both.any():
                    continue
                val = cs(S, np.full(t, np.int64(1 << z)), np.full(t, np.int64(1 << z1)))
                lhs2 ^= np.where(both, val, 0)
        rhs2 = bs(S, Qa)
        for z in range(n):
            inq = ((Qa >> z) & 1).astype(bool)
            rhs2 ^= np.where(inq, bs(S, np.full(t, np.int64(1 << z))), 0)
        bad2 = lhs2 != rhs2
        if bad2.any():
            i = int(np.flatnonzero(bad2)[0])
            return SolvabilityReport(
                False, total, ("membership", int(S[i]), int(Qa[i])), sampled=True
            )
        total += t
    return SolvabilityReport(True, total, sampled=True)


@dataclass
class OrbitPartition:
    orbit_of: Dict[int, int]  # clique bitmask -> orbit id
    orbits: List[List[int]]  # orbit id -> clique bitmasks

    @property
    def sizes(self) -> List[int]:
        return [len(o) for o in self.orbits]


def apply_perm_to_subset(perm: np.ndarray, subset_mask: int) -> int:
    out = 0
    for i in iter_bits(subset_mask):
        out |= 1 << int(perm[i])
    return out


def compute_block_orbits(
    cliques: Sequence[int], generators: Sequence[np.ndarray]
) -> OrbitPartition:
    """Orbit partition of the clique list under the group generated by the
    given permutations (inverses are added, so orbits are components)."""
    gens: List[np.ndarray] = []
    for g in generators:
        gens.append(np.asarray(g))
        gens.append(np.argsort(g))
    where = {m: i for i, m in enumerate(cliques)}
    orbit_of_idx = [-1] * len(cliques)
    orbits: List[List[int]] = []
    for start in range(len(cliques)):
        if orbit_of_idx[start] >= 0:
            continue
        oid = len(orbits)
        stack = [start]
        orbit_of_idx[start] = oid
        members = [cliques[start]]
        while stack:
            cur = stack.pop()
            cm = cliques[cur]
            for g in gens:
                img = apply_perm_to_subset(g, cm)
                j = where.get(img)
                if j is None:
                    raise AssertionError("generator does not permute the clique list")
                if orbit_of_idx[j] < 0:
                    orbit_of_idx[j] = oid
                    stack.append(j)
                    members.append(img)
        orbits.append(members)
    orbit_of = {m: orbit_of_idx[i] for i, m in enumerate(cliques)}
    return OrbitPartition(orbit_of, orbits)


__all__ = [
    "ClosureTooLargeError",
    "GaugeFunction",
    "OrbitPartition",
    "ShiftTable",
    "SolvabilityReport",
    "apply_perm_to_subset",
    "compute_block_orbits",
    "gauge_chi",
    "gauge_conjugate",
    "gauge_map",
    "gl_closure_size",
    "reflect_function",
    "reflect_subset",
    "reflection_matrix",
    "relation_preserved",
    "relation_preserved_sampled",
    "shift_permutation",
    "solve_shift_table",
    "verify_shift_table",
]
