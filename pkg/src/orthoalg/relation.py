"""Closure operator, maximal cliques, saturation, and the orthoalgebra builder.

A finite symmetric irreflexive relation T on a carrier A is stored as int
bitmask adjacency rows.  For B a subset of A, the polar B^T is the set of
elements related to everything in B; the empty polar is all of A.  T is
saturated when B^T = (M\\B)^TT for every maximal clique M and every B in M;
under that condition the polars of cliques form a coherent orthoalgebra
with Q (+) Q1 = (Q u Q1)^TT defined exactly when Q1 is inside Q^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .effect import FiniteEffectAlgebra
from .gf2 import card, iter_bits, points_of


class NotSaturatedError(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"relation is not saturated; witness (M, B) = {witness}")


class CapExceededError(RuntimeError):
    pass


@dataclass
class FiniteRelation:
    """Symmetric irreflexive relation on {0..carrier_size-1} as bitmask rows."""

    carrier_size: int
    adjacency: List[int]

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Tuple[int, int]]) -> "FiniteRelation":
        rows = [0] * n
        for a, b in edges:
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, rows)

    @property
    def full(self) -> int:
        return (1 << self.carrier_size) - 1

    def related(self, i: int, j: int) -> bool:
        return bool((self.adjacency[i] >> j) & 1)


def closure(rel: FiniteRelation, b_mask: int) -> int:
    """B^T: elements related to every member of B; empty B gives all of A."""
    out = rel.full
    for v in iter_bits(b_mask):
        out &= rel.adjacency[v]
        if not out:
            break
    return out


def check_symmetric_irreflexive(rel: FiniteRelation) -> bool:
    adj = rel.adjacency
    for i in range(rel.carrier_size):
        if (adj[i] >> i) & 1:
            return False
    cols = [0] * rel.carrier_size
    for i, row in enumerate(adj):
        for j in iter_bits(row):
            cols[j] |= 1 << i
    return cols == adj


def enumerate_maximal_cliques(rel: FiniteRelation, cap: Optional[int] = None) -> List[int]:
    """All inclusion-maximal cliques, as bitmasks, sorted; pivoting Bron-Kerbosch."""
    adj = rel.adjacency
    out: List[int] = []

    def bk(r: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r)
            if cap is not None and len(out) > cap:
                raise CapExceededError("maximal clique cap exceeded")
            return
        pivot, best = -1, -1
        px = p | x
        while px:
            low = px & (-px)
            v = low.bit_length() - 1
            px ^= low
            d = card(p & adj[v])
            if d > best:
                best, pivot = d, v
        cand = p & ~adj[pivot]
        while cand:
            low = cand & (-cand)
            v = low.bit_length() - 1
            cand ^= low
            bk(r | low, p & adj[v], x & adj[v])
            p ^= low
            x |= low

    bk(0, rel.full, 0)
    out.sort()
    return out


def _subset_polars(rel: FiniteRelation, clique: int) -> Tuple[List[int], List[int]]:
    """Members of the clique and polars of all its subsets.

    Subset s (bit t set iff the t-th smallest member is in B) maps to
    polar[s] = B^T; shared prefixes are reused, one intersection per subset.
    """
    mem = points_of(clique)
    k = len(mem)
    polar = [rel.full] * (1 << k)
    for s in range(1, 1 << k):
        low = s & (-s)
        polar[s] = polar[s ^ low] & rel.adjacency[mem[low.bit_length() - 1]]
    return mem, polar


def check_saturation(
    rel: FiniteRelation, cliques: Optional[List[int]] = None
) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """Verify B^T = (M\\B)^TT for every maximal clique M and every B in M.

    Returns (ok, witness); the witness is the first violating (M, B) pair
    in (clique, subset) enumeration order, as bitmasks over the carrier.
    """
    if cliques is None:
        cliques = enumerate_maximal_cliques(rel)
    for m_mask in cliques:
        mem, polar = _subset_polars(rel, m_mask)
        k = len(mem)
        topmask = (1 << k) - 1
        for s in range(1 << k):
            if closure(rel, polar[topmask ^ s]) != polar[s]:
                b_mask = 0
                for t in range(k):
                    if (s >> t) & 1:
                        b_mask |= 1 << mem[t]
                return False, (m_mask, b_mask)
    return True, None


def _disjoint_pair_patterns(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """All ordered pairs of disjoint subsets of a k-element set."""
    ss, tt = [], []
    for s in range(1 << k):
        rest = ((1 << k) - 1) ^ s
        t = rest
        while True:
            ss.append(s)
            tt.append(t)
            if t == 0:
                break
            t = (t - 1) & rest
    return np.array(ss, dtype=np.int64), np.array(tt, dtype=np.int64)


_PATTERN_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


@dataclass
class OrthoalgebraBuild:
    """Result of the Theorem-1 style construction."""

    algebra: FiniteEffectAlgebra
    closed_sets: List[int]  # bitmask over the carrier, per ground index
    index: Dict[int, int]  # closed-set bitmask -> ground index
    relation: FiniteRelation
    cliques: List[int]
    consistency: Dict[str, bool]

    @property
    def n(self) -> int:
        return len(self.closed_sets)


def _pack_masks(masks: List[int], carrier_size: int) -> np.ndarray:
    w = (carrier_size + 63) // 64
    out = np.zeros((len(masks), w), dtype=np.uint64)
    m64 = (1 << 64) - 1
    for i, m in enumerate(masks):
        for wi in range(w):
            out[i, wi] = (m >> (64 * wi)) & m64
    return out


def build_orthoalgebra(
    rel: FiniteRelation,
    cliques: Optional[List[int]] = None,
    max_ground: int = 1 << 20,
    audit_samples: int = 1_000_000,
    seed: int = 0,
    skip_saturation_check: bool = False,
) -> OrthoalgebraBuild:
    """Build the orthoalgebra of clique polars over a saturated relation.

    Ground set: distinct polars B^T over all subsets B of maximal cliques
    (these are exactly the polars of all cliques).  The sum table is
    enumerated per clique over disjoint subset pairs; under the verified
    saturation condition that enumeration reaches every defined pair,
    since summable closed sets have generating cliques inside a common
    maximal clique.  Element-level consistency of every emitted entry is
    re-checked exhaustively, plus a randomized completeness audit.
    """
    if not check_symmetric_irreflexive(rel):
        raise ValueError("relation must be symmetric and irreflexive")
    if cliques is None:
        cliques = enumerate_maximal_cliques(rel)
    if not skip_saturation_check:
        ok, wit = check_saturation(rel, cliques)
        if not ok:
            raise NotSaturatedError(wit)

    index: Dict[int, int] = {}
    closed_sets: List[int] = []
    per_clique_idx: List[np.ndarray] = []
    for m_mask in cliques:
        mem, polar = _subset_polars(rel, m_mask)
        k = len(mem)
        idxs = np.empty(1 << k, dtype=np.int64)
        for s in range(1 << k):
            q = polar[s]
            gi = index.get(q)
            if gi is None:
                gi = len(closed_sets)
                if gi >= max_ground:
                    raise CapExceededError("ground-set size cap exceeded")
                index[q] = gi
                closed_sets.append(q)
            idxs[s] = gi
        per_clique_idx.append(idxs)
    n = len(closed_sets)
    if n >= (1 << 21):
        raise CapExceededError("ground set too large for 21-bit entry packing")

    # orthocomplement: polar[s] and polar[~s] are mutual complements; under
    # saturation closure(B) = B^TT = (M\B)^T, so index arrays already pair up
    comp = np.full(n, -1, dtype=np.int64)
    zero_idx = index.get(0)
    one_idx = index.get(rel.full)
    if zero_idx is None or one_idx is None:
        raise ValueError("empty set or full carrier missing from ground set")
    chunks: List[np.ndarray] = []
    for m_mask, idxs in zip(cliques, per_clique_idx):
        k = card(m_mask)
        top = (1 << k) - 1
        comp[idxs] = idxs[top ^ np.arange(1 << k)]
        pats = _PATTERN_CACHE.get(k)
        if pats is None:
            pats = _disjoint_pair_patterns(k)
            _PATTERN_CACHE[k] = pats
        ss, tt = pats
        # element for subset B_s is its closure = polar[~s]
        tri = (
            (idxs[top ^ ss] << 42)
            | (idxs[top ^ tt] << 21)
            | idxs[top ^ (ss | tt)]
        )
        chunks.append(tri)
        if sum(len(c) for c in chunks) > 40_000_000:
            chunks = [np.unique(np.concatenate(chunks))]
    allt = np.unique(np.concatenate(chunks))
    left = (allt >> 42).astype(np.int64)
    right = ((allt >> 21) & 0x1FFFFF).astype(np.int64)
    value = (allt & 0x1FFFFF).astype(np.int64)
    ij = allt >> 21
    if len(np.unique(ij)) != len(allt):
        raise ValueError("sum not well-defined: one pair produced two closures")

    masks = _pack_masks(closed_sets, rel.carrier_size)
    w = masks.shape[1]
    consistency = {}
    # every entry satisfies the definedness test Q1 inside Q^T, and the
    # Galois identity (Q u Q1)^T = Q^T n Q1^T at the closed-set level
    ok_def = np.ones(len(left), dtype=bool)
    ok_gal = np.ones(len(left), dtype=bool)
    for wi in range(w):
        ui = masks[comp[left], wi]
        uj = masks[comp[right], wi]
        ok_def &= (masks[right, wi] & ~ui) == 0
        ok_gal &= masks[comp[value], wi] == (ui & uj)
    consistency["entries_definedness"] = bool(ok_def.all())
    consistency["entries_galois"] = bool(ok_gal.all())

    # randomized completeness audit: definedness in the table agrees with the
    # subset test on sampled pairs
    rng = np.random.default_rng(seed)
    t = min(audit_samples, 4 * n * n) if n < 40_000 else audit_samples
    ra = rng.integers(0, n, t, dtype=np.int64)
    rb = rng.integers(0, n, t, dtype=np.int64)
    subset_ok = np.ones(t, dtype=bool)
    for wi in range(w):
        subset_ok &= (masks[rb, wi] & ~masks[comp[ra], wi]) == 0
    keys_ij = np.sort(ij)
    probe = (ra << 21) | rb
    pos = np.searchsorted(keys_ij, probe)
    posc = np.minimum(pos, len(keys_ij) - 1)
    in_table = (pos < len(keys_ij)) & (keys_ij[posc] == probe)
    consistency["completeness_audit"] = bool((subset_ok == in_table).all())

    ea = FiniteEffectAlgebra.from_arrays(
        n,
        left,
        right,
        value,
        zero=zero_idx,
        one=one_idx,
        closed_masks=masks,
        comp=comp,
    )
    return OrthoalgebraBuild(ea, closed_sets, index, rel, cliques, consistency)


__all__ = [
    "CapExceededError",
    "FiniteRelation",
    "NotSaturatedError",
    "OrthoalgebraBuild",
    "build_orthoalgebra",
    "check_saturation",
    "check_symmetric_irreflexive",
    "closure",
    "enumerate_maximal_cliques",
]
