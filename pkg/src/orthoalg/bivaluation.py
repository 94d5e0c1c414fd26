"""Block colorings and the parity obstruction.

A bivaluation of the constructed orthoalgebra restricts, on the singleton
closed sets, to a coloring of the underlying relation that hits every
maximal clique exactly once.  The coloring search settles that question
directly on the relation; the parity obstruction reproduces the residue
argument that forces b(0) = 0 from any such coloring, contradicting the
validity condition b(0) = 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .family import FamilyInstance, full_shadow_block, singleton_block
from .gf2 import card, card_mod4, iter_bits, points_of
from .relation import FiniteRelation, closure


@dataclass
class ColoringProblem:
    relation: FiniteRelation
    blocks: List[int]  # clique bitmasks over the carrier

    def validate(self) -> None:
        covered = 0
        for b in self.blocks:
            covered |= b
            for i in iter_bits(b):
                rest = b & ~(1 << i)
                if rest & ~self.relation.adjacency[i]:
                    raise ValueError("a block is not a clique")
        if covered != self.relation.full:
            raise ValueError("some element lies in no block")


@dataclass
class ColoringResult:
    status: str  # "sat" | "unsat" | "budget_exceeded"
    witness: Optional[int] = None  # bitmask of elements colored 1
    decisions: int = 0


def check_atoms_singleton(rel: FiniteRelation) -> bool:
    """Every singleton is closed: {l}^TT = {l}.  This is what lets
    bivaluations of the constructed orthoalgebra be read off as colorings."""
    for l in range(rel.carrier_size):
        if closure(rel, rel.adjacency[l]) != 1 << l:
            return False
    return True


def search_block_coloring(
    cp: ColoringProblem,
    var_order: Optional[Sequence[int]] = None,
    node_budget: int = 10_000_000,
) -> ColoringResult:
    """Exactly-one-per-block search with unit propagation.

    Exactly-one constraints are propagated natively: fixing an element to 1
    zeroes the rest of each of its blocks; a block with no 1 and a single
    free element forces it; a block with no 1 and no free element fails.
    """
    m = cp.relation.carrier_size
    blocks = cp.blocks
    nb = len(blocks)
    elem_blocks: List[List[int]] = [[] for _ in range(m)]
    for bi, b in enumerate(blocks):
        for i in iter_bits(b):
            elem_blocks[i].append(bi)
    block_members = [points_of(b) for b in blocks]

    color = [-1] * m
    ones = [0] * nb
    free = [len(bm) for bm in block_members]
    trail: List[int] = []

    def assign(v: int, val: int) -> bool:
        # counter updates happen here so undo stays exact even when a
        # conflict aborts the queue mid-propagation
        if color[v] >= 0:
            return color[v] == val
        color[v] = val
        trail.append(v)
        for bi in elem_blocks[v]:
            free[bi] -= 1
            if val == 1:
                ones[bi] += 1
        queue.append(v)
        return True

    def propagate() -> bool:
        while queue:
            v = queue.pop()
            val = color[v]
            for bi in elem_blocks[v]:
                if ones[bi] > 1:
                    return False
                if val == 1:
                    for u in block_members[bi]:
                        if u != v and not assign(u, 0):
                            return False
                elif ones[bi] == 0:
                    if free[bi] == 0:
                        return False
                    if free[bi] == 1:
                        for u in block_members[bi]:
                            if color[u] < 0:
                                if not assign(u, 1):
                                    return False
                                break
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            v = trail.pop()
            val = color[v]
            color[v] = -1
            for bi in elem_blocks[v]:
                free[bi] += 1
                if val == 1:
                    ones[bi] -= 1

    queue: List[int] = []

    if var_order is None:
        var_order = sorted(range(m), key=lambda v: -len(elem_blocks[v]))
    order = list(var_order)
    decisions = 0

    def next_var(p: int) -> int:
        while p < m and color[order[p]] >= 0:
            p += 1
        return p

    pos = next_var(0)
    if pos >= m:
        return ColoringResult("sat", witness=0)
    stack = [[order[pos], 0, len(trail), pos]]
    while stack:
        var, tried, mark, p = stack[-1]
        if tried > 1:
            stack.pop()
            continue
        stack[-1][1] += 1
        decisions += 1
        if decisions > node_budget:
            return ColoringResult("budget_exceeded", decisions=decisions)
        undo(mark)
        queue.clear()
        val = 1 - tried
        if not assign(var, val) or not propagate():
            continue
        q = next_var(p)
        if q >= m:
            witness = 0
            for v in range(m):
                if color[v] == 1:
                    witness |= 1 << v
            _validate_coloring(cp, witness)
            return ColoringResult("sat", witness=witness, decisions=decisions)
        stack.append([order[q], 0, len(trail), q])
    return ColoringResult("unsat", decisions=decisions)


def _validate_coloring(cp: ColoringProblem, witness: int) -> None:
    for b in cp.blocks:
        if card(b & witness) != 1:
            raise AssertionError("search returned an invalid coloring")


@dataclass
class ObstructionReport:
    """The residue computation showing a full coloring cannot exist.

    Any admissible choice of one element per point block plus one element
    over the full carrier satisfies, summed over all points,
    (N-1) b(0) + C(N,2) c(2) = N c(3) in Z/2; with 4 | N this collapses to
    b(0) = 0, against the standing assumption b(0) = 1.
    """

    n: int
    b0_coefficient: int
    pair_term: int
    rhs: int
    derived_b0: int
    contradiction: bool
    enumerated: bool = False
    tuple_exists: Optional[bool] = None
    point_blocks_only_witness: Optional[Tuple[int, ...]] = None


def parity_obstruction(inst: FamilyInstance, enumerate_cap: int = 8) -> ObstructionReport:
    """Residue obstruction for the point blocks plus the full-carrier block.

    For n up to enumerate_cap the candidate tuples are also enumerated
    directly (one element per point block, one over the full carrier,
    pairwise unrelated) to confirm infeasibility; larger n keep the
    symbolic residue only.
    """
    n = inst.n
    p = inst.params
    if n % 4 != 0:
        raise ValueError("obstruction argument needs 4 | n")
    pairs = (n * (n - 1) // 2) & 1
    b0_coeff = (n - 1) & 1
    pair_term = (pairs * p.c[2]) & 1
    rhs = (n * p.c[3]) & 1
    # b0_coeff * b(0) + pair_term = rhs  =>  derived value of b(0)
    derived_b0 = (rhs ^ pair_term) & 1  # b0_coeff is 1 for even n
    report = ObstructionReport(
        n=n,
        b0_coefficient=b0_coeff,
        pair_term=pair_term,
        rhs=rhs,
        derived_b0=derived_b0,
        contradiction=(derived_b0 != p.b[0]),
    )
    if n <= enumerate_cap and inst.size:
        report.enumerated = True
        report.tuple_exists = _tuple_search(inst, include_full=True) is not None
        wit = _tuple_search(inst, include_full=False)
        report.point_blocks_only_witness = wit
    return report


def _tuple_search(inst: FamilyInstance, include_full: bool) -> Optional[Tuple[int, ...]]:
    """Pick one element per point block (optionally plus one over V),
    pairwise NOT related; returns the tuple of element indices or None."""
    n = inst.n
    blocks = [points_of(singleton_block(inst, v)) for v in range(n)]
    if include_full:
        blocks.append(points_of(full_shadow_block(inst)))
    chosen: List[int] = []

    def ok(cand: int) -> bool:
        adj = inst.adjacency()
        return all(not (adj[cand] >> c) & 1 for c in chosen)

    def rec(d: int) -> Optional[Tuple[int, ...]]:
        if d == len(blocks):
            return tuple(chosen)
        for cand in blocks[d]:
            if ok(cand):
                chosen.append(cand)
                got = rec(d + 1)
                if got is not None:
                    return got
                chosen.pop()
        return None

    return rec(0)


__all__ = [
    "ColoringProblem",
    "ColoringResult",
    "ObstructionReport",
    "check_atoms_singleton",
    "parity_obstruction",
    "search_block_coloring",
]
