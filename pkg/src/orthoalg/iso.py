"""Explicit isomorphisms between family instances with compatible parameters.

Two parameter sets whose pointwise differences (beta for b, gamma for c)
vanish at residues 0 and 2 and cancel across residues 1 and 3 yield
relation-isomorphic instances; the witness bijection shifts each level by
a solved offset family, mirroring the offset system of the symmetry maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .family import FamilyInstance, FamilyParams, tc_related_raw
from .gf2 import card, card_mod4, iter_bits, parity_sum
from .symmetry import GaugeFunction


@dataclass
class BetaGammaCheck:
    ok: bool
    beta: Tuple[int, int, int, int]
    gamma: Tuple[int, int, int, int]
    violations: List[str]


def check_beta_gamma(p: FamilyParams, p2: FamilyParams) -> BetaGammaCheck:
    """Sufficient condition for an explicit isomorphism between the
    instances of p and p2 (both assumed valid)."""
    beta = tuple(p.b[i] ^ p2.b[i] for i in range(4))
    gamma = tuple(p.c[i] ^ p2.c[i] for i in range(4))
    violations = []
    if beta[0]:
        violations.append("beta(0) != 0")
    if beta[2]:
        violations.append("beta(2) != 0")
    if beta[1] ^ beta[3]:
        violations.append("beta(1) + beta(3) != 0")
    if gamma[0]:
        violations.append("gamma(0) != 0")
    if gamma[2]:
        violations.append("gamma(2) != 0")
    if gamma[1] ^ gamma[3]:
        violations.append("gamma(1) + gamma(3) != 0")
    return BetaGammaCheck(not violations, beta, gamma, violations)


class IsoConstructionError(ValueError):
    pass


def _beta_of(beta, u):
    return beta[card_mod4(u)]


def _ctilde(beta, gamma, u, u1):
    if u == u1:
        return 0
    return gamma[card_mod4(u ^ u1)] ^ _beta_of(beta, u) ^ _beta_of(beta, u1)


def build_family_isomorphism(
    inst: FamilyInstance,
    inst2: FamilyInstance,
    nu: Optional[GaugeFunction] = None,
    verify: bool = True,
) -> np.ndarray:
    """Construct and verify the level-wise shift bijection between the two
    instances; returns the permutation sending indices of inst to inst2.

    The gauge defaults to zero; any gauge works when the beta/gamma
    conditions hold.  Verification checks the map is a bijection carrying
    each level onto the matching level and preserving relatedness both
    ways (exhaustive over all pairs).
    """
    if inst.n != inst2.n:
        raise IsoConstructionError("instances must share the carrier size")
    n = inst.n
    chk = check_beta_gamma(inst.params, inst2.params)
    if not chk.ok:
        raise IsoConstructionError("beta/gamma conditions fail: " + "; ".join(chk.violations))
    beta, gamma = chk.beta, chk.gamma
    if nu is None:
        nu = GaugeFunction(n)

    # singleton offset rows over the fixed index order
    single = [0] * n
    for v in range(n):
        row = 0
        for z in range(n):
            if z < v:
                bit = nu.value(z, v)
            elif z == v:
                bit = _beta_of(beta, 1 << v)
            else:
                bit = nu.value(z, v) ^ _ctilde(beta, gamma, 1 << z, 1 << v)
            if bit:
                row |= 1 << z
        single[v] = row

    offsets = [0] * (1 << n)
    for q in range(1, 1 << n):
        if card(q) == 1:
            offsets[q] = single[q.bit_length() - 1]
            continue
        row = 0
        for v in range(n):
            bit = _ctilde(beta, gamma, 1 << v, q) ^ (card(single[v] & q) & 1)
            if bit:
                row |= 1 << v
        offsets[q] = row

    perm = np.empty(inst.size, dtype=np.int64)
    for i, (u, phi) in enumerate(inst.elements):
        phi2 = phi ^ offsets[u]
        j = inst2.index.get((u, phi2))
        if j is None:
            raise IsoConstructionError(
                f"image leaves the target level at element {i} (U={u:#x})"
            )
        perm[i] = j
    if len(np.unique(perm)) != inst.size:
        raise IsoConstructionError("constructed map is not a bijection")
    if verify:
        ok, wit = _verify_relation_isomorphism(inst, inst2, perm)
        if not ok:
            raise IsoConstructionError(f"relation not preserved at pair {wit}")
    return perm


def _verify_relation_isomorphism(
    inst: FamilyInstance, inst2: FamilyInstance, perm: np.ndarray
) -> Tuple[bool, Optional[tuple]]:
    p1, p2 = inst.params, inst2.params
    m = inst.size
    for i in range(m):
        u, phi = inst.elements[i]
        iu, iphi = inst2.elements[int(perm[i])]
        for j in range(i + 1, m):
            v, psi = inst.elements[j]
            jv, jpsi = inst2.elements[int(perm[j])]
            if tc_related_raw(p1, u, phi, v, psi) != tc_related_raw(p2, iu, iphi, jv, jpsi):
                return False, (i, j)
    return True, None


def induced_ground_map(
    build1, build2, perm: np.ndarray
) -> Optional[np.ndarray]:
    """Push every closed set of the first build through the element map and
    locate it in the second build's ground set; None when any image is
    missing (then the builds are not isomorphic via this map)."""
    out = np.empty(build1.n, dtype=np.int64)
    for gi, mask in enumerate(build1.closed_sets):
        img = 0
        for i in iter_bits(mask):
            img |= 1 << int(perm[i])
        j = build2.index.get(img)
        if j is None:
            return None
        out[gi] = j
    return out


def verify_orthoalgebra_isomorphism(build1, build2, perm: np.ndarray) -> bool:
    """The induced map is a ground bijection sending the sum table of the
    first build exactly onto that of the second (checked entrywise)."""
    gmap = induced_ground_map(build1, build2, perm)
    if gmap is None or len(np.unique(gmap)) != build1.n or build1.n != build2.n:
        return False
    ea1, ea2 = build1.algebra, build2.algebra
    if int(gmap[ea1.zero]) != ea2.zero or int(gmap[ea1.one]) != ea2.one:
        return False
    left, right, vals = ea1.entry_arrays()
    ok, got = ea2.lookup_many(gmap[left], gmap[right])
    if not ok.all():
        return False
    if not (got == gmap[vals]).all():
        return False
    return ea1.n_entries == ea2.n_entries


__all__ = [
    "BetaGammaCheck",
    "IsoConstructionError",
    "build_family_isomorphism",
    "check_beta_gamma",
    "induced_ground_map",
    "verify_orthoalgebra_isomorphism",
]
