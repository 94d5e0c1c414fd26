"""Finite effect algebras: representation, axiom verification, derived structure.

The partial operation is stored as a sorted table of (left, right) -> value
entries over element indices.  Verification is exhaustive; the heavy
associativity and coherence checks stream over the table in chunks so
that instances with millions of defined pairs stay within memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

DEFAULT_CHUNK = 4_000_000
ORDER_MATRIX_CAP = 1 << 13
TRANSITIVITY_CAP = 512


class MalformedTableError(ValueError):
    pass


class FiniteEffectAlgebra:
    """A finite partial-sum structure (candidate effect algebra).

    Elements are indices 0..n-1.  The table maps ordered pairs to values;
    nothing is assumed about it until verified.  `closed_masks` and `comp`
    are optional construction artifacts (bit-packed ground sets and the
    orthocomplement map) attached by builders that know them; they enable
    fast definedness prefilters but never replace table lookups in the
    verification verdicts.
    """

    def __init__(
        self,
        n: int,
        keys: np.ndarray,
        vals: np.ndarray,
        zero: int,
        one: int,
        shift: int,
        labels: Optional[Sequence] = None,
        closed_masks: Optional[np.ndarray] = None,
        comp: Optional[np.ndarray] = None,
    ):
        self.n = n
        self.keys = keys
        self.vals = vals
        self.zero = zero
        self.one = one
        self.shift = shift
        self.labels = labels
        self.closed_masks = closed_masks
        self.comp = comp
        lefts = (keys >> shift).astype(np.int64)
        counts = np.bincount(lefts, minlength=n)
        self.row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.row_ptr[1:])
        self._ksorted = None  # lazy: entry order sorted by value

    @classmethod
    def from_entries(
        cls,
        n: int,
        entries: Iterable[Tuple[int, int, int]],
        zero: int,
        one: int,
        labels: Optional[Sequence] = None,
    ) -> "FiniteEffectAlgebra":
        tri = sorted(set(entries))
        shift = max(1, (n - 1).bit_length() if n > 1 else 1)
        keys = np.empty(len(tri), dtype=np.int64)
        vals = np.empty(len(tri), dtype=np.int32)
        for t, (i, j, k) in enumerate(tri):
            if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
                raise MalformedTableError(f"index out of range in entry {(i, j, k)}")
            keys[t] = (i << shift) | j
            vals[t] = k
        if len(np.unique(keys)) != len(keys):
            raise MalformedTableError("duplicate (left, right) pair with conflicting values")
        return cls(n, keys, vals, zero, one, shift)

    @classmethod
    def from_arrays(
        cls,
        n: int,
        left: np.ndarray,
        right: np.ndarray,
        value: np.ndarray,
        zero: int,
        one: int,
        labels: Optional[Sequence] = None,
        closed_masks: Optional[np.ndarray] = None,
        comp: Optional[np.ndarray] = None,
    ) -> "FiniteEffectAlgebra":
        shift = max(1, (n - 1).bit_length() if n > 1 else 1)
        keys = (left.astype(np.int64) << shift) | right.astype(np.int64)
        order = np.argsort(keys)
        keys = keys[order]
        vals = value.astype(np.int32)[order]
        if len(keys) and (np.diff(keys) == 0).any():
            dup = int(np.flatnonzero(np.diff(keys) == 0)[0])
            if vals[dup] != vals[dup + 1]:
                raise MalformedTableError("conflicting values for one pair")
            uniq, first = np.unique(keys, return_index=True)
            keys, vals = uniq, vals[first]
        return cls(n, keys, vals, zero, one, shift, labels, closed_masks, comp)

    @property
    def n_entries(self) -> int:
        return len(self.keys)

    def defined(self, i: int, j: int) -> bool:
        key = (i << self.shift) | j
        pos = np.searchsorted(self.keys, key)
        return bool(pos < len(self.keys) and self.keys[pos] == key)

    def value(self, i: int, j: int) -> Optional[int]:
        key = (i << self.shift) | j
        pos = np.searchsorted(self.keys, key)
        if pos < len(self.keys) and self.keys[pos] == key:
            return int(self.vals[pos])
        return None

    def lookup_many(self, left: np.ndarray, right: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorized lookup; returns (defined mask, values with -1 for undefined)."""
        key = (left.astype(np.int64) << self.shift) | right.astype(np.int64)
        pos = np.searchsorted(self.keys, key)
        pos_c = np.minimum(pos, len(self.keys) - 1)
        ok = (pos < len(self.keys)) & (self.keys[pos_c] == key)
        out = np.where(ok, self.vals[pos_c], -1)
        return ok, out

    def row(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Right partners and values of row i (partners ascending)."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        mask = (1 << self.shift) - 1
        return (self.keys[lo:hi] & mask).astype(np.int64), self.vals[lo:hi].astype(np.int64)

    def entry_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        left = (self.keys >> self.shift).astype(np.int32)
        right = (self.keys & ((1 << self.shift) - 1)).astype(np.int32)
        return left, right, self.vals.astype(np.int32)

    def value_sorted_order(self) -> np.ndarray:
        """Entry permutation sorted by value index (for decomposition queries)."""
        if self._ksorted is None:
            self._ksorted = np.argsort(self.vals, kind="stable")
        return self._ksorted

    def decompositions_of(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """All (i, j) with i + j = k, from the table."""
        order = self.value_sorted_order()
        sv = self.vals[order]
        lo = np.searchsorted(sv, k, side="left")
        hi = np.searchsorted(sv, k, side="right")
        ids = order[lo:hi]
        left = (self.keys[ids] >> self.shift).astype(np.int64)
        right = (self.keys[ids] & ((1 << self.shift) - 1)).astype(np.int64)
        return left, right

    def orthocomplement_array(self) -> np.ndarray:
        """comp[x] = the unique y with y + x = one (from the table)."""
        if self.comp is not None:
            return self.comp
        left, right = self.decompositions_of(self.one)
        comp = np.full(self.n, -1, dtype=np.int64)
        comp[right] = left
        self.comp = comp
        return comp


@dataclass
class VerificationReport:
    """Per-axiom verdicts with a replayable counterexample for each failure."""

    commutative: bool = True
    associative: bool = True
    zero_identity: bool = True
    cancellative: bool = True
    has_orthocomplements: bool = True
    one_summand_trivial: bool = True
    counterexamples: Dict[str, tuple] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (
            self.commutative
            and self.associative
            and self.zero_identity
            and self.cancellative
            and self.has_orthocomplements
            and self.one_summand_trivial
        )

    def summary(self) -> str:
        names = [
            ("1 commutativity", self.commutative),
            ("2 associativity", self.associative),
            ("3 zero identity", self.zero_identity),
            ("4 cancellation", self.cancellative),
            ("5 orthocomplements", self.has_orthocomplements),
            ("6 one-summand", self.one_summand_trivial),
        ]
        return "; ".join(f"axiom {n}: {'ok' if v else 'FAIL'}" for n, v in names)


def _first_true(mask: np.ndarray) -> Optional[int]:
    idx = np.flatnonzero(mask)
    return int(idx[0]) if len(idx) else None


def verify_effect_axioms(
    ea: FiniteEffectAlgebra, chunk: int = DEFAULT_CHUNK
) -> VerificationReport:
    """Exhaustively check the six effect-algebra axioms against the table."""
    rep = VerificationReport()
    n = ea.n
    if ea.zero == ea.one:
        raise MalformedTableError("zero and one must differ")
    left, right, vals = ea.entry_arrays()
    if n >= (1 << 21):
        raise MalformedTableError("element count beyond verification packing cap")

    # Axiom 1: the table is symmetric with equal values.
    a = np.sort(
        (left.astype(np.int64) << 42) | (right.astype(np.int64) << 21) | vals
    )
    b = np.sort(
        (right.astype(np.int64) << 42) | (left.astype(np.int64) << 21) | vals
    )
    if not np.array_equal(a, b):
        rep.commutative = False
        extra = np.setdiff1d(a, b)
        t = int(extra[0])
        rep.counterexamples["commutative"] = (t >> 42, (t >> 21) & 0x1FFFFF, t & 0x1FFFFF)

    # Axiom 3: x + zero defined and equal to x, for every x.
    zmask = right == ea.zero
    if int(zmask.sum()) != n or not np.array_equal(np.sort(left[zmask]), np.arange(n)):
        rep.zero_identity = False
        missing = np.setdiff1d(np.arange(n), left[zmask])
        rep.counterexamples["zero_identity"] = (int(missing[0]) if len(missing) else -1,)
    elif not np.array_equal(vals[zmask], left[zmask]):
        rep.zero_identity = False
        bad = _first_true(vals[zmask] != left[zmask])
        rep.counterexamples["zero_identity"] = (int(left[zmask][bad]),)

    # Axiom 4: within a row, values are distinct.
    rowkey = (left.astype(np.int64) * n) + vals
    srt = np.sort(rowkey)
    dup = np.flatnonzero(np.diff(srt) == 0)
    if len(dup):
        k = int(srt[dup[0]])
        i = k // n
        same = (left == i) & (vals == k % n)
        js = right[same]
        rep.cancellative = False
        rep.counterexamples["cancellative"] = (i, int(js[0]), int(js[1]), k % n)

    # Axiom 5: every x has some y with y + x = one.
    leftc, rightc = ea.decompositions_of(ea.one)
    covered = np.zeros(n, dtype=bool)
    covered[rightc] = True
    if not covered.all():
        rep.has_orthocomplements = False
        rep.counterexamples["has_orthocomplements"] = (_first_true(~covered),)

    # Axiom 6: x + one defined only for x = zero.
    omask = right == ea.one
    bad = left[omask] != ea.zero
    if bad.any():
        rep.one_summand_trivial = False
        rep.counterexamples["one_summand_trivial"] = (int(left[omask][_first_true(bad)]),)

    # Axiom 2: associativity with definedness transfer, streamed.  Entries
    # touching zero are skipped only once axioms 1 and 3 are known to hold.
    ce = _check_associativity(
        ea, left, right, vals, chunk, skip_trivial=rep.commutative and rep.zero_identity
    )
    if ce is not None:
        rep.associative = False
        rep.counterexamples["associative"] = ce
    return rep


def _check_associativity(
    ea: FiniteEffectAlgebra,
    left: np.ndarray,
    right: np.ndarray,
    vals: np.ndarray,
    chunk: int,
    skip_trivial: bool = True,
) -> Optional[tuple]:
    """For every entry (x,y)->s and every z in row(s): require y+z defined,
    x+(y+z) defined, and equal to s+z.

    With skip_trivial, entries with x=zero or y=zero and probes z=zero are
    skipped; they are exact consequences of axioms 1 and 3, which the caller
    asserts have already been verified.
    """
    row_ptr = ea.row_ptr
    row_sizes = (row_ptr[1:] - row_ptr[:-1]).astype(np.int64)
    jmask = (1 << ea.shift) - 1
    if skip_trivial:
        nontrivial = np.flatnonzero((left != ea.zero) & (right != ea.zero))
    else:
        nontrivial = np.arange(len(left))
    sizes = row_sizes[vals[nontrivial]]
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    total = int(bounds[-1])
    start = 0
    while start < len(nontrivial):
        stop = int(np.searchsorted(bounds, bounds[start] + chunk, side="left"))
        stop = max(stop, start + 1)
        stop = min(stop, len(nontrivial))
        ids = nontrivial[start:stop]
        seg = sizes[start:stop]
        reps = np.repeat(np.arange(len(ids)), seg)
        # probe positions inside row(s)
        offs = np.arange(len(reps)) - np.repeat(bounds[start:stop] - bounds[start], seg)
        epos = row_ptr[vals[ids]][reps] + offs
        X = left[ids][reps].astype(np.int64)
        Y = right[ids][reps].astype(np.int64)
        S = vals[ids][reps].astype(np.int64)
        Z = (ea.keys[epos] & jmask).astype(np.int64)
        W = ea.vals[epos].astype(np.int64)
        if skip_trivial:
            keep = Z != ea.zero
            X, Y, S, Z, W = X[keep], Y[keep], S[keep], Z[keep], W[keep]
        ok1, T = ea.lookup_many(Y, Z)
        if not ok1.all():
            b = _first_true(~ok1)
            return (int(X[b]), int(Y[b]), int(Z[b]), "y+z undefined")
        ok2, V2 = ea.lookup_many(X, T)
        if not ok2.all():
            b = _first_true(~ok2)
            return (int(X[b]), int(Y[b]), int(Z[b]), "x+(y+z) undefined")
        bad = V2 != W
        if bad.any():
            b = _first_true(bad)
            return (int(X[b]), int(Y[b]), int(Z[b]), "unequal")
        start = stop
    return None


def is_orthoalgebra(ea: FiniteEffectAlgebra) -> bool:
    """x + x defined forces x = zero."""
    left, right, _ = ea.entry_arrays()
    diag = left[left == right]
    return bool((diag == ea.zero).all())


def is_coherent(ea: FiniteEffectAlgebra, chunk: int = DEFAULT_CHUNK) -> bool:
    """Pairwise-summable triples are jointly summable.

    Streams over unordered defined pairs (y, z) and all candidates x
    summable with both; verifies x + (y + z) is defined.  Candidate
    generation may use the builder-attached ground masks as a prefilter
    (sound: the table was checked to be contained in the mask relation);
    every surviving triple is confirmed against the table itself.
    """
    return _coherence_counterexample(ea, chunk) is None


def coherence_counterexample(ea: FiniteEffectAlgebra, chunk: int = DEFAULT_CHUNK):
    return _coherence_counterexample(ea, chunk)


def _coherence_counterexample(ea: FiniteEffectAlgebra, chunk: int) -> Optional[tuple]:
    n = ea.n
    left, right, vals = ea.entry_arrays()
    jmask = (1 << ea.shift) - 1
    row_ptr = ea.row_ptr
    # unordered pairs, skipping zero/one participants (their triples follow
    # from axioms 1, 3, 6, which the caller is expected to have verified)
    skip = {ea.zero, ea.one}
    sel = np.flatnonzero(
        (left < right)
        & (left != ea.zero)
        & (right != ea.zero)
        & (left != ea.one)
        & (right != ea.one)
    )
    if len(sel) == 0:
        return None
    Y = left[sel].astype(np.int64)
    Z = right[sel].astype(np.int64)
    T = vals[sel].astype(np.int64)
    # probe from the smaller row; candidates x must exceed max(y, z) so each
    # unordered triple is inspected exactly once
    ry = (row_ptr[Y + 1] - row_ptr[Y]).astype(np.int64)
    rz = (row_ptr[Z + 1] - row_ptr[Z]).astype(np.int64)
    probe_from_y = ry <= rz
    src = np.where(probe_from_y, Y, Z)
    other = np.where(probe_from_y, Z, Y)
    # x > z = max(y,z) = Z (since Y < Z); rows are ascending, and global keys
    # are sorted, so the per-row cut is a single global binary search
    hi_all = row_ptr[src + 1]
    cut = np.searchsorted(ea.keys, (src << ea.shift) | Z, side="right")
    sizes = hi_all - cut
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    use_masks = ea.closed_masks is not None and ea.comp is not None
    if use_masks:
        masks = ea.closed_masks
        comp = ea.comp
        w = masks.shape[1]
    start = 0
    while start < len(src):
        stop = int(np.searchsorted(bounds, bounds[start] + chunk, side="left"))
        stop = max(stop, start + 1)
        stop = min(stop, len(src))
        seg = sizes[start:stop]
        reps = np.repeat(np.arange(start, stop), seg)
        offs = np.arange(len(reps)) - np.repeat(bounds[start:stop] - bounds[start], seg)
        epos = cut[reps] + offs
        Xc = (ea.keys[epos] & jmask).astype(np.int64)
        Oc = other[reps]
        if use_masks:
            # prefilter: x summable with the other side iff mask[x] inside
            # the orthocomplement mask of the other side
            ok = np.ones(len(Xc), dtype=bool)
            om = masks[comp[Oc]]
            xm = masks[Xc]
            for wi in range(w):
                ok &= (xm[:, wi] & ~om[:, wi]) == 0
            Xs, Os, Rs = Xc[ok], Oc[ok], reps[ok]
            ok2, _ = ea.lookup_many(Xs, Os)  # confirm against the table
            Xs, Os, Rs = Xs[ok2], Os[ok2], Rs[ok2]
        else:
            ok2, _ = ea.lookup_many(Xc, Oc)
            Xs, Os, Rs = Xc[ok2], Oc[ok2], reps[ok2]
        if len(Xs):
            ok3, _ = ea.lookup_many(Xs, T[Rs])
            if not ok3.all():
                b = _first_true(~ok3)
                return (int(Xs[b]), int(Y[Rs[b]]), int(Z[Rs[b]]))
        start = stop
    return None


def standard_order(ea: FiniteEffectAlgebra, cap: int = ORDER_MATRIX_CAP) -> np.ndarray:
    """Boolean matrix of x <= y iff some x1 + x = y; verified to be a partial
    order (transitivity verified only below TRANSITIVITY_CAP elements)."""
    n = ea.n
    if n > cap:
        raise ValueError(f"order matrix capped at {cap} elements")
    left, right, vals = ea.entry_arrays()
    order = np.zeros((n, n), dtype=bool)
    order[right, vals] = True
    order[left, vals] = True
    if not order.diagonal().all():
        raise MalformedTableError("order not reflexive; zero rows incomplete")
    anti = order & order.T
    if (anti & ~np.eye(n, dtype=bool)).any():
        raise MalformedTableError("order not antisymmetric")
    if n <= TRANSITIVITY_CAP:
        m = order.astype(np.uint8)
        if ((m @ m > 0) & ~order).any():
            raise MalformedTableError("order not transitive")
    return order


def orthocomplement_of(ea: FiniteEffectAlgebra, x: int) -> int:
    comp = ea.orthocomplement_array()
    y = int(comp[x])
    if y < 0:
        raise MalformedTableError(f"element {x} has no orthocomplement")
    return y


@dataclass
class CompatibilityResult:
    compatible: bool
    witness: Optional[Tuple[int, int, int, int]] = None  # (Z, V, V1, W)
    reason: str = ""


def _lower_set(ea: FiniteEffectAlgebra, x: int) -> np.ndarray:
    """All z with z <= x, via decompositions of x in the table."""
    left, right = ea.decompositions_of(x)
    return np.unique(np.concatenate((left, right, [x, ea.zero])))


def _leq(ea: FiniteEffectAlgebra, a: int, b: int) -> bool:
    if a == b or a == ea.zero:
        return True
    left, right = ea.decompositions_of(b)
    return bool((right == a).any() or (left == a).any())


def _subtract(ea: FiniteEffectAlgebra, b: int, a: int) -> Optional[int]:
    """The unique v with a + v = b, if any."""
    left, right = ea.decompositions_of(b)
    hit = np.flatnonzero(left == a)
    if len(hit):
        return int(right[hit[0]])
    hit = np.flatnonzero(right == a)
    if len(hit):
        return int(left[hit[0]])
    return None


def _meet(ea: FiniteEffectAlgebra, x: int, y: int) -> Optional[int]:
    common = np.intersect1d(_lower_set(ea, x), _lower_set(ea, y))
    # infimum = the common lower bound dominating all others, if it exists
    best = None
    for cand in common:
        if all(_leq(ea, int(z), int(cand)) for z in common):
            best = int(cand)
            break
    return best


def check_compatibility(ea: FiniteEffectAlgebra, x: int, y: int) -> CompatibilityResult:
    """Compatibility test: inf and sup exist and the two exchange equalities
    hold; on success also search for a four-part decomposition witness."""
    comp = ea.orthocomplement_array()
    inf_xy = _meet(ea, x, y)
    if inf_xy is None:
        return CompatibilityResult(False, reason="no infimum")
    sup_dual = _meet(ea, int(comp[x]), int(comp[y]))
    if sup_dual is None:
        return CompatibilityResult(False, reason="no supremum")
    sup_xy = int(comp[sup_dual])
    xs, ys = int(comp[x]), int(comp[y])
    sups = int(comp[sup_xy])
    lhs1 = ea.value(inf_xy, xs)
    rhs1 = ea.value(y, sups)
    lhs2 = ea.value(inf_xy, ys)
    rhs2 = ea.value(x, sups)
    if lhs1 is None or rhs1 is None or lhs1 != rhs1:
        return CompatibilityResult(False, reason="first exchange equality fails")
    if lhs2 is None or rhs2 is None or lhs2 != rhs2:
        return CompatibilityResult(False, reason="second exchange equality fails")
    # witness: 1 = Z + V + V1 + W with Z+V = x, Z+V1 = y
    for z in _lower_set(ea, inf_xy)[::-1]:
        z = int(z)
        v = _subtract(ea, x, z)
        v1 = _subtract(ea, y, z)
        if v is None or v1 is None:
            continue
        zv = ea.value(z, v)
        if zv is None or ea.value(zv, v1) is None:
            continue
        zvv1 = ea.value(zv, v1)
        wit = int(comp[zvv1])
        return CompatibilityResult(True, witness=(z, v, v1, wit))
    return CompatibilityResult(True, witness=None)


def build_minimal_boolean() -> FiniteEffectAlgebra:
    """The two-element Boolean effect algebra (0 and 1 only)."""
    entries = [(0, 0, 0), (0, 1, 1), (1, 0, 1)]
    return FiniteEffectAlgebra.from_entries(2, entries, zero=0, one=1, labels=["0", "1"])


def build_kolmogorov(omega_size: int) -> FiniteEffectAlgebra:
    """All subsets of a finite sample space; sum = union of disjoint sets."""
    if omega_size < 1:
        raise ValueError("omega_size must be >= 1")
    if omega_size > 16:
        raise ValueError("Kolmogorov algebra capped at 2^16 elements")
    n = 1 << omega_size
    full = n - 1
    entries = []
    for a in range(n):
        rest = full ^ a
        b = rest
        while True:
            entries.append((a, b, a | b))
            if b == 0:
                break
            b = (b - 1) & rest
    return FiniteEffectAlgebra.from_entries(n, entries, zero=0, one=full)


@dataclass
class BivaluationResult:
    status: str  # "found" | "none" | "budget_exceeded"
    assignment: Optional[np.ndarray] = None
    decisions: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


def find_bivaluation(
    ea: FiniteEffectAlgebra, node_budget: int = 2_000_000, var_order: Optional[np.ndarray] = None
) -> BivaluationResult:
    """Search for a morphism onto the minimal Boolean algebra.

    Constraints: f(zero)=0, f(one)=1, and for every entry (i,j)->k the
    admissible patterns are (0,0,0), (1,0,1), (0,1,1).  Backtracking with
    unit propagation; branching by descending constraint degree unless an
    explicit order is given.  Exceeding the decision budget is reported
    separately from a proven absence.
    """
    n = ea.n
    EI, EJ, EK = ea.entry_arrays()
    EI = EI.astype(np.int64)
    EJ = EJ.astype(np.int64)
    EK = EK.astype(np.int64)
    P = len(EI)
    # incidence var -> entry ids, CSR
    vs = np.concatenate((EI, EJ, EK))
    eid = np.concatenate((np.arange(P, dtype=np.int64),) * 3)
    srt = np.argsort(vs, kind="stable")
    inc_eid = eid[srt]
    inc_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(vs[srt], minlength=n), out=inc_ptr[1:])

    assign = np.full(n, -1, dtype=np.int8)
    trail: List[np.ndarray] = []
    trail_len = 0

    def push(vars_arr: np.ndarray, vals_arr: np.ndarray) -> Optional[np.ndarray]:
        """Assign a batch; returns the newly assigned vars or None on conflict."""
        nonlocal trail_len
        if len(vars_arr) == 0:
            return vars_arr
        packed = vars_arr << 1 | vals_arr
        packed = np.unique(packed)
        pv = packed >> 1
        if len(np.unique(pv)) != len(pv):
            return None  # same variable forced both ways
        cur = assign[pv]
        want = (packed & 1).astype(np.int8)
        if ((cur >= 0) & (cur != want)).any():
            return None
        fresh = cur < 0
        newv = pv[fresh]
        assign[newv] = want[fresh]
        trail.append(newv)
        trail_len += len(newv)
        return newv

    def undo(mark: int) -> None:
        nonlocal trail_len
        while trail_len > mark:
            arr = trail.pop()
            trail_len -= len(arr)
            assign[arr] = -1

    def propagate(seed: np.ndarray) -> bool:
        wave = seed
        while len(wave):
            sizes = (inc_ptr[wave + 1] - inc_ptr[wave]).astype(np.int64)
            total = int(sizes.sum())
            if total == 0:
                return True
            starts = inc_ptr[wave]
            pos = np.repeat(starts - np.concatenate(([0], np.cumsum(sizes)[:-1])), sizes)
            pos = pos + np.arange(total)
            es = np.unique(inc_eid[pos])
            i_, j_, k_ = EI[es], EJ[es], EK[es]
            ai, aj, ak = assign[i_], assign[j_], assign[k_]
            if ((ai == 1) & (aj == 1)).any():
                return False
            if ((ak == 0) & ((ai == 1) | (aj == 1))).any():
                return False
            if ((ak == 1) & (ai == 0) & (aj == 0)).any():
                return False
            fv = []
            fx = []
            m = (ak == 1) & (aj == 0) & (ai == -1)
            if m.any():
                fv.append(i_[m]); fx.append(np.ones(int(m.sum()), dtype=np.int64))
            m = (ak == 1) & (ai == 0) & (aj == -1)
            if m.any():
                fv.append(j_[m]); fx.append(np.ones(int(m.sum()), dtype=np.int64))
            m = ((aj == 1) | (ak == 0)) & (ai == -1)
            if m.any():
                fv.append(i_[m]); fx.append(np.zeros(int(m.sum()), dtype=np.int64))
            m = ((ai == 1) | (ak == 0)) & (aj == -1)
            if m.any():
                fv.append(j_[m]); fx.append(np.zeros(int(m.sum()), dtype=np.int64))
            m = ((ai == 1) | (aj == 1)) & (ak == -1)
            if m.any():
                fv.append(k_[m]); fx.append(np.ones(int(m.sum()), dtype=np.int64))
            m = (ai == 0) & (aj == 0) & (ak == -1)
            if m.any():
                fv.append(k_[m]); fx.append(np.zeros(int(m.sum()), dtype=np.int64))
            # equality bindings through an assigned 0 on one slot
            m = (ai == 0) & (aj == -1) & (ak >= 0)
            if m.any():
                fv.append(j_[m]); fx.append(ak[m].astype(np.int64))
            m = (ai == 0) & (ak == -1) & (aj >= 0)
            if m.any():
                fv.append(k_[m]); fx.append(aj[m].astype(np.int64))
            m = (aj == 0) & (ai == -1) & (ak >= 0)
            if m.any():
                fv.append(i_[m]); fx.append(ak[m].astype(np.int64))
            m = (aj == 0) & (ak == -1) & (ai >= 0)
            if m.any():
                fv.append(k_[m]); fx.append(ai[m].astype(np.int64))
            if not fv:
                return True
            new = push(np.concatenate(fv), np.concatenate(fx))
            if new is None:
                return False
            wave = new
        return True

    if var_order is None:
        deg = np.bincount(vs, minlength=n)
        var_order = np.argsort(-deg, kind="stable")
    seed = push(np.array([ea.zero, ea.one], dtype=np.int64), np.array([0, 1], dtype=np.int64))
    if seed is None or not propagate(seed):
        return BivaluationResult("none")

    decisions = 0

    def next_unassigned(p: int) -> int:
        while p < n and assign[var_order[p]] >= 0:
            p += 1
        return p

    pos = next_unassigned(0)
    if pos >= n:
        return _validate_bivaluation(ea, assign, decisions)
    stack: List[List[int]] = [[int(var_order[pos]), 0, trail_len, pos]]
    while stack:
        var, tried, mark, p = stack[-1]
        if tried > 1:
            stack.pop()
            continue
        stack[-1][1] += 1
        decisions += 1
        if decisions > node_budget:
            return BivaluationResult("budget_exceeded", decisions=decisions)
        undo(mark)
        val = 1 - tried  # try 1 first
        new = push(np.array([var], dtype=np.int64), np.array([val], dtype=np.int64))
        if new is None or not propagate(new):
            continue
        q = next_unassigned(p)
        if q >= n:
            return _validate_bivaluation(ea, assign, decisions)
        stack.append([int(var_order[q]), 0, trail_len, q])
    return BivaluationResult("none", decisions=decisions)


def _validate_bivaluation(
    ea: FiniteEffectAlgebra, assign: np.ndarray, decisions: int
) -> BivaluationResult:
    EI, EJ, EK = ea.entry_arrays()
    fi = assign[EI].astype(np.int64)
    fj = assign[EJ].astype(np.int64)
    fk = assign[EK].astype(np.int64)
    ok = (assign[ea.zero] == 0) and (assign[ea.one] == 1)
    ok = ok and not ((fi == 1) & (fj == 1)).any()
    ok = ok and (fk == (fi ^ fj)).all()
    if not ok:
        raise AssertionError("search returned an invalid bivaluation")
    return BivaluationResult("found", assignment=assign.copy(), decisions=decisions)


__all__ = [
    "BivaluationResult",
    "CompatibilityResult",
    "FiniteEffectAlgebra",
    "MalformedTableError",
    "VerificationReport",
    "build_kolmogorov",
    "build_minimal_boolean",
    "check_compatibility",
    "coherence_counterexample",
    "find_bivaluation",
    "is_coherent",
    "is_orthoalgebra",
    "orthocomplement_of",
    "standard_order",
    "verify_effect_axioms",
]
