"""LRC design pipeline: residual-distance table, candidate metrics, ranking and reranking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import coloring as col
from . import lrcsched as ls
from . import residual as res
from .exceptions import EstimatorError

__all__ = [
    "ResidualTable",
    "Metrics",
    "RankedCandidate",
    "precompute_residual_distances",
    "compute_metrics",
    "rank",
    "rerank_by_extended_distance",
    "LrcDesigner",
    "design",
    "design_report",
]

UNKNOWN = -1


def _translation_map(code):
    """Map sharing residuals between translated checks, else ``None``.

    Bivariate-bicycle codes are invariant under the group translations and
    fibre-bundle codes under a simultaneous cyclic shift of every fibre.
    Returns ``f(check, support) -> (base check, shifted support)`` that moves
    a residual of ``check`` to the same relative position on the base check
    of its orbit.
    """
    meta = code.meta
    family = meta.get("family")
    if family == "bb":
        l, m = meta["l"], meta["m"]
        half = l * m

        def move(q, g):
            block, idx = divmod(q, half)
            i, j = divmod(idx, m)
            gi, gj = divmod(g, m)
            return block * half + ((i - gi) % l) * m + (j - gj) % m

        def f(check, support):
            return 0, tuple(sorted(move(q, check) for q in support))

        return f
    if family == "fb":
        l = meta["fibre"]

        def f(check, support):
            base, s = divmod(check, l)
            return base * l, tuple(sorted((q // l) * l + (q % l - s) % l for q in support))

        return f
    return None


class ResidualTable:
    """Cache of residual distances keyed by ``(pauli, check, support)``.

    Supports are reduced modulo the check (a support and its complement in
    the check have equal distance).  For bivariate-bicycle codes, entries are
    also shared between translates (bivariate-bicycle and fibre-bundle
    codes).  Lookups that miss are computed on the
    fly and counted in ``misses``.
    """

    def __init__(self, code, estimator=None, distance=None):
        self.code = code
        self.estimator = estimator or res.DistanceEstimator(method="auto", trials=100)
        self.distance = distance if distance is not None else code.meta.get("distance")
        if self.distance is None:
            self.distance = self._estimate_distance()
        self.values = {}
        self.misses = 0
        self.lookups = 0
        self._shift = _translation_map(code)

    def _estimate_distance(self):
        best = None
        for pauli in ("X", "Z"):
            H, L = res.detecting_matrices(self.code, pauli)
            if L.shape[0] == 0:
                continue
            try:
                w = int(self.estimator(H, L)[0])
            except EstimatorError:
                continue
            best = w if best is None else min(best, w)
        return best

    def _key(self, pauli, check, support):
        row = (self.code.hx if pauli == "X" else self.code.hz)[check]
        check_support = tuple(np.flatnonzero(row))
        red = res.canonical_mod_check(support, check_support)
        if self._shift is not None and red:
            check, red = self._shift(check, red)
            row = (self.code.hx if pauli == "X" else self.code.hz)[check]
            red = res.canonical_mod_check(red, tuple(np.flatnonzero(row)))
        if len(red) <= 1:
            return (pauli, "w", len(red))
        return (pauli, check, red)

    def _compute(self, key, pauli, check, support):
        if key[1] == "w":
            if key[2] == 1 and self.distance:
                return int(self.distance)
        try:
            r = res.ResidualError(check, pauli, support)
            seed_offset = len(self.values)
            H, L = res.detecting_matrices(self.code, pauli)
            w, _, _ = self.estimator(H, L, r.vector(self.code.n), seed_offset=seed_offset)
            return 1 + int(w)
        except EstimatorError:
            return UNKNOWN

    def lookup(self, pauli, check, support):
        self.lookups += 1
        key = self._key(pauli, check, support)
        if key not in self.values:
            self.misses += 1
            self.values[key] = self._compute(key, pauli, check, support)
        return self.values[key]

    def __len__(self):
        return len(self.values)


def precompute_residual_distances(code, partition, estimator=None, distance=None):
    """Fill a :class:`ResidualTable` for every LRC-reachable residual of ``partition``."""
    table = ResidualTable(code, estimator, distance)
    for pauli, H in (("X", code.hx), ("Z", code.hz)):
        for i, row in enumerate(H):
            for supp in res.candidate_residuals_for_partition(np.flatnonzero(row), partition.left):
                table.lookup(pauli, i, supp)
    table.misses = table.lookups = 0
    return table


@dataclass(frozen=True)
class Metrics:
    """Ranking metrics of one schedule.

    ``profile[u - 1]`` counts residuals of distance ``u`` (truncated).
    Residuals whose distance is unknown count as distance 0.
    """

    delta_min: int
    tau_a: int
    profile: tuple
    d_ext: int | None = None

    def key(self):
        return (-self.delta_min, self.tau_a, self.profile)


def _profile(values, length):
    w = [0] * length
    for v in values:
        if 1 <= v <= length:
            w[v - 1] += 1
    return tuple(w)


def _trunc_length(table, length):
    if length is not None:
        return length
    return 2 * int(table.distance) if table.distance else 24


def compute_metrics(schedule, table, length=None):
    """Delta_min, ancilla idles and the truncated residual-distance profile."""
    vals = [max(0, table.lookup(r.pauli, r.check, r.support)) for r in res.residual_set_for_schedule(schedule)]
    return Metrics(min(vals) if vals else 0, ls.ancilla_idle_count(schedule),
                   _profile(vals, _trunc_length(table, length)))


@dataclass
class RankedCandidate:
    """One candidate LRC with its metrics; ``index`` is its generation order."""

    index: int
    metrics: Metrics
    colorings: tuple
    code: object = field(repr=False, default=None)
    partition: object = field(repr=False, default=None)
    rank: int = 0
    _schedule: object = field(repr=False, default=None)

    @property
    def schedule(self):
        if self._schedule is None:
            self._schedule = ls.build_lrc(self.code, self.partition, self.colorings, name=f"lrc-{self.index}")
        return self._schedule

    def key(self):
        return self.metrics.key() + (self.index,)


def rank(candidates):
    """Sort by ``(-delta_min, tau_a, profile, index)`` and set ``rank`` from 1."""
    out = sorted(candidates, key=lambda c: c.key())
    for i, c in enumerate(out, start=1):
        c.rank = i
    return out


def rerank_by_extended_distance(ranked, r=5, estimator=None):
    """Stable re-sort of the first ``r`` candidates by descending extended-code distance bound."""
    if r < 1:
        raise ValueError("r must be >= 1")
    estimator = estimator or res.DistanceEstimator()
    head = []
    for c in ranked[:r]:
        try:
            d = res.combined_extended_distance(c.schedule.code, res.residual_set_for_schedule(c.schedule), estimator)
        except EstimatorError:
            d = None
        c.metrics = Metrics(c.metrics.delta_min, c.metrics.tau_a, c.metrics.profile, d)
        head.append(c)
    head = sorted(head, key=lambda c: -(c.metrics.d_ext if c.metrics.d_ext is not None else -1))
    out = head + list(ranked[r:])
    for i, c in enumerate(out, start=1):
        c.rank = i
    return out


def _side_terms(pauli, c_left, c_right, left_idx, right_idx, t1, t, table, length):
    """Per-side metric terms of an LRC: residual distances and idle count."""
    m = c_left.shape[0]
    times = [[] for _ in range(m)]
    l_off, r_off = (1, t1 + 1) if pauli == "X" else (t1 + 3 - t, 1)
    for (i, j), c in zip(c_left.edges, c_left.colors):
        times[i].append((l_off + int(c) + 1, int(left_idx[j])))
    for (i, j), c in zip(c_right.edges, c_right.colors):
        times[i].append((r_off + int(c) + 1, int(right_idx[j])))
    vals, idle = [], 0
    for i, tq in enumerate(times):
        tq.sort()
        idle += ls.check_idle_count([x for x, _ in tq])
        order = [q for _, q in tq]
        for supp in res.residual_set_for_check(order):
            vals.append(max(0, table.lookup(pauli, i, supp)))
    return vals, idle


class LrcDesigner(BaseEstimator):
    """End-to-end LRC design for a CSS code.

    Parameters
    ----------
    partition : {"natural", "search"} or Partition
        ``"natural"`` uses the code's own split when it has one and searches
        otherwise.
    coloring : {"auto", "minimal", "concentrated"}
        ``"auto"`` picks concentrated colourings when the check weights
        spread by 3 or more.
    cap : int
        Maximum number of colour-permutation tuples.
    length : int or None
        Profile truncation; ``None`` means twice the code distance.
    rerank : int
        Number of top candidates re-sorted by extended-code distance (0 = off).
    estimator : DistanceEstimator or None
        Backend for residual distances.
    rng_seed : int
        Seed for colourings, partition search and tuple sampling.
    """

    def __init__(self, partition="natural", coloring="auto", cap=10_000, length=None, rerank=0,
                 estimator=None, rng_seed=0, partition_trials=200):
        self.partition = partition
        self.coloring = coloring
        self.cap = cap
        self.length = length
        self.rerank = rerank
        self.estimator = estimator
        self.rng_seed = rng_seed
        self.partition_trials = partition_trials

    def _partition(self, code):
        if isinstance(self.partition, ls.Partition):
            return self.partition
        if self.partition == "natural" and code.left is not None:
            return ls.Partition.natural(code)
        return ls.partition_search(code, self.partition_trials, self.rng_seed)

    def _colorings(self, code, partition):
        blocks = partition.blocks(code)
        kind = self.coloring
        if kind == "auto":
            w = np.concatenate([code.hx.sum(axis=1), code.hz.sum(axis=1)])
            kind = "concentrated" if w.size and w.max() - w.min() >= 3 else "minimal"
        if kind == "concentrated":
            return tuple(col.concentrated_coloring(b) for b in blocks)
        rng = np.random.default_rng(self.rng_seed)
        return tuple(col.minimal_coloring(b, int(rng.integers(2**31))) for b in blocks)

    def fit(self, code, table=None):
        """Rank candidate LRCs of ``code``; results in ``candidates_`` and ``best_``."""
        self.partition_ = self._partition(code)
        base = self._colorings(code, self.partition_)
        self.table_ = table or precompute_residual_distances(code, self.partition_, self.estimator)
        length = _trunc_length(self.table_, self.length)
        c_lx, c_rx, c_lz, c_rz = base
        t1 = max(c_lx.num_colors, c_rz.num_colors)
        t = t1 + max(c_lz.num_colors, c_rx.num_colors) + 2
        li, ri = self.partition_.left_idx, self.partition_.right_idx
        side_cache = {}
        cands = []
        sizes = [c.num_colors for c in base]
        for idx, perms in enumerate(col.enumerate_permutation_tuples(sizes, self.cap, self.rng_seed)):
            cols = tuple(col.permute_colors(c, p) for c, p in zip(base, perms))
            terms = []
            for pauli, (a, b), (pa, pb) in (("X", (0, 1), (perms[0], perms[1])), ("Z", (2, 3), (perms[2], perms[3]))):
                key = (pauli, pa, pb)
                if key not in side_cache:
                    side_cache[key] = _side_terms(pauli, cols[a], cols[b], li, ri, t1, t, self.table_, length)
                terms.append(side_cache[key])
            vals = terms[0][0] + terms[1][0]
            metrics = Metrics(min(vals) if vals else 0, terms[0][1] + terms[1][1], _profile(vals, length))
            cands.append(RankedCandidate(idx, metrics, cols, code, self.partition_))
        ranked = rank(cands)
        if self.rerank:
            ranked = rerank_by_extended_distance(ranked, self.rerank, self.estimator)
        self.candidates_ = ranked
        self.best_ = ranked[0]
        return self


def design(code, **options):
    """Functional wrapper: ranked candidates from :class:`LrcDesigner`."""
    return LrcDesigner(**options).fit(code).candidates_


def design_report(ranked, limit=None):
    """CSV text ``candidate_id, delta_min, tau_a, W_prefix, d_ext_bound, depth``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["candidate_id", "delta_min", "tau_a", "W_prefix", "d_ext_bound", "depth"])
    for c in ranked[:limit]:
        m = c.metrics
        w.writerow([c.index, m.delta_min, m.tau_a, " ".join(map(str, m.profile)),
                    "" if m.d_ext is None else m.d_ext, c.schedule.depth])
    return buf.getvalue()
