"""BP+OSD decoding over GF(2) and minimum-weight logical searches.

The decoder is a flooding min-sum BP followed by ordered statistics
decoding with a combination sweep (OSD-CS).  Two randomized estimators find
explicit low-weight solutions of

    min |x|  subject to  H (x + y) = 0  and  A (x + y) != 0,

and :func:`exact_min_logical` solves the same problem exactly by a
meet-in-the-middle search for small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels, gf2
from ._validation import check_binary_matrix, check_binary_vector
from .exceptions import DimensionError, EstimatorError, InconsistentSyndrome

__all__ = [
    "DecoderConfig",
    "FULL_CONFIG",
    "PRECOMPUTE_CONFIG",
    "DecodeResult",
    "BpOsdDecoder",
    "bp_min_sum",
    "osd_cs",
    "priors_to_llr",
    "EstimateResult",
    "SimpleEstimator",
    "AdaptiveEstimator",
    "estimate_min_logical_simple",
    "estimate_min_logical_adaptive",
    "exact_min_logical",
    "ExactResult",
]

LLR_CLIP = 25.0


@dataclass(frozen=True)
class DecoderConfig:
    """BP+OSD settings.

    ``ms_scale = 0`` selects the iteration-dependent scaling ``1 - 2**-it``.
    ``osd_max_cols`` limits the initial elimination window (0 = all columns);
    the window doubles until the syndrome is consistent.
    """

    max_iter: int = 10_000
    ms_scale: float = 0.0
    osd_order: int = 7
    osd_max_cols: int = 0
    prior: float = 0.01

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.osd_order < 0:
            raise ValueError("osd_order must be >= 0")
        if not 0.0 < self.prior < 1.0:
            raise ValueError("prior must lie in (0, 1)")


FULL_CONFIG = DecoderConfig()
PRECOMPUTE_CONFIG = DecoderConfig(max_iter=200)


@dataclass
class DecodeResult:
    correction: np.ndarray
    converged: bool
    posterior: np.ndarray
    status: int = 0  # 0 BP converged, 1 OSD, 2 no solution


def priors_to_llr(priors):
    p = np.asarray(priors, dtype=np.float64)
    if ((p <= 0) | (p >= 1)).any():
        raise ValueError("priors must lie strictly between 0 and 1")
    return np.clip(np.log((1 - p) / p), -LLR_CLIP, LLR_CLIP)


def _graph(h):
    return _kernels.dense_to_graph(np.ascontiguousarray(h, dtype=np.uint8))


def bp_min_sum(h, syndrome, priors=0.01, max_iter=100, ms_scale=0.0):
    """Min-sum BP alone; ``converged`` is True iff the hard decision matches ``syndrome``."""
    h = check_binary_matrix(h, "H")
    s = check_binary_vector(syndrome, h.shape[0], "syndrome")
    llr = priors_to_llr(np.broadcast_to(priors, (h.shape[1],)))
    cp, ev, vp, ve, _, _ = _graph(h)
    post = np.empty(h.shape[1])
    hard = np.zeros(h.shape[1], dtype=np.uint8)
    ok, _ = _kernels.bp_min_sum(cp, ev, vp, ve, s, llr, max_iter, float(ms_scale), post, hard)
    return DecodeResult(hard, bool(ok), post, 0 if ok else 2)


def osd_cs(h, syndrome, reliabilities, order=7, priors=None):
    """OSD with combination sweep.

    Columns are ranked by ``reliabilities`` (smaller = more likely flipped).
    The result has soft weight (sum of channel LLRs, Hamming weight for
    uniform priors) no larger than the order-0 solution.

    Raises
    ------
    InconsistentSyndrome
        If the syndrome is outside the column space of ``h``.
    """
    h = check_binary_matrix(h, "H")
    m, n = h.shape
    s = check_binary_vector(syndrome, m, "syndrome")
    rel = np.asarray(reliabilities, dtype=np.float64)
    if rel.shape != (n,):
        raise DimensionError("need one reliability per column")
    llr = priors_to_llr(np.broadcast_to(0.01 if priors is None else priors, (n,)))
    _, _, _, _, col_ptr, col_rows = _graph(h)
    out = np.zeros(n, dtype=np.uint8)
    if not _kernels.osd_cs(col_ptr, col_rows, m, n, s, rel, llr, int(order), 0, out):
        raise InconsistentSyndrome("syndrome is not in the column space of H")
    return out


class BpOsdDecoder(BaseEstimator):
    """BP+OSD decoder with an estimator-style interface.

    Parameters
    ----------
    max_iter : int
        BP iteration budget.
    ms_scale : float
        Min-sum scaling; 0 means ``1 - 2**-it``.
    osd_order : int
        Size of the pair sweep in OSD-CS.
    osd_max_cols : int
        Initial OSD elimination window, 0 for all columns.
    prior : float
        Default per-column error probability when ``fit`` gets none.

    Examples
    --------
    >>> import numpy as np
    >>> dec = BpOsdDecoder(max_iter=50).fit(np.array([[1, 1, 0], [0, 1, 1]]))
    >>> dec.decode(np.array([1, 0])).correction.tolist()
    [1, 0, 0]
    """

    def __init__(self, max_iter=10_000, ms_scale=0.0, osd_order=7, osd_max_cols=0, prior=0.01):
        self.max_iter = max_iter
        self.ms_scale = ms_scale
        self.osd_order = osd_order
        self.osd_max_cols = osd_max_cols
        self.prior = prior

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.max_iter, cfg.ms_scale, cfg.osd_order, cfg.osd_max_cols, cfg.prior)

    def fit(self, H, priors=None):
        """Store the check matrix and channel priors."""
        H = check_binary_matrix(H, "H")
        self.n_checks_, self.n_bits_ = H.shape
        self.graph_ = _graph(H)
        p = self.prior if priors is None else priors
        self.llr_ = priors_to_llr(np.broadcast_to(p, (self.n_bits_,))).copy()
        return self

    def _check_fitted(self):
        if not hasattr(self, "graph_"):
            raise RuntimeError("call fit() before decoding")

    def decode(self, syndrome, llr=None):
        self._check_fitted()
        s = check_binary_vector(syndrome, self.n_checks_, "syndrome")
        cp, ev, vp, ve, col_ptr, col_rows = self.graph_
        out = np.zeros(self.n_bits_, dtype=np.uint8)
        post = np.empty(self.n_bits_)
        status = _kernels.bposd(cp, ev, vp, ve, col_ptr, col_rows, s,
                                self.llr_ if llr is None else llr,
                                int(self.max_iter), float(self.ms_scale), int(self.osd_order),
                                int(self.osd_max_cols), out, post)
        return DecodeResult(out, status == 0, post, int(status))

    def predict(self, syndromes):
        """Decode each row of ``syndromes``; per-shot status codes go to ``status_``."""
        self._check_fitted()
        S = check_binary_matrix(np.atleast_2d(syndromes), "syndromes")
        out = np.zeros((S.shape[0], self.n_bits_), dtype=np.uint8)
        self.status_ = np.zeros(S.shape[0], dtype=np.int8)
        for i, s in enumerate(S):
            r = self.decode(s)
            out[i] = r.correction
            self.status_[i] = r.status
        return out


# ---------------------------------------------------------------------------
# minimum-weight logical estimators


@dataclass
class EstimateResult:
    """Best solution found: ``weight = |x|`` and the witness ``x`` itself."""

    weight: float
    witness: np.ndarray | None
    decode_calls: int
    history: list

    @property
    def found(self):
        return self.witness is not None


def _prepare(H, A, y):
    H = check_binary_matrix(H, "H")
    A = check_binary_matrix(A, "A")
    n = H.shape[1]
    if A.shape[1] != n:
        raise DimensionError("H and A must have the same column count")
    y = np.zeros(n, dtype=np.uint8) if y is None else check_binary_vector(y, n, "y")
    if A.shape[0] == 0 or not A.any():
        raise EstimatorError("A has no nonzero rows, so no logical exists")
    return H, A, y


class _RowSampler:
    """Draws ``g = h + l`` with ``h`` in rowspace(H) and ``l`` in rowspace(A) but not in rowspace(H)."""

    def __init__(self, H, A):
        self.H, self.A = H, A
        if H.shape[0]:
            reduced, piv, _ = gf2.rref(H)
            self.R, self.piv = reduced[: piv.shape[0]], piv
        else:
            self.R, self.piv = np.zeros((0, H.shape[1]), dtype=np.uint8), np.zeros(0, dtype=np.int64)
        if not any(self._outside(a) for a in A):
            raise EstimatorError("every row of A lies in the row space of H")

    def _outside(self, v):
        return bool((v ^ gf2.matmul(v[self.piv], self.R)).any()) if self.piv.size else bool(v.any())

    def __call__(self, rng):
        while True:
            l = gf2.random_row_sample(self.A, rng)
            if self._outside(l):
                return gf2.random_row_sample(self.H, rng) ^ l


def is_valid_witness(H, A, y, x):
    """``H (x + y) = 0`` and ``A (x + y) != 0``."""
    v = np.asarray(x, dtype=np.uint8) ^ y
    return not gf2.matmul(H, v).any() and bool(gf2.matmul(A, v).any())


def _decode_extension(H, g, y, llr, cfg):
    hp = np.vstack([H, g[None, :]])
    sigma = np.zeros(hp.shape[0], dtype=np.uint8)
    sigma[-1] = 1
    target = sigma ^ gf2.matmul(hp, y)
    cp, ev, vp, ve, col_ptr, col_rows = _graph(hp)
    out = np.zeros(hp.shape[1], dtype=np.uint8)
    post = np.empty(hp.shape[1])
    status = _kernels.bposd(cp, ev, vp, ve, col_ptr, col_rows, target, llr, cfg.max_iter,
                            cfg.ms_scale, cfg.osd_order, cfg.osd_max_cols, out, post)
    return (out if status != 2 else None), hp, target


class SimpleEstimator(BaseEstimator):
    """Random-extension estimator: stop after ``trials`` consecutive non-improving decodes.

    Each trial samples ``g = h + l`` with ``h`` from rowspace(H) and nonzero
    ``l`` from rowspace(A), appends ``g`` to ``H`` and decodes the syndrome
    ``(0, ..., 0, 1)``.  Any solution satisfies ``A (x + y) != 0``.
    """

    def __init__(self, trials=100, max_iter=200, ms_scale=0.0, osd_order=7, prior=0.01,
                 max_decodes=None, target=None, random_state=None):
        self.trials = trials
        self.target = target
        self.max_iter = max_iter
        self.ms_scale = ms_scale
        self.osd_order = osd_order
        self.prior = prior
        self.max_decodes = max_decodes
        self.random_state = random_state

    def _cfg(self):
        return DecoderConfig(max_iter=self.max_iter, ms_scale=self.ms_scale,
                             osd_order=self.osd_order, prior=self.prior)

    def estimate(self, H, A, y=None):
        H, A, y = _prepare(H, A, y)
        sampler = _RowSampler(H, A)
        cfg = self._cfg()
        rng = np.random.default_rng(self.random_state)
        llr = priors_to_llr(np.full(H.shape[1], cfg.prior))
        best, witness, calls, t, history = math.inf, None, 0, 0, []
        while t < self.trials and (self.max_decodes is None or calls < self.max_decodes):
            g = sampler(rng)
            x, _, _ = _decode_extension(H, g, y, llr, cfg)
            calls += 1
            t += 1
            if x is not None and is_valid_witness(H, A, y, x) and x.sum() < best:
                best, witness, t = int(x.sum()), x, 0
            history.append(best)
            if self.target is not None and best <= self.target:
                break
        if witness is None:
            raise EstimatorError("no trial produced a valid solution")
        return EstimateResult(best, witness, calls, history)


class AdaptiveEstimator(BaseEstimator):
    """Random-extension estimator with perturbed decoder priors.

    For each of ``t_row`` random rows ``g``, the decoder is run
    ``t_prior`` times; each run boosts the prior to ``boost_prior`` on a
    random subset of ``supp(g)`` (each element kept with probability
    ``subset_prob``) and uses ``base_prior`` elsewhere.  The search ends
    early once the bound reaches ``target``.
    """

    def __init__(self, t_row=50, t_prior=10, base_prior=0.01, boost_prior=0.30, subset_prob=0.5,
                 max_iter=200, ms_scale=0.0, osd_order=7, target=None, random_state=None):
        self.target = target
        self.t_row = t_row
        self.t_prior = t_prior
        self.base_prior = base_prior
        self.boost_prior = boost_prior
        self.subset_prob = subset_prob
        self.max_iter = max_iter
        self.ms_scale = ms_scale
        self.osd_order = osd_order
        self.random_state = random_state

    def estimate(self, H, A, y=None):
        H, A, y = _prepare(H, A, y)
        sampler = _RowSampler(H, A)
        cfg = DecoderConfig(max_iter=self.max_iter, ms_scale=self.ms_scale,
                            osd_order=self.osd_order, prior=self.base_prior)
        rng = np.random.default_rng(self.random_state)
        n = H.shape[1]
        base = priors_to_llr(np.full(n, self.base_prior))
        boost = priors_to_llr(np.array([self.boost_prior]))[0]
        best, witness, calls, history = math.inf, None, 0, []
        for _ in range(self.t_row):
            g = sampler(rng)
            supp = np.flatnonzero(g)
            for _ in range(self.t_prior):
                llr = base.copy()
                llr[supp[rng.random(supp.size) < self.subset_prob]] = boost
                x, _, _ = _decode_extension(H, g, y, llr, cfg)
                calls += 1
                if x is not None and is_valid_witness(H, A, y, x) and x.sum() < best:
                    best, witness = int(x.sum()), x
                history.append(best)
                if self.target is not None and best <= self.target:
                    break
            if self.target is not None and best <= self.target:
                break
        if witness is None:
            raise EstimatorError("no trial produced a valid solution")
        return EstimateResult(best, witness, calls, history)


def estimate_min_logical_simple(H, A, y=None, trials=100, cfg=PRECOMPUTE_CONFIG, rng_seed=None):
    est = SimpleEstimator(trials=trials, max_iter=cfg.max_iter, ms_scale=cfg.ms_scale,
                          osd_order=cfg.osd_order, prior=cfg.prior, random_state=rng_seed)
    return est.estimate(H, A, y)


def estimate_min_logical_adaptive(H, A, y=None, t_row=50, t_prior=10, cfg=PRECOMPUTE_CONFIG,
                                  rng_seed=None, **kwargs):
    est = AdaptiveEstimator(t_row=t_row, t_prior=t_prior, max_iter=cfg.max_iter,
                            ms_scale=cfg.ms_scale, osd_order=cfg.osd_order,
                            random_state=rng_seed, **kwargs)
    return est.estimate(H, A, y)


# ---------------------------------------------------------------------------
# exact search


@dataclass
class ExactResult:
    """Exact minimum (``None`` when above ``w_max``) and the number of distinct minimizers."""

    weight: int | None
    count: int
    witness: np.ndarray | None
    w_max: int

    def __str__(self):
        return f"exact {self.weight}" if self.weight is not None else f">{self.w_max}"


def _column_keys(H, A):
    """Each column as one int: syndrome bits low, logical bits above them."""
    m = H.shape[0]
    stacked = np.vstack([H, A])
    keys = []
    for col in stacked.T:
        v = 0
        for i in np.flatnonzero(col):
            v |= 1 << int(i)
        keys.append(v)
    return keys, (1 << m) - 1, m


def exact_min_logical(H, A, y=None, w_max=6, count=True):
    """Exact ``min |x|`` with ``H (x + y) = 0`` and ``A (x + y) != 0`` by meet in the middle.

    For each weight ``w`` the solutions are split into ``ceil(w/2)`` and
    ``floor(w/2)`` column subsets matched on the syndrome.  At the minimum
    weight two overlapping halves cannot both match (their symmetric
    difference would be a lighter solution), so every minimizer is seen
    exactly ``C(w, ceil(w/2))`` times.
    """
    H, A, y = _prepare(H, A, y)
    keys, smask, m = _column_keys(H, A)
    n = len(keys)
    target = 0
    for j in np.flatnonzero(y):
        target ^= keys[j]
    s0, a0 = target & smask, target >> m
    if s0 == 0 and a0 != 0:
        return ExactResult(0, 1, np.zeros(n, dtype=np.uint8), w_max)

    def combos(size):
        for c in itertools.combinations(range(n), size):
            v = 0
            for j in c:
                v ^= keys[j]
            yield c, v

    tables = {}
    for w in range(1, w_max + 1):
        a, b = (w + 1) // 2, w // 2
        if b not in tables:
            tab = {}
            for c, v in combos(b):
                tab.setdefault(v & smask, {}).setdefault(v >> m, []).append(c)
            tables[b] = tab
        tab = tables[b]
        found, total, witness = False, 0, None
        for c, v in combos(a):
            bucket = tab.get((v & smask) ^ s0)
            if not bucket:
                continue
            va = v >> m
            for lv, members in bucket.items():
                if lv ^ va != a0:
                    disjoint = [d for d in members if not set(d) & set(c)]
                    if disjoint:
                        found = True
                        total += len(disjoint)
                        if witness is None:
                            witness = np.zeros(n, dtype=np.uint8)
                            witness[list(c) + list(disjoint[0])] = 1
                        if not count:
                            break
            if found and not count:
                break
        if found:
            mult = math.comb(w, a)
            return ExactResult(w, total // mult if count else 1, witness, w_max)
    return ExactResult(None, 0, None, w_max)
