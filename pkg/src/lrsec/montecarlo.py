"""Monte-Carlo estimation of logical error rates from detector error models."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator

from . import circuits as circ
from . import decoder as dec

__all__ = [
    "SimResult",
    "sample_shots",
    "wilson_interval",
    "count_failures",
    "MemoryExperiment",
    "run_memory_experiment",
    "sweep",
    "SIM_CONFIG",
    "SHARD_SIZE",
]

SHARD_SIZE = 1000
SIM_CONFIG = dec.DecoderConfig(max_iter=1000)
CSV_HEADER = ["code", "schedule_id", "basis", "p", "shots", "failures", "rate", "stderr", "rounds"]


def sample_shots(dem, shots, rng_seed=None, chunk=256):
    """Sample ``(syndromes, observable_flips)`` with one Bernoulli draw per mechanism.

    Returns two uint8 arrays of shapes ``(shots, num_detectors)`` and
    ``(shots, num_observables)``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    HT = sparse.csr_matrix(dem.H.T.astype(np.int32))
    LT = sparse.csr_matrix(dem.L.T.astype(np.int32))
    syn = np.zeros((shots, dem.H.shape[0]), dtype=np.uint8)
    obs = np.zeros((shots, dem.L.shape[0]), dtype=np.uint8)
    for start in range(0, shots, chunk):
        stop = min(shots, start + chunk)
        E = sparse.csr_matrix((rng.random((stop - start, dem.num_mechanisms)) < dem.priors).astype(np.int32))
        syn[start:stop] = (E @ HT).toarray() % 2
        obs[start:stop] = (E @ LT).toarray() % 2
    return syn, obs


def wilson_interval(failures, shots, z=1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if shots == 0:
        return 0.0, 1.0
    ph = failures / shots
    den = 1 + z * z / shots
    centre = (ph + z * z / (2 * shots)) / den
    half = z * math.sqrt(ph * (1 - ph) / shots + z * z / (4 * shots * shots)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def count_failures(dem, syndromes, observables, decoder):
    """``(failures, nonconverged)``; a shot fails if the decoded observable flips differ.

    Identical syndromes are decoded once.  Shots where BP+OSD finds no
    solution count as failures and are also reported separately.
    """
    if syndromes.shape[0] == 0:
        return 0, 0
    uniq, inverse = np.unique(syndromes, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    pred = np.zeros((uniq.shape[0], dem.L.shape[0]), dtype=np.uint8)
    bad = np.zeros(uniq.shape[0], dtype=bool)
    for i, s in enumerate(uniq):
        if not s.any():
            continue
        r = decoder.decode(s)
        if r.status == 2:
            bad[i] = True
        pred[i] = (dem.L @ r.correction) % 2
    fail = (pred[inverse] != observables).any(axis=1) | bad[inverse]
    return int(fail.sum()), int(bad[inverse].sum())


def _run_shard(args):
    dem, shots, seed, cfg = args
    syn, obs = sample_shots(dem, shots, np.random.default_rng(seed))
    d = dec.BpOsdDecoder.from_config(cfg).fit(dem.H, np.clip(dem.priors, 1e-12, 0.5))
    return count_failures(dem, syn, obs, d)


def _default_workers():
    return int(os.environ.get("LRSEC_WORKERS", "1"))


def run_dem(dem, shots, rng_seed=0, cfg=SIM_CONFIG, workers=None):
    """Sample and decode ``shots`` in fixed-size shards with spawned seed streams.

    Results depend only on ``(rng_seed, shots)``, not on ``workers``.
    """
    workers = workers or _default_workers()
    n_shards = max(1, math.ceil(shots / SHARD_SIZE))
    seeds = np.random.SeedSequence(rng_seed).spawn(n_shards)
    sizes = [min(SHARD_SIZE, shots - i * SHARD_SIZE) for i in range(n_shards)]
    jobs = [(dem, s, sd, cfg) for s, sd in zip(sizes, seeds) if s > 0]
    if dem.num_mechanisms == 0 or dem.priors.max(initial=0) == 0:
        return 0, 0
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_shard, jobs))
    else:
        parts = [_run_shard(j) for j in jobs]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


@dataclass
class SimResult:
    """Outcome of a memory experiment in one or both bases.

    ``rate`` is the per-round logical error rate ``(P_X + P_Z) / rounds``
    when both bases ran, else the single-basis failure rate over rounds.
    """

    shots: int
    failures: dict
    nonconverged: dict
    p: float
    rounds: int
    rate: float
    stderr: float
    ci: tuple
    detection_events: float
    dem_density: float

    def basis_rate(self, basis):
        return self.failures[basis] / self.shots


class MemoryExperiment(BaseEstimator):
    """Memory experiment runner with an estimator-style interface.

    Parameters
    ----------
    p : float
        Circuit noise strength.
    shots : int
        Shots per basis.
    rounds : int or None
        Syndrome rounds; ``None`` uses the code distance from ``code.meta``.
    bases : str
        ``"XZ"``, ``"X"`` or ``"Z"``.
    idle_scale : float
        Idle-noise multiplier.
    rng_seed : int
        Seed for shard seed streams.
    workers : int or None
        Process count; defaults to the ``LRSEC_WORKERS`` variable.
    cfg : DecoderConfig
        BP+OSD settings.
    """

    def __init__(self, p=1e-3, shots=10_000, rounds=None, bases="XZ", idle_scale=1.0, rng_seed=0,
                 workers=None, cfg=SIM_CONFIG):
        self.p = p
        self.shots = shots
        self.rounds = rounds
        self.bases = bases
        self.idle_scale = idle_scale
        self.rng_seed = rng_seed
        self.workers = workers
        self.cfg = cfg

    def fit(self, schedule):
        """Run the experiment for ``schedule``; the result is stored in ``result_``."""
        code = schedule.code
        rounds = self.rounds or code.meta.get("distance") or 3
        noise = circ.NoiseBinding(self.p, self.idle_scale)
        failures, bad, events, dens = {}, {}, [], []
        for i, basis in enumerate(self.bases):
            c = circ.build_memory_experiment(schedule, basis, rounds)
            dem = circ.build_dem(c, noise)
            seed = None if self.rng_seed is None else self.rng_seed + 7919 * i
            failures[basis], bad[basis] = run_dem(dem, self.shots, seed, self.cfg, self.workers)
            events.append(float((dem.H @ dem.priors).sum()))
            dens.append(dem.density())
        total = sum(failures.values())
        lo, hi = wilson_interval(total, self.shots * len(self.bases))
        scale = len(self.bases) / rounds
        rate = total / self.shots / rounds
        self.result_ = SimResult(self.shots, failures, bad, self.p, rounds, rate,
                                 (hi - lo) / 2 * scale, (lo * scale, hi * scale),
                                 float(np.mean(events)), float(np.mean(dens)))
        return self


def run_memory_experiment(schedule, p, shots, basis="XZ", rounds=None, rng_seed=0, cfg=SIM_CONFIG,
                          idle_scale=1.0, workers=None):
    """Functional wrapper around :class:`MemoryExperiment`."""
    exp = MemoryExperiment(p, shots, rounds, basis, idle_scale, rng_seed, workers, cfg)
    return exp.fit(schedule).result_


def sweep(schedule, p_list, shots, out_path, rounds=None, rng_seed=0, cfg=SIM_CONFIG, schedule_id=None,
          workers=None, idle_scale=1.0):
    """Write one CSV row per ``(p, basis)``; rows for repeated ``p`` are independent runs."""
    schedule_id = schedule_id or schedule.name
    rows = []
    for j, p in enumerate(p_list):
        for b, basis in enumerate(("X", "Z")):
            r = run_memory_experiment(schedule, p, shots, basis, rounds, rng_seed + 1000 * j + 500 * b, cfg,
                                      idle_scale, workers)
            rows.append([schedule.code.name, schedule_id, basis, p, shots, r.failures[basis],
                         repr(r.rate), repr(r.stderr), r.rounds])
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(rows)
    return rows
