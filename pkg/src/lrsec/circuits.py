"""Memory-experiment circuits, circuit-level noise and detector error models.

Circuits contain resets (``R``, ``RX``), ``CX`` gates and measurements
(``M``, ``MX``) arranged in time steps.  Noise is attached separately by a
:class:`NoiseBinding`; :func:`noisy_instructions` expands both into a flat
instruction list that the text exporter, the frame simulator and the DEM
builder all consume.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import decoder as dec
from ._validation import check_probability
from .exceptions import BasisError, ParseError

__all__ = [
    "Circuit",
    "NoiseBinding",
    "DetectorErrorModel",
    "build_memory_experiment",
    "noisy_instructions",
    "export_circuit_text",
    "parse_circuit_text",
    "build_dem",
    "dem_text",
    "check_deterministic",
    "FrameSimulator",
    "exact_circuit_distance",
    "estimate_circuit_distance",
]

_RESETS = {"R": "Z", "RX": "X"}
_MEASURES = {"M": "Z", "MX": "X"}


@dataclass(eq=False)
class Circuit:
    """Noise-free circuit: steps of operations plus detector/observable record sets.

    ``steps[t]`` is a list of ``(name, targets)`` with ``name`` in
    ``R, RX, CX, M, MX``.  ``detectors`` and ``observables`` hold absolute
    measurement-record indices.  Idle locations are derived: a qubit is
    active from its reset until its measurement and idles in any step where
    it is active but untouched.
    """

    num_qubits: int
    steps: list
    detectors: list
    observables: list
    meta: dict = field(default_factory=dict)

    def records(self):
        """``(step, qubit, basis)`` per measurement record, in record order."""
        out = []
        for t, ops in enumerate(self.steps):
            for name, targets in ops:
                if name in _MEASURES:
                    out.extend((t, q, _MEASURES[name]) for q in targets)
        return out

    @property
    def num_measurements(self):
        return len(self.records())

    def idle_qubits(self):
        """Per step, the sorted list of active qubits without an operation."""
        active = set()
        out = []
        for ops in self.steps:
            touched = set()
            resets, measured = set(), set()
            for name, targets in ops:
                touched.update(targets)
                if name in _RESETS:
                    resets.update(targets)
                if name in _MEASURES:
                    measured.update(targets)
            out.append(sorted(active - touched))
            active |= resets
            active -= measured
        return out

    def __eq__(self, other):
        return (isinstance(other, Circuit) and self.num_qubits == other.num_qubits
                and [sorted(s) for s in self.steps] == [sorted(s) for s in other.steps]
                and [tuple(sorted(d)) for d in self.detectors] == [tuple(sorted(d)) for d in other.detectors]
                and [tuple(sorted(o)) for o in self.observables] == [tuple(sorted(o)) for o in other.observables])


@dataclass(frozen=True)
class NoiseBinding:
    """Circuit-level noise with strength ``p``.

    Idles get single-qubit depolarizing noise of strength ``p * idle_scale``,
    CNOTs two-qubit depolarizing noise ``p``, resets a flip with probability
    ``p`` after them and measurements a flip with probability ``p`` before.
    """

    p: float
    idle_scale: float = 1.0

    def __post_init__(self):
        check_probability(self.p, "p", 0.0, 0.5)
        if self.idle_scale < 0:
            raise ValueError("idle_scale must be non-negative")

    @property
    def p_idle(self):
        return self.p * self.idle_scale


# ---------------------------------------------------------------------------
# memory experiment


def build_memory_experiment(schedule, basis="Z", rounds=None, compact=True):
    """Memory experiment: data reset in ``basis``, ``rounds`` scheduled rounds, transversal readout.

    Detectors: in round 0 only the checks of the basis type (deterministic
    after the data reset); from round 1 on, every check compared with its
    previous round; finally each basis-type check compared with the parity of
    the final data readout on its support.  Observables are the logical
    operators of the basis type read from the final data measurement.
    """
    code = schedule.code
    if basis not in ("X", "Z"):
        raise ValueError("basis must be 'X' or 'Z'")
    if code.k == 0:
        raise BasisError("code has no logical qubits")
    if rounds is None:
        rounds = code.meta.get("distance") or 3
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    sched = schedule.compacted() if compact else schedule
    events = []
    for r in range(rounds):
        for t, kind, qs in sched.round_events(r):
            events.append((t, kind, qs, r))
    t0 = min(e[0] for e in events) if events else 1
    last = max(e[0] for e in events) if events else 0
    n_steps = last - t0 + 3
    steps = [[] for _ in range(n_steps)]
    data = list(range(code.n))
    steps[0].append(("RX" if basis == "X" else "R", tuple(data)))
    ancilla_of = {}
    for pauli in ("X", "Z"):
        for i in range(len(sched.cnots(pauli))):
            ancilla_of[sched.ancilla(pauli, i)] = (pauli, i)
    grouped = defaultdict(lambda: defaultdict(list))
    meas_events = []
    for t, kind, qs, r in events:
        step = t - t0 + 1
        grouped[step][kind].extend(qs)
        if kind in _MEASURES:
            meas_events.append((step, qs[0], r))
    for step, kinds in grouped.items():
        for kind in ("R", "RX", "CX", "M", "MX"):
            if kinds.get(kind):
                steps[step].append((kind, tuple(kinds[kind])))
    final = n_steps - 1
    steps[final].append(("MX" if basis == "X" else "M", tuple(data)))
    for s in steps:
        s.sort(key=lambda op: ("R", "RX", "CX", "M", "MX").index(op[0]))
    circ = Circuit(code.n + code.hx.shape[0] + code.hz.shape[0], steps, [], [],
                   {"basis": basis, "rounds": rounds, "code": code.name, "schedule": schedule.name})
    # record indices in record order
    rec_of = {}
    data_rec = {}
    for idx, (t, q, _) in enumerate(circ.records()):
        if t == final and q < code.n:
            data_rec[q] = idx
        else:
            rec_of[(q, t)] = idx
    check_rec = defaultdict(dict)
    for step, q, r in meas_events:
        pauli, i = ancilla_of[q]
        check_rec[(pauli, i)][r] = rec_of[(q, step)]
    dets = []
    for r in range(rounds):
        for pauli in ("X", "Z"):
            for i in range(len(sched.cnots(pauli))):
                if r == 0:
                    if pauli == basis:
                        dets.append((check_rec[(pauli, i)][0],))
                else:
                    dets.append((check_rec[(pauli, i)][r - 1], check_rec[(pauli, i)][r]))
    H = code.checks(basis)
    for i, row in enumerate(H):
        dets.append(tuple(data_rec[q] for q in np.flatnonzero(row)) + (check_rec[(basis, i)][rounds - 1],))
    obs = [tuple(data_rec[q] for q in np.flatnonzero(row)) for row in code.logicals(basis)]
    # detectors are numbered in the order their last record appears
    circ.detectors = sorted(dets, key=max)
    circ.observables = obs
    return circ


# ---------------------------------------------------------------------------
# noisy instruction stream


def noisy_instructions(circuit, noise=None):
    """Flat instruction list ``(name, arg, targets)`` with noise interleaved and TICKs between steps.

    Within a step: resets and their flips, CNOTs and their two-qubit noise,
    idle noise, measurement flips and measurements, then the detectors and
    observables whose last record was just produced.
    """
    noise = noise or NoiseBinding(0.0)
    idles = circuit.idle_qubits()
    det_last = defaultdict(list)
    for d, recs in enumerate(circuit.detectors):
        det_last[max(recs)].append(("DETECTOR", d))
    for o, recs in enumerate(circuit.observables):
        det_last[max(recs)].append(("OBSERVABLE_INCLUDE", o))
    out = []
    rec = 0
    for t, ops in enumerate(circuit.steps):
        if t:
            out.append(("TICK", None, ()))
        for name, targets in ops:
            if name in _RESETS:
                out.append((name, None, targets))
                if noise.p > 0:
                    out.append(("X_ERROR" if name == "R" else "Z_ERROR", noise.p, targets))
        for name, targets in ops:
            if name == "CX":
                out.append((name, None, targets))
                if noise.p > 0:
                    out.append(("DEPOLARIZE2", noise.p, targets))
        if noise.p_idle > 0 and idles[t]:
            out.append(("DEPOLARIZE1", noise.p_idle, tuple(idles[t])))
        for name, targets in ops:
            if name in _MEASURES:
                if noise.p > 0:
                    out.append(("X_ERROR" if name == "M" else "Z_ERROR", noise.p, targets))
                out.append((name, None, targets))
                new = rec + len(targets)
                for r in range(rec, new):
                    for kind, idx in det_last.get(r, ()):
                        recs = circuit.detectors[idx] if kind == "DETECTOR" else circuit.observables[idx]
                        out.append((kind, idx, tuple(sorted(recs))))
                rec = new
    return out


def _fmt_p(p):
    return repr(float(p))


def export_circuit_text(circuit, noise=None):
    """Stim-subset text; ``rec[-k]`` lookbacks, one instruction per line."""
    lines = []
    rec = 0
    for name, arg, targets in noisy_instructions(circuit, noise):
        if name == "TICK":
            lines.append("TICK")
        elif name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            refs = " ".join(f"rec[{r - rec}]" for r in targets)
            head = "DETECTOR" if name == "DETECTOR" else f"OBSERVABLE_INCLUDE({arg})"
            lines.append(f"{head} {refs}")
        elif arg is None:
            lines.append(f"{name} " + " ".join(map(str, targets)))
            if name in _MEASURES:
                rec += len(targets)
        else:
            lines.append(f"{name}({_fmt_p(arg)}) " + " ".join(map(str, targets)))
    return "\n".join(lines) + "\n"


_LINE = re.compile(r"^([A-Z_0-9]+)(?:\(([^)]*)\))?((?:\s+\S+)*)\s*$")


def parse_circuit_text(text):
    """Inverse of :func:`export_circuit_text`; returns ``(circuit, noise)``.

    Raises
    ------
    ParseError
        On unknown instructions or malformed targets (with line/column).
    """
    steps = [[]]
    dets, obs = {}, {}
    rec = 0
    maxq = -1
    p_vals, idle_vals = set(), set()
    det_count = 0
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ParseError(f"cannot parse {line!r}", line=ln, column=1)
        name, arg, rest = m.group(1), m.group(2), m.group(3).split()
        if name == "TICK":
            steps.append([])
            continue
        if name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            refs = []
            for tok in rest:
                mm = re.fullmatch(r"rec\[-(\d+)\]", tok)
                if not mm or int(mm.group(1)) > rec or int(mm.group(1)) == 0:
                    raise ParseError(f"bad record reference {tok!r}", line=ln, column=raw.find(tok) + 1)
                refs.append(rec - int(mm.group(1)))
            if name == "DETECTOR":
                dets[det_count] = tuple(sorted(refs))
                det_count += 1
            else:
                obs.setdefault(int(arg), []).extend(refs)
            continue
        targets = []
        for tok in rest:
            if not tok.isdigit():
                raise ParseError(f"bad qubit target {tok!r}", line=ln, column=raw.find(tok) + 1)
            targets.append(int(tok))
        if targets:
            maxq = max(maxq, max(targets))
        if name in ("X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2"):
            try:
                val = float(arg)
            except (TypeError, ValueError):
                raise ParseError(f"bad probability {arg!r}", line=ln, column=raw.find("(") + 2) from None
            if not 0.0 <= val <= 0.5:
                raise ParseError(f"probability {val} outside [0, 0.5]", line=ln, column=raw.find("(") + 2)
            (idle_vals if name == "DEPOLARIZE1" else p_vals).add(val)
            continue
        if name not in ("R", "RX", "CX", "M", "MX"):
            raise ParseError(f"unknown instruction {name}", line=ln, column=1)
        if name == "CX" and len(targets) % 2:
            raise ParseError("CX needs an even number of targets", line=ln)
        steps[-1].append((name, tuple(targets)))
        if name in _MEASURES:
            rec += len(targets)
    if len(p_vals) > 1 or len(idle_vals) > 1:
        raise ParseError("mixed noise strengths are outside the supported grammar")
    p = p_vals.pop() if p_vals else 0.0
    idle = idle_vals.pop() if idle_vals else 0.0
    noise = NoiseBinding(p, (idle / p) if p else 1.0)
    circ = Circuit(maxq + 1, steps, [dets[i] for i in range(det_count)],
                   [tuple(sorted(obs[i])) for i in sorted(obs)])
    return circ, noise


# ---------------------------------------------------------------------------
# detector error model


def _indep_prob(p, k):
    """Per-component probability of ``k`` independent Pauli flips equal to a uniform depolarizing channel.

    ``k = 3`` for single-qubit and ``k = 15`` for two-qubit depolarizing noise.
    """
    if p == 0:
        return 0.0
    size = k + 1
    return 0.5 - 0.5 * (1 - size * p / k) ** (1.0 / (size // 2))


@dataclass(eq=False)
class DetectorErrorModel:
    """Mechanism columns over detectors and observables with priors.

    ``provenance[j]`` names one elementary fault contributing to column
    ``j`` as ``(instruction_index, name, targets, pauli)``.
    """

    H: np.ndarray
    L: np.ndarray
    priors: np.ndarray
    provenance: list

    @property
    def num_detectors(self):
        return self.H.shape[0]

    @property
    def num_mechanisms(self):
        return self.H.shape[1]

    def density(self):
        return float(self.H.mean()) if self.H.size else 0.0


def _xor_prob(a, b):
    return a * (1 - b) + b * (1 - a)


def build_dem(circuit, noise):
    """Detector error model by backward sensitivity propagation.

    Walking the instruction stream backwards, ``sx[q]`` (``sz[q]``) is the
    set of detectors and observables, as an int bitmask, flipped by an X (Z)
    error on ``q`` at the current point.  Each elementary fault is recorded
    with the XOR of its components' sensitivities; faults with equal
    signatures are merged with ``p1 (1 - p2) + p2 (1 - p1)``.
    Depolarizing channels are expressed as independent Pauli components whose
    combination reproduces the uniform channel exactly.
    """
    nd, no = len(circuit.detectors), len(circuit.observables)
    nrec = circuit.num_measurements
    rec_mask = [0] * nrec
    for d, recs in enumerate(circuit.detectors):
        for r in recs:
            rec_mask[r] ^= 1 << d
    for o, recs in enumerate(circuit.observables):
        for r in recs:
            rec_mask[r] ^= 1 << (nd + o)
    instrs = noisy_instructions(circuit, noise)
    sx = defaultdict(int)
    sz = defaultdict(int)
    rec = nrec
    mech = {}

    def add(sig, p, prov):
        if sig == 0 or p == 0:
            return
        if sig in mech:
            q, pv = mech[sig]
            mech[sig] = (_xor_prob(q, p), pv)
        else:
            mech[sig] = (p, prov)

    for idx in range(len(instrs) - 1, -1, -1):
        name, arg, targets = instrs[idx]
        if name in _MEASURES:
            rec -= len(targets)
            for k, q in enumerate(targets):
                if name == "M":
                    sx[q] ^= rec_mask[rec + k]
                else:
                    sz[q] ^= rec_mask[rec + k]
        elif name in _RESETS:
            for q in targets:
                sx[q] = 0
                sz[q] = 0
        elif name == "CX":
            for c, t in zip(targets[::2], targets[1::2]):
                sx[c] ^= sx[t]
                sz[t] ^= sz[c]
        elif name == "X_ERROR":
            for q in targets:
                add(sx[q], arg, (idx, name, (q,), "X"))
        elif name == "Z_ERROR":
            for q in targets:
                add(sz[q], arg, (idx, name, (q,), "Z"))
        elif name == "DEPOLARIZE1":
            pi = _indep_prob(arg, 3)
            for q in targets:
                for pauli, sig in (("X", sx[q]), ("Y", sx[q] ^ sz[q]), ("Z", sz[q])):
                    add(sig, pi, (idx, name, (q,), pauli))
        elif name == "DEPOLARIZE2":
            pi = _indep_prob(arg, 15)
            for c, t in zip(targets[::2], targets[1::2]):
                single = {"I": (0, 0), "X": (sx[c], sx[t]), "Z": (sz[c], sz[t])}
                single["Y"] = (single["X"][0] ^ single["Z"][0], single["X"][1] ^ single["Z"][1])
                for a in "IXYZ":
                    for b in "IXYZ":
                        if a == b == "I":
                            continue
                        add(single[a][0] ^ single[b][1], pi, (idx, name, (c, t), a + b))
    sigs = sorted(mech, key=lambda s: mech[s][1][0])
    H = np.zeros((nd, len(sigs)), dtype=np.uint8)
    L = np.zeros((no, len(sigs)), dtype=np.uint8)
    for j, s in enumerate(sigs):
        bits = [i for i in range(nd + no) if s >> i & 1]
        for i in bits:
            if i < nd:
                H[i, j] = 1
            else:
                L[i - nd, j] = 1
    priors = np.array([mech[s][0] for s in sigs], dtype=np.float64)
    return DetectorErrorModel(H, L, priors, [mech[s][1] for s in sigs])


def dem_text(dem):
    """Lines ``error(p) D<i>... L<j>...``."""
    lines = []
    for j in range(dem.num_mechanisms):
        parts = [f"D{i}" for i in np.flatnonzero(dem.H[:, j])]
        parts += [f"L{i}" for i in np.flatnonzero(dem.L[:, j])]
        lines.append(f"error({float(dem.priors[j])!r}) " + " ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def check_deterministic(circuit):
    """True when every detector and observable is deterministic without noise.

    Each detector's measured Pauli product is propagated backwards; it must
    commute with every measurement it does not include and must reduce to
    the reset basis at every reset, ending as the identity.
    """
    nrec = circuit.num_measurements
    instrs = noisy_instructions(circuit)
    groups = list(circuit.detectors) + list(circuit.observables)
    for recs in groups:
        recs = set(recs)
        x, z = defaultdict(int), defaultdict(int)
        rec = nrec
        for name, _, targets in reversed(instrs):
            if name in _MEASURES:
                rec -= len(targets)
                for k, q in enumerate(targets):
                    inc = (rec + k) in recs
                    if name == "M":
                        if x[q]:
                            return False
                        z[q] ^= inc
                    else:
                        if z[q]:
                            return False
                        x[q] ^= inc
            elif name in _RESETS:
                for q in targets:
                    if (name == "R" and x[q]) or (name == "RX" and z[q]):
                        return False
                    x[q] = z[q] = 0
            elif name == "CX":
                for c, t in zip(targets[::2], targets[1::2]):
                    x[t] ^= x[c]
                    z[c] ^= z[t]
        if any(x.values()) or any(z.values()):
            return False
    return True


class FrameSimulator:
    """Forward Pauli-frame sampler that draws faults directly from the noisy circuit.

    Depolarizing channels pick one non-identity Pauli uniformly; this is an
    independent route to the detector statistics used to cross-check
    :func:`build_dem`.
    """

    def __init__(self, circuit, noise):
        self.circuit = circuit
        self.noise = noise
        self.instrs = noisy_instructions(circuit, noise)

    def sample(self, shots, rng_seed=None):
        """Return ``(detectors, observables)`` as bool arrays of shape ``(shots, .)``."""
        rng = np.random.default_rng(rng_seed)
        nq = self.circuit.num_qubits
        fx = np.zeros((nq, shots), dtype=bool)
        fz = np.zeros((nq, shots), dtype=bool)
        records = []
        for name, arg, targets in self.instrs:
            if name in _RESETS:
                for q in targets:
                    fx[q] = False
                    fz[q] = False
            elif name == "CX":
                for c, t in zip(targets[::2], targets[1::2]):
                    fx[t] ^= fx[c]
                    fz[c] ^= fz[t]
            elif name in _MEASURES:
                for q in targets:
                    records.append((fx[q] if name == "M" else fz[q]).copy())
            elif name == "X_ERROR":
                for q in targets:
                    fx[q] ^= rng.random(shots) < arg
            elif name == "Z_ERROR":
                for q in targets:
                    fz[q] ^= rng.random(shots) < arg
            elif name == "DEPOLARIZE1":
                for q in targets:
                    hit = rng.random(shots) < arg
                    kind = rng.integers(1, 4, size=shots)
                    fx[q] ^= hit & (kind != 3)
                    fz[q] ^= hit & (kind != 1)
            elif name == "DEPOLARIZE2":
                for c, t in zip(targets[::2], targets[1::2]):
                    hit = rng.random(shots) < arg
                    kind = rng.integers(1, 16, size=shots)
                    a, b = kind // 4, kind % 4
                    fx[c] ^= hit & ((a == 1) | (a == 2))
                    fz[c] ^= hit & ((a == 2) | (a == 3))
                    fx[t] ^= hit & ((b == 1) | (b == 2))
                    fz[t] ^= hit & ((b == 2) | (b == 3))
        rec = np.array(records) if records else np.zeros((0, shots), dtype=bool)
        det = np.array([np.bitwise_xor.reduce(rec[list(d)], axis=0) for d in self.circuit.detectors]).T
        obs = np.array([np.bitwise_xor.reduce(rec[list(o)], axis=0) for o in self.circuit.observables]).T
        return det.reshape(shots, -1), obs.reshape(shots, -1)


def exact_circuit_distance(dem, w_max=6, count=True):
    """Fewest mechanisms flipping an observable and no detector (exact, up to ``w_max``)."""
    return dec.exact_min_logical(dem.H, dem.L, None, w_max=w_max, count=count)


def estimate_circuit_distance(dem, estimator=None):
    """Upper bound from a randomized estimator; returns an :class:`~lrsec.decoder.EstimateResult`."""
    estimator = estimator or dec.AdaptiveEstimator(t_row=20, t_prior=5, random_state=0)
    return estimator.estimate(dem.H, dem.L)
