"""Left-right partitions and timed syndrome extraction schedules.

A schedule fixes, for every check, the time slot of each of its CNOTs and of
its ancilla preparation and measurement within one round.  Round ``r``
occupies the absolute steps ``r * period + local`` so slots may be negative
when a check starts in the previous window.

Qubit numbering used by dumps and circuits: data qubits ``0..n-1``, then one
ancilla per X check, then one per Z check.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import coloring as col
from .exceptions import CollisionError, DimensionError, ImproperColoringError

__all__ = [
    "Partition",
    "GenericSchedule",
    "LrcSchedule",
    "build_lrc",
    "minimal_lrc",
    "depth_lower_bound",
    "lrc_depth_formula",
    "predicted_depth",
    "ancilla_idle_count",
    "check_idle_count",
    "partition_search",
    "make_noninterleaved_variant",
    "schedule_from_orders",
    "random_schedule",
    "dump_schedule",
]


@dataclass(frozen=True, eq=False)
class Partition:
    """Left/right split of the data qubits."""

    left: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.left, dtype=bool).copy()
        if mask.ndim != 1:
            raise DimensionError("partition mask must be 1-D")
        mask.setflags(write=False)
        object.__setattr__(self, "left", mask)

    @classmethod
    def natural(cls, code):
        if code.left is None:
            raise ValueError(f"{code!r} carries no natural partition")
        return cls(code.left)

    @property
    def n(self):
        return self.left.shape[0]

    @property
    def l(self):
        return int(self.left.sum())

    @property
    def r(self):
        return self.n - self.l

    @property
    def left_idx(self):
        return np.flatnonzero(self.left)

    @property
    def right_idx(self):
        return np.flatnonzero(~self.left)

    def blocks(self, code):
        """``(L_X, R_X, L_Z, R_Z)`` column blocks of the check matrices."""
        if code.n != self.n:
            raise DimensionError(f"partition over {self.n} qubits used with n={code.n}")
        li, ri = self.left_idx, self.right_idx
        return code.hx[:, li], code.hx[:, ri], code.hz[:, li], code.hz[:, ri]

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.left, other.left)

    def __hash__(self):
        return hash(self.left.tobytes())


@dataclass(frozen=True, eq=False)
class GenericSchedule:
    """Per-check CNOT time lists plus ancilla prep/measure times.

    ``x_cnots[i]`` is a list of ``(time, qubit)`` pairs for X check ``i``
    (likewise ``z_cnots``); times are local to the round.
    """

    code: object
    x_cnots: tuple
    z_cnots: tuple
    x_prep: tuple
    x_meas: tuple
    z_prep: tuple
    z_meas: tuple
    period: int
    name: str = ""

    def __post_init__(self):
        for attr in ("x_cnots", "z_cnots"):
            object.__setattr__(self, attr, tuple(tuple(sorted((int(t), int(q)) for t, q in c))
                                                 for c in getattr(self, attr)))
        for attr in ("x_prep", "x_meas", "z_prep", "z_meas"):
            object.__setattr__(self, attr, tuple(int(v) for v in getattr(self, attr)))
        if len(self.x_cnots) != self.code.hx.shape[0] or len(self.z_cnots) != self.code.hz.shape[0]:
            raise DimensionError("one CNOT list per check is required")

    @property
    def depth(self):
        return self.period

    def cnots(self, pauli):
        return self.x_cnots if pauli == "X" else self.z_cnots

    def prep(self, pauli):
        return self.x_prep if pauli == "X" else self.z_prep

    def meas(self, pauli):
        return self.x_meas if pauli == "X" else self.z_meas

    def order(self, pauli, check):
        """Data qubits of ``check`` in CNOT time order."""
        return [q for _, q in self.cnots(pauli)[check]]

    def orders(self, pauli):
        return [self.order(pauli, i) for i in range(len(self.cnots(pauli)))]

    def ancilla(self, pauli, check):
        n, mx = self.code.n, self.code.hx.shape[0]
        return n + check if pauli == "X" else n + mx + check

    @property
    def num_qubits(self):
        return self.code.n + self.code.hx.shape[0] + self.code.hz.shape[0]

    def round_events(self, r=0):
        """``(time, kind, qubits)`` events of round ``r`` (kinds as in the dump format)."""
        shift = r * self.period
        out = []
        for pauli in ("X", "Z"):
            for i, cn in enumerate(self.cnots(pauli)):
                a = self.ancilla(pauli, i)
                out.append((self.prep(pauli)[i] + shift, "RX" if pauli == "X" else "R", (a,)))
                out.append((self.meas(pauli)[i] + shift, "MX" if pauli == "X" else "M", (a,)))
                for t, q in cn:
                    pair = (a, q) if pauli == "X" else (q, a)
                    out.append((t + shift, "CX", pair))
        return out

    def audit(self, rounds=3):
        """Raise :class:`CollisionError` on double-booked qubits or misplaced CNOTs."""
        for pauli in ("X", "Z"):
            for i, cn in enumerate(self.cnots(pauli)):
                p, m = self.prep(pauli)[i], self.meas(pauli)[i]
                if m - p + 1 > self.period:
                    raise CollisionError(f"{pauli} check {i} is active for more than one period")
                for t, _ in cn:
                    if not p < t < m:
                        raise CollisionError(f"{pauli} check {i} has a CNOT outside its prep/measure window")
                qs = [q for _, q in cn]
                if len(set(qs)) != len(qs):
                    raise CollisionError(f"{pauli} check {i} touches a qubit twice")
                if sorted(qs) != np.flatnonzero(self.code.checks(pauli)[i]).tolist():
                    raise CollisionError(f"{pauli} check {i} CNOTs do not match its support")
        busy = {}
        for r in range(rounds):
            for t, kind, qs in self.round_events(r):
                for q in qs:
                    if (t, q) in busy:
                        raise CollisionError(f"qubit {q} has two operations at step {t}")
                    busy[(t, q)] = kind
        return self

    def overlapping_pairs(self):
        """Pairs ``(x_check, z_check, shared_qubits)`` with nonempty overlap."""
        hx, hz = self.code.hx, self.code.hz
        ov = hx.astype(np.int64) @ hz.T.astype(np.int64)
        for i, j in zip(*np.nonzero(ov)):
            yield int(i), int(j), np.flatnonzero(hx[i] & hz[j])

    def is_interleaved(self):
        """False when X CNOTs precede overlapping Z CNOTs on every shared qubit, or vice versa."""
        xt = [dict((q, t) for t, q in c) for c in self.x_cnots]
        zt = [dict((q, t) for t, q in c) for c in self.z_cnots]
        x_first = [xt[i][q] < zt[j][q] for i, j, shared in self.overlapping_pairs() for q in shared]
        return any(x_first) and not all(x_first)

    def commutation_valid(self):
        """Each overlapping pair must cross an even number of times to measure the intended checks."""
        xt = [dict((q, t) for t, q in c) for c in self.x_cnots]
        zt = [dict((q, t) for t, q in c) for c in self.z_cnots]
        for i, j, shared in self.overlapping_pairs():
            if sum(xt[i][q] < zt[j][q] for q in shared) % 2:
                return False
        return True

    def compacted(self):
        """Copy with prep delayed to just before the first CNOT and measure advanced to just after the last."""
        def tighten(cnots, prep, meas):
            p2, m2 = [], []
            for c, p, m in zip(cnots, prep, meas):
                if c:
                    p2.append(c[0][0] - 1)
                    m2.append(c[-1][0] + 1)
                else:
                    p2.append(p)
                    m2.append(m)
            return p2, m2

        xp, xm = tighten(self.x_cnots, self.x_prep, self.x_meas)
        zp, zm = tighten(self.z_cnots, self.z_prep, self.z_meas)
        return GenericSchedule(self.code, self.x_cnots, self.z_cnots, xp, xm, zp, zm, self.period, self.name)


@dataclass(frozen=True, eq=False)
class LrcSchedule(GenericSchedule):
    """Left-right schedule built from a partition and four edge colourings."""

    partition: Partition | None = None
    colorings: tuple = field(default=())
    t1: int = 0
    t2: int = 0


def check_idle_count(times):
    """Interior gaps between the first and last CNOT slot of one check."""
    times = sorted(times)
    if not times:
        return 0
    return times[-1] - times[0] + 1 - len(times)


def ancilla_idle_count(schedule):
    """Total ancilla idles per round after compacting prep and measure (tau_A)."""
    total = 0
    for pauli in ("X", "Z"):
        for cn in schedule.cnots(pauli):
            total += check_idle_count([t for t, _ in cn])
    return total


def _coloring_matches(c, block):
    edges = col.edges_of(block)
    if c.shape != block.shape or not np.array_equal(c.edges, edges):
        raise ImproperColoringError("colouring does not belong to this block")
    c.validate()


def build_lrc(code, partition, colorings, name="lrc"):
    """Timed LRC for ``colorings = (C(L_X), C(R_X), C(L_Z), C(R_Z))``.

    With colours numbered from 1, ``t1 = max(|C(L_X)|, |C(R_Z)|)``,
    ``t2 = max(|C(L_Z)|, |C(R_X)|)`` and period ``t = t1 + t2 + 2``:

    * X check: prep at 1, L_X colour c at 1 + c, R_X colour c at t1 + 1 + c,
      measure at t.
    * Z check: prep at t1 + 3 - t, L_Z colour c at t1 + 3 + c - t (the
      previous window), R_Z colour c at 1 + c, measure at t1 + 2.
    """
    lx_b, rx_b, lz_b, rz_b = partition.blocks(code)
    c_lx, c_rx, c_lz, c_rz = colorings
    for c, b in zip(colorings, (lx_b, rx_b, lz_b, rz_b)):
        _coloring_matches(c, b)
    t1 = max(c_lx.num_colors, c_rz.num_colors)
    t2 = max(c_lz.num_colors, c_rx.num_colors)
    t = t1 + t2 + 2
    li, ri = partition.left_idx, partition.right_idx
    xs = [[] for _ in range(code.hx.shape[0])]
    zs = [[] for _ in range(code.hz.shape[0])]

    def place(target, c, idx, offset):
        for (i, j), colour in zip(c.edges, c.colors):
            target[i].append((offset + int(colour) + 1, int(idx[j])))

    place(xs, c_lx, li, 1)
    place(xs, c_rx, ri, t1 + 1)
    place(zs, c_lz, li, t1 + 3 - t)
    place(zs, c_rz, ri, 1)
    mx, mz = len(xs), len(zs)
    sched = LrcSchedule(code, xs, zs, [1] * mx, [t] * mx, [t1 + 3 - t] * mz, [t1 + 2] * mz, t, name,
                        partition=partition, colorings=tuple(colorings), t1=t1, t2=t2)
    sched.audit()
    return sched


def minimal_lrc(code, partition=None, rng_seed=None):
    """LRC from minimal colourings of the four blocks."""
    partition = partition if partition is not None else Partition.natural(code)
    blocks = partition.blocks(code)
    rng = np.random.default_rng(rng_seed)
    cols = tuple(col.minimal_coloring(b, int(rng.integers(2**31))) for b in blocks)
    return build_lrc(code, partition, cols)


def depth_lower_bound(code):
    """``max(c(H_XZ), r(H_XZ) + 2)``."""
    from .codes import degree_stats

    s = degree_stats(code)
    return max(s.c_hxz, s.r_hxz + 2)


def lrc_depth_formula(a, b):
    """Minimal-colouring LRC depth of ``hgp(a, b)``: ``delta(a) + delta(b) + 2``."""
    return col.max_degree(a) + col.max_degree(b) + 2


def predicted_depth(code, partition):
    lx_b, rx_b, lz_b, rz_b = partition.blocks(code)
    d = col.max_degree
    return max(d(lx_b), d(rz_b)) + max(d(lz_b), d(rx_b)) + 2


def partition_search(code, trials=200, rng_seed=None):
    """Sampled partition with the smallest predicted LRC depth.

    Ties go to the smaller ``|l - r|``, then to the earlier sample.  All
    ``2**n`` splits are tried when that is at most ``trials``; otherwise the
    natural partition (if any) is tried first, followed by random splits
    whose left size is drawn near ``n/2`` or near the natural left size.
    """
    n = code.n
    rng = np.random.default_rng(rng_seed)
    if 2 ** n <= trials:
        samples = (np.array(bits, dtype=bool) for bits in itertools.product((False, True), repeat=n))
    else:
        def gen():
            sizes = [n // 2]
            if code.left is not None:
                yield code.left
                sizes.append(int(code.left.sum()))
            for _ in range(trials - (code.left is not None)):
                centre = sizes[int(rng.integers(len(sizes)))]
                size = int(np.clip(centre + rng.integers(-2, 3), 0, n))
                mask = np.zeros(n, dtype=bool)
                mask[rng.choice(n, size=size, replace=False)] = True
                yield mask
        samples = gen()
    best, best_key = None, None
    for idx, mask in enumerate(samples):
        p = Partition(mask)
        key = (predicted_depth(code, p), abs(p.l - p.r), idx)
        if best_key is None or key < best_key:
            best, best_key = p, key
    return best


def schedule_from_orders(code, x_orders, z_orders, x_first=True, name="sequential"):
    """Non-interleaved schedule realizing the given per-check CNOT orders.

    One check type is scheduled completely before the other.  Within a
    block, CNOTs are placed greedily, check by check, at the earliest slot
    after the check's previous CNOT where the data qubit is free.
    """
    def block(orders, start):
        busy = defaultdict(set)
        timed = []
        end = start
        for order in orders:
            t = start
            lst = []
            for q in order:
                t += 1
                while t in busy[q]:
                    t += 1
                busy[q].add(t)
                lst.append((t, int(q)))
            timed.append(lst)
            end = max(end, t)
        return timed, end

    first, second = (x_orders, z_orders) if x_first else (z_orders, x_orders)
    a, end_a = block(first, 1)
    b, end_b = block(second, end_a + 1)
    period = end_b + 2
    if x_first:
        xs, zs = a, b
    else:
        zs, xs = a, b

    def windows(timed, order_start):
        prep = [c[0][0] - 1 if c else order_start for c in timed]
        meas = [c[-1][0] + 1 if c else order_start + 1 for c in timed]
        return prep, meas

    xp, xm = windows(xs, 0)
    zp, zm = windows(zs, 0)
    sched = GenericSchedule(code, xs, zs, xp, xm, zp, zm, period, name)
    return sched.audit()


def make_noninterleaved_variant(schedule, x_first=True):
    """Alternating-XZ schedule with each check's CNOT order preserved."""
    return schedule_from_orders(schedule.code, schedule.orders("X"), schedule.orders("Z"),
                                x_first=x_first, name=(schedule.name or "schedule") + "-noninterleaved")


def random_schedule(code, rng_seed=None, max_tries=1000, want_interleaved=None):
    """Random valid single-ancilla schedule.

    Each check gets a random CNOT order and a random priority.  On every
    data qubit the CNOTs run in priority order, and each CNOT takes the
    earliest step after both its check's previous CNOT and the qubit's
    previous CNOT.  An overlapping X/Z pair thus crosses on all or none of
    its shared qubits, so the draw always measures the intended checks.
    With ``want_interleaved=False`` all checks of one random type outrank
    the other type; with ``True`` draws are repeated until the directions
    mix.
    """
    rng = np.random.default_rng(rng_seed)
    keys = [("X", i) for i in range(code.hx.shape[0])] + [("Z", i) for i in range(code.hz.shape[0])]
    supp = {("X", i): np.flatnonzero(r) for i, r in enumerate(code.hx)}
    supp.update({("Z", i): np.flatnonzero(r) for i, r in enumerate(code.hz)})
    for _ in range(max_tries):
        orders = {key: [int(q) for q in rng.permutation(supp[key])] for key in keys}
        prio = rng.permutation(len(keys)).astype(float)
        if want_interleaved is False:
            first = "X" if rng.integers(2) else "Z"
            prio = prio + np.array([0 if k[0] == first else len(keys) for k in keys])
        ranked = [keys[i] for i in np.argsort(prio, kind="stable")]
        times = {}
        qubit_free = defaultdict(int)
        pending = {key: 0 for key in keys}
        queue = {q: [k for k in ranked if q in orders[k]] for q in range(code.n)}
        progress = True
        while progress:
            progress = False
            for key in ranked:
                k = pending[key]
                if k == len(orders[key]):
                    continue
                q = orders[key][k]
                if queue[q][0] != key:
                    continue
                prev = times[(key, k - 1)] if k else 0
                t = max(prev, qubit_free[q]) + 1
                times[(key, k)] = t
                qubit_free[q] = t
                queue[q].pop(0)
                pending[key] += 1
                progress = True
        xs = [[(times[(("X", i), k)], q) for k, q in enumerate(orders[("X", i)])] for i in range(code.hx.shape[0])]
        zs = [[(times[(("Z", i), k)], q) for k, q in enumerate(orders[("Z", i)])] for i in range(code.hz.shape[0])]
        period = max(times.values(), default=0) + 2
        sched = GenericSchedule(code, xs, zs, [c[0][0] - 1 for c in xs], [c[-1][0] + 1 for c in xs],
                                [c[0][0] - 1 for c in zs], [c[-1][0] + 1 for c in zs], period, "random")
        if want_interleaved is not None and sched.is_interleaved() != want_interleaved:
            continue
        return sched.audit()
    raise RuntimeError("no valid random schedule found")


def dump_schedule(schedule, rounds=1):
    """One ``step op qubits`` line per operation, sorted by step then qubits."""
    events = []
    for r in range(rounds):
        events.extend(schedule.round_events(r))
    events.sort(key=lambda e: (e[0], e[2], e[1]))
    return "".join(f"{t} {kind} {' '.join(map(str, qs))}\n" for t, kind, qs in events)
