"""Residual-pattern scans for the gross code and colour-tiled schedule search.

Checks of the bivariate bicycle code are indexed by the group element
``g = (i, j)`` of Z_12 x Z_6, flattened as ``6 i + j``.  X check ``g``
touches left qubits ``g + a`` and right qubits ``g + b`` for the monomials
``a`` of A and ``b`` of B; Z check ``g`` touches left ``g - b`` and right
``g - a``.  Check qubits are labelled 1..6 in that order (three left, then
three right), so a label pattern can be moved between checks by
translation.
"""

from __future__ import annotations

import csv
import io
import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import codes
from .exceptions import ImproperColoringError
from .lrcsched import GenericSchedule
from .residual import (DistanceEstimator, ResidualError, canonical_mod_check, extend_code,
                       extended_distance, ordering_classes, reduce_mod_check,
                       reduced_residual_sets)

__all__ = [
    "BbGeometry",
    "ScanRow",
    "default_scan_estimator",
    "translation_colouring",
    "check_colouring_is_proper",
    "gross_single_check_scan",
    "gross_uniform_tiling_scan",
    "gross_three_colour_scan",
    "ThreeColourResult",
    "find_schedule_for_residual_pattern",
    "scan_report",
]


class BbGeometry:
    """Translation structure of a bivariate bicycle code."""

    def __init__(self, code):
        meta = code.meta
        if meta.get("family") != "bb":
            raise ValueError("geometry needs a bivariate bicycle code")
        self.code = code
        self.l, self.m = meta["l"], meta["m"]
        self.a_terms, self.b_terms = meta["a_terms"], meta["b_terms"]
        self.size = self.l * self.m

    def elem(self, g):
        return divmod(int(g), self.m)

    def index(self, i, j):
        return (i % self.l) * self.m + (j % self.m)

    def add(self, g, t, sign=1):
        i, j = self.elem(g)
        return self.index(i + sign * t[0], j + sign * t[1])

    def check_qubits(self, pauli, g):
        """The six qubits of check ``g`` in label order."""
        if pauli == "X":
            left = [self.add(g, a) for a in self.a_terms]
            right = [self.size + self.add(g, b) for b in self.b_terms]
        else:
            left = [self.add(g, b, -1) for b in self.b_terms]
            right = [self.size + self.add(g, a, -1) for a in self.a_terms]
        return left + right

    def residuals_for_class(self, pauli, g, supports):
        """Residual errors on check ``g`` for a label-set pattern (labels 1..6)."""
        qs = self.check_qubits(pauli, g)
        return [ResidualError(g, pauli, [qs[lab - 1] for lab in s], k)
                for k, s in enumerate(sorted(supports))]


def translation_colouring(geom, a=1, b=1):
    """Colour ``(a i + b j) mod 3`` of check ``(i, j)``."""
    return np.array([(a * i + b * j) % 3 for i in range(geom.l) for j in range(geom.m)], dtype=np.int64)


def check_colouring_is_proper(code, pauli, colours):
    """True when same-type checks that share a qubit get different colours."""
    h = code.checks(pauli).astype(np.int64)
    overlap = h @ h.T
    np.fill_diagonal(overlap, 0)
    i, j = np.nonzero(overlap)
    return bool((colours[i] != colours[j]).all())


@dataclass
class ScanRow:
    class_id: int
    order: tuple
    supports: tuple
    bound: int
    witness: np.ndarray | None

    @property
    def witness_weight(self):
        return -1 if self.witness is None else int(self.witness.sum())


def default_scan_estimator(seed=0, target=None, t_row=100, t_prior=10):
    """Adaptive estimator settings used by the scans."""
    return DistanceEstimator(method="adaptive", rng_seed=seed, t_row=t_row, t_prior=t_prior,
                             target=target)


def _bound(code, residuals, pauli, estimator, seed_offset=0):
    ext = extend_code(code, residuals, pauli)
    w, wit, _ = estimator(ext.h, ext.logical, seed_offset=seed_offset)
    return int(w), wit


def gross_single_check_scan(code, check=0, pauli="X", estimator=None, classes=None):
    """Extended-distance bound for each of the 90 single-check residual classes."""
    geom = BbGeometry(code)
    estimator = estimator or default_scan_estimator()
    classes = classes or ordering_classes(6)
    rows = []
    for cid, (order, supports) in enumerate(classes):
        res = geom.residuals_for_class(pauli, check, supports)
        w, wit = _bound(code, res, pauli, estimator, cid)
        rows.append(ScanRow(cid, order, tuple(sorted(supports)), w, wit))
    return rows


def _tiled(geom, pauli, supports, checks):
    out = []
    for g in checks:
        out.extend(geom.residuals_for_class(pauli, g, supports))
    return out


def gross_uniform_tiling_scan(code, pauli="X", estimator=None, classes=None):
    """Bound for each class tiled by translation over every check of type ``pauli``."""
    geom = BbGeometry(code)
    estimator = estimator or default_scan_estimator()
    classes = classes or ordering_classes(6)
    rows = []
    for cid, (order, supports) in enumerate(classes):
        res = _tiled(geom, pauli, supports, range(geom.size))
        w, wit = _bound(code, res, pauli, estimator, cid)
        rows.append(ScanRow(cid, order, tuple(sorted(supports)), w, wit))
    return rows


@dataclass
class ThreeColourResult:
    single: list  # ScanRow per class (isolated check)
    single_survivors: list  # class ids with bound above ``cutoff``
    per_colour: dict  # colour -> list of (class_id, bound)
    per_colour_survivors: dict  # colour -> class ids
    combinations: list  # ((cid0, cid1, cid2), bound)
    survivors: list  # surviving combinations

    def cyclically_related(self):
        """True when the surviving combinations are closed under cyclic colour shifts."""
        s = {tuple(c) for c in self.survivors}
        return bool(s) and all(tuple(c[1:] + c[:1]) in s for c in s)


def gross_three_colour_scan(code, colours=None, pauli="Z", estimator=None, cutoff=10,
                            classes=None, single=None, combo_estimator=None, use_symmetry=True):
    """Filter cascade over colour-uniform tilings.

    1. Keep classes whose isolated-check bound exceeds ``cutoff``.
    2. For each colour, tile each kept class on that colour's checks and keep
       those still above ``cutoff``.
    3. Try every combination of per-colour survivors, one class per colour.
       Combinations that pass are re-checked with ``combo_estimator`` when
       one is given.

    With ``use_symmetry`` and the translation colouring, a shift by
    ``(1, 0)`` maps the tiling ``(c0, c1, c2)`` onto ``(c2, c0, c1)``, so the
    bound of a combination is taken as the minimum over its cyclic shifts.

    Raises
    ------
    ImproperColoringError
        If ``colours`` is not a proper colouring of the check-overlap graph.
    """
    geom = BbGeometry(code)
    colours = translation_colouring(geom) if colours is None else np.asarray(colours)
    if not check_colouring_is_proper(code, pauli, colours):
        raise ImproperColoringError("overlapping checks share a colour")
    estimator = estimator or default_scan_estimator(target=cutoff)
    classes = classes or ordering_classes(6)
    if single is None:
        single = gross_single_check_scan(code, int(np.flatnonzero(colours == 0)[0]), pauli,
                                         estimator, classes)
    kept = [r.class_id for r in single if r.bound > cutoff]
    by_colour = {c: np.flatnonzero(colours == c).tolist() for c in sorted(set(colours.tolist()))}
    per_colour, per_survivors = {}, {}
    for c, checks in by_colour.items():
        rows = []
        for cid in kept:
            res = _tiled(geom, pauli, classes[cid][1], checks)
            w, _ = _bound(code, res, pauli, estimator, 1000 * (c + 1) + cid)
            rows.append((cid, w))
        per_colour[c] = rows
        per_survivors[c] = [cid for cid, w in rows if w > cutoff]
    symmetric = use_symmetry and np.array_equal(colours, translation_colouring(geom))

    def combo_bound(combo, est, offset):
        res = []
        for c, cid in zip(sorted(by_colour), combo):
            res.extend(_tiled(geom, pauli, classes[cid][1], by_colour[c]))
        return _bound(code, res, pauli, est, offset)[0]

    def orbit_min(bounds):
        if not symmetric:
            return bounds
        out = {}
        for combo in bounds:
            shifts = [combo[-k:] + combo[:-k] for k in range(len(combo))]
            out[combo] = min(bounds[s] for s in shifts if s in bounds)
        return out

    all_combos = list(itertools.product(*(per_survivors[c] for c in sorted(by_colour))))
    bounds = orbit_min({combo: combo_bound(combo, estimator, 10**6 + k) for k, combo in enumerate(all_combos)})
    if combo_estimator is not None:
        for k, combo in enumerate(all_combos):
            if bounds[combo] > cutoff:
                bounds[combo] = min(bounds[combo], combo_bound(combo, combo_estimator, 2 * 10**6 + k))
        bounds = orbit_min(bounds)
    combos = [(combo, bounds[combo]) for combo in all_combos]
    survivors = [list(combo) for combo, w in combos if w > cutoff]
    return ThreeColourResult(single, kept, per_colour, per_survivors, combos, survivors)


def scan_report(rows):
    """CSV with columns class_id, residual_sets, bound, witness_weight, witness_support."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class_id", "residual_sets", "bound", "witness_weight", "witness_support"])
    for r in rows:
        sets = ";".join("{" + ",".join(map(str, s)) + "}" for s in r.supports)
        supp = "" if r.witness is None else " ".join(map(str, np.flatnonzero(r.witness)))
        w.writerow([r.class_id, sets, r.bound, r.witness_weight, supp])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# colour-uniform schedule search


def _orders_in_class(target_key, labels=(1, 2, 3, 4, 5, 6)):
    if target_key is None:
        return list(itertools.permutations(labels))
    return [p for p in itertools.permutations(labels) if reduced_residual_sets(p, labels) == target_key]


def find_schedule_for_residual_pattern(code, targets, colours=None, max_nodes=2_000_000):
    """Depth-``w + 2`` colour-uniform schedule realizing per-colour residual classes.

    ``targets`` maps ``(pauli, colour)`` to a class key (as returned by
    :func:`lrsec.residual.reduced_residual_sets`) or ``None`` for "any
    order".  Every check of a colour uses the same label order and starts at
    the same offset; with period ``w + 2`` each ancilla runs prep, ``w``
    consecutive CNOTs and measure.  A backtracking search picks orders and
    offsets so that no data qubit is double-booked (mod the period) and every
    overlapping X/Z pair is non-interleaved.  Returns None when infeasible.
    """
    geom = BbGeometry(code)
    colours = translation_colouring(geom) if colours is None else np.asarray(colours)
    w = 6
    period = w + 2
    palette = sorted(set(colours.tolist()))
    keys = [(p, c) for p in ("X", "Z") for c in palette]

    # per data qubit: which (pauli, colour, label) CNOTs touch it
    touch = defaultdict(list)
    for pauli in ("X", "Z"):
        for g in range(geom.size):
            for lab, q in enumerate(geom.check_qubits(pauli, g), start=1):
                touch[q].append((pauli, int(colours[g]), lab))
    qubit_patterns = {tuple(sorted(v)) for v in touch.values()}
    # per overlapping X/Z pair: the labels of both shared qubits
    pair_patterns = set()
    for gx in range(geom.size):
        xq = geom.check_qubits("X", gx)
        for gz in range(geom.size):
            zq = geom.check_qubits("Z", gz)
            shared = set(xq) & set(zq)
            if shared:
                pair_patterns.add((int(colours[gx]), int(colours[gz]),
                                   tuple(sorted((xq.index(q) + 1, zq.index(q) + 1) for q in shared))))

    choices = {}
    for key in keys:
        orders = _orders_in_class(targets.get(key))
        offsets = [0] if key == keys[0] else list(range(period))
        choices[key] = [(o, s) for o in orders for s in offsets]

    assign = {}
    nodes = [0]

    def time_of(key, lab):
        o, s = assign[key]
        return s + 1 + o.index(lab)

    def consistent():
        for pat in qubit_patterns:
            ts = [time_of((p, c), lab) % period for p, c, lab in pat if (p, c) in assign]
            if len(ts) != len(set(ts)):
                return False
        for cx, cz, labs in pair_patterns:
            if ("X", cx) in assign and ("Z", cz) in assign:
                floors = {(time_of(("X", cx), lx) - time_of(("Z", cz), lz)) // period for lx, lz in labs}
                if len(floors) > 1:
                    return False
        return True

    def search(depth):
        if depth == len(keys):
            return True
        key = keys[depth]
        for ch in choices[key]:
            nodes[0] += 1
            if nodes[0] > max_nodes:
                return False
            assign[key] = ch
            if consistent() and search(depth + 1):
                return True
            del assign[key]
        return False

    if not search(0):
        return None
    xs, zs, xp, xm, zp, zm = [], [], [], [], [], []
    for pauli, cn, prep, meas in (("X", xs, xp, xm), ("Z", zs, zp, zm)):
        for g in range(geom.size):
            o, s = assign[(pauli, int(colours[g]))]
            qs = geom.check_qubits(pauli, g)
            cn.append([(s + 1 + k, qs[lab - 1]) for k, lab in enumerate(o)])
            prep.append(s)
            meas.append(s + w + 1)
    sched = GenericSchedule(code, xs, zs, xp, xm, zp, zm, period, "colour-tiled")
    return sched.audit()
