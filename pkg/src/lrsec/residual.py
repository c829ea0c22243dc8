"""Residual errors, residual distances and extended codes.

A check measured with CNOT order ``(i_1, ..., i_w)`` can leave, after a
single ancilla fault, any suffix ``{i_l, ..., i_w}`` (``l = 2..w``) on the
data.  X checks leave X-type residuals, which are detected by ``hz`` and
judged by ``lz``; Z checks leave Z-type residuals, judged by ``hx``/``lx``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import decoder as dec
from . import gf2
from .exceptions import DimensionError, EstimatorError

__all__ = [
    "ResidualError",
    "ResidualSet",
    "ExtendedCode",
    "DistanceEstimator",
    "detecting_matrices",
    "residual_set_for_check",
    "residual_set_for_schedule",
    "reduce_mod_check",
    "canonical_mod_check",
    "ordering_classes",
    "reduced_residual_sets",
    "candidate_residuals_for_partition",
    "residual_distance",
    "extend_code",
    "extended_distance",
    "combined_extended_distance",
]


@dataclass(frozen=True)
class ResidualError:
    """Data-qubit image of one hook fault."""

    check: int
    pauli: str
    support: tuple
    index: int = 0  # suffix start l (1-based position in the CNOT order)

    def __post_init__(self):
        if self.pauli not in ("X", "Z"):
            raise ValueError("pauli must be 'X' or 'Z'")
        object.__setattr__(self, "support", tuple(sorted(int(q) for q in self.support)))

    @property
    def weight(self):
        return len(self.support)

    def vector(self, n):
        v = np.zeros(n, dtype=np.uint8)
        v[list(self.support)] = 1
        return v


class ResidualSet:
    """Disjoint union of residual errors keyed by ``(check, pauli, support)``."""

    def __init__(self, residuals=()):
        self._items = list(residuals)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def of_type(self, pauli):
        return ResidualSet(r for r in self._items if r.pauli == pauli)

    def keys(self):
        return sorted((r.check, r.pauli, r.support) for r in self._items)

    def __eq__(self, other):
        return isinstance(other, ResidualSet) and self.keys() == other.keys()

    def __repr__(self):
        return f"ResidualSet({len(self)} residuals)"


def detecting_matrices(code, pauli):
    """``(H, L)`` that see errors of type ``pauli``: X errors meet ``hz``/``lz``."""
    return (code.hz, code.lz) if pauli == "X" else (code.hx, code.lx)


def residual_set_for_check(order):
    """Suffix supports ``order[l-1:]`` for ``l = 2..w``."""
    order = list(order)
    if len(set(order)) != len(order):
        raise ValueError("CNOT order repeats a qubit")
    return [tuple(order[l:]) for l in range(1, len(order))]


def residual_set_for_schedule(schedule):
    out = []
    for pauli in ("X", "Z"):
        for i, order in enumerate(schedule.orders(pauli)):
            for l, supp in enumerate(residual_set_for_check(order), start=2):
                out.append(ResidualError(i, pauli, supp, l))
    return ResidualSet(out)


def reduce_mod_check(support, check_support):
    """The lighter of ``support`` and its complement within the check; ties keep ``support``."""
    s, c = set(support), set(check_support)
    if not s <= c:
        raise ValueError("support must lie inside the check")
    comp = c - s
    return tuple(sorted(comp)) if len(comp) < len(s) else tuple(sorted(s))


def canonical_mod_check(support, check_support):
    """Representative of ``support`` modulo the check: lighter side, ties by sorted order."""
    s = tuple(sorted(support))
    comp = tuple(sorted(set(check_support) - set(s)))
    return min((len(s), s), (len(comp), comp))[1]


def reduced_residual_sets(order, check_support=None):
    """Check-reduced residuals of weight > 1 for one CNOT order, as a frozenset."""
    check_support = tuple(order) if check_support is None else check_support
    out = set()
    for supp in residual_set_for_check(order):
        red = canonical_mod_check(supp, check_support)
        if len(red) > 1:
            out.add(red)
    return frozenset(out)


def ordering_classes(w, labels=None):
    """Distinct reduced residual sets over all ``w!`` CNOT orders of one check.

    Two orders fall in the same class when their residuals agree modulo the
    check (a support and its complement are equivalent) after dropping
    residuals of weight at most one.  Returns ``(representative_order,
    supports)`` pairs in order of first appearance over lexicographic
    permutations; ``supports`` uses :func:`reduce_mod_check` on the
    representative.
    """
    if w < 2:
        raise ValueError("w must be >= 2")
    labels = tuple(range(1, w + 1)) if labels is None else tuple(labels)
    seen = {}
    for perm in itertools.permutations(labels):
        key = reduced_residual_sets(perm, labels)
        if key not in seen:
            seen[key] = perm
    out = []
    for perm in seen.values():
        shown = {reduce_mod_check(s, labels) for s in residual_set_for_check(perm)}
        out.append((perm, frozenset(s for s in shown if len(s) > 1)))
    return out


def candidate_residuals_for_partition(check_qubits, left_mask, first_side="L"):
    """Every suffix support an LRC can produce for one check.

    With first side ``F`` and second side ``S`` of the check's qubits, these
    are the nonempty subsets of ``S`` and the sets ``T | S`` for nonempty
    ``T`` subset of ``F``.  The latter include the whole support, which is
    kept so that the count is ``(2**|S| - 1) + (2**|F| - 1)``.
    """
    qs = [int(q) for q in check_qubits]
    left = [q for q in qs if left_mask[q]]
    right = [q for q in qs if not left_mask[q]]
    first, second = (left, right) if first_side == "L" else (right, left)
    if not second:
        first, second = second, first

    def nonempty_subsets(items):
        for r in range(1, len(items) + 1):
            yield from itertools.combinations(items, r)

    out = [tuple(sorted(s)) for s in nonempty_subsets(second)]
    out += [tuple(sorted(t + tuple(second))) for t in nonempty_subsets(first)]
    return out


class DistanceEstimator:
    """Chooses an exact or decoder-based backend for ``min |x|`` problems.

    ``method`` is ``"auto"`` (exact when ``n <= exact_n``), ``"exact"``,
    ``"simple"`` or ``"adaptive"``.  Extra keyword arguments go to the
    chosen estimator class.
    """

    def __init__(self, method="auto", exact_n=24, w_max=8, rng_seed=0, **kwargs):
        self.method = method
        self.exact_n = exact_n
        self.w_max = w_max
        self.rng_seed = rng_seed
        self.kwargs = kwargs

    def backend(self, n):
        if self.method == "auto":
            return "exact" if n <= self.exact_n else "simple"
        return self.method

    def __call__(self, H, A, y=None, seed_offset=0):
        """Return ``(weight, witness, exact_flag)``."""
        kind = self.backend(H.shape[1])
        if kind == "exact":
            r = dec.exact_min_logical(H, A, y, w_max=min(self.w_max, H.shape[1]))
            if r.weight is None:
                raise EstimatorError(f"no solution up to weight {r.w_max}")
            return r.weight, r.witness, True
        seed = None if self.rng_seed is None else self.rng_seed + seed_offset
        cls = dec.SimpleEstimator if kind == "simple" else dec.AdaptiveEstimator
        r = cls(random_state=seed, **self.kwargs).estimate(H, A, y)
        return r.weight, r.witness, False


def residual_distance(code, residual, estimator=None):
    """Delta(E) = 1 + min |D| such that E + D is a nontrivial logical.

    ``residual`` is a :class:`ResidualError` (its ``pauli`` picks the
    matrices).  An empty support is accepted and yields ``1 + d``.
    """
    estimator = estimator or DistanceEstimator()
    H, L = detecting_matrices(code, residual.pauli)
    y = residual.vector(code.n)
    w, _, _ = estimator(H, L, y)
    return 1 + int(w)


@dataclass(frozen=True, eq=False)
class ExtendedCode:
    """Base matrices with one appended column per residual."""

    pauli: str
    h: np.ndarray
    logical: np.ndarray
    provenance: tuple  # ("q", qubit) or ("r", residual)

    @property
    def n_base(self):
        return sum(1 for p in self.provenance if p[0] == "q")


def extend_code(code, residuals, pauli):
    """Append, per residual of type ``pauli`` (ordered by check then suffix index), the XOR of its columns."""
    H, L = detecting_matrices(code, pauli)
    res = sorted((r for r in residuals if r.pauli == pauli), key=lambda r: (r.check, r.index, r.support))
    extra_h = np.zeros((H.shape[0], len(res)), dtype=np.uint8)
    extra_l = np.zeros((L.shape[0], len(res)), dtype=np.uint8)
    for j, r in enumerate(res):
        if not r.support:
            raise DimensionError("empty residual cannot be appended")
        idx = list(r.support)
        extra_h[:, j] = H[:, idx].sum(axis=1) % 2
        extra_l[:, j] = L[:, idx].sum(axis=1) % 2
    prov = tuple(("q", q) for q in range(code.n)) + tuple(("r", r) for r in res)
    return ExtendedCode(pauli, np.hstack([H, extra_h]), np.hstack([L, extra_l]), prov)


def extended_distance(ext, estimator=None):
    """Min |x| with ``H_ext x = 0`` and ``L_ext x != 0``; returns ``(weight, witness, exact)``."""
    estimator = estimator or DistanceEstimator()
    return estimator(ext.h, ext.logical)


def combined_extended_distance(code, residuals, estimator=None):
    """Minimum over the X and Z sides (sides without logicals are skipped)."""
    best = None
    for pauli in ("X", "Z"):
        ext = extend_code(code, residuals, pauli)
        if not ext.logical.any():
            continue
        w = extended_distance(ext, estimator)[0]
        best = w if best is None else min(best, w)
    return best


def expand_witness(ext, x):
    """Map an extended-code solution back to a data-qubit error pattern."""
    v = np.zeros(ext.n_base, dtype=np.uint8)
    for j in np.flatnonzero(x):
        kind, item = ext.provenance[j]
        if kind == "q":
            v[item] ^= 1
        else:
            v[list(item.support)] ^= 1
    return v


def residual_matrix(code, residuals):
    """Rows = residual indicator vectors (testing helper)."""
    return gf2.from_index_lists([r.support for r in residuals], code.n)
