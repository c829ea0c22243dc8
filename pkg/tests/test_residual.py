import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrsec import decoder as dec, gf2, lrcsched as ls, residual as res
from lrsec.exceptions import DimensionError


def mask_classes(w):
    """Ordering classes via bitmasks (independent oracle)."""
    full = (1 << w) - 1
    keys = set()
    for perm in itertools.permutations(range(w)):
        masks = set()
        for l in range(1, w):
            m = sum(1 << q for q in perm[l:])
            c = full ^ m
            m = min((bin(m).count("1"), m), (bin(c).count("1"), c))[1]
            if bin(m).count("1") > 1:
                masks.add(m)
        keys.add(frozenset(masks))
    return len(keys)


@pytest.mark.parametrize("w", [2, 3, 4, 5, 6])
def test_ordering_class_counts_match_oracle(w):
    assert len(res.ordering_classes(w)) == mask_classes(w)


def test_ordering_class_counts_frozen():
    # weight-6 value is stated in the source; smaller weights derived from the oracle
    assert [len(res.ordering_classes(w)) for w in (2, 3, 4, 5, 6)] == [1, 1, 3, 15, 90]


def test_ordering_class_representatives_are_distinct():
    classes = res.ordering_classes(6)
    keys = {res.reduced_residual_sets(p, tuple(range(1, 7))) for p, _ in classes}
    assert len(keys) == 90
    assert classes[0][0] == (1, 2, 3, 4, 5, 6)


def test_residual_set_for_check_suffixes():
    assert res.residual_set_for_check([4, 7, 1]) == [(7, 1), (1,)]
    with pytest.raises(ValueError):
        res.residual_set_for_check([1, 1])


@given(st.lists(st.integers(0, 30), min_size=1, max_size=8, unique=True), st.data())
def test_canonical_is_shared_by_complement(check, data):
    sub = data.draw(st.lists(st.sampled_from(check), unique=True))
    comp = sorted(set(check) - set(sub))
    a = res.canonical_mod_check(sub, check)
    assert a == res.canonical_mod_check(comp, check)
    assert len(a) <= len(check) // 2 or len(a) == min(len(sub), len(comp))


def test_reduce_mod_check_rejects_outside_support():
    with pytest.raises(ValueError):
        res.reduce_mod_check((9,), (1, 2))


def test_candidate_count_three_three_split():
    mask = np.zeros(6, dtype=bool)
    mask[:3] = True
    cands = res.candidate_residuals_for_partition(range(6), mask)
    assert len(cands) == 14 and len(set(cands)) == 14
    assert (0, 1, 2, 3, 4, 5) in cands


@given(st.integers(1, 4), st.integers(1, 4))
def test_candidate_count_general(a, b):
    mask = np.array([True] * a + [False] * b)
    assert len(res.candidate_residuals_for_partition(range(a + b), mask)) == (2**a - 1) + (2**b - 1)


def test_lrc_residuals_are_candidates(hgp13):
    sched = ls.minimal_lrc(hgp13, rng_seed=0)
    left = ls.Partition.natural(hgp13).left
    for r in res.residual_set_for_schedule(sched):
        row = (hgp13.hx if r.pauli == "X" else hgp13.hz)[r.check]
        assert r.support in res.candidate_residuals_for_partition(np.flatnonzero(row), left)


def test_empty_residual_distance_is_one_plus_d(steane, hgp13):
    for code, d in ((steane, 3), (hgp13, 3)):
        for pauli in "XZ":
            assert res.residual_distance(code, res.ResidualError(0, pauli, ())) == 1 + d


def test_full_check_residual_is_harmless(steane):
    supp = tuple(np.flatnonzero(steane.hx[0]))
    assert res.residual_distance(steane, res.ResidualError(0, "X", supp)) == 1 + 3


def test_weight_two_residual_on_steane():
    from lrsec import codes
    c = codes.builtin_code("steane")
    supp = tuple(np.flatnonzero(c.hx[0]))[:2]
    assert res.residual_distance(c, res.ResidualError(0, "X", supp)) == 2


def test_extend_code_shape_and_columns(hgp13):
    sched = ls.minimal_lrc(hgp13, rng_seed=0)
    rs = res.residual_set_for_schedule(sched)
    for pauli in "XZ":
        ext = res.extend_code(hgp13, rs, pauli)
        k = len(rs.of_type(pauli))
        H, L = res.detecting_matrices(hgp13, pauli)
        assert ext.h.shape == (H.shape[0], hgp13.n + k)
        assert ext.logical.shape == (L.shape[0], hgp13.n + k)
        assert ext.n_base == hgp13.n
        for j in range(k):
            v = ext.provenance[hgp13.n + j][1].vector(hgp13.n)
            assert np.array_equal(ext.h[:, hgp13.n + j], gf2.matmul(H, v))


def test_extend_code_rejects_empty_residual(steane):
    with pytest.raises(DimensionError):
        res.extend_code(steane, [res.ResidualError(0, "X", ())], "X")


def test_expand_witness_is_logical(hgp13):
    rs = res.residual_set_for_schedule(ls.minimal_lrc(hgp13, rng_seed=0))
    ext = res.extend_code(hgp13, rs, "X")
    w, x, exact = res.extended_distance(ext, res.DistanceEstimator(method="exact"))
    assert exact and w == int(x.sum())
    v = res.expand_witness(ext, x)
    H, L = res.detecting_matrices(hgp13, "X")
    assert not gf2.matmul(H, v).any() and gf2.matmul(L, v).any()


def test_extended_distance_never_exceeds_code_distance(steane):
    sched = ls.random_schedule(steane, rng_seed=3)
    d = res.combined_extended_distance(steane, res.residual_set_for_schedule(sched))
    assert 1 <= d <= 3


def test_distance_estimator_backends():
    est = res.DistanceEstimator()
    assert est.backend(10) == "exact" and est.backend(100) == "simple"
    assert res.DistanceEstimator(method="adaptive").backend(5) == "adaptive"


def test_residual_error_validation():
    with pytest.raises(ValueError):
        res.ResidualError(0, "Y", (1,))
    assert res.ResidualError(0, "X", (3, 1)).support == (1, 3)
