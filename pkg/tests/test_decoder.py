import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lrsec import codes, decoder as dec, gf2
from lrsec.exceptions import EstimatorError, InconsistentSyndrome


def brute_min_logical(H, A, y):
    """Exhaustive minimum over all x: (weight, number of minimal x)."""
    n = H.shape[1]
    best, count = None, 0
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits, dtype=np.uint8)
        v = x ^ y
        if gf2.matmul(H, v).any() or not gf2.matmul(A, v).any():
            continue
        w = int(x.sum())
        if best is None or w < best:
            best, count = w, 1
        elif w == best:
            count += 1
    return best, count


def test_bp_corrects_single_flip_on_repetition_code():
    H = codes.repetition_checks(5)
    e = np.zeros(5, dtype=np.uint8)
    e[2] = 1
    r = dec.bp_min_sum(H, gf2.matmul(H, e), priors=0.05, max_iter=50)
    assert r.converged and np.array_equal(r.correction, e)


@given(st.integers(2, 8), st.integers(3, 14), st.integers(0, 2**31))
def test_osd_returns_syndrome_consistent_correction(m, n, seed):
    rng = np.random.default_rng(seed)
    H = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
    e = (rng.random(n) < 0.3).astype(np.uint8)
    s = gf2.matmul(H, e)
    x = dec.osd_cs(H, s, rng.random(n), order=3)
    assert np.array_equal(gf2.matmul(H, x), s)


def test_osd_rejects_inconsistent_syndrome():
    with pytest.raises(InconsistentSyndrome):
        dec.osd_cs(np.array([[1, 1], [1, 1]]), np.array([1, 0]), np.zeros(2))


@given(st.integers(0, 2**31))
def test_bposd_decoder_always_matches_syndrome(seed):
    rng = np.random.default_rng(seed)
    code = codes.builtin_code("hgp13")
    H = code.hz
    e = (rng.random(code.n) < 0.2).astype(np.uint8)
    d = dec.BpOsdDecoder(max_iter=20).fit(H)
    out = d.predict(gf2.matmul(H, e)[None, :])
    assert np.array_equal(gf2.matmul(H, out[0]), gf2.matmul(H, e))
    assert d.status_[0] in (0, 1)


def test_decoder_requires_fit():
    with pytest.raises(RuntimeError):
        dec.BpOsdDecoder().decode(np.zeros(2, dtype=np.uint8))


def test_decoder_config_defaults():
    assert (dec.FULL_CONFIG.max_iter, dec.FULL_CONFIG.ms_scale, dec.FULL_CONFIG.osd_order) == (10_000, 0.0, 7)
    assert dec.PRECOMPUTE_CONFIG.max_iter == 200
    with pytest.raises(ValueError):
        dec.DecoderConfig(max_iter=0)


def test_priors_to_llr_clips():
    llr = dec.priors_to_llr([1e-30, 0.5])
    assert llr[0] == dec.LLR_CLIP and llr[1] == 0.0


@st.composite
def small_problem(draw):
    n = draw(st.integers(2, 9))
    H = draw(arrays(np.uint8, (draw(st.integers(0, 4)), n), elements=st.integers(0, 1)))
    A = draw(arrays(np.uint8, (draw(st.integers(1, 3)), n), elements=st.integers(0, 1)))
    y = draw(arrays(np.uint8, n, elements=st.integers(0, 1)))
    return H, A, y


@given(small_problem())
def test_exact_search_matches_brute_force(problem):
    H, A, y = problem
    best, count = brute_min_logical(H, A, y)
    if not A.any():
        with pytest.raises(EstimatorError):
            dec.exact_min_logical(H, A, y)
        return
    r = dec.exact_min_logical(H, A, y, w_max=H.shape[1])
    assert r.weight == best
    if best is not None:
        assert r.count == count
        assert dec.is_valid_witness(H, A, y, r.witness) and int(r.witness.sum()) == best


def test_exact_search_reports_limit(hgp13):
    r = dec.exact_min_logical(hgp13.hz, hgp13.lz, w_max=2)
    assert r.weight is None and str(r) == ">2"
    r = dec.exact_min_logical(hgp13.hz, hgp13.lz, w_max=4)
    assert str(r) == "exact 3"


@given(small_problem(), st.integers(0, 1000))
def test_estimators_upper_bound_exact(problem, seed):
    H, A, y = problem
    best, _ = brute_min_logical(H, A, y)
    assume(best is not None and A.any())
    for est in (dec.SimpleEstimator(trials=10, random_state=seed),
                dec.AdaptiveEstimator(t_row=3, t_prior=2, random_state=seed)):
        r = est.estimate(H, A, y)
        assert r.weight >= best
        assert dec.is_valid_witness(H, A, y, r.witness)


def test_estimator_finds_zero_for_logical_residual(steane):
    y = steane.lz[0].copy()
    r = dec.SimpleEstimator(trials=20, random_state=0).estimate(steane.hx, steane.lx, y)
    assert r.weight == 0


def test_estimator_without_logicals_raises():
    with pytest.raises(EstimatorError):
        dec.SimpleEstimator().estimate(np.ones((1, 3), dtype=np.uint8), np.zeros((1, 3), dtype=np.uint8))


def test_target_stops_early(gross):
    slow = dec.SimpleEstimator(trials=30, random_state=0).estimate(gross.hz, gross.lz)
    fast = dec.SimpleEstimator(trials=30, target=20, random_state=0).estimate(gross.hz, gross.lz)
    assert fast.decode_calls < slow.decode_calls


@pytest.mark.parametrize("name, d", [("gross", 12), ("fb126", 9), ("hgp13", 3)])
def test_simple_estimator_reaches_code_distance(name, d):
    code = codes.builtin_code(name)
    for pauli, (H, A) in (("X", (code.hz, code.lz)), ("Z", (code.hx, code.lx))):
        r = dec.estimate_min_logical_simple(H, A, trials=100, rng_seed=1)
        assert r.weight == d, pauli
        assert dec.is_valid_witness(H, A, np.zeros(code.n, dtype=np.uint8), r.witness)


def test_estimators_are_deterministic_per_seed(fb126):
    a = dec.AdaptiveEstimator(t_row=5, t_prior=3, random_state=7).estimate(fb126.hx, fb126.lx)
    b = dec.AdaptiveEstimator(t_row=5, t_prior=3, random_state=7).estimate(fb126.hx, fb126.lx)
    assert a.weight == b.weight and np.array_equal(a.witness, b.witness)


def test_estimator_rejects_logicals_inside_stabilizers():
    H = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    with pytest.raises(EstimatorError):
        dec.AdaptiveEstimator(t_row=2, t_prior=2).estimate(H, np.array([[1, 0, 1]], dtype=np.uint8))
