import numpy as np
import pytest
from scipy import stats

from lrsec import circuits as cc, codes, decoder as dec, lrcsched as ls
from lrsec.exceptions import BasisError, ParseError


def rep3_schedule():
    code = codes.builtin_code("rep3")
    return ls.schedule_from_orders(code, [], [list(np.flatnonzero(r)) for r in code.hz])


def dem_distribution(dem):
    """Exact distribution of the packed (detectors, observables) word under the DEM."""
    cols = np.vstack([dem.H, dem.L]).astype(np.int64)
    weights = 1 << np.arange(cols.shape[0])
    dist = np.zeros(1 << cols.shape[0])
    dist[0] = 1.0
    for j in range(cols.shape[1]):
        word = int(weights @ cols[:, j])
        p = dem.priors[j]
        dist = (1 - p) * dist + p * dist[np.arange(dist.size) ^ word]
    return dist


def frame_words(circ, noise, shots, seed):
    det, obs = cc.FrameSimulator(circ, noise).sample(shots, seed)
    bits = np.hstack([det, obs]).astype(np.int64)
    return bits @ (1 << np.arange(bits.shape[1]))


def test_rep3_detector_layout():
    circ = cc.build_memory_experiment(rep3_schedule(), "Z", rounds=1)
    assert len(circ.detectors) == 4 and len(circ.observables) == 1
    assert cc.check_deterministic(circ)


def test_memory_requires_logical_in_basis():
    code = codes.new_css([[1, 1]], [[1, 1]], name="tiny")
    assert code.k == 0
    with pytest.raises(BasisError):
        cc.build_memory_experiment(ls.schedule_from_orders(code, [[0, 1]], [[0, 1]]), "Z", rounds=1)


@pytest.mark.parametrize("name", ["steane", "hgp13", "fb126", "gross"])
@pytest.mark.parametrize("basis", ["X", "Z"])
def test_builtin_memory_circuits_are_deterministic(name, basis):
    code = codes.builtin_code(name)
    sched = ls.minimal_lrc(code, ls.partition_search(code, 20, 0) if code.left is None else None, rng_seed=0)
    circ = cc.build_memory_experiment(sched, basis, rounds=2)
    assert cc.check_deterministic(circ)


def test_corrupted_detector_is_not_deterministic(hgp13):
    circ = cc.build_memory_experiment(ls.minimal_lrc(hgp13, rng_seed=0), "Z", rounds=2)
    used = {d[0] for d in circ.detectors if len(d) == 1}
    first_x = min(set(range(len(hgp13.hx) + len(hgp13.hz))) - used)
    circ.detectors.append((first_x,))
    assert not cc.check_deterministic(circ)


def test_measurement_flip_triggers_two_detectors():
    circ = cc.build_memory_experiment(rep3_schedule(), "Z", rounds=2)
    dem = cc.build_dem(circ, cc.NoiseBinding(0.01))
    sigs = {tuple(np.flatnonzero(dem.H[:, j])) for j in range(dem.num_mechanisms) if not dem.L[:, j].any()}
    # ancilla 0 in round 0 feeds D0 and its round-1 comparison
    assert any(len(s) == 2 for s in sigs)


def test_xor_merge():
    assert cc._xor_prob(0.1, 0.1) == pytest.approx(0.18)


@pytest.mark.parametrize("k", [3, 15])
def test_independent_components_reproduce_depolarizing(k):
    # with k flips of probability q, the identity survives with (1 - p)
    p = 0.03
    q = cc._indep_prob(p, k)
    bits = 2 if k == 3 else 4
    probs = np.zeros(1 << bits)
    probs[0] = 1.0
    for word in range(1, 1 << bits):
        probs = (1 - q) * probs + q * probs[np.arange(probs.size) ^ word]
    assert probs[0] == pytest.approx(1 - p)
    assert np.allclose(probs[1:], p / k)


def test_noiseless_export_has_no_noise_lines(hgp13):
    circ = cc.build_memory_experiment(ls.minimal_lrc(hgp13, rng_seed=0), "X", rounds=2)
    text = cc.export_circuit_text(circ, cc.NoiseBinding(0.0))
    for name in ("X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2"):
        assert name not in text


def test_idle_scale_zero_drops_idle_noise(hgp13):
    circ = cc.build_memory_experiment(ls.minimal_lrc(hgp13, rng_seed=0), "X", rounds=1)
    assert "DEPOLARIZE1" not in cc.export_circuit_text(circ, cc.NoiseBinding(0.01, idle_scale=0.0))


def test_export_is_byte_identical(hgp13):
    sched = ls.minimal_lrc(hgp13, rng_seed=0)
    a = cc.export_circuit_text(cc.build_memory_experiment(sched, "Z", rounds=3), cc.NoiseBinding(1e-3))
    b = cc.export_circuit_text(cc.build_memory_experiment(sched, "Z", rounds=3), cc.NoiseBinding(1e-3))
    assert a == b


def test_gross_round_trip(gross):
    circ = cc.build_memory_experiment(ls.minimal_lrc(gross, rng_seed=0), "Z", rounds=12)
    noise = cc.NoiseBinding(1e-3)
    text = cc.export_circuit_text(circ, noise)
    back, noise_back = cc.parse_circuit_text(text)
    assert back == circ and noise_back == noise
    assert cc.export_circuit_text(back, noise_back) == text


@pytest.mark.parametrize("text, line", [
    ("R 0\nFOO 1\n", 2),
    ("R 0\nM 0\nDETECTOR rec[-5]\n", 3),
    ("R a\n", 1),
    ("R 0\nX_ERROR(2.0) 0\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        cc.parse_circuit_text(text)
    assert err.value.line == line


def test_dem_matches_frame_simulator():
    circ = cc.build_memory_experiment(rep3_schedule(), "Z", rounds=2)
    noise = cc.NoiseBinding(0.03)
    dist = dem_distribution(cc.build_dem(circ, noise))
    shots = 40_000
    words = frame_words(circ, noise, shots, 11)
    obs = np.bincount(words, minlength=dist.size)
    keep = dist * shots >= 5
    exp = dist[keep] * shots
    o = obs[keep]
    other = shots - o.sum()
    chi2 = ((o - exp) ** 2 / exp).sum() + (other - (shots - exp.sum())) ** 2 / max(shots - exp.sum(), 1e-9)
    assert stats.chi2.sf(chi2, keep.sum()) > 1e-3


def test_dem_columns_match_single_fault_injection(steane):
    # each mechanism's detector signature is reproduced by some fault seen in the frame simulator
    circ = cc.build_memory_experiment(ls.random_schedule(steane, rng_seed=2), "Z", rounds=1)
    noise = cc.NoiseBinding(0.002)
    dem = cc.build_dem(circ, noise)
    sigs = {bytes(np.vstack([dem.H, dem.L])[:, j]) for j in range(dem.num_mechanisms)}
    det, obs = cc.FrameSimulator(circ, noise).sample(20_000, 3)
    bits = np.hstack([det, obs]).astype(np.uint8)
    single = bits[bits.sum(axis=1) > 0]
    seen = {bytes(r) for r in single}
    # rare multi-fault words aside, most observed words are DEM columns
    hits = sum(1 for r in single if bytes(r) in sigs)
    assert hits >= 0.9 * len(single) and len(seen & sigs) > 0


def test_dem_priors_and_text(hgp13):
    circ = cc.build_memory_experiment(ls.minimal_lrc(hgp13, rng_seed=0), "Z", rounds=1)
    dem = cc.build_dem(circ, cc.NoiseBinding(1e-3))
    assert dem.H.shape == (len(circ.detectors), dem.num_mechanisms)
    assert np.all((dem.priors > 0) & (dem.priors < 0.5))
    line = cc.dem_text(dem).splitlines()[0]
    assert line.startswith("error(0.") and " D" in line
    assert 0 < dem.density() < 1


def test_estimated_circuit_distance_bounds_exact(hgp13):
    circ = cc.build_memory_experiment(ls.minimal_lrc(hgp13, rng_seed=0), "Z", rounds=3)
    dem = cc.build_dem(circ, cc.NoiseBinding(1e-3))
    exact = cc.exact_circuit_distance(dem, w_max=4)
    est = cc.estimate_circuit_distance(dem)
    assert exact.weight == 3
    assert est.weight >= exact.weight
    assert dec.is_valid_witness(dem.H, dem.L, np.zeros(dem.num_mechanisms, dtype=np.uint8), est.witness)
