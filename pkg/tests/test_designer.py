import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrsec import designer as ds, lrcsched as ls, residual as res


def cand(index, dmin, tau, profile):
    return ds.RankedCandidate(index, ds.Metrics(dmin, tau, tuple(profile)), ())


def test_rank_rules():
    pool = [cand(0, 3, 0, (0, 0, 5)), cand(1, 4, 9, (0, 0, 0)), cand(2, 3, 0, (0, 0, 4)),
            cand(3, 3, 2, (0, 0, 1)), cand(4, 3, 0, (0, 0, 4))]
    ranked = ds.rank(pool)
    # larger delta_min first, then fewer idles, then lexicographic profile, then generation order
    assert [c.index for c in ranked] == [1, 2, 4, 0, 3]
    assert [c.rank for c in ranked] == [1, 2, 3, 4, 5]


@given(st.lists(st.tuples(st.integers(1, 5), st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=12))
def test_rank_is_sorted_and_stable(rows):
    pool = [cand(i, a, b, (c,)) for i, (a, b, c) in enumerate(rows)]
    ranked = ds.rank(pool)
    keys = [c.key() for c in ranked]
    assert keys == sorted(keys)


@pytest.fixture(scope="module")
def steane_design():
    from lrsec import codes
    return ds.LrcDesigner(partition="search", cap=50, rng_seed=0).fit(codes.builtin_code("steane"))


def test_steane_design_shape(steane_design):
    cands = steane_design.candidates_
    assert len(cands) == 50
    assert steane_design.best_ is cands[0]
    assert all(c.schedule.depth == 8 for c in cands[:3])


def test_profile_first_nonzero_is_delta_min(steane_design):
    for c in steane_design.candidates_:
        m = c.metrics
        nz = [u + 1 for u, v in enumerate(m.profile) if v]
        assert nz and nz[0] == m.delta_min


def test_fast_metrics_match_direct_metrics(steane_design):
    table = steane_design.table_
    for c in steane_design.candidates_[:10]:
        assert ds.compute_metrics(c.schedule, table) == c.metrics


def test_table_covers_all_lrc_residuals(steane_design):
    table = steane_design.table_
    table.misses = table.lookups = 0
    for c in steane_design.candidates_:
        ds.compute_metrics(c.schedule, table)
    assert table.lookups > 0 and table.misses == 0


def test_table_values_match_direct_distance(steane_design):
    table = steane_design.table_
    code = table.code
    sched = steane_design.best_.schedule
    for r in res.residual_set_for_schedule(sched):
        assert table.lookup(r.pauli, r.check, r.support) == res.residual_distance(code, r)


def test_rerank_identity_and_validation(steane_design):
    ranked = list(steane_design.candidates_)
    order = [c.index for c in ranked]
    out = ds.rerank_by_extended_distance(ranked, r=1)
    assert [c.index for c in out] == order
    assert out[0].metrics.d_ext is not None
    with pytest.raises(ValueError):
        ds.rerank_by_extended_distance(ranked, r=0)


def test_rerank_sorts_head_by_extended_distance(steane_design):
    out = ds.rerank_by_extended_distance(list(steane_design.candidates_), r=5)
    head = [c.metrics.d_ext for c in out[:5]]
    assert head == sorted(head, reverse=True)
    assert [c.rank for c in out] == list(range(1, len(out) + 1))


def test_design_report_columns(steane_design):
    text = ds.design_report(steane_design.candidates_, 2)
    lines = text.splitlines()
    assert lines[0] == "candidate_id,delta_min,tau_a,W_prefix,d_ext_bound,depth"
    assert len(lines) == 3


def test_bb_translation_sharing(gross):
    table = ds.ResidualTable(gross, distance=12)
    row = np.flatnonzero(gross.hx[0])
    shifted = ds._translation_map(gross)(0, tuple(row[:2]))
    assert shifted[0] == 0
    # every check's residual maps onto check 0
    k1 = table._key("X", 5, tuple(np.flatnonzero(gross.hx[5])[:2]))
    assert k1[1] == 0


@pytest.mark.parametrize("name", ["gross", "fb126"])
def test_translation_map_is_an_automorphism(name):
    from lrsec import codes
    code = codes.builtin_code(name)
    f = ds._translation_map(code)
    for H in (code.hx, code.hz):
        for g in range(0, H.shape[0], 7):
            base, moved = f(g, tuple(np.flatnonzero(H[g])))
            assert moved == tuple(np.flatnonzero(H[base]))


def test_gross_design_depth_and_delta(gross):
    d = ds.LrcDesigner(cap=20).fit(gross)
    assert d.best_.schedule.depth == 8
    assert d.best_.metrics.delta_min >= 10
    assert d.table_.misses == 0


def test_hgp_design_depth(hgp13):
    d = ds.LrcDesigner(cap=100).fit(hgp13)
    assert d.best_.schedule.depth == ls.predicted_depth(hgp13, d.partition_)
    assert d.best_.metrics.delta_min == 3
