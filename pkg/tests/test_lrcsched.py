import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lrsec import codes, coloring as col, lrcsched as ls
from lrsec.exceptions import CollisionError, ImproperColoringError


def nonzero_matrix(max_rows=6, max_cols=6):
    shape = st.tuples(st.integers(1, max_rows), st.integers(1, max_cols))
    return shape.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1))).filter(lambda m: m.any())


@given(nonzero_matrix(), nonzero_matrix(), st.integers(0, 1000))
def test_hgp_minimal_lrc_depth_formula(a, b, seed):
    code = codes.hgp(a, b)
    sched = ls.minimal_lrc(code, rng_seed=seed)
    assert sched.depth == ls.lrc_depth_formula(a, b)
    assert sched.depth >= ls.depth_lower_bound(code)
    assert not sched.is_interleaved()
    assert sched.commutation_valid()
    sched.audit(rounds=3)


@pytest.mark.parametrize("name, depth", [("hgp13", 6), ("gross", 8), ("fb126", 8), ("hgp625", 10)])
def test_builtin_lrc_depths(name, depth):
    code = codes.builtin_code(name)
    sched = ls.minimal_lrc(code, rng_seed=0)
    assert sched.depth == depth
    assert sched.depth == ls.predicted_depth(code, ls.Partition.natural(code))
    assert sched.depth >= ls.depth_lower_bound(code)


def test_lrc_timetable_windows(gross):
    s = ls.minimal_lrc(gross, rng_seed=0)
    assert (s.t1, s.t2) == (3, 3)
    assert set(s.x_prep) == {1} and set(s.x_meas) == {8}
    assert set(s.z_prep) == {-2} and set(s.z_meas) == {5}
    # X checks: left block before right block
    left = set(np.flatnonzero(gross.left).tolist())
    for order in s.orders("X") + s.orders("Z"):
        sides = [q in left for q in order]
        assert sides == sorted(sides, reverse=True)


def test_build_lrc_rejects_foreign_coloring(hgp13):
    part = ls.Partition.natural(hgp13)
    blocks = part.blocks(hgp13)
    cols = [col.minimal_coloring(b, 0) for b in blocks]
    cols[0] = col.minimal_coloring(blocks[1], 0)
    with pytest.raises(ImproperColoringError):
        ls.build_lrc(hgp13, part, cols)


def test_partition_search_steane(steane):
    part = ls.partition_search(steane, trials=200, rng_seed=0)
    assert ls.predicted_depth(steane, part) == 8
    sched = ls.minimal_lrc(steane, part, rng_seed=0)
    assert sched.depth == 8 and not sched.is_interleaved()


@given(st.integers(0, 10_000))
def test_random_schedules_valid_and_bounded(seed):
    code = codes.builtin_code("steane")
    s = ls.random_schedule(code, rng_seed=seed)
    s.audit()
    assert s.commutation_valid()
    assert s.depth >= ls.depth_lower_bound(code)
    v = ls.make_noninterleaved_variant(s)
    assert not v.is_interleaved() and v.orders("X") == s.orders("X") and v.orders("Z") == s.orders("Z")


def test_random_schedule_interleaving_filter(steane):
    s = ls.random_schedule(steane, rng_seed=3, want_interleaved=True)
    assert s.is_interleaved() and s.commutation_valid()
    s = ls.random_schedule(steane, rng_seed=3, want_interleaved=False)
    assert not s.is_interleaved()


def test_idle_counts():
    assert ls.check_idle_count([2, 3, 4]) == 0
    assert ls.check_idle_count([2, 5, 6]) == 2


def test_compacted_removes_leading_and_trailing_idles(steane):
    s = ls.schedule_from_orders(steane, [list(np.flatnonzero(r)) for r in steane.hx],
                                [list(np.flatnonzero(r)) for r in steane.hz])
    c = s.compacted()
    for cn, p, m in zip(c.x_cnots, c.x_prep, c.x_meas):
        assert p == cn[0][0] - 1 and m == cn[-1][0] + 1


def test_audit_catches_collision(hgp13):
    s = ls.minimal_lrc(hgp13, rng_seed=0)
    bad = ls.GenericSchedule(hgp13, [[(2, q) for _, q in c] for c in s.x_cnots], s.z_cnots,
                             s.x_prep, s.x_meas, s.z_prep, s.z_meas, s.period)
    with pytest.raises(CollisionError):
        bad.audit()


def test_dump_schedule_format(hgp13):
    s = ls.minimal_lrc(hgp13, rng_seed=0)
    lines = ls.dump_schedule(s).splitlines()
    kinds = {ln.split()[1] for ln in lines}
    assert kinds == {"R", "RX", "CX", "M", "MX"}
    steps = [int(ln.split()[0]) for ln in lines]
    assert steps == sorted(steps)
    assert sum(ln.split()[1] == "CX" for ln in lines) == int(hgp13.hx.sum() + hgp13.hz.sum())
