import numpy as np
import pytest

from lrsec import circuits as cc, gross as gr, residual as res
from lrsec.exceptions import ImproperColoringError


@pytest.fixture(scope="module")
def geom(gross):
    return gr.BbGeometry(gross)


def test_check_qubits_match_matrices(gross, geom):
    for pauli, H in (("X", gross.hx), ("Z", gross.hz)):
        for g in range(geom.size):
            assert sorted(geom.check_qubits(pauli, g)) == sorted(np.flatnonzero(H[g]).tolist())


def test_check_qubit_labels_translate(geom):
    # the label order is preserved by a group translation
    for pauli in "XZ":
        base = geom.check_qubits(pauli, 0)
        for g in (1, 7, 40):
            moved = [geom.add(q % geom.size, geom.elem(g)) + (q // geom.size) * geom.size for q in base]
            assert moved == geom.check_qubits(pauli, g)


def test_geometry_rejects_other_families(steane):
    with pytest.raises(ValueError):
        gr.BbGeometry(steane)


def test_translation_colouring_is_proper(gross, geom):
    colours = gr.translation_colouring(geom)
    assert np.bincount(colours).tolist() == [24, 24, 24]
    for pauli in "XZ":
        assert gr.check_colouring_is_proper(gross, pauli, colours)
    assert not gr.check_colouring_is_proper(gross, "Z", np.zeros(geom.size, dtype=int))


def test_three_colour_scan_rejects_improper_colouring(gross, geom):
    with pytest.raises(ImproperColoringError):
        gr.gross_three_colour_scan(gross, colours=np.zeros(geom.size, dtype=int))


def test_residuals_for_class_use_labels(geom):
    rs = geom.residuals_for_class("X", 0, [(1, 2), (5, 6)])
    qs = geom.check_qubits("X", 0)
    assert [r.support for r in rs] == [tuple(sorted((qs[0], qs[1]))), tuple(sorted((qs[4], qs[5])))]


def test_single_scan_small_subset(gross):
    classes = res.ordering_classes(6)[:2]
    rows = gr.gross_single_check_scan(gross, 0, "X", gr.default_scan_estimator(t_row=5, t_prior=2), classes)
    assert [r.class_id for r in rows] == [0, 1]
    assert all(1 <= r.bound <= 12 and r.witness_weight == r.bound for r in rows)
    text = gr.scan_report(rows)
    assert text.splitlines()[0] == "class_id,residual_sets,bound,witness_weight,witness_support"


def test_colour_uniform_schedule_has_depth_eight(gross):
    sched = gr.find_schedule_for_residual_pattern(gross, {})
    assert sched is not None
    assert sched.depth == 8
    circ = cc.build_memory_experiment(sched, "Z", rounds=2)
    assert cc.check_deterministic(circ)


def test_colour_uniform_schedule_realizes_target(gross, geom):
    classes = res.ordering_classes(6)
    key = res.reduced_residual_sets(classes[1][0], tuple(range(1, 7)))
    sched = gr.find_schedule_for_residual_pattern(gross, {("Z", 0): key})
    assert sched is not None
    colours = gr.translation_colouring(geom)
    g = int(np.flatnonzero(colours == 0)[0])
    qs = geom.check_qubits("Z", g)
    order = [qs.index(q) + 1 for q in sched.orders("Z")[g]]
    assert res.reduced_residual_sets(order, tuple(range(1, 7))) == key
