import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lrsec import coloring as col
from lrsec.exceptions import DimensionError, ImproperColoringError


def blocks(max_rows=8, max_cols=8):
    shape = st.tuples(st.integers(1, max_rows), st.integers(1, max_cols))
    return shape.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


@given(blocks(), st.integers(0, 2**31))
def test_minimal_coloring_uses_max_degree_colours(block, seed):
    c = col.minimal_coloring(block, seed)
    c.validate()
    assert c.num_colors == col.max_degree(block)
    assert len(c.edges) == int(block.sum())


@given(blocks())
def test_concentrated_classes_are_nonincreasing_and_proper(block):
    c = col.concentrated_coloring(block)
    c.validate()
    sizes = c.class_sizes().tolist()
    assert sizes == sorted(sizes, reverse=True)
    assert c.num_colors >= col.max_degree(block)


def test_concentrated_first_class_is_a_maximum_matching():
    # path on 4 vertices: maximum matching has 2 edges
    block = np.array([[1, 1], [0, 1]], dtype=np.uint8)
    c = col.concentrated_coloring(block)
    assert c.class_sizes()[0] == 2


def test_validate_catches_clash():
    edges = np.array([[0, 0], [0, 1]])
    bad = col.EdgeColoring(edges, np.array([0, 0]), 1, (1, 2))
    with pytest.raises(ImproperColoringError):
        bad.validate()


@given(blocks(), st.data())
def test_permute_colors_preserves_properness_and_sizes(block, data):
    c = col.minimal_coloring(block, 0)
    perm = data.draw(st.permutations(list(range(c.num_colors))))
    p = col.permute_colors(c, perm)
    p.validate()
    assert sorted(p.class_sizes().tolist()) == sorted(c.class_sizes().tolist())
    for e in range(len(c.edges)):
        assert p.colors[e] == perm[c.colors[e]]


def test_permute_colors_rejects_non_permutation():
    c = col.minimal_coloring(np.eye(2, dtype=np.uint8), 0)
    with pytest.raises(DimensionError):
        col.permute_colors(c, [0, 0])


def test_permutation_tuples_exhaustive_and_capped():
    full = list(col.enumerate_permutation_tuples([2, 3], cap=100))
    assert len(full) == 2 * 6 and len(set(full)) == 12
    capped = list(col.enumerate_permutation_tuples([3, 3, 3], cap=50, rng_seed=1))
    assert len(capped) == 50 and len(set(capped)) == 50
    assert capped[0] == ((0, 1, 2),) * 3
    again = list(col.enumerate_permutation_tuples([3, 3, 3], cap=50, rng_seed=1))
    assert capped == again
    assert math.factorial(3) ** 3 > 50


def test_dump_coloring_lines():
    c = col.minimal_coloring(np.array([[1, 1]], dtype=np.uint8), 0)
    lines = col.dump_coloring(c).splitlines()
    assert len(lines) == 2 and {ln.split()[2] for ln in lines} == {"0", "1"}
