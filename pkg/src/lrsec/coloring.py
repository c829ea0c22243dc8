"""Proper edge colourings of bipartite Tanner graphs.

A Tanner graph block is given as a binary matrix: row ``i`` (a check) and
column ``j`` (a qubit) are joined by an edge wherever the entry is 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ._validation import check_binary_matrix
from .exceptions import DimensionError, ImproperColoringError

__all__ = [
    "EdgeColoring",
    "edges_of",
    "max_degree",
    "minimal_coloring",
    "concentrated_coloring",
    "permute_colors",
    "enumerate_permutation_tuples",
    "enumerate_candidate_tuples",
    "dump_coloring",
]


@dataclass(frozen=True, eq=False)
class EdgeColoring:
    """Colour index (0-based) for each edge of a bipartite graph.

    ``edges[e] = (check, qubit)`` in row-major order of the source matrix.
    """

    edges: np.ndarray
    colors: np.ndarray
    num_colors: int
    shape: tuple

    def __post_init__(self):
        self.edges.setflags(write=False)
        self.colors.setflags(write=False)

    def validate(self):
        """Raise :class:`ImproperColoringError` unless the colouring is proper."""
        if self.colors.size and (self.colors.min() < 0 or self.colors.max() >= self.num_colors):
            raise ImproperColoringError("colour index out of range")
        for side in (0, 1):
            keys = self.edges[:, side].astype(np.int64) * max(self.num_colors, 1) + self.colors
            if np.unique(keys).size != keys.size:
                raise ImproperColoringError(
                    f"two edges at the same {'check' if side == 0 else 'qubit'} share a colour")
        return self

    def class_sizes(self):
        return np.bincount(self.colors, minlength=self.num_colors)

    def color_map(self):
        """Dict ``(check, qubit) -> colour``."""
        return {(int(i), int(j)): int(c) for (i, j), c in zip(self.edges, self.colors)}

    def key(self):
        return self.colors.tobytes()

    def __eq__(self, other):
        return (isinstance(other, EdgeColoring) and self.shape == other.shape
                and self.num_colors == other.num_colors
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.colors, other.colors))

    def __hash__(self):
        return hash((self.shape, self.num_colors, self.key()))


def edges_of(block):
    block = check_binary_matrix(block, "block")
    return np.argwhere(block).astype(np.int64)


def max_degree(block):
    block = check_binary_matrix(block, "block")
    if block.size == 0:
        return 0
    return int(max(block.sum(axis=1).max(), block.sum(axis=0).max()))


def minimal_coloring(block, rng_seed=None):
    """Colour the edges with exactly ``max_degree(block)`` colours.

    Edges are inserted in a seed-shuffled order; when the free colours at the
    two endpoints differ, the alternating two-colour path from the qubit end
    is swapped first (Konig's argument, valid because the graph is bipartite).
    """
    block = check_binary_matrix(block, "block")
    edges = edges_of(block)
    delta = max_degree(block)
    rows, cols = block.shape
    # at[side][vertex, colour] = edge index or -1
    at = [np.full((rows, max(delta, 1)), -1, dtype=np.int64),
          np.full((cols, max(delta, 1)), -1, dtype=np.int64)]
    colors = np.full(len(edges), -1, dtype=np.int64)
    order = np.random.default_rng(rng_seed).permutation(len(edges))
    for e in order:
        u, v = edges[e]
        a = int(np.flatnonzero(at[0][u] < 0)[0])
        b = int(np.flatnonzero(at[1][v] < 0)[0])
        if at[1][v, a] >= 0:
            # path from v alternating a, b, a, ... never returns to u
            path = []
            side, vert, col = 1, v, a
            while True:
                f = at[side][vert, col]
                if f < 0:
                    break
                path.append(f)
                side ^= 1
                vert = edges[f][side]
                col = b if col == a else a
            for f in path:
                fu, fv = edges[f]
                c = colors[f]
                at[0][fu, c] = -1
                at[1][fv, c] = -1
            for f in path:
                fu, fv = edges[f]
                c = b if colors[f] == a else a
                colors[f] = c
                at[0][fu, c] = f
                at[1][fv, c] = f
        colors[e] = a
        at[0][u, a] = e
        at[1][v, a] = e
    return EdgeColoring(edges, colors, delta, block.shape).validate()


def concentrated_coloring(block):
    """Colour 0 is a maximum matching, colour 1 a maximum matching of the rest, and so on."""
    block = check_binary_matrix(block, "block")
    edges = edges_of(block)
    rows, cols = block.shape
    colors = np.full(len(edges), -1, dtype=np.int64)
    index = {(int(i), int(j)): e for e, (i, j) in enumerate(edges)}
    remaining = block.copy()
    c = 0
    while remaining.any():
        match = maximum_bipartite_matching(csr_matrix(remaining), perm_type="column")
        for i in range(rows):
            j = match[i]
            if j >= 0:
                colors[index[(i, int(j))]] = c
                remaining[i, j] = 0
        c += 1
    return EdgeColoring(edges, colors, c, block.shape).validate()


def permute_colors(coloring, perm):
    """Relabel colour ``c`` as ``perm[c]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (coloring.num_colors,) or sorted(perm.tolist()) != list(range(coloring.num_colors)):
        raise DimensionError(f"perm must be a permutation of 0..{coloring.num_colors - 1}")
    return EdgeColoring(coloring.edges, perm[coloring.colors] if coloring.colors.size else coloring.colors.copy(),
                        coloring.num_colors, coloring.shape)


def enumerate_permutation_tuples(sizes, cap, rng_seed=None):
    """Distinct tuples of permutations, one per colour count in ``sizes``.

    Exhaustive (in lexicographic order) when the product of factorials is at
    most ``cap``; otherwise ``cap`` tuples drawn uniformly without replacement.
    The identity tuple is always first.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    total = math.prod(math.factorial(s) for s in sizes)
    if total <= cap:
        yield from itertools.product(*(itertools.permutations(range(s)) for s in sizes))
        return
    rng = np.random.default_rng(rng_seed)
    seen = set()
    ident = tuple(tuple(range(s)) for s in sizes)
    seen.add(ident)
    yield ident
    while len(seen) < cap:
        tup = tuple(tuple(rng.permutation(s).tolist()) for s in sizes)
        if tup not in seen:
            seen.add(tup)
            yield tup


def enumerate_candidate_tuples(colorings, cap, rng_seed=None):
    """Permuted copies of a tuple of colourings (see :func:`enumerate_permutation_tuples`)."""
    sizes = [c.num_colors for c in colorings]
    for perms in enumerate_permutation_tuples(sizes, cap, rng_seed):
        yield tuple(permute_colors(c, p) for c, p in zip(colorings, perms))


def dump_coloring(coloring):
    """One ``check qubit colour`` line per edge."""
    return "".join(f"{i} {j} {c}\n" for (i, j), c in zip(coloring.edges, coloring.colors))
