"""Shared fixtures: a small hand-checked product instance plus seeded
random-instance helpers used across the suite."""

import random

import pytest

from spgemmhg import NonzeroStructure, strip_empty

# A 3x4 times 4x2 pattern worked out by hand; used everywhere a known
# answer is needed.  Its six multiplications are
#   (0,0,1) (0,2,0) (0,2,1) (1,0,1) (1,3,1) (2,1,0)
# and the output pattern is {(0,0), (0,1), (1,1), (2,0)}.
SAMPLE_A_COORDS = [(0, 0), (0, 2), (1, 0), (1, 3), (2, 1)]
SAMPLE_B_COORDS = [(0, 1), (1, 0), (2, 0), (2, 1), (3, 1)]
SAMPLE_TRIPLES = ((0, 0, 1), (0, 2, 0), (0, 2, 1),
                  (1, 0, 1), (1, 3, 1), (2, 1, 0))
SAMPLE_C_COORDS = [(0, 0), (0, 1), (1, 1), (2, 0)]


@pytest.fixture
def sample_a():
    return NonzeroStructure.from_coords(3, 4, SAMPLE_A_COORDS)


@pytest.fixture
def sample_b():
    return NonzeroStructure.from_coords(4, 2, SAMPLE_B_COORDS)


def random_structure(rng: random.Random, n_rows: int, n_cols: int,
                     density: float) -> NonzeroStructure:
    coords = [(i, j) for i in range(n_rows) for j in range(n_cols)
              if rng.random() < density]
    return NonzeroStructure.from_coords(n_rows, n_cols, coords)


def random_instance(rng: random.Random, max_dim: int = 8,
                    density: float = 0.4):
    """A random compatible (A, B) pair with no empty rows or columns.

    Some draws strip down to nothing; retry until one survives, so every
    returned pair is directly usable by the model builders.
    """
    while True:
        i = rng.randint(1, max_dim)
        k = rng.randint(1, max_dim)
        j = rng.randint(1, max_dim)
        s_a = random_structure(rng, i, k, density)
        s_b = random_structure(rng, k, j, density)
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if s_a.nnz > 0 and s_b.nnz > 0:
            return s_a, s_b


def boolean_matmul(s_a: NonzeroStructure, s_b: NonzeroStructure):
    """Oracle: output pattern by the naive triple loop over dense grids."""
    out = set()
    a = s_a.coord_set()
    b = s_b.coord_set()
    for i in range(s_a.n_rows):
        for j in range(s_b.n_cols):
            for k in range(s_a.n_cols):
                if (i, k) in a and (k, j) in b:
                    out.add((i, j))
                    break
    return out


def assert_isomorphic_by_labels(h_left, h_right):
    """Same hypergraph up to vertex order and net labels/order.

    Vertices must correspond one-to-one by label with equal weights; nets
    must agree as a multiset of (cost, set of pin labels).
    """
    assert len(h_left.vertices) == len(h_right.vertices)
    right_by_label = {v.label: v for v in h_right.vertices}
    assert len(right_by_label) == len(h_right.vertices)
    for v in h_left.vertices:
        other = right_by_label[v.label]
        assert (v.w_comp, v.w_mem) == (other.w_comp, other.w_mem), v.label

    def net_multiset(h):
        return sorted(
            (net.cost, tuple(sorted(str(h.vertices[p].label)
                                    for p in net.pins)))
            for net in h.nets)

    assert net_multiset(h_left) == net_multiset(h_right)
