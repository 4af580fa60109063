import numpy as np
import pytest

from rpnodesim import from_coo


def graph_from_dense(a):
    """Build a SparseGraph from a dense symmetric integer matrix."""
    a = np.asarray(a)
    rows, cols = np.nonzero(a)
    return from_coo(a.shape[0], rows, cols, a[rows, cols])


def random_binary_graph(n, p, rng):
    """Symmetric binary G(n, p) built independently of the package generators."""
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return graph_from_dense((upper | upper.T).astype(int))


def random_weighted_graph(n, p, wmax, rng):
    upper = np.triu((rng.random((n, n)) < p) * rng.integers(1, wmax + 1, (n, n)), k=1)
    return graph_from_dense(upper + upper.T)


@pytest.fixture
def k3():
    return graph_from_dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


@pytest.fixture
def star5():
    a = np.zeros((6, 6), dtype=int)
    a[0, 1:] = 1
    a[1:, 0] = 1
    return graph_from_dense(a)


def dense_adjacency(g):
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for u in range(g.n):
        a[u, g.neighbors(u)] = g.neighbor_weights(u)
    return a
