import numpy as np
import pytest
from scipy.stats import ks_2samp

from rpnodesim import (ConfigError, EmbeddingMatrix, GraphRandomProjection,
                       NumericError, ProjectionConfig, ResourceLimitError,
                       embed, embed_rows, from_coo, load_embedding,
                       normalize_rows, representation_cosine_sample,
                       representation_dot_sample, save_embedding)
from rpnodesim.projection import RowProjector, export_embedding_csv
from rpnodesim.rng import normal_rows, philox_key
from conftest import dense_adjacency, graph_from_dense, random_binary_graph


def dense_rt(seed, n, q):
    return normal_rows(philox_key(seed), 0, n, q) / np.sqrt(q)


def cfg(family="A", coeffs=(1.0,), q=16, seed=7):
    return ProjectionConfig(family=family, coeffs=coeffs, q=q, seed=seed)


def test_isolated_nodes_embed_to_zero():
    g = from_coo(4, [], [])
    x = embed(g, cfg())
    assert np.all(x.data == 0.0)


def test_embed_matches_dense_oracle():
    rng = np.random.default_rng(0)
    g = random_binary_graph(30, 0.2, rng)
    x = embed(g, cfg(q=24, seed=11))
    a = dense_adjacency(g).astype(float)
    assert np.allclose(x.data, a @ dense_rt(11, 30, 24), atol=1e-9)


def test_embed_pure_square_matches_dense_oracle(k3):
    x = embed(k3, cfg(coeffs=(0.0, 1.0), q=16, seed=3))
    a = dense_adjacency(k3).astype(float)
    assert np.allclose(x.data, (a @ a) @ dense_rt(3, 3, 16), atol=1e-9)


def test_embed_linearity(k3):
    a = dense_adjacency(k3).astype(float)
    rt = dense_rt(5, 3, 8)
    x = embed(k3, cfg(coeffs=(0.7, -2.0), q=8, seed=5))
    assert np.allclose(x.data, 0.7 * (a @ rt) - 2.0 * (a @ a @ rt), atol=1e-9)


def test_embed_transition_family():
    g = graph_from_dense([[0, 2, 0], [2, 0, 1], [0, 1, 0]])
    x = embed(g, cfg(family="T", q=12, seed=9))
    a = dense_adjacency(g).astype(float)
    t = a / a.sum(axis=1)[:, None]
    assert np.allclose(x.data, t @ dense_rt(9, 3, 12), atol=1e-12)


def test_embed_transition_zero_degree_row():
    g = from_coo(3, [0, 1], [1, 0])  # node 2 isolated
    x = embed(g, cfg(family="T", q=8, seed=2))
    assert np.all(x.data[2] == 0.0)


def test_embed_deterministic_and_thread_invariant():
    rng = np.random.default_rng(4)
    g = random_binary_graph(40, 0.15, rng)
    c = cfg(q=32, seed=21)
    x1 = embed(g, c)
    x2 = embed(g, c)
    x4 = embed(g, c, threads=4)
    assert np.array_equal(x1.data, x2.data)
    assert np.array_equal(x1.data, x4.data)


def test_embed_memory_budget():
    g = from_coo(3, [0, 1], [1, 0])
    with pytest.raises(ResourceLimitError):
        embed(g, cfg(q=1024), memory_budget=1000)


def test_embed_reports_nonfinite_power():
    # weights large enough that repeated powers overflow to infinity
    g = graph_from_dense([[0, 10 ** 15], [10 ** 15, 0]])
    with pytest.raises(NumericError, match="power"):
        embed(g, cfg(coeffs=(1.0,) * 40, q=4))


def test_embed_rows_matches_embed():
    rng = np.random.default_rng(17)
    g = random_binary_graph(25, 0.3, rng)
    c = cfg(q=20, seed=13, coeffs=(1.0, 0.5))
    x = embed(g, c)
    rows = embed_rows(g, c, [3, 17, 4])
    assert np.allclose(rows, x.data[[3, 17, 4]], atol=1e-12)


def test_projection_config_validation():
    with pytest.raises(ConfigError):
        ProjectionConfig(family="B", coeffs=(1.0,), q=4, seed=0)
    with pytest.raises(ConfigError):
        ProjectionConfig(family="A", coeffs=(), q=4, seed=0)
    with pytest.raises(ConfigError):
        ProjectionConfig(family="A", coeffs=(0.0, 0.0), q=4, seed=0)
    with pytest.raises(ConfigError):
        ProjectionConfig(family="A", coeffs=(1.0,), q=0, seed=0)


# -- normalize ------------------------------------------------------------------


def test_normalize_three_four_five():
    x = EmbeddingMatrix(data=np.array([[3.0, 4.0]]), normalized=False,
                        zero_rows=frozenset(), family="A")
    y = normalize_rows(x)
    assert np.allclose(y.data, [[0.6, 0.8]])


def test_normalize_zero_row_flagged():
    x = EmbeddingMatrix(data=np.array([[0.0, 0.0], [1.0, 0.0]]), normalized=False,
                        zero_rows=frozenset(), family="A")
    y = normalize_rows(x)
    assert y.zero_rows == {0}
    assert np.all(y.data[0] == 0.0)


def test_normalize_row_norms():
    rng = np.random.default_rng(3)
    x = EmbeddingMatrix(data=rng.standard_normal((10, 8)), normalized=False,
                        zero_rows=frozenset(), family="A")
    y = normalize_rows(x)
    norms = np.linalg.norm(y.data, axis=1)
    assert np.all((np.abs(norms - 1) < 1e-9) | (norms == 0))
    with pytest.raises(ConfigError):
        normalize_rows(y)


# -- distributional checks ---------------------------------------------------------


def test_projection_entry_distribution():
    # single self-looped node: embedding row u equals the u-th row of R^T
    g = from_coo(1, [0], [0], [1])
    q, seeds = 128, 200
    vals = np.concatenate([embed(g, cfg(q=q, seed=s)).data.ravel() for s in range(seeds)])
    assert abs(vals.mean()) < 4 / np.sqrt(vals.size * q)
    assert abs(vals.var() * q - 1.0) < 0.05


def test_cross_sampler_agreement(k3):
    # projected dot of a K3 pair vs the two-variable representation sampler
    q, trials = 64, 10_000
    projector = RowProjector(k3, "A", (1.0,), q, [0, 1])
    mc = np.empty(trials)
    for t in range(trials):
        rows = projector.rows(philox_key(99, t))
        mc[t] = rows[0] @ rows[1]
    rep = representation_dot_sample(0.5, np.sqrt(2), np.sqrt(2), q, seed=100, size=trials)
    stat = ks_2samp(mc, rep).statistic
    assert stat < 1.63 * np.sqrt(2 / trials)


def test_representation_dot_moments():
    vals = representation_dot_sample(1.0, 1.0, 1.0, 64, seed=5, size=100_000)
    assert abs(vals.mean() - 1.0) < 4 * np.sqrt(2 / 64) / np.sqrt(100_000) * 4
    half = representation_dot_sample(0.0, 1.0, 1.0, 64, seed=6, size=100_000)
    assert abs((half > 0).mean() - 0.5) < 0.01


def test_representation_cosine_range():
    vals = representation_cosine_sample(0.3, 32, seed=7, size=50_000)
    assert np.all(np.abs(vals) <= 1.0)
    assert abs(vals.mean() - 0.3) < 0.01


# -- persistence --------------------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    g = random_binary_graph(12, 0.4, rng)
    x = normalize_rows(embed(g, cfg(q=10, seed=4)))
    path = tmp_path / "emb.rpne"
    save_embedding(x, path)
    y = load_embedding(path)
    assert np.array_equal(x.data, y.data)
    assert y.normalized and y.zero_rows == x.zero_rows


def test_export_csv(tmp_path):
    x = EmbeddingMatrix(data=np.array([[1.5, -2.0]]), normalized=False,
                        zero_rows=frozenset(), family="A")
    path = tmp_path / "emb.csv"
    export_embedding_csv(x, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "node,dim0,dim1"
    assert lines[1].startswith("0,1.5,-2")


# -- sklearn-style estimator ----------------------------------------------------------


def test_estimator_fit_transform_matches_embed(k3):
    import scipy.sparse as sp
    est = GraphRandomProjection(n_components=16, family="A", seed=7)
    out = est.fit_transform(k3.to_csr(np.int64))
    assert out.shape == (3, 16)
    assert np.array_equal(out, embed(k3, cfg(q=16, seed=7)).data)
    dense = dense_adjacency(k3)
    assert np.array_equal(est.fit_transform(dense), out)
    assert np.array_equal(est.fit_transform(sp.coo_matrix(dense)), out)


def test_estimator_get_set_params(k3):
    est = GraphRandomProjection()
    params = est.get_params()
    assert params["n_components"] == 128 and params["family"] == "A"
    est.set_params(n_components=8, normalize=True, seed=3)
    out = est.fit_transform(k3)
    assert np.allclose(np.linalg.norm(out, axis=1), 1.0)


def test_estimator_rejects_bad_input(k3):
    from rpnodesim import GraphFormatError
    est = GraphRandomProjection(n_components=4)
    with pytest.raises(GraphFormatError):
        est.fit(np.array([[0, 1], [1, 0], [0, 0]]))      # not square
    with pytest.raises(GraphFormatError):
        est.fit(np.array([[0, 1], [2, 0]]))              # not symmetric
    est.fit(k3)
    with pytest.raises(ConfigError):
        est.transform(np.zeros((2, 2), dtype=int))       # node count mismatch


def test_estimator_requires_fit(k3):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        GraphRandomProjection().transform(k3)


def test_load_embedding_rejects_bad_magic(tmp_path):
    from rpnodesim import GraphFormatError
    path = tmp_path / "bad.rpne"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(GraphFormatError):
        load_embedding(path)


def test_cross_sampler_moment_agreement(k3):
    # two-variable sampler and matrix route agree on the first two moments
    q, trials = 64, 100_000
    projector = RowProjector(k3, "A", (1.0,), q, [0, 1])
    mc = np.empty(20_000)
    for t in range(len(mc)):
        rows = projector.rows(philox_key(55, t))
        mc[t] = rows[0] @ rows[1]
    rep = representation_dot_sample(0.5, np.sqrt(2), np.sqrt(2), q, seed=56, size=trials)
    assert abs(mc.mean() - rep.mean()) <= 0.02 * abs(rep.mean())
    assert abs(mc.var(ddof=1) - rep.var(ddof=1)) <= 0.05 * rep.var(ddof=1)
