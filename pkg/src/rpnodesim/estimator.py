"""Scikit-learn style transformer wrapping the graph projection."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ConfigError, GraphFormatError
from .graph import SparseGraph, from_coo
from .projection import ProjectionConfig, embed, normalize_rows


def as_sparse_graph(X) -> SparseGraph:
    """Validate adjacency input: SparseGraph, scipy sparse, or square array.

    The matrix must be square and symmetric with nonnegative integer
    weights; anything else is rejected rather than coerced.
    """
    if isinstance(X, SparseGraph):
        return X
    if sp.issparse(X):
        coo = X.tocoo()
    else:
        arr = np.asarray(X)
        if arr.ndim != 2:
            raise GraphFormatError("adjacency must be two-dimensional")
        coo = sp.coo_matrix(arr)
    if coo.shape[0] != coo.shape[1]:
        raise GraphFormatError(f"adjacency must be square, got {coo.shape}")
    data = coo.data
    if np.any(data < 0):
        raise GraphFormatError("adjacency weights must be nonnegative")
    if not np.allclose(data, np.round(data)):
        raise GraphFormatError("adjacency weights must be integers")
    g = from_coo(coo.shape[0], coo.row, coo.col, np.round(data).astype(np.int64))
    csr = g.to_csr(np.int64)
    if (csr != csr.T).nnz != 0:
        raise GraphFormatError("adjacency must be symmetric")
    return g


class GraphRandomProjection(BaseEstimator, TransformerMixin):
    """Project adjacency/transition polynomial rows to n_components dimensions.

    Parameters
    ----------
    n_components : target dimension q of the Gaussian projection.
    family : "A" projects adjacency rows, "T" row-stochastic transition rows.
    coeffs : polynomial coefficients for powers 1..l of the chosen matrix.
    seed : master seed; identical seeds reproduce the projection exactly.
    normalize : if True, rows of the output are scaled to unit norm
        (cosine-ready embeddings).

    Examples
    --------
    >>> import scipy.sparse as sp
    >>> a = sp.csr_matrix(np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    >>> emb = GraphRandomProjection(n_components=16, seed=7).fit_transform(a)
    >>> emb.shape
    (3, 16)
    """

    def __init__(self, n_components: int = 128, family: str = "A",
                 coeffs: tuple[float, ...] = (1.0,), seed: int = 0,
                 normalize: bool = False):
        self.n_components = n_components
        self.family = family
        self.coeffs = coeffs
        self.seed = seed
        self.normalize = normalize

    def _config(self) -> ProjectionConfig:
        return ProjectionConfig(family=self.family, coeffs=tuple(self.coeffs),
                                q=self.n_components, seed=self.seed)

    def fit(self, X, y=None):
        g = as_sparse_graph(X)
        self._config()  # validate parameters eagerly
        self.n_features_in_ = g.n
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError("call fit before transform")
        g = as_sparse_graph(X)
        if g.n != self.n_features_in_:
            raise ConfigError(
                f"graph has {g.n} nodes but the transformer was fitted with "
                f"{self.n_features_in_}"
            )
        emb = embed(g, self._config())
        if self.normalize:
            emb = normalize_rows(emb)
        return emb.data
