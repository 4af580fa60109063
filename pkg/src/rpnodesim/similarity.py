"""Exact (graph-side) and projected (embedding-side) node similarities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DegenerateError
from .graph import SparseGraph, two_hop
from .projection import EmbeddingMatrix, poly_row


class SimilarityKind(Enum):
    DOT_A = "dotA"
    DOT_T = "dotT"
    COSINE = "cosine"

    @classmethod
    def parse(cls, text: str) -> "SimilarityKind":
        for kind in cls:
            if kind.value.lower() == text.strip().lower():
                return kind
        raise ConfigError(f"unknown similarity kind {text!r}; "
                          f"expected one of {[k.value for k in cls]}")

    @property
    def family(self) -> str | None:
        """Required embedding family; cosine accepts either."""
        if self is SimilarityKind.DOT_A:
            return "A"
        if self is SimilarityKind.DOT_T:
            return "T"
        return None


@dataclass(frozen=True)
class RelevancePair:
    u: int
    v: int
    kind: SimilarityKind
    exact: float
    projected: float
    degenerate: bool = False


_LINEAR = (1.0,)


def exact_similarity(g: SparseGraph, kind: SimilarityKind, u: int, v: int,
                     coeffs=_LINEAR, degenerate_as_zero: bool = False) -> float:
    """True similarity from graph structure.

    For the plain first-power polynomial this uses the closed forms
    n_uv (dotA), n_uv / (d_u d_v) (dotT) and n_uv / sqrt(n_uu n_vv)
    (cosine); other polynomials materialize the two rows.
    """
    coeffs = tuple(coeffs)
    if coeffs == _LINEAR:
        n_uv = two_hop(g, u, v)
        if kind is SimilarityKind.DOT_A:
            return float(n_uv)
        d_u, d_v = int(g.degrees[u]), int(g.degrees[v])
        if d_u == 0 or d_v == 0:
            if degenerate_as_zero:
                return 0.0
            raise DegenerateError(
                f"{kind.value} undefined with zero-degree node (d_{u}={d_u}, d_{v}={d_v})"
            )
        if kind is SimilarityKind.DOT_T:
            return n_uv / (d_u * d_v)
        n_uu = two_hop(g, u, u)
        n_vv = two_hop(g, v, v)
        return n_uv / math.sqrt(n_uu * n_vv)

    family = kind.family or "A"
    pu = poly_row(g, family, coeffs, u)
    pv = pu if v == u else poly_row(g, family, coeffs, v)
    dot = float(pu @ pv)
    if kind is not SimilarityKind.COSINE:
        return dot
    nu, nv = float(np.linalg.norm(pu)), float(np.linalg.norm(pv))
    if nu == 0.0 or nv == 0.0:
        if degenerate_as_zero:
            return 0.0
        raise DegenerateError("cosine undefined for a zero polynomial row")
    return dot / (nu * nv)


def projected_similarity(x: EmbeddingMatrix, kind: SimilarityKind, u: int, v: int) -> float:
    """Estimated similarity from embedding rows u and v."""
    _check_family(x, kind)
    xu, xv = x.data[u], x.data[v]
    dot = float(xu @ xv)
    if kind is not SimilarityKind.COSINE:
        return dot
    if x.normalized:
        if u in x.zero_rows or v in x.zero_rows:
            return 0.0
        if u == v:
            return 1.0
        return dot
    nu, nv = float(np.linalg.norm(xu)), float(np.linalg.norm(xv))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if u == v:
        return 1.0
    return dot / (nu * nv)


def _check_family(x: EmbeddingMatrix, kind: SimilarityKind) -> None:
    wanted = kind.family
    if wanted is not None and x.family != wanted:
        raise ConfigError(
            f"{kind.value} needs a family-{wanted} embedding, got family {x.family!r}"
        )
    if kind is not SimilarityKind.COSINE and x.normalized:
        raise ConfigError(f"{kind.value} needs an unnormalized embedding")


def exact_relevances(g: SparseGraph, kind: SimilarityKind, w: int,
                     candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized exact similarities of w against candidates (first power).

    Returns (values, degenerate_mask); degenerate entries are 0.
    """
    a = g.to_csr()
    aw = _adjacency_row(g, w)
    n_wc = np.asarray(a[candidates] @ aw, dtype=np.float64).ravel()
    if kind is SimilarityKind.DOT_A:
        return n_wc, np.zeros(len(candidates), dtype=bool)
    d = g.degrees.astype(np.float64)
    if kind is SimilarityKind.DOT_T:
        bad = (d[w] == 0) | (d[candidates] == 0)
        denom = np.where(bad, 1.0, d[w] * d[candidates])
        return np.where(bad, 0.0, n_wc / denom), bad
    rows = a[candidates]
    n_cc = np.asarray(rows.multiply(rows).sum(axis=1), dtype=np.float64).ravel()
    n_ww = float(aw @ aw)
    bad = (n_ww == 0) | (n_cc == 0)
    denom = np.where(bad, 1.0, np.sqrt(n_ww * n_cc))
    return np.where(bad, 0.0, n_wc / denom), bad


def relevance_row(g: SparseGraph, x: EmbeddingMatrix, kind: SimilarityKind,
                  w: int, candidates, coeffs=_LINEAR) -> list[RelevancePair]:
    """Exact and projected similarity of w against each candidate, one pass.

    Degenerate exact values (zero degree under dotT, zero row under cosine)
    are reported as 0 with the pair flagged, keeping batch ranking total.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if len(candidates) == 0:
        raise ConfigError("candidates must be nonempty")
    _check_family(x, kind)
    coeffs = tuple(coeffs)

    if coeffs == _LINEAR:
        exact, degen = exact_relevances(g, kind, w, candidates)
    else:
        exact = np.array([
            exact_similarity(g, kind, w, int(c), coeffs, degenerate_as_zero=True)
            for c in candidates
        ])
        degen = np.zeros(len(candidates), dtype=bool)

    xw = x.data[w]
    proj = x.data[candidates] @ xw
    if kind is SimilarityKind.COSINE and not x.normalized:
        nw = float(np.linalg.norm(xw))
        nc = np.linalg.norm(x.data[candidates], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            proj = np.where((nw > 0) & (nc > 0), proj / (nw * nc), 0.0)

    out = []
    for idx, c in enumerate(candidates):
        p = float(proj[idx])
        if kind is SimilarityKind.COSINE and int(c) == w:
            p = projected_similarity(x, kind, w, w)
        out.append(RelevancePair(u=w, v=int(c), kind=kind, exact=float(exact[idx]),
                                 projected=p, degenerate=bool(degen[idx])))
    return out


def _adjacency_row(g: SparseGraph, u: int) -> np.ndarray:
    row = np.zeros(g.n)
    row[g.neighbors(u)] = g.neighbor_weights(u)
    return row
