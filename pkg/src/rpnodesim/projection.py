"""Seeded Gaussian random projection of adjacency/transition-matrix polynomials.

The projection matrix R has i.i.d. N(0, 1/q) entries generated from a
counter-based field, so the embedding is a pure function of
(seed, graph, config) no matter how the computation is scheduled.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, GraphFormatError, NumericError, ResourceLimitError
from .graph import SparseGraph
from .rng import generator, normal_rows, philox_key

DEFAULT_MEMORY_BUDGET = 4 << 30  # bytes of dense panel storage
DEFAULT_ZERO_THRESHOLD = 1e-300

FAMILIES = ("A", "T")


@dataclass(frozen=True)
class ProjectionConfig:
    """Matrix family, polynomial coefficients (power 1 upward), dimension, seed."""

    family: str
    coeffs: tuple[float, ...]
    q: int
    seed: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ConfigError("coeffs must be nonempty")
        if all(c == 0.0 for c in self.coeffs):
            raise ConfigError("coeffs must not all be zero")
        if self.q < 1:
            raise ConfigError("q must be >= 1")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense row-major node embeddings plus normalization bookkeeping."""

    data: np.ndarray
    normalized: bool
    zero_rows: frozenset[int]
    family: str
    coeffs: tuple[float, ...] = (1.0,)
    seed: int = 0

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def q(self) -> int:
        return self.data.shape[1]

    def row(self, u: int) -> np.ndarray:
        return self.data[u]


def _scaled_inverse_degrees(g: SparseGraph) -> np.ndarray:
    deg = g.degrees
    with np.errstate(divide="ignore"):
        inv = np.where(deg > 0, 1.0 / deg, 0.0)
    return inv


def _projection_rows(seed: int, row_start: int, row_stop: int, q: int) -> np.ndarray:
    """Rows of R^T: the N(0, 1/q) field shared by every family and power."""
    return normal_rows(philox_key(seed), row_start, row_stop, q) / np.sqrt(q)


def embed(g: SparseGraph, cfg: ProjectionConfig, threads: int = 1,
          memory_budget: int = DEFAULT_MEMORY_BUDGET) -> EmbeddingMatrix:
    """Compute X = sum_j coeffs[j-1] * M^j R^T without densifying M^j.

    M is the adjacency (family "A") or the row-stochastic transition matrix
    (family "T", applied as on-the-fly row scaling; zero-degree rows stay
    zero). Deterministic and bit-identical for a fixed (seed, g, cfg)
    regardless of thread count.
    """
    n, q = g.n, cfg.q
    if 3 * n * q * 8 > memory_budget:
        raise ResourceLimitError(
            f"embedding needs ~{3 * n * q * 8} bytes of dense storage "
            f"(budget {memory_budget})"
        )
    m = g.to_csr()
    inv_deg = _scaled_inverse_degrees(g) if cfg.family == "T" else None
    rt = _projection_rows(cfg.seed, 0, n, q)

    def panel(col0: int, col1: int) -> np.ndarray:
        y = np.ascontiguousarray(rt[:, col0:col1])
        x = np.zeros_like(y)
        for power, alpha in enumerate(cfg.coeffs, start=1):
            y = m @ y
            if inv_deg is not None:
                y *= inv_deg[:, None]
            if not np.all(np.isfinite(y)):
                raise NumericError(f"non-finite values while accumulating power {power}")
            if alpha != 0.0:
                x += alpha * y
        return x

    if threads <= 1 or q < 2 * threads:
        data = panel(0, q)
    else:
        bounds = np.linspace(0, q, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: panel(b[0], b[1]), zip(bounds[:-1], bounds[1:])))
        data = np.concatenate(parts, axis=1)
    return EmbeddingMatrix(data=data, normalized=False, zero_rows=frozenset(),
                           family=cfg.family, coeffs=cfg.coeffs, seed=cfg.seed)


class RowProjector:
    """Projects a fixed set of polynomial rows under interchangeable keys.

    Prepares the dense polynomial rows and their combined support once, so
    repeated trials only regenerate the needed rows of R^T. Projections
    computed here match the corresponding rows of embed() for the key
    derived from the same seed.
    """

    def __init__(self, g: SparseGraph, family: str, coeffs, q: int, nodes):
        nodes = np.asarray(nodes, dtype=np.int64)
        prows = np.stack([poly_row(g, family, tuple(coeffs), int(u)) for u in nodes])
        supp = np.flatnonzero(np.any(prows != 0.0, axis=0))
        self.q = q
        self._coeff_rows = prows[:, supp]
        self._runs = [
            (int(r[0]), int(r[-1]) + 1)
            for r in np.split(supp, np.flatnonzero(np.diff(supp) != 1) + 1)
        ] if len(supp) else []
        self._n_nodes = len(nodes)
        self._sqrt_q = np.sqrt(q)

    def rows(self, key: np.ndarray) -> np.ndarray:
        """Embedding rows (len(nodes), q) under the given projection key."""
        if not self._runs:
            return np.zeros((self._n_nodes, self.q))
        rt = np.concatenate([normal_rows(key, lo, hi, self.q) for lo, hi in self._runs])
        rt /= self._sqrt_q
        return self._coeff_rows @ rt


def embed_rows(g: SparseGraph, cfg: ProjectionConfig, nodes) -> np.ndarray:
    """Rows of embed(g, cfg) for the given nodes, without the full matrix."""
    return RowProjector(g, cfg.family, cfg.coeffs, cfg.q, nodes).rows(philox_key(cfg.seed))


def poly_row(g: SparseGraph, family: str, coeffs, u: int) -> np.ndarray:
    """Dense row u of the matrix polynomial over A or T."""
    if family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}, got {family!r}")
    m = g.to_csr()
    inv_deg = _scaled_inverse_degrees(g) if family == "T" else None
    x = np.zeros(g.n)
    x[u] = 1.0
    out = np.zeros(g.n)
    for alpha in coeffs:
        if inv_deg is not None:
            x = x * inv_deg  # row-vector times D^-1 before A; A itself is symmetric
        x = m @ x
        out += alpha * x
    return out


def normalize_rows(x: EmbeddingMatrix, threshold: float = DEFAULT_ZERO_THRESHOLD) -> EmbeddingMatrix:
    """Divide each row by its Euclidean norm; zero near-zero rows and record them."""
    if x.normalized:
        raise ConfigError("embedding is already normalized")
    norms = np.linalg.norm(x.data, axis=1)
    zero = norms < threshold
    safe = np.where(zero, 1.0, norms)
    data = x.data / safe[:, None]
    data[zero] = 0.0
    return EmbeddingMatrix(data=data, normalized=True,
                           zero_rows=frozenset(int(i) for i in np.flatnonzero(zero)),
                           family=x.family, coeffs=x.coeffs, seed=x.seed)


def representation_dot_sample(rho: float, norm_x: float, norm_y: float, q: int,
                              seed: int, size: int = 1) -> np.ndarray:
    """Samples distributed exactly like the projected dot product (Rx, Ry).

    Uses the two-variable form ||x|| ||y|| (rho * C + M1 * sqrt(C) *
    sqrt(1 - rho^2)) / q with C chi-square(q) and M1 standard normal, which
    matches the matrix-based estimator in distribution and serves as an
    independent oracle for it.
    """
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if q < 1:
        raise DomainError("q must be >= 1")
    rng = generator(seed, 3)
    c = rng.chisquare(q, size=size)
    m1 = rng.standard_normal(size)
    vals = norm_x * norm_y * (rho * c + m1 * np.sqrt(c) * np.sqrt(1.0 - rho ** 2)) / q
    return vals


def representation_cosine_sample(rho: float, q: int, seed: int, size: int = 1) -> np.ndarray:
    """Samples distributed exactly like the projected cosine of a rho-pair."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if q < 2:
        raise DomainError("q must be >= 2")
    rng = generator(seed, 4)
    nn = np.sqrt(rng.chisquare(q, size=size))
    m1 = rng.standard_normal(size)
    rest = rng.chisquare(q - 1, size=size)
    s = 1.0 - rho ** 2
    t = rho * nn + m1 * np.sqrt(s)
    return t / np.sqrt(t ** 2 + s * rest)


# -- binary save/load ---------------------------------------------------------

_MAGIC = b"RPNE"
_VERSION = 1


def save_embedding(x: EmbeddingMatrix, path) -> None:
    """Flat binary layout: magic, version, n, q, normalized, zero rows, floats."""
    zero = sorted(x.zero_rows)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<QQB", x.n, x.q, 1 if x.normalized else 0))
        fh.write(struct.pack("<Q", len(zero)))
        if zero:
            fh.write(np.asarray(zero, dtype="<u8").tobytes())
        fh.write(np.ascontiguousarray(x.data, dtype="<f8").tobytes())


def load_embedding(path) -> EmbeddingMatrix:
    """Read the binary layout back; the file does not carry the matrix
    family, so loaded embeddings default to family "A"."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise GraphFormatError("not an embedding file (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise GraphFormatError(f"unsupported embedding version {version}")
        n, q, normalized = struct.unpack("<QQB", fh.read(17))
        (nzero,) = struct.unpack("<Q", fh.read(8))
        zero = np.frombuffer(fh.read(8 * nzero), dtype="<u8") if nzero else np.empty(0)
        data = np.frombuffer(fh.read(8 * n * q), dtype="<f8").reshape(n, q).copy()
    return EmbeddingMatrix(data=data, normalized=bool(normalized),
                           zero_rows=frozenset(int(i) for i in zero), family="A")


def export_embedding_csv(x: EmbeddingMatrix, path, max_rows: int = 10_000) -> None:
    """Plain CSV for small matrices; refuses to dump oversized embeddings."""
    if x.n > max_rows:
        raise ResourceLimitError(f"{x.n} rows exceed the CSV export cap ({max_rows})")
    header = "node," + ",".join(f"dim{j}" for j in range(x.q))
    body = np.column_stack([np.arange(x.n), x.data])
    fmt = ["%d"] + ["%.17g"] * x.q
    np.savetxt(path, body, delimiter=",", header=header, comments="", fmt=fmt)
