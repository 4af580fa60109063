"""Sparse undirected graph storage, Matrix Market IO, synthetic generators,
and the degree / two-hop quantities the similarity estimators are built on."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BoundsError, ConfigError, GraphFormatError, ResourceLimitError
from .rng import generator

DEFAULT_NNZ_BUDGET = 50_000_000
DEFAULT_MAX_GADGET_NODES = 1_000_000


@dataclass(frozen=True)
class SparseGraph:
    """Canonical CSR adjacency of an undirected integer-weighted graph.

    Column indices are strictly increasing within each row, every stored
    weight is >= 1, and entry (u, v) is stored iff (v, u) is stored with the
    same weight. Instances are immutable and safe to share across threads.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.degrees is None:
            deg = np.add.reduceat(
                np.append(self.weights, 0),
                np.minimum(self.row_offsets[:-1], len(self.weights)),
            )
            deg[self.row_offsets[:-1] == self.row_offsets[1:]] = 0
            object.__setattr__(self, "degrees", deg.astype(np.int64))

    @property
    def nnz(self) -> int:
        return len(self.col_indices)

    def neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self.col_indices[self.row_offsets[u]:self.row_offsets[u + 1]]

    def neighbor_weights(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self.weights[self.row_offsets[u]:self.row_offsets[u + 1]]

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise BoundsError(f"node id {u} outside [0, {self.n})")

    def to_csr(self, dtype=np.float64) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.weights.astype(dtype), self.col_indices, self.row_offsets),
            shape=(self.n, self.n),
        )

    def is_binary(self) -> bool:
        return bool(np.all(self.weights == 1)) if self.nnz else True

    def validate(self) -> None:
        """Re-check every structural invariant; raises GraphFormatError."""
        ro, ci, w = self.row_offsets, self.col_indices, self.weights
        if ro[0] != 0 or ro[-1] != len(ci) or len(ro) != self.n + 1:
            raise GraphFormatError("row offsets inconsistent with entry count")
        if np.any(np.diff(ro) < 0):
            raise GraphFormatError("row offsets not nondecreasing")
        if len(w) != len(ci):
            raise GraphFormatError("weights misaligned with column indices")
        if self.nnz and np.any(w < 1):
            raise GraphFormatError("stored weights must be >= 1")
        for u in range(self.n):
            row = ci[ro[u]:ro[u + 1]]
            if len(row) and (np.any(np.diff(row) <= 0) or row[0] < 0 or row[-1] >= self.n):
                raise GraphFormatError(f"row {u} not strictly increasing in-range")
        csr = self.to_csr(np.int64)
        if (csr != csr.T).nnz != 0:
            raise GraphFormatError("adjacency not symmetric")
        recomputed = np.asarray(csr.sum(axis=1)).ravel()
        if not np.array_equal(recomputed, self.degrees):
            raise GraphFormatError("cached degrees disagree with row sums")


def from_coo(n: int, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray | None = None,
             duplicates: str = "sum") -> SparseGraph:
    """Build a canonical SparseGraph from (already symmetric) coordinate data.

    duplicates: "sum" adds repeated entries, "binary" collapses them to 1.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if weights is None:
        weights = np.ones(len(rows), dtype=np.int64)
    coo = sp.coo_matrix((np.asarray(weights, dtype=np.int64), (rows, cols)), shape=(n, n))
    csr = coo.tocsr()
    csr.sum_duplicates()
    if duplicates == "binary":
        csr.data[:] = 1
    elif duplicates != "sum":
        raise ConfigError(f"unknown duplicate policy {duplicates!r}")
    csr.sort_indices()
    csr.eliminate_zeros()
    return SparseGraph(
        n=n,
        row_offsets=csr.indptr.astype(np.int64),
        col_indices=csr.indices.astype(np.int64),
        weights=csr.data.astype(np.int64),
    )


@dataclass(frozen=True)
class DegreeClassConfig:
    """Thresholds splitting nodes into a low-degree and a high-degree class.

    Low-degree nodes have degree <= c; high-degree nodes have degree >=
    gamma^2 * c * q where q is the projection dimension.
    """

    c: int
    gamma: float
    q: int

    def __post_init__(self):
        if self.c < 1:
            raise ConfigError("c must be a positive integer")
        if self.gamma < 1:
            raise ConfigError("gamma must be >= 1")
        if self.q < 1:
            raise ConfigError("q must be >= 1")

    @property
    def high_threshold(self) -> float:
        return self.gamma ** 2 * self.c * self.q


def degree_classes(g: SparseGraph, cfg: DegreeClassConfig) -> tuple[np.ndarray, np.ndarray]:
    """Node ids with degree <= c and node ids with degree >= gamma^2*c*q."""
    low = np.flatnonzero(g.degrees <= cfg.c)
    high = np.flatnonzero(g.degrees >= cfg.high_threshold)
    return low, high


def two_hop(g: SparseGraph, u: int, v: int) -> int:
    """Weighted count of length-2 paths between u and v (dot of adjacency rows)."""
    g._check_node(u)
    g._check_node(v)
    cu, wu = g.neighbors(u), g.neighbor_weights(u)
    cv, wv = g.neighbors(v), g.neighbor_weights(v)
    if len(cu) > len(cv):
        cu, wu, cv, wv = cv, wv, cu, wu
    pos = np.searchsorted(cv, cu)
    pos[pos == len(cv)] = 0
    hit = cv[pos] == cu
    return int(np.dot(wu[hit], wv[pos[hit]]))


def gamma(g: SparseGraph, mode: str = "exact", nnz_budget: int = DEFAULT_NNZ_BUDGET) -> float:
    """Largest ratio two_hop(u, v) / degree(v) over all node pairs.

    Equals 1.0 on any binary graph, which "binary_shortcut" returns without
    forming the two-hop structure. Exact mode multiplies the adjacency by
    itself and is guarded by an intermediate-product budget.
    """
    if g.nnz == 0:
        raise ConfigError("gamma undefined on graphs without edges")
    if mode == "binary_shortcut":
        if not g.is_binary():
            raise ConfigError("binary_shortcut requires all edge weights equal to 1")
        return 1.0
    if mode != "exact":
        raise ConfigError(f"unknown gamma mode {mode!r}")
    row_nnz = np.diff(g.row_offsets)
    est_products = int(row_nnz[g.col_indices].sum())
    if est_products > nnz_budget:
        raise ResourceLimitError(
            f"exact gamma needs ~{est_products} intermediate products "
            f"(budget {nnz_budget}); use binary_shortcut or supply gamma"
        )
    a = g.to_csr(np.int64)
    two = (a @ a).tocoo()
    if two.nnz == 0:
        raise ConfigError("gamma undefined: no two-hop paths")
    ratios = two.data / g.degrees[two.col]
    return float(ratios.max())


# -- Matrix Market -----------------------------------------------------------

_MM_HEADER = "%%MatrixMarket"


def load_matrix_market(path, symmetrize: bool = False) -> SparseGraph:
    """Read a coordinate-format Matrix Market file into a canonical graph.

    Pattern entries give a binary graph (duplicates collapse to weight 1);
    integer entries are summed. "symmetric" storage mirrors off-diagonal
    entries; "general" input must either already be symmetric or be loaded
    with symmetrize=True, which inserts both directions of every entry.
    """
    with open(path, "rt", encoding="ascii") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) < 5 or parts[0] != _MM_HEADER or parts[1].lower() != "matrix":
            raise GraphFormatError(f"line 1: not a MatrixMarket matrix header: {header.strip()!r}")
        layout, fmt, symmetry = parts[2].lower(), parts[3].lower(), parts[4].lower()
        if layout != "coordinate":
            raise GraphFormatError(f"line 1: unsupported layout {layout!r} (need coordinate)")
        if fmt not in ("pattern", "integer"):
            raise GraphFormatError(f"line 1: unsupported field {fmt!r} (need pattern or integer)")
        if symmetry not in ("general", "symmetric"):
            raise GraphFormatError(f"line 1: unsupported symmetry {symmetry!r}")

        lineno = 1
        size_line = None
        for line in fh:
            lineno += 1
            if line.startswith("%") or not line.strip():
                continue
            size_line = line
            break
        if size_line is None:
            raise GraphFormatError("missing size line")
        try:
            nrows, ncols, nnz = (int(tok) for tok in size_line.split())
        except ValueError:
            raise GraphFormatError(f"line {lineno}: malformed size line {size_line.strip()!r}") from None
        if nrows != ncols:
            raise GraphFormatError(f"line {lineno}: adjacency must be square, got {nrows}x{ncols}")

        want = 2 if fmt == "pattern" else 3
        us = np.empty(nnz, dtype=np.int64)
        vs = np.empty(nnz, dtype=np.int64)
        ws = np.ones(nnz, dtype=np.int64)
        k = 0
        for line in fh:
            lineno += 1
            if line.startswith("%") or not line.strip():
                continue
            toks = line.split()
            if len(toks) != want:
                raise GraphFormatError(f"line {lineno}: expected {want} fields, got {len(toks)}")
            try:
                i, j = int(toks[0]), int(toks[1])
                w = int(toks[2]) if want == 3 else 1
            except ValueError:
                raise GraphFormatError(f"line {lineno}: non-integer entry {line.strip()!r}") from None
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise BoundsError(f"line {lineno}: entry ({i}, {j}) outside declared {nrows}x{ncols}")
            if w < 0:
                raise GraphFormatError(f"line {lineno}: negative weight {w}")
            if k >= nnz:
                raise GraphFormatError(f"line {lineno}: more entries than declared ({nnz})")
            us[k], vs[k], ws[k] = i - 1, j - 1, w
            k += 1
        if k != nnz:
            raise GraphFormatError(f"declared {nnz} entries but found {k}")

    keep = ws > 0
    us, vs, ws = us[keep], vs[keep], ws[keep]
    return _assemble(nrows, us, vs, ws, fmt, symmetry, symmetrize)


def _assemble(n, us, vs, ws, fmt, symmetry, symmetrize):
    if symmetry == "symmetric" or symmetrize:
        off = us != vs
        rows = np.concatenate([us, vs[off]])
        cols = np.concatenate([vs, us[off]])
        wts = np.concatenate([ws, ws[off]])
    else:
        rows, cols, wts = us, vs, ws
    g = from_coo(n, rows, cols, wts, duplicates="binary" if fmt == "pattern" else "sum")
    if symmetry == "general" and not symmetrize:
        csr = g.to_csr(np.int64)
        if (csr != csr.T).nnz != 0:
            raise GraphFormatError(
                "general-storage input is not symmetric; reload with symmetrize=True"
            )
    return g


def save_matrix_market(g: SparseGraph, path) -> None:
    """Write canonical form: general storage, both directions, sorted by (row, col)."""
    with open(path, "wt", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate integer general\n")
        fh.write(f"{g.n} {g.n} {g.nnz}\n")
        for u in range(g.n):
            start, stop = g.row_offsets[u], g.row_offsets[u + 1]
            for e in range(start, stop):
                fh.write(f"{u + 1} {g.col_indices[e] + 1} {g.weights[e]}\n")


# -- Generators ---------------------------------------------------------------


def generate_erdos_renyi(n: int, p: float, seed: int) -> SparseGraph:
    """G(n, p) with a fixed seed; identical seeds give identical edge sets."""
    if n < 1:
        raise ConfigError("n must be positive")
    if not 0 < p < 1:
        raise ConfigError("p must lie in (0, 1)")
    rng = generator(seed, 0)
    rows, cols = [], []
    for u in range(n - 1):
        mask = rng.random(n - u - 1) < p
        nbrs = np.flatnonzero(mask) + u + 1
        rows.append(np.full(len(nbrs), u, dtype=np.int64))
        cols.append(nbrs.astype(np.int64))
    u = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    v = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    return from_coo(n, np.concatenate([u, v]), np.concatenate([v, u]), duplicates="binary")


def _powerlaw_ints(rng: np.random.Generator, exponent: float, lo: int, hi: int,
                   count: int) -> np.ndarray:
    ks = np.arange(lo, hi + 1)
    pmf = ks.astype(np.float64) ** (-exponent)
    pmf /= pmf.sum()
    cdf = np.cumsum(pmf)
    return ks[np.searchsorted(cdf, rng.random(count))]


def generate_powerlaw(n: int, exponent: float, seed: int, min_degree: int = 1) -> SparseGraph:
    """Configuration-model pairing of a truncated power-law degree sequence.

    Degrees are drawn from P(d = k) proportional to k^(-exponent) on
    [min_degree, n - 1]; an odd stub total is fixed by incrementing one stub.
    Multi-edges collapse to weight 1 and self-loops are dropped, so realised
    degrees can fall slightly below their targets.
    """
    if exponent <= 1:
        raise ConfigError("exponent must exceed 1")
    if n < 2:
        raise ConfigError("n must be at least 2")
    rng = generator(seed, 1)
    deg = _powerlaw_ints(rng, exponent, min_degree, n - 1, n).astype(np.int64)
    if deg.sum() % 2 == 1:
        deg[0] += 1
    stubs = np.repeat(np.arange(n, dtype=np.int64), deg)
    rng.shuffle(stubs)
    u, v = stubs[0::2], stubs[1::2]
    keep = u != v
    u, v = u[keep], v[keep]
    return from_coo(n, np.concatenate([u, v]), np.concatenate([v, u]), duplicates="binary")


def generate_powerlaw_hubs(n: int, exponent: float, seed: int, leaf_fraction: float = 0.35,
                           n_leaf_hubs: int = 16, n_cohort_hubs: int | None = None,
                           min_degree: int = 16, cohort_size: tuple[int, int] = (50, 90),
                           zipf: float = 1.0) -> SparseGraph:
    """Clustered power-law graph: leaf stars plus hub-sharing cohorts.

    Three node blocks, in id order: hubs, leaves, cohort members. Each leaf
    attaches to one leaf-hub drawn from a Zipf weight, so leaves sharing a
    hub have identical adjacency rows. Cohort members are partitioned into
    cohorts that share a uniformly chosen set of cohort-hubs whose size is
    drawn from a power law with the given exponent on [min_degree,
    n_cohort_hubs], giving member degrees the same power-law tail. The hub
    sharing creates the large common-neighbourhood overlaps that make
    ranking experiments behave like real web graphs.
    """
    if exponent <= 1:
        raise ConfigError("exponent must exceed 1")
    n_cohort_hubs = n_cohort_hubs if n_cohort_hubs is not None else max(32, n // 40)
    n_hubs = n_leaf_hubs + n_cohort_hubs
    n_leaves = int(leaf_fraction * n)
    if n_hubs + n_leaves >= n:
        raise ConfigError("hub and leaf blocks leave no cohort members")
    if min_degree > n_cohort_hubs:
        raise ConfigError("min_degree cannot exceed the number of cohort hubs")
    rng = generator(seed, 2)
    leaf_hubs = np.arange(n_leaf_hubs, dtype=np.int64)
    members = np.arange(n_hubs + n_leaves, n, dtype=np.int64)

    w = 1.0 / np.arange(1, n_leaf_hubs + 1) ** zipf
    leaf_hub = rng.choice(leaf_hubs, size=n_leaves, p=w / w.sum())
    src = [np.arange(n_hubs, n_hubs + n_leaves, dtype=np.int64)]
    dst = [leaf_hub]

    ks = np.arange(min_degree, n_cohort_hubs + 1)
    pmf = ks.astype(np.float64) ** (-exponent)
    pmf /= pmf.sum()
    cdf = np.cumsum(pmf)
    pos = 0
    while pos < len(members):
        r = int(rng.integers(cohort_size[0], cohort_size[1]))
        cohort = members[pos:pos + r]
        pos += r
        k = int(ks[np.searchsorted(cdf, rng.random())])
        chosen = n_leaf_hubs + rng.choice(n_cohort_hubs, size=k, replace=False)
        src.append(np.repeat(cohort, k))
        dst.append(np.tile(np.sort(chosen), len(cohort)))
    u = np.concatenate(src)
    v = np.concatenate(dst)
    return from_coo(n, np.concatenate([u, v]), np.concatenate([v, u]), duplicates="binary")


def generate_flip_gadget(d_u: int, d_v: int,
                         max_nodes: int = DEFAULT_MAX_GADGET_NODES) -> SparseGraph:
    """Hub u with d_u private leaves and node v with d_v private leaves.

    u and v are non-adjacent and share no neighbors, so two_hop(u, v) = 0.
    Node ids: u = 0, v = 1, u's leaves [2, 2 + d_u), then v's leaves.
    """
    if d_u < 1 or d_v < 1:
        raise ConfigError("d_u and d_v must be >= 1")
    n = d_u + d_v + 2
    if n > max_nodes:
        raise ResourceLimitError(f"gadget needs {n} nodes, budget {max_nodes}")
    u_leaves = np.arange(2, 2 + d_u, dtype=np.int64)
    v_leaves = np.arange(2 + d_u, n, dtype=np.int64)
    rows = np.concatenate([np.zeros(d_u, dtype=np.int64), np.ones(d_v, dtype=np.int64)])
    cols = np.concatenate([u_leaves, v_leaves])
    return from_coo(n, np.concatenate([rows, cols]), np.concatenate([cols, rows]),
                    duplicates="binary")


_GENERATORS = {
    "erdos_renyi": generate_erdos_renyi,
    "powerlaw": generate_powerlaw,
    "powerlaw_hubs": generate_powerlaw_hubs,
    "flip_gadget": generate_flip_gadget,
}


def generate(kind: str, **params) -> SparseGraph:
    """Dispatch to one of the named synthetic generators."""
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise ConfigError(f"unknown generator kind {kind!r}; "
                          f"expected one of {sorted(_GENERATORS)}") from None
    return fn(**params)
