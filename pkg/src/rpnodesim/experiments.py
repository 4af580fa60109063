"""Monte-Carlo verification of the distributional theory, flip-rate
measurement, uniform-guarantee violation studies, and the stratified
NDCG ranking experiment."""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import kolmogi, ndtr

from . import __version__ as _pkg_version
from .errors import ConfigError, DegenerateError, NumericError, SamplingError
from .graph import SparseGraph, two_hop
from .projection import (ProjectionConfig, RowProjector, embed, normalize_rows,
                         poly_row)
from .rng import generator, philox_key
from .similarity import SimilarityKind, exact_similarity
from .theory import (FlipProbability, NormalParams, cosine_asymptotic,
                     dot_a_asymptotic, dot_t_asymptotic, flip_probability,
                     jl_min_q_cosine, jl_min_q_dot)

_FLOAT_FMT = "%.17g"


# -- report --------------------------------------------------------------------


@dataclass
class ExperimentReport:
    """Tabular experiment output with config metadata, rendered as CSV.

    Metadata is written as '#'-prefixed comment lines (sorted by key),
    followed by a header row and the data rows; floats carry 17 significant
    digits so identical runs give identical bytes. Every emitted row is
    prefixed with the experiment id and the master seed.
    """

    experiment: str
    columns: list[str]
    seed: int = 0
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ConfigError(f"row width {len(values)} != {len(self.columns)} columns")
        self.rows.append(tuple(values))

    @staticmethod
    def _render(value) -> str:
        if isinstance(value, (bool, np.bool_)):
            return "1" if value else "0"
        if isinstance(value, (float, np.floating)):
            return _FLOAT_FMT % value
        return str(value)

    def to_csv(self, out) -> None:
        meta = dict(self.metadata)
        meta.setdefault("experiment", self.experiment)
        meta.setdefault("seed", self.seed)
        meta.setdefault("version", _pkg_version)
        for key in sorted(meta):
            out.write(f"# {key} = {self._render(meta[key])}\n")
        out.write(",".join(["experiment", "seed"] + self.columns) + "\n")
        prefix = f"{self.experiment},{self.seed},"
        for row in self.rows:
            out.write(prefix + ",".join(self._render(v) for v in row) + "\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "wt", encoding="ascii", newline="\n") as fh:
            self.to_csv(fh)


# -- KS helpers ------------------------------------------------------------------


def ks_statistic(standardized: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov distance to the standard normal."""
    z = np.sort(np.asarray(standardized, dtype=np.float64))
    n = len(z)
    if n == 0:
        raise ConfigError("empty sample")
    cdf = ndtr(z)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def ks_critical(alpha: float, n: int) -> float:
    """Asymptotic critical value: reject at level alpha when D exceeds this."""
    return float(kolmogi(alpha)) / math.sqrt(n)


# -- NDCG -------------------------------------------------------------------------


def ndcg_at_k(true_rel, approx_rel, k: int) -> float:
    """Normalized discounted cumulative gain of the approximate ordering.

    Both sums use the TRUE relevances as gains: the numerator discounts
    them along the approximate top-k ordering, the denominator along the
    true top-k ordering. Ranks are 1-based with log2(rank + 1) discounts;
    ties break by ascending candidate index on both sides. A zero
    denominator (no relevant candidates) scores 1.0.
    """
    true_rel = np.asarray(true_rel, dtype=np.float64)
    approx_rel = np.asarray(approx_rel, dtype=np.float64)
    if true_rel.shape != approx_rel.shape or true_rel.ndim != 1 or len(true_rel) == 0:
        raise ConfigError("relevance lists must be equal-length, nonempty 1-d arrays")
    if not 1 <= k <= len(true_rel):
        raise ConfigError(f"k must lie in [1, {len(true_rel)}]")
    if not (np.all(np.isfinite(true_rel)) and np.all(np.isfinite(approx_rel))):
        raise NumericError("relevance values must be finite")
    idx = np.arange(len(true_rel))
    top_true = np.lexsort((idx, -true_rel))[:k]
    top_approx = np.lexsort((idx, -approx_rel))[:k]
    discounts = 1.0 / np.log2(np.arange(2, k + 2))
    dcg = float(np.dot(true_rel[top_true], discounts))
    if dcg == 0.0:
        return 1.0
    dcg_approx = float(np.dot(true_rel[top_approx], discounts))
    return dcg_approx / dcg


_DEFAULT_KINDS = (SimilarityKind.DOT_A, SimilarityKind.DOT_T, SimilarityKind.COSINE)


@dataclass(frozen=True)
class NdcgConfig:
    """Stratified ranking experiment parameters.

    strata are the two interior boundaries splitting the degree-sorted node
    list into three segments; None means equal thirds. m nodes are sampled
    from each segment without replacement.
    """

    k: int = 10
    q: int = 256
    seed: int = 42
    m: int = 300
    kinds: tuple[SimilarityKind, ...] = _DEFAULT_KINDS
    strata: tuple[int, int] | None = None

    def __post_init__(self):
        if self.k < 1 or self.m < 1 or self.q < 1:
            raise ConfigError("k, m and q must be positive")
        if not self.kinds:
            raise ConfigError("at least one similarity kind is required")


def _stratum_bounds(n: int, cfg: NdcgConfig) -> tuple[int, int]:
    if cfg.strata is None:
        return n // 3, (2 * n) // 3
    b1, b2 = cfg.strata
    if not 0 < b1 < b2 < n:
        raise ConfigError("strata boundaries must satisfy 0 < b1 < b2 < n")
    return b1, b2


def ndcg_experiment(g: SparseGraph, cfg: NdcgConfig) -> ExperimentReport:
    """Rank every sampled node against the rest of the sample and score it.

    Nodes are sorted by degree (ids break ties), split into three segments,
    and m nodes are drawn from each without replacement. All estimator
    kinds reuse one projection drawn from cfg.seed; the candidate set for a
    node is the sample minus itself.
    """
    n = g.n
    b1, b2 = _stratum_bounds(n, cfg)
    if min(b1, b2 - b1, n - b2) < cfg.m:
        raise SamplingError(f"every stratum must hold at least m={cfg.m} nodes")
    order = np.lexsort((np.arange(n), g.degrees))
    segments = (order[:b1], order[b1:b2], order[b2:])
    rng = generator(cfg.seed, 5)
    sample = np.concatenate([np.sort(rng.choice(seg, size=cfg.m, replace=False))
                             for seg in segments])
    strata = np.repeat([0, 1, 2], cfg.m)

    # one projection seed serves every estimator; families not requested are
    # skipped entirely
    emb_a = emb_t = emb_c = None
    if SimilarityKind.DOT_A in cfg.kinds or SimilarityKind.COSINE in cfg.kinds:
        emb_a = embed(g, ProjectionConfig(family="A", coeffs=(1.0,), q=cfg.q, seed=cfg.seed))
    if SimilarityKind.DOT_T in cfg.kinds:
        emb_t = embed(g, ProjectionConfig(family="T", coeffs=(1.0,), q=cfg.q, seed=cfg.seed))
    if SimilarityKind.COSINE in cfg.kinds:
        emb_c = normalize_rows(emb_a)

    a = g.to_csr()
    rows_s = a[sample]
    n_pair = np.asarray((rows_s @ rows_s.T).todense(), dtype=np.float64)
    n_self = np.asarray(rows_s.multiply(rows_s).sum(axis=1), dtype=np.float64).ravel()
    deg_s = g.degrees[sample].astype(np.float64)

    exact = {}
    proj = {}
    for kind in cfg.kinds:
        if kind is SimilarityKind.DOT_A:
            exact[kind] = n_pair
            proj[kind] = emb_a.data[sample] @ emb_a.data[sample].T
        elif kind is SimilarityKind.DOT_T:
            d_safe = np.where(deg_s > 0, deg_s, 1.0)
            exact[kind] = n_pair / np.outer(d_safe, d_safe)
            proj[kind] = emb_t.data[sample] @ emb_t.data[sample].T
        else:
            s_safe = np.where(n_self > 0, n_self, 1.0)
            exact[kind] = n_pair / np.sqrt(np.outer(s_safe, s_safe))
            proj[kind] = emb_c.data[sample] @ emb_c.data[sample].T

    report = ExperimentReport(
        experiment="ndcg",
        columns=["stratum", "node", "degree", "kind", "eta"],
        seed=cfg.seed,
        metadata={"q": cfg.q, "K": cfg.k, "m": cfg.m,
                  "n": n, "strata": f"{b1}:{b2}",
                  "kinds": "|".join(k.value for k in cfg.kinds)},
    )
    size = len(sample)
    etas = {kind: np.empty(size) for kind in cfg.kinds}
    for i in range(size):
        cand = np.concatenate([np.arange(0, i), np.arange(i + 1, size)])
        for kind in cfg.kinds:
            eta = ndcg_at_k(exact[kind][i, cand], proj[kind][i, cand], cfg.k)
            etas[kind][i] = eta
            report.add(int(strata[i]), int(sample[i]), int(g.degrees[sample[i]]),
                       kind.value, eta)
    for s in range(3):
        sel = strata == s
        for kind in cfg.kinds:
            report.metadata[f"summary_stratum{s}_{kind.value}"] = (
                f"mean={_FLOAT_FMT % etas[kind][sel].mean()}"
                f" std={_FLOAT_FMT % etas[kind][sel].std(ddof=1)}"
            )
    return report


def stratum_means(report: ExperimentReport) -> dict[tuple[int, str], float]:
    """Mean eta per (stratum, kind) recomputed from the per-node rows."""
    sums: dict[tuple[int, str], list[float]] = {}
    for stratum, _node, _deg, kind, eta in report.rows:
        sums.setdefault((stratum, kind), []).append(eta)
    return {key: float(np.mean(vals)) for key, vals in sums.items()}


# -- Monte-Carlo similarity -------------------------------------------------------


class MonteCarloResult(NamedTuple):
    mean: float
    variance: float
    ks: float
    theory: NormalParams
    trials: int


def _theory_params(g: SparseGraph, kind: SimilarityKind, u: int, v: int,
                   q: int) -> NormalParams:
    n_uu, n_vv, n_uv = two_hop(g, u, u), two_hop(g, v, v), two_hop(g, u, v)
    if kind is SimilarityKind.DOT_A:
        return dot_a_asymptotic(n_uu, n_vv, n_uv, q)
    d_u, d_v = int(g.degrees[u]), int(g.degrees[v])
    if kind is SimilarityKind.DOT_T:
        return dot_t_asymptotic(n_uu, n_vv, n_uv, d_u, d_v, q)
    if n_uu == 0 or n_vv == 0:
        raise DegenerateError("cosine theory undefined for zero rows")
    return cosine_asymptotic(n_uv / math.sqrt(n_uu * n_vv), q)


def _trial_values(projector: RowProjector, kind: SimilarityKind, seed: int,
                  trials: int, threads: int, value_fn) -> np.ndarray:
    out = np.empty(trials)

    def run(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            out[t] = value_fn(projector.rows(philox_key(seed, t)))

    if threads <= 1:
        run(0, trials)
    else:
        bounds = np.linspace(0, trials, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run(b[0], b[1]), zip(bounds[:-1], bounds[1:])))
    return out


def monte_carlo_similarity(g: SparseGraph, u: int, v: int, kind: SimilarityKind,
                           q: int, trials: int, seed: int,
                           threads: int = 1) -> MonteCarloResult:
    """Re-embed the pair under per-trial keys and compare with the normal limit.

    Returns the sample mean and variance of the projected similarity and
    the KS distance of the theory-standardized sample from N(0, 1).
    """
    if trials < 100:
        raise ConfigError("need at least 100 trials")
    params = _theory_params(g, kind, u, v, q)
    family = kind.family or "A"
    nodes = [u, v] if u != v else [u]
    projector = RowProjector(g, family, (1.0,), q, nodes)
    iu, iv = 0, len(nodes) - 1

    if kind is SimilarityKind.COSINE:
        def value(rows):
            nu = np.linalg.norm(rows[iu])
            nv = np.linalg.norm(rows[iv])
            return float(rows[iu] @ rows[iv] / (nu * nv)) if nu > 0 and nv > 0 else 0.0
    else:
        def value(rows):
            return float(rows[iu] @ rows[iv])

    vals = _trial_values(projector, kind, seed, trials, threads, value)
    if params.variance == 0:
        ks = 0.0 if np.allclose(vals, params.mean) else 1.0
    else:
        ks = ks_statistic((vals - params.mean) / params.std)
    return MonteCarloResult(mean=float(vals.mean()),
                            variance=float(vals.var(ddof=1)),
                            ks=ks, theory=params, trials=trials)


# -- flip rate ---------------------------------------------------------------------


class FlipRateResult(NamedTuple):
    empirical: float
    predicted: float
    flips: int
    trials: int
    swapped: bool
    cos_w_diff: float
    saturated: bool


def _reference_rows(g: SparseGraph, kind: SimilarityKind, nodes) -> np.ndarray:
    """Dense first-power rows used by the flip prediction geometry."""
    family = kind.family or "A"
    rows = np.stack([poly_row(g, family, (1.0,), int(x)) for x in nodes])
    if kind is SimilarityKind.COSINE:
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms == 0):
            raise DegenerateError("cosine flip geometry undefined for zero rows")
        rows /= norms[:, None]
    return rows


def flip_rate(g: SparseGraph, w: int, u: int, v: int, kind: SimilarityKind,
              q: int, trials: int, seed: int, threads: int = 1) -> FlipRateResult:
    """Empirical probability that projection inverts rel_wu > rel_wv.

    If the exact order is rel_wu < rel_wv the pair is swapped first (and
    flagged). The prediction evaluates the order-flip law at the cosine
    between the reference row and the difference of the compared rows; for
    the cosine kind the geometry uses unit-normalized rows.
    """
    rel_wu = exact_similarity(g, kind, w, u)
    rel_wv = exact_similarity(g, kind, w, v)
    swapped = False
    if rel_wu == rel_wv:
        raise DegenerateError("rel_wu equals rel_wv; flip order undefined")
    if rel_wu < rel_wv:
        u, v = v, u
        swapped = True

    pw, pu, pv = _reference_rows(g, kind, [w, u, v])
    diff = pu - pv
    denom = np.linalg.norm(pw) * np.linalg.norm(diff)
    cosine = float(pw @ diff / denom) if denom > 0 else 1.0
    pred: FlipProbability = flip_probability(min(1.0, max(-1.0, cosine)), q)

    nodes = sorted({w, u, v})
    index = {x: i for i, x in enumerate(nodes)}
    family = kind.family or "A"
    projector = RowProjector(g, family, (1.0,), q, nodes)
    iw, iu, iv = index[w], index[u], index[v]

    if kind is SimilarityKind.COSINE:
        def value(rows):
            nw = np.linalg.norm(rows[iw])
            a = rows[iw] @ rows[iu] / (nw * np.linalg.norm(rows[iu])) if iw != iu else 1.0
            b = rows[iw] @ rows[iv] / (nw * np.linalg.norm(rows[iv])) if iw != iv else 1.0
            return 1.0 if a < b else 0.0
    else:
        def value(rows):
            return 1.0 if rows[iw] @ rows[iu] < rows[iw] @ rows[iv] else 0.0

    flips = _trial_values(projector, kind, seed, trials, threads, value)
    nflips = int(flips.sum())
    return FlipRateResult(empirical=nflips / trials, predicted=pred.probability,
                          flips=nflips, trials=trials, swapped=swapped,
                          cos_w_diff=cosine, saturated=pred.saturated)


# -- uniform-guarantee violation study ----------------------------------------------


def jl_violation_study(g: SparseGraph, epsilon: float, delta: float,
                       kind_bound: str, draws: int, seed: int) -> ExperimentReport:
    """Fraction of projection draws violating the uniform accuracy guarantee.

    kind_bound "dot" checks |X_u X_v - n_uv| < eps * sqrt(n_uu n_vv) at the
    dot minimum dimension; "cosine" checks the cosine window eps * (1 -
    cos^2) at the cosine minimum dimension. Pairs with a zero row are
    excluded from the cosine check (their count is recorded).
    """
    if kind_bound not in ("dot", "cosine"):
        raise ConfigError("kind_bound must be 'dot' or 'cosine'")
    if draws < 1:
        raise ConfigError("draws must be positive")
    k = g.n
    q = jl_min_q_dot(epsilon, delta, k) if kind_bound == "dot" else \
        jl_min_q_cosine(epsilon, delta, k)

    a = g.to_csr()
    n_pair = np.asarray((a @ a.T).todense(), dtype=np.float64)
    n_self = np.diag(n_pair).copy()
    iu, iv = np.triu_indices(k, 1)
    nonzero = (n_self[iu] > 0) & (n_self[iv] > 0)
    excluded = int(np.sum(~nonzero))

    if kind_bound == "dot":
        target = n_pair[iu, iv]
        allowance = epsilon * np.sqrt(n_self[iu] * n_self[iv])
        strict = True  # guarantee is a strict inequality
    else:
        iu, iv = iu[nonzero], iv[nonzero]
        target = n_pair[iu, iv] / np.sqrt(n_self[iu] * n_self[iv])
        allowance = epsilon * (1.0 - target ** 2)
        strict = False

    projector = RowProjector(g, "A", (1.0,), q, np.arange(k))
    report = ExperimentReport(
        experiment="jl",
        columns=["draw", "violating_pairs", "max_error_ratio"],
        seed=seed,
        metadata={"epsilon": epsilon, "delta": delta,
                  "bound": kind_bound, "q": q, "n": k,
                  "excluded_zero_pairs": excluded},
    )
    violating_draws = 0
    for d in range(draws):
        x = projector.rows(philox_key(seed, d))
        if kind_bound == "dot":
            est = np.einsum("ij,ij->i", x[iu], x[iv])
        else:
            norms = np.linalg.norm(x, axis=1)
            xn = x / np.where(norms > 0, norms, 1.0)[:, None]
            est = np.einsum("ij,ij->i", xn[iu], xn[iv])
        err = np.abs(est - target)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(allowance > 0, err / allowance,
                             np.where(err > 0, np.inf, 0.0))
        if strict:
            # exclude the degenerate 0 >= 0 case of all-zero pairs
            bad = (err >= allowance) & ((err > 0) | (allowance > 0))
        else:
            # exactly-preserved pairs (cos = +-1) have zero allowance; a tiny
            # absolute guard keeps float dust from counting as a violation
            bad = err > allowance + 1e-12
        violations = int(np.sum(bad))
        if violations:
            violating_draws += 1
        report.add(d, violations, float(np.max(ratio)) if len(ratio) else 0.0)
    report.metadata["violating_fraction"] = violating_draws / draws
    return report


def violating_fraction(report: ExperimentReport) -> float:
    return float(report.metadata["violating_fraction"])
