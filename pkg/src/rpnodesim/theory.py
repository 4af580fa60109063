"""Closed-form predictions: asymptotic normal parameters of the projected
similarity estimators, minimum projection dimensions for uniform accuracy
guarantees, order-flip and sign-change probabilities, and concentration
tail bounds (including the prior-work forms they are compared against)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError, DomainError

_BETA_TOL = 1e-12
_BETA_MAX_ITER = 300
_FPMIN = 1e-300


@dataclass(frozen=True)
class NormalParams:
    """Mean and variance of an asymptotically normal estimator."""

    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean) or not math.isfinite(self.variance):
            raise DomainError("normal parameters must be finite")
        if self.variance < 0:
            raise DomainError("variance must be nonnegative")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def sigma_interval(p: NormalParams, k_sigma: float) -> tuple[float, float]:
    """mean +- k_sigma * std."""
    if k_sigma <= 0:
        raise DomainError("k_sigma must be positive")
    half = k_sigma * p.std
    return p.mean - half, p.mean + half


@dataclass(frozen=True)
class TailBound:
    """One evaluated tail bound, clamped into [0, 1]."""

    value: float          # the epsilon or t the bound was evaluated at
    bound: float
    side: str             # upper | lower | two_sided
    source: str
    vacuous: bool = False


class FlipProbability(NamedTuple):
    probability: float
    saturated: bool


# -- Student t ----------------------------------------------------------------


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise DomainError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (a * math.log(x) + b * math.log1p(-x)
                - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_sf(x: float, q: int) -> float:
    """P(T > x) for a Student t variable with q degrees of freedom.

    Evaluated through the regularized incomplete beta function
    I_{q/(q+x^2)}(q/2, 1/2) / 2 with symmetry for negative x.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    if x == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(0.5 * q, 0.5, q / (q + x * x))
    return tail if x > 0 else 1.0 - tail


def normal_sf(x: float) -> float:
    """P(N(0,1) > x), the q -> infinity limit of the t survival function."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# -- Asymptotic normal parameters ---------------------------------------------


def dot_t_asymptotic(n_uu: int, n_vv: int, n_uv: int, d_u: int, d_v: int,
                     q: int) -> NormalParams:
    """Normal limit of the projected transition-row dot product.

    Mean n_uv / (d_u d_v); variance [n_uu n_vv / (d_u^2 d_v^2) +
    (n_uv / (d_u d_v))^2] / q.
    """
    if d_u < 1 or d_v < 1:
        raise DomainError("degrees must be >= 1 for transition rows")
    if q < 1:
        raise DomainError("q must be >= 1")
    mean = n_uv / (d_u * d_v)
    variance = (n_uu * n_vv / (d_u ** 2 * d_v ** 2) + mean ** 2) / q
    return NormalParams(mean, variance)


def dot_a_asymptotic(n_uu: int, n_vv: int, n_uv: int, q: int) -> NormalParams:
    """Normal limit of the projected adjacency-row dot product.

    Mean n_uv; variance (n_uu n_vv + n_uv^2) / q.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    return NormalParams(float(n_uv), (n_uu * n_vv + n_uv ** 2) / q)


def cosine_asymptotic(rho: float, q: int) -> NormalParams:
    """Normal limit of the projected cosine: mean rho, variance (1-rho^2)^2/q."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if q < 1:
        raise DomainError("q must be >= 1")
    return NormalParams(rho, (1.0 - rho ** 2) ** 2 / q)


# -- Minimum dimensions --------------------------------------------------------


def jl_min_q_dot(epsilon: float, delta: float, k: int) -> int:
    """Smallest q guaranteeing all k(k-1)/2 pairwise dot products within
    epsilon * ||x|| ||y|| with probability at least 1 - delta:
    ceil(4 (1+eps)/eps^2 * ln(k(k-1)/delta))."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    if k < 2:
        raise DomainError("k must be at least 2")
    return math.ceil(4.0 * (1.0 + epsilon) / epsilon ** 2 * math.log(k * (k - 1) / delta))


def jl_min_q_cosine(epsilon: float, delta: float, k: int) -> int:
    """Smallest q for the uniform cosine guarantee:
    ceil(2 ln[2k(k-1)(1+eps^2/4)/delta] / ln[1 + eps^2/(2(1+eps sqrt(2)))])."""
    if not 0.0 < epsilon <= 0.05:
        raise DomainError("epsilon must lie in (0, 0.05]")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    if k < 2:
        raise DomainError("k must be at least 2")
    num = 2.0 * math.log(2.0 * k * (k - 1) * (1.0 + epsilon ** 2 / 4.0) / delta)
    den = math.log1p(epsilon ** 2 / (2.0 * (1.0 + epsilon * math.sqrt(2.0))))
    return math.ceil(num / den)


# -- Flip and sign-change probabilities ----------------------------------------


def flip_probability(cos_w_diff: float, q: int) -> FlipProbability:
    """Probability the projection inverts an order rel_wu > rel_wv.

    cos_w_diff is the cosine between the reference row and the difference
    of the two compared rows; the probability is P(T_q > cos * sqrt(q) /
    sqrt(1 - cos^2)). |cos| >= 1 saturates: the order is preserved exactly.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if abs(cos_w_diff) >= 1.0:
        return FlipProbability(0.0, True)
    arg = cos_w_diff * math.sqrt(q) / math.sqrt(1.0 - cos_w_diff ** 2)
    return FlipProbability(student_t_sf(arg, q), False)


def sign_change_probability(rho: float, q: int) -> FlipProbability:
    """Probability a positive dot product projects to a negative one.

    Equals P(T_q > |rho| sqrt(q) / sqrt(1 - rho^2)); exactly 1/2 for
    orthogonal vectors, 0 (saturated) for |rho| = 1.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if abs(rho) > 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if abs(rho) == 1.0:
        return FlipProbability(0.0, True)
    if rho == 0.0:
        return FlipProbability(0.5, False)
    arg = abs(rho) * math.sqrt(q) / math.sqrt(1.0 - rho ** 2)
    return FlipProbability(student_t_sf(arg, q), False)


# -- Tail bounds ----------------------------------------------------------------

DOT_BOUND_SOURCES = ("this_paper_dot", "kaban", "arriaga_vempala")
SIDES = ("upper", "lower", "two_sided")


def _clamp(value: float, side: str, source: str, param: float) -> TailBound:
    vacuous = value >= 1.0
    return TailBound(value=param, bound=min(1.0, max(0.0, value)), side=side,
                     source=source, vacuous=vacuous)


def dot_tail_bound(epsilon: float | None, q: int, side: str = "two_sided",
                   source: str = "this_paper_dot", rho: float | None = None,
                   t: float | None = None) -> TailBound:
    """Tail probability bound for the normalized projected dot product.

    Sources:
      this_paper_dot  with t and rho: one-sided exp(-t^2 / (2q(1+rho^2) +
                      2(1+-rho)t)) on the chi-square-like scale (mean q rho);
                      with epsilon only: the rho-free per-side form
                      exp(-q eps^2 / (4(1+eps))), doubled for two_sided.
      kaban           per-side exp(-q eps^2 / 8), doubled for two_sided.
      arriaga_vempala two-sided 4 exp(-q (eps^2 - eps^3) / 4).
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if side not in SIDES:
        raise ConfigError(f"side must be one of {SIDES}")
    if source not in DOT_BOUND_SOURCES:
        raise ConfigError(f"unknown bound source {source!r}; expected {DOT_BOUND_SOURCES}")

    if source == "this_paper_dot" and t is not None:
        if rho is None or not -1.0 <= rho <= 1.0:
            raise DomainError("the t-form needs rho in [-1, 1]")
        if t < 0:
            raise DomainError("t must be >= 0")
        base = 2.0 * q * (1.0 + rho ** 2)
        upper = math.exp(-t * t / (base + 2.0 * (1.0 + rho) * t))
        lower = math.exp(-t * t / (base + 2.0 * (1.0 - rho) * t))
        val = {"upper": upper, "lower": lower, "two_sided": upper + lower}[side]
        return _clamp(val, side, source, t)

    if epsilon is None or epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if source == "this_paper_dot":
        per_side = math.exp(-q * epsilon ** 2 / (4.0 * (1.0 + epsilon)))
        val = 2.0 * per_side if side == "two_sided" else per_side
    elif source == "kaban":
        per_side = math.exp(-q * epsilon ** 2 / 8.0)
        val = 2.0 * per_side if side == "two_sided" else per_side
    else:  # arriaga_vempala, stated two-sided
        if side != "two_sided":
            raise ConfigError("arriaga_vempala is a two-sided bound")
        val = 4.0 * math.exp(-q * (epsilon ** 2 - epsilon ** 3) / 4.0)
    return _clamp(val, side, source, epsilon)


def cosine_concentration_bound(epsilon: float, q: int) -> TailBound:
    """Two-sided bound for |projected cosine - rho| >= eps (1 - rho^2):
    (4 + eps^2) [1 + eps^2 / (2(1 + eps sqrt(2)))]^(-q/2), any rho."""
    if not 0.0 < epsilon < 0.055:
        raise DomainError("epsilon must lie in (0, 0.055)")
    if q < 1:
        raise DomainError("q must be >= 1")
    ratio = 1.0 + epsilon ** 2 / (2.0 * (1.0 + epsilon * math.sqrt(2.0)))
    val = (4.0 + epsilon ** 2) * ratio ** (-0.5 * q)
    return _clamp(val, "two_sided", "this_paper_cosine", epsilon)
