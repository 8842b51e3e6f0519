"""
Finite-blocklength upper bounds on log M*(n, eps) for the BSC permutation channel:
the exact meta-converse, the variance bracket, the normal approximation with its
third-order refinement, the earlier mutual-information bound, and the analytic
lower bounds on log beta used in the asymptotic analysis.

Everything is in bits; rates are log M / log2 n.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from perm_converse.services.np_testing import (
    BayesMixture,
    BscChannel,
    TrimmedMixture,
    bsc_log_beta,
    log_binom_pmf,
    trimmed_mixture,
)
from perm_converse.services.simplex_covering import covering_tau, llr_moments
from perm_converse.utils import DomainError, NumericDomainError, nats_to_bits, norm_ppf

logger = logging.getLogger(__name__)

DEFAULT_G1 = 1.0 / 16.0
# below this blocklength the tau = 2/delta grid is outside the regime it was derived for
SMALL_N_REGIME = 100
ENTROPY_FULL_SUM_MAX_N = 10_000_000
ENTROPY_WINDOW_SIGMAS = 12.0


class BoundKind(str, enum.Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"
    THIRD_ORDER = "third_order"
    MAKUR_PRIOR = "makur_prior"
    GENERAL_ASYMPTOTIC = "general_asymptotic"


@dataclass(frozen=True)
class VarianceBracket:
    v_min: float
    v_max: float
    tau: float
    n: int
    delta: float


@dataclass(frozen=True)
class MomentTriple:
    """Per-symbol divergence, variance, third absolute moment, and log2 E."""

    d_n: float
    v_n: float
    t_n: float
    log_e: float


@dataclass(frozen=True)
class MakurTerms:
    c_delta: float
    entropy_binomial: float
    mutual_info_ub: float


@dataclass(frozen=True)
class CurvePoint:
    n: int
    log_m_upper: float
    rate_upper: float

    @classmethod
    def from_log_m(cls, n: int, log_m_upper: float) -> "CurvePoint":
        return cls(n=n, log_m_upper=log_m_upper, rate_upper=log_m_upper / math.log2(n))


@dataclass(frozen=True)
class BoundCurve:
    kind: BoundKind
    points: Tuple[CurvePoint, ...]


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")


def _check_n(n: int, least: int = 2) -> None:
    if n < least:
        raise DomainError(f"blocklength must be at least {least}, got {n}")


# ── Exact converse ────────────────────────────────────────────────────────────


def exact_converse_rate(n: int, eps: float, delta: float, tau: Optional[float] = None,
                        mix: Optional[TrimmedMixture] = None) -> Tuple[float, float]:
    """(-log2 beta_{1-eps}^n, that value / log2 n)."""
    _check_n(n)
    _check_eps(eps)
    if mix is None:
        if n < SMALL_N_REGIME:
            logger.warning("n=%d is below the regime of the tau = 2/delta grid; treat the bound with care", n)
        mix = trimmed_mixture(n, delta, tau)
    log_m = -bsc_log_beta(n, delta, 1.0 - eps, mix)
    return log_m, log_m / math.log2(n)


# ── Variance bracket and the normal approximation ─────────────────────────────


def variance_bracket(n: int, delta: float, tau: Optional[float] = None) -> VarianceBracket:
    """
    Bounds on the per-symbol log-likelihood variance against the covering center
    nearest delta, whose offset from delta is sqrt(delta/(tau n)) +- 1/(2 tau n).
    """
    _check_n(n, 1)
    d = BscChannel(delta).delta
    if tau is None:
        tau = covering_tau(d)
    s = math.sqrt(d / (tau * n))
    h = 1.0 / (2.0 * tau * n)
    near, far = s - h, s + h
    if not (near > -d and far < 1.0 - d):
        raise NumericDomainError(f"variance bracket undefined at n={n}, delta={d}, tau={tau}")

    def llr_pair(x: float) -> Tuple[float, float]:
        # log2(d / (d + x)) and log2((1 - d) / (1 - d - x))
        return nats_to_bits(-math.log1p(x / d)), nats_to_bits(-math.log1p(-x / (1.0 - d)))

    def second_moment(x: float) -> float:
        a, b = llr_pair(x)
        return d * a * a + (1.0 - d) * b * b

    def mean(x: float) -> float:
        a, b = llr_pair(x)
        return d * a + (1.0 - d) * b

    v_min = second_moment(near) - mean(far) ** 2
    v_max = second_moment(far) - mean(near) ** 2
    return VarianceBracket(v_min=v_min, v_max=v_max, tau=tau, n=n, delta=d)


def dispersion(n: int, eps: float, delta: float, tau: Optional[float] = None) -> float:
    """V_eps: the lower variance for eps < 1/2, the upper one otherwise."""
    _check_eps(eps)
    bracket = variance_bracket(n, delta, tau)
    return bracket.v_min if eps < 0.5 else bracket.v_max


def normal_approx_rate(n: int, eps: float, delta: float, tau: Optional[float] = None) -> float:
    _check_n(n)
    v = dispersion(n, eps, delta, tau)
    return 0.5 + math.sqrt(n * v) * norm_ppf(eps) / math.log2(n)


def third_order_rate(n: int, eps: float, delta: float, g1: float = DEFAULT_G1,
                     tau: Optional[float] = None) -> float:
    _check_n(n)
    log_n = math.log2(n)
    return normal_approx_rate(n, eps, delta, tau) + g1 * math.log2(log_n) / log_n


def general_asymptotic_upper(n: int, eps: float, ell: int, v_eps: float) -> float:
    """
    (ell/2) log2 n + sqrt(n v_eps) Phi^-1(eps): the shape of the general converse with
    its O(log log n) remainder dropped. Not a certified bound at finite n.
    """
    _check_n(n, 1)
    _check_eps(eps)
    if ell < 1:
        raise DomainError(f"ell must be at least 1, got {ell}")
    if v_eps < 0:
        raise DomainError(f"v_eps must be non-negative, got {v_eps!r}")
    return 0.5 * ell * math.log2(n) + math.sqrt(n * v_eps) * norm_ppf(eps)


# ── Earlier mutual-information bound ──────────────────────────────────────────


def binomial_entropy(n: int, delta: float) -> float:
    """
    Shannon entropy of Bin(n, delta) in bits. Exact summation up to n = 10^7, a
    +-12 sigma window around the mean beyond that.
    """
    _check_n(n, 0)
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    if delta in (0.0, 1.0) or n == 0:
        return 0.0
    if n <= ENTROPY_FULL_SUM_MAX_N:
        t = np.arange(n + 1)
    else:
        mu, sigma = n * delta, math.sqrt(n * delta * (1.0 - delta))
        lo = max(0, int(math.floor(mu - ENTROPY_WINDOW_SIGMAS * sigma)))
        hi = min(n, int(math.ceil(mu + ENTROPY_WINDOW_SIGMAS * sigma)))
        t = np.arange(lo, hi + 1)
    log_p = log_binom_pmf(n, t, delta)
    # log-gamma rounding at large n shifts every term alike; renormalise it away
    log_p = log_p - logsumexp(log_p)
    terms = -np.exp(log_p) * log_p
    return nats_to_bits(math.fsum(terms.tolist()))


def makur_rate(n: int, eps: float, delta: float) -> Tuple[float, MakurTerms]:
    """The earlier converse (1 + I(X^n; P_hat_{Y^n})) / ((1 - eps) log2 n), with its I bound."""
    _check_n(n, 3)
    _check_eps(eps)
    d = BscChannel(delta).delta
    h = binomial_entropy(n, d)
    c_delta = n * abs(h - 0.5 * math.log2(2 * math.pi * math.e * n * d * (1 - d)))
    mutual_info = (math.log2(n + 1) - 2 * c_delta / (n - 2)
                   - 0.5 * math.log2(2 * math.pi * math.e * d * (1 - d) * (n - 2) / 2))
    rate = (1.0 + mutual_info) / ((1.0 - eps) * math.log2(n))
    return rate, MakurTerms(c_delta=c_delta, entropy_binomial=h, mutual_info_ub=mutual_info)


# ── Analytic lower bounds on log beta ─────────────────────────────────────────


def berry_esseen_log_beta_lb(m: MomentTriple, n: int, alpha: float, slack: float) -> float:
    """
    -log E - n D_n + log2(slack/sqrt n) + sqrt(n V_n) Phi^-1(alpha - 6 T_n/sqrt(n V_n^3) - slack/sqrt n).
    Raises NumericDomainError when the quantile argument leaves (0, 1).
    """
    _check_n(n, 1)
    if not m.v_n > 0:
        raise DomainError("Berry-Esseen bound needs V_n > 0; use chebyshev_log_beta_lb")
    if not slack > 0:
        raise DomainError(f"slack must be positive, got {slack!r}")
    root_n = math.sqrt(n)
    arg = alpha - 6.0 * m.t_n / math.sqrt(n * m.v_n ** 3) - slack / root_n
    if not 0.0 < arg < 1.0:
        raise NumericDomainError(f"Berry-Esseen bound is vacuous here (quantile argument {arg:.6g})")
    return -m.log_e - n * m.d_n + math.log2(slack / root_n) + math.sqrt(n * m.v_n) * norm_ppf(arg)


def chebyshev_log_beta_lb(m: MomentTriple, n: int, alpha: float, eps: float) -> float:
    """-log E - n D_n - sqrt(2 n V_n / (1 - eps)) + log2(alpha / 2)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    _check_eps(eps)
    return -m.log_e - n * m.d_n - math.sqrt(2.0 * n * m.v_n / (1.0 - eps)) + math.log2(alpha / 2.0)


def lower_bounds_in_order(m: MomentTriple, n: int, alpha: float, eps: float, slack: float) -> bool:
    """
    Observed-order check: Chebyshev at or below Berry-Esseen where the latter is
    non-vacuous. Not a theorem; a violation is logged and reported, never raised.
    """
    try:
        be = berry_esseen_log_beta_lb(m, n, alpha, slack)
    except (DomainError, NumericDomainError):
        return True
    cheb = chebyshev_log_beta_lb(m, n, alpha, eps)
    if cheb > be:
        logger.warning("chebyshev bound %.6g exceeds berry-esseen bound %.6g at n=%d", cheb, be, n)
        return False
    return True


def moment_triple(channel_matrix, x_seq: Sequence[int], mixture: BayesMixture) -> MomentTriple:
    """
    Moments of sum_i log2 W(y_i|x_i)/Q(y_i|x_i) against the subset whose centers
    best match the channel rows used by x_seq.
    """
    W = np.asarray(channel_matrix, dtype=float)
    x = np.asarray(x_seq, dtype=int)
    n = x.size
    if n == 0:
        raise DomainError("input sequence is empty")
    if x.min() < 0 or x.max() >= W.shape[0] or mixture.num_inputs != W.shape[0]:
        raise DomainError("input symbols and mixture must match the channel's input alphabet")
    counts = np.bincount(x, minlength=W.shape[0])
    used = np.flatnonzero(counts)
    counts = counts[used]
    Q = mixture.as_array()
    per_subset = np.array([
        [llr_moments(W[sym], Q[e, sym]) for sym in used]
        for e in range(mixture.E)
    ])  # (E, used symbols, 3)
    cost = per_subset[:, :, 0] @ counts
    best = int(np.argmin(cost))
    d_n, v_n, t_n = (counts @ per_subset[best]) / n
    return MomentTriple(d_n=float(d_n), v_n=float(v_n), t_n=float(t_n), log_e=math.log2(mixture.E))


def bsc_moment_triple(n: int, delta: float, mix: TrimmedMixture) -> MomentTriple:
    """Moments for the all-zeros input against the mixture point nearest delta."""
    d = BscChannel(delta).delta
    row = (1.0 - d, d)
    moments = [llr_moments(row, (1.0 - q, q)) for q in mix.q_values]
    d_n, v_n, t_n = min(moments, key=lambda mom: mom[0])
    return MomentTriple(d_n=d_n, v_n=v_n, t_n=t_n, log_e=math.log2(len(mix)))


# ── Curves ────────────────────────────────────────────────────────────────────


def _log_m_at(kind: BoundKind, n: int, eps: float, delta: float,
              tau: Optional[float], g1: float) -> float:
    log_n = math.log2(n)
    if kind is BoundKind.EXACT:
        return exact_converse_rate(n, eps, delta, tau)[0]
    if kind is BoundKind.NORMAL_APPROX:
        return normal_approx_rate(n, eps, delta, tau) * log_n
    if kind is BoundKind.THIRD_ORDER:
        return third_order_rate(n, eps, delta, g1, tau) * log_n
    if kind is BoundKind.MAKUR_PRIOR:
        return makur_rate(n, eps, delta)[0] * log_n
    if kind is BoundKind.GENERAL_ASYMPTOTIC:
        return general_asymptotic_upper(n, eps, 1, dispersion(n, eps, delta, tau))
    raise DomainError(f"unknown bound kind {kind!r}")


def bound_curve(kind: BoundKind, n_values: Iterable[int], eps: float, delta: float,
                tau: Optional[float] = None, g1: float = DEFAULT_G1,
                workers: Optional[int] = None) -> BoundCurve:
    """Evaluate one bound over several blocklengths; points come back sorted by n."""
    kind = BoundKind(kind)
    ns = sorted(set(int(n) for n in n_values))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(lambda n: _log_m_at(kind, n, eps, delta, tau, g1), ns))
    logger.info("%s curve: %d points, delta=%g eps=%g", kind.value, len(ns), delta, eps)
    return BoundCurve(kind=kind, points=tuple(CurvePoint.from_log_m(n, v) for n, v in zip(ns, values)))


def bound_curves(kinds: Iterable[BoundKind], n_values: Sequence[int], eps: float, delta: float,
                 tau: Optional[float] = None, g1: float = DEFAULT_G1,
                 workers: Optional[int] = None) -> List[BoundCurve]:
    return [bound_curve(kind, n_values, eps, delta, tau, g1, workers) for kind in kinds]
