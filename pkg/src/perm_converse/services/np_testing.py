"""
Neyman-Pearson type-II error beta_alpha: closed form for the BSC permutation channel
through the Hamming-weight statistic, brute force over small outcome spaces, and the
Bayes mixture built from subsets of covering centers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import betainc, gammaln, logsumexp, xlog1py, xlogy
from scipy.stats import binom

from perm_converse.services.simplex_covering import GridK, ProbVec, covering_tau, lambda_1d
from perm_converse.utils import DomainError, NumericDomainError, nats_to_bits

logger = logging.getLogger(__name__)

DIRECT_CDF_MAX_N = 10_000
BRUTE_FORCE_CAP = 2 ** 20
NORMALIZATION_TOL = 1e-9
RATIO_RTOL = 1e-12
ALPHA_TOL = 1e-12
TRIM_TOL = 1e-15


# ── Types ─────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class BscChannel:
    """Binary symmetric channel; crossover above 1/2 is folded to 1 - delta."""

    delta: float

    def __post_init__(self):
        d = float(self.delta)
        if not 0.0 < d < 1.0:
            raise DomainError(f"crossover probability must lie in (0, 1), got {self.delta!r}")
        if d > 0.5:
            d = 1.0 - d
        object.__setattr__(self, "delta", d)

    @property
    def matrix(self) -> np.ndarray:
        d = self.delta
        return np.array([[1.0 - d, d], [d, 1.0 - d]])


@dataclass(frozen=True)
class NPThreshold:
    """Randomised weight test: accept t < T, accept t = T with probability lam."""

    T: int
    lam: float
    alpha: float
    n: int
    delta: float


@dataclass(frozen=True)
class TrimmedMixture:
    """Uniform mixture over ladder points q with delta <= q <= 1 - delta."""

    q_values: Tuple[float, ...]
    delta: float

    def __post_init__(self):
        if not self.q_values:
            raise NumericDomainError("mixture has no points")
        lo, hi = self.delta - TRIM_TOL, 1.0 - self.delta + TRIM_TOL
        if any(not lo <= q <= hi for q in self.q_values):
            raise DomainError(f"mixture points must lie in [{self.delta}, {1 - self.delta}]")
        object.__setattr__(self, "q_values", tuple(sorted(float(q) for q in self.q_values)))

    @property
    def weight(self) -> float:
        return 1.0 / len(self.q_values)

    def __len__(self) -> int:
        return len(self.q_values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.q_values, dtype=float)


@dataclass(frozen=True)
class BayesMixture:
    """E subsets, each assigning one center to every input symbol."""

    subsets: Tuple[Mapping[int, ProbVec], ...]
    num_inputs: int

    def __post_init__(self):
        if not self.subsets:
            raise DomainError("Bayes mixture needs at least one subset")
        symbols = set(range(self.num_inputs))
        for subset in self.subsets:
            if set(subset) != symbols:
                raise DomainError(f"subset keys {sorted(subset)} do not cover inputs 0..{self.num_inputs - 1}")
        object.__setattr__(self, "subsets", tuple(self.subsets))

    @property
    def E(self) -> int:
        return len(self.subsets)

    def as_array(self) -> np.ndarray:
        """Shape (E, num_inputs, |Y|)."""
        return np.array([[s[x].as_array() for x in range(self.num_inputs)] for s in self.subsets])


Law = Union[Mapping[object, float], Sequence[float], np.ndarray]


# ── Binomial building blocks ──────────────────────────────────────────────────


def log_binom_pmf(n: int, t, q):
    """ln C(n,t) + t ln q + (n-t) ln(1-q), via log-gamma. t and q broadcast as arrays."""
    t_arr = np.asarray(t)
    q_arr = np.asarray(q, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > n):
        raise DomainError(f"t must lie in [0, {n}]")
    if np.any(q_arr < 0.0) or np.any(q_arr > 1.0):
        raise DomainError(f"q must lie in [0, 1], got {q!r}")
    t_f = t_arr.astype(float)
    out = (gammaln(n + 1.0) - gammaln(t_f + 1.0) - gammaln(n - t_f + 1.0)
           + xlogy(t_f, q_arr) + xlog1py(n - t_f, -q_arr))
    return float(out) if np.ndim(out) == 0 else out


def _log_pmf(n: int, t, q):
    """ln P[Bin(n, q) = t] from scipy's pmf; the log-gamma form only where the pmf underflows."""
    with np.errstate(divide="ignore"):
        direct = np.log(binom.pmf(t, n, q))
    out = np.where(np.isfinite(direct), direct, log_binom_pmf(n, t, q))
    return float(out) if np.ndim(out) == 0 else out


def binom_pmf_vector(n: int, q: float) -> np.ndarray:
    """P[Bin(n, q) = t] for t = 0..n."""
    return np.exp(_log_pmf(n, np.arange(n + 1), q))


def binom_cdf(n: int, T: int, q: float, method: str = "auto") -> float:
    """
    P[Bin(n, q) <= T]. `method` is "direct" (log-domain summation), "betainc"
    (regularised incomplete beta) or "auto" (betainc only for n > 10^4).
    """
    if not -1 <= T <= n:
        raise DomainError(f"T must lie in [-1, {n}], got {T}")
    if T < 0:
        return 0.0
    if T == n:
        return 1.0
    if method == "auto":
        method = "betainc" if n > DIRECT_CDF_MAX_N else "direct"
    if method == "direct":
        return float(min(1.0, math.exp(logsumexp(_log_pmf(n, np.arange(T + 1), q)))))
    if method == "betainc":
        return float(betainc(n - T, T + 1, 1.0 - q))
    raise DomainError(f"unknown method {method!r}")


def _log_cdf_below(n: int, T: int, q: np.ndarray) -> np.ndarray:
    """ln P[Bin(n, q) <= T - 1] for an array of q, one incomplete-beta call each."""
    if T <= 0:
        return np.full(q.shape, -np.inf)
    with np.errstate(divide="ignore"):
        return np.log(betainc(n - T + 1, T, 1.0 - q))


# ── Neyman-Pearson threshold and the BSC beta ────────────────────────────────


def np_threshold(n: int, delta: float, alpha: float) -> NPThreshold:
    """Smallest T with P[Bin(n, delta) <= T] >= alpha, and lam completing the level."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    d = BscChannel(delta).delta
    target = alpha - ALPHA_TOL
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if binom_cdf(n, mid, d, method="betainc") >= target:
            hi = mid
        else:
            lo = mid + 1
    T = lo
    # must match the evaluations in bsc_log_beta
    below = binom_cdf(n, T - 1, d, method="betainc")
    pmf_T = math.exp(_log_pmf(n, T, d))
    lam = min(1.0, max((alpha - below) / pmf_T, 0.0))
    logger.debug("np_threshold(n=%d, delta=%g, alpha=%g): T=%d lam=%.6g", n, d, alpha, T, lam)
    return NPThreshold(T=T, lam=lam, alpha=alpha, n=n, delta=d)


def trimmed_mixture(n: int, delta: float, tau: Optional[float] = None) -> TrimmedMixture:
    """Ladder points of lambda_1d(1/(tau n)) inside [delta, 1 - delta], uniformly weighted."""
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    d = BscChannel(delta).delta
    if tau is None:
        tau = covering_tau(d)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    ladder = lambda_1d(1.0 / (tau * n)).as_array()
    kept = ladder[(ladder >= d - TRIM_TOL) & (ladder <= 1.0 - d + TRIM_TOL)]
    if kept.size == 0:
        raise NumericDomainError(f"no grid point survives trimming to [{d}, {1 - d}] at n={n}; n is too small")
    logger.debug("trimmed_mixture(n=%d, delta=%g, tau=%g): %d of %d points", n, d, tau, kept.size, ladder.size)
    return TrimmedMixture(q_values=tuple(float(q) for q in kept), delta=d)


def bsc_log_beta(n: int, delta: float, alpha: float, mix: TrimmedMixture) -> float:
    """
    log2 beta_alpha^n = log2( lam C(n,T) Q_{n,T} + sum_{t<T} C(n,t) Q_{n,t} ), where
    Q_{n,t} averages q^t (1-q)^(n-t) over the mixture points.
    """
    thr = np_threshold(n, delta, alpha)
    q = mix.as_array()
    below = _log_cdf_below(n, thr.T, q)
    if thr.lam > 0:
        edge = math.log(thr.lam) + _log_pmf(n, thr.T, q)
        per_point = np.logaddexp(below, edge)
    else:
        per_point = below
    return float(nats_to_bits(logsumexp(per_point) - math.log(len(mix))))


def bsc_beta(n: int, delta: float, alpha: float, mix: TrimmedMixture) -> float:
    return 2.0 ** bsc_log_beta(n, delta, alpha, mix)


def bsc_weight_laws(n: int, delta: float, mix: TrimmedMixture) -> Tuple[np.ndarray, np.ndarray]:
    """Laws of the Hamming weight under the channel and under the mixture."""
    d = BscChannel(delta).delta
    p_law = binom_pmf_vector(n, d)
    q_law = np.mean([binom_pmf_vector(n, q) for q in mix.q_values], axis=0)
    return p_law, q_law


# ── Brute force ───────────────────────────────────────────────────────────────


def _aligned_laws(p_law: Law, q_law: Law) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(p_law, Mapping) or isinstance(q_law, Mapping):
        if not (isinstance(p_law, Mapping) and isinstance(q_law, Mapping)):
            raise DomainError("both laws must be mappings, or both sequences")
        keys = list(dict.fromkeys(list(p_law) + list(q_law)))
        p = np.array([p_law.get(k, 0.0) for k in keys], dtype=float)
        q = np.array([q_law.get(k, 0.0) for k in keys], dtype=float)
    else:
        p = np.asarray(p_law, dtype=float).ravel()
        q = np.asarray(q_law, dtype=float).ravel()
        if p.shape != q.shape:
            raise DomainError(f"laws over different outcome spaces: {p.shape} vs {q.shape}")
    for name, law in (("p", p), ("q", q)):
        if np.any(law < 0):
            raise DomainError(f"{name}_law has negative mass")
        if abs(law.sum() - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"{name}_law sums to {law.sum()!r}, not 1")
    return p, q


def np_beta_bruteforce(p_law: Law, q_law: Law, alpha: float) -> float:
    """
    Neyman-Pearson optimum: accept outcomes in decreasing order of p/q until the
    p-mass reaches alpha, splitting the boundary likelihood-ratio class.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    p, q = _aligned_laws(p_law, q_law)
    live = (p > 0) | (q > 0)
    p, q = p[live], q[live]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    order = np.argsort(-ratio, kind="stable")
    ratio, p, q = ratio[order], p[order], q[order]

    # ratio classes: equal within a relative 1e-12
    fresh = np.ones(ratio.size, dtype=bool)
    fresh[1:] = ~np.isclose(ratio[1:], ratio[:-1], rtol=RATIO_RTOL, atol=0.0)
    starts = np.flatnonzero(fresh)
    class_p = np.add.reduceat(p, starts)
    class_q = np.add.reduceat(q, starts)

    acc_p = np.cumsum(class_p)
    hit = int(np.searchsorted(acc_p, alpha, side="left"))
    if hit >= class_p.size:
        return float(class_q.sum())
    before_p = acc_p[hit - 1] if hit > 0 else 0.0
    before_q = class_q[:hit].sum()
    frac = (alpha - before_p) / class_p[hit]
    return float(before_q + min(max(frac, 0.0), 1.0) * class_q[hit])


# ── Bayes mixture over covering centers ───────────────────────────────────────


def build_bayes_mixture(num_inputs: int, grid: Union[GridK, Sequence[ProbVec]]) -> BayesMixture:
    """
    Split the centers, in enumeration order, into E = ceil(|grid| / num_inputs)
    subsets of num_inputs; the last subset is padded with centers from the start.
    """
    if num_inputs < 1:
        raise DomainError(f"num_inputs must be positive, got {num_inputs}")
    centers = grid.centers if isinstance(grid, GridK) else list(grid)
    m = len(centers)
    if m == 0:
        raise DomainError("grid is empty")
    E = -(-m // num_inputs)
    subsets = []
    for e in range(E):
        subsets.append({x: centers[(e * num_inputs + x) % m] for x in range(num_inputs)})
    logger.debug("build_bayes_mixture: %d centers, %d inputs -> E=%d", m, num_inputs, E)
    return BayesMixture(subsets=tuple(subsets), num_inputs=num_inputs)


def bsc_bayes_mixture(mix: TrimmedMixture) -> BayesMixture:
    """One subset per mixture point: input 0 sees (1-q, q), input 1 sees (q, 1-q)."""
    subsets = [{0: ProbVec((1.0 - q, q)), 1: ProbVec((q, 1.0 - q))} for q in mix.q_values]
    return BayesMixture(subsets=tuple(subsets), num_inputs=2)


def _check_channel(channel_matrix) -> np.ndarray:
    W = np.asarray(channel_matrix, dtype=float)
    if W.ndim != 2:
        raise DomainError("channel matrix must be two-dimensional")
    if np.any(W <= 0):
        raise DomainError("channel matrix must be strictly positive")
    if np.max(np.abs(W.sum(axis=1) - 1.0)) > NORMALIZATION_TOL:
        raise DomainError("channel matrix rows must sum to 1")
    return W


def _outer_log_sum(rows: np.ndarray) -> np.ndarray:
    """ln prod_i rows[i][y_i] for every y^n, lexicographic order."""
    acc = np.zeros(1)
    for row in rows:
        acc = (acc[:, None] + row[None, :]).ravel()
    return acc


def mixture_log_law(channel_matrix, x_seq: Sequence[int],
                    mixture: BayesMixture) -> Tuple[np.ndarray, np.ndarray]:
    """Natural-log laws of Y^n under W_{x^n} and under the Bayes mixture."""
    W = _check_channel(channel_matrix)
    x = np.asarray(x_seq, dtype=int)
    if x.size == 0:
        raise DomainError("input sequence is empty")
    if x.min() < 0 or x.max() >= W.shape[0] or mixture.num_inputs != W.shape[0]:
        raise DomainError("input symbols and mixture must match the channel's input alphabet")
    size = W.shape[1] ** x.size
    if size > BRUTE_FORCE_CAP:
        raise DomainError(f"|Y|^n = {size} exceeds the brute-force cap {BRUTE_FORCE_CAP}")
    log_p = _outer_log_sum(np.log(W[x]))
    Q = mixture.as_array()
    if Q.shape[2] != W.shape[1]:
        raise DomainError("mixture centers and channel outputs have different alphabets")
    with np.errstate(divide="ignore"):
        log_Q = np.log(Q)
    log_q = np.full(size, -np.inf)
    for e in range(mixture.E):
        log_q = np.logaddexp(log_q, _outer_log_sum(log_Q[e][x]))
    return log_p, log_q - math.log(mixture.E)


def generic_log_beta_small(channel_matrix, x_seq: Sequence[int], mixture: BayesMixture,
                           alpha: float) -> float:
    """log2 beta_alpha(W_{x^n}, Bayes mixture), by enumerating every output sequence."""
    log_p, log_q = mixture_log_law(channel_matrix, x_seq, mixture)
    beta = np_beta_bruteforce(np.exp(log_p), np.exp(log_q), alpha)
    return math.log2(beta) if beta > 0 else -math.inf


def bsc_outcome_laws(n: int, delta: float, mix: TrimmedMixture) -> Tuple[np.ndarray, np.ndarray]:
    """Laws over all 2^n output sequences for the all-zeros input."""
    log_p, log_q = mixture_log_law(BscChannel(delta).matrix, [0] * n, bsc_bayes_mixture(mix))
    return np.exp(log_p), np.exp(log_q)
