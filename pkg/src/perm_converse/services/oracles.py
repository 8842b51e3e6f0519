"""
Self-checks behind `perm-converse verify`: the closed-form beta against brute force,
the binary grid radius against 1/n, and the analytic log-beta lower bounds against
brute-force log beta on small random channels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from perm_converse.services.bounds import (
    berry_esseen_log_beta_lb,
    chebyshev_log_beta_lb,
    moment_triple,
)
from perm_converse.services.np_testing import (
    build_bayes_mixture,
    bsc_log_beta,
    bsc_outcome_laws,
    generic_log_beta_small,
    np_beta_bruteforce,
    trimmed_mixture,
)
from perm_converse.services.simplex_covering import covering_tau, lambda_2d, lambda_k, verify_radius
from perm_converse.utils import DomainError, NumericDomainError, make_rng

logger = logging.getLogger(__name__)

NP_REL_TOL = 1e-9
LEMMA2_ABS_TOL = 1e-12
LEMMA2_MAX_N = 10
LEMMA2_GRID_R0 = 0.05
ORACLES = ("np", "covering", "lemma2")


@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    detail: str


def verify_np(n_max: int = 12, deltas: Sequence[float] = (0.11, 0.22, 0.3),
              alphas: Sequence[float] = (0.9, 0.99)) -> List[OracleCheck]:
    """Closed-form log2 beta vs. the optimal test over all 2^n output sequences."""
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")
    checks = []
    for n in range(1, n_max + 1):
        for delta in deltas:
            mix = trimmed_mixture(n, delta)
            p_law, q_law = bsc_outcome_laws(n, delta, mix)
            for alpha in alphas:
                exact = bsc_log_beta(n, delta, alpha, mix)
                brute = math.log2(np_beta_bruteforce(p_law, q_law, alpha))
                rel = abs(exact - brute) / max(abs(brute), 1e-300)
                checks.append(OracleCheck(
                    name=f"np n={n} delta={delta:g} alpha={alpha:g}",
                    passed=rel <= NP_REL_TOL,
                    detail=f"closed form {exact:.15g}, brute force {brute:.15g}, rel err {rel:.3g}",
                ))
    return checks


def verify_covering(deltas: Sequence[float] = (0.11,), ns: Sequence[int] = (100, 1000),
                    num_samples: int = 100_000, seed: int = 0) -> List[OracleCheck]:
    """Sampled covering radius of lambda_2d(1/(tau n)) over [delta, 1 - delta] against 1/n."""
    checks = []
    for delta in deltas:
        tau = covering_tau(delta)
        for n in ns:
            grid = lambda_2d(1.0 / (tau * n))
            radius = verify_radius(grid, (delta, 1.0 - delta), num_samples=num_samples, seed=seed)
            checks.append(OracleCheck(
                name=f"covering n={n} delta={delta:g}",
                passed=radius <= 1.0 / n,
                detail=f"radius {radius:.6g} bits, limit {1.0 / n:.6g}, {len(grid)} centers",
            ))
    return checks


def _random_channel(rng: np.random.Generator, num_outputs: int) -> np.ndarray:
    w = rng.dirichlet(np.full(num_outputs, 2.0), size=2)
    w = np.maximum(w, 0.02)
    return w / w.sum(axis=1, keepdims=True)


def verify_lemma2(instances: int = 50, seed: int = 0) -> List[OracleCheck]:
    """
    Chebyshev and Berry-Esseen lower bounds on log2 beta must not exceed the value
    obtained by enumerating Y^n, for random strictly positive 2x2 and 2x3 channels.
    """
    if instances < 1:
        raise DomainError(f"instances must be positive, got {instances}")
    rng = make_rng(seed)
    checks = []
    for idx in range(instances):
        num_outputs = 2 if idx % 2 == 0 else 3
        n = int(rng.integers(2, LEMMA2_MAX_N + 1))
        eps = float(rng.uniform(0.05, 0.5))
        alpha = 1.0 - eps
        W = _random_channel(rng, num_outputs)
        x_seq = rng.integers(0, 2, size=n)
        mixture = build_bayes_mixture(2, lambda_k(num_outputs, LEMMA2_GRID_R0))

        exact = generic_log_beta_small(W, x_seq, mixture, alpha)
        moments = moment_triple(W, x_seq, mixture)
        cheb = chebyshev_log_beta_lb(moments, n, alpha, eps)
        passed = cheb <= exact + LEMMA2_ABS_TOL
        detail = f"log2 beta {exact:.6g}, chebyshev {cheb:.6g}"

        room = alpha - 6.0 * moments.t_n / math.sqrt(n * moments.v_n ** 3) if moments.v_n > 0 else 0.0
        if room > 0:
            try:
                be = berry_esseen_log_beta_lb(moments, n, alpha, 0.5 * room * math.sqrt(n))
            except NumericDomainError:
                detail += ", berry-esseen vacuous"
            else:
                passed = passed and be <= exact + LEMMA2_ABS_TOL
                detail += f", berry-esseen {be:.6g}"
        else:
            detail += ", berry-esseen vacuous"
        checks.append(OracleCheck(name=f"lemma2 #{idx} n={n} |Y|={num_outputs}", passed=passed, detail=detail))
    return checks


def run_oracles(names: Iterable[str], n_max: int = 12) -> List[OracleCheck]:
    checks: List[OracleCheck] = []
    for name in names:
        if name == "np":
            checks += verify_np(n_max)
        elif name == "covering":
            checks += verify_covering()
        elif name == "lemma2":
            checks += verify_lemma2()
        else:
            raise DomainError(f"unknown oracle {name!r}")
    failed = [c for c in checks if not c.passed]
    for check in failed:
        logger.warning("oracle failed: %s (%s)", check.name, check.detail)
    return checks
