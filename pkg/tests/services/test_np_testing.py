"""Tests for Neyman-Pearson beta: closed form, brute force and Bayes mixtures."""

import math

import mpmath
import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import binom

from perm_converse.services.np_testing import (
    BayesMixture,
    BscChannel,
    TrimmedMixture,
    binom_cdf,
    binom_pmf_vector,
    bsc_bayes_mixture,
    bsc_beta,
    bsc_log_beta,
    bsc_outcome_laws,
    bsc_weight_laws,
    build_bayes_mixture,
    generic_log_beta_small,
    log_binom_pmf,
    mixture_log_law,
    np_beta_bruteforce,
    np_threshold,
    trimmed_mixture,
)
from perm_converse.services.simplex_covering import ProbVec, covering_tau, lambda_1d, lambda_2d
from perm_converse.utils import DomainError, NumericDomainError


def test_bsc_channel_folds_delta():
    assert BscChannel(0.89).delta == pytest.approx(0.11)
    assert BscChannel(0.11).matrix == pytest.approx(np.array([[0.89, 0.11], [0.11, 0.89]]))
    with pytest.raises(DomainError):
        BscChannel(0.0)
    with pytest.raises(DomainError):
        BscChannel(1.0)


# ── Binomial building blocks ─────────────────────────────────────────────────


def test_log_binom_pmf_examples():
    assert log_binom_pmf(7, 0, 0.3) == pytest.approx(7 * math.log(0.7))
    assert log_binom_pmf(4, 2, 0.5) == pytest.approx(math.log(6 / 16))
    with pytest.raises(DomainError):
        log_binom_pmf(4, 5, 0.5)


@pytest.mark.parametrize("n,q", [(1, 0.3), (50, 0.11), (2000, 0.7)])
def test_log_binom_pmf_normalises(n, q):
    assert logsumexp(log_binom_pmf(n, np.arange(n + 1), q)) == pytest.approx(0.0, abs=1e-10)


def test_log_binom_pmf_broadcasts_over_q():
    q = np.array([0.2, 0.5, 0.8])
    out = log_binom_pmf(10, 3, q)
    assert out.shape == (3,)
    assert out == pytest.approx(binom.logpmf(3, 10, q))


def test_binom_pmf_vector_matches_scipy():
    assert binom_pmf_vector(20, 0.11) == pytest.approx(binom.pmf(np.arange(21), 20, 0.11), rel=1e-12)


def test_binom_cdf_examples():
    assert binom_cdf(9, 9, 0.3) == 1.0
    assert binom_cdf(9, -1, 0.3) == 0.0
    assert binom_cdf(4, 1, 0.5) == pytest.approx(0.3125, rel=1e-14)
    direct = sum(math.comb(10, t) * 0.11 ** t * 0.89 ** (10 - t) for t in range(4))
    assert binom_cdf(10, 3, 0.11) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("n,T,q", [(10, 3, 0.11), (60, 20, 0.3), (200, 90, 0.5), (200, 20, 0.11),
                                   (5000, 560, 0.11), (5000, 600, 0.11), (10_000, 1150, 0.11)])
def test_binom_cdf_paths_agree(n, T, q):
    direct = binom_cdf(n, T, q, method="direct")
    incomplete_beta = binom_cdf(n, T, q, method="betainc")
    assert direct == pytest.approx(incomplete_beta, rel=1e-12)


def test_binom_cdf_large_n_uses_incomplete_beta():
    assert binom_cdf(100_000, 11_000, 0.11) == pytest.approx(binom.cdf(11_000, 100_000, 0.11), rel=1e-10)


# ── Threshold ────────────────────────────────────────────────────────────────


def test_np_threshold_exact_level():
    thr = np_threshold(4, 0.5, 0.6875)
    assert thr.T == 2
    assert thr.lam == pytest.approx(1.0, abs=1e-9)


def test_np_threshold_randomised():
    thr = np_threshold(4, 0.5, 0.9)
    assert thr.T == 3
    assert thr.lam == pytest.approx(0.85, abs=1e-12)


def test_np_threshold_near_one():
    thr = np_threshold(4, 0.5, 1 - 1e-9)
    assert thr.T == 4
    assert thr.lam == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("n,delta,alpha", [(10, 0.11, 0.9), (1000, 0.11, 0.999), (5000, 0.11, 0.9),
                                         (50_000, 0.22, 0.9999)])
def test_np_threshold_defining_condition(n, delta, alpha):
    thr = np_threshold(n, delta, alpha)
    assert 0.0 <= thr.lam <= 1.0
    level = thr.lam * binom.pmf(thr.T, n, delta) + binom.cdf(thr.T - 1, n, delta)
    assert level == pytest.approx(alpha, abs=1e-12)
    assert binom.cdf(thr.T, n, delta) >= alpha - 1e-12


def test_np_threshold_level_against_exact_sum():
    n, delta, alpha = 5000, 0.11, 0.9
    thr = np_threshold(n, delta, alpha)
    with mpmath.workdps(40):
        q = mpmath.mpf(delta)
        pmf = [mpmath.binomial(n, t) * q ** t * (1 - q) ** (n - t) for t in range(thr.T + 1)]
        level = mpmath.fsum(pmf[:-1]) + mpmath.mpf(thr.lam) * pmf[-1]
    assert abs(float(level) - alpha) <= 1e-12


def test_np_threshold_rejects_bad_alpha():
    with pytest.raises(DomainError):
        np_threshold(10, 0.11, 1.0)


# ── Trimmed mixture ──────────────────────────────────────────────────────────


def test_trimmed_mixture_half_collapses():
    mix = trimmed_mixture(50, 0.5)
    assert mix.q_values == (0.5,)
    assert mix.weight == 1.0


def test_trimmed_mixture_survivors():
    delta, n = 0.11, 100
    mix = trimmed_mixture(n, delta)
    r0 = 1 / (covering_tau(delta) * n)
    low = [r0 * i * i for i in range(100) if delta <= r0 * i * i < 0.5]
    assert len(mix) == 2 * len(low) + 1
    assert all(delta <= q <= 1 - delta for q in mix.q_values)
    assert list(mix.q_values) == sorted(mix.q_values)
    assert mix.weight * len(mix) == pytest.approx(1.0)


def test_trimmed_mixture_validation():
    with pytest.raises(NumericDomainError):
        TrimmedMixture(q_values=(), delta=0.11)
    with pytest.raises(DomainError):
        TrimmedMixture(q_values=(0.05,), delta=0.11)


# ── Closed-form beta ─────────────────────────────────────────────────────────


@pytest.mark.parametrize("n", [5, 100, 5000])
def test_bsc_log_beta_against_itself_is_alpha(n):
    mix = TrimmedMixture(q_values=(0.11,), delta=0.11)
    assert bsc_log_beta(n, 0.11, 0.9, mix) == pytest.approx(math.log2(0.9), rel=1e-12)


@pytest.mark.parametrize("n,delta,alpha", [(10, 0.11, 0.9), (8, 0.22, 0.99), (12, 0.3, 0.9)])
def test_bsc_log_beta_matches_brute_force(n, delta, alpha):
    mix = trimmed_mixture(n, delta)
    p_law, q_law = bsc_outcome_laws(n, delta, mix)
    brute = math.log2(np_beta_bruteforce(p_law, q_law, alpha))
    assert bsc_log_beta(n, delta, alpha, mix) == pytest.approx(brute, rel=1e-9)


def test_weight_statistic_is_sufficient():
    n, delta, alpha = 3, 0.11, 0.9
    mix = TrimmedMixture(q_values=(0.5,), delta=delta)
    p_law = binom.pmf(np.arange(n + 1), n, delta)
    q_law = binom.pmf(np.arange(n + 1), n, 0.5)
    brute = np_beta_bruteforce(p_law, q_law, alpha)
    assert math.log2(brute) == pytest.approx(bsc_log_beta(n, delta, alpha, mix), rel=1e-12)


def test_weight_laws_match_outcome_laws():
    n, delta = 9, 0.11
    mix = trimmed_mixture(n, delta)
    p_w, q_w = bsc_weight_laws(n, delta, mix)
    assert p_w.sum() == pytest.approx(1.0)
    assert q_w.sum() == pytest.approx(1.0)
    for alpha in (0.5, 0.9, 0.99):
        from_weights = np_beta_bruteforce(p_w, q_w, alpha)
        assert from_weights == pytest.approx(bsc_beta(n, delta, alpha, mix), rel=1e-10)


def test_bsc_beta_nondecreasing_in_alpha():
    mix = trimmed_mixture(200, 0.11)
    alphas = np.linspace(0.05, 0.999, 60)
    betas = [bsc_beta(200, 0.11, a, mix) for a in alphas]
    assert all(b2 >= b1 for b1, b2 in zip(betas, betas[1:]))


def test_mixture_dominates_each_point():
    n, delta, alpha = 300, 0.11, 0.99
    mix = trimmed_mixture(n, delta)
    full = bsc_beta(n, delta, alpha, mix)
    for q in mix.q_values[:: max(1, len(mix) // 10)]:
        single = bsc_beta(n, delta, alpha, TrimmedMixture(q_values=(q,), delta=delta))
        assert full >= mix.weight * single * (1 - 1e-12)


def test_bsc_log_beta_large_n_is_finite(bsc_mixture):
    value = bsc_log_beta(1000, 0.11, 0.999, bsc_mixture)
    assert math.isfinite(value)
    assert value < 0


# ── Brute force ──────────────────────────────────────────────────────────────


def test_bruteforce_equal_laws_gives_alpha():
    law = [0.1, 0.2, 0.3, 0.4]
    assert np_beta_bruteforce(law, law, 0.37) == pytest.approx(0.37, rel=1e-12)


def test_bruteforce_disjoint_supports():
    assert np_beta_bruteforce([0.5, 0.5, 0.0], [0.0, 0.0, 1.0], 0.9) == 0.0


def test_bruteforce_accepts_mappings():
    p = {"a": 0.5, "b": 0.5}
    q = {"a": 0.1, "c": 0.9}
    # accept "b" (ratio inf) then half of "a"
    assert np_beta_bruteforce(p, q, 0.75) == pytest.approx(0.05)


def test_bruteforce_rejects_unnormalised():
    with pytest.raises(DomainError):
        np_beta_bruteforce([0.5, 0.6], [0.5, 0.5], 0.9)


def test_bruteforce_groups_equal_ratio_classes():
    # every outcome has ratio 2 except the last; split must be proportional within the class
    p = np.array([0.2, 0.2, 0.2, 0.4])
    q = np.array([0.1, 0.1, 0.1, 0.7])
    assert np_beta_bruteforce(p, q, 0.3) == pytest.approx(0.15)


# ── Bayes mixture ────────────────────────────────────────────────────────────


def _centers(m):
    return [ProbVec.of((i / (m + 1), 1 - i / (m + 1))) for i in range(1, m + 1)]


def test_build_bayes_mixture_padding():
    centers = _centers(5)
    mixture = build_bayes_mixture(2, centers)
    assert mixture.E == 3
    assert mixture.subsets[2][0] == centers[4]
    assert mixture.subsets[2][1] == centers[0]
    used = {id(c) for s in mixture.subsets for c in s.values()}
    assert used == {id(c) for c in centers}


def test_build_bayes_mixture_sizes():
    assert build_bayes_mixture(2, _centers(2)).E == 1
    assert build_bayes_mixture(2, _centers(9)).E == 5
    assert build_bayes_mixture(2, lambda_2d(0.04)).E == 5


def test_bayes_mixture_validation():
    with pytest.raises(DomainError):
        BayesMixture(subsets=(), num_inputs=2)
    with pytest.raises(DomainError):
        BayesMixture(subsets=({0: ProbVec((0.5, 0.5))},), num_inputs=2)


def test_generic_beta_with_true_rows_is_alpha():
    W = np.array([[0.7, 0.3], [0.2, 0.8]])
    mixture = BayesMixture(subsets=({0: ProbVec.of(W[0]), 1: ProbVec.of(W[1])},), num_inputs=2)
    assert generic_log_beta_small(W, [0, 1, 1, 0], mixture, 0.8) == pytest.approx(math.log2(0.8), rel=1e-12)


def test_generic_beta_matches_bsc_closed_form():
    n, delta, alpha = 4, 0.11, 0.9
    mix = trimmed_mixture(n, delta)
    generic = generic_log_beta_small(BscChannel(delta).matrix, [0] * n, bsc_bayes_mixture(mix), alpha)
    assert generic == pytest.approx(bsc_log_beta(n, delta, alpha, mix), rel=1e-9)


def test_generic_beta_rejects_large_instances():
    W = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25]])
    mixture = build_bayes_mixture(2, [ProbVec.of((1 / 3, 1 / 3, 1 / 3))])
    with pytest.raises(DomainError):
        generic_log_beta_small(W, [0] * 13, mixture, 0.9)


def test_generic_beta_rejects_zero_entries():
    W = np.array([[1.0, 0.0], [0.5, 0.5]])
    mixture = build_bayes_mixture(2, lambda_2d(0.25))
    with pytest.raises(DomainError):
        generic_log_beta_small(W, [0, 1], mixture, 0.9)


def test_mixture_ratio_bounded_by_best_subset():
    W = np.array([[0.6, 0.3, 0.1], [0.2, 0.3, 0.5]])
    x_seq = [0, 1, 1, 0, 1]
    centers = [ProbVec.of(r) for r in ((0.5, 0.3, 0.2), (0.25, 0.25, 0.5), (0.7, 0.2, 0.1), (0.1, 0.4, 0.5))]
    mixture = build_bayes_mixture(2, centers)
    log_p, log_q = mixture_log_law(W, x_seq, mixture)
    Q = mixture.as_array()
    for e in range(mixture.E):
        acc = np.zeros(1)
        for x in x_seq:
            acc = (acc[:, None] + np.log(Q[e, x])[None, :]).ravel()
        assert np.all(log_p - log_q <= math.log(mixture.E) + log_p - acc + 1e-12)


def test_mixture_laws_normalise():
    W = np.array([[0.6, 0.4], [0.3, 0.7]])
    mixture = build_bayes_mixture(2, lambda_2d(0.04))
    log_p, log_q = mixture_log_law(W, [0, 1, 0], mixture)
    assert np.exp(log_p).sum() == pytest.approx(1.0)
    assert np.exp(log_q).sum() == pytest.approx(1.0)


def test_trimmed_mixture_endpoints_excluded():
    mix = trimmed_mixture(10, 0.11)
    ladder = lambda_1d(1 / (covering_tau(0.11) * 10)).points
    assert 0.0 in ladder and 0.0 not in mix.q_values
