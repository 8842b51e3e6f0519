"""Tests for the permutation-channel simulator."""

import math

import numpy as np
import pytest
from scipy.stats import binom

from perm_converse.services.bounds import exact_converse_rate
from perm_converse.services.channel_sim import (
    Decoder,
    Message,
    SimCodebook,
    decode,
    identity_permuter,
    permutation_invariance_check,
    simulate,
    two_message_codebook,
)
from perm_converse.services.np_testing import BscChannel
from perm_converse.services.simplex_covering import ProbVec
from perm_converse.utils import DomainError


def test_message_needs_exactly_one_description():
    with pytest.raises(DomainError):
        Message()
    with pytest.raises(DomainError):
        Message(composition=(1, 1), distribution=ProbVec((0.5, 0.5)))


def test_codebook_rejects_empty_and_mixed_alphabets():
    with pytest.raises(DomainError):
        SimCodebook(messages=())
    with pytest.raises(DomainError):
        SimCodebook(messages=(Message(composition=(2, 0)), Message(composition=(1, 0, 1))))


def test_single_message_never_errs():
    book = SimCodebook(messages=(Message(composition=(60, 40)),))
    result = simulate(book, 0.3, 100, 500, seed=4)
    assert result.errors == 0
    assert result.p_e_hat == 0.0
    assert result.ci95_halfwidth == 0.0


def test_two_messages_are_never_confused_at_n_1000():
    # P[Bin(1000, 0.11) >= 500] is far below 1e-15
    assert binom.sf(499, 1000, 0.11) < 1e-15
    result = simulate(two_message_codebook(1000), 0.11, 1000, 100_000, seed=2024)
    assert result.trials == 100_000
    assert result.errors == 0
    assert result.p_e_hat == 0.0


def test_two_message_rate_respects_the_converse():
    n, eps, delta = 1000, 1e-3, 0.11
    result = simulate(two_message_codebook(n), delta, n, 10_000, seed=7)
    assert result.p_e_hat + result.ci95_halfwidth <= eps
    rate = math.log2(2) / math.log2(n)
    assert rate == pytest.approx(0.1003, abs=1e-4)
    assert rate <= exact_converse_rate(n, eps, delta)[1]


def test_useless_channel_gives_coin_flip():
    result = simulate(two_message_codebook(200), 0.5, 200, 20_000, seed=11)
    assert result.p_e_hat == result.errors / result.trials
    assert abs(result.p_e_hat - 0.5) <= 4 * result.ci95_halfwidth


def test_simulation_is_reproducible():
    book = two_message_codebook(40, Decoder.MAX_LIKELIHOOD_ON_TYPE)
    a = simulate(book, 0.3, 40, 3000, seed=9)
    b = simulate(book, 0.3, 40, 3000, seed=9)
    assert a == b


def test_simulation_independent_of_worker_count():
    book = two_message_codebook(30)
    one = simulate(book, 0.35, 30, 5000, seed=3, workers=1, block_size=700)
    four = simulate(book, 0.35, 30, 5000, seed=3, workers=4, block_size=700)
    assert one == four


def test_decoders_agree_on_binary_two_message_code():
    book_w = two_message_codebook(25, Decoder.WEIGHT_THRESHOLD)
    book_ml = two_message_codebook(25, Decoder.MAX_LIKELIHOOD_ON_TYPE)
    W = BscChannel(0.2).matrix
    counts = np.array([[25 - w, w] for w in range(26)])
    assert np.array_equal(decode(counts, book_w, W, 25), decode(counts, book_ml, W, 25))
    assert decode(np.array([[20, 5]]), book_w, W, 25).tolist() == [0]
    assert decode(np.array([[5, 20]]), book_w, W, 25).tolist() == [1]


def test_decode_ties_go_to_lowest_index():
    book = two_message_codebook(10)
    W = BscChannel(0.5).matrix
    assert decode(np.array([[3, 7], [7, 3]]), book, W, 10).tolist() == [0, 0]


def test_distribution_messages_over_a_ternary_channel():
    W = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
    book = SimCodebook(
        messages=tuple(Message(distribution=ProbVec.of(row)) for row in np.eye(3) * 0.7 + 0.1),
        decoder=Decoder.MAX_LIKELIHOOD_ON_TYPE,
    )
    result = simulate(book, 0.0, 200, 2000, seed=5, channel_matrix=W)
    assert result.p_e_hat < 0.01


def test_simulate_validates_inputs():
    book = two_message_codebook(10)
    with pytest.raises(DomainError):
        simulate(book, 0.1, 10, 0, seed=0)
    with pytest.raises(DomainError):
        simulate(book, 0.1, 12, 10, seed=0)
    with pytest.raises(DomainError):
        simulate(book, 0.1, 10, 10, seed=0, channel_matrix=np.array([[0.5, 0.6], [0.5, 0.5]]))


# ── Permutation invariance ───────────────────────────────────────────────────


def test_invariance_degenerate_law():
    assert permutation_invariance_check((1.0, 0.0), 20, 500, seed=0) == (0.0, 1.0)


def test_invariance_passes_on_most_seeds():
    passes = sum(permutation_invariance_check((0.3, 0.7), 50, 10_000, seed=s)[1] > 1e-3 for s in range(10))
    assert passes >= 9


def test_invariance_identity_permutation():
    statistic, p_value = permutation_invariance_check((0.3, 0.7), 50, 10_000, seed=1, permuter=identity_permuter)
    assert statistic >= 0.0
    assert p_value > 1e-6


def test_invariance_needs_enough_trials():
    with pytest.raises(DomainError):
        permutation_invariance_check((0.5, 0.5), 10, 99, seed=0)
