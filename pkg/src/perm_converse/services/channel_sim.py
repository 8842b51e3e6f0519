"""
Monte-Carlo simulation of the noisy permutation channel: encode, shuffle the
codeword uniformly at random, pass it through a DMC, decode from output counts.

Trials are cut into fixed-size blocks, each with its own Philox stream spawned
from the run seed, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy
from scipy.stats import chisquare

from perm_converse.services.np_testing import BscChannel
from perm_converse.services.simplex_covering import ProbVec
from perm_converse.utils import DomainError, make_rng, norm_ppf

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 2_000
MIN_INVARIANCE_TRIALS = 100


class Decoder(str, enum.Enum):
    WEIGHT_THRESHOLD = "weight_threshold"
    MAX_LIKELIHOOD_ON_TYPE = "max_likelihood_on_type"


@dataclass(frozen=True)
class Message:
    """A codeword given by its composition (symbol counts) or an i.i.d. input law."""

    composition: Optional[Tuple[int, ...]] = None
    distribution: Optional[ProbVec] = None

    def __post_init__(self):
        if (self.composition is None) == (self.distribution is None):
            raise DomainError("a message needs exactly one of composition or distribution")
        if self.composition is not None and any(c < 0 for c in self.composition):
            raise DomainError(f"negative count in composition {self.composition}")

    @property
    def num_symbols(self) -> int:
        return len(self.composition) if self.composition is not None else self.distribution.dim

    def input_law(self, n: int) -> np.ndarray:
        if self.composition is not None:
            return np.asarray(self.composition, dtype=float) / n
        return self.distribution.as_array()


@dataclass(frozen=True)
class SimCodebook:
    messages: Tuple[Message, ...]
    decoder: Decoder = Decoder.WEIGHT_THRESHOLD

    def __post_init__(self):
        if len(self.messages) < 1:
            raise DomainError("a codebook needs at least one message")
        if len({m.num_symbols for m in self.messages}) != 1:
            raise DomainError("all messages must use the same input alphabet")
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "decoder", Decoder(self.decoder))

    @property
    def num_inputs(self) -> int:
        return self.messages[0].num_symbols


@dataclass(frozen=True)
class SimResult:
    trials: int
    errors: int
    p_e_hat: float
    ci95_halfwidth: float
    seed: int


def two_message_codebook(n: int, decoder: Union[Decoder, str] = Decoder.WEIGHT_THRESHOLD) -> SimCodebook:
    """The all-zeros and all-ones codewords."""
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    return SimCodebook(messages=(Message(composition=(n, 0)), Message(composition=(0, n))),
                       decoder=Decoder(decoder))


# ── Decoding ──────────────────────────────────────────────────────────────────


def output_laws(codebook: SimCodebook, channel_matrix: np.ndarray, n: int) -> np.ndarray:
    """Expected output-symbol law of each message, shape (M, |Y|)."""
    return np.array([m.input_law(n) for m in codebook.messages]) @ channel_matrix


def decode(counts: np.ndarray, codebook: SimCodebook, channel_matrix: np.ndarray, n: int) -> np.ndarray:
    """
    Decode from output-symbol counts (one row per trial). Ties go to the lowest
    message index.
    """
    counts = np.atleast_2d(np.asarray(counts))
    laws = output_laws(codebook, channel_matrix, n)
    if codebook.decoder is Decoder.WEIGHT_THRESHOLD:
        if laws.shape[1] != 2:
            raise DomainError("weight_threshold decoding needs a binary output alphabet")
        frac = counts[:, 1] / n
        return np.argmin(np.abs(frac[:, None] - laws[None, :, 1]), axis=1)
    scores = xlogy(counts[:, None, :], laws[None, :, :]).sum(axis=2)
    return np.argmax(scores, axis=1)


# ── Simulation ────────────────────────────────────────────────────────────────


def _draw_inputs(rng: np.random.Generator, codebook: SimCodebook, sent: np.ndarray, n: int) -> np.ndarray:
    z = np.empty((sent.size, n), dtype=np.int64)
    for idx, msg in enumerate(codebook.messages):
        rows = sent == idx
        count = int(rows.sum())
        if count == 0:
            continue
        if msg.composition is not None:
            z[rows] = np.repeat(np.arange(len(msg.composition)), msg.composition)
        else:
            z[rows] = rng.choice(msg.num_symbols, size=(count, n), p=msg.distribution.as_array())
    return z


def _pass_channel(rng: np.random.Generator, x: np.ndarray, channel_matrix: np.ndarray) -> np.ndarray:
    u = rng.random(x.shape)
    if channel_matrix.shape[1] == 2:
        return (u < channel_matrix[x, 1]).astype(np.int64)
    cum = np.cumsum(channel_matrix, axis=1)
    return (u[..., None] >= cum[x][..., :-1]).sum(axis=-1)


def _run_block(seed_seq: np.random.SeedSequence, trials: int, codebook: SimCodebook,
               channel_matrix: np.ndarray, n: int) -> int:
    rng = make_rng(seed_seq)
    sent = rng.integers(0, len(codebook.messages), size=trials)
    x = rng.permuted(_draw_inputs(rng, codebook, sent, n), axis=1)
    y = _pass_channel(rng, x, channel_matrix)
    counts = np.stack([(y == sym).sum(axis=1) for sym in range(channel_matrix.shape[1])], axis=1)
    decoded = decode(counts, codebook, channel_matrix, n)
    return int(np.count_nonzero(decoded != sent))


def simulate(codebook: SimCodebook, delta: float, n: int, trials: int, seed: int,
             channel_matrix=None, workers: int = 1,
             block_size: int = DEFAULT_BLOCK_SIZE) -> SimResult:
    """
    Estimate the error probability of `codebook` over the permutation channel.
    The DMC is BSC(delta) unless `channel_matrix` is given.
    """
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if workers < 1 or block_size < 1:
        raise DomainError("workers and block_size must be positive")
    if channel_matrix is None:
        W = BscChannel(delta).matrix
    else:
        W = np.asarray(channel_matrix, dtype=float)
        if W.ndim != 2 or np.any(W < 0) or np.max(np.abs(W.sum(axis=1) - 1.0)) > 1e-9:
            raise DomainError("channel matrix must be row-stochastic")
    if W.shape[0] != codebook.num_inputs:
        raise DomainError(f"codebook uses {codebook.num_inputs} input symbols, channel has {W.shape[0]}")
    for msg in codebook.messages:
        if msg.composition is not None and sum(msg.composition) != n:
            raise DomainError(f"composition {msg.composition} does not sum to n={n}")

    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        errors = sum(pool.map(lambda job: _run_block(job[0], job[1], codebook, W, n), zip(streams, sizes)))

    p_hat = errors / trials
    half = norm_ppf(0.975) * math.sqrt(p_hat * (1.0 - p_hat) / trials)
    logger.info("simulate: n=%d trials=%d errors=%d p_e=%.6g", n, trials, errors, p_hat)
    return SimResult(trials=trials, errors=errors, p_e_hat=p_hat, ci95_halfwidth=half, seed=seed)


# ── Permutation invariance ────────────────────────────────────────────────────


Permuter = Callable[[np.ndarray, np.random.Generator], np.ndarray]


def random_permuter(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return rng.permuted(x, axis=1)


def identity_permuter(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return x


def permutation_invariance_check(pi: Union[ProbVec, Sequence[float]], n: int, trials: int, seed: int,
                                 permuter: Permuter = random_permuter) -> Tuple[float, float]:
    """
    Chi-square goodness of fit of the symbol seen at position 0 after permutation,
    pooled over trials, against pi. Returns (statistic, p_value); a law with a
    single supported symbol gives (0.0, 1.0).
    """
    if trials < MIN_INVARIANCE_TRIALS:
        raise DomainError(f"need at least {MIN_INVARIANCE_TRIALS} trials, got {trials}")
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    law = pi if isinstance(pi, ProbVec) else ProbVec.of(pi)
    p = law.as_array()
    rng = make_rng(seed)
    z = rng.choice(p.size, size=(trials, n), p=p)
    x = permuter(z, rng)
    observed = np.bincount(x[:, 0], minlength=p.size)
    support = p > 0
    if np.count_nonzero(support) <= 1:
        return 0.0, 1.0
    expected = trials * p[support]
    expected *= observed[support].sum() / expected.sum()
    result = chisquare(observed[support], expected)
    return float(result.statistic), float(result.pvalue)
