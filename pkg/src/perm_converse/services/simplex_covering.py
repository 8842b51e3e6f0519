"""
Divergence covering of the probability simplex: square-ladder grids, KL / chi-square
divergences and sampled covering-radius checks. All divergences are returned in bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import rel_entr

from perm_converse.utils import DomainError, make_rng, nats_to_bits

logger = logging.getLogger(__name__)

SUM_TOL = 1e-12
DEDUP_TOL = 1e-15
COVERING_CONSTANT = 7.0

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class ProbVec:
    """A point of the simplex: non-negative masses summing to one."""

    mass: Tuple[float, ...]

    def __post_init__(self):
        if len(self.mass) == 0:
            raise DomainError("ProbVec needs at least one entry")
        if any(m < 0 for m in self.mass):
            raise DomainError(f"negative probability in {self.mass}")
        total = math.fsum(self.mass)
        if abs(total - 1.0) > SUM_TOL:
            raise DomainError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def of(cls, values: Iterable[float]) -> "ProbVec":
        """Build from any iterable, absorbing rounding noise up to SUM_TOL into the masses."""
        mass = tuple(float(v) for v in values)
        total = math.fsum(mass)
        if mass and abs(total - 1.0) <= SUM_TOL:
            mass = tuple(m / total for m in mass)
        return cls(mass)

    @property
    def dim(self) -> int:
        return len(self.mass)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mass, dtype=float)

    def __getitem__(self, i: int) -> float:
        return self.mass[i]


Distribution = Union[ProbVec, Sequence[float], np.ndarray]


def _as_array(p: Distribution) -> np.ndarray:
    if isinstance(p, ProbVec):
        return p.as_array()
    return np.asarray(p, dtype=float)


def _pair(p: Distribution, q: Distribution) -> Tuple[np.ndarray, np.ndarray]:
    pa, qa = _as_array(p), _as_array(q)
    if pa.shape != qa.shape:
        raise DomainError(f"dimension mismatch: {pa.shape} vs {qa.shape}")
    return pa, qa


@dataclass(frozen=True)
class Grid1D:
    """Sorted ladder of points in [0, 1], symmetric about 1/2."""

    points: Tuple[float, ...]
    r0: float

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True, eq=False)
class GridK:
    """Covering centers of the simplex in K dimensions, one row per center."""

    points: np.ndarray
    r0: float
    dim: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DomainError(f"centers must be an (m x {self.dim}) array, got shape {pts.shape}")
        if pts.size and (pts.min() < 0 or np.max(np.abs(pts.sum(axis=1) - 1.0)) > SUM_TOL):
            raise DomainError("every center must be a probability vector")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def centers(self) -> List[ProbVec]:
        return [ProbVec.of(row) for row in self.points]


# ── Divergences ───────────────────────────────────────────────────────────────


def kl_div(p: Distribution, q: Distribution) -> float:
    """D(p||q) in bits; +inf when p puts mass where q has none."""
    pa, qa = _pair(p, q)
    return float(nats_to_bits(np.sum(rel_entr(pa, qa))))


def chi2_div(p: Distribution, q: Distribution) -> float:
    """Chi-square divergence sum (p-q)^2/q; +inf on support violation."""
    pa, qa = _pair(p, q)
    if np.any((qa == 0) & (pa > 0)):
        return math.inf
    support = qa > 0
    return float(np.sum((pa[support] - qa[support]) ** 2 / qa[support]))


def llr_moments(p: Distribution, q: Distribution) -> Tuple[float, float, float]:
    """
    Mean, variance and third absolute central moment of log2(p/q) under p.
    Returns (D, V, T); all infinite on support violation.
    """
    pa, qa = _pair(p, q)
    if np.any((qa == 0) & (pa > 0)):
        return math.inf, math.inf, math.inf
    support = pa > 0
    w = pa[support]
    llr = np.log2(w / qa[support])
    d = float(np.dot(w, llr))
    dev = np.abs(llr - d)
    return d, float(np.dot(w, dev ** 2)), float(np.dot(w, dev ** 3))


def kl_div_matrix(samples: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise D(sample || center) in bits, shape (len(samples), len(centers))."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    if s.shape[1] != c.shape[1]:
        raise DomainError(f"dimension mismatch: {s.shape[1]} vs {c.shape[1]}")
    return nats_to_bits(rel_entr(s[:, None, :], c[None, :, :]).sum(axis=2))


def nearest_center(p: Distribution, grid: GridK) -> Tuple[int, float]:
    """Index of the center minimising D(p||Q) and that divergence."""
    if len(grid) == 0:
        raise DomainError("grid is empty")
    divs = kl_div_matrix(_as_array(p)[None, :], grid.points)[0]
    idx = int(np.argmin(divs))
    return idx, float(divs[idx])


# ── Grid construction ─────────────────────────────────────────────────────────


def _check_r0(r0: float) -> None:
    if not r0 > 0:
        raise DomainError(f"r0 must be positive, got {r0!r}")


def lambda_1d(r0: float) -> Grid1D:
    """Square ladder {r0 i^2 < 1/2}, its mirror image {1 - r0 i^2}, and 1/2."""
    _check_r0(r0)
    i_max = math.isqrt(int(math.ceil(0.5 / r0))) + 1
    i = np.arange(0, i_max + 1, dtype=float)
    low = r0 * i * i
    low = low[low < 0.5]
    pts = np.sort(np.concatenate([low, 1.0 - low, [0.5]]))
    keep = np.concatenate([[True], np.diff(pts) > DEDUP_TOL])
    pts = pts[keep]
    logger.debug("lambda_1d(r0=%g): %d points", r0, pts.size)
    return Grid1D(points=tuple(float(x) for x in pts), r0=float(r0))


def lambda_2d(r0: float) -> GridK:
    ladder = lambda_1d(r0).as_array()
    return GridK(points=np.column_stack([ladder, 1.0 - ladder]), r0=float(r0), dim=2)


def lambda_k(k: int, r0: float) -> GridK:
    """
    Recursive product grid on the (k-1)-simplex: an outer ladder on the last
    coordinate, the (k-1)-dimensional grid rescaled by (1 - q) on the rest.
    """
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    _check_r0(r0)
    if k == 2:
        return lambda_2d(r0)
    inner = lambda_k(k - 1, (k - 1) / k * r0).points
    outer = lambda_1d(r0 / k).as_array()
    blocks = [np.column_stack([(1.0 - q) * inner, np.full(inner.shape[0], q)]) for q in outer]
    pts = np.vstack(blocks)
    logger.debug("lambda_k(k=%d, r0=%g): %d centers", k, r0, pts.shape[0])
    return GridK(points=pts, r0=float(r0), dim=k)


def covering_number_upper(k: int, r: float) -> float:
    """Upper bound c^(k-1) ((k-1)/r)^((k-1)/2) on the divergence covering number, c = 7."""
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    return COVERING_CONSTANT ** (k - 1) * ((k - 1) / r) ** ((k - 1) / 2)


def covering_tau(delta: float, c: float = 2.0) -> float:
    """Grid constant tau = c / delta for the binary case."""
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
    return c / delta


# ── Radius checks ─────────────────────────────────────────────────────────────


Region = Optional[Tuple[float, float]]


def _region_samples(grid: GridK, region: Region, num_samples: int, seed: int,
                    include_midpoints: bool) -> np.ndarray:
    rng = make_rng(seed)
    k = grid.dim
    if k == 2:
        lo, hi = (0.0, 1.0) if region is None else (float(region[0]), float(region[1]))
        if not 0.0 <= lo <= hi <= 1.0:
            raise DomainError(f"region must satisfy 0 <= lo <= hi <= 1, got {region}")
        # stratified: one uniform draw per equal-width cell, plus both ends
        cells = (np.arange(num_samples) + rng.random(num_samples)) / num_samples
        first = [lo + (hi - lo) * cells, [lo, hi]]
        if include_midpoints:
            ladder = np.sort(grid.points[:, 0])
            mids = 0.5 * (ladder[1:] + ladder[:-1])
            first.append(mids[(mids >= lo) & (mids <= hi)])
        p = np.concatenate(first)
        return np.column_stack([p, 1.0 - p])
    if region is not None:
        raise DomainError("interval regions are only defined for K = 2")
    draws = rng.dirichlet(np.ones(k), size=num_samples)
    return np.vstack([draws, np.eye(k), np.full((1, k), 1.0 / k)])


def verify_radius(grid: GridK, region: Region = None, num_samples: int = 10_000,
                  seed: int = 0, include_midpoints: bool = True) -> float:
    """
    Sampled covering radius: max over sampled P of min over centers of D(P||Q), in bits.

    `region` is an interval (lo, hi) for the first coordinate when K = 2, or None for
    the whole simplex. The value is a lower estimate of the true worst-case radius.
    """
    if len(grid) == 0:
        raise DomainError("grid is empty")
    if num_samples < 1:
        raise DomainError(f"num_samples must be at least 1, got {num_samples}")
    samples = _region_samples(grid, region, num_samples, seed, include_midpoints)
    rows = max(1, _CHUNK_ELEMENTS // (len(grid) * grid.dim))
    worst = 0.0
    for start in range(0, samples.shape[0], rows):
        block = kl_div_matrix(samples[start:start + rows], grid.points)
        worst = max(worst, float(block.min(axis=1).max()))
    logger.debug("verify_radius: %d samples, %d centers -> %g bits", samples.shape[0], len(grid), worst)
    return worst


def max_log_ratio_gap(grid: Grid1D, lo: float, hi: float, num_samples: int = 2_000) -> float:
    """
    max over w in [lo, hi] of min over grid points q > 0 of |ln(w / q)|.
    Samples an even mesh plus the geometric midpoints between neighbouring points.
    """
    if not 0 < lo <= hi:
        raise DomainError(f"need 0 < lo <= hi, got {lo}, {hi}")
    log_q = np.log(np.array([q for q in grid.points if q > 0]))
    geo = np.exp(0.5 * (log_q[1:] + log_q[:-1]))
    w = np.concatenate([np.linspace(lo, hi, num_samples), geo[(geo >= lo) & (geo <= hi)]])
    log_w = np.log(w)
    pos = np.clip(np.searchsorted(log_q, log_w), 1, log_q.size - 1)
    gap = np.minimum(np.abs(log_w - log_q[pos - 1]), np.abs(log_w - log_q[pos]))
    return float(gap.max())
