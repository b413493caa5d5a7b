"""Empirical lower envelope of kurtosis as a function of skewness.

The skewness axis is binned; the minimum observed kurtosis per bin
estimates the envelope. For n = 4..9 piecewise parabolas are fitted and
compared against the embedded reference coefficients; for large n the
gap to the Pearson floor 1 + S^2 quantifies convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import ParabolaSegment, bound_set, envelope_spec
from .engine import BlockStatsTable
from .errors import EmptySampleError, InsufficientDataError, InvalidParameterError

DEFAULT_BIN_WIDTH = 0.01


@dataclass(frozen=True)
class EnvelopeEstimate:
    """Binned minimum kurtosis per skewness bin (occupied bins only)."""

    n: int
    bin_width: float
    s_centers: np.ndarray
    k_min: np.ndarray
    counts: np.ndarray
    total_rows: int


class EnvelopeAccumulator:
    """Streaming min/count accumulator over skewness bins.

    Bin edges sit at integer multiples of the bin width on both sides of
    zero, so the grid is exactly symmetric; the merge (min, +) is
    associative and commutative, making the result schedule-independent.
    """

    def __init__(self, n: int, bin_width: float = DEFAULT_BIN_WIDTH):
        if bin_width <= 0:
            raise InvalidParameterError("bin_width must be positive")
        self.n = n
        self.bin_width = float(bin_width)
        smax = bound_set(n).skew_abs_max
        self._half = max(1, math.ceil(smax / self.bin_width - 1e-12))
        size = 2 * self._half
        self._k_min = np.full(size, np.inf)
        self._counts = np.zeros(size, dtype=np.int64)
        self._rows = 0

    def update(self, skewness: np.ndarray, kurtosis: np.ndarray) -> None:
        s = np.asarray(skewness, dtype=np.float64)
        k = np.asarray(kurtosis, dtype=np.float64)
        idx = np.floor(s / self.bin_width).astype(np.int64) + self._half
        np.clip(idx, 0, 2 * self._half - 1, out=idx)
        np.minimum.at(self._k_min, idx, k)
        np.add.at(self._counts, idx, 1)
        self._rows += s.size

    def merge(self, other: "EnvelopeAccumulator") -> None:
        np.minimum(self._k_min, other._k_min, out=self._k_min)
        self._counts += other._counts
        self._rows += other._rows

    def finalize(self) -> EnvelopeEstimate:
        occupied = self._counts > 0
        idx = np.flatnonzero(occupied)
        centers = (idx - self._half + 0.5) * self.bin_width
        return EnvelopeEstimate(
            n=self.n,
            bin_width=self.bin_width,
            s_centers=centers,
            k_min=self._k_min[occupied],
            counts=self._counts[occupied].copy(),
            total_rows=self._rows,
        )


def lower_envelope(table: BlockStatsTable, bin_width: float = DEFAULT_BIN_WIDTH) -> EnvelopeEstimate:
    """Binned envelope estimate from a block-stats table."""
    if len(table) == 0:
        raise EmptySampleError("empty table")
    acc = EnvelopeAccumulator(table.n, bin_width)
    acc.update(table.skewness, table.kurtosis)
    return acc.finalize()


@dataclass(frozen=True)
class FittedSegment:
    """Least-squares parabola over one left-side skewness range."""

    segment: ParabolaSegment
    rms: float
    n_bins: int


@dataclass(frozen=True)
class FittedEnvelope:
    n: int
    segments: tuple[FittedSegment, ...]
    breakpoints: tuple[float, ...]
    total_sse: float


def _fold_left(estimate: EnvelopeEstimate):
    """Merge +/- bins by min onto the left half axis (centers <= 0)."""
    j = np.floor(np.abs(estimate.s_centers) / estimate.bin_width).astype(np.int64)
    size = int(j.max()) + 1
    k = np.full(size, np.inf)
    c = np.zeros(size, dtype=np.int64)
    np.minimum.at(k, j, estimate.k_min)
    np.add.at(c, j, estimate.counts)
    occupied = c > 0
    idx = np.flatnonzero(occupied)
    centers = -(idx + 0.5) * estimate.bin_width
    order = np.argsort(centers)
    return centers[order], k[occupied][order], c[occupied][order]


def _fit_parabola(s, k, w):
    a = np.column_stack([s * s, s, np.ones_like(s)])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(a * sw[:, None], k * sw, rcond=None)
    resid = k - a @ coef
    sse = float(np.sum(resid * resid))
    return coef, sse


def fit_envelope(
    estimate: EnvelopeEstimate,
    breakpoints="table1",
    weights: str = "uniform",
    min_count: int = 1,
    max_segments: int = 4,
) -> FittedEnvelope:
    """Fit piecewise parabolas K = a S^2 + b S + c to the envelope bins.

    The envelope is symmetric, so +/- bins are folded by min onto the
    left side before fitting. ``breakpoints`` is "table1" (the reference
    ranges for this n), "auto" (scan 1..max_segments contiguous segments,
    minimizing SSE plus (2*rms_ref)^2 per extra segment, rms_ref taken
    from the single-segment fit), or an iterable of interior edges
    (negative, ascending). Bins with fewer than ``min_count`` rows are
    ignored; each segment needs at least 3 bins. ``weights`` is "uniform"
    or "count" (weight bins by occupancy).
    """
    s, k, c = _fold_left(estimate)
    keep = c >= min_count
    s, k, c = s[keep], k[keep], c[keep]
    if s.size < 3:
        raise InsufficientDataError("segment underdetermined")
    w = c.astype(np.float64) if weights == "count" else np.ones_like(k)
    if weights not in ("uniform", "count"):
        raise InvalidParameterError("weights must be 'uniform' or 'count'")

    smax = bound_set(estimate.n).skew_abs_max
    if isinstance(breakpoints, str) and breakpoints == "table1":
        spec = envelope_spec(estimate.n)
        edges = [seg.s_lo for seg in spec.segments] + [0.0]
    elif isinstance(breakpoints, str) and breakpoints == "auto":
        edges = _auto_edges(s, k, w, smax, max_segments)
    else:
        interior = sorted(float(x) for x in breakpoints)
        if any(x >= 0 or x <= -smax for x in interior):
            raise InvalidParameterError("interior breakpoints must lie in (-skew_max, 0)")
        edges = [-smax] + interior + [0.0]

    fitted = []
    total_sse = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (s >= lo - 1e-12) & (s <= hi + 1e-12)
        if m.sum() < 3:
            raise InsufficientDataError(
                f"segment underdetermined: [{lo:.5f}, {hi:.5f}] has {int(m.sum())} bins"
            )
        coef, sse = _fit_parabola(s[m], k[m], w[m])
        total_sse += sse
        fitted.append(FittedSegment(
            segment=ParabolaSegment(float(coef[0]), float(coef[1]), float(coef[2]), lo, hi),
            rms=float(np.sqrt(sse / m.sum())),
            n_bins=int(m.sum()),
        ))
    return FittedEnvelope(
        n=estimate.n,
        segments=tuple(fitted),
        breakpoints=tuple(edges),
        total_sse=total_sse,
    )


def _auto_edges(s, k, w, smax, max_segments):
    """Dynamic-programming scan over contiguous bin partitions."""
    nb = s.size
    max_segments = min(max_segments, nb // 3)
    sse = np.full((nb, nb), np.inf)
    for i in range(nb):
        for j in range(i + 2, nb):
            _, sse[i, j] = _fit_parabola(s[i : j + 1], k[i : j + 1], w[i : j + 1])

    # best[g][j] = (cost, start) of partitioning bins 0..j into g segments
    best = [{} for _ in range(max_segments + 1)]
    for j in range(nb):
        if np.isfinite(sse[0, j]):
            best[1][j] = (sse[0, j], 0)
    for g in range(2, max_segments + 1):
        for j in range(nb):
            cand = None
            for i in range(1, j - 1):
                if (i - 1) in best[g - 1] and np.isfinite(sse[i, j]):
                    cost = best[g - 1][i - 1][0] + sse[i, j]
                    if cand is None or cost < cand[0]:
                        cand = (cost, i)
            if cand is not None:
                best[g][j] = cand

    if (nb - 1) not in best[1]:
        raise InsufficientDataError("segment underdetermined")
    rms_ref = math.sqrt(best[1][nb - 1][0] / nb)
    penalty = (2.0 * rms_ref) ** 2
    choice, score = 1, best[1][nb - 1][0]
    for g in range(2, max_segments + 1):
        if (nb - 1) in best[g]:
            cost = best[g][nb - 1][0] + (g - 1) * penalty
            if cost < score:
                choice, score = g, cost

    # Walk the partition back into edges.
    cuts = []
    j = nb - 1
    for g in range(choice, 1, -1):
        _, i = best[g][j]
        cuts.append(i)
        j = i - 1
    cuts.reverse()
    edges = [-smax]
    for i in cuts:
        edges.append(float(s[i] - 0.5 * (s[i] - s[i - 1])))
    edges.append(0.0)
    return edges


def pearson_gap(estimate: EnvelopeEstimate) -> float:
    """Max over bins of (k_min - (1 + s^2)); small for large n."""
    if estimate.s_centers.size == 0:
        raise EmptySampleError("empty estimate")
    gap = estimate.k_min - (1.0 + estimate.s_centers**2)
    return float(np.max(gap))
