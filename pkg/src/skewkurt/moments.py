"""Sample moments of fixed-size blocks.

Central moments, sample skewness S, sample kurtosis K, and the
scale-invariant dominance ratio R for one block or a stack of equal-size
blocks. R compares the centered third-power sum against the fourth-power
sum; it approaches 1 exactly when a few extreme values dominate both,
which is when K tracks the cube-root-of-n power law in |S|.

All functions are pure; everything is plain 64-bit float arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleError, InvalidParameterError, NonFiniteValueError

# Blocks whose spread is below ~32 machine epsilons relative to their
# magnitude are rounding noise around a constant; they are flagged
# degenerate instead of yielding garbage ratios. Integer-valued constant
# blocks produce m2 == 0 exactly and are caught by the same test.
_DEGENERATE_REL = 32.0 * np.finfo(np.float64).eps


@dataclass(frozen=True)
class SampleBlock:
    """One fixed-size block of finite real values."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidParameterError("block values must be one-dimensional")
        if arr.size == 0:
            raise EmptySampleError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValueError("non-finite value")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class MomentSummary:
    """Moment statistics of a single block.

    ``skewness`` is m3/m2^(3/2), ``kurtosis`` is m4/m2^2 (not excess), and
    ``ratio`` is |sum d^3|^(4/3) / sum d^4 over centered deviations d.
    When ``degenerate`` is true (zero spread) the three shape statistics
    are NaN and must not enter downstream aggregation.
    """

    n: int
    mean: float
    m2: float
    m3: float
    m4: float
    skewness: float
    kurtosis: float
    ratio: float
    degenerate: bool


@dataclass(frozen=True)
class BlockSummaries:
    """Column-wise moment statistics for a stack of blocks (one row each).

    ``degenerate`` marks zero-spread rows; their shape statistics are NaN.
    """

    n: int
    mean: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m4: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    ratio: np.ndarray
    degenerate: np.ndarray

    def __len__(self) -> int:
        return self.mean.size


def _as_block_values(block) -> np.ndarray:
    if isinstance(block, SampleBlock):
        return block.values
    arr = np.asarray(block, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParameterError("block values must be one-dimensional")
    if arr.size == 0:
        raise EmptySampleError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("non-finite value")
    return arr


def block_moments(blocks: np.ndarray):
    """Mean and central moments m2, m3, m4 for each row of a 2-D stack.

    Two passes per block: the mean first, then powered deviations. For
    block sizes up to ~10^3 this avoids the cancellation of one-pass
    raw-moment formulas at negligible cost.
    """
    x = np.asarray(blocks, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidParameterError("expected a 2-D stack of blocks")
    mean = x.mean(axis=1)
    d = x - mean[:, None]
    d2 = d * d
    m2 = d2.mean(axis=1)
    m3 = (d2 * d).mean(axis=1)
    m4 = (d2 * d2).mean(axis=1)
    # Even-power means cannot be negative; guard against exotic rounding.
    np.maximum(m2, 0.0, out=m2)
    np.maximum(m4, 0.0, out=m4)
    return mean, m2, m3, m4


def central_moments(block) -> tuple[float, float, float, float]:
    """(mean, m2, m3, m4) of one block, m_r = (1/n) sum (x_i - mean)^r."""
    values = _as_block_values(block)
    mean, m2, m3, m4 = block_moments(values[None, :])
    return float(mean[0]), float(m2[0]), float(m3[0]), float(m4[0])


def summarize_blocks(blocks: np.ndarray, validate: bool = True) -> BlockSummaries:
    """Compute S, K, R and the degenerate mask for a 2-D stack of blocks.

    Parameters
    ----------
    blocks : ndarray, shape (n_blocks, n)
        One block per row, n >= 2.
    validate : bool
        Check finiteness of the input (skip for trusted synthetic data).
    """
    x = np.asarray(blocks, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidParameterError("expected a 2-D stack of blocks")
    n = x.shape[1]
    if n < 2:
        raise InvalidParameterError("block size must be at least 2")
    if validate and not np.all(np.isfinite(x)):
        raise NonFiniteValueError("non-finite value")

    mean, m2, m3, m4 = block_moments(x)
    amax = np.max(np.abs(x), axis=1)
    degenerate = m2 <= (_DEGENERATE_REL * amax) ** 2

    with np.errstate(divide="ignore", invalid="ignore"):
        skewness = m3 / m2**1.5
        kurtosis = m4 / (m2 * m2)
        ratio = np.cbrt(n) * np.abs(m3) ** (4.0 / 3.0) / m4
    for arr in (skewness, kurtosis, ratio):
        arr[degenerate] = np.nan

    return BlockSummaries(
        n=n,
        mean=mean,
        m2=m2,
        m3=m3,
        m4=m4,
        skewness=skewness,
        kurtosis=kurtosis,
        ratio=ratio,
        degenerate=degenerate,
    )


def summarize(block) -> MomentSummary:
    """Moment summary of a single block (n >= 2).

    A zero-spread block yields ``degenerate=True`` with NaN shape
    statistics rather than an error; callers filter degenerate rows.
    """
    values = _as_block_values(block)
    if values.size < 2:
        raise InvalidParameterError("block size must be at least 2")
    s = summarize_blocks(values[None, :], validate=False)
    return MomentSummary(
        n=s.n,
        mean=float(s.mean[0]),
        m2=float(s.m2[0]),
        m3=float(s.m3[0]),
        m4=float(s.m4[0]),
        skewness=float(s.skewness[0]),
        kurtosis=float(s.kurtosis[0]),
        ratio=float(s.ratio[0]),
        degenerate=bool(s.degenerate[0]),
    )


def power_law_rhs(n: int, skewness) -> float | np.ndarray:
    """n^(1/3) * |skewness|^(4/3).

    For any non-degenerate block, kurtosis * ratio equals this exactly
    (algebraic identity); with ratio == 1 it is the power-law prediction
    for the kurtosis itself. Fractional powers of negative skewness use
    the real cube root, i.e. |s|^(4/3).
    """
    if n < 1:
        raise InvalidParameterError("n must be positive")
    s = np.abs(np.asarray(skewness, dtype=np.float64))
    out = np.cbrt(float(n)) * s ** (4.0 / 3.0)
    return float(out) if np.isscalar(skewness) else out
