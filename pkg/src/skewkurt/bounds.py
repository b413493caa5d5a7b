"""Closed-form limits on sample skewness and kurtosis for block size n.

Classical results: |S| <= sqrt(n-1) and K <= n (loose), the sharp
|S| <= (n-2)/sqrt(n-1) and K <= (n^2-3n+3)/(n-1), and the skewness-
dependent corridor 1 + S^2 <= K <= (1/2)((n-3)/(n-2))S^2 + n/2. The
Pearson floor 1 + S^2 is size-independent; everything else tightens
with n.

For n = 4..9 the module also carries an empirically established lower
envelope, piecewise parabolic in S (coefficients printed to 5 decimals,
left side; the curve is symmetric in S). It closes the attainable
(S, K) domain from below where the Pearson floor is not tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBlockError, InvalidParameterError, SkewRangeError
from .moments import MomentSummary

_BOUND_TOL = 1e-9
# The envelope constants are rounded to 5 decimals; allow that much slack
# when using the envelope as a data-quality gate.
_ENVELOPE_SLACK = 0.01


@dataclass(frozen=True)
class ParabolaSegment:
    """One piece K = a*S^2 + b*S + c of a lower envelope, on [s_lo, s_hi]."""

    a: float
    b: float
    c: float
    s_lo: float
    s_hi: float

    def __call__(self, s):
        return (self.a * s + self.b) * s + self.c


@dataclass(frozen=True)
class LowerEnvelopeSpec:
    """Left-side lower envelope for one n: segments ordered outermost first."""

    n: int
    segments: tuple[ParabolaSegment, ...]


# Left-side coefficients (a, b, c) on [s_lo, s_hi], outermost segment
# first; the right side is the mirror image S -> -S.
_ENVELOPES: dict[int, LowerEnvelopeSpec] = {
    4: LowerEnvelopeSpec(4, (
        ParabolaSegment(-0.16930, -1.35019, 1.0, -1.1547, 0.0),
    )),
    5: LowerEnvelopeSpec(5, (
        ParabolaSegment(-0.27282, -2.42886, 0.22056, -1.5, -0.40825),
        ParabolaSegment(-0.5, 0.0, 1.25, -0.40825, 0.0),
    )),
    6: LowerEnvelopeSpec(6, (
        ParabolaSegment(-0.39975, -3.49778, -0.7778, -1.78885, -0.71),
        ParabolaSegment(-0.72619, -1.2256, 1.0, -0.71, 0.0),
    )),
    7: LowerEnvelopeSpec(7, (
        ParabolaSegment(-0.46626, -4.39171, -1.85513, -2.04124, -0.95394),
        ParabolaSegment(-0.89555, -2.35544, 0.47801, -0.95394, -0.28868),
        ParabolaSegment(-1.0, 0.0, 1.16667, -0.28868, 0.0),
    )),
    8: LowerEnvelopeSpec(8, (
        ParabolaSegment(-0.49653, -5.12229, -2.91984, -2.26779, -1.155),
        ParabolaSegment(-0.88454, -3.14719, -0.12097, -1.155, -0.515),
        ParabolaSegment(-1.30395, -1.18653, 1.0, -0.515, 0.0),
    )),
    9: LowerEnvelopeSpec(9, (
        ParabolaSegment(-0.47074, -5.59352, -3.83497, -2.47487, -1.325),
        ParabolaSegment(-1.25168, -4.55704, -1.0906, -1.325, -0.705),
        ParabolaSegment(-1.58841, -2.43419, 0.57337, -0.705, -0.234),
        ParabolaSegment(-1.16882, 0.0, 1.12, -0.234, 0.0),
    )),
}

ENVELOPE_N_RANGE = (4, 9)


@dataclass(frozen=True)
class BoundSet:
    """All closed-form bounds for one block size n."""

    n: int
    skew_abs_max_loose: float  # sqrt(n-1)
    skew_abs_max: float        # (n-2)/sqrt(n-1)
    kurt_max_loose: float      # n
    kurt_max_dalen: float      # (n^2-3n+3)/(n-1)

    def pearson_lower(self, s):
        """Size-independent kurtosis floor 1 + S^2."""
        s = np.asarray(s, dtype=np.float64)
        out = 1.0 + s * s
        return float(out) if out.ndim == 0 else out

    def sharma_upper(self, s):
        """Skewness-dependent kurtosis ceiling (1/2)((n-3)/(n-2))S^2 + n/2."""
        if self.n < 3:
            raise InvalidParameterError("sharma_upper requires n >= 3")
        s = np.asarray(s, dtype=np.float64)
        out = 0.5 * (self.n - 3.0) / (self.n - 2.0) * s * s + 0.5 * self.n
        return float(out) if out.ndim == 0 else out


def bound_set(n: int) -> BoundSet:
    """Evaluate every closed-form bound at block size n (n >= 2)."""
    if n < 2:
        raise InvalidParameterError("sample size too small")
    nf = float(n)
    return BoundSet(
        n=n,
        skew_abs_max_loose=math.sqrt(nf - 1.0),
        skew_abs_max=(nf - 2.0) / math.sqrt(nf - 1.0),
        kurt_max_loose=nf,
        kurt_max_dalen=(nf * nf - 3.0 * nf + 3.0) / (nf - 1.0),
    )


def envelope_spec(n: int) -> LowerEnvelopeSpec:
    """The piecewise-parabolic lower envelope for n in [4, 9]."""
    if n not in _ENVELOPES:
        raise SkewRangeError(f"no empirical envelope for n={n}")
    return _ENVELOPES[n]


def table1_lower(n: int, s: float) -> float:
    """Lower kurtosis envelope at skewness s for n in [4, 9].

    The envelope is symmetric, so the stored left side is evaluated at
    -|s|. On a shared segment boundary the outer (more negative) segment
    wins. |s| may exceed the admissible maximum by at most 1e-9.
    """
    spec = envelope_spec(n)
    smax = bound_set(n).skew_abs_max
    x = -abs(float(s))
    if x < -smax - _BOUND_TOL:
        raise SkewRangeError("skewness out of range")
    x = max(x, -smax)
    for seg in spec.segments:
        if x <= seg.s_hi:
            return float(seg(x))
    return float(spec.segments[-1](x))


def table1_lower_many(n: int, s) -> np.ndarray:
    """Vectorized :func:`table1_lower` (values beyond the range are clamped)."""
    spec = envelope_spec(n)
    smax = bound_set(n).skew_abs_max
    x = -np.minimum(np.abs(np.asarray(s, dtype=np.float64)), smax)
    out = np.empty_like(x)
    assigned = np.zeros(x.shape, dtype=bool)
    for seg in spec.segments:
        m = ~assigned & (x <= seg.s_hi)
        out[m] = seg(x[m])
        assigned |= m
    out[~assigned] = spec.segments[-1](x[~assigned])
    return out


@dataclass(frozen=True)
class Violation:
    """One bound violated beyond tolerance."""

    bound: str
    value: float
    limit: float
    excess: float


def check_summary(summary: MomentSummary) -> list[Violation]:
    """Bounds violated by a block summary, beyond floating tolerance.

    The closed-form bounds are theorems and use tolerance 1e-9; the
    n = 4..9 lower envelope uses slack 0.01 because its coefficients are
    rounded to 5 decimals. An empty list is the expected outcome for any
    genuine sample; the function serves as a fuzz-test oracle and as a
    data-quality gate.
    """
    if summary.degenerate:
        raise DegenerateBlockError("degenerate block")
    n, s, k = summary.n, summary.skewness, summary.kurtosis
    b = bound_set(n)
    out: list[Violation] = []

    def _upper(name, value, limit, tol=_BOUND_TOL):
        if value > limit + tol:
            out.append(Violation(name, value, limit, value - limit))

    def _lower(name, value, limit, tol=_BOUND_TOL):
        if value < limit - tol:
            out.append(Violation(name, value, limit, limit - value))

    _upper("skew_abs_max_loose", abs(s), b.skew_abs_max_loose)
    _upper("skew_abs_max", abs(s), b.skew_abs_max)
    _upper("kurt_max_loose", k, b.kurt_max_loose)
    _upper("kurt_max_dalen", k, b.kurt_max_dalen)
    _lower("pearson_lower", k, b.pearson_lower(s))
    if n >= 3:
        _upper("sharma_upper", k, b.sharma_upper(s))
    if ENVELOPE_N_RANGE[0] <= n <= ENVELOPE_N_RANGE[1]:
        _lower("envelope_lower", k, table1_lower(n, s), tol=_ENVELOPE_SLACK)
    return out


def max_bound_excess(n: int, skewness, kurtosis) -> dict[str, float]:
    """Worst signed excess of each bound over arrays of (S, K) rows.

    Positive values mean the bound was exceeded by that amount; results
    at or below 0 mean the bound held everywhere. NaN rows are ignored.
    """
    s = np.asarray(skewness, dtype=np.float64)
    k = np.asarray(kurtosis, dtype=np.float64)
    ok = np.isfinite(s) & np.isfinite(k)
    s, k = s[ok], k[ok]
    if s.size == 0:
        raise InvalidParameterError("no finite rows")
    b = bound_set(n)
    out = {
        "skew_abs_max_loose": float(np.max(np.abs(s) - b.skew_abs_max_loose)),
        "skew_abs_max": float(np.max(np.abs(s) - b.skew_abs_max)),
        "kurt_max_loose": float(np.max(k - b.kurt_max_loose)),
        "kurt_max_dalen": float(np.max(k - b.kurt_max_dalen)),
        "pearson_lower": float(np.max(b.pearson_lower(s) - k)),
    }
    if n >= 3:
        out["sharma_upper"] = float(np.max(k - b.sharma_upper(s)))
    if ENVELOPE_N_RANGE[0] <= n <= ENVELOPE_N_RANGE[1]:
        out["envelope_lower"] = float(np.max(table1_lower_many(n, s) - k))
    return out
