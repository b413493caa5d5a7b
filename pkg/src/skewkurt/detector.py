"""Conditional-ECDF criterion for power-law emergence.

Over a table of block statistics, look at the dominance ratio R on the
blocks whose skewness lies above its q-quantile. If, already for
moderate q, nearly all of that conditional mass sits inside
[1 - eps, 1 + eps], the kurtosis of high-skew blocks follows the
cube-root-of-n power law in |S| and the behavior is declared emergent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import BlockStatsTable
from .errors import EmptySampleError, InsufficientDataError, InvalidParameterError

_MIN_TAIL_ROWS = 10

DEFAULT_Q_GRID = (0.9, 0.95, 0.99, 0.999, 0.9995, 0.9999, 0.99995)


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs of the emergence decision rule.

    ``p_star`` operationalizes "conditional mass approximately 1" and
    ``q_max_for_emergence`` operationalizes "already at moderate q"; both
    are recorded in every report so decisions stay auditable.
    """

    q_grid: tuple[float, ...] = DEFAULT_Q_GRID
    epsilon: float = 0.05
    p_star: float = 0.9
    q_max_for_emergence: float = 0.999

    def __post_init__(self):
        for q in self.q_grid:
            if not 0.0 < q < 1.0:
                raise InvalidParameterError("quantile levels must be in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidParameterError("epsilon must be in (0, 1)")
        if not 0.0 < self.p_star <= 1.0:
            raise InvalidParameterError("p_star must be in (0, 1]")


@dataclass(frozen=True)
class EcdfCurve:
    """Empirical CDF of R, optionally conditioned on S above its q-quantile."""

    r: np.ndarray
    cum_frac: np.ndarray
    condition_q: float | None
    n_rows: int

    def mass_in(self, lo: float, hi: float) -> float:
        """Fraction of the underlying values inside [lo, hi]."""
        inside = (self.r >= lo) & (self.r <= hi)
        return float(inside.sum()) / self.n_rows


@dataclass(frozen=True)
class EmergenceReport:
    """Per-source decision with the full p(q) curve behind it."""

    label: str
    n: int
    p_of_q: dict[float, float]
    s_q: dict[float, float]
    tail_counts: dict[float, int]
    skipped_q: tuple[float, ...]
    emerged: bool
    witness_q: float | None
    config: DetectorConfig = field(default_factory=DetectorConfig)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "p_of_q": {str(q): p for q, p in self.p_of_q.items()},
            "s_q": {str(q): s for q, s in self.s_q.items()},
            "tail_counts": {str(q): c for q, c in self.tail_counts.items()},
            "skipped_q": list(self.skipped_q),
            "emerged": self.emerged,
            "witness_q": self.witness_q,
            "config": {
                "q_grid": list(self.config.q_grid),
                "epsilon": self.config.epsilon,
                "p_star": self.config.p_star,
                "q_max_for_emergence": self.config.q_max_for_emergence,
            },
        }


def quantile(values, q: float) -> float:
    """Nearest-rank q-quantile: the ceil(q*m)-th smallest value.

    Exact order statistic, no interpolation. The rank is computed with a
    tiny relative guard so that q*m landing on an integer up to floating
    rounding selects that rank.
    """
    if not 0.0 < q < 1.0:
        raise InvalidParameterError("q must be in (0, 1)")
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptySampleError("empty sample")
    m = v.size
    rank = int(math.ceil(q * m * (1.0 - 4.0 * np.finfo(float).eps)))
    rank = min(max(rank, 1), m)
    return float(np.partition(v, rank - 1)[rank - 1])


def _tail_mask(table: BlockStatsTable, q: float) -> tuple[np.ndarray, float]:
    s_q = quantile(table.skewness, q)
    return table.skewness > s_q, s_q


def conditional_ecdf(table: BlockStatsTable, q: float | None = None) -> EcdfCurve:
    """ECDF of R over all rows, or over rows with S strictly above s_q."""
    if len(table) == 0:
        raise EmptySampleError("empty table")
    if q is None:
        r = table.ratio
        cond = None
    else:
        mask, _ = _tail_mask(table, q)
        n_tail = int(mask.sum())
        if n_tail < _MIN_TAIL_ROWS:
            raise InsufficientDataError(
                f"insufficient tail rows at q={q}: need {_MIN_TAIL_ROWS}, have {n_tail}"
            )
        r = table.ratio[mask]
        cond = float(q)
    r = np.sort(r)
    frac = np.arange(1, r.size + 1, dtype=np.float64) / r.size
    return EcdfCurve(r=r, cum_frac=frac, condition_q=cond, n_rows=r.size)


def emergence(table: BlockStatsTable, config: DetectorConfig | None = None,
              label: str | None = None) -> EmergenceReport:
    """Evaluate p(q) = P(1-eps <= R <= 1+eps | S > s_q) over the q grid.

    Grid levels with fewer than 10 conditioning rows are skipped and
    flagged. The behavior is declared emergent when the smallest usable
    q with p(q) >= p_star does not exceed q_max_for_emergence.
    """
    config = config or DetectorConfig()
    if len(table) == 0:
        raise EmptySampleError("empty table")
    lo, hi = 1.0 - config.epsilon, 1.0 + config.epsilon

    p_of_q: dict[float, float] = {}
    s_q_map: dict[float, float] = {}
    tail_counts: dict[float, int] = {}
    skipped: list[float] = []
    for q in sorted(config.q_grid):
        mask, s_q = _tail_mask(table, q)
        n_tail = int(mask.sum())
        if n_tail < _MIN_TAIL_ROWS:
            skipped.append(q)
            continue
        r = table.ratio[mask]
        p = float(((r >= lo) & (r <= hi)).sum()) / n_tail
        p_of_q[q] = p
        s_q_map[q] = s_q
        tail_counts[q] = n_tail
    if not p_of_q:
        raise InsufficientDataError("table too small for detection")

    witness_q = None
    for q in sorted(p_of_q):
        if p_of_q[q] >= config.p_star:
            witness_q = q
            break
    emerged = witness_q is not None and witness_q <= config.q_max_for_emergence

    return EmergenceReport(
        label=label or str(table.meta.get("family", table.source_digest)),
        n=table.n,
        p_of_q=p_of_q,
        s_q=s_q_map,
        tail_counts=tail_counts,
        skipped_q=tuple(skipped),
        emerged=emerged,
        witness_q=witness_q,
        config=config,
    )
