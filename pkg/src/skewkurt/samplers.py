"""Deterministic, stream-splittable variate generation.

Ten stock distributions with fixed default parameters back the synthetic
experiments. Streams are counter-based (Philox) and keyed by
(master_seed, stream_id): distinct stream ids give independent streams,
and the draw for a given key never depends on thread count or call
order, so parallel generation is exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.special import zeta

from .errors import InvalidParameterError
from .moments import SampleBlock

_MASK64 = (1 << 64) - 1

FAMILIES = (
    "gaussian",
    "exponential",
    "lognormal",
    "gamma",
    "pareto",
    "binomial",
    "negative_binomial",
    "poisson",
    "geometric",
    "zipf",
)


@dataclass(frozen=True)
class DistributionSpec:
    """One distribution family plus its parameters."""

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def label(self) -> str:
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"


@dataclass(frozen=True)
class SeedSpec:
    """(master_seed, stream_id) pair selecting one reproducible stream."""

    master_seed: int
    stream_id: int = 0


def default_distributions() -> dict[str, DistributionSpec]:
    """The ten stock distributions with their canonical parameters."""
    return {
        "gaussian": DistributionSpec("gaussian", {"mean": 0.0, "sd": 1.0}),
        "exponential": DistributionSpec("exponential", {"rate": 1.0}),
        "lognormal": DistributionSpec("lognormal", {"meanlog": 0.0, "sdlog": 1.0}),
        "gamma": DistributionSpec("gamma", {"shape": 2.0, "rate": 1.0}),
        "pareto": DistributionSpec("pareto", {"shape": 5.0, "scale": 1.0}),
        "binomial": DistributionSpec("binomial", {"trials": 20, "p": 0.8}),
        "negative_binomial": DistributionSpec("negative_binomial", {"trials": 20, "p": 0.8}),
        "poisson": DistributionSpec("poisson", {"rate": 20.0}),
        "geometric": DistributionSpec("geometric", {"p": 0.8}),
        "zipf": DistributionSpec("zipf", {"shape": 5.0, "xmin": 1}),
    }


def _param(spec: DistributionSpec, name: str, default=None) -> float:
    if name in spec.params:
        return float(spec.params[name])
    if default is None:
        raise InvalidParameterError(
            f"invalid distribution parameter: {spec.family} requires '{name}'"
        )
    return float(default)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidParameterError(f"invalid distribution parameter: {message}")


def validate_spec(spec: DistributionSpec) -> None:
    """Raise InvalidParameterError unless the spec is well-formed."""
    fam = spec.family
    if fam not in FAMILIES:
        raise InvalidParameterError(f"invalid distribution parameter: unknown family '{fam}'")
    if fam == "gaussian":
        _require(_param(spec, "sd", 1.0) > 0, "sd must be positive")
    elif fam == "exponential":
        _require(_param(spec, "rate", 1.0) > 0, "rate must be positive")
    elif fam == "lognormal":
        _require(_param(spec, "sdlog", 1.0) > 0, "sdlog must be positive")
    elif fam == "gamma":
        _require(_param(spec, "shape") > 0, "shape must be positive")
        _require(_param(spec, "rate", 1.0) > 0, "rate must be positive")
    elif fam == "pareto":
        _require(_param(spec, "shape") > 0, "shape must be positive")
        _require(_param(spec, "scale", 1.0) > 0, "scale must be positive")
    elif fam == "binomial":
        trials = _param(spec, "trials")
        _require(trials >= 1 and trials == int(trials), "trials must be a positive integer")
        _require(0.0 < _param(spec, "p") < 1.0, "p must be in (0, 1)")
    elif fam == "negative_binomial":
        trials = _param(spec, "trials")
        _require(trials >= 1 and trials == int(trials), "trials must be a positive integer")
        _require(0.0 < _param(spec, "p") < 1.0, "p must be in (0, 1)")
    elif fam == "poisson":
        _require(_param(spec, "rate") > 0, "rate must be positive")
    elif fam == "geometric":
        _require(0.0 < _param(spec, "p") < 1.0, "p must be in (0, 1)")
        support = spec.params.get("support", "failures")
        _require(support in ("failures", "trials"), "support must be 'failures' or 'trials'")
    elif fam == "zipf":
        _require(_param(spec, "shape") > 1.0, "shape must exceed 1")
        xmin = _param(spec, "xmin", 1)
        _require(xmin >= 1 and xmin == int(xmin), "xmin must be a positive integer")


def make_generator(master_seed: int, stream_id: int) -> np.random.Generator:
    """Philox generator keyed by (master_seed, stream_id)."""
    key = np.array([master_seed & _MASK64, stream_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit sub-seed from a master seed and hashable labels."""
    import hashlib

    text = repr((int(master_seed),) + tuple(parts)).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little")


@lru_cache(maxsize=16)
def _zipf_cdf(shape: float, xmin: int) -> np.ndarray:
    # Truncate where residual tail mass < 1e-12 of the full distribution;
    # the residual is lumped into the last bin (cdf pinned to 1).
    total = float(zeta(shape, xmin))
    kmax = xmin + 16
    while float(zeta(shape, kmax + 1)) / total >= 1e-12:
        kmax *= 2
    k = np.arange(xmin, kmax + 1, dtype=np.float64)
    probs = k ** (-shape) / total
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return cdf


def draw_values(spec: DistributionSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. variates as float64."""
    validate_spec(spec)
    fam = spec.family
    if fam == "gaussian":
        return rng.normal(_param(spec, "mean", 0.0), _param(spec, "sd", 1.0), count)
    if fam == "exponential":
        return rng.exponential(1.0 / _param(spec, "rate", 1.0), count)
    if fam == "lognormal":
        return rng.lognormal(_param(spec, "meanlog", 0.0), _param(spec, "sdlog", 1.0), count)
    if fam == "gamma":
        return rng.gamma(_param(spec, "shape"), 1.0 / _param(spec, "rate", 1.0), count)
    if fam == "pareto":
        # Inverse CDF: x = scale * U^(-1/shape), U in (0, 1].
        u = 1.0 - rng.random(count)
        return _param(spec, "scale", 1.0) * u ** (-1.0 / _param(spec, "shape"))
    if fam == "binomial":
        p = _probability(spec)
        return rng.binomial(int(_param(spec, "trials")), p, count).astype(np.float64)
    if fam == "negative_binomial":
        # Failures before the trials-th success.
        p = _probability(spec)
        return rng.negative_binomial(int(_param(spec, "trials")), p, count).astype(np.float64)
    if fam == "poisson":
        return rng.poisson(_param(spec, "rate"), count).astype(np.float64)
    if fam == "geometric":
        raw = rng.geometric(_param(spec, "p"), count).astype(np.float64)
        if spec.params.get("support", "failures") == "failures":
            raw -= 1.0
        return raw
    if fam == "zipf":
        xmin = int(_param(spec, "xmin", 1))
        cdf = _zipf_cdf(_param(spec, "shape"), xmin)
        idx = np.searchsorted(cdf, rng.random(count), side="right")
        return (xmin + idx).astype(np.float64)
    raise InvalidParameterError(f"invalid distribution parameter: unknown family '{fam}'")


def _probability(spec: DistributionSpec) -> float:
    p = _param(spec, "p")
    if not spec.params.get("p_is_success", True):
        p = 1.0 - p
    return p


def draw_block(spec: DistributionSpec, n: int, seed: SeedSpec) -> SampleBlock:
    """One block of n variates from the stream selected by ``seed``.

    Bit-identical for identical (spec, n, seed) regardless of thread
    count or call order.
    """
    if n < 1:
        raise InvalidParameterError("n must be positive")
    rng = make_generator(seed.master_seed, seed.stream_id)
    return SampleBlock(draw_values(spec, n, rng))


def theoretical_skew_kurt(spec: DistributionSpec) -> tuple[float, float] | None:
    """Closed-form population (skewness, kurtosis), or None if divergent.

    Kurtosis is the full fourth standardized moment (Gaussian = 3).
    Returns None when any of the first four moments diverges, e.g. the
    zipf family at shape 5 whose fourth moment is infinite.
    """
    validate_spec(spec)
    fam = spec.family
    if fam == "gaussian":
        return 0.0, 3.0
    if fam == "exponential":
        return 2.0, 9.0
    if fam == "lognormal":
        v = math.exp(_param(spec, "sdlog", 1.0) ** 2)
        skew = (v + 2.0) * math.sqrt(v - 1.0)
        kurt = v**4 + 2.0 * v**3 + 3.0 * v**2 - 3.0
        return skew, kurt
    if fam == "gamma":
        k = _param(spec, "shape")
        return 2.0 / math.sqrt(k), 3.0 + 6.0 / k
    if fam == "pareto":
        a = _param(spec, "shape")
        if a <= 4.0:
            return None
        skew = 2.0 * (1.0 + a) / (a - 3.0) * math.sqrt((a - 2.0) / a)
        excess = 6.0 * (a**3 + a**2 - 6.0 * a - 2.0) / (a * (a - 3.0) * (a - 4.0))
        return skew, 3.0 + excess
    if fam == "binomial":
        tr, p = _param(spec, "trials"), _probability(spec)
        q = 1.0 - p
        skew = (q - p) / math.sqrt(tr * p * q)
        excess = (1.0 - 6.0 * p * q) / (tr * p * q)
        return skew, 3.0 + excess
    if fam == "negative_binomial":
        r, p = _param(spec, "trials"), _probability(spec)
        skew = (2.0 - p) / math.sqrt(r * (1.0 - p))
        excess = 6.0 / r + p * p / (r * (1.0 - p))
        return skew, 3.0 + excess
    if fam == "poisson":
        lam = _param(spec, "rate")
        return 1.0 / math.sqrt(lam), 3.0 + 1.0 / lam
    if fam == "geometric":
        p = _param(spec, "p")
        skew = (2.0 - p) / math.sqrt(1.0 - p)
        excess = 6.0 + p * p / (1.0 - p)
        return skew, 3.0 + excess
    if fam == "zipf":
        a = _param(spec, "shape")
        if a <= 5.0:
            return None  # fourth moment needs shape > 5
        xmin = int(_param(spec, "xmin", 1))
        raw = [float(zeta(a - r, xmin)) / float(zeta(a, xmin)) for r in range(1, 5)]
        m1 = raw[0]
        m2 = raw[1] - m1**2
        m3 = raw[2] - 3.0 * m1 * raw[1] + 2.0 * m1**3
        m4 = raw[3] - 4.0 * m1 * raw[2] + 6.0 * m1**2 * raw[1] - 3.0 * m1**4
        return m3 / m2**1.5, m4 / m2**2
    return None


def parse_distribution(name: str, params_text: str | None = None) -> DistributionSpec:
    """Build a spec from CLI-style inputs, e.g. ('pareto', 'shape=5,scale=1').

    Omitted parameters fall back to the stock defaults for that family.
    """
    key = name.strip().lower().replace("-", "_")
    defaults = default_distributions()
    if key not in defaults:
        raise InvalidParameterError(f"invalid distribution parameter: unknown family '{name}'")
    params = dict(defaults[key].params)
    if params_text:
        for item in params_text.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise InvalidParameterError(f"invalid distribution parameter: '{item}'")
            k, v = item.split("=", 1)
            k = k.strip()
            v = v.strip()
            if k == "support":
                params[k] = v
            elif k == "p_is_success":
                params[k] = v.lower() in ("1", "true", "yes")
            else:
                try:
                    params[k] = float(v)
                except ValueError as exc:
                    raise InvalidParameterError(
                        f"invalid distribution parameter: '{item}'"
                    ) from exc
    spec = DistributionSpec(key, params)
    validate_spec(spec)
    return spec
