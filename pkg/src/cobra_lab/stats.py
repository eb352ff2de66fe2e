"""Sample summaries and scaling fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import AllTimedOut, InsufficientPoints, InvalidParams

__all__ = ["SampleStats", "summarize", "ScalingFit", "fit_scaling", "TRANSFORMS"]


@dataclass(frozen=True)
class SampleStats:
    """Moments and quantiles of a time-valued sample.

    Timed-out trials are counted in ``timeouts`` and excluded from every
    moment and quantile.
    """

    trials: int
    mean: float
    stddev: float
    stderr: float
    p50: float
    p90: float
    p99: float
    max: float
    timeouts: int
    cap: int | None
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def completed(self) -> int:
        return self.trials - self.timeouts

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return self.mean - z * self.stderr, self.mean + z * self.stderr

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("trials", "mean", "stddev", "stderr", "p50", "p90", "p99", "max", "timeouts", "cap")}


def summarize(values, cap: int | None = None) -> SampleStats:
    """Summarize trial outcomes; ``None`` or negative entries are timeouts."""
    raw = [(-1 if v is None else v) for v in values]
    arr = np.asarray(raw, dtype=float)
    trials = arr.size
    if trials == 0:
        raise InvalidParams("no trials to summarize")
    ok = arr[arr >= 0]
    timeouts = trials - ok.size
    if ok.size == 0:
        raise AllTimedOut(f"all {trials} trials hit the cap {cap}")
    sd = float(ok.std(ddof=1)) if ok.size > 1 else 0.0
    q50, q90, q99 = np.quantile(ok, [0.5, 0.9, 0.99])
    return SampleStats(trials, float(ok.mean()), sd, sd / math.sqrt(ok.size),
                       float(q50), float(q90), float(q99), float(ok.max()),
                       int(timeouts), cap, ok)


TRANSFORMS = ("log-log", "value-vs-log2", "value-vs-nlogn")


@dataclass(frozen=True)
class ScalingFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    r_squared: float
    transform: str


def fit_scaling(points, transform: str = "log-log") -> ScalingFit:
    """Least-squares line through transformed (size, value) points.

    ``log-log`` fits ln(value) against ln(size), so the slope is the growth
    exponent; ``value-vs-log2`` fits value against ln(size)^2;
    ``value-vs-nlogn`` fits value against size * ln(size).
    """
    pts = tuple((float(x), float(y)) for x, y in points)
    if len(pts) < 4:
        raise InsufficientPoints(f"need at least 4 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidParams("sizes and values must be positive")
    if transform == "log-log":
        u, w = np.log(x), np.log(y)
    elif transform == "value-vs-log2":
        u, w = np.log(x) ** 2, y
    elif transform == "value-vs-nlogn":
        u, w = x * np.log(x), y
    else:
        raise InvalidParams(f"transform must be one of {TRANSFORMS}")
    res = sps.linregress(u, w)
    r2 = 1.0 if np.ptp(w) == 0 else min(1.0, max(0.0, res.rvalue ** 2))
    return ScalingFit(pts, float(res.slope), float(res.intercept), float(r2), transform)
