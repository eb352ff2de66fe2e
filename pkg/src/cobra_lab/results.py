"""Result rows and their CSV serialization."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields

import numpy as np

from .graphs import Graph
from .stats import SampleStats, ScalingFit

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    graph_family: str
    n: int | None = None
    d: int | None = None
    k: int | None = None
    seed: int | None = None
    quantity: str = ""
    trials: int | None = None
    mean: float | None = None
    stderr: float | None = None
    p50: float | None = None
    p90: float | None = None
    p99: float | None = None
    max: float | None = None
    timeouts: int | None = None
    bound_value: float | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_stats(cls, experiment: str, g: Graph, stats: SampleStats, *, k=None, seed=None,
                   quantity="", bound_value=None, extra=None) -> "ResultRow":
        return cls(experiment, g.name, g.n, degree_column(g), k, seed, quantity, stats.trials,
                   stats.mean, stats.stderr, stats.p50, stats.p90, stats.p99, stats.max,
                   stats.timeouts, bound_value, dict(extra or {}))

    @classmethod
    def scalar(cls, experiment: str, g: Graph, value: float, *, k=None, seed=None, trials=0,
               stderr=0.0, quantity="", bound_value=None, extra=None) -> "ResultRow":
        """A single derived value; ``trials=0`` and ``stderr=0`` mark exact results."""
        return cls(experiment, g.name, g.n, degree_column(g), k, seed, quantity, trials, value,
                   stderr, bound_value=bound_value, extra=dict(extra or {}))

    @classmethod
    def exact(cls, experiment: str, g: Graph, value: float, **kw) -> "ResultRow":
        return cls.scalar(experiment, g, value, **kw)

    @classmethod
    def from_fit(cls, experiment: str, family: str, fit: ScalingFit, quantity: str,
                 seed=None, extra=None) -> "ResultRow":
        info = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r_squared,
                "transform": fit.transform, "points": len(fit.points)}
        info.update(extra or {})
        return cls(experiment, family, seed=seed, quantity=f"fit:{quantity}", extra=info)


COLUMNS = tuple(f.name for f in fields(ResultRow))


def degree_column(g: Graph) -> int:
    """The common degree of a regular graph, else the maximum degree."""
    d = g.regular_degree()
    return int(d if d is not None else g.degrees.max(initial=0))


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return ";".join(f"{k}={_fmt(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def write_csv(rows, fh) -> None:
    fh.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])


def to_csv(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
