"""Simulation reports: tagged metrics, Wilson intervals, plug-in entropy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

EXACT = "exact"
ESTIMATED = "estimated"


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the limits are exactly 0 and 1 at the extremes; rounding would leave dust
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def plugin_entropy(counts) -> float:
    """Entropy in bits of the empirical distribution given by ``counts``."""
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    if c.size == 0:
        return 0.0
    p = c / c.sum()
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True)
class Metric:
    """One reported quantity. ``lo``/``hi`` are set only for estimated proportions."""

    name: str
    value: float
    kind: str = EXACT
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.kind not in (EXACT, ESTIMATED):
            raise ValueError(f"metric kind must be {EXACT!r} or {ESTIMATED!r}, got {self.kind!r}")

    @classmethod
    def proportion(cls, name: str, successes: int, trials: int) -> Metric:
        lo, hi = wilson_interval(successes, trials)
        return cls(name, successes / trials, ESTIMATED, lo, hi)


@dataclass
class SimulationReport:
    """Metrics plus everything needed to re-run: config echo, seed, version tag.

    ``wall_time`` is informational and excluded from ``fingerprint``.
    """

    config: dict
    metrics: list[Metric] = field(default_factory=list)
    seed: int | None = None
    version: str = ""
    wall_time: float = 0.0

    def add(self, metric: Metric) -> None:
        self.metrics.append(metric)

    def __getitem__(self, name: str) -> Metric:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)

    def names(self) -> list[str]:
        return [m.name for m in self.metrics]

    def fingerprint(self) -> str:
        body = {
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "metrics": [[m.name, repr(m.value), m.kind, repr(m.lo), repr(m.hi)] for m in self.metrics],
        }
        return json.dumps(body, sort_keys=True)
