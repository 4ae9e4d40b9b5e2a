"""Comparison reports and the frozen acceptance thresholds."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class Check:
    """One threshold comparison: ``value <= limit`` (or ``>=`` when ``at_least``)."""

    name: str
    value: float
    limit: float
    at_least: bool = False

    @property
    def passed(self) -> bool:
        return self.value >= self.limit if self.at_least else self.value <= self.limit

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "limit": self.limit,
            "op": ">=" if self.at_least else "<=",
            "passed": self.passed,
        }


@dataclass
class ComparisonReport:
    """Outcome of one experiment.

    ``records`` hold one dict per ``t`` value or snapshot; the common keys are
    ``levy_distance_radial``, ``max_log_ratio_error`` and
    ``envelope_pass_fraction`` where they apply. Wall-clock timings live in
    ``runtime_ms`` and go to the manifest rather than to ``report.json`` so
    that the latter is reproducible byte for byte.
    """

    experiment: str
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    runtime_ms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "records": self.records,
            "summary": self.summary,
            "checks": [c.to_json() for c in self.checks],
            "passed": self.passed,
        }


@lru_cache(maxsize=None)
def _load() -> dict:
    text = resources.files("rootflow").joinpath("data/thresholds.json").read_text()
    return json.loads(text)


def thresholds(experiment: str) -> dict:
    """Frozen limits for ``experiment`` from the packaged fixtures file."""
    return dict(_load()[experiment])
