"""Experiment configuration documents."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError, DomainError
from ..measures import RadialMeasure, measure_from_json

EXPERIMENTS = ("radial", "real", "circular", "complex-iid", "perturbed", "pde-check")
EMIT_KINDS = frozenset({"csv", "svg", "json"})
UNIFORM = {"kind": "cdf", "knots": [[0.0, 0.0], [1.0, 1.0]]}


@dataclass
class ExperimentConfig:
    """One experiment run.

    Only ``experiment`` is required; the remaining fields have defaults
    suited to a quick desk run. Fields an experiment does not use are
    ignored.

    Attributes
    ----------
    experiment : str
        One of ``radial``, ``real``, ``circular``, ``complex-iid``,
        ``perturbed``, ``pde-check``.
    base_measure : dict
        Measure document (see :func:`rootflow.measures.measure_from_json`).
    n, m : int
        Number of circles and points per circle.
    t : float or list of float
        Fractions of the degree to differentiate away, each in ``(0, 1)``.
    seed : int
        Seed for every random draw of the run.
    output_dir : str or None
        Where files go; ``None`` computes the report only.
    emit : list of str
        Subset of ``csv``, ``svg``, ``json``.
    steps : list of int
        Snapshot derivative counts (circular and complex runs).
    radii : list of float or None
        Explicit increasing radii instead of a ladder sampled from the base.
    pairs : int
        Random pairs per size in the real-line campaign.
    n_values : list of int or None
        Sizes for the real-line campaign; defaults to ``[n]``.
    scale : float or None
        Angular perturbation half-width; defaults to ``1 / m``.
    bases : list of dict or None
        Measures for the evolution-equation check; defaults to ``[base_measure]``.
    h_values : list of float
        Step sizes (relative to the support) for the convergence slope.
    """

    experiment: str
    base_measure: dict = field(default_factory=lambda: dict(UNIFORM))
    n: int = 16
    m: int = 64
    t: float | list = 0.5
    seed: int = 0
    output_dir: str | None = None
    emit: list = field(default_factory=lambda: ["csv", "json"])
    steps: list = field(default_factory=lambda: [0, 10])
    radii: list | None = None
    pairs: int = 10_000
    n_values: list | None = None
    scale: float | None = None
    bases: list | None = None
    h_values: list = field(default_factory=lambda: [1e-3, 1e-4])

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        for name in ("n", "m", "seed", "pairs"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.n < 1 or self.m < 1 or self.pairs < 1:
            raise ConfigError("n, m and pairs must be positive")
        for t in self.t_values:
            if not (isinstance(t, (int, float)) and 0.0 < t < 1.0):
                raise ConfigError(f"t must lie in (0, 1), got {t!r}")
        bad = set(self.emit) - EMIT_KINDS
        if bad:
            raise ConfigError(f"unknown emit kinds {sorted(bad)}")
        if any((not isinstance(k, int)) or k < 0 for k in self.steps):
            raise ConfigError("steps must be nonnegative integers")
        if self.scale is not None and not (math.isfinite(self.scale) and self.scale >= 0):
            raise ConfigError("scale must be a nonnegative real")
        if any(not (h > 0) for h in self.h_values):
            raise ConfigError("h_values must be positive")
        # fail early on malformed measure documents
        self.measure()
        for doc in self.bases or []:
            _measure(doc)

    @property
    def t_values(self) -> list:
        return sorted(self.t) if isinstance(self.t, (list, tuple)) else [self.t]

    def measure(self) -> RadialMeasure:
        return _measure(self.base_measure)

    def to_json(self) -> dict:
        return asdict(self)


def _measure(doc) -> RadialMeasure:
    try:
        return measure_from_json(doc)
    except (DomainError, TypeError, AttributeError) as exc:
        raise ConfigError(f"bad measure document {doc!r}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    if "experiment" not in doc:
        raise ConfigError("config lacks the 'experiment' field")
    try:
        return ExperimentConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
