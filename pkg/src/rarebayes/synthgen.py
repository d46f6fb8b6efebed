"""Seeded synthetic data from a known generative network, plus an exact oracle.

The generator samples ancestrally: class first, then each variable given
the class (and, for planted dependencies, a categorical parent).  The
exact network is returned as a :class:`TruthModel` so tests can compare
learned posteriors against :func:`analytic_posterior`, which uses the
true densities rather than bins.

Output is byte-identical for identical (config, seed): the dataset CSV,
a matching schema file, and the truth document.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataio import MISSING
from .errors import ConfigError, EvidenceError
from .schema import Schema, VariableSpec, format_schema

_PMF_TOL = 1e-9


def _check_pmf(pmf: Sequence[float], what: str) -> tuple[float, ...]:
    pmf = tuple(float(x) for x in pmf)
    if any(x < 0 for x in pmf):
        raise ConfigError(f"{what}: probabilities must be nonnegative")
    if abs(sum(pmf) - 1.0) > _PMF_TOL:
        raise ConfigError(f"{what}: probabilities sum to {sum(pmf)}, expected 1")
    return pmf


@dataclass(frozen=True)
class CategoricalSpec:
    """Class-conditioned categorical variable."""

    name: str
    outcomes: tuple[str, ...]
    dist: Mapping[str, Sequence[float]]      # class label -> pmf over outcomes
    missing_rate: float = 0.0


@dataclass(frozen=True)
class ContinuousSpec:
    """Class-conditioned normal variable."""

    name: str
    mean: Mapping[str, float]
    sd: Mapping[str, float]
    missing_rate: float = 0.0


@dataclass(frozen=True)
class DependentSpec:
    """Categorical child conditioned on the class and one categorical parent."""

    name: str
    parent: str
    outcomes: tuple[str, ...]
    dist: Mapping[str, Mapping[str, Sequence[float]]]  # class -> parent outcome -> pmf
    missing_rate: float = 0.0


@dataclass(frozen=True)
class NoiseSpec:
    """Class-independent variable: categorical (outcomes+dist) or normal (mean+sd)."""

    name: str
    outcomes: tuple[str, ...] | None = None
    dist: Sequence[float] | None = None
    mean: float | None = None
    sd: float | None = None
    missing_rate: float = 0.0

    @property
    def is_categorical(self) -> bool:
        return self.outcomes is not None


@dataclass(frozen=True)
class GroupSpec:
    name: str = "grp"
    records_per_group: int = 1


@dataclass(frozen=True)
class GenConfig:
    n: int
    seed: int = 0
    class_var: str = "class"
    class_labels: tuple[str, str] = ("good", "bad")
    positive_rate: float = 0.1               # probability of class_labels[1]
    categorical: tuple[CategoricalSpec, ...] = ()
    continuous: tuple[ContinuousSpec, ...] = ()
    dependent: tuple[DependentSpec, ...] = ()
    noise: tuple[NoiseSpec, ...] = ()
    group: GroupSpec | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not 0.0 < self.positive_rate < 1.0:
            raise ConfigError(f"positive_rate must lie in (0, 1), got {self.positive_rate}")
        if len(self.class_labels) != 2 or len(set(self.class_labels)) != 2:
            raise ConfigError("class_labels must be two distinct labels")
        names = [s.name for s in self.all_vars]
        if len(set(names)) != len(names):
            raise ConfigError("variable names must be unique")
        if self.class_var in names:
            raise ConfigError("class_var collides with a variable name")
        cat_names = {s.name for s in self.categorical}
        for spec in self.categorical:
            for label in self.class_labels:
                pmf = _check_pmf(spec.dist[label], f"{spec.name}/{label}")
                if len(pmf) != len(spec.outcomes):
                    raise ConfigError(f"{spec.name}/{label}: pmf length mismatch")
        for spec in self.continuous:
            for label in self.class_labels:
                if spec.sd[label] <= 0:
                    raise ConfigError(f"{spec.name}/{label}: sd must be positive")
        for spec in self.dependent:
            if spec.parent not in cat_names:
                raise ConfigError(
                    f"{spec.name}: parent {spec.parent!r} is not a categorical variable"
                )
            parent = next(s for s in self.categorical if s.name == spec.parent)
            for label in self.class_labels:
                for po in parent.outcomes:
                    pmf = _check_pmf(spec.dist[label][po], f"{spec.name}/{label}/{po}")
                    if len(pmf) != len(spec.outcomes):
                        raise ConfigError(f"{spec.name}/{label}/{po}: pmf length mismatch")
        for spec in self.noise:
            cat = spec.outcomes is not None or spec.dist is not None
            cont = spec.mean is not None or spec.sd is not None
            if cat == cont:
                raise ConfigError(
                    f"{spec.name}: declare either outcomes+dist or mean+sd"
                )
            if cat:
                pmf = _check_pmf(spec.dist, spec.name)  # type: ignore[arg-type]
                if len(pmf) != len(spec.outcomes):     # type: ignore[arg-type]
                    raise ConfigError(f"{spec.name}: pmf length mismatch")
            elif spec.sd is None or spec.sd <= 0:
                raise ConfigError(f"{spec.name}: sd must be positive")
        if self.group is not None and self.group.records_per_group < 1:
            raise ConfigError("records_per_group must be >= 1")

    @property
    def all_vars(self) -> list:
        return list(self.categorical) + list(self.continuous) + \
            list(self.dependent) + list(self.noise)

    @property
    def prior(self) -> dict[str, float]:
        neg, pos = self.class_labels
        return {neg: 1.0 - self.positive_rate, pos: self.positive_rate}

    def to_schema(self) -> Schema:
        fields = []
        for spec in self.all_vars:
            if isinstance(spec, (CategoricalSpec, DependentSpec)):
                fields.append(VariableSpec(spec.name, "categorical"))
            elif isinstance(spec, ContinuousSpec):
                fields.append(VariableSpec(spec.name, "continuous", "entropy"))
            else:
                if spec.is_categorical:
                    fields.append(VariableSpec(spec.name, "categorical"))
                else:
                    fields.append(VariableSpec(spec.name, "continuous", "entropy"))
        return Schema(
            class_var=self.class_var,
            field_vars=tuple(fields),
            group_key=self.group.name if self.group else None,
        )


@dataclass(frozen=True)
class TruthModel:
    """The exact generative network behind a dataset."""

    config: GenConfig

    @property
    def prior(self) -> dict[str, float]:
        return self.config.prior

    def to_doc(self) -> dict:
        return {"format": "rarebayes-truth-v1", "config": config_to_doc(self.config)}

    @staticmethod
    def from_doc(doc: dict) -> "TruthModel":
        return TruthModel(config=config_from_doc(doc["config"]))


@dataclass(frozen=True)
class GenResult:
    data_path: Path
    schema_path: Path
    truth_path: Path
    truth: TruthModel


def _normal_pdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def analytic_posterior(truth: TruthModel, record: Mapping[str, object]) -> dict[str, float]:
    """Exact Bayes posterior under the generative network.

    Continuous evidence uses the true normal densities.  A dependent
    child whose parent is missing is marginalized over the parent's
    class-conditional distribution.  Missing values contribute nothing.
    """
    cfg = truth.config
    labels = cfg.class_labels
    weights = {label: cfg.prior[label] for label in labels}

    def is_missing(value) -> bool:
        if value is None or value == MISSING:
            return True
        if isinstance(value, float) and math.isnan(value):
            return True
        return False

    def as_float(value) -> float:
        return float(value)

    cat_specs = {s.name: s for s in cfg.categorical}
    for spec in cfg.categorical:
        value = record.get(spec.name)
        if is_missing(value):
            continue
        if value not in spec.outcomes:
            raise EvidenceError(f"{spec.name}: unknown outcome {value!r}")
        idx = spec.outcomes.index(value)
        for label in labels:
            weights[label] *= spec.dist[label][idx]
    for spec in cfg.continuous:
        value = record.get(spec.name)
        if is_missing(value):
            continue
        x = as_float(value)
        for label in labels:
            weights[label] *= _normal_pdf(x, spec.mean[label], spec.sd[label])
    for spec in cfg.dependent:
        value = record.get(spec.name)
        if is_missing(value):
            continue
        if value not in spec.outcomes:
            raise EvidenceError(f"{spec.name}: unknown outcome {value!r}")
        idx = spec.outcomes.index(value)
        parent = cat_specs[spec.parent]
        pvalue = record.get(spec.parent)
        for label in labels:
            if is_missing(pvalue):
                lk = sum(
                    parent.dist[label][pi] * spec.dist[label][po][idx]
                    for pi, po in enumerate(parent.outcomes)
                )
            else:
                if pvalue not in parent.outcomes:
                    raise EvidenceError(f"{spec.parent}: unknown outcome {pvalue!r}")
                lk = spec.dist[label][pvalue][idx]
            weights[label] *= lk
    for spec in cfg.noise:
        value = record.get(spec.name)
        if is_missing(value):
            continue
        if spec.is_categorical:
            if value not in spec.outcomes:
                raise EvidenceError(f"{spec.name}: unknown outcome {value!r}")
            idx = spec.outcomes.index(value)
            for label in labels:
                weights[label] *= spec.dist[idx]
        else:
            x = as_float(value)
            for label in labels:
                weights[label] *= _normal_pdf(x, spec.mean, spec.sd)

    total = sum(weights.values())
    if total == 0:
        return dict(cfg.prior)
    return {label: weights[label] / total for label in labels}


# -- sampling ---------------------------------------------------------------


def _sample_columns(cfg: GenConfig, rng: np.random.Generator):
    """Draw every column vectorized; draw order is fixed by config order."""
    n = cfg.n
    neg, pos = cfg.class_labels
    is_pos = rng.random(n) < cfg.positive_rate
    class_codes = is_pos.astype(np.int64)
    class_col = np.where(is_pos, pos, neg)

    columns: dict[str, np.ndarray] = {}
    cat_codes: dict[str, np.ndarray] = {}
    for spec in cfg.categorical:
        codes = np.zeros(n, dtype=np.int64)
        k = len(spec.outcomes)
        for ci, label in enumerate(cfg.class_labels):
            mask = class_codes == ci
            m = int(mask.sum())
            if m:
                codes[mask] = rng.choice(k, size=m, p=np.asarray(spec.dist[label]))
        cat_codes[spec.name] = codes
        columns[spec.name] = np.asarray(spec.outcomes, dtype=object)[codes]
    for spec in cfg.continuous:
        vals = np.zeros(n, dtype=np.float64)
        for ci, label in enumerate(cfg.class_labels):
            mask = class_codes == ci
            m = int(mask.sum())
            if m:
                vals[mask] = rng.normal(spec.mean[label], spec.sd[label], size=m)
        columns[spec.name] = vals
    for spec in cfg.dependent:
        parent = next(s for s in cfg.categorical if s.name == spec.parent)
        pcodes = cat_codes[spec.parent]
        codes = np.zeros(n, dtype=np.int64)
        k = len(spec.outcomes)
        for ci, label in enumerate(cfg.class_labels):
            for pi, po in enumerate(parent.outcomes):
                mask = (class_codes == ci) & (pcodes == pi)
                m = int(mask.sum())
                if m:
                    codes[mask] = rng.choice(
                        k, size=m, p=np.asarray(spec.dist[label][po])
                    )
        columns[spec.name] = np.asarray(spec.outcomes, dtype=object)[codes]
    for spec in cfg.noise:
        if spec.is_categorical:
            codes = rng.choice(len(spec.outcomes), size=n, p=np.asarray(spec.dist))
            columns[spec.name] = np.asarray(spec.outcomes, dtype=object)[codes]
        else:
            columns[spec.name] = rng.normal(spec.mean, spec.sd, size=n)

    missing_masks = {
        spec.name: (rng.random(n) < spec.missing_rate) if spec.missing_rate > 0
        else np.zeros(n, dtype=bool)
        for spec in cfg.all_vars
    }
    return class_col, columns, missing_masks


def _format_column(spec, values: np.ndarray, missing: np.ndarray) -> list[str]:
    continuous = isinstance(spec, ContinuousSpec) or (
        isinstance(spec, NoiseSpec) and not spec.is_categorical
    )
    if continuous:
        out = [f"{v:.6f}" for v in values]
    else:
        out = [str(v) for v in values]
    if missing.any():
        for i in np.nonzero(missing)[0]:
            out[i] = MISSING
    return out


def generate(config: GenConfig, out_dir: str | Path) -> GenResult:
    """Write data.csv, schema.txt, and truth.json under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    class_col, columns, missing_masks = _sample_columns(config, rng)

    header: list[str] = []
    cells: list[list[str]] = []
    if config.group is not None:
        rpg = config.group.records_per_group
        header.append(config.group.name)
        cells.append([f"g{i // rpg:06d}" for i in range(config.n)])
    header.append(config.class_var)
    cells.append([str(v) for v in class_col])
    for spec in config.all_vars:
        header.append(spec.name)
        cells.append(_format_column(spec, columns[spec.name], missing_masks[spec.name]))

    data_path = out / "data.csv"
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(zip(*cells))

    schema_path = out / "schema.txt"
    schema_path.write_text(format_schema(config.to_schema()), encoding="utf-8")

    truth = TruthModel(config=config)
    truth_path = out / "truth.json"
    truth_path.write_text(
        json.dumps(truth.to_doc(), indent=2) + "\n", encoding="utf-8"
    )
    return GenResult(
        data_path=data_path, schema_path=schema_path, truth_path=truth_path,
        truth=truth,
    )


# -- config (de)serialization ------------------------------------------------


def config_to_doc(cfg: GenConfig) -> dict:
    return {
        "n": cfg.n,
        "seed": cfg.seed,
        "class_var": cfg.class_var,
        "class_labels": list(cfg.class_labels),
        "positive_rate": cfg.positive_rate,
        "categorical": [
            {
                "name": s.name,
                "outcomes": list(s.outcomes),
                "dist": {k: list(v) for k, v in s.dist.items()},
                "missing_rate": s.missing_rate,
            }
            for s in cfg.categorical
        ],
        "continuous": [
            {
                "name": s.name,
                "mean": dict(s.mean),
                "sd": dict(s.sd),
                "missing_rate": s.missing_rate,
            }
            for s in cfg.continuous
        ],
        "dependent": [
            {
                "name": s.name,
                "parent": s.parent,
                "outcomes": list(s.outcomes),
                "dist": {
                    c: {po: list(pmf) for po, pmf in by_parent.items()}
                    for c, by_parent in s.dist.items()
                },
                "missing_rate": s.missing_rate,
            }
            for s in cfg.dependent
        ],
        "noise": [
            {
                "name": s.name,
                "outcomes": list(s.outcomes) if s.outcomes is not None else None,
                "dist": list(s.dist) if s.dist is not None else None,
                "mean": s.mean,
                "sd": s.sd,
                "missing_rate": s.missing_rate,
            }
            for s in cfg.noise
        ],
        "group": (
            {"name": cfg.group.name, "records_per_group": cfg.group.records_per_group}
            if cfg.group
            else None
        ),
    }


def config_from_doc(doc: dict) -> GenConfig:
    try:
        return GenConfig(
            n=doc["n"],
            seed=doc.get("seed", 0),
            class_var=doc.get("class_var", "class"),
            class_labels=tuple(doc.get("class_labels", ("good", "bad"))),
            positive_rate=doc.get("positive_rate", 0.1),
            categorical=tuple(
                CategoricalSpec(
                    name=s["name"],
                    outcomes=tuple(s["outcomes"]),
                    dist={k: tuple(v) for k, v in s["dist"].items()},
                    missing_rate=s.get("missing_rate", 0.0),
                )
                for s in doc.get("categorical", ())
            ),
            continuous=tuple(
                ContinuousSpec(
                    name=s["name"],
                    mean=dict(s["mean"]),
                    sd=dict(s["sd"]),
                    missing_rate=s.get("missing_rate", 0.0),
                )
                for s in doc.get("continuous", ())
            ),
            dependent=tuple(
                DependentSpec(
                    name=s["name"],
                    parent=s["parent"],
                    outcomes=tuple(s["outcomes"]),
                    dist={
                        c: {po: tuple(pmf) for po, pmf in by_parent.items()}
                        for c, by_parent in s["dist"].items()
                    },
                    missing_rate=s.get("missing_rate", 0.0),
                )
                for s in doc.get("dependent", ())
            ),
            noise=tuple(
                NoiseSpec(
                    name=s["name"],
                    outcomes=tuple(s["outcomes"]) if s.get("outcomes") else None,
                    dist=tuple(s["dist"]) if s.get("dist") else None,
                    mean=s.get("mean"),
                    sd=s.get("sd"),
                    missing_rate=s.get("missing_rate", 0.0),
                )
                for s in doc.get("noise", ())
            ),
            group=(
                GroupSpec(
                    name=doc["group"].get("name", "grp"),
                    records_per_group=doc["group"].get("records_per_group", 1),
                )
                if doc.get("group")
                else None
            ),
        )
    except KeyError as exc:
        raise ConfigError(f"generator config is missing key {exc}") from None


def load_config(path: str | Path) -> GenConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_doc(json.load(fh))


def load_truth(path: str | Path) -> TruthModel:
    with open(path, encoding="utf-8") as fh:
        return TruthModel.from_doc(json.load(fh))
