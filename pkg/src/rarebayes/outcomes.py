"""Outcome alphabets (training pass 1) and supervised discretization.

Every variable gets a discrete outcome alphabet.  Categorical variables
use their observed values; continuous variables are cut into bins by
class-information gain (or equal-frequency quantiles).  Every alphabet
ends with the MISSING symbol.
"""

from __future__ import annotations

import hashlib
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

from .dataio import CsvDataset, MISSING
from .errors import CardinalityError
from .schema import Schema

DEFAULT_RESERVOIR_CAPACITY = 100_000
DEFAULT_MAX_CATEGORIES = 10_000


@dataclass(frozen=True)
class VariableOutcomes:
    """Alphabet of one variable; continuous variables also carry bin edges."""

    symbols: tuple[str, ...]
    edges: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("outcome symbols must be unique")
        if MISSING not in self.symbols:
            raise ValueError("every alphabet must contain the MISSING symbol")
        if self.edges is not None and list(self.edges) != sorted(set(self.edges)):
            raise ValueError("bin edges must be strictly increasing")


@dataclass(frozen=True)
class OutcomeTable:
    """Per-variable alphabets plus the observed class alphabet."""

    class_var: str
    class_symbols: tuple[str, ...]
    variables: dict[str, VariableOutcomes] = field(default_factory=dict)

    def symbols(self, var: str) -> tuple[str, ...]:
        return self.variables[var].symbols

    def edges(self, var: str) -> tuple[float, ...] | None:
        return self.variables[var].edges


class ReservoirSample:
    """Fixed-capacity uniform sample of (value, class-label) pairs.

    Classic algorithm-R replacement; deterministic for a fixed seed and
    input order, which makes the resulting bin edges reproducible.
    """

    def __init__(self, capacity: int, seed: int):
        if capacity < 1:
            raise ValueError("reservoir capacity must be >= 1")
        self.capacity = capacity
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self.values: list[float] = []
        self.labels: list[str] = []
        self.seen = 0

    def extend(self, values: np.ndarray, labels: Sequence[str]) -> None:
        n = len(values)
        if n == 0:
            return
        start = 0
        room = self.capacity - len(self.values)
        if room > 0:
            take = min(room, n)
            self.values.extend(values[:take].tolist())
            self.labels.extend(labels[:take])
            start = take
        if start < n:
            # arrival index of each remaining item, 1-based over the whole stream
            arrivals = np.arange(self.seen + start + 1, self.seen + n + 1)
            slots = self._rng.integers(0, arrivals)
            for offset, slot in zip(range(start, n), slots):
                if slot < self.capacity:
                    self.values[slot] = float(values[offset])
                    self.labels[slot] = labels[offset]
        self.seen += n

    def pairs(self) -> list[tuple[float, str]]:
        return list(zip(self.values, self.labels))


def _class_entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


class _Leaf:
    __slots__ = ("lo", "hi", "entropy", "splittable")

    def __init__(self, lo: int, hi: int, entropy: float):
        self.lo = lo
        self.hi = hi
        self.entropy = entropy
        self.splittable = True


def _best_split(values: np.ndarray, codes: np.ndarray, k: int, lo: int, hi: int):
    """Best information-gain cut inside values[lo:hi] (sorted ascending).

    Returns (gain, edge, split_index) or None when no cut exists.  Ties
    in gain resolve to the leftmost candidate cut.
    """
    seg_vals = values[lo:hi]
    n = hi - lo
    boundaries = np.nonzero(seg_vals[1:] != seg_vals[:-1])[0]  # cut after index b
    if boundaries.size == 0:
        return None
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), codes[lo:hi]] = 1.0
    prefix = np.cumsum(onehot, axis=0)
    total = prefix[-1]
    left = prefix[boundaries]
    right = total - left
    n_left = boundaries + 1
    n_right = n - n_left

    def h(rows: np.ndarray, sizes: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = rows / sizes[:, None]
            t = np.where(p > 0, p * np.log2(p), 0.0)
        return -t.sum(axis=1)

    parent = _class_entropy(total)
    gain = parent - (n_left / n) * h(left, n_left) - (n_right / n) * h(right, n_right)
    best = int(np.argmax(gain))
    b = int(boundaries[best])
    edge = (float(seg_vals[b]) + float(seg_vals[b + 1])) / 2.0
    return float(gain[best]), edge, lo + b + 1


def entropy_bins(samples: Iterable[tuple[float, str]], max_bins: int) -> tuple[float, ...]:
    """Supervised binning by greedy recursive information-gain splitting.

    Repeatedly splits the leaf interval with the highest remaining class
    entropy at the candidate cut (midpoint between adjacent distinct
    sorted values) that maximizes gain; stops at ``max_bins`` bins or
    when no split has positive gain.  Returns strictly increasing edges.
    """
    if max_bins < 1:
        raise ValueError("max_bins must be >= 1")
    pairs = list(samples)
    if not pairs:
        raise ValueError("entropy_bins requires at least one sample")
    values = np.array([v for v, _ in pairs], dtype=np.float64)
    label_list = sorted({c for _, c in pairs})
    label_idx = {c: i for i, c in enumerate(label_list)}
    codes = np.array([label_idx[c] for _, c in pairs], dtype=np.int64)
    order = np.argsort(values, kind="stable")
    values = values[order]
    codes = codes[order]
    k = len(label_list)

    counts_all = np.bincount(codes, minlength=k).astype(np.float64)
    leaves = [_Leaf(0, len(values), _class_entropy(counts_all))]
    edges: list[float] = []
    while len(leaves) < max_bins:
        candidates = [lf for lf in leaves if lf.splittable]
        if not candidates:
            break
        # highest remaining entropy first; ties go to the leftmost leaf
        leaf = max(candidates, key=lambda lf: (lf.entropy, -lf.lo))
        split = _best_split(values, codes, k, leaf.lo, leaf.hi)
        if split is None or split[0] <= 0:
            leaf.splittable = False
            continue
        _, edge, mid = split
        left_counts = np.bincount(codes[leaf.lo:mid], minlength=k).astype(np.float64)
        right_counts = np.bincount(codes[mid:leaf.hi], minlength=k).astype(np.float64)
        leaves.remove(leaf)
        leaves.append(_Leaf(leaf.lo, mid, _class_entropy(left_counts)))
        leaves.append(_Leaf(mid, leaf.hi, _class_entropy(right_counts)))
        edges.append(edge)
    return tuple(sorted(edges))


def quantile_bins(values: Iterable[float], max_bins: int) -> tuple[float, ...]:
    """Equal-frequency edges at the i/max_bins quantiles, duplicates dropped."""
    if max_bins < 1:
        raise ValueError("max_bins must be >= 1")
    arr = np.asarray(list(values), dtype=np.float64)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        raise ValueError("quantile_bins requires at least one sample")
    if max_bins == 1:
        return ()
    qs = np.quantile(arr, np.arange(1, max_bins) / max_bins)
    edges = sorted(set(float(q) for q in qs))
    # an edge at or below the minimum would create a permanently empty first bin
    lo = float(arr.min())
    return tuple(e for e in edges if e > lo)


def bin_symbol(index: int) -> str:
    return f"bin{index}"


def discretize(value: float | str | None, edges: Sequence[float]) -> str:
    """Map a number to its bin symbol.  Left-closed bins: bin j iff e_j <= v < e_{j+1}.

    MISSING (or None, or NaN) maps to the MISSING symbol.
    """
    if value is None or value == MISSING:
        return MISSING
    v = float(value)
    if math.isnan(v):
        log.debug("NaN value treated as MISSING")
        return MISSING
    return bin_symbol(bisect_right(list(edges), v))


def variable_seed(base_seed: int, name: str) -> int:
    """Stable per-variable RNG seed derived from the training seed."""
    digest = hashlib.sha256(f"{base_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def collect_outcomes(
    schema: Schema,
    dataset: CsvDataset,
    *,
    seed: int = 0,
    reservoir_capacity: int = DEFAULT_RESERVOIR_CAPACITY,
    max_categories: int = DEFAULT_MAX_CATEGORIES,
) -> OutcomeTable:
    """Build every variable's outcome alphabet in exactly one dataset pass.

    Categorical alphabets are the observed values plus MISSING, capped at
    ``max_categories``.  Continuous variables keep a class-labeled
    reservoir (per-variable, capacity ``reservoir_capacity``) and are cut
    by their declared discretizer afterwards.  Records whose class value
    is missing still contribute categorical outcomes but are excluded
    from the supervised reservoirs.
    """
    cat_vars = [v.name for v in schema.categorical_vars]
    cont_vars = [v.name for v in schema.continuous_vars]
    observed: dict[str, set[str]] = {name: set() for name in cat_vars}
    class_observed: set[str] = set()
    reservoirs = {
        name: ReservoirSample(reservoir_capacity, variable_seed(seed, name))
        for name in cont_vars
    }

    wanted = dataset.schema_columns(schema, require_class=True)
    for chunk in dataset.iter_chunks(wanted):
        class_col = chunk.columns[schema.class_var]
        class_observed.update(class_col)
        class_ok = np.array([c != MISSING for c in class_col], dtype=bool)
        for name in cat_vars:
            observed[name].update(chunk.columns[name])
            if len(observed[name]) > max_categories + 1:
                raise CardinalityError(
                    f"variable {name!r} exceeds {max_categories} distinct outcomes"
                )
        for name in cont_vars:
            values = parse_float_column(chunk.columns[name])
            labeled = np.isfinite(values) & class_ok
            if labeled.any():
                idx = np.nonzero(labeled)[0]
                reservoirs[name].extend(values[idx], [class_col[i] for i in idx])

    class_observed.discard(MISSING)
    variables: dict[str, VariableOutcomes] = {}
    for spec in schema.field_vars:
        if spec.kind == "categorical":
            vals = observed[spec.name]
            vals.discard(MISSING)
            if len(vals) > max_categories:
                raise CardinalityError(
                    f"variable {spec.name!r} exceeds {max_categories} distinct outcomes"
                )
            variables[spec.name] = VariableOutcomes(
                symbols=tuple(sorted(vals)) + (MISSING,)
            )
        else:
            res = reservoirs[spec.name]
            if res.seen == 0:
                edges: tuple[float, ...] = ()
            elif spec.discretizer == "quantile":
                edges = quantile_bins(res.values, schema.max_bins)
            else:
                edges = entropy_bins(res.pairs(), schema.max_bins)
            symbols = tuple(bin_symbol(i) for i in range(len(edges) + 1)) + (MISSING,)
            variables[spec.name] = VariableOutcomes(symbols=symbols, edges=edges)

    return OutcomeTable(
        class_var=schema.class_var,
        class_symbols=tuple(sorted(class_observed)),
        variables=variables,
    )


def parse_float_column(col: list[str]) -> np.ndarray:
    """Parse raw strings to float64; '?' / blanks / garbage become NaN."""
    try:
        return np.array(
            [x if x and x != MISSING else "nan" for x in col], dtype=np.float64
        )
    except ValueError:
        out = np.empty(len(col), dtype=np.float64)
        for i, x in enumerate(col):
            if not x or x == MISSING:
                out[i] = np.nan
            else:
                try:
                    out[i] = float(x)
                except ValueError:
                    out[i] = np.nan
        return out
