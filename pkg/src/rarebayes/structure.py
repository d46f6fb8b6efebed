"""Four-pass network training.

Pass 1 collects outcome alphabets.  Pass 2 counts class-by-field joints
and keeps the fields whose cumulative MI share reaches ``t_prime``.
Pass 3 counts class-conditional joints over selected-field pairs and
keeps the dependencies whose cumulative conditional-MI share reaches
``t_field``.  Pass 4 estimates the class prior, one CPT per selected
node, and a per-node fallback table conditioned on the class alone.

The dataset is read exactly four times regardless of variable count or
alphabet sizes; the model carries its :class:`PassStats` as proof.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataio import Chunk, CsvDataset, PassStats, as_dataset
from .errors import ModelSizeError, TrainingError
from .infometrics import (
    JointCounts,
    MIScore,
    conditional_mutual_information,
    mutual_information,
    select_by_cumulative,
)
from .outcomes import (
    OutcomeTable,
    VariableOutcomes,
    collect_outcomes,
    parse_float_column,
)
from .schema import Schema, VariableSpec
from .windows import WindowState, node_id, node_order, node_var_slot

MODEL_FORMAT = "rarebayes-model-v1"


@dataclass
class CPT:
    """P{child | class (, field parent)}: one probability row per parent config.

    ``probs`` has shape (k, A_child) without a field parent or
    (k, A_parent, A_child) with one.  ``unseen`` flags rows whose raw
    count total was zero; such rows carry no evidence.
    """

    child: str
    parent: str | None
    probs: np.ndarray
    unseen: np.ndarray

    @property
    def cells(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class RankedField:
    """A selected node with its MI against the class, in rank order."""

    node: str
    var: str
    slot: int
    mi: float


@dataclass
class NetworkModel:
    """Trained classifier: prior, ranked fields, parent map, CPTs, fallbacks."""

    schema: Schema
    seed: int
    class_symbols: tuple[str, ...]
    prior: np.ndarray
    outcomes: OutcomeTable
    ranked_fields: list[RankedField]
    parents: dict[str, str | None]
    cpts: dict[str, CPT]
    fallbacks: dict[str, CPT]
    pass_stats: PassStats

    @cached_property
    def class_index(self) -> dict[str, int]:
        return {sym: i for i, sym in enumerate(self.class_symbols)}

    @cached_property
    def symbol_index(self) -> dict[str, dict[str, int]]:
        return {
            var: {sym: i for i, sym in enumerate(vo.symbols)}
            for var, vo in self.outcomes.variables.items()
        }

    def alphabet_size(self, var: str) -> int:
        return len(self.outcomes.variables[var].symbols)

    def missing_code(self, var: str) -> int:
        return self.alphabet_size(var) - 1

    def rare_class(self) -> str:
        """The least-frequent class by prior; ties go to alphabet order."""
        return self.class_symbols[int(np.argmin(self.prior))]

    @property
    def total_cells(self) -> int:
        return sum(c.cells for c in self.cpts.values()) + sum(
            c.cells for c in self.fallbacks.values()
        )

    # -- persistence ------------------------------------------------------

    def to_json_text(self) -> str:
        return json.dumps(self._to_doc(), indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json_text(), encoding="utf-8")

    def _to_doc(self) -> dict:
        sch = self.schema
        return {
            "format": MODEL_FORMAT,
            "schema": {
                "class_var": sch.class_var,
                "field_vars": [
                    {"name": v.name, "kind": v.kind, "discretizer": v.discretizer}
                    for v in sch.field_vars
                ],
                "t_prime": sch.t_prime,
                "t_field": sch.t_field,
                "window": sch.window,
                "group_key": sch.group_key,
                "max_parents": sch.max_parents,
                "max_bins": sch.max_bins,
                "smoothing": sch.smoothing,
                "max_model_cells": sch.max_model_cells,
            },
            "seed": self.seed,
            "class_symbols": list(self.class_symbols),
            "prior": self.prior.tolist(),
            "outcomes": {
                var: {
                    "symbols": list(vo.symbols),
                    "edges": list(vo.edges) if vo.edges is not None else None,
                }
                for var, vo in self.outcomes.variables.items()
            },
            "ranked_fields": [
                {"node": rf.node, "var": rf.var, "slot": rf.slot, "mi": rf.mi}
                for rf in self.ranked_fields
            ],
            "parents": {node: self.parents[node] for node in self.parents},
            "cpts": {
                node: _cpt_to_doc(cpt) for node, cpt in self.cpts.items()
            },
            "fallbacks": {
                node: _cpt_to_doc(cpt) for node, cpt in self.fallbacks.items()
            },
            "pass_stats": {
                "passes": self.pass_stats.passes,
                "rows": self.pass_stats.rows,
                "rejected": self.pass_stats.rejected,
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "NetworkModel":
        if doc.get("format") != MODEL_FORMAT:
            raise TrainingError(f"unrecognized model format {doc.get('format')!r}")
        s = doc["schema"]
        schema = Schema(
            class_var=s["class_var"],
            field_vars=tuple(
                VariableSpec(v["name"], v["kind"], v["discretizer"])
                for v in s["field_vars"]
            ),
            t_prime=s["t_prime"],
            t_field=s["t_field"],
            window=s["window"],
            group_key=s["group_key"],
            max_parents=s["max_parents"],
            max_bins=s["max_bins"],
            smoothing=s["smoothing"],
            max_model_cells=s["max_model_cells"],
        )
        outcomes = OutcomeTable(
            class_var=schema.class_var,
            class_symbols=tuple(doc["class_symbols"]),
            variables={
                var: VariableOutcomes(
                    symbols=tuple(o["symbols"]),
                    edges=tuple(o["edges"]) if o["edges"] is not None else None,
                )
                for var, o in doc["outcomes"].items()
            },
        )
        stats = PassStats(**doc["pass_stats"])
        return NetworkModel(
            schema=schema,
            seed=doc["seed"],
            class_symbols=tuple(doc["class_symbols"]),
            prior=np.array(doc["prior"], dtype=np.float64),
            outcomes=outcomes,
            ranked_fields=[
                RankedField(rf["node"], rf["var"], rf["slot"], rf["mi"])
                for rf in doc["ranked_fields"]
            ],
            parents=dict(doc["parents"]),
            cpts={n: _cpt_from_doc(n, d) for n, d in doc["cpts"].items()},
            fallbacks={n: _cpt_from_doc(n, d) for n, d in doc["fallbacks"].items()},
            pass_stats=stats,
        )


def _cpt_to_doc(cpt: CPT) -> dict:
    return {
        "parent": cpt.parent,
        "probs": cpt.probs.tolist(),
        "unseen": cpt.unseen.tolist(),
    }


def _cpt_from_doc(node: str, doc: dict) -> CPT:
    return CPT(
        child=node,
        parent=doc["parent"],
        probs=np.array(doc["probs"], dtype=np.float64),
        unseen=np.array(doc["unseen"], dtype=bool),
    )


def load_model(path: str | Path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        return NetworkModel.from_doc(json.load(fh))


# -- chunk encoding --------------------------------------------------------


class Encoder:
    """Maps raw chunk columns to integer outcome codes (MISSING = last code)."""

    def __init__(self, schema: Schema, outcomes: OutcomeTable):
        self.schema = schema
        self.outcomes = outcomes
        self.class_lut = {sym: i for i, sym in enumerate(outcomes.class_symbols)}
        self.sizes = {v: len(o.symbols) for v, o in outcomes.variables.items()}
        self.missing = {v: self.sizes[v] - 1 for v in self.sizes}
        self._luts: dict[str, dict[str, int]] = {}
        self._edges: dict[str, np.ndarray] = {}
        for spec in schema.field_vars:
            vo = outcomes.variables[spec.name]
            if spec.kind == "categorical":
                self._luts[spec.name] = {s: i for i, s in enumerate(vo.symbols)}
            else:
                self._edges[spec.name] = np.asarray(vo.edges or (), dtype=np.float64)

    def encode_var(self, name: str, col: list[str]) -> np.ndarray:
        if name in self._luts:
            lut = self._luts[name]
            miss = self.missing[name]
            return np.fromiter(
                (lut.get(v, miss) for v in col), dtype=np.int64, count=len(col)
            )
        values = parse_float_column(col)
        codes = np.searchsorted(self._edges[name], values, side="right").astype(np.int64)
        codes[np.isnan(values)] = self.missing[name]
        return codes

    def encode_class(self, col: list[str]) -> np.ndarray:
        lut = self.class_lut
        return np.fromiter(
            (lut.get(v, -1) for v in col), dtype=np.int64, count=len(col)
        )

    def encode_chunk(self, chunk: Chunk, with_class: bool = True):
        var_codes = {
            v.name: self.encode_var(v.name, chunk.columns[v.name])
            for v in self.schema.field_vars
        }
        class_codes = None
        if with_class and self.schema.class_var in chunk.columns:
            class_codes = self.encode_class(chunk.columns[self.schema.class_var])
        groups = (
            chunk.columns.get(self.schema.group_key)
            if self.schema.group_key
            else None
        )
        return var_codes, class_codes, groups

    def window_state(self) -> WindowState:
        return WindowState(
            schema=self.schema,
            var_names=[v.name for v in self.schema.field_vars],
            missing_codes=dict(self.missing),
        )


def _node_columns(
    encoder: Encoder, state: WindowState, var_codes: dict, groups
) -> dict[str, np.ndarray]:
    cols = dict(var_codes)
    cols.update(state.lag_columns(var_codes, groups))
    return cols


# -- training passes -------------------------------------------------------


def _prime_field_scores(
    ds: CsvDataset, schema: Schema, enc: Encoder, chunk_rows: int
) -> list[MIScore]:
    """Pass 2: class-by-node joint counts and MI scores in declaration order."""
    k = len(enc.class_lut)
    candidates = [node_id(v, s) for v, s in node_order(schema)]
    var_of = {node_id(v, s): v for v, s in node_order(schema)}
    tables = {
        node: np.zeros(k * enc.sizes[var_of[node]], dtype=np.int64)
        for node in candidates
    }
    state = enc.window_state()
    wanted = ds.schema_columns(schema, require_class=True)
    for chunk in ds.iter_chunks(wanted, chunk_rows):
        var_codes, class_codes, groups = enc.encode_chunk(chunk)
        cols = _node_columns(enc, state, var_codes, groups)
        mask = class_codes >= 0
        cls = class_codes[mask]
        for node in candidates:
            a = enc.sizes[var_of[node]]
            flat = cls * a + cols[node][mask]
            tables[node] += np.bincount(flat, minlength=k * a)
    scores = []
    for node in candidates:
        a = enc.sizes[var_of[node]]
        joint = JointCounts(("class", node), tables[node].reshape(k, a))
        scores.append(MIScore(subject=node, value=mutual_information(joint)))
    return scores


def _plan_pairs(
    schema: Schema, enc: Encoder, ranked: list[RankedField]
) -> list[tuple[str, str]]:
    """Rank-ordered selected-node pairs, guarded by the model cell budget."""
    if schema.max_parents == 0:
        return []
    k = len(enc.class_lut)
    var_of = {rf.node: rf.var for rf in ranked}
    pairs = []
    cells = 0
    nodes = [rf.node for rf in ranked]
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            a, b = nodes[i], nodes[j]
            cells += k * enc.sizes[var_of[a]] * enc.sizes[var_of[b]]
            if cells > schema.max_model_cells:
                raise ModelSizeError(
                    f"pairwise counts for ({a}, {b}) would exceed "
                    f"max_model_cells={schema.max_model_cells}"
                )
            pairs.append((a, b))
    return pairs


def _pairwise_cmi(
    ds: CsvDataset,
    schema: Schema,
    enc: Encoder,
    ranked: list[RankedField],
    chunk_rows: int,
) -> list[MIScore]:
    """Pass 3: class-conditional pairwise counts over selected nodes.

    Always consumes exactly one pass, even when there is nothing to count.
    """
    k = len(enc.class_lut)
    var_of = {rf.node: rf.var for rf in ranked}
    pairs = _plan_pairs(schema, enc, ranked)
    tables = {
        (a, b): np.zeros(k * enc.sizes[var_of[a]] * enc.sizes[var_of[b]], dtype=np.int64)
        for a, b in pairs
    }
    state = enc.window_state()
    wanted = ds.schema_columns(schema, require_class=True)
    for chunk in ds.iter_chunks(wanted, chunk_rows):
        var_codes, class_codes, groups = enc.encode_chunk(chunk)
        if not pairs:
            continue
        cols = _node_columns(enc, state, var_codes, groups)
        mask = class_codes >= 0
        cls = class_codes[mask]
        masked = {node: cols[node][mask] for node in var_of}
        for a, b in pairs:
            sa, sb = enc.sizes[var_of[a]], enc.sizes[var_of[b]]
            flat = (cls * sa + masked[a]) * sb + masked[b]
            tables[(a, b)] += np.bincount(flat, minlength=k * sa * sb)
    scores = []
    for a, b in pairs:
        sa, sb = enc.sizes[var_of[a]], enc.sizes[var_of[b]]
        joint = JointCounts(("class", a, b), tables[(a, b)].reshape(k, sa, sb))
        scores.append(
            MIScore(subject=(a, b), value=conditional_mutual_information(joint))
        )
    return scores


def select_dependencies(
    cmi: Sequence[MIScore],
    t_field: float,
    ranking: Sequence[str],
    max_parents: int,
) -> list[tuple[str, str]]:
    """Greedy field-to-field edge selection.

    Visits pairs in descending CMI (ties keep input order, which the
    trainer supplies in rank order), orients each accepted edge from the
    higher-ranked endpoint to the lower-ranked one, and skips any pair
    whose child already has ``max_parents`` field parents.  Skipped pairs
    contribute nothing to the cumulative total; accumulation stops once
    accepted CMI reaches ``t_field`` of the grand total.  Edges always
    point down the ranking, so the result is acyclic.
    """
    if not 0.0 <= t_field <= 1.0:
        raise ValueError(f"t_field must lie in [0, 1], got {t_field}")
    rank = {node: i for i, node in enumerate(ranking)}
    for score in cmi:
        a, b = score.subject
        if a not in rank or b not in rank:
            raise ValueError(f"pair ({a}, {b}) has an unselected endpoint")
    total = sum(s.value for s in cmi)
    if total <= 0 or max_parents == 0:
        return []
    parent_count: dict[str, int] = {}
    edges: list[tuple[str, str]] = []
    cum = 0.0
    for score in sorted(cmi, key=lambda s: s.value, reverse=True):
        if score.value <= 0:
            break
        a, b = score.subject
        parent, child = (a, b) if rank[a] < rank[b] else (b, a)
        if parent_count.get(child, 0) >= max_parents:
            continue
        edges.append((parent, child))
        parent_count[child] = parent_count.get(child, 0) + 1
        cum += score.value
        if cum / total >= t_field:
            break
    return edges


def _conditional_counts(
    ds: CsvDataset,
    schema: Schema,
    enc: Encoder,
    ranked: list[RankedField],
    parents: dict[str, str | None],
    chunk_rows: int,
):
    """Pass 4: class counts, CPT counts per node, fallback counts per node."""
    k = len(enc.class_lut)
    var_of = {rf.node: rf.var for rf in ranked}
    class_counts = np.zeros(k, dtype=np.int64)
    fb_counts = {
        node: np.zeros((k, enc.sizes[var_of[node]]), dtype=np.int64)
        for node in var_of
    }
    cpt_counts: dict[str, np.ndarray] = {}
    budget = sum(arr.size for arr in fb_counts.values())
    for node, parent in parents.items():
        if parent is None:
            continue
        shape = (k, enc.sizes[var_of[parent]], enc.sizes[var_of[node]])
        cpt_counts[node] = np.zeros(shape, dtype=np.int64)
        budget += cpt_counts[node].size
        if budget > schema.max_model_cells:
            raise ModelSizeError(
                f"CPT for node {node!r} would exceed "
                f"max_model_cells={schema.max_model_cells}"
            )
    state = enc.window_state()
    wanted = ds.schema_columns(schema, require_class=True)
    for chunk in ds.iter_chunks(wanted, chunk_rows):
        var_codes, class_codes, groups = enc.encode_chunk(chunk)
        cols = _node_columns(enc, state, var_codes, groups)
        mask = class_codes >= 0
        cls = class_codes[mask]
        class_counts += np.bincount(cls, minlength=k)
        for node in var_of:
            sa = enc.sizes[var_of[node]]
            child = cols[node][mask]
            fb_counts[node] += np.bincount(
                cls * sa + child, minlength=k * sa
            ).reshape(k, sa)
            parent = parents.get(node)
            if parent is not None:
                sp = enc.sizes[var_of[parent]]
                pcol = cols[parent][mask]
                flat = (cls * sp + pcol) * sa + child
                cpt_counts[node] += np.bincount(
                    flat, minlength=k * sp * sa
                ).reshape(k, sp, sa)
    return class_counts, fb_counts, cpt_counts


def _normalize_rows(child: str, parent: str | None, counts: np.ndarray, alpha: float) -> CPT:
    totals = counts.sum(axis=-1)
    unseen = totals == 0
    a = counts.shape[-1]
    denom = totals + alpha * a
    with np.errstate(divide="ignore", invalid="ignore"):
        probs = (counts + alpha) / denom[..., None]
    probs = np.where(np.isfinite(probs), probs, 0.0)
    return CPT(child=child, parent=parent, probs=probs, unseen=unseen)


def estimate_cpts(
    cpt_counts: dict[str, np.ndarray],
    fallback_counts: dict[str, np.ndarray],
    class_counts: np.ndarray,
    parents: dict[str, str | None],
    smoothing: float = 0.0,
) -> tuple[dict[str, CPT], dict[str, CPT], np.ndarray]:
    """Turn pass-4 counts into CPTs, fallback tables, and the class prior.

    Each row is (count + alpha) / (rowTotal + alpha * |alphabet|); rows
    whose raw total is zero are flagged unseen regardless of smoothing.
    The prior is the unsmoothed empirical class frequency.
    """
    cpts: dict[str, CPT] = {}
    for node, parent in parents.items():
        counts = cpt_counts[node] if parent is not None else fallback_counts[node]
        cpts[node] = _normalize_rows(node, parent, counts, smoothing)
    fallbacks = {
        node: _normalize_rows(node, None, fallback_counts[node], smoothing)
        for node in parents
    }
    total = class_counts.sum()
    if total == 0:
        raise TrainingError("no labeled records to estimate the class prior")
    prior = class_counts.astype(np.float64) / total
    return cpts, fallbacks, prior


def train(
    schema: Schema,
    data: str | Path | CsvDataset,
    *,
    seed: int = 0,
    reservoir_capacity: int = 100_000,
    max_categories: int = 10_000,
    chunk_rows: int = 65536,
) -> NetworkModel:
    """Train a network in exactly four dataset passes.

    Raises :class:`TrainingError` when the class column has fewer than
    two observed outcomes and :class:`ModelSizeError` when planned count
    tables would blow the cell budget.
    """
    ds = as_dataset(data)
    ds.require_columns(ds.schema_columns(schema, require_class=True))

    outcomes = collect_outcomes(
        schema,
        ds,
        seed=seed,
        reservoir_capacity=reservoir_capacity,
        max_categories=max_categories,
    )
    if len(outcomes.class_symbols) < 2:
        raise TrainingError(
            f"class column {schema.class_var!r} needs >= 2 observed outcomes, "
            f"got {len(outcomes.class_symbols)}"
        )
    enc = Encoder(schema, outcomes)

    scores = _prime_field_scores(ds, schema, enc, chunk_rows)
    selected = select_by_cumulative(scores, schema.t_prime)
    ranked = [
        RankedField(node=s.subject, var=node_var_slot(s.subject)[0],
                    slot=node_var_slot(s.subject)[1], mi=s.value)
        for s in selected
    ]

    pair_scores = _pairwise_cmi(ds, schema, enc, ranked, chunk_rows)
    edges = select_dependencies(
        pair_scores, schema.t_field, [rf.node for rf in ranked], schema.max_parents
    )
    parents: dict[str, str | None] = {rf.node: None for rf in ranked}
    for parent, child in edges:
        parents[child] = parent

    class_counts, fb_counts, cpt_counts = _conditional_counts(
        ds, schema, enc, ranked, parents, chunk_rows
    )
    cpts, fallbacks, prior = estimate_cpts(
        cpt_counts, fb_counts, class_counts, parents, schema.smoothing
    )

    return NetworkModel(
        schema=schema,
        seed=seed,
        class_symbols=outcomes.class_symbols,
        prior=prior,
        outcomes=outcomes,
        ranked_fields=ranked,
        parents=parents,
        cpts=cpts,
        fallbacks=fallbacks,
        pass_stats=PassStats(
            passes=ds.stats.passes, rows=ds.stats.rows, rejected=ds.stats.rejected
        ),
    )
