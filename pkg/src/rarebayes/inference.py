"""Class posteriors by direct factor multiplication, with degeneracy pruning.

Evidence is incorporated in descending rank order.  A node is skipped
when its value is MISSING, when its parent configuration row carries no
training data (``unseen-config``), or when multiplying its likelihood
would drive some class probability to exactly 1 (``pruned``) -- the
pruned case behaves exactly as if the observation were missing.  The
posterior is renormalized after every accepted node.

Batch scoring over a CSV uses the same arithmetic vectorized per chunk
and matches :func:`posterior` bit for bit.  One batch-only leniency: a
categorical value never seen in training maps to MISSING instead of
raising, since streams routinely grow new outcomes after training.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .dataio import MISSING, CsvDataset, as_dataset
from .errors import ConfigError, EvidenceError
from .structure import Encoder, NetworkModel
from .windows import CaseRecord, node_var_slot, window_expand  # noqa: F401  (re-export)

SKIP_MISSING = "missing"
SKIP_PRUNED = "pruned"
SKIP_UNSEEN = "unseen-config"


@dataclass
class ClassPosterior:
    """Normalized class probabilities plus the skipped-node log."""

    classes: tuple[str, ...]
    probabilities: np.ndarray
    skipped: list[tuple[str, str]]
    order: list[str]

    def prob(self, label: str) -> float:
        return float(self.probabilities[self.classes.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {c: float(p) for c, p in zip(self.classes, self.probabilities)}


def _symbol_code(model: NetworkModel, var: str, symbol: str) -> int:
    try:
        return model.symbol_index[var][symbol]
    except KeyError:
        raise EvidenceError(
            f"value {symbol!r} is not in the alphabet of variable {var!r}"
        ) from None


def symbolize(model: NetworkModel, record: dict[str, str]) -> dict[str, str]:
    """Map a raw record to outcome symbols using the model's alphabets.

    Continuous values are binned by the trained edges; categorical values
    never seen in training become MISSING, mirroring the batch scorer.
    """
    from .outcomes import discretize

    out: dict[str, str] = {}
    for spec in model.schema.field_vars:
        raw = record.get(spec.name, MISSING)
        if spec.kind == "continuous":
            edges = model.outcomes.edges(spec.name) or ()
            try:
                out[spec.name] = discretize(raw, edges)
            except ValueError:
                out[spec.name] = MISSING
        else:
            out[spec.name] = raw if raw in model.symbol_index[spec.name] else MISSING
    return out


def posterior(model: NetworkModel, case: CaseRecord) -> ClassPosterior:
    """Single-case posterior; the reference implementation of the update rule."""
    p = model.prior.copy()
    skipped: list[tuple[str, str]] = []
    order: list[str] = []
    for rf in model.ranked_fields:
        code = _symbol_code(model, rf.var, case.get(rf.node))
        if code == model.missing_code(rf.var):
            skipped.append((rf.node, SKIP_MISSING))
            continue
        parent = model.parents[rf.node]
        cpt = model.cpts[rf.node]
        if parent is None:
            likelihood = cpt.probs[:, code]
            row_unseen = bool(cpt.unseen.any())
        else:
            pvar = node_var_slot(parent)[0]
            pcode = _symbol_code(model, pvar, case.get(parent))
            if pcode == model.missing_code(pvar):
                fb = model.fallbacks[rf.node]
                likelihood = fb.probs[:, code]
                row_unseen = bool(fb.unseen.any())
            else:
                likelihood = cpt.probs[:, pcode, code]
                row_unseen = bool(cpt.unseen[:, pcode].any())
        if row_unseen:
            skipped.append((rf.node, SKIP_UNSEEN))
            continue
        nxt = p * likelihood
        if int(np.count_nonzero(nxt > 0.0)) <= 1:
            skipped.append((rf.node, SKIP_PRUNED))
            continue
        p = nxt / nxt.sum()
        order.append(rf.node)
    return ClassPosterior(
        classes=model.class_symbols, probabilities=p, skipped=skipped, order=order
    )


def _negative_label(model: NetworkModel, positive: str, probs: np.ndarray) -> str:
    rest = [(c, p) for c, p in zip(model.class_symbols, probs) if c != positive]
    return max(rest, key=lambda cp: cp[1])[0]


def classify(
    model: NetworkModel,
    case: CaseRecord,
    threshold: float,
    positive: str | None = None,
) -> tuple[str, ClassPosterior]:
    """Label a case: positive iff P(positive | case) >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    positive = positive or model.rare_class()
    if positive not in model.class_symbols:
        raise ConfigError(f"unknown positive class {positive!r}")
    post = posterior(model, case)
    if post.prob(positive) >= threshold:
        return positive, post
    return _negative_label(model, positive, post.probabilities), post


# -- vectorized batch scoring ----------------------------------------------


@dataclass
class ScoredChunk:
    """Scores for one block of records, ids starting at ``offset``."""

    offset: int
    probabilities: np.ndarray           # (rows, classes)
    skipped: list[list[str]]            # per row, "node:reason" entries
    actuals: list[str] | None           # raw class column when present


def iter_scored(
    model: NetworkModel,
    data: str | Path | CsvDataset,
    *,
    chunk_rows: int = 65536,
) -> Iterator[ScoredChunk]:
    """Score every well-formed record of a CSV in file order.

    The class column is optional here; when present its raw values ride
    along so evaluation can line up with record ids.
    """
    ds = as_dataset(data)
    schema = model.schema
    enc = Encoder(schema, model.outcomes)
    state = enc.window_state()
    wanted = ds.schema_columns(schema, require_class=False)
    k = len(model.class_symbols)
    offset = 0
    for chunk in ds.iter_chunks(wanted, chunk_rows):
        var_codes, class_codes, groups = enc.encode_chunk(chunk)
        cols = dict(var_codes)
        cols.update(state.lag_columns(var_codes, groups))
        n = chunk.size
        p = np.tile(model.prior, (n, 1))
        skipped: list[list[str]] = [[] for _ in range(n)]
        for rf in model.ranked_fields:
            child = cols[rf.node]
            miss = child == model.missing_code(rf.var)
            parent = model.parents[rf.node]
            cpt = model.cpts[rf.node]
            if parent is None:
                likelihood = cpt.probs[:, child].T
                unseen = np.full(n, bool(cpt.unseen.any()))
            else:
                pvar = node_var_slot(parent)[0]
                pcode = cols[parent]
                pmiss = pcode == model.missing_code(pvar)
                likelihood = np.empty((n, k), dtype=np.float64)
                unseen = np.zeros(n, dtype=bool)
                if np.any(~pmiss):
                    sel = ~pmiss
                    likelihood[sel] = cpt.probs[:, pcode[sel], child[sel]].T
                    unseen[sel] = cpt.unseen[:, pcode[sel]].any(axis=0)
                if np.any(pmiss):
                    fb = model.fallbacks[rf.node]
                    likelihood[pmiss] = fb.probs[:, child[pmiss]].T
                    unseen[pmiss] = bool(fb.unseen.any())
            for i in np.nonzero(miss)[0]:
                skipped[i].append(f"{rf.node}:{SKIP_MISSING}")
            unseen &= ~miss
            for i in np.nonzero(unseen)[0]:
                skipped[i].append(f"{rf.node}:{SKIP_UNSEEN}")
            active = np.nonzero(~miss & ~unseen)[0]
            if active.size == 0:
                continue
            cand = p[active] * likelihood[active]
            keep = (cand > 0.0).sum(axis=1) > 1
            for i in active[~keep]:
                skipped[i].append(f"{rf.node}:{SKIP_PRUNED}")
            accepted = active[keep]
            cand = cand[keep]
            p[accepted] = cand / cand.sum(axis=1, keepdims=True)
        actuals = chunk.columns.get(schema.class_var)
        yield ScoredChunk(
            offset=offset, probabilities=p, skipped=skipped, actuals=actuals
        )
        offset += n


def classify_file(
    model: NetworkModel,
    data: str | Path | CsvDataset,
    out_path: str | Path,
    threshold: float,
    positive: str | None = None,
    *,
    chunk_rows: int = 65536,
) -> dict:
    """Score a CSV and write the classification file.

    Output columns: record_id, one ``p_<class>`` per class (full float
    precision), label, skipped_nodes (semicolon-joined ``name:reason``).
    Returns a summary dict with row and label counts.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    positive = positive or model.rare_class()
    if positive not in model.class_symbols:
        raise ConfigError(f"unknown positive class {positive!r}")
    pos_idx = model.class_symbols.index(positive)
    rows = 0
    flagged = 0
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["record_id"]
            + [f"p_{c}" for c in model.class_symbols]
            + ["label", "skipped_nodes"]
        )
        for scored in iter_scored(model, data, chunk_rows=chunk_rows):
            probs = scored.probabilities
            is_pos = probs[:, pos_idx] >= threshold
            for i in range(probs.shape[0]):
                if is_pos[i]:
                    label = positive
                else:
                    label = _negative_label(model, positive, probs[i])
                writer.writerow(
                    [scored.offset + i]
                    + [repr(float(v)) for v in probs[i]]
                    + [label, ";".join(scored.skipped[i])]
                )
            rows += probs.shape[0]
            flagged += int(is_pos.sum())
    return {"rows": rows, "positive": positive, "flagged": flagged,
            "threshold": threshold}


def collect_scores(
    model: NetworkModel,
    data: str | Path | CsvDataset,
    positive: str | None = None,
    *,
    chunk_rows: int = 65536,
) -> tuple[np.ndarray, list[str]]:
    """P(positive) per record plus the actual labels, for threshold sweeps.

    Requires the class column; records whose actual label is missing are
    dropped from both outputs.
    """
    positive = positive or model.rare_class()
    if positive not in model.class_symbols:
        raise ConfigError(f"unknown positive class {positive!r}")
    ds = as_dataset(data)
    ds.require_columns([model.schema.class_var])
    pos_idx = model.class_symbols.index(positive)
    scores: list[np.ndarray] = []
    actuals: list[str] = []
    for scored in iter_scored(model, ds, chunk_rows=chunk_rows):
        assert scored.actuals is not None
        keep = np.array([a != MISSING for a in scored.actuals], dtype=bool)
        scores.append(scored.probabilities[keep, pos_idx])
        actuals.extend(a for a in scored.actuals if a != MISSING)
    if not scores:
        return np.empty(0), []
    return np.concatenate(scores), actuals
