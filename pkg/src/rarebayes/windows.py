"""Moving-window case construction.

With window size w, each record becomes a case over w slots: slot 0 is
the record itself and slot s is its s-th predecessor within the same
group.  Predecessors past a group boundary (or the start of the data)
are MISSING.  The class label always comes from the current record.

A slot-0 node keeps the bare variable name; a lagged node is named
``<var>@<s>``.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .dataio import MISSING
from .schema import Schema


def node_id(var: str, slot: int) -> str:
    return var if slot == 0 else f"{var}@{slot}"


def node_var_slot(node: str) -> tuple[str, int]:
    if "@" in node:
        var, slot = node.rsplit("@", 1)
        return var, int(slot)
    return node, 0


def node_order(schema: Schema) -> list[tuple[str, int]]:
    """Candidate (var, slot) pairs in declaration order, slot-major."""
    return [
        (v.name, slot)
        for slot in range(schema.window)
        for v in schema.field_vars
    ]


@dataclass
class CaseRecord:
    """One classification case: node id -> outcome symbol (absent = MISSING)."""

    values: dict[str, str]
    label: str | None = None
    record_id: int | None = None
    group: str | None = None

    def get(self, node: str) -> str:
        return self.values.get(node, MISSING)


def window_expand(
    records: Iterable[dict[str, str]], schema: Schema
) -> Iterator[CaseRecord]:
    """Expand records (in file order) into window cases, one per record.

    ``records`` must be sorted in temporal order within each group key.
    Produces node values for every (field variable, slot) pair; slots
    that reach past the group start are MISSING.
    """
    w = schema.window
    names = [v.name for v in schema.field_vars]
    history: dict[str, deque] = defaultdict(lambda: deque(maxlen=max(w - 1, 1)))
    for rid, record in enumerate(records):
        group = record.get(schema.group_key, "") if schema.group_key else ""
        values = {name: record.get(name, MISSING) for name in names}
        past = history[group] if w > 1 else None
        if past is not None:
            for s, prev in enumerate(reversed(past), start=1):
                for name in names:
                    values[node_id(name, s)] = prev[name]
            for s in range(len(past) + 1, w):
                for name in names:
                    values[node_id(name, s)] = MISSING
            past.append({name: values[name] for name in names})
        label = record.get(schema.class_var)
        if label == MISSING:
            label = None
        yield CaseRecord(
            values=values,
            label=label,
            record_id=rid,
            group=group if schema.group_key else None,
        )


@dataclass
class WindowState:
    """Chunk-friendly lag tracker for the vectorized pipelines.

    Keeps, per group, the integer codes of the last w-1 rows so lagged
    node columns can be built across chunk boundaries.  Matches
    :func:`window_expand` record for record.
    """

    schema: Schema
    var_names: list[str]
    missing_codes: dict[str, int]
    _history: dict[str, deque] = field(default_factory=dict)

    def lag_columns(
        self, var_codes: dict[str, np.ndarray], groups: list[str] | None
    ) -> dict[str, np.ndarray]:
        """Return code columns for every lagged node of this chunk."""
        w = self.schema.window
        if w == 1:
            return {}
        n = len(next(iter(var_codes.values())))
        if groups is None:
            groups = [""] * n
        out = {
            node_id(name, s): np.full(n, self.missing_codes[name], dtype=np.int64)
            for name in self.var_names
            for s in range(1, w)
        }
        hist = self._history
        names = self.var_names
        cols = [var_codes[name] for name in names]
        for i in range(n):
            past = hist.get(groups[i])
            if past is None:
                past = deque(maxlen=w - 1)
                hist[groups[i]] = past
            for s, prev in enumerate(reversed(past), start=1):
                for j, name in enumerate(names):
                    out[node_id(name, s)][i] = prev[j]
            past.append(tuple(int(col[i]) for col in cols))
        return out
