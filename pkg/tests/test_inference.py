import csv

import numpy as np
import pytest

from rarebayes import (
    EvidenceError,
    ConfigError,
    MISSING,
    classify,
    classify_file,
    parse_schema,
    posterior,
    symbolize,
    train,
    window_expand,
)
from rarebayes.dataio import CsvDataset, PassStats
from rarebayes.inference import iter_scored
from rarebayes.outcomes import OutcomeTable, VariableOutcomes
from rarebayes.structure import CPT, NetworkModel, RankedField
from rarebayes.windows import CaseRecord


def toy_model(tables, prior=(0.1, 0.9), classes=("bad", "good"), parents=None,
              fallback_tables=None, unseen=None):
    """Hand-built binary model; tables[var] has shape (2, alphabet)."""
    variables = {}
    cpts = {}
    fallbacks = {}
    ranked = []
    parents = parents or {}
    for i, (var, rows) in enumerate(tables.items()):
        rows = np.asarray(rows, dtype=np.float64)
        symbols = tuple(str(s) for s in range(rows.shape[-1] - 1)) + (MISSING,)
        variables[var] = VariableOutcomes(symbols=symbols)
        flags = np.asarray(
            unseen.get(var) if unseen and var in unseen
            else np.zeros(rows.shape[:-1], dtype=bool)
        )
        cpts[var] = CPT(child=var, parent=parents.get(var), probs=rows, unseen=flags)
        fb_rows = np.asarray(
            (fallback_tables or {}).get(var, rows if rows.ndim == 2 else rows.mean(axis=1)),
            dtype=np.float64,
        )
        fallbacks[var] = CPT(
            child=var, parent=None, probs=fb_rows,
            unseen=np.zeros(fb_rows.shape[:-1], dtype=bool),
        )
        ranked.append(RankedField(node=var, var=var, slot=0, mi=1.0 - 0.1 * i))
    schema = parse_schema(
        "class y\n" + "".join(f"var {v} categorical\n" for v in tables)
    )
    return NetworkModel(
        schema=schema,
        seed=0,
        class_symbols=classes,
        prior=np.asarray(prior, dtype=np.float64),
        outcomes=OutcomeTable(class_var="y", class_symbols=classes, variables=variables),
        ranked_fields=ranked,
        parents={var: parents.get(var) for var in tables},
        cpts=cpts,
        fallbacks=fallbacks,
        pass_stats=PassStats(passes=4),
    )


# P(x=1|good)=0.2, P(x=1|bad)=0.8 over symbols ("0","1",MISSING)
X_TABLE = [[0.2, 0.8, 0.0], [0.8, 0.2, 0.0]]
# P(y*=1|good)=0.0, P(y*=1|bad)=0.5: observing y*=1 forces P(bad)=1
DEGENERATE_TABLE = [[0.5, 0.5, 0.0], [1.0, 0.0, 0.0]]


class TestPosterior:
    def test_all_missing_returns_prior_exactly(self):
        model = toy_model({"x": X_TABLE})
        post = posterior(model, CaseRecord(values={}))
        assert post.probabilities.tolist() == [0.1, 0.9]
        assert post.skipped == [("x", "missing")]
        assert post.order == []

    def test_hand_bayes_single_field(self):
        model = toy_model({"x": X_TABLE})
        post = posterior(model, CaseRecord(values={"x": "1"}))
        assert post.prob("bad") == pytest.approx(0.08 / 0.26, abs=1e-12)
        assert post.prob("bad") == pytest.approx(0.307692, abs=1e-6)

    def test_degenerate_node_pruned(self):
        model = toy_model({"x": X_TABLE, "z": DEGENERATE_TABLE})
        post = posterior(model, CaseRecord(values={"x": "1", "z": "1"}))
        assert post.prob("bad") == pytest.approx(0.08 / 0.26, abs=1e-12)
        assert ("z", "pruned") in post.skipped
        assert post.order == ["x"]

    def test_pruned_equals_missing(self):
        model = toy_model({"x": X_TABLE, "z": DEGENERATE_TABLE})
        pruned = posterior(model, CaseRecord(values={"x": "1", "z": "1"}))
        missing = posterior(model, CaseRecord(values={"x": "1", "z": MISSING}))
        assert pruned.probabilities.tolist() == missing.probabilities.tolist()

    def test_posterior_sums_to_one(self):
        model = toy_model({"x": X_TABLE, "z": DEGENERATE_TABLE})
        for case in ({"x": "0"}, {"x": "1", "z": "0"}, {"z": "1"}):
            post = posterior(model, CaseRecord(values=case))
            assert post.probabilities.sum() == pytest.approx(1.0, abs=1e-9)

    def test_unknown_symbol_names_variable(self):
        model = toy_model({"x": X_TABLE})
        with pytest.raises(EvidenceError, match="'x'"):
            posterior(model, CaseRecord(values={"x": "purple"}))

    def test_unseen_config_skipped(self):
        model = toy_model({"x": X_TABLE}, unseen={"x": [False, True]})
        post = posterior(model, CaseRecord(values={"x": "1"}))
        assert post.skipped == [("x", "unseen-config")]
        assert post.probabilities.tolist() == [0.1, 0.9]

    def test_incorporation_follows_rank_not_case_layout(self):
        model = toy_model({"x": X_TABLE, "w": [[0.3, 0.7, 0.0], [0.6, 0.4, 0.0]]})
        a = posterior(model, CaseRecord(values={"x": "1", "w": "0"}))
        b = posterior(model, CaseRecord(values={"w": "0", "x": "1"}))
        assert a.probabilities.tolist() == b.probabilities.tolist()
        assert a.order == b.order == ["x", "w"]

    def test_fallback_used_when_parent_missing(self):
        parent_table = np.asarray([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
        # child CPT: (class, parent outcome, child outcome)
        child_cpt = np.zeros((2, 3, 3))
        child_cpt[:, 0] = [0.9, 0.1, 0.0]
        child_cpt[:, 1] = [0.1, 0.9, 0.0]
        child_cpt[:, 2] = [0.5, 0.5, 0.0]
        child_fb = [[0.3, 0.7, 0.0], [0.7, 0.3, 0.0]]
        model = toy_model(
            {"p": parent_table, "c": child_cpt},
            parents={"c": "p"},
            fallback_tables={"c": child_fb},
        )
        post = posterior(model, CaseRecord(values={"p": MISSING, "c": "1"}))
        # parent missing: prior odds times the fallback column for c=1
        expect_bad = 0.1 * 0.7 / (0.1 * 0.7 + 0.9 * 0.3)
        assert post.prob("bad") == pytest.approx(expect_bad, abs=1e-12)
        assert ("p", "missing") in post.skipped

    def test_parent_value_feeds_child_cpt(self):
        parent_table = np.asarray([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
        child_cpt = np.zeros((2, 3, 3))
        child_cpt[0, 0] = [0.2, 0.8, 0.0]   # bad, p=0
        child_cpt[1, 0] = [0.8, 0.2, 0.0]   # good, p=0
        child_cpt[0, 1] = [0.6, 0.4, 0.0]
        child_cpt[1, 1] = [0.4, 0.6, 0.0]
        child_cpt[:, 2] = [0.5, 0.5, 0.0]
        model = toy_model(
            {"p": parent_table, "c": child_cpt}, parents={"c": "p"}
        )
        post = posterior(model, CaseRecord(values={"p": "0", "c": "1"}))
        # parent is uninformative; child likelihood (0.8, 0.2) as in hand Bayes
        assert post.prob("bad") == pytest.approx(0.08 / 0.26, abs=1e-12)


class TestClassify:
    def test_threshold_rules(self):
        model = toy_model({"x": X_TABLE}, prior=(0.51, 0.49))
        label, post = classify(model, CaseRecord(values={}), 0.5, positive="bad")
        assert post.prob("bad") == pytest.approx(0.51)
        assert label == "bad"                      # 0.51 >= 0.5
        label, _ = classify(model, CaseRecord(values={}), 0.7, positive="bad")
        assert label == "good"                     # 0.51 < 0.7
        model70 = toy_model({"x": X_TABLE}, prior=(0.70, 0.30))
        label, _ = classify(model70, CaseRecord(values={}), 0.7, positive="bad")
        assert label == "bad"                      # boundary inclusive

    def test_positive_defaults_to_rare_class(self):
        model = toy_model({"x": X_TABLE})
        label, _ = classify(model, CaseRecord(values={}), 0.05)
        assert label == "bad"

    def test_unknown_positive_class(self):
        model = toy_model({"x": X_TABLE})
        with pytest.raises(ConfigError, match="positive"):
            classify(model, CaseRecord(values={}), 0.5, positive="fraudulent")

    def test_threshold_range_checked(self):
        model = toy_model({"x": X_TABLE})
        with pytest.raises(ConfigError):
            classify(model, CaseRecord(values={}), 1.5)


class TestWindowExpand:
    SCHEMA = parse_schema("class y\ngroup g\nvar a categorical\nwindow 2\n")

    def test_window_one_is_identity(self):
        schema = parse_schema("class y\nvar a categorical\n")
        records = [{"y": "g", "a": "1"}, {"y": "b", "a": "2"}]
        cases = list(window_expand(records, schema))
        assert [c.values for c in cases] == [{"a": "1"}, {"a": "2"}]
        assert [c.label for c in cases] == ["g", "b"]

    def test_three_record_group_padding(self):
        records = [
            {"g": "c1", "y": "g", "a": "r1"},
            {"g": "c1", "y": "g", "a": "r2"},
            {"g": "c1", "y": "b", "a": "r3"},
        ]
        cases = list(window_expand(records, self.SCHEMA))
        assert [c.values for c in cases] == [
            {"a": "r1", "a@1": MISSING},
            {"a": "r2", "a@1": "r1"},
            {"a": "r3", "a@1": "r2"},
        ]

    def test_no_cross_group_leakage(self):
        records = [
            {"g": "c1", "y": "g", "a": "r1"},
            {"g": "c2", "y": "g", "a": "r2"},
        ]
        cases = list(window_expand(records, self.SCHEMA))
        assert cases[1].values["a@1"] == MISSING

    def test_interleaved_groups_use_group_predecessor(self):
        records = [
            {"g": "c1", "y": "g", "a": "r1"},
            {"g": "c2", "y": "g", "a": "s1"},
            {"g": "c1", "y": "g", "a": "r2"},
        ]
        cases = list(window_expand(records, self.SCHEMA))
        assert cases[2].values["a@1"] == "r1"

    def test_missing_class_label_is_none(self):
        schema = parse_schema("class y\nvar a categorical\n")
        cases = list(window_expand([{"y": "?", "a": "1"}], schema))
        assert cases[0].label is None


class TestBatchEquivalence:
    """The vectorized scorer must match the single-case path bit for bit."""

    def test_batch_matches_single_case(self, messy_bundle, messy_model):
        model = messy_model
        schema = messy_bundle.schema
        batch = np.vstack(
            [s.probabilities for s in iter_scored(model, messy_bundle.data_path)]
        )
        with open(messy_bundle.data_path, newline="", encoding="utf-8") as fh:
            records = [
                {**symbolize(model, row), schema.class_var: row[schema.class_var],
                 **({schema.group_key: row[schema.group_key]} if schema.group_key else {})}
                for row in csv.DictReader(fh)
            ]
        cases = list(window_expand(records, schema))
        for i in range(0, len(cases), 37):
            single = posterior(model, cases[i])
            assert np.array_equal(batch[i], single.probabilities), f"row {i}"

    def test_batch_matches_single_case_windowed(self, tmp_path):
        rng = np.random.default_rng(5)
        lines = ["cust,y,a,v"]
        for g in range(120):
            for _ in range(rng.integers(1, 4)):
                bad = rng.random() < 0.25
                a = "a1" if rng.random() < (0.8 if bad else 0.3) else "a0"
                v = rng.normal(1.0 if bad else 0.0, 1.0)
                miss = rng.random() < 0.15
                lines.append(
                    f"g{g:03d},{'bad' if bad else 'good'},"
                    f"{'?' if miss else a},{v:.4f}"
                )
        path = tmp_path / "w.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        schema = parse_schema(
            "class y\ngroup cust\nvar a categorical\nvar v continuous\n"
            "window 2\nt_prime 1.0\n"
        )
        model = train(schema, CsvDataset(path))
        batch = np.vstack([s.probabilities for s in iter_scored(model, path)])
        with open(path, newline="", encoding="utf-8") as fh:
            records = [
                {**symbolize(model, row), "y": row["y"], "cust": row["cust"]}
                for row in csv.DictReader(fh)
            ]
        cases = list(window_expand(records, schema))
        assert len(cases) == batch.shape[0]
        for i in range(len(cases)):
            single = posterior(model, cases[i])
            assert np.array_equal(batch[i], single.probabilities), f"row {i}"


class TestClassifyFile:
    def test_output_format_and_ids(self, messy_bundle, messy_model, tmp_path):
        out = tmp_path / "pred.csv"
        summary = classify_file(messy_model, messy_bundle.data_path, out, 0.5)
        with open(out, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            assert reader.fieldnames == [
                "record_id", "p_bad", "p_good", "label", "skipped_nodes"
            ]
            rows = list(reader)
        assert len(rows) == summary["rows"]
        assert [int(r["record_id"]) for r in rows[:5]] == [0, 1, 2, 3, 4]
        for row in rows[:200]:
            total = float(row["p_bad"]) + float(row["p_good"])
            assert total == pytest.approx(1.0, abs=1e-9)
            assert row["label"] in ("bad", "good")
            for entry in filter(None, row["skipped_nodes"].split(";")):
                node, reason = entry.split(":")
                assert reason in ("missing", "pruned", "unseen-config")

    def test_unknown_scoring_value_treated_as_missing(self, tmp_path):
        rng = np.random.default_rng(8)
        lines = ["y,a,b"]
        for _ in range(120):
            bad = rng.random() < 0.3
            a = "a1" if rng.random() < (0.9 if bad else 0.2) else "a0"
            b = "b1" if rng.random() < (0.7 if bad else 0.3) else "b0"
            lines.append(f"{'bad' if bad else 'good'},{a},{b}")
        path = tmp_path / "t.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        schema = parse_schema("class y\nvar a categorical\nvar b categorical\nt_prime 1.0\n")
        model = train(schema, CsvDataset(path))
        assert {rf.node for rf in model.ranked_fields} == {"a", "b"}
        novel = tmp_path / "novel.csv"
        novel.write_text("y,a,b\ngood,NEW_VALUE,b0\n", encoding="utf-8")
        out = tmp_path / "out.csv"
        classify_file(model, novel, out, 0.5)
        row = list(csv.DictReader(open(out, newline="", encoding="utf-8")))[0]
        assert "a:missing" in row["skipped_nodes"]
