#!/usr/bin/env python3
"""Training and scoring throughput on a wide synthetic file.

The four-pass trainer must stay comfortably inside batch windows even on
large inputs; this script reports wall time per stage so regressions are
visible.

Usage:
    python scripts/benchmark_throughput.py --rows 1000000 --out /tmp/bench
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rarebayes import parse_schema, train
from rarebayes.dataio import CsvDataset
from rarebayes.inference import classify_file
from rarebayes.synthgen import (
    CategoricalSpec,
    ContinuousSpec,
    DependentSpec,
    GenConfig,
    NoiseSpec,
    generate,
)


def bench_config(rows: int, seed: int) -> GenConfig:
    def flip(p):
        return {"good": (1 - p, p), "bad": (p, 1 - p)}

    cats = tuple(
        CategoricalSpec(f"c{i}", ("x", "y"), flip(0.25 + 0.03 * i),
                        missing_rate=0.02 if i % 3 == 0 else 0.0)
        for i in range(6)
    ) + (
        CategoricalSpec("c6", ("r", "s", "t"),
                        {"good": (0.5, 0.3, 0.2), "bad": (0.2, 0.3, 0.5)}),
        CategoricalSpec("c7", ("k", "l", "m", "n"),
                        {"good": (0.4, 0.3, 0.2, 0.1), "bad": (0.1, 0.2, 0.3, 0.4)}),
    )
    conts = tuple(
        ContinuousSpec(f"y{i}", {"good": 0.0, "bad": 0.5 + 0.1 * i},
                       {"good": 1.0, "bad": 1.0},
                       missing_rate=0.02 if i == 0 else 0.0)
        for i in range(4)
    )
    deps = (
        DependentSpec("d0", "c0", ("p", "q"),
                      {c: {"x": (0.8, 0.2), "y": (0.2, 0.8)} for c in ("good", "bad")}),
        DependentSpec("d1", "c6", ("p", "q"),
                      {c: {"r": (0.9, 0.1), "s": (0.5, 0.5), "t": (0.15, 0.85)}
                       for c in ("good", "bad")}),
    )
    noise = (
        NoiseSpec("z0", outcomes=("u", "v"), dist=(0.6, 0.4)),
        NoiseSpec("z1", outcomes=tuple(f"o{i}" for i in range(30)),
                  dist=tuple([1 / 30.0] * 30)),
        NoiseSpec("z2", outcomes=("a", "b", "c"), dist=(0.5, 0.3, 0.2),
                  missing_rate=0.05),
        NoiseSpec("z3", mean=0.0, sd=1.0),
        NoiseSpec("z4", mean=10.0, sd=3.0),
        NoiseSpec("z5", mean=-5.0, sd=0.5),
    )
    return GenConfig(n=rows, seed=seed, categorical=cats, continuous=conts,
                     dependent=deps, noise=noise)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=1_000_000)
    ap.add_argument("--out", type=Path, default=Path("bench_out"))
    ap.add_argument("--seed", type=int, default=404)
    args = ap.parse_args()

    t0 = time.perf_counter()
    fixture = generate(bench_config(args.rows, args.seed), args.out)
    t_gen = time.perf_counter() - t0
    size_mb = fixture.data_path.stat().st_size / 1e6
    print(f"generate: {t_gen:6.1f}s  ({args.rows} rows, {size_mb:.0f} MB)")

    schema = parse_schema(fixture.schema_path.read_text(encoding="utf-8"))
    ds = CsvDataset(fixture.data_path)
    t0 = time.perf_counter()
    model = train(schema, ds, seed=11)
    t_train = time.perf_counter() - t0
    rate = args.rows * 4 / t_train
    print(f"train:    {t_train:6.1f}s  (4 passes, {rate / 1e6:.2f}M row-reads/s, "
          f"{len(model.ranked_fields)} fields selected)")

    t0 = time.perf_counter()
    summary = classify_file(model, fixture.data_path, args.out / "pred.csv", 0.5)
    t_cls = time.perf_counter() - t0
    print(f"classify: {t_cls:6.1f}s  ({summary['rows'] / t_cls / 1e3:.0f}k rows/s, "
          f"{summary['flagged']} flagged)")
    print(f"total train+classify: {t_train + t_cls:.1f}s")


if __name__ == "__main__":
    main()
