#!/usr/bin/env python3
"""Serve a mixed add/delete/query request stream and read the latency log.

Two streams over copies of the same model: one modification-heavy, one
almost read-only.  With lazy rebuilds, queries behind many modifications
pay for materialization; queries on a quiet stream stay cheap.

Run from the repository root:  python3 demos/05_stream_replay.py
"""

import tempfile
from pathlib import Path

from dynforest import Forest, ForestParams, TreeParams, load, save
from dynforest.stream import generate_stream, replay, summarize
from dynforest.synth import make_dataset

ds = make_dataset(20000, d=10, seed=11)
params = ForestParams(n_trees=30, occupancy=0.3, seed=12,
                      tree=TreeParams(max_depth=12, n_thresholds=10))
forest = Forest.train(ds, params)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.bin"
    save(forest, path)

    for label, share in (("modification-heavy (50%)", 0.5),
                         ("nearly read-only   (1%)", 0.01)):
        copy = load(path)
        lines = generate_stream(copy.ds, 1500, mod_share=share, seed=13)
        records = replay(copy, lines)
        stats = summarize(records)
        print(label)
        for op in ("add", "delete", "query"):
            if op not in stats:
                continue
            row = stats[op]
            print("  %-6s count %4d  failed %d  mean %8.1fus  max %9.1fus"
                  % (op, row["count"], row["failed"], row["mean_us"], row["max_us"]))
        print()
