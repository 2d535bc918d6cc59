#!/usr/bin/env python3
"""Train a forest on synthetic tabular data, score it, snapshot it, load it back.

Run from the repository root:  python3 demos/01_train_and_eval.py
"""

import tempfile
from pathlib import Path

from dynforest import Forest, ForestParams, TreeParams, evaluate, load, save
from dynforest.synth import make_dataset

# 8000 rows, 12 attributes; labels follow axis-aligned boxes plus 10% noise
ds = make_dataset(8000, d=12, seed=42)
test = make_dataset(2000, d=12, seed=43)  # same distribution, fresh draw

params = ForestParams(
    n_trees=40,
    occupancy=0.5,           # each sample lands in ceil(0.5 * 40) = 20 trees
    seed=7,
    tree=TreeParams(max_depth=12, n_thresholds=12, min_split_size=10),
)

forest = Forest.train(ds, params)
print("trained %d trees, %d trees per sample" % (params.n_trees, forest.k))

result = evaluate(forest, test)
print("test rows:          %d" % result["n"])
print("positive rate:      %.3f" % result["positive_rate"])
print("accuracy:           %.4f" % result["accuracy"])
print("auc:                %.4f" % result["auc"])
print("headline metric:    %s = %.4f" % (result["headline"], result["headline_value"]))

# snapshots are byte-deterministic: same state in, same bytes out
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.bin"
    save(forest, path)
    print("snapshot size:      %d bytes" % path.stat().st_size)
    back = load(path)
    again = evaluate(back, test)
    print("loaded copy scores: %.4f (identical: %s)"
          % (again["accuracy"], again["accuracy"] == result["accuracy"]))
