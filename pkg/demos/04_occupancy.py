#!/usr/bin/env python3
"""How the occupancy knob q trades training cost against accuracy.

Each sample lands in exactly ceil(q * T) of the T trees, so training
touches a 1/q fraction of the usual work and a deletion touches only
ceil(q * T) trees.  Accuracy degrades slowly as q shrinks; the default
presets use q in [0.1, 0.5].

Run from the repository root:  python3 demos/04_occupancy.py
"""

import time

from dynforest import Forest, ForestParams, TreeParams, subsample_count
from dynforest.metrics import accuracy
from dynforest.synth import make_arrays
from dynforest.data import dataset_from_arrays

X, y = make_arrays(30000, d=15, seed=8)
X_train, y_train = X[:24000], y[:24000]
X_test, y_test = X[24000:], y[24000:]

T = 30
print("T = %d trees, n = %d samples" % (T, len(X_train)))
print()
print("    q   trees/sample   train_s   accuracy")

for q in (1.0, 0.5, 0.2, 0.1):
    ds = dataset_from_arrays(X_train, y_train)
    params = ForestParams(n_trees=T, occupancy=q, seed=6,
                          tree=TreeParams(max_depth=12, n_thresholds=10))
    start = time.perf_counter()
    forest = Forest.train(ds, params)
    seconds = time.perf_counter() - start
    acc = accuracy(y_test, forest.predict_many(X_test) >= 0.5)
    print("  %4.2f   %12d   %7.2f   %8.4f"
          % (q, subsample_count(q, T), seconds, acc))
