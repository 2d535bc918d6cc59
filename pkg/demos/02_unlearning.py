#!/usr/bin/env python3
"""Delete training samples from a live forest and compare with retraining.

The point of the update protocol: after deleting a sample, the forest is
distributed exactly as if it had been trained without that sample.  At
small scale the two models' accuracies track each other closely, while
the delete path costs milliseconds instead of a full retrain.

Run from the repository root:  python3 demos/02_unlearning.py
"""

import time

import numpy as np

from dynforest import Forest, ForestParams, TreeParams
from dynforest.data import dataset_from_arrays
from dynforest.metrics import accuracy
from dynforest.oracle import naive_retrain
from dynforest.synth import make_arrays

X, y = make_arrays(20000, d=15, seed=1)
X_train, y_train = X[:16000], y[:16000]
X_test, y_test = X[16000:], y[16000:]

ds = dataset_from_arrays(X_train, y_train)
params = ForestParams(n_trees=30, occupancy=0.4, seed=5,
                      tree=TreeParams(max_depth=12, n_thresholds=10))

start = time.perf_counter()
forest = Forest.train(ds, params)
train_s = time.perf_counter() - start
print("initial train: %.2fs" % train_s)


def score(f):
    return accuracy(y_test, f.predict_many(X_test) >= 0.5)


print("accuracy before removals: %.4f" % score(forest))

# remove 800 samples (5%) in one grouped batch, then flush pending rebuilds
victims = [int(i) for i in np.random.default_rng(9).choice(16000, 800, replace=False)]
start = time.perf_counter()
forest.unlearn_batch(victims, finalize=True)
batch_s = time.perf_counter() - start
print("unlearned %d samples in %.2fs (one grouped pass per tree, then flush)"
      % (len(victims), batch_s))

# the from-scratch baseline over the same 15200 surviving samples
start = time.perf_counter()
fresh = naive_retrain(ds, params)
retrain_s = time.perf_counter() - start

print("accuracy after unlearning: %.4f" % score(forest))
print("accuracy after retraining: %.4f  (%.2fs)" % (score(fresh), retrain_s))

# per-deletion latency, one sample at a time with eager rebuilds
forest.lazy = False
singles = [int(i) for i in forest.ds.live_ids()[:50]]
start = time.perf_counter()
for sid in singles:
    forest.delete(sid)
per_op = (time.perf_counter() - start) / len(singles)
print("sequential deletes: %.2fms each (train was %.0fx that)"
      % (per_op * 1e3, train_s / per_op))
