#!/usr/bin/env python3
"""Watch the lazy protocol work: tags accumulate, queries pay as they go.

A mutation that invalidates a node's chosen split does not rebuild the
subtree.  It tags the node and throws the subtree away; the next query
that routes through it regrows exactly one level and pushes the tags
down.  flush() settles everything at once.

Run from the repository root:  python3 demos/03_lazy_rebuilds.py
"""

import numpy as np

from dynforest import Forest, ForestParams, TreeParams
from dynforest.synth import make_dataset

ds = make_dataset(10000, d=10, seed=2)
params = ForestParams(n_trees=20, occupancy=0.5, seed=3,
                      tree=TreeParams(max_depth=12, n_thresholds=10))
forest = Forest.train(ds, params)
forest.reset_telemetry()

rng = np.random.default_rng(4)
for sid in rng.choice(ds.live_ids(), 500, replace=False):
    forest.delete(int(sid))

t = forest.telemetry()
print("after 500 lazy deletes:")
print("  tagged subtrees pending: %d" % forest.tagged_count())
print("  path nodes patched:      %d" % t.nodes_updated)
print("  threshold slots redrawn: %d (boundary values removed)" % t.attrs_resampled)
print("  samples rebuilt so far:  %d" % t.subtree_samples_rebuilt)

# a single prediction only materializes the tagged nodes on its own paths,
# one per tree; untagging a node tags its two fresh children, so the tag
# COUNT can rise even though the pending work shrinks
forest.reset_telemetry()
before = forest.tagged_count()
forest.predict(ds.X[123])
t = forest.telemetry()
print("one query across %d trees: materialized %d samples, tags %d -> %d"
      % (len(forest.trees), t.subtree_samples_rebuilt, before,
         forest.tagged_count()))

# flush settles the rest; afterwards queries are pure reads
forest.reset_telemetry()
forest.flush()
t = forest.telemetry()
print("flush: rebuilt %d samples across %d trees, tags now %d"
      % (t.subtree_samples_rebuilt, params.n_trees, forest.tagged_count()))

forest.reset_telemetry()
forest.predict(ds.X[123])
print("query on settled forest: %d samples rebuilt"
      % forest.telemetry().subtree_samples_rebuilt)
