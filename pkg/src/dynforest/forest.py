"""Forest of lazily maintained randomized trees with occupancy subsampling.

Every sample is assigned to exactly k = ceil(occupancy * n_trees) distinct
trees, so each tree trains on roughly an occupancy-fraction of the data and
a deletion touches only the k trees that ever saw the sample.  Combined
with the trees' lazy tag protocol, most deletions reduce to patching path
statistics; subtree rebuilds are deferred until a query actually lands on
a tagged node (or flush() is called).

The forest owns its Dataset: after training, add and delete samples
through the forest so the assignment map and the per-tree statistics stay
in step with the data.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .tree import Telemetry, Tree, TreeParams


def subsample_count(occupancy, n_trees):
    """Trees per sample: ceil(occupancy * n_trees), clamped to [1, n_trees].

    A small tolerance keeps products like 0.3 * 10 from rounding up to 4.
    """
    if not 0.0 < occupancy <= 1.0:
        raise ValueError("occupancy must be in (0, 1], got %r" % (occupancy,))
    k = math.ceil(occupancy * n_trees - 1e-9)
    return min(max(k, 1), n_trees)


@dataclass
class ForestParams:
    n_trees: int = 100
    occupancy: float = 1.0
    seed: int = 0
    tree: TreeParams = field(default_factory=TreeParams)

    def validate(self, d):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        subsample_count(self.occupancy, self.n_trees)  # bounds check
        self.tree.validate(d)


def distribute(ids, n_trees, k, rng):
    """Assign each id to k distinct trees chosen uniformly at random.

    Returns
    -------
    per_tree : list of ndarray
        For each tree, the ids it trains on, in ascending id order.
    assign : ndarray of int32, shape (len(ids), k)
        Sorted tree indices per id.
    """
    ids = np.asarray(ids, dtype=np.int64)
    n = len(ids)
    assign = np.empty((n, k), np.int32)
    chunk = 1 << 15
    for lo in range(0, n, chunk):
        m = min(chunk, n - lo)
        block = np.tile(np.arange(n_trees, dtype=np.int32), (m, 1))
        block = rng.permuted(block, axis=1)[:, :k]
        block.sort(axis=1)
        assign[lo:lo + m] = block
    flat_tree = assign.ravel()
    order = np.argsort(flat_tree, kind="stable")
    sorted_ids = np.repeat(ids, k)[order]
    bounds = np.concatenate(([0], np.bincount(flat_tree, minlength=n_trees).cumsum()))
    per_tree = [sorted_ids[bounds[t]:bounds[t + 1]] for t in range(n_trees)]
    return per_tree, assign


class Forest:
    """Trained forest; construct with Forest.train() or snapshot.load().

    lazy=False rebuilds tagged subtrees immediately after every update,
    giving eager semantics for comparison runs.  workers > 1 fans
    per-tree work (train, flush, batch prediction) across threads;
    results do not depend on the worker count.
    """

    def __init__(self, ds, params, trees, assignment, rng, lazy=True, workers=1):
        self.ds = ds
        self.params = params
        self.trees = trees
        self.assignment = assignment  # live id -> sorted tuple of k tree indices
        self.rng = rng
        self.lazy = lazy
        self.workers = workers
        self.k = subsample_count(params.occupancy, params.n_trees)
        self._pool = None

    # -- construction -----------------------------------------------------

    @classmethod
    def train(cls, ds, params, lazy=True, workers=1):
        """Grow a forest over every live sample in ds."""
        params.validate(ds.n_attrs)
        n_trees = params.n_trees
        seeds = np.random.SeedSequence(params.seed).spawn(n_trees + 1)
        rng = np.random.default_rng(seeds[n_trees])
        k = subsample_count(params.occupancy, n_trees)
        ids = ds.live_ids()
        per_tree, assign = distribute(ids, n_trees, k, rng)
        trees = [Tree(params.tree, ds, np.random.default_rng(seeds[t]))
                 for t in range(n_trees)]
        assignment = {int(i): tuple(map(int, row)) for i, row in zip(ids, assign)}
        forest = cls(ds, params, trees, assignment, rng, lazy=lazy, workers=workers)
        forest._over_trees(lambda pair: pair[0].build(pair[1]),
                           list(zip(trees, per_tree)))
        return forest

    # -- parallel helper ----------------------------------------------------

    def _over_trees(self, fn, trees):
        if self.workers > 1:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(max_workers=self.workers)
            return list(self._pool.map(fn, trees))
        return [fn(t) for t in trees]

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- prediction ---------------------------------------------------------

    @property
    def prior(self):
        """Positive fraction of live training samples (0.5 when empty)."""
        return self.ds.n_pos / self.ds.n_live if self.ds.n_live else 0.5

    def predict(self, x):
        """Probability that x is positive: mean over trees of the reached
        leaf's positive fraction (empty leaves fall back to the prior)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.ds.n_attrs,):
            raise ValueError("expected %d features, got shape %s"
                             % (self.ds.n_attrs, x.shape))
        counts = self._over_trees(lambda t: t.query(x), self.trees)
        prior = self.prior
        return float(np.mean([pos / n if n else prior for n, pos in counts]))

    def predict_many(self, X):
        """Vectorized predict over the rows of X."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.ds.n_attrs:
            raise ValueError("expected (m, %d) matrix, got shape %s"
                             % (self.ds.n_attrs, X.shape))
        results = self._over_trees(lambda t: t.query_many(X), self.trees)
        prior = self.prior
        probs = np.empty((len(self.trees), len(X)))
        for t, (n, pos) in enumerate(results):
            with np.errstate(invalid="ignore"):
                probs[t] = np.where(n > 0, pos / np.maximum(n, 1), prior)
        return probs.mean(axis=0)

    # -- updates ------------------------------------------------------------

    def add(self, features, label):
        """Add a sample to the dataset and to k freshly drawn trees.

        Returns the new sample id.
        """
        sample_id = self.ds.add(features, label)
        chosen = np.sort(self.rng.choice(self.params.n_trees, size=self.k,
                                         replace=False))
        self.assignment[sample_id] = tuple(int(t) for t in chosen)
        for t in chosen:
            tagged = self.trees[t].add(sample_id)
            if tagged is not None and not self.lazy:
                self.trees[t].rebuild_node(tagged)
        return sample_id

    def delete(self, sample_id):
        """Remove a live sample from its k trees and tombstone it.

        Raises KeyError for unknown or already-deleted ids.
        """
        sample_id = int(sample_id)
        if not self.ds.is_live(sample_id):
            raise KeyError("sample id %d is not live" % sample_id)
        for t in self.assignment[sample_id]:
            tagged = self.trees[t].delete(sample_id)
            if tagged is not None and not self.lazy:
                self.trees[t].rebuild_node(tagged)
        del self.assignment[sample_id]
        self.ds.tombstone(sample_id)

    def unlearn_batch(self, ids, finalize=False):
        """Delete many samples in one grouped pass per tree; optionally
        flush tagged subtrees afterwards.

        Each tree removes its share of the batch in a single traversal,
        so per-node grid updates amortize across the batch (a singleton
        batch behaves bit-for-bit like delete()).  The id list is
        validated up front: one unknown, dead, or repeated id rejects the
        whole batch before anything is deleted.
        """
        ids = [int(i) for i in ids]
        seen = set()
        for sample_id in ids:
            if not self.ds.is_live(sample_id):
                raise KeyError("batch rejected: sample id %d is not live" % sample_id)
            if sample_id in seen:
                raise KeyError("batch rejected: sample id %d repeated" % sample_id)
            seen.add(sample_id)
        groups = [[] for _ in self.trees]
        for sample_id in ids:
            for t in self.assignment[sample_id]:
                groups[t].append(sample_id)
        for t, group in enumerate(groups):
            if not group:
                continue
            tagged = [] if not self.lazy else None
            self.trees[t].delete_group(np.asarray(group, np.int64), tagged)
            if tagged:
                for node in tagged:
                    self.trees[t].rebuild_node(node)
        for sample_id in ids:
            del self.assignment[sample_id]
            self.ds.tombstone(sample_id)
        if finalize:
            self.flush()

    def flush(self):
        """Rebuild every tagged subtree in every tree."""
        self._over_trees(lambda t: t.flush(), self.trees)

    # -- introspection --------------------------------------------------------

    def tagged_count(self):
        return sum(t.n_tagged for t in self.trees)

    def telemetry(self):
        """Sum of all per-tree work counters."""
        total = Telemetry()
        for t in self.trees:
            total.nodes_updated += t.telemetry.nodes_updated
            total.subtree_samples_rebuilt += t.telemetry.subtree_samples_rebuilt
            total.range_resample_samples += t.telemetry.range_resample_samples
            total.attrs_resampled += t.telemetry.attrs_resampled
        return total

    def reset_telemetry(self):
        for t in self.trees:
            t.telemetry.reset()
