"""Single extremely randomized tree with cached split statistics and a
lazy rebuild protocol for additions and deletions.

Structure
---------
Every node keeps the ids of the training samples it covers along with
aggregate counts (n, n_pos).  A splittable node additionally caches, for
each of p candidate attributes, s sorted candidate thresholds together
with the number of covered samples (b) and covered positives (c) at or
below each threshold, plus the resulting criterion scores.  The chosen
split is the first grid cell attaining the minimum score, scanning slots
in draw order and thresholds in ascending order.

Updates
-------
Additions and deletions walk the root-to-leaf path, patching ids, counts
and the cached grids in O(s) per slot.  A node whose recorded value range
for some slot is invalidated (a boundary value deleted, an outside value
added) redraws that slot's thresholds uniformly over the new range and
recounts them; this is what keeps the updated tree distributionally
identical to one retrained from scratch.  When the winning grid cell
moves, the node is *tagged*: its subtree is discarded but nothing is
rebuilt yet.

Tagged nodes still receive id and count updates.  A query reaching a
tagged node materializes exactly one fresh level (redrawing attributes
and thresholds), untags it, tags the new children, and walks on.  flush()
rebuilds every tagged subtree eagerly.

Randomness at a node is consumed in a fixed order: one attribute-subset
draw, then one batch of s threshold draws per slot in slot order; range
resampling consumes one batch of s draws per affected slot, in slot
order.  Children are built left before right.  A Tree is not safe for
concurrent use; parallelism belongs one level up, across trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import criterion as crit
from .audit import AuditReport


@dataclass
class TreeParams:
    """Growth parameters shared by every tree in a forest.

    n_attrs=None resolves to ceil(sqrt(d)) at build time.  A node becomes
    a leaf when it reaches max_depth, holds fewer than min_split_size
    samples, is label-pure, or every drawn attribute is constant across
    its samples.
    """

    max_depth: int = 20
    n_thresholds: int = 30
    n_attrs: int | None = None
    min_split_size: int = 10
    criterion: str = "gini"

    def validate(self, d):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.n_thresholds < 1:
            raise ValueError("n_thresholds must be >= 1")
        if self.min_split_size < 2:
            raise ValueError("min_split_size must be >= 2")
        if self.criterion not in crit.CRITERIA:
            raise ValueError("unknown criterion %r" % (self.criterion,))
        if self.n_attrs is not None and not 1 <= self.n_attrs <= d:
            raise ValueError("n_attrs must be in [1, %d], got %r" % (d, self.n_attrs))

    def resolve_attrs(self, d):
        if self.n_attrs is None:
            return min(d, math.ceil(math.sqrt(d)))
        return self.n_attrs


@dataclass
class Telemetry:
    """Work counters accumulated across tree operations.

    nodes_updated           path nodes whose cached stats were patched
    subtree_samples_rebuilt samples covered by rebuilt (or materialized)
                            tagged nodes
    range_resample_samples  samples in nodes where some slot's range
                            changed and its thresholds were redrawn
    attrs_resampled         individual slots redrawn
    """

    nodes_updated: int = 0
    subtree_samples_rebuilt: int = 0
    range_resample_samples: int = 0
    attrs_resampled: int = 0

    def reset(self):
        self.nodes_updated = 0
        self.subtree_samples_rebuilt = 0
        self.range_resample_samples = 0
        self.attrs_resampled = 0

    def as_dict(self):
        return {
            "nodes_updated": self.nodes_updated,
            "subtree_samples_rebuilt": self.subtree_samples_rebuilt,
            "range_resample_samples": self.range_resample_samples,
            "attrs_resampled": self.attrs_resampled,
        }


@dataclass
class AttributeSlot:
    """One candidate attribute's cached statistics at a node.

    thresholds are sorted ascending; b[i] counts node samples with value
    at or below thresholds[i], c[i] the positives among them.  A slot
    whose observed range is a single point scores +inf everywhere.
    """

    attr: int
    a_min: float
    a_max: float
    thresholds: np.ndarray
    b: np.ndarray
    c: np.ndarray
    score: np.ndarray


class SlotBlock:
    """Dense per-node storage for p attribute slots with s thresholds each."""

    __slots__ = ("attrs", "amin", "amax", "thr", "b", "c", "score")

    def __init__(self, attrs, amin, amax, thr, b, c, score=None):
        self.attrs = attrs
        self.amin = amin
        self.amax = amax
        self.thr = thr
        self.b = b
        self.c = c
        self.score = score

    @property
    def p(self):
        return len(self.attrs)

    def slot(self, k):
        """View of slot k as an AttributeSlot (arrays are shared)."""
        return AttributeSlot(int(self.attrs[k]), float(self.amin[k]), float(self.amax[k]),
                             self.thr[k], self.b[k], self.c[k],
                             self.score[k] if self.score is not None else None)


class Node:
    """Tree node.  Leaves may keep their slot grid (all-degenerate draw);
    tagged nodes have no children and best_k == -1."""

    __slots__ = ("depth", "ids", "n", "n_pos", "slots",
                 "best_k", "best_i", "best_w", "left", "right", "tagged")

    def __init__(self, depth, ids, n_pos):
        self.depth = depth
        self.ids = ids
        self.n = len(ids)
        self.n_pos = n_pos
        self.slots = None
        self.best_k = -1
        self.best_i = -1
        self.best_w = 0.0
        self.left = None
        self.right = None
        self.tagged = False

    @property
    def is_leaf(self):
        return self.left is None and not self.tagged

    def take(self, other):
        """Adopt every field of `other`, keeping this object's identity."""
        for name in Node.__slots__:
            setattr(self, name, getattr(other, name))


def sample_thresholds(a_min, a_max, s, rng):
    """Draw s candidate thresholds uniformly over [a_min, a_max], sorted.

    A degenerate range yields s copies of the single value (the slot is
    unusable but keeps its shape).
    """
    if a_min == a_max:
        return np.full(s, a_min)
    thr = rng.uniform(a_min, a_max, s)
    thr.sort()
    return thr


def prefix_counts(values, positive, thresholds):
    """Count, per sorted threshold, the samples at or below it.

    For each value, binary-search the first threshold at or above it,
    histogram those insertion points, and prefix-sum the histogram.

    Parameters
    ----------
    values : ndarray of float, shape (m,)
    positive : ndarray of bool, shape (m,)
    thresholds : ndarray of float, shape (s,), sorted ascending

    Returns
    -------
    b, c : ndarray of int64, shape (s,)
        b[i] = #{values <= thresholds[i]}, c[i] = positives among them.
    """
    s = len(thresholds)
    idx = np.searchsorted(thresholds, values, side="left")
    b = np.bincount(idx, minlength=s + 1)[:s].cumsum()
    c = np.bincount(idx[positive], minlength=s + 1)[:s].cumsum()
    return b, c


def score_candidates(ids, ds, slot, criterion="gini"):
    """Recompute a slot's counts and scores from raw samples.

    Returns a fresh AttributeSlot; `slot` only supplies the attribute,
    range and thresholds.  Degenerate ranges (and empty nodes) score +inf.
    """
    ids = np.asarray(ids, dtype=np.int64)
    vals = ds.X[ids, slot.attr]
    positive = ds.y[ids] == 1
    b, c = prefix_counts(vals, positive, slot.thresholds)
    n, n_pos = len(ids), int(positive.sum())
    if n == 0 or slot.a_min == slot.a_max:
        score = np.full(len(slot.thresholds), np.inf)
    else:
        score = crit.score_matrix(b, c, n, n_pos, criterion)
    return AttributeSlot(slot.attr, slot.a_min, slot.a_max,
                         slot.thresholds.copy(), b, c, score)


def _argmin_grid(score):
    """First (slot, threshold) cell attaining the minimum score."""
    flat = int(np.argmin(score))
    return divmod(flat, score.shape[1])


class Tree:
    """One extremely randomized tree over a Dataset.

    Use build_tree() or Forest.train() to construct; add/delete/query
    implement the lazy protocol described in the module docstring.
    """

    def __init__(self, params, ds, rng):
        params.validate(ds.n_attrs)
        self.params = params
        self.ds = ds
        self.rng = rng
        self.d = ds.n_attrs
        self.p = params.resolve_attrs(self.d)
        self.s = params.n_thresholds
        self.root = None
        self.n_tagged = 0
        self.telemetry = Telemetry()

    # -- construction ---------------------------------------------------

    def build(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        self.root = self._build(ids, 0)
        return self

    def _stop(self, depth, n, n_pos):
        return (depth >= self.params.max_depth
                or n < self.params.min_split_size
                or n_pos == 0 or n_pos == n)

    def _fill_slots(self, node):
        """Draw attributes and thresholds for a node and cache its grid."""
        ids = node.ids
        attrs = np.sort(self.rng.choice(self.d, size=self.p, replace=False))
        vals = self.ds.X[ids[:, None], attrs]
        amin = vals.min(axis=0)
        amax = vals.max(axis=0)
        thr = np.empty((self.p, self.s))
        for k in range(self.p):
            thr[k] = sample_thresholds(amin[k], amax[k], self.s, self.rng)
        positive = self.ds.y[ids] == 1
        b = np.empty((self.p, self.s), np.int64)
        c = np.empty((self.p, self.s), np.int64)
        for k in range(self.p):
            b[k], c[k] = prefix_counts(vals[:, k], positive, thr[k])
        node.slots = SlotBlock(attrs, amin, amax, thr, b, c)
        self._rescore(node)

    def _rescore(self, node):
        """Refresh the score grid from cached counts (n or counts changed)."""
        blk = node.slots
        if node.n == 0:
            blk.score = np.full((blk.p, self.s), np.inf)
            return
        sc = crit.score_matrix(blk.b, blk.c, node.n, node.n_pos, self.params.criterion)
        sc[blk.amin == blk.amax] = np.inf
        blk.score = sc

    def _choose_split(self, node):
        """Pick the best grid cell; returns False if nothing is usable."""
        blk = node.slots
        k, i = _argmin_grid(blk.score)
        if not np.isfinite(blk.score[k, i]):
            node.best_k = -1
            node.best_i = -1
            node.best_w = 0.0
            return False
        node.best_k = k
        node.best_i = i
        node.best_w = float(blk.thr[k, i])
        return True

    def _build(self, ids, depth):
        n_pos = int((self.ds.y[ids] == 1).sum())
        node = Node(depth, ids, n_pos)
        if self._stop(depth, node.n, n_pos):
            return node
        self._fill_slots(node)
        if not self._choose_split(node):
            return node  # every drawn attribute constant: leaf keeps its grid
        axis = int(node.slots.attrs[node.best_k])
        mask = self.ds.X[ids, axis] <= node.best_w
        node.left = self._build(ids[mask], depth + 1)
        node.right = self._build(ids[~mask], depth + 1)
        return node

    # -- tag bookkeeping --------------------------------------------------

    def _tag(self, node):
        # the discarded subtree may itself hold tagged nodes; settle the count
        stack = [node.left, node.right] if node.left is not None else []
        while stack:
            child = stack.pop()
            if child.tagged:
                self.n_tagged -= 1
            if child.left is not None:
                stack.extend((child.left, child.right))
        node.tagged = True
        node.left = None
        node.right = None
        node.best_k = -1
        node.best_i = -1
        node.best_w = 0.0
        self.n_tagged += 1

    def _patch_counts(self, node, x, label, delta):
        """Apply one sample's effect to a node's cached count grid."""
        blk = node.slots
        covered = blk.thr >= x[blk.attrs][:, None]
        blk.b[covered] += delta
        if label:
            blk.c[covered] += delta

    def _resample_slots(self, node, which):
        """Redraw thresholds (and recount) for the flagged slots."""
        blk = node.slots
        ids = node.ids
        positive = self.ds.y[ids] == 1
        for k in np.flatnonzero(which):
            blk.thr[k] = sample_thresholds(blk.amin[k], blk.amax[k], self.s, self.rng)
            blk.b[k], blk.c[k] = prefix_counts(self.ds.X[ids, blk.attrs[k]],
                                               positive, blk.thr[k])
        self.telemetry.attrs_resampled += int(which.sum())
        self.telemetry.range_resample_samples += node.n

    # -- update operations ------------------------------------------------

    def delete(self, sample_id):
        """Remove a sample from the tree's path statistics.

        Returns the node that became tagged, or None.  The sample must
        still be live in the dataset when this is called.
        """
        x = self.ds.X[sample_id]
        label = int(self.ds.y[sample_id])
        node = self.root
        while True:
            at = np.flatnonzero(node.ids == sample_id)
            if at.size == 0:
                raise ValueError("sample %d not present at depth %d; "
                                 "tree and routing disagree" % (sample_id, node.depth))
            node.ids = np.delete(node.ids, at[0])
            node.n -= 1
            node.n_pos -= label
            if node.slots is not None:
                self._patch_counts(node, x, label, -1)
            self.telemetry.nodes_updated += 1
            if node.tagged:
                return None
            if node.left is not None and self._stop(node.depth, node.n, node.n_pos):
                self._tag(node)
                return node
            if node.slots is not None:
                self._after_delete_ranges(node, x)
                self._rescore(node)
            if node.left is None:
                return None
            if self._best_moved(node):
                self._tag(node)
                return node
            axis = int(node.slots.attrs[node.best_k])
            node = node.left if x[axis] <= node.best_w else node.right

    def _after_delete_ranges(self, node, x):
        """Rescan ranges for slots whose boundary value was just removed."""
        blk = node.slots
        xs = x[blk.attrs]
        self._shrink_ranges(node, (xs == blk.amin) | (xs == blk.amax))

    def _shrink_ranges(self, node, hit):
        """Handle possible range shrinkage for the flagged slots."""
        blk = node.slots
        if node.n == 0 or not hit.any():
            return
        cols = blk.attrs[hit]
        sub = self.ds.X[node.ids[:, None], cols]
        new_min = sub.min(axis=0)
        new_max = sub.max(axis=0)
        changed = (new_min != blk.amin[hit]) | (new_max != blk.amax[hit])
        if not changed.any():
            return
        which = np.zeros(blk.p, bool)
        which[np.flatnonzero(hit)[changed]] = True
        blk.amin[which] = new_min[changed]
        blk.amax[which] = new_max[changed]
        self._resample_slots(node, which)

    def _best_moved(self, node):
        """Did the winning grid cell change identity or threshold value?"""
        blk = node.slots
        k, i = _argmin_grid(blk.score)
        if not np.isfinite(blk.score[k, i]):
            return True
        return (k != node.best_k or i != node.best_i
                or blk.thr[k, i] != node.best_w)

    def delete_group(self, group, tagged_out=None):
        """Remove a set of samples in one traversal.

        Equivalent in distribution to deleting them one by one, and
        bit-identical for a singleton group; grouping lets the per-node
        grid work amortize across the batch.  Newly tagged nodes are
        appended to tagged_out when given.
        """
        group = np.asarray(group, dtype=np.int64)
        if len(group) == 0:
            return
        self._delete_group(self.root, group, tagged_out)

    def _delete_group(self, node, group, tagged_out):
        keep = ~np.isin(node.ids, group)
        if node.n - int(keep.sum()) != len(group):
            raise ValueError("group of %d not fully present at depth %d; "
                             "tree and routing disagree" % (len(group), node.depth))
        node.ids = node.ids[keep]
        labels = self.ds.y[group] == 1
        node.n -= len(group)
        node.n_pos -= int(labels.sum())
        blk = node.slots
        if blk is not None:
            vals = self.ds.X[group[:, None], blk.attrs]
            for k in range(blk.p):
                db, dc = prefix_counts(vals[:, k], labels, blk.thr[k])
                blk.b[k] -= db
                blk.c[k] -= dc
        self.telemetry.nodes_updated += 1
        if node.tagged:
            return
        if node.left is not None and self._stop(node.depth, node.n, node.n_pos):
            self._tag(node)
            if tagged_out is not None:
                tagged_out.append(node)
            return
        if blk is not None:
            self._shrink_ranges(node, (vals.min(axis=0) == blk.amin)
                                | (vals.max(axis=0) == blk.amax))
            self._rescore(node)
        if node.left is None:
            return
        if self._best_moved(node):
            self._tag(node)
            if tagged_out is not None:
                tagged_out.append(node)
            return
        axis = int(blk.attrs[node.best_k])
        go_left = self.ds.X[group, axis] <= node.best_w
        if go_left.any():
            self._delete_group(node.left, group[go_left], tagged_out)
        if not go_left.all():
            self._delete_group(node.right, group[~go_left], tagged_out)

    def add(self, sample_id):
        """Insert a live sample into the tree's path statistics.

        Returns the node that became tagged, or None.
        """
        x = self.ds.X[sample_id]
        label = int(self.ds.y[sample_id])
        node = self.root
        if (node.ids == sample_id).any():
            raise ValueError("sample %d already present in tree" % sample_id)
        while True:
            node.ids = np.append(node.ids, sample_id)
            node.n += 1
            node.n_pos += label
            if node.slots is not None:
                self._patch_counts(node, x, label, +1)
            self.telemetry.nodes_updated += 1
            if node.tagged:
                return None
            if node.slots is not None:
                xs = x[node.slots.attrs]
                widened = (xs < node.slots.amin) | (xs > node.slots.amax)
                if node.left is None:
                    # leaf kept its grid because every slot was degenerate;
                    # a widening value makes it splittable again
                    if widened.any():
                        self._tag(node)
                        return node
                    self._rescore(node)
                    return None
                if widened.any():
                    blk = node.slots
                    blk.amin[widened] = np.minimum(blk.amin[widened], xs[widened])
                    blk.amax[widened] = np.maximum(blk.amax[widened], xs[widened])
                    self._resample_slots(node, widened)
                self._rescore(node)
                if self._best_moved(node):
                    self._tag(node)
                    return node
                axis = int(node.slots.attrs[node.best_k])
                node = node.left if x[axis] <= node.best_w else node.right
                continue
            # slotless leaf: tag once every stop criterion has lifted
            if not self._stop(node.depth, node.n, node.n_pos):
                self._tag(node)
                return node
            return None

    # -- queries ----------------------------------------------------------

    def _materialize(self, node):
        """Grow one fresh level at a tagged node and untag it."""
        self.telemetry.subtree_samples_rebuilt += node.n
        node.tagged = False
        self.n_tagged -= 1
        node.slots = None
        if self._stop(node.depth, node.n, node.n_pos):
            return
        self._fill_slots(node)
        if not self._choose_split(node):
            return
        axis = int(node.slots.attrs[node.best_k])
        mask = self.ds.X[node.ids, axis] <= node.best_w
        for ids_child in (node.ids[mask], node.ids[~mask]):
            child = Node(node.depth + 1, ids_child,
                         int((self.ds.y[ids_child] == 1).sum()))
            child.tagged = True
            self.n_tagged += 1
            if node.left is None:
                node.left = child
            else:
                node.right = child

    def query(self, x):
        """Route a feature vector to its leaf; returns (n, n_pos) there.

        Materializes (one level at a time) any tagged node on the path.
        """
        node = self.root
        while True:
            if node.tagged:
                self._materialize(node)
            if node.left is None:
                return node.n, node.n_pos
            axis = int(node.slots.attrs[node.best_k])
            node = node.left if x[axis] <= node.best_w else node.right

    def query_many(self, X):
        """Vectorized routing for a batch of rows; returns (n, n_pos) arrays.

        Falls back to per-row queries while any tag is pending, since
        routing can mutate the tree mid-batch.
        """
        X = np.asarray(X, dtype=np.float64)
        m = len(X)
        out_n = np.empty(m, np.int64)
        out_pos = np.empty(m, np.int64)
        if self.n_tagged:
            for r in range(m):
                out_n[r], out_pos[r] = self.query(X[r])
            return out_n, out_pos

        def route(node, rows):
            if node.left is None:
                out_n[rows] = node.n
                out_pos[rows] = node.n_pos
                return
            axis = int(node.slots.attrs[node.best_k])
            go_left = X[rows, axis] <= node.best_w
            if go_left.any():
                route(node.left, rows[go_left])
            if not go_left.all():
                route(node.right, rows[~go_left])

        route(self.root, np.arange(m))
        return out_n, out_pos

    # -- maintenance --------------------------------------------------------

    def rebuild_node(self, node):
        """Eagerly rebuild one tagged node's subtree in place."""
        self.telemetry.subtree_samples_rebuilt += node.n
        fresh = self._build(node.ids, node.depth)
        node.take(fresh)
        self.n_tagged -= 1

    def flush(self):
        """Rebuild every tagged subtree; afterwards no tags remain."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.tagged:
                self.rebuild_node(node)
            elif node.left is not None:
                stack.append(node.right)
                stack.append(node.left)
        assert self.n_tagged == 0

    def node_count(self):
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if node.left is not None:
                stack.append(node.right)
                stack.append(node.left)
        return count


def build_tree(ds, ids, params, rng=None):
    """Grow a tree over the given sample ids.  rng defaults to a fresh
    seeded generator so standalone builds are reproducible."""
    if rng is None:
        rng = np.random.default_rng(0)
    return Tree(params, ds, rng).build(ids)


# -- audit ----------------------------------------------------------------


def _audit_node(tree, node, path, report, leaf_ids):
    ds = tree.ds
    report.nodes_checked += 1
    ids = node.ids
    if len(np.unique(ids)) != len(ids):
        report.flag(path, "duplicate ids in node")
    if node.n != len(ids):
        report.flag(path, "n mismatch", "n=%d ids=%d" % (node.n, len(ids)))
    true_pos = sum(int(ds.y[int(i)]) for i in ids)
    if node.n_pos != true_pos:
        report.flag(path, "n_pos mismatch", "stored=%d actual=%d" % (node.n_pos, true_pos))

    blk = node.slots
    if blk is not None:
        vals = ds.X[ids[:, None], blk.attrs] if len(ids) else np.empty((0, blk.p))
        positive = ds.y[ids] == 1
        for k in range(blk.p):
            tag = "%s slot %d (attr %d)" % (path, k, blk.attrs[k])
            thr = blk.thr[k]
            if not (np.diff(thr) >= 0).all():
                report.flag(tag, "thresholds not sorted")
            if not node.tagged and len(ids):
                if blk.amin[k] != vals[:, k].min() or blk.amax[k] != vals[:, k].max():
                    report.flag(tag, "stale range",
                                "stored [%g, %g] actual [%g, %g]"
                                % (blk.amin[k], blk.amax[k],
                                   vals[:, k].min(), vals[:, k].max()))
                if thr.min() < blk.amin[k] or thr.max() > blk.amax[k]:
                    report.flag(tag, "thresholds outside range")
            # recount from raw values by direct comparison, not binary search
            b_true = (vals[:, k][:, None] <= thr[None, :]).sum(axis=0)
            c_true = (vals[positive, k][:, None] <= thr[None, :]).sum(axis=0)
            if not np.array_equal(blk.b[k], b_true):
                report.flag(tag, "b counts stale",
                            "stored=%s actual=%s" % (blk.b[k], b_true))
            if not np.array_equal(blk.c[k], c_true):
                report.flag(tag, "c counts stale",
                            "stored=%s actual=%s" % (blk.c[k], c_true))
            if not node.tagged and len(ids) > 0:
                # reference totals come from the ids themselves so the check
                # cannot crash on an already-inconsistent node
                degenerate = blk.amin[k] == blk.amax[k]
                for i in range(tree.s):
                    want = np.inf if degenerate else crit.CRITERIA[tree.params.criterion](
                        crit.SplitCounts(int(b_true[i]), int(c_true[i]),
                                         len(ids) - int(b_true[i]),
                                         true_pos - int(c_true[i])))
                    got = blk.score[k, i]
                    if want == np.inf:
                        if np.isfinite(got):
                            report.flag(tag, "score should be +inf", "i=%d got=%g" % (i, got))
                    elif abs(got - want) > 1e-9:
                        report.flag(tag, "score stale",
                                    "i=%d stored=%.12g recomputed=%.12g" % (i, got, want))

    if node.tagged:
        if node.left is not None or node.right is not None:
            report.flag(path, "tagged node has children")
        if node.best_k != -1:
            report.flag(path, "tagged node keeps a best split")
        leaf_ids.append(ids)
        return
    if node.left is None:
        if node.right is not None:
            report.flag(path, "half-linked children")
        if node.best_k != -1:
            report.flag(path, "leaf keeps a best split")
        leaf_ids.append(ids)
        return

    if blk is None:
        report.flag(path, "split node without slots")
        return
    k, i = _argmin_grid(blk.score)
    if (k, i) != (node.best_k, node.best_i):
        report.flag(path, "best split not the grid argmin",
                    "stored (%d,%d) argmin (%d,%d)" % (node.best_k, node.best_i, k, i))
    elif blk.thr[k, i] != node.best_w:
        report.flag(path, "best threshold value stale")
    if not np.isfinite(blk.score[node.best_k, node.best_i]):
        report.flag(path, "split on an unusable slot")
    axis = int(blk.attrs[node.best_k])
    go_left = ds.X[ids, axis] <= node.best_w
    want_left = np.sort(ids[go_left])
    want_right = np.sort(ids[~go_left])
    if not np.array_equal(np.sort(node.left.ids), want_left):
        report.flag(path, "left child ids do not match the split")
    if not np.array_equal(np.sort(node.right.ids), want_right):
        report.flag(path, "right child ids do not match the split")
    for child, lab in ((node.left, ".L"), (node.right, ".R")):
        if child.depth != node.depth + 1:
            report.flag(path + lab, "bad depth")
        _audit_node(tree, child, path + lab, report, leaf_ids)


def audit_tree(tree, label="tree"):
    """Recompute every cached statistic from raw data and report drift.

    Checks id conservation, counts, ranges (on untagged nodes), per-cell
    b/c counts against direct comparison counting, criterion scores
    against the scalar reference, argmin consistency of stored splits,
    and child partitions.  Returns an AuditReport.
    """
    report = AuditReport()
    leaf_ids = []
    _audit_node(tree, tree.root, label, report, leaf_ids)
    union = np.sort(np.concatenate(leaf_ids)) if leaf_ids else np.empty(0, np.int64)
    if not np.array_equal(union, np.sort(tree.root.ids)):
        report.flag(label, "leaf ids do not partition the root ids",
                    "%d across leaves vs %d at root" % (len(union), len(tree.root.ids)))
    tags = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        tags += node.tagged
        if node.left is not None:
            stack.extend((node.left, node.right))
    if tags != tree.n_tagged:
        report.flag(label, "tag counter drift", "counted %d stored %d" % (tags, tree.n_tagged))
    return report
