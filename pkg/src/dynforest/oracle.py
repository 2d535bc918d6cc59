"""Independent reference implementations used to validate the fast paths.

Nothing here shares code with the hot paths it checks: counts come from a
pure-Python sort-merge instead of vectorized binary search, retraining
builds a fresh forest instead of patching one, and the occupancy checker
rescans every tree.  Slow and simple on purpose.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .audit import AuditReport
from .forest import Forest, ForestParams
from .tree import audit_tree


def sortmerge_best_split(values, positive, thresholds):
    """Prefix counts by explicit sort-merge; the reference for prefix_counts.

    Sorts the sample values, then advances one cursor over the sorted
    values and one over the (already sorted) thresholds, accumulating
    how many values, and how many positive values, sit at or below each
    threshold.

    Returns
    -------
    b, c : ndarray of int64, shape (len(thresholds),)
    """
    values = list(values)
    positive = list(positive)
    order = sorted(range(len(values)), key=lambda i: values[i])
    b = np.zeros(len(thresholds), np.int64)
    c = np.zeros(len(thresholds), np.int64)
    j = 0
    seen = 0
    seen_pos = 0
    for i, w in enumerate(thresholds):
        while j < len(order) and values[order[j]] <= w:
            seen += 1
            seen_pos += 1 if positive[order[j]] else 0
            j += 1
        b[i] = seen
        c[i] = seen_pos
    return b, c


def naive_retrain(ds, params, seed=None, workers=1):
    """Train a brand-new forest on ds's current live samples.

    This is the from-scratch baseline that an unlearned forest must match
    in distribution.  seed, when given, replaces params.seed.
    """
    if seed is not None:
        params = replace(params, seed=seed)
    return Forest.train(ds, params, workers=workers)


def occupancy_check(forest):
    """Verify the sample-to-tree assignment invariants by full rescan.

    Checks that the assignment keys are exactly the live ids, that every
    entry names k distinct trees, and that every tree's root covers
    exactly the ids assigned to it.
    """
    report = AuditReport()
    live = set(int(i) for i in forest.ds.live_ids())
    assigned = set(forest.assignment)
    for sid in sorted(live - assigned):
        report.flag("assignment", "live id missing", "id %d" % sid)
    for sid in sorted(assigned - live):
        report.flag("assignment", "dead or unknown id present", "id %d" % sid)
    expect = [set() for _ in forest.trees]
    k = forest.k
    for sid, row in forest.assignment.items():
        if len(set(row)) != k:
            report.flag("assignment", "id %d not in exactly %d distinct trees" % (sid, k),
                        str(row))
        for t in row:
            if not 0 <= t < len(forest.trees):
                report.flag("assignment", "id %d names tree %d out of range" % (sid, t))
            else:
                expect[t].add(sid)
    for t, tree in enumerate(forest.trees):
        report.nodes_checked += 1
        have = set(int(i) for i in tree.root.ids)
        if have != expect[t]:
            report.flag("tree %d" % t, "root ids disagree with assignment",
                        "%d assigned, %d present, %d common"
                        % (len(expect[t]), len(have), len(have & expect[t])))
    return report


def forest_audit(forest):
    """occupancy_check plus a full statistics audit of every tree."""
    report = occupancy_check(forest)
    for t, tree in enumerate(forest.trees):
        report.merge(audit_tree(tree, label="tree %d" % t))
    return report


def auc_pairs(y_true, scores):
    """All-pairs AUC: fraction of (positive, negative) pairs ranked
    correctly, ties counting half.  Quadratic; the reference for the
    rank-based implementation."""
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    pos = s[y == 1]
    neg = s[y != 1]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC needs at least one sample of each class")
    total = 0.0
    for sp in pos:
        total += (sp > neg).sum() + 0.5 * (sp == neg).sum()
    return total / (len(pos) * len(neg))
