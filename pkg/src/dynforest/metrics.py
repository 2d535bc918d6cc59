"""Evaluation metrics: accuracy and rank-based AUC-ROC.

The headline metric follows the class balance: accuracy for clearly
imbalanced data (positive rate under 21 percent), AUC otherwise.
"""

from __future__ import annotations

import numpy as np

HEADLINE_BALANCE_CUT = 0.21


def accuracy(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValueError("need equal-length non-empty label vectors")
    return float((y_true == y_pred).mean())


def auc_roc(y_true, scores):
    """Area under the ROC curve via the rank statistic.

    Scores are ranked ascending with midranks for ties; the AUC is the
    normalized rank sum of the positives.  Equivalent to the fraction of
    (positive, negative) pairs ordered correctly, ties counting half.
    """
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.size == 0:
        raise ValueError("need equal-length non-empty vectors")
    n_pos = int((y == 1).sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one sample of each class")
    order = np.argsort(s, kind="mergesort")
    _, inverse, counts = np.unique(s[order], return_inverse=True, return_counts=True)
    ends = counts.cumsum()
    midranks = (ends - counts + 1 + ends) / 2.0  # 1-based midrank per tie group
    ranks = np.empty(len(s))
    ranks[order] = midranks[inverse]
    rank_sum = ranks[y == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def headline_metric(positive_rate):
    """Which metric to headline for a dataset with this positive rate."""
    return "accuracy" if positive_rate < HEADLINE_BALANCE_CUT else "auc"


def evaluate(forest, ds, threshold=0.5):
    """Score a forest on a test Dataset.

    Returns a dict with accuracy (probability > threshold is a positive
    call), auc (None if the test labels are one-sided), the headline
    metric name picked from the test positive rate, and its value.
    """
    ids = ds.live_ids()
    if len(ids) == 0:
        raise ValueError("test set is empty")
    X = ds.X[ids]
    y = np.asarray(ds.y[ids], dtype=np.int64)
    probs = forest.predict_many(X)
    acc = accuracy(y, (probs > threshold).astype(np.int64))
    pos_rate = float(y.mean())
    auc = auc_roc(y, probs) if 0 < y.sum() < len(y) else None
    headline = headline_metric(pos_rate)
    value = acc if headline == "accuracy" else auc
    return {
        "n": len(y),
        "positive_rate": pos_rate,
        "accuracy": acc,
        "auc": auc,
        "headline": headline,
        "headline_value": value,
    }
