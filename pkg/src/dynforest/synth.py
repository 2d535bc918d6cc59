"""Synthetic binary classification data with axis-aligned structure.

Labels follow a union of axis-aligned boxes over the first five attributes
with a configurable flip rate, so depth-limited threshold trees can learn
the clean part of the signal while the remaining attributes act as noise.
"""

from __future__ import annotations

import csv

import numpy as np

from .data import Column, Schema, dataset_from_arrays, save_schema, LABEL, NUMERIC


def make_arrays(n, d=20, seed=0, noise=0.1):
    """Feature matrix and labels; roughly half the labels are positive."""
    if d < 5:
        raise ValueError("need at least 5 attributes")
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    rule = ((X[:, 0] > 0.70)
            | ((X[:, 1] > 0.60) & (X[:, 2] < 0.40))
            | ((X[:, 3] > 0.55) & (X[:, 4] > 0.55)))
    flip = rng.random(n) < noise
    y = (rule ^ flip).astype(np.int8)
    return X, y


def synthetic_schema(d):
    cols = tuple(Column("f%d" % j, NUMERIC) for j in range(d)) + (Column("label", LABEL),)
    return Schema(cols, positive_label="1")


def make_dataset(n, d=20, seed=0, noise=0.1):
    X, y = make_arrays(n, d=d, seed=seed, noise=noise)
    return dataset_from_arrays(X, y, schema=synthetic_schema(d))


def write_csv(csv_path, schema_path, n, d=20, seed=0, noise=0.1):
    """Emit a synthetic CSV plus its schema sidecar; returns (n, d)."""
    X, y = make_arrays(n, d=d, seed=seed, noise=noise)
    schema = synthetic_schema(d)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([c.name for c in schema.columns])
        for i in range(n):
            writer.writerow([repr(float(v)) for v in X[i]] + [str(int(y[i]))])
    save_schema(schema, schema_path)
    return n, d
