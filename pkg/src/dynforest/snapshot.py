"""Versioned binary model snapshots.

Layout: an 8-byte magic string, a little-endian uint32 header length, a
JSON header (sorted keys, compact separators), then the raw bytes of every
array the header lists, concatenated in listing order (C order, native
little-endian dtypes).  Everything that affects future behaviour is
captured: the dataset (including tombstones), the assignment map, every
node of every tree with its cached statistics and tags, and the exact
generator states, so a reloaded forest continues bit-for-bit like the
original.  Saving the same forest twice yields identical bytes.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .data import Dataset, Schema
from .forest import Forest
from .tree import Node, SlotBlock, Tree, TreeParams
from .forest import ForestParams

MAGIC = b"DYNFOR01"
VERSION = 1

_TAGGED = 1
_HAS_SLOTS = 2


class SnapshotError(ValueError):
    """Model file is missing, corrupt, or from an unknown version."""


def _preorder(root):
    nodes = []
    stack = [root]
    while stack:
        node = stack.pop()
        nodes.append(node)
        if node.left is not None:
            stack.append(node.right)
            stack.append(node.left)
    return nodes


def _pack_tree(t, tree, put):
    nodes = _preorder(tree.root)
    index = {id(node): i for i, node in enumerate(nodes)}
    m = len(nodes)
    depth = np.empty(m, np.int32)
    n_pos = np.empty(m, np.int64)
    flags = np.zeros(m, np.uint8)
    best = np.full((m, 2), -1, np.int32)
    best_w = np.zeros(m, np.float64)
    children = np.full((m, 2), -1, np.int32)
    ids_len = np.empty(m, np.int64)
    slot_rows = []
    for i, node in enumerate(nodes):
        depth[i] = node.depth
        n_pos[i] = node.n_pos
        ids_len[i] = len(node.ids)
        best[i] = (node.best_k, node.best_i)
        best_w[i] = node.best_w
        if node.tagged:
            flags[i] |= _TAGGED
        if node.slots is not None:
            flags[i] |= _HAS_SLOTS
            slot_rows.append(node.slots)
        if node.left is not None:
            children[i] = (index[id(node.left)], index[id(node.right)])
    put("t%d.depth" % t, depth)
    put("t%d.n_pos" % t, n_pos)
    put("t%d.flags" % t, flags)
    put("t%d.best" % t, best)
    put("t%d.best_w" % t, best_w)
    put("t%d.children" % t, children)
    put("t%d.ids_len" % t, ids_len)
    put("t%d.ids" % t, np.concatenate([node.ids for node in nodes])
        if nodes else np.empty(0, np.int64))
    if slot_rows:
        put("t%d.slot_attrs" % t, np.stack([blk.attrs for blk in slot_rows]).astype(np.int64))
        put("t%d.slot_amin" % t, np.stack([blk.amin for blk in slot_rows]))
        put("t%d.slot_amax" % t, np.stack([blk.amax for blk in slot_rows]))
        put("t%d.slot_thr" % t, np.stack([blk.thr for blk in slot_rows]))
        put("t%d.slot_b" % t, np.stack([blk.b for blk in slot_rows]))
        put("t%d.slot_c" % t, np.stack([blk.c for blk in slot_rows]))
        put("t%d.slot_score" % t, np.stack([blk.score for blk in slot_rows]))
    return m


def save(forest, path):
    """Write a forest snapshot; see the module docstring for the layout."""
    arrays = []

    def put(name, arr):
        arrays.append((name, np.ascontiguousarray(arr)))

    ds = forest.ds
    put("X", ds.X)
    put("y", ds.y)
    put("live", ds._live[: ds.next_id].astype(np.uint8))
    live_ids = sorted(forest.assignment)
    put("assign_ids", np.asarray(live_ids, np.int64))
    put("assign_trees", np.asarray([forest.assignment[i] for i in live_ids],
                                   np.int32).reshape(len(live_ids), forest.k))
    tree_meta = []
    for t, tree in enumerate(forest.trees):
        n_nodes = _pack_tree(t, tree, put)
        tree_meta.append({"n_nodes": n_nodes, "rng": tree.rng.bit_generator.state})
    tp = forest.params.tree
    header = {
        "version": VERSION,
        "data": {"n_attrs": ds.n_attrs, "next_id": ds.next_id},
        "schema": ds.schema.to_dict() if ds.schema is not None else None,
        "forest": {
            "n_trees": forest.params.n_trees,
            "occupancy": forest.params.occupancy,
            "seed": forest.params.seed,
            "lazy": forest.lazy,
            "rng": forest.rng.bit_generator.state,
        },
        "tree_params": {
            "max_depth": tp.max_depth,
            "n_thresholds": tp.n_thresholds,
            "n_attrs": tp.n_attrs,
            "min_split_size": tp.min_split_size,
            "criterion": tp.criterion,
        },
        "trees": tree_meta,
        "arrays": [[name, str(arr.dtype), list(arr.shape)] for name, arr in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for _, arr in arrays:
            f.write(arr.tobytes())


def _unpack_tree(t, n_nodes, arrays, tree):
    depth = arrays["t%d.depth" % t]
    n_pos = arrays["t%d.n_pos" % t]
    flags = arrays["t%d.flags" % t]
    best = arrays["t%d.best" % t]
    best_w = arrays["t%d.best_w" % t]
    children = arrays["t%d.children" % t]
    ids_len = arrays["t%d.ids_len" % t]
    ids_all = arrays["t%d.ids" % t]
    offsets = np.concatenate(([0], ids_len.cumsum()))
    nodes = []
    slot_cursor = 0
    for i in range(n_nodes):
        node = Node(int(depth[i]), ids_all[offsets[i]:offsets[i + 1]].copy(),
                    int(n_pos[i]))
        node.best_k = int(best[i, 0])
        node.best_i = int(best[i, 1])
        node.best_w = float(best_w[i])
        node.tagged = bool(flags[i] & _TAGGED)
        if flags[i] & _HAS_SLOTS:
            node.slots = SlotBlock(
                arrays["t%d.slot_attrs" % t][slot_cursor].copy(),
                arrays["t%d.slot_amin" % t][slot_cursor].copy(),
                arrays["t%d.slot_amax" % t][slot_cursor].copy(),
                arrays["t%d.slot_thr" % t][slot_cursor].copy(),
                arrays["t%d.slot_b" % t][slot_cursor].copy(),
                arrays["t%d.slot_c" % t][slot_cursor].copy(),
                arrays["t%d.slot_score" % t][slot_cursor].copy(),
            )
            slot_cursor += 1
        nodes.append(node)
    for i, node in enumerate(nodes):
        li, ri = int(children[i, 0]), int(children[i, 1])
        if li >= 0:
            node.left = nodes[li]
            node.right = nodes[ri]
    tree.root = nodes[0]
    tree.n_tagged = int((flags & _TAGGED).astype(bool).sum())


def load(path, workers=1):
    """Read a snapshot back into a live Forest."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise SnapshotError("%s: not a model snapshot (bad magic)" % path)
        (blob_len,) = struct.unpack("<I", f.read(4))
        try:
            header = json.loads(f.read(blob_len).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise SnapshotError("%s: corrupt header (%s)" % (path, e)) from None
        if header.get("version") != VERSION:
            raise SnapshotError("%s: unsupported snapshot version %r"
                                % (path, header.get("version")))
        arrays = {}
        for name, dtype, shape in header["arrays"]:
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            raw = f.read(count * np.dtype(dtype).itemsize)
            if len(raw) != count * np.dtype(dtype).itemsize:
                raise SnapshotError("%s: truncated array %r" % (path, name))
            arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        if f.read(1):
            raise SnapshotError("%s: trailing bytes after last array" % path)

    schema = Schema.from_dict(header["schema"]) if header["schema"] else None
    d = header["data"]["n_attrs"]
    next_id = header["data"]["next_id"]
    ds = Dataset(d, schema=schema, capacity=max(next_id, 16))
    live = arrays["live"].astype(bool)
    X, y = arrays["X"], arrays["y"]
    for i in range(next_id):
        ds.add(X[i], int(y[i]))
        if not live[i]:
            ds.tombstone(i)

    tp = TreeParams(**header["tree_params"])
    fp = ForestParams(n_trees=header["forest"]["n_trees"],
                      occupancy=header["forest"]["occupancy"],
                      seed=header["forest"]["seed"],
                      tree=tp)
    trees = []
    for t, meta in enumerate(header["trees"]):
        rng = np.random.default_rng(0)
        rng.bit_generator.state = meta["rng"]
        tree = Tree(tp, ds, rng)
        _unpack_tree(t, meta["n_nodes"], arrays, tree)
        trees.append(tree)
    assignment = {int(i): tuple(int(v) for v in row)
                  for i, row in zip(arrays["assign_ids"], arrays["assign_trees"])}
    rng = np.random.default_rng(0)
    rng.bit_generator.state = header["forest"]["rng"]
    return Forest(ds, fp, trees, assignment, rng,
                  lazy=header["forest"]["lazy"], workers=workers)
