"""Structural invariant checks for maps and search results.

Two depths: the fast audit is O(layers) thanks to counters maintained by
the graph (safe to run after every frame of any run, however large); the
deep audit re-derives everything entry by entry and is meant for tests and
periodic checkpoints.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .config import layer_vigilance
from .graph import LayerGraph, MultiLayerMap


class AuditError(Exception):
    """A structural invariant does not hold."""


def _fail(message: str) -> None:
    raise AuditError(message)


def audit_winner_sets(winner_sets, m: MultiLayerMap, thresholds: list[float]) -> None:
    """Check one search result: sortedness, radius compliance, lineage.

    Every per-layer list must ascend by (distance, id); below the top, every
    distance must respect the layer's search radius and every entry must be
    a child of some entry one layer up; the top list must cover the whole
    top layer.
    """
    per_layer = winner_sets.per_layer
    layer_total = len(per_layer)
    if layer_total != m.layer_count:
        _fail(
            f"winner sets cover {layer_total} layers, map has {m.layer_count}"
        )
    top_entries = per_layer[-1]
    if len(top_entries) != m.layers[-1].count:
        _fail(
            f"top layer list has {len(top_entries)} entries, "
            f"layer has {m.layers[-1].count} nodes"
        )
    for layer0 in range(layer_total):
        entries = per_layer[layer0]
        prev_d = -1.0
        prev_id = 0
        for nid, dist in entries:
            if dist < 0.0:
                _fail(f"layer {layer0 + 1}: negative distance {dist}")
            if dist < prev_d or (dist == prev_d and nid <= prev_id):
                _fail(f"layer {layer0 + 1}: entries not sorted by (distance, id)")
            prev_d, prev_id = dist, nid
        if layer0 == layer_total - 1:
            continue
        threshold = thresholds[layer0]
        upper_ids = {nid for nid, _ in per_layer[layer0 + 1]}
        parent = m.layers[layer0].parent
        for nid, dist in entries:
            if dist > threshold:
                _fail(
                    f"layer {layer0 + 1}: entry {nid} at {dist} exceeds "
                    f"search radius {threshold}"
                )
            if parent[nid - 1] not in upper_ids:
                _fail(
                    f"layer {layer0 + 1}: entry {nid} is not a child of any "
                    f"winner one layer up"
                )


def _audit_layer_fast(m: MultiLayerMap, layer0: int) -> None:
    layer = m.layers[layer0]
    index = layer0 + 1
    if layer.layer_index != index:
        _fail(f"layer at slot {index} reports index {layer.layer_index}")
    expected = layer_vigilance(m.config, index)
    if layer.vigilance != expected:
        _fail(
            f"layer {index}: vigilance {layer.vigilance!r} is not exactly "
            f"{expected!r}"
        )
    if sum(layer.age_counts) != layer.edge_count:
        _fail(
            f"layer {index}: age histogram totals {sum(layer.age_counts)}, "
            f"edge count is {layer.edge_count}"
        )
    if layer.deleted_count < 0 or layer.deleted_age_sum < 0:
        _fail(f"layer {index}: negative deletion statistics")


def audit_map(m: MultiLayerMap, hierarchical: bool = True, deep: bool = True) -> None:
    """Check the map's structural invariants; raise AuditError on failure.

    hierarchical=False relaxes the checks that only apply to a layered map
    (top-layer singleton, parent/child partition): the flat baseline is a
    single layer whose nodes legitimately have no parents.
    """
    layer_total = m.layer_count
    for layer0 in range(layer_total):
        _audit_layer_fast(m, layer0)

    if hierarchical:
        if m.layers[0].count > 0 and m.layers[-1].count != 1:
            _fail(f"top layer has {m.layers[-1].count} nodes, expected exactly 1")
        if m.layers[-1].parented_count != 0:
            _fail("top-layer nodes must not have parents")
        for layer0 in range(layer_total - 1):
            lower = m.layers[layer0]
            upper = m.layers[layer0 + 1]
            if lower.parented_count != lower.count:
                _fail(
                    f"layer {layer0 + 1}: {lower.count - lower.parented_count} "
                    f"nodes have no parent"
                )
            if upper.children_total != lower.count:
                _fail(
                    f"layer {layer0 + 2}: children lists cover "
                    f"{upper.children_total} nodes, layer below has {lower.count}"
                )

    if deep:
        for layer0 in range(layer_total):
            _audit_layer_deep(m.layers[layer0])
        if hierarchical:
            for layer0 in range(layer_total - 1):
                _audit_lineage_deep(m.layers[layer0], m.layers[layer0 + 1])


def _audit_layer_deep(layer: LayerGraph) -> None:
    index = layer.layer_index
    n = layer.count
    for name, arr in (("x", layer._xs), ("y", layer._ys), ("z", layer._zs)):
        if not np.isfinite(arr[:n]).all():
            _fail(f"layer {index}: non-finite {name} coordinate")
    if any(w < 0 for w in layer.win):
        _fail(f"layer {index}: negative win count")

    recount: Counter[int] = Counter()
    undirected = 0
    for i0, a in enumerate(layer.adj):
        i = i0 + 1
        for j, age in a.items():
            if j == i:
                _fail(f"layer {index}: self loop at node {i}")
            if not 1 <= j <= n:
                _fail(f"layer {index}: edge endpoint {j} out of range")
            if not isinstance(age, int) or age < 0:
                _fail(f"layer {index}: bad age {age!r} on edge ({i}, {j})")
            if layer.adj[j - 1].get(i) != age:
                _fail(f"layer {index}: edge ({i}, {j}) is not mirrored")
            if j > i:
                undirected += 1
                recount[age] += 1
    if undirected != layer.edge_count:
        _fail(
            f"layer {index}: {undirected} edges present, counter says "
            f"{layer.edge_count}"
        )
    stored = {age: cnt for age, cnt in enumerate(layer.age_counts) if cnt > 0}
    if stored != dict(recount):
        _fail(f"layer {index}: age histogram does not match a recount")
    for pair_set, label in ((layer.nor_pairs, "nor"), (layer.tra_pairs, "tra")):
        for i, j in pair_set:
            if not (i < j and layer.adj[i - 1].get(j) is not None):
                _fail(f"layer {index}: {label} flag on missing edge ({i}, {j})")


def _audit_lineage_deep(lower: LayerGraph, upper: LayerGraph) -> None:
    index = lower.layer_index
    seen = 0
    for parent0, kids in enumerate(upper.children):
        previous = 0
        for child in kids:
            if not 1 <= child <= lower.count:
                _fail(f"layer {index}: child id {child} out of range")
            if child <= previous:
                _fail(
                    f"layer {upper.layer_index}: children of node {parent0 + 1} "
                    f"are not strictly ascending"
                )
            previous = child
            if lower.parent[child - 1] != parent0 + 1:
                _fail(
                    f"layer {index}: node {child} is listed under "
                    f"{parent0 + 1} but points to {lower.parent[child - 1]}"
                )
            seen += 1
    if seen != lower.count:
        _fail(
            f"layer {index}: children lists cover {seen} of {lower.count} nodes"
        )
    for i0 in range(lower.count):
        p = lower.parent[i0]
        if p is None:
            _fail(f"layer {index}: node {i0 + 1} has no parent")
        if not 1 <= p <= upper.count:
            _fail(f"layer {index}: node {i0 + 1} has out-of-range parent {p}")


def audit_ancestry_radii(m: MultiLayerMap) -> None:
    """Insertion-only soundness: every node sits within its parent layer's
    vigilance of its parent. Holds exactly while position updates are
    frozen; drifting updates legitimately break it."""
    for layer0 in range(m.layer_count - 1):
        lower = m.layers[layer0]
        upper = m.layers[layer0 + 1]
        for i0 in range(lower.count):
            p = lower.parent[i0]
            if p is None:
                _fail(f"layer {layer0 + 1}: node {i0 + 1} has no parent")
            x, y, z = lower.position(i0 + 1)
            dist = upper.distance_to(p, x, y, z)
            if dist > upper.vigilance:
                _fail(
                    f"layer {layer0 + 1}: node {i0 + 1} lies {dist} from its "
                    f"parent, beyond vigilance {upper.vigilance}"
                )
