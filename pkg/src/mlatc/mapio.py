"""Map serialization: a JSON document, byte-stable across export cycles.

The document carries everything needed to reconstruct the learner state
exactly (positions and normals round-trip through repr-exact floats,
deletion statistics come along), plus a per-layer summary block with node
ratios for quick inspection.
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import LearnerConfig, layer_vigilance
from .graph import LayerGraph, MultiLayerMap

FORMAT_NAME = "layered-topo-map"
FORMAT_VERSION = 1


class MapFormatError(ValueError):
    """The document is not a readable map export."""


def _layer_doc(layer: LayerGraph) -> dict:
    nodes = []
    for node_id in range(1, layer.count + 1):
        i = node_id - 1
        entry: dict = {
            "id": node_id,
            "position": list(layer.position(node_id)),
            "win_count": layer.win[i],
            "parent": layer.parent[i],
            "children": list(layer.children[i]),
        }
        if layer.with_attributes:
            normal = layer.normals[i]
            entry["normal"] = list(normal) if normal is not None else None
            entry["traversability"] = layer.trav[i]
        nodes.append(entry)
    edges = [
        {"i": e.i, "j": e.j, "age": e.age, "in_nor": e.in_nor, "in_tra": e.in_tra}
        for e in layer.edges()
    ]
    return {
        "layer_index": layer.layer_index,
        "vigilance": layer.vigilance,
        "with_attributes": layer.with_attributes,
        "deleted_count": layer.deleted_count,
        "deleted_age_sum": layer.deleted_age_sum,
        "nodes": nodes,
        "edges": edges,
    }


def map_to_doc(m: MultiLayerMap) -> dict:
    config = m.config
    counts = m.nodes_per_layer()
    summary = []
    for layer0, layer in enumerate(m.layers):
        ratio = None
        if layer0 >= 1 and counts[layer0 - 1] > 0:
            ratio = 100.0 * counts[layer0] / counts[layer0 - 1]
        summary.append(
            {
                "layer_index": layer0 + 1,
                "nodes": counts[layer0],
                "edges": layer.edge_count,
                "node_ratio_pct": ratio,
            }
        )
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": {
            "iterations_per_frame": config.iterations_per_frame,
            "base_vigilance": config.base_vigilance,
            "alpha": config.alpha,
            "normal_edge_threshold": config.normal_edge_threshold,
            "updates_enabled": config.updates_enabled,
            "min_edges_for_aging": config.min_edges_for_aging,
            "rng_seed": config.rng_seed,
        },
        "layers": [_layer_doc(layer) for layer in m.layers],
        "summary": {"layer_count": m.layer_count, "per_layer": summary},
    }


def doc_to_map(doc: dict) -> MultiLayerMap:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise MapFormatError("not a map document")
    if doc.get("version") != FORMAT_VERSION:
        raise MapFormatError(f"unsupported version {doc.get('version')!r}")
    config = LearnerConfig(**doc["config"])
    m = MultiLayerMap(config)
    layer_docs = doc["layers"]
    if not layer_docs:
        raise MapFormatError("document has no layers")
    while m.layer_count < len(layer_docs):
        m.append_layer()
    for layer, ld in zip(m.layers, layer_docs):
        if ld["layer_index"] != layer.layer_index:
            raise MapFormatError("layer indices out of order")
        if ld["vigilance"] != layer_vigilance(config, layer.layer_index):
            raise MapFormatError(
                f"layer {layer.layer_index}: stored vigilance disagrees with "
                f"the config schedule"
            )
        for entry in ld["nodes"]:
            x, y, z = entry["position"]
            node_id = layer.add_node(float(x), float(y), float(z))
            if node_id != entry["id"]:
                raise MapFormatError("node ids must be dense and ascending")
            i = node_id - 1
            layer.win[i] = int(entry["win_count"])
            parent = entry["parent"]
            layer.parent[i] = int(parent) if parent is not None else None
            if parent is not None:
                layer.parented_count += 1
            kids = [int(c) for c in entry["children"]]
            layer.children[i] = kids
            layer.children_total += len(kids)
            if layer.with_attributes:
                normal = entry.get("normal")
                if normal is not None:
                    layer.normals[i] = (
                        float(normal[0]),
                        float(normal[1]),
                        float(normal[2]),
                    )
                layer.trav[i] = entry.get("traversability")
        for e in ld["edges"]:
            i, j, age = int(e["i"]), int(e["j"]), int(e["age"])
            layer.check_id(i)
            layer.check_id(j)
            layer.adj[i - 1][j] = age
            layer.adj[j - 1][i] = age
            layer.edge_count += 1
            layer._bump_age_count(age, +1)
            if e.get("in_nor"):
                layer.nor_pairs.add((i, j))
            if e.get("in_tra"):
                layer.tra_pairs.add((i, j))
        layer.deleted_count = int(ld["deleted_count"])
        layer.deleted_age_sum = int(ld["deleted_age_sum"])
    return m


def dumps_doc(doc: dict) -> str:
    """The one canonical text form (keys in construction order, compact)."""
    return json.dumps(doc, separators=(",", ":")) + "\n"


def export_map(m: MultiLayerMap, path: str | Path) -> None:
    Path(path).write_text(dumps_doc(map_to_doc(m)))


def import_map(path: str | Path) -> MultiLayerMap:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"{path}: {exc}") from None
    return doc_to_map(doc)
