"""Multi-layer adaptive topological clustering.

Layer 1 learns the same map the flat baseline would; coarser layers
summarize it at geometrically growing vigilance radii and exist purely to
cut the winner search down from an exhaustive scan to a walk through a few
candidate lists. Training a sample is two-phase: one top-down search
collects per-layer winner sets, then the sample ascends from layer 1,
inserting nodes until some layer absorbs it, wiring each new node under
the node that absorbed (or continued) the ascent one layer up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audit import audit_winner_sets
from .config import LearnerConfig, search_thresholds
from .flat import (
    _SCALAR_CUTOFF,
    InputPoint,
    OutcomeKind,
    StepOutcome,
    WinnerPair,
    exhaustive_winners,
    update_attribute_maps,
    update_by_winners,
)
from .graph import GraphContractError, MultiLayerMap

_INF = math.inf


@dataclass
class WinnerSets:
    """Result of one hierarchical search.

    per_layer[l - 1] lists (node id, distance) pairs for layer l, ascending
    by (distance, id). The top layer holds every node of that layer; each
    lower layer holds the children of the layer above's entries that fall
    within the layer's search radius. An empty list is a valid result and
    means the layer offered no winners.
    """

    per_layer: list[list[tuple[int, float]]]
    distance_evals: int


def hierarchical_nns(
    m: MultiLayerMap,
    qx: float,
    qy: float,
    qz: float,
    thresholds: list[float] | None = None,
) -> WinnerSets:
    """Top-down winner-set search for a query point."""
    layers = m.layers
    layer_total = len(layers)
    if thresholds is None:
        thresholds = search_thresholds(m.config, layer_total)

    per_layer: list[list[tuple[int, float]]] = [[] for _ in range(layer_total)]
    evals = 0

    # The top layer is scanned whole: with one root it is a single distance.
    top = layers[-1]
    n = top.count
    evals += n
    if n == 1:
        per_layer[-1] = [(1, top.distance_to(1, qx, qy, qz))]
    elif n > 1:
        if n <= _SCALAR_CUTOFF:
            scored = sorted(
                (top.distance_to(i + 1, qx, qy, qz), i + 1) for i in range(n)
            )
            per_layer[-1] = [(nid, dist) for dist, nid in scored]
        else:
            d = top.distances_all(qx, qy, qz)
            order = np.lexsort((np.arange(n), d))
            per_layer[-1] = list(zip((order + 1).tolist(), d[order].tolist()))

    # Walk down: candidates are the children of the layer above's winners,
    # kept while within this layer's cumulative search radius.
    for upper0 in range(layer_total - 1, 0, -1):
        upper = layers[upper0]
        lower = layers[upper0 - 1]
        threshold = thresholds[upper0 - 1]

        children = upper.children
        candidates: list[int] = []
        for nid, _dist in per_layer[upper0]:
            candidates.extend(children[nid - 1])
        if not candidates:
            continue

        evals += len(candidates)
        if len(candidates) <= _SCALAR_CUTOFF:
            scored = []
            for cid in candidates:
                dist = lower.distance_to(cid, qx, qy, qz)
                if dist <= threshold:
                    scored.append((dist, cid))
            scored.sort()
            per_layer[upper0 - 1] = [(cid, dist) for dist, cid in scored]
        else:
            idx = np.asarray(candidates, dtype=np.intp)
            idx -= 1
            d = lower.distances_among(idx, qx, qy, qz)
            keep = d <= threshold
            kept_idx = idx[keep]
            kept_d = d[keep]
            order = np.lexsort((kept_idx, kept_d))
            per_layer[upper0 - 1] = list(
                zip((kept_idx[order] + 1).tolist(), kept_d[order].tolist())
            )

    return WinnerSets(per_layer, evals)


def add_layer(m: MultiLayerMap) -> None:
    """Grow a new top layer over a just-saturated one.

    Requires the current top layer to hold exactly two nodes (the state
    right after its second node was inserted). The new layer starts with a
    single root copying the position of the node that was already there;
    that node is parented under the root. The newer node is parented by the
    caller once its own ascent step at the new top resolves.
    """
    top = m.layers[-1]
    if top.count != 2:
        raise GraphContractError(
            f"add_layer needs exactly 2 nodes in the top layer, found {top.count}"
        )
    keeper = 1  # ids are sequential; the pre-existing node of a 2-node top is 1
    x, y, z = top.position(keeper)
    grown = m.append_layer()
    root = grown.add_node(x, y, z)
    m.set_parent(top.layer_index, keeper, root)


class MlatcLearner:
    """Multi-layer mapper: hierarchical search, bottom-up absorption."""

    def __init__(self, config: LearnerConfig, audit_queries: bool = False):
        self.config = config
        self.map = MultiLayerMap(config)
        self.distance_evals = 0
        self.audit_queries = audit_queries
        self._thresholds = search_thresholds(config, 1)

    def search(self, position: tuple[float, float, float]) -> WinnerSets:
        """Pure hierarchical search; does not touch the map or counters."""
        qx, qy, qz = position
        return hierarchical_nns(self.map, qx, qy, qz, self._thresholds)

    def train_point(self, point: InputPoint) -> list[StepOutcome]:
        """Apply one training sample; returns the per-layer outcomes, bottom up."""
        m = self.map
        config = self.config
        qx, qy, qz = point.position

        winner_sets = self.search(point.position)
        self.distance_evals += winner_sets.distance_evals
        if self.audit_queries:
            audit_winner_sets(winner_sets, m, self._thresholds)
        searched_layers = len(winner_sets.per_layer)

        outcomes: list[StepOutcome] = []
        created_below = 0
        layer_index = 1
        while layer_index <= m.layer_count:
            layer = m.layers[layer_index - 1]
            if layer_index <= searched_layers:
                entries = winner_sets.per_layer[layer_index - 1]
                if not entries:
                    pair = WinnerPair(None, _INF, None, _INF)
                elif len(entries) == 1:
                    pair = WinnerPair(entries[0][0], entries[0][1], None, _INF)
                else:
                    pair = WinnerPair(
                        entries[0][0], entries[0][1], entries[1][0], entries[1][1]
                    )
                step_evals = 0
            else:
                # Layer appended mid-ascent: scan its node (at most two).
                pair = exhaustive_winners(layer, qx, qy, qz)
                step_evals = layer.count
                self.distance_evals += step_evals

            outcome = update_by_winners(point, layer, pair, config)
            outcome.distance_evals = step_evals
            outcomes.append(outcome)

            if outcome.kind is OutcomeKind.NEW_NODE:
                if layer_index >= 2:
                    m.set_parent(layer_index - 1, created_below, outcome.node_id)
                created_below = outcome.node_id
                if layer_index == m.layer_count and layer.count == 2:
                    add_layer(m)
                    self._thresholds = search_thresholds(config, m.layer_count)
                layer_index += 1
            else:
                if layer_index >= 2:
                    m.set_parent(layer_index - 1, created_below, outcome.s1)
                break

        outcomes[0].distance_evals += winner_sets.distance_evals
        update_attribute_maps(
            m.layers[0], outcomes[0].node_id, point, config.normal_edge_threshold
        )
        return outcomes
