"""Layered topological graph storage.

Node positions live in columnar numpy arrays so the distance kernels
vectorize; edges are age-carrying adjacency dicts mirrored on both
endpoints; each layer keeps an integer age histogram plus running
deleted-edge statistics that feed the adaptive deletion threshold.

Node ids are 1-based and stable: nodes are never deleted, only edges are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import LearnerConfig, layer_vigilance
from .stats import rank_parts

_INITIAL_CAPACITY = 64


class GraphContractError(ValueError):
    """An operation was called outside its contract (bad id, self loop, ...)."""


class InsufficientStatistics(RuntimeError):
    """An aging threshold was requested while the layer has too few edges."""


@dataclass(frozen=True)
class NodeRecord:
    """Read-only snapshot of one node."""

    id: int
    position: tuple[float, float, float]
    win_count: int
    parent: int | None
    children: tuple[int, ...]
    normal: tuple[float, float, float] | None = None
    traversability: int | None = None


@dataclass(frozen=True)
class EdgeRecord:
    """Read-only snapshot of one undirected edge (i < j)."""

    i: int
    j: int
    age: int
    in_nor: bool = False
    in_tra: bool = False


@dataclass(frozen=True)
class AgeStats:
    """Aging statistics of one layer at a point in time."""

    edge_count: int
    age_histogram: dict[int, int]
    deleted_count: int
    deleted_age_sum: int

    @property
    def deleted_mean(self) -> float:
        if self.deleted_count == 0:
            raise InsufficientStatistics("no deleted edges yet")
        return self.deleted_age_sum / self.deleted_count


class LayerGraph:
    """One layer: nodes, age-weighted edges, and aging statistics.

    Parameters
    ----------
    layer_index : int
        1-based position of this layer in the hierarchy.
    vigilance : float
        Vigilance radius nodes of this layer respond to.
    with_attributes : bool
        Whether nodes carry normals/traversability and edges carry the
        derived consistency flags. Only layer 1 does.
    min_edges_for_aging : int
        Below this edge count, deletion statistics are considered too thin.
    """

    def __init__(
        self,
        layer_index: int,
        vigilance: float,
        with_attributes: bool = False,
        min_edges_for_aging: int = 4,
    ):
        self.layer_index = layer_index
        self.vigilance = vigilance
        self.with_attributes = with_attributes
        self.min_edges_for_aging = min_edges_for_aging

        self.count = 0
        self._xs = np.empty(_INITIAL_CAPACITY, dtype=np.float64)
        self._ys = np.empty(_INITIAL_CAPACITY, dtype=np.float64)
        self._zs = np.empty(_INITIAL_CAPACITY, dtype=np.float64)
        self.win: list[int] = []
        self.parent: list[int | None] = []
        self.children: list[list[int]] = []
        self.adj: list[dict[int, int]] = []
        self.normals: list[tuple[float, float, float] | None] = []
        self.trav: list[int | None] = []

        self.edge_count = 0
        self.age_counts: list[int] = []
        self.deleted_count = 0
        self.deleted_age_sum = 0
        # Flag sets hold canonical (i, j) pairs with i < j; an entry dies
        # with its edge, so membership implies the edge exists.
        self.nor_pairs: set[tuple[int, int]] = set()
        self.tra_pairs: set[tuple[int, int]] = set()
        # Partition bookkeeping, maintained by MultiLayerMap.set_parent.
        self.parented_count = 0
        self.children_total = 0

    # ------------------------------------------------------------------
    # nodes

    @property
    def node_count(self) -> int:
        return self.count

    def check_id(self, node_id: int) -> None:
        if not 1 <= node_id <= self.count:
            raise GraphContractError(
                f"node {node_id} does not exist in layer {self.layer_index}"
            )

    def add_node(self, x: float, y: float, z: float) -> int:
        """Insert a node at (x, y, z) with win count 0; returns its id."""
        i = self.count
        if i == self._xs.shape[0]:
            grown = self._xs.shape[0] * 2
            for name in ("_xs", "_ys", "_zs"):
                arr = np.empty(grown, dtype=np.float64)
                arr[:i] = getattr(self, name)[:i]
                setattr(self, name, arr)
        self._xs[i] = x
        self._ys[i] = y
        self._zs[i] = z
        self.win.append(0)
        self.parent.append(None)
        self.children.append([])
        self.adj.append({})
        self.normals.append(None)
        self.trav.append(None)
        self.count = i + 1
        return self.count

    def position(self, node_id: int) -> tuple[float, float, float]:
        self.check_id(node_id)
        i = node_id - 1
        return (float(self._xs[i]), float(self._ys[i]), float(self._zs[i]))

    def move_node(self, node_id: int, qx: float, qy: float, qz: float, rate: float) -> None:
        """Pull a node toward (qx, qy, qz) by the given fraction of the gap."""
        i = node_id - 1
        x = float(self._xs[i])
        y = float(self._ys[i])
        z = float(self._zs[i])
        self._xs[i] = x + rate * (qx - x)
        self._ys[i] = y + rate * (qy - y)
        self._zs[i] = z + rate * (qz - z)

    # ------------------------------------------------------------------
    # distance kernels
    #
    # The scalar and vectorized paths share one operation order
    # (dx*dx + dy*dy + dz*dz, left to right, then sqrt) so they agree
    # bit for bit; winner comparisons across code paths rely on that.

    def distance_to(self, node_id: int, qx: float, qy: float, qz: float) -> float:
        i = node_id - 1
        dx = float(self._xs[i]) - qx
        dy = float(self._ys[i]) - qy
        dz = float(self._zs[i]) - qz
        return math.sqrt(dx * dx + dy * dy + dz * dz)

    def distances_all(self, qx: float, qy: float, qz: float) -> np.ndarray:
        n = self.count
        dx = self._xs[:n] - qx
        dy = self._ys[:n] - qy
        dz = self._zs[:n] - qz
        return np.sqrt(dx * dx + dy * dy + dz * dz)

    def distances_among(self, idx: np.ndarray, qx: float, qy: float, qz: float) -> np.ndarray:
        """Distances for 0-based index array idx."""
        dx = self._xs[idx] - qx
        dy = self._ys[idx] - qy
        dz = self._zs[idx] - qz
        return np.sqrt(dx * dx + dy * dy + dz * dz)

    # ------------------------------------------------------------------
    # edges

    def _bump_age_count(self, age: int, delta: int) -> None:
        counts = self.age_counts
        while len(counts) <= age:
            counts.append(0)
        counts[age] += delta
        if counts[age] < 0:
            raise GraphContractError(f"age histogram went negative at age {age}")

    def age_of(self, i: int, j: int) -> int | None:
        self.check_id(i)
        self.check_id(j)
        return self.adj[i - 1].get(j)

    def connect(self, i: int, j: int) -> None:
        """Create edge {i, j} with age 0, or reset an existing edge's age to 0."""
        if i == j:
            raise GraphContractError("self loops are not allowed")
        self.check_id(i)
        self.check_id(j)
        ai = self.adj[i - 1]
        old = ai.get(j)
        if old is None:
            self.edge_count += 1
        else:
            self._bump_age_count(old, -1)
        self._bump_age_count(0, +1)
        ai[j] = 0
        self.adj[j - 1][i] = 0

    def age_incident_edges(self, node_id: int) -> None:
        """Add 1 to the age of every edge incident to node_id."""
        self.check_id(node_id)
        a = self.adj[node_id - 1]
        counts = self.age_counts
        for k in a:
            g = a[k] + 1
            a[k] = g
            self.adj[k - 1][node_id] = g
            counts[g - 1] -= 1
            self._bump_age_count(g, +1)

    def _remove_edge(self, i: int, j: int, age: int) -> None:
        del self.adj[i - 1][j]
        del self.adj[j - 1][i]
        self.edge_count -= 1
        self._bump_age_count(age, -1)
        self.deleted_count += 1
        self.deleted_age_sum += age
        pair = (i, j) if i < j else (j, i)
        self.nor_pairs.discard(pair)
        self.tra_pairs.discard(pair)

    # ------------------------------------------------------------------
    # aging statistics

    def _order_stat(self, k: int) -> int:
        """k-th smallest edge age (0-based) read off the histogram."""
        seen = 0
        for age, cnt in enumerate(self.age_counts):
            seen += cnt
            if seen > k:
                return age
        raise GraphContractError("age histogram is out of sync with edge_count")

    def _hist_quantile(self, q: float) -> float:
        lo, hi, frac = rank_parts(self.edge_count, q)
        v_lo = self._order_stat(lo)
        if frac == 0.0:
            return float(v_lo)
        v_hi = v_lo if hi == lo else self._order_stat(hi)
        return float(v_lo) + frac * (float(v_hi) - float(v_lo))

    def g_thr(self) -> float:
        """Upper-quartile-plus-IQR age threshold over current edges."""
        if self.edge_count < self.min_edges_for_aging:
            raise InsufficientStatistics(
                f"layer {self.layer_index} has {self.edge_count} edges, "
                f"needs {self.min_edges_for_aging} for aging statistics"
            )
        q1 = self._hist_quantile(0.25)
        q3 = self._hist_quantile(0.75)
        return q3 + (q3 - q1)

    def g_max(self) -> float:
        """Deletion threshold: deleted-age mean blended with g_thr.

        The blend weight is the share of deleted edges among deleted plus
        live edges, so early on (nothing deleted yet) the quartile threshold
        dominates and the history takes over as deletions accumulate.
        """
        thr = self.g_thr()
        dc = self.deleted_count
        if dc == 0:
            return thr
        w = dc / (dc + self.edge_count)
        mean = self.deleted_age_sum / dc
        return mean * w + thr * (1.0 - w)

    def remove_aged_edges(self, node_id: int) -> int:
        """Delete edges incident to node_id whose age exceeds g_max.

        Returns the number removed. Skips (returns 0) while the layer has
        fewer than min_edges_for_aging edges.
        """
        self.check_id(node_id)
        if self.edge_count < self.min_edges_for_aging:
            return 0
        threshold = self.g_max()
        a = self.adj[node_id - 1]
        doomed = [(k, g) for k, g in a.items() if g > threshold]
        for k, g in doomed:
            self._remove_edge(node_id, k, g)
        return len(doomed)

    def sweep_aged_edges(self) -> int:
        """Delete every edge in the layer whose age exceeds g_max."""
        if self.edge_count < self.min_edges_for_aging:
            return 0
        threshold = self.g_max()
        doomed = [
            (i0 + 1, j, g)
            for i0, a in enumerate(self.adj)
            for j, g in a.items()
            if j > i0 + 1 and g > threshold
        ]
        for i, j, g in doomed:
            self._remove_edge(i, j, g)
        return len(doomed)

    # ------------------------------------------------------------------
    # snapshots

    def node(self, node_id: int) -> NodeRecord:
        self.check_id(node_id)
        i = node_id - 1
        return NodeRecord(
            id=node_id,
            position=self.position(node_id),
            win_count=self.win[i],
            parent=self.parent[i],
            children=tuple(self.children[i]),
            normal=self.normals[i],
            traversability=self.trav[i],
        )

    def edges(self):
        """Iterate EdgeRecord snapshots, canonical orientation i < j."""
        for i0, a in enumerate(self.adj):
            i = i0 + 1
            for j, g in a.items():
                if j > i:
                    pair = (i, j)
                    yield EdgeRecord(
                        i, j, g, pair in self.nor_pairs, pair in self.tra_pairs
                    )

    def age_stats(self) -> AgeStats:
        hist = {age: cnt for age, cnt in enumerate(self.age_counts) if cnt > 0}
        return AgeStats(
            edge_count=self.edge_count,
            age_histogram=hist,
            deleted_count=self.deleted_count,
            deleted_age_sum=self.deleted_age_sum,
        )


class MultiLayerMap:
    """The full layered map: layer 1 plus however many layers grew above it."""

    def __init__(self, config: LearnerConfig):
        self.config = config
        self.layers: list[LayerGraph] = [
            LayerGraph(
                1,
                layer_vigilance(config, 1),
                with_attributes=True,
                min_edges_for_aging=config.min_edges_for_aging,
            )
        ]

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def layer(self, layer_index: int) -> LayerGraph:
        if not 1 <= layer_index <= len(self.layers):
            raise GraphContractError(f"layer {layer_index} does not exist")
        return self.layers[layer_index - 1]

    def append_layer(self) -> LayerGraph:
        index = len(self.layers) + 1
        grown = LayerGraph(
            index,
            layer_vigilance(self.config, index),
            with_attributes=False,
            min_edges_for_aging=self.config.min_edges_for_aging,
        )
        self.layers.append(grown)
        return grown

    def set_parent(self, child_layer_index: int, child_id: int, parent_id: int) -> None:
        """Register parent_id (one layer up) as the parent of child_id.

        A node's parent is assigned once and never rebound; the upper node's
        children list is the only other side of the relation, so the two
        counters kept here make the partition check O(1) per layer.
        """
        if not 1 <= child_layer_index < len(self.layers):
            raise GraphContractError(
                f"no layer above layer {child_layer_index} to hold the parent"
            )
        lower = self.layers[child_layer_index - 1]
        upper = self.layers[child_layer_index]
        lower.check_id(child_id)
        upper.check_id(parent_id)
        if lower.parent[child_id - 1] is not None:
            raise GraphContractError(
                f"node {child_id} in layer {child_layer_index} already has a parent"
            )
        lower.parent[child_id - 1] = parent_id
        lower.parented_count += 1
        upper.children[parent_id - 1].append(child_id)
        upper.children_total += 1

    def nodes_per_layer(self) -> list[int]:
        return [g.count for g in self.layers]

    def edges_per_layer(self) -> list[int]:
        return [g.edge_count for g in self.layers]
