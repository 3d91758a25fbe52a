"""Benchmark harness: streams frames into learners and measures them.

Owns the run loop (timed span covers search plus node and edge updates
only; sampling and I/O sit outside it), per-frame metrics and their CSV
schema, regression fits for the scaling analyses, the alpha sweep, the
flat-oracle lockstep check, and the search-drift audit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from time import perf_counter
from typing import Iterable, Iterator, Sequence

import numpy as np

from .audit import audit_map
from .config import LearnerConfig
from .flat import FlatLearner, OutcomeKind, exhaustive_winners
from .graph import MultiLayerMap
from .hierarchy import MlatcLearner
from .stats import median, percentile  # noqa: F401  (percentile is part of the API)
from .streams import (
    Frame,
    SyntheticStreamConfig,
    load_frame_file,
    sample_training_points,
    synthetic_frame,
)

# Sampling draws live on their own seed stream, disjoint from frame content.
_SAMPLER_STREAM = 2**32


@dataclass
class FrameMetrics:
    """Instrumentation for one processed frame."""

    frame_index: int
    wall_time_ms: float
    distance_evals: int
    layer_count: int
    nodes_per_layer: list[int]
    edges_per_layer: list[int]
    oracle_mismatches: int | None = None


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of y against x (or ln x)."""

    model: str
    slope: float
    intercept: float
    r_squared: float
    degenerate: bool = False


@dataclass
class RunSpec:
    """Everything one benchmark run needs.

    The learner's rng_seed drives sampling; the stream's seed drives frame
    content. audit_every_frame turns on the deep structural audit per frame
    (tests); otherwise the cheap counter-based audit runs per frame, the
    deep one at audit_checkpoint intervals (0 = only at the end).
    """

    mode: str = "mlatc"
    frames: int = 10
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    stream: SyntheticStreamConfig = field(default_factory=SyntheticStreamConfig)
    source_dir: str | Path | None = None
    oracle_check: bool = False
    stop_at_nodes: int | None = None
    audit_every_frame: bool = False
    audit_checkpoint: int = 0
    audit_queries: bool = True


@dataclass
class RunResult:
    mode: str
    metrics: list[FrameMetrics]
    map: MultiLayerMap
    total_distance_evals: int
    total_mismatches: int | None = None
    oracle_map: MultiLayerMap | None = None


@dataclass
class SweepRow:
    alpha: float
    median_wall_ms: float
    median_distance_evals: float
    total_nodes: int


@dataclass
class OracleReport:
    steps: int
    mismatches: int
    per_frame: list[int]

    @property
    def rate(self) -> float:
        return self.mismatches / self.steps if self.steps else 0.0


@dataclass
class DriftReport:
    queries: int
    mismatches: int

    @property
    def rate(self) -> float:
        return self.mismatches / self.queries if self.queries else 0.0


def make_learner(mode: str, config: LearnerConfig, audit_queries: bool = False):
    if mode == "flat":
        return FlatLearner(config)
    if mode == "mlatc":
        return MlatcLearner(config, audit_queries=audit_queries)
    raise ValueError(f"unknown mode {mode!r}")


def iter_frames(spec: RunSpec) -> Iterator[Frame]:
    if spec.frames < 0:
        raise ValueError("frames must be >= 0")
    if spec.source_dir is not None:
        files = sorted(p for p in Path(spec.source_dir).iterdir() if p.is_file())
        if not files:
            raise ValueError(f"{spec.source_dir}: no frame files")
        for k, path in enumerate(files[: spec.frames]):
            frame = load_frame_file(path, frame_index=k)
            yield frame
    else:
        for k in range(spec.frames):
            yield synthetic_frame(spec.stream, k)


def sampler_rng(seed: int, frame_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _SAMPLER_STREAM + frame_index])


def train_frame(learner, frame: Frame, rng: np.random.Generator) -> FrameMetrics:
    """Sample the frame and train; only the training loop is timed."""
    if len(frame) == 0:
        raise ValueError("cannot train on an empty frame")
    points = sample_training_points(
        frame, learner.config.iterations_per_frame, rng
    )
    before = learner.distance_evals
    start = perf_counter()
    for point in points:
        learner.train_point(point)
    wall_ms = (perf_counter() - start) * 1000.0
    m = learner.map
    return FrameMetrics(
        frame_index=frame.frame_index,
        wall_time_ms=wall_ms,
        distance_evals=learner.distance_evals - before,
        layer_count=m.layer_count,
        nodes_per_layer=m.nodes_per_layer(),
        edges_per_layer=m.edges_per_layer(),
    )


def _compare_step(subject_outcome, reference_outcome) -> bool:
    """True when the layer-1 decision matches the flat reference."""
    if subject_outcome.kind is not reference_outcome.kind:
        return False
    if subject_outcome.node_id != reference_outcome.node_id:
        return False
    if (
        subject_outcome.kind is OutcomeKind.UPDATED_WITH_EDGE
        and subject_outcome.s2 != reference_outcome.s2
    ):
        return False
    return True


def _audit_after_frame(
    spec: RunSpec, frame_number: int, m: MultiLayerMap, hierarchical: bool
) -> None:
    deep = spec.audit_every_frame or (
        spec.audit_checkpoint > 0 and frame_number % spec.audit_checkpoint == 0
    )
    audit_map(m, hierarchical=hierarchical, deep=deep)


def run_benchmark(spec: RunSpec) -> RunResult:
    """Execute one run; returns per-frame metrics plus the final map."""
    seed = spec.learner.rng_seed
    metrics: list[FrameMetrics] = []

    if spec.oracle_check:
        # Lockstep: the layered learner is the subject, the flat learner the
        # reference; both consume the identical sample sequence.
        subject = MlatcLearner(spec.learner, audit_queries=spec.audit_queries)
        reference = FlatLearner(spec.learner)
        total_mismatches = 0
        for number, frame in enumerate(iter_frames(spec), start=1):
            points = sample_training_points(
                frame, spec.learner.iterations_per_frame,
                sampler_rng(seed, frame.frame_index),
            )
            before = subject.distance_evals
            wall = 0.0
            mismatches = 0
            for point in points:
                start = perf_counter()
                outcomes = subject.train_point(point)
                wall += perf_counter() - start
                ref = reference.train_point(point)
                if not _compare_step(outcomes[0], ref):
                    mismatches += 1
            m = subject.map
            metrics.append(
                FrameMetrics(
                    frame_index=frame.frame_index,
                    wall_time_ms=wall * 1000.0,
                    distance_evals=subject.distance_evals - before,
                    layer_count=m.layer_count,
                    nodes_per_layer=m.nodes_per_layer(),
                    edges_per_layer=m.edges_per_layer(),
                    oracle_mismatches=mismatches,
                )
            )
            total_mismatches += mismatches
            _audit_after_frame(spec, number, subject.map, hierarchical=True)
            _audit_after_frame(spec, number, reference.map, hierarchical=False)
            if spec.stop_at_nodes and m.layers[0].count >= spec.stop_at_nodes:
                break
        audit_map(subject.map, hierarchical=True, deep=True)
        audit_map(reference.map, hierarchical=False, deep=True)
        return RunResult(
            mode="mlatc",
            metrics=metrics,
            map=subject.map,
            total_distance_evals=subject.distance_evals,
            total_mismatches=total_mismatches,
            oracle_map=reference.map,
        )

    learner = make_learner(spec.mode, spec.learner, spec.audit_queries)
    hierarchical = spec.mode == "mlatc"
    for number, frame in enumerate(iter_frames(spec), start=1):
        metrics.append(
            train_frame(learner, frame, sampler_rng(seed, frame.frame_index))
        )
        _audit_after_frame(spec, number, learner.map, hierarchical)
        if (
            spec.stop_at_nodes
            and learner.map.layers[0].count >= spec.stop_at_nodes
        ):
            break
    audit_map(learner.map, hierarchical=hierarchical, deep=True)
    return RunResult(
        mode=spec.mode,
        metrics=metrics,
        map=learner.map,
        total_distance_evals=learner.distance_evals,
    )


def oracle_check(
    stream: SyntheticStreamConfig,
    frames: int,
    updates_enabled: bool,
    learner: LearnerConfig | None = None,
) -> OracleReport:
    """Lockstep comparison of the layered learner against the flat one."""
    config = replace(learner or LearnerConfig(), updates_enabled=updates_enabled)
    spec = RunSpec(
        mode="mlatc", frames=frames, learner=config, stream=stream,
        oracle_check=True,
    )
    result = run_benchmark(spec)
    steps = config.iterations_per_frame * len(result.metrics)
    per_frame = [m.oracle_mismatches or 0 for m in result.metrics]
    return OracleReport(
        steps=steps, mismatches=result.total_mismatches or 0, per_frame=per_frame
    )


def drift_audit(
    stream: SyntheticStreamConfig, frames: int, learner: LearnerConfig | None = None
) -> DriftReport:
    """With updates enabled, measure how often the hierarchical search's
    actionable first winner (the one within the base vigilance) disagrees
    with an exhaustive scan of layer 1 on the same map state."""
    config = learner or LearnerConfig()
    subject = MlatcLearner(config)
    queries = 0
    mismatches = 0
    for k in range(frames):
        frame = synthetic_frame(stream, k)
        points = sample_training_points(
            frame, config.iterations_per_frame, sampler_rng(config.rng_seed, k)
        )
        for point in points:
            base = subject.map.layers[0]
            if base.count:
                queries += 1
                entries = subject.search(point.position).per_layer[0]
                hier_s1 = entries[0][0] if entries else None
                pair = exhaustive_winners(base, *point.position)
                flat_s1 = pair.s1 if pair.d1 <= base.vigilance else None
                if hier_s1 != flat_s1:
                    mismatches += 1
            subject.train_point(point)
    return DriftReport(queries=queries, mismatches=mismatches)


def alpha_sweep(
    lo: float,
    hi: float,
    step: float,
    stream: SyntheticStreamConfig,
    frames: int,
    learner: LearnerConfig | None = None,
) -> list[SweepRow]:
    """Run the layered learner once per alpha over one seeded stream."""
    if not lo > 1.0:
        raise ValueError("alpha sweep must start above 1")
    if not (step > 0.0 and hi >= lo):
        raise ValueError("need hi >= lo and step > 0")
    base = learner or LearnerConfig()
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    rows: list[SweepRow] = []
    for i in range(count):
        alpha = round(lo + i * step, 9)
        spec = RunSpec(
            mode="mlatc",
            frames=frames,
            learner=replace(base, alpha=alpha),
            stream=stream,
        )
        result = run_benchmark(spec)
        rows.append(
            SweepRow(
                alpha=alpha,
                median_wall_ms=median([m.wall_time_ms for m in result.metrics]),
                median_distance_evals=median(
                    [m.distance_evals for m in result.metrics]
                ),
                total_nodes=sum(result.map.nodes_per_layer()),
            )
        )
    return rows


def fit(xs: Sequence[float], ys: Sequence[float], model: str = "linear") -> FitResult:
    """Least-squares y = a*x + b (or a*ln(x) + b) with the fit's R^2."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be equal-length 1-d sequences")
    if x.size < 3:
        raise ValueError("need at least 3 points")
    if model == "logarithmic":
        if (x <= 0).any():
            raise ValueError("logarithmic model needs positive xs")
        x = np.log(x)
    elif model != "linear":
        raise ValueError(f"unknown model {model!r}")
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(((y - predicted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        exact = ss_res <= 1e-9 * max(1.0, float((y * y).sum()))
        return FitResult(model, float(slope), float(intercept), 1.0 if exact else 0.0, True)
    return FitResult(model, float(slope), float(intercept), 1.0 - ss_res / ss_tot)


# ----------------------------------------------------------------------
# CSV schemas

def _metrics_header(depth: int) -> list[str]:
    return (
        ["frame", "wall_ms", "dist_evals", "L"]
        + [f"nodes_l{k}" for k in range(1, depth + 1)]
        + [f"edges_l{k}" for k in range(1, depth + 1)]
        + ["mismatches"]
    )


def format_metrics_csv(rows: Iterable[FrameMetrics]) -> str:
    rows = list(rows)
    depth = max((r.layer_count for r in rows), default=1)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_metrics_header(depth))
    for r in rows:
        nodes = r.nodes_per_layer + [0] * (depth - len(r.nodes_per_layer))
        edges = r.edges_per_layer + [0] * (depth - len(r.edges_per_layer))
        writer.writerow(
            [r.frame_index, f"{r.wall_time_ms:.3f}", r.distance_evals, r.layer_count]
            + nodes
            + edges
            + ["" if r.oracle_mismatches is None else r.oracle_mismatches]
        )
    return buffer.getvalue()


def write_metrics_csv(rows: Iterable[FrameMetrics], path: str | Path) -> None:
    Path(path).write_text(format_metrics_csv(rows))


def read_metrics_csv(path: str | Path) -> list[FrameMetrics]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        depth = sum(1 for name in header if name.startswith("nodes_l"))
        expected = _metrics_header(depth)
        if header != expected:
            raise ValueError(f"unexpected metrics header {header!r}")
        out = []
        for row in reader:
            nodes = [int(v) for v in row[4 : 4 + depth]]
            edges = [int(v) for v in row[4 + depth : 4 + 2 * depth]]
            layer_total = int(row[3])
            out.append(
                FrameMetrics(
                    frame_index=int(row[0]),
                    wall_time_ms=float(row[1]),
                    distance_evals=int(row[2]),
                    layer_count=layer_total,
                    nodes_per_layer=nodes[:layer_total],
                    edges_per_layer=edges[:layer_total],
                    oracle_mismatches=int(row[-1]) if row[-1] != "" else None,
                )
            )
        return out


def format_sweep_csv(rows: Iterable[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["alpha", "median_wall_ms", "median_dist_evals", "total_nodes"])
    for r in rows:
        writer.writerow(
            [
                f"{r.alpha:g}",
                f"{r.median_wall_ms:.3f}",
                f"{r.median_distance_evals:g}",
                r.total_nodes,
            ]
        )
    return buffer.getvalue()
