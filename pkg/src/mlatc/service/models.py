"""Request/response schemas of the mapping service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..bench import FrameMetrics, SweepRow
from ..config import LearnerConfig
from ..streams import SyntheticStreamConfig


class LearnerSettings(BaseModel):
    iterations_per_frame: int = Field(default=4000, ge=1)
    base_vigilance: float = Field(default=0.5, gt=0.0)
    alpha: float = Field(default=4.0, gt=1.0)
    normal_edge_threshold: float = Field(default=0.9, ge=0.0, le=1.0)
    updates_enabled: bool = True
    min_edges_for_aging: int = Field(default=4, ge=1)
    rng_seed: int = Field(default=0, ge=0)

    def to_config(self) -> LearnerConfig:
        return LearnerConfig(**self.model_dump())


class StreamSettings(BaseModel):
    square_size: float = Field(default=20.0, gt=0.0)
    translation_per_frame: float = Field(default=10.0, ge=0.0)
    points_per_frame: int = Field(default=4000, ge=1)
    direction: tuple[float, float] = (1.0, 0.0)
    z_value: float = 0.0
    seed: int = Field(default=0, ge=0)

    def to_config(self) -> SyntheticStreamConfig:
        return SyntheticStreamConfig(**self.model_dump())


class FrameMetricsModel(BaseModel):
    frame_index: int
    wall_time_ms: float
    distance_evals: int
    layer_count: int
    nodes_per_layer: list[int]
    edges_per_layer: list[int]
    oracle_mismatches: int | None = None

    @classmethod
    def from_metrics(cls, m: FrameMetrics) -> "FrameMetricsModel":
        return cls(
            frame_index=m.frame_index,
            wall_time_ms=m.wall_time_ms,
            distance_evals=m.distance_evals,
            layer_count=m.layer_count,
            nodes_per_layer=m.nodes_per_layer,
            edges_per_layer=m.edges_per_layer,
            oracle_mismatches=m.oracle_mismatches,
        )

    def to_metrics(self) -> FrameMetrics:
        return FrameMetrics(
            frame_index=self.frame_index,
            wall_time_ms=self.wall_time_ms,
            distance_evals=self.distance_evals,
            layer_count=self.layer_count,
            nodes_per_layer=self.nodes_per_layer,
            edges_per_layer=self.edges_per_layer,
            oracle_mismatches=self.oracle_mismatches,
        )


class SessionCreateRequest(BaseModel):
    mode: Literal["flat", "mlatc"] = "mlatc"
    learner: LearnerSettings = LearnerSettings()


class SessionState(BaseModel):
    session_id: str
    mode: str
    frames_ingested: int
    distance_evals: int
    layer_count: int
    nodes_per_layer: list[int]
    edges_per_layer: list[int]


class FrameIngestRequest(BaseModel):
    """One frame as raw rows: x y z, optionally + nx ny nz, + traversability."""

    points: list[list[float]] = Field(min_length=1)


class QueryRequest(BaseModel):
    position: tuple[float, float, float]
    max_results: int = Field(default=5, ge=1)


class LayerWinners(BaseModel):
    layer_index: int
    winners: list[tuple[int, float]]


class QueryResponse(BaseModel):
    layers: list[LayerWinners]
    distance_evals: int


class RunRequest(BaseModel):
    mode: Literal["flat", "mlatc"] = "mlatc"
    frames: int = Field(default=10, ge=0)
    learner: LearnerSettings = LearnerSettings()
    stream: StreamSettings = StreamSettings()
    source_dir: str | None = None
    oracle_check: bool = False
    stop_at_nodes: int | None = Field(default=None, ge=1)
    audit_every_frame: bool = False
    include_map: bool = False


class RunSummary(BaseModel):
    layer_count: int
    nodes_per_layer: list[int]
    edges_per_layer: list[int]
    total_distance_evals: int


class RunResponse(BaseModel):
    mode: str
    rows: list[FrameMetricsModel]
    summary: RunSummary
    total_mismatches: int | None = None
    map: dict | None = None


class SweepRequest(BaseModel):
    lo: float = Field(gt=1.0)
    hi: float
    step: float = Field(gt=0.0)
    frames: int = Field(default=10, ge=1)
    learner: LearnerSettings = LearnerSettings()
    stream: StreamSettings = StreamSettings()


class SweepRowModel(BaseModel):
    alpha: float
    median_wall_ms: float
    median_distance_evals: float
    total_nodes: int

    @classmethod
    def from_row(cls, row: SweepRow) -> "SweepRowModel":
        return cls(
            alpha=row.alpha,
            median_wall_ms=row.median_wall_ms,
            median_distance_evals=row.median_distance_evals,
            total_nodes=row.total_nodes,
        )


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class AnalysisRequest(BaseModel):
    ratios: list[float] = [0.0, 0.5, 1.5, 5.0, 10.0]
    grid_lo: float = Field(default=1.0 + 1e-3, gt=1.0)
    grid_hi: float = 10.0
    grid_step: float = Field(default=1e-3, gt=0.0)
    curve: bool = True


class AnalysisRow(BaseModel):
    ratio: float
    alpha_star: float


class AnalysisResponse(BaseModel):
    rows: list[AnalysisRow]
    kappa_max: float
    curve_alphas: list[float] | None = None
    curve_values: list[list[float]] | None = None
