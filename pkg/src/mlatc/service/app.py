"""HTTP service around the mapper.

Stateful sessions carry a live learner for interactive frame ingest and
nearest-node queries; stateless endpoints run whole benchmarks, alpha
sweeps, and the analytical cost model. All heavy lifting stays in the core
package; this layer only translates between pydantic schemas and core
types.
"""

from __future__ import annotations

import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import complexity
from ..audit import AuditError
from ..bench import RunSpec, alpha_sweep, make_learner, run_benchmark
from ..mapio import map_to_doc
from ..streams import StreamFormatError, frame_from_columns
from .models import (
    AnalysisRequest,
    AnalysisResponse,
    AnalysisRow,
    FrameIngestRequest,
    FrameMetricsModel,
    LayerWinners,
    QueryRequest,
    QueryResponse,
    RunRequest,
    RunResponse,
    RunSummary,
    SessionCreateRequest,
    SessionState,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
)

from time import perf_counter


class _Session:
    """One live learner plus the lock serializing access to it."""

    def __init__(self, session_id: str, mode: str, learner) -> None:
        self.session_id = session_id
        self.mode = mode
        self.learner = learner
        self.frames_ingested = 0
        self.lock = threading.Lock()

    def state(self) -> SessionState:
        m = self.learner.map
        return SessionState(
            session_id=self.session_id,
            mode=self.mode,
            frames_ingested=self.frames_ingested,
            distance_evals=self.learner.distance_evals,
            layer_count=m.layer_count,
            nodes_per_layer=m.nodes_per_layer(),
            edges_per_layer=m.edges_per_layer(),
        )


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="mlatc service", version="0.1.0")
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> _Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", response_model=SessionState, status_code=201)
    def create_session(req: SessionCreateRequest) -> SessionState:
        learner = make_learner(req.mode, req.learner.to_config())
        session = _Session(uuid.uuid4().hex[:12], req.mode, learner)
        with registry_lock:
            sessions[session.session_id] = session
        return session.state()

    @app.get("/sessions/{session_id}", response_model=SessionState)
    def read_session(session_id: str) -> SessionState:
        session = get_session(session_id)
        with session.lock:
            return session.state()

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str) -> None:
        with registry_lock:
            if sessions.pop(session_id, None) is None:
                raise HTTPException(
                    status_code=404, detail=f"no session {session_id}"
                )

    @app.post("/sessions/{session_id}/frames", response_model=FrameMetricsModel)
    def ingest_frame(session_id: str, req: FrameIngestRequest) -> FrameMetricsModel:
        session = get_session(session_id)
        widths = {len(row) for row in req.points}
        if len(widths) != 1:
            raise _bad_request(ValueError("all rows must have the same width"))
        try:
            frame = frame_from_columns(
                np.asarray(req.points, dtype=np.float64),
                frame_index=session.frames_ingested,
            )
        except StreamFormatError as exc:
            raise _bad_request(exc) from None
        with session.lock:
            learner = session.learner
            before = learner.distance_evals
            start = perf_counter()
            for point in frame.iter_points():
                learner.train_point(point)
            wall_ms = (perf_counter() - start) * 1000.0
            session.frames_ingested += 1
            m = learner.map
            return FrameMetricsModel(
                frame_index=frame.frame_index,
                wall_time_ms=wall_ms,
                distance_evals=learner.distance_evals - before,
                layer_count=m.layer_count,
                nodes_per_layer=m.nodes_per_layer(),
                edges_per_layer=m.edges_per_layer(),
            )

    @app.post("/sessions/{session_id}/query", response_model=QueryResponse)
    def query_session(session_id: str, req: QueryRequest) -> QueryResponse:
        session = get_session(session_id)
        qx, qy, qz = req.position
        with session.lock:
            if session.mode == "mlatc":
                found = session.learner.search(req.position)
                layers = [
                    LayerWinners(
                        layer_index=k + 1, winners=entries[: req.max_results]
                    )
                    for k, entries in enumerate(found.per_layer)
                ]
                return QueryResponse(layers=layers, distance_evals=found.distance_evals)
            layer = session.learner.layer
            n = layer.count
            if n == 0:
                winners: list[tuple[int, float]] = []
            else:
                d = layer.distances_all(qx, qy, qz)
                order = np.lexsort((np.arange(n), d))[: req.max_results]
                winners = list(zip((order + 1).tolist(), d[order].tolist()))
            return QueryResponse(
                layers=[LayerWinners(layer_index=1, winners=winners)],
                distance_evals=n,
            )

    @app.get("/sessions/{session_id}/map")
    def read_session_map(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return map_to_doc(session.learner.map)

    @app.post("/runs", response_model=RunResponse, response_model_exclude_none=True)
    def run(req: RunRequest) -> RunResponse:
        spec = RunSpec(
            mode=req.mode,
            frames=req.frames,
            learner=req.learner.to_config(),
            stream=req.stream.to_config(),
            source_dir=req.source_dir,
            oracle_check=req.oracle_check,
            stop_at_nodes=req.stop_at_nodes,
            audit_every_frame=req.audit_every_frame,
        )
        try:
            result = run_benchmark(spec)
        except (ValueError, StreamFormatError, FileNotFoundError) as exc:
            raise _bad_request(exc) from None
        except AuditError as exc:
            raise HTTPException(
                status_code=500, detail=f"structural audit failed: {exc}"
            ) from None
        m = result.map
        return RunResponse(
            mode=result.mode,
            rows=[FrameMetricsModel.from_metrics(row) for row in result.metrics],
            summary=RunSummary(
                layer_count=m.layer_count,
                nodes_per_layer=m.nodes_per_layer(),
                edges_per_layer=m.edges_per_layer(),
                total_distance_evals=result.total_distance_evals,
            ),
            total_mismatches=result.total_mismatches,
            map=map_to_doc(m) if req.include_map else None,
        )

    @app.post("/sweeps", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        try:
            rows = alpha_sweep(
                req.lo,
                req.hi,
                req.step,
                req.stream.to_config(),
                req.frames,
                req.learner.to_config(),
            )
        except ValueError as exc:
            raise _bad_request(exc) from None
        return SweepResponse(rows=[SweepRowModel.from_row(row) for row in rows])

    @app.post(
        "/analysis", response_model=AnalysisResponse, response_model_exclude_none=True
    )
    def analysis(req: AnalysisRequest) -> AnalysisResponse:
        grid = (req.grid_lo, req.grid_hi, req.grid_step)
        try:
            rows = [
                AnalysisRow(ratio=r, alpha_star=complexity.alpha_star(r, grid))
                for r in req.ratios
            ]
            curve = complexity.objective_curve(tuple(req.ratios)) if req.curve else None
        except ValueError as exc:
            raise _bad_request(exc) from None
        return AnalysisResponse(
            rows=rows,
            kappa_max=complexity.KAPPA_MAX,
            curve_alphas=curve[0] if curve else None,
            curve_values=curve[1] if curve else None,
        )

    return app


app = create_app()


def main() -> None:
    """Entry point of the mlatc-service script."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Serve the mapping API over HTTP.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
