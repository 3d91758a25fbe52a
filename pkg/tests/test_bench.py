"""Benchmark harness tests: runs, oracle lockstep, sweeps, fits, CSV."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from mlatc.bench import (
    FrameMetrics,
    RunSpec,
    alpha_sweep,
    drift_audit,
    fit,
    format_metrics_csv,
    format_sweep_csv,
    iter_frames,
    make_learner,
    oracle_check,
    read_metrics_csv,
    run_benchmark,
    sampler_rng,
    train_frame,
    write_metrics_csv,
)
from mlatc.flat import FlatLearner
from mlatc.hierarchy import MlatcLearner
from mlatc.mapio import map_to_doc
from mlatc.streams import SyntheticStreamConfig, synthetic_frame
from support import make_config

_STREAM = SyntheticStreamConfig(points_per_frame=300, seed=4)


def _spec(**overrides) -> RunSpec:
    defaults = dict(
        mode="mlatc",
        frames=2,
        learner=make_config(iterations_per_frame=300),
        stream=_STREAM,
    )
    defaults.update(overrides)
    return RunSpec(**defaults)


# ----------------------------------------------------------------------
# runs


def test_run_produces_one_metrics_row_per_frame() -> None:
    result = run_benchmark(_spec(frames=3))
    assert result.mode == "mlatc"
    assert [m.frame_index for m in result.metrics] == [0, 1, 2]
    assert result.total_distance_evals == sum(m.distance_evals for m in result.metrics)
    assert result.total_mismatches is None
    for m in result.metrics:
        assert m.layer_count == len(m.nodes_per_layer) == len(m.edges_per_layer)
        assert m.wall_time_ms >= 0.0
        assert m.distance_evals >= 300  # at least one eval per sample after warmup


def test_zero_frame_runs_are_legal_and_empty() -> None:
    result = run_benchmark(_spec(frames=0))
    assert result.metrics == []
    assert result.total_distance_evals == 0


def test_flat_runs_stay_single_layer() -> None:
    result = run_benchmark(_spec(mode="flat"))
    assert result.mode == "flat"
    assert all(m.layer_count == 1 for m in result.metrics)
    assert result.map.layer_count == 1
    assert result.map.layers[0].count > 50


def test_runs_are_deterministic_modulo_wall_time() -> None:
    def fingerprint():
        result = run_benchmark(_spec(frames=3))
        rows = [
            (m.frame_index, m.distance_evals, m.layer_count, m.nodes_per_layer,
             m.edges_per_layer)
            for m in result.metrics
        ]
        return rows, map_to_doc(result.map)

    assert fingerprint() == fingerprint()


def test_stop_at_nodes_cuts_the_run_short() -> None:
    full = run_benchmark(_spec(frames=6))
    assert full.map.layers[0].count > 120
    stopped = run_benchmark(_spec(frames=6, stop_at_nodes=120))
    assert len(stopped.metrics) < 6
    assert stopped.map.layers[0].count >= 120


def test_audit_every_frame_runs_clean() -> None:
    run_benchmark(_spec(frames=2, audit_every_frame=True))
    run_benchmark(_spec(frames=2, mode="flat", audit_every_frame=True))


def test_make_learner_rejects_unknown_modes() -> None:
    with pytest.raises(ValueError, match="unknown mode"):
        make_learner("fancy", make_config())


def test_train_frame_rejects_empty_frames() -> None:
    frame = synthetic_frame(_STREAM, 0)
    empty = replace(frame, positions=frame.positions[:0])
    with pytest.raises(ValueError, match="empty frame"):
        train_frame(MlatcLearner(make_config()), empty, sampler_rng(0, 0))


# ----------------------------------------------------------------------
# directory sources


def _write_frame_files(directory: Path) -> None:
    rng = np.random.default_rng(9)
    for name, shift in (("000.txt", 0.0), ("001.txt", 5.0)):
        rows = rng.uniform(0.0, 10.0, size=(80, 3))
        rows[:, 0] += shift
        rows[:, 2] = 0.0
        (directory / name).write_text(
            "\n".join(" ".join(repr(float(v)) for v in row) for row in rows) + "\n"
        )


def test_directory_sources_replay_files_in_name_order(tmp_path: Path) -> None:
    _write_frame_files(tmp_path)
    spec = _spec(frames=2, source_dir=tmp_path, learner=make_config(
        iterations_per_frame=100))
    frames = list(iter_frames(spec))
    assert [f.frame_index for f in frames] == [0, 1]
    assert frames[1].positions[:, 0].max() > 10.0  # the shifted file came second
    result = run_benchmark(spec)
    assert len(result.metrics) == 2


def test_directory_frame_budget_takes_a_prefix(tmp_path: Path) -> None:
    _write_frame_files(tmp_path)
    spec = _spec(frames=1, source_dir=tmp_path)
    assert len(list(iter_frames(spec))) == 1


def test_empty_directories_are_an_error(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="no frame files"):
        list(iter_frames(_spec(source_dir=tmp_path)))


# ----------------------------------------------------------------------
# oracle lockstep


def test_insertion_only_lockstep_matches_exactly() -> None:
    report = oracle_check(_STREAM, frames=2, updates_enabled=False,
                          learner=make_config(iterations_per_frame=200))
    assert report.steps == 400
    assert report.mismatches == 0
    assert report.per_frame == [0, 0]
    assert report.rate == 0.0


def test_oracle_runs_carry_mismatch_counts_in_the_metrics() -> None:
    spec = _spec(frames=2, oracle_check=True,
                 learner=make_config(iterations_per_frame=200,
                                     updates_enabled=False))
    result = run_benchmark(spec)
    assert all(m.oracle_mismatches == 0 for m in result.metrics)
    assert result.total_mismatches == 0
    assert result.oracle_map is not None
    assert result.oracle_map.layer_count == 1
    # Subject and reference agree on the base layer node set exactly.
    assert result.map.layers[0].count == result.oracle_map.layers[0].count


def test_drift_audit_counts_actionable_queries() -> None:
    report = drift_audit(_STREAM, frames=2,
                         learner=make_config(iterations_per_frame=150))
    # Every sample after the very first (empty map) is a query.
    assert report.queries == 299
    assert 0 <= report.mismatches <= report.queries
    assert report.rate == report.mismatches / 299


# ----------------------------------------------------------------------
# alpha sweeps


def test_alpha_sweep_walks_the_grid_deterministically() -> None:
    rows = alpha_sweep(2.0, 3.0, 0.5, _STREAM, frames=2,
                       learner=make_config(iterations_per_frame=150))
    assert [r.alpha for r in rows] == [2.0, 2.5, 3.0]
    assert all(r.total_nodes > 0 for r in rows)
    assert all(r.median_distance_evals > 0 for r in rows)
    again = alpha_sweep(2.0, 3.0, 0.5, _STREAM, frames=2,
                        learner=make_config(iterations_per_frame=150))
    assert [(r.alpha, r.median_distance_evals, r.total_nodes) for r in rows] == [
        (r.alpha, r.median_distance_evals, r.total_nodes) for r in again
    ]


def test_alpha_sweep_validates_its_grid() -> None:
    with pytest.raises(ValueError, match="above 1"):
        alpha_sweep(1.0, stream=_STREAM, hi=2.0, step=0.5, frames=1)
    with pytest.raises(ValueError, match="hi >= lo"):
        alpha_sweep(3.0, 2.0, 0.5, _STREAM, frames=1)
    with pytest.raises(ValueError, match="hi >= lo"):
        alpha_sweep(2.0, 3.0, 0.0, _STREAM, frames=1)


# ----------------------------------------------------------------------
# least-squares fits


def test_linear_fit_recovers_exact_coefficients() -> None:
    xs = [1.0, 2.0, 3.0, 4.0]
    ys = [2 * x + 1 for x in xs]
    result = fit(xs, ys)
    assert result.model == "linear"
    assert result.slope == pytest.approx(2.0, rel=1e-12)
    assert result.intercept == pytest.approx(1.0, rel=1e-12)
    assert result.r_squared == pytest.approx(1.0, abs=1e-12)
    assert not result.degenerate


def test_logarithmic_fit_recovers_exact_coefficients() -> None:
    xs = [1.0, 2.0, 10.0, 40.0]
    ys = [3.0 * np.log(x) + 0.5 for x in xs]
    result = fit(xs, ys, model="logarithmic")
    assert result.slope == pytest.approx(3.0, rel=1e-9)
    assert result.intercept == pytest.approx(0.5, rel=1e-9)
    assert result.r_squared == pytest.approx(1.0, abs=1e-9)


def test_noise_scores_no_spurious_fit() -> None:
    rng = np.random.default_rng(0)
    xs = np.linspace(1.0, 10.0, 1000)
    ys = rng.normal(size=1000)
    assert fit(xs, ys).r_squared < 0.2


def test_constant_targets_are_flagged_degenerate() -> None:
    result = fit([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
    assert result.degenerate
    assert result.r_squared == 1.0
    assert result.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_input_validation() -> None:
    with pytest.raises(ValueError, match="at least 3"):
        fit([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError, match="equal-length"):
        fit([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(ValueError, match="positive"):
        fit([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], model="logarithmic")
    with pytest.raises(ValueError, match="unknown model"):
        fit([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], model="quadratic")
    with pytest.raises(ValueError, match="equal-length"):
        fit([[1.0, 2.0]], [[1.0, 2.0]])  # type: ignore[list-item]


# ----------------------------------------------------------------------
# CSV round trips


def _sample_rows() -> list[FrameMetrics]:
    return [
        FrameMetrics(0, 12.125, 4000, 1, [10], [3], None),
        FrameMetrics(1, 8.5, 5000, 3, [20, 5, 1], [8, 2, 0], 0),
        FrameMetrics(2, 0.001, 6000, 2, [30, 7], [9, 1], 4),
    ]


def test_metrics_csv_round_trips(tmp_path: Path) -> None:
    rows = _sample_rows()
    path = tmp_path / "metrics.csv"
    write_metrics_csv(rows, path)
    assert read_metrics_csv(path) == rows


def test_metrics_csv_pads_shallow_frames_with_zeros() -> None:
    text = format_metrics_csv(_sample_rows())
    lines = text.splitlines()
    assert lines[0] == (
        "frame,wall_ms,dist_evals,L,nodes_l1,nodes_l2,nodes_l3,"
        "edges_l1,edges_l2,edges_l3,mismatches"
    )
    assert lines[1] == "0,12.125,4000,1,10,0,0,3,0,0,"
    assert lines[2] == "1,8.500,5000,3,20,5,1,8,2,0,0"
    assert lines[3] == "2,0.001,6000,2,30,7,0,9,1,0,4"


def test_metrics_csv_rejects_foreign_headers(tmp_path: Path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_metrics_csv(path)


def test_sweep_csv_shape() -> None:
    from mlatc.bench import SweepRow

    text = format_sweep_csv([SweepRow(2.5, 1.25, 4000.0, 321)])
    assert text == (
        "alpha,median_wall_ms,median_dist_evals,total_nodes\n"
        "2.5,1.250,4000,321\n"
    )
