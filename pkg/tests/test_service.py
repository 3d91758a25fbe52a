"""HTTP service tests, exercised in-process through the test client."""

from __future__ import annotations

import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from mlatc.service.app import create_app


@pytest.fixture()
def client() -> TestClient:
    return TestClient(create_app())


def _make_session(client: TestClient, **body) -> str:
    response = client.post("/sessions", json=body)
    assert response.status_code == 201
    return response.json()["session_id"]


# ----------------------------------------------------------------------
# health and sessions


def test_health_endpoint(client: TestClient) -> None:
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_session_lifecycle(client: TestClient) -> None:
    response = client.post("/sessions", json={})
    assert response.status_code == 201
    state = response.json()
    assert state["mode"] == "mlatc"
    assert state["frames_ingested"] == 0
    assert state["distance_evals"] == 0
    assert state["layer_count"] == 1
    assert state["nodes_per_layer"] == [0]

    session_id = state["session_id"]
    assert client.get(f"/sessions/{session_id}").json() == state

    other = _make_session(client)
    assert other != session_id

    assert client.delete(f"/sessions/{session_id}").status_code == 204
    assert client.get(f"/sessions/{session_id}").status_code == 404
    assert client.delete(f"/sessions/{session_id}").status_code == 404
    assert client.get(f"/sessions/{other}").status_code == 200


def test_missing_sessions_name_the_id(client: TestClient) -> None:
    response = client.get("/sessions/deadbeef")
    assert response.status_code == 404
    assert "deadbeef" in response.json()["detail"]


def test_session_rejects_bad_settings(client: TestClient) -> None:
    assert client.post("/sessions", json={"mode": "fancy"}).status_code == 422
    assert (
        client.post("/sessions", json={"learner": {"alpha": 1.0}}).status_code == 422
    )
    assert (
        client.post(
            "/sessions", json={"learner": {"iterations_per_frame": 0}}
        ).status_code
        == 422
    )


# ----------------------------------------------------------------------
# frame ingest


def test_ingest_trains_every_point_in_order(client: TestClient) -> None:
    session_id = _make_session(client)
    response = client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]},
    )
    assert response.status_code == 200
    row = response.json()
    assert row["frame_index"] == 0
    # The far second point cascades the hierarchy to five layers.
    assert row["layer_count"] == 5
    assert row["nodes_per_layer"] == [2, 2, 2, 2, 1]

    state = client.get(f"/sessions/{session_id}").json()
    assert state["frames_ingested"] == 1
    assert state["distance_evals"] == row["distance_evals"]

    second = client.post(
        f"/sessions/{session_id}/frames", json={"points": [[0.2, 0.0, 0.0]]}
    )
    assert second.json()["frame_index"] == 1


def test_ingest_accepts_attribute_columns(client: TestClient) -> None:
    session_id = _make_session(client)
    response = client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]]},
    )
    assert response.status_code == 200
    doc = client.get(f"/sessions/{session_id}/map").json()
    node = doc["layers"][0]["nodes"][0]
    assert node["normal"] == [0.0, 0.0, 1.0]
    assert node["traversability"] == 1


def test_ingest_rejects_bad_frames(client: TestClient) -> None:
    session_id = _make_session(client)
    ragged = client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0], [1.0, 2.0]]},
    )
    assert ragged.status_code == 422
    assert "width" in ragged.json()["detail"]

    four_wide = client.post(
        f"/sessions/{session_id}/frames", json={"points": [[1.0, 2.0, 3.0, 4.0]]}
    )
    assert four_wide.status_code == 422

    zero_normal = client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]]},
    )
    assert zero_normal.status_code == 422

    empty = client.post(f"/sessions/{session_id}/frames", json={"points": []})
    assert empty.status_code == 422


# ----------------------------------------------------------------------
# queries


def test_layered_queries_report_winners_per_layer(client: TestClient) -> None:
    session_id = _make_session(client)
    client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]},
    )
    response = client.post(
        f"/sessions/{session_id}/query", json={"position": [0.0, 0.0, 0.0]}
    )
    assert response.status_code == 200
    body = response.json()
    assert [layer["layer_index"] for layer in body["layers"]] == [1, 2, 3, 4, 5]
    assert body["layers"][0]["winners"][0] == [1, 0.0]
    assert body["distance_evals"] > 0


def test_queries_truncate_to_max_results(client: TestClient) -> None:
    session_id = _make_session(client)
    points = [[float(i), 0.0, 0.0] for i in range(8)]
    client.post(f"/sessions/{session_id}/frames", json={"points": points})
    response = client.post(
        f"/sessions/{session_id}/query",
        json={"position": [0.0, 0.0, 0.0], "max_results": 2},
    )
    for layer in response.json()["layers"]:
        assert len(layer["winners"]) <= 2


def test_flat_queries_scan_the_single_layer(client: TestClient) -> None:
    session_id = _make_session(client, mode="flat")
    client.post(
        f"/sessions/{session_id}/frames",
        json={"points": [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]]},
    )
    response = client.post(
        f"/sessions/{session_id}/query",
        json={"position": [0.0, 0.0, 0.0], "max_results": 1},
    )
    body = response.json()
    assert body["layers"] == [{"layer_index": 1, "winners": [[1, 0.0]]}]
    assert body["distance_evals"] == 2


def test_queries_on_an_empty_session(client: TestClient) -> None:
    session_id = _make_session(client)
    response = client.post(
        f"/sessions/{session_id}/query", json={"position": [0.0, 0.0, 0.0]}
    )
    assert response.json() == {
        "layers": [{"layer_index": 1, "winners": []}],
        "distance_evals": 0,
    }


def test_query_validation(client: TestClient) -> None:
    session_id = _make_session(client)
    assert (
        client.post(
            f"/sessions/{session_id}/query", json={"position": [0.0, 0.0]}
        ).status_code
        == 422
    )
    assert (
        client.post(
            f"/sessions/{session_id}/query",
            json={"position": [0.0, 0.0, 0.0], "max_results": 0},
        ).status_code
        == 422
    )


def test_session_map_is_a_readable_document(client: TestClient) -> None:
    session_id = _make_session(client)
    client.post(
        f"/sessions/{session_id}/frames", json={"points": [[1.0, 2.0, 3.0]]}
    )
    doc = client.get(f"/sessions/{session_id}/map").json()
    assert doc["format"] == "layered-topo-map"
    assert doc["version"] == 1
    assert doc["layers"][0]["nodes"][0]["position"] == [1.0, 2.0, 3.0]


# ----------------------------------------------------------------------
# stateless runs


def test_runs_return_rows_and_a_summary(client: TestClient) -> None:
    response = client.post(
        "/runs",
        json={
            "mode": "mlatc",
            "frames": 2,
            "learner": {"iterations_per_frame": 200},
            "stream": {"points_per_frame": 200, "seed": 4},
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["mode"] == "mlatc"
    assert len(body["rows"]) == 2
    assert body["summary"]["total_distance_evals"] == sum(
        r["distance_evals"] for r in body["rows"]
    )
    assert "map" not in body
    assert "total_mismatches" not in body


def test_runs_can_attach_the_final_map(client: TestClient) -> None:
    response = client.post(
        "/runs",
        json={
            "frames": 1,
            "learner": {"iterations_per_frame": 100},
            "stream": {"points_per_frame": 100, "seed": 4},
            "include_map": True,
        },
    )
    body = response.json()
    assert body["map"]["format"] == "layered-topo-map"
    assert body["map"]["summary"]["layer_count"] == body["summary"]["layer_count"]


def test_oracle_runs_report_mismatches(client: TestClient) -> None:
    response = client.post(
        "/runs",
        json={
            "frames": 1,
            "learner": {"iterations_per_frame": 150, "updates_enabled": False},
            "stream": {"points_per_frame": 150, "seed": 4},
            "oracle_check": True,
        },
    )
    body = response.json()
    assert body["total_mismatches"] == 0
    assert all(r["oracle_mismatches"] == 0 for r in body["rows"])


def test_runs_reject_bad_sources_and_settings(client: TestClient) -> None:
    missing_dir = client.post("/runs", json={"source_dir": "/nonexistent/frames"})
    assert missing_dir.status_code == 422
    assert client.post("/runs", json={"frames": -1}).status_code == 422
    assert client.post("/runs", json={"mode": "fancy"}).status_code == 422
    assert (
        client.post("/runs", json={"learner": {"alpha": 0.5}}).status_code == 422
    )


# ----------------------------------------------------------------------
# sweeps and analysis


def test_sweeps_cover_the_alpha_grid(client: TestClient) -> None:
    response = client.post(
        "/sweeps",
        json={
            "lo": 2.0,
            "hi": 3.0,
            "step": 0.5,
            "frames": 1,
            "learner": {"iterations_per_frame": 100},
            "stream": {"points_per_frame": 100, "seed": 4},
        },
    )
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert [r["alpha"] for r in rows] == [2.0, 2.5, 3.0]
    assert all(r["total_nodes"] > 0 for r in rows)


def test_sweep_grid_validation(client: TestClient) -> None:
    assert (
        client.post(
            "/sweeps", json={"lo": 1.0, "hi": 2.0, "step": 0.5, "frames": 1}
        ).status_code
        == 422
    )


def test_analysis_reproduces_the_design_table(client: TestClient) -> None:
    response = client.post("/analysis", json={"curve": False})
    assert response.status_code == 200
    body = response.json()
    expected = {0.0: 2.891, 0.5: 3.246, 1.5: 3.665, 5.0: 4.470, 10.0: 5.157}
    assert len(body["rows"]) == 5
    for row in body["rows"]:
        assert row["alpha_star"] == pytest.approx(expected[row["ratio"]], abs=0.005)
    assert body["kappa_max"] == pytest.approx(0.9069, abs=5e-5)
    assert "curve_alphas" not in body


def test_analysis_curve_export(client: TestClient) -> None:
    response = client.post(
        "/analysis", json={"ratios": [0.0, 1.5], "curve": True}
    )
    body = response.json()
    assert len(body["curve_values"]) == 2
    assert len(body["curve_values"][0]) == len(body["curve_alphas"])


def test_analysis_grid_validation(client: TestClient) -> None:
    assert (
        client.post("/analysis", json={"grid_lo": 0.5, "curve": False}).status_code
        == 422
    )
