"""Smoke tests for the python bindings: a numpy re-implementation of the received signal
cross-checks the compiled model end to end."""

import json
import math
import os

import numpy as np
import pytest

import risloc

C = 299792458.0


def make_config(**overrides):
    cfg = {
        "stations": {
            "bs": {"position": [0, 0, 0], "orientation": [0, 0, 0], "elements": 4},
            "ris": {"position": [4, 3, 1], "orientation": [0, 0, 0], "elements": 9},
            "ms": {"position": [5, 2, -1], "orientation": [math.pi / 6, 0, 0], "elements": 4},
        },
        "signal": {
            "power_w": 1.0,
            "carrier_hz": 28e9,
            "subcarriers": 1,
            "subcarrier_spacing_hz": 240e3,
        },
        "noise": {"figure_db": 3.0, "temperature_k": 290.0},
        "phase": {"strategy": "proposed", "seed": 1},
        "bounds": {"signaling": "synchronous", "mode": "default",
                   "singular_policy": "pseudo_inverse"},
        "use_ris": True,
        "sweep": [{"axis": "ms_x", "values": [5.0]}],
        "seed": 1,
    }
    cfg.update(overrides)
    return json.dumps(cfg)


def planar_grid(count, spacing, plane):
    root = int(round(math.sqrt(count)))
    pts = []
    for i in range(1, count + 1):
        major, minor = i // root, i % root
        if plane == "xz":
            pts.append([major, 0.0, minor])
        elif plane == "yz":
            pts.append([0.0, major, minor])
        else:
            pts.append([major, minor, 0.0])
    pts = spacing * np.asarray(pts)
    return pts - pts.mean(axis=0)


def rotation(orientation):
    a, b, g = orientation
    rz = np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])
    ry = np.array([[math.cos(b), 0, math.sin(b)], [0, 1, 0], [-math.sin(b), 0, math.cos(b)]])
    rx = np.array([[1, 0, 0], [0, math.cos(g), -math.sin(g)], [0, math.sin(g), math.cos(g)]])
    return rz @ ry @ rx


def numpy_response(cfg_json, phases):
    cfg = json.loads(cfg_json)
    lam = C / cfg["signal"]["carrier_hz"]
    f = cfg["signal"]["carrier_hz"] + cfg["signal"]["subcarrier_spacing_hz"]

    stations = {}
    for name, plane in (("bs", "xz"), ("ris", "yz"), ("ms", "xy")):
        st = cfg["stations"][name]
        local = planar_grid(st["elements"], lam / 2, plane) @ rotation(st["orientation"]).T
        stations[name] = np.asarray(st["position"]) + local

    bs, ris, ms = stations["bs"], stations["ris"], stations["ms"]
    d_bm = np.linalg.norm(
        np.asarray(cfg["stations"]["bs"]["position"])
        - np.asarray(cfg["stations"]["ms"]["position"])
    )
    d_br = np.linalg.norm(
        np.asarray(cfg["stations"]["bs"]["position"])
        - np.asarray(cfg["stations"]["ris"]["position"])
    )
    d_rm = np.linalg.norm(
        np.asarray(cfg["stations"]["ris"]["position"])
        - np.asarray(cfg["stations"]["ms"]["position"])
    )
    rho_bm = lam / (4 * math.pi * d_bm)
    rho_brm = lam / (4 * math.pi * (d_br + d_rm))

    w = 2 * math.pi * f
    n_ms = ms.shape[0]
    mu = np.zeros(bs.shape[0], dtype=complex)
    for b in range(bs.shape[0]):
        acc = 0.0 + 0.0j
        for m in range(n_ms):
            x_m = 1.0 / math.sqrt(n_ms)
            tau = np.linalg.norm(bs[b] - ms[m]) / C
            acc += x_m * rho_bm * np.exp(-1j * w * tau)
            for r in range(ris.shape[0]):
                tau_ris = (
                    np.linalg.norm(bs[b] - ris[r]) + np.linalg.norm(ris[r] - ms[m])
                ) / C
                acc += x_m * rho_brm * np.exp(1j * phases[r]) * np.exp(-1j * w * tau_ris)
        mu[b] = acc
    return mu


def test_version():
    assert risloc.__version__


def test_rotation_matrix_identity():
    r = risloc.rotation_matrix(np.zeros(3))
    assert np.allclose(r, np.eye(3))


def test_element_pair_distance_is_euclidean():
    a = np.array([0.01, -0.02, 0.0])
    b = np.array([-0.03, 0.0, 0.01])
    ca = np.array([0.0, 0.0, 0.0])
    cb = np.array([5.0, 2.0, -1.0])
    d = risloc.element_pair_distance(a, b, ca, cb)
    assert d == pytest.approx(np.linalg.norm((cb + b) - (ca + a)), rel=1e-12)


def test_channel_response_matches_numpy_model():
    cfg = make_config()
    phases = np.asarray(risloc.design_phases(cfg, "random"))
    mu = np.asarray(risloc.channel_response(cfg, 1, phases))
    ref = numpy_response(cfg, phases)
    assert np.linalg.norm(mu - ref) / np.linalg.norm(ref) < 1e-9


def test_bounds_report_and_power_scaling():
    cfg = make_config()
    rep = risloc.compute_bounds(cfg)
    assert rep["peb_m"] > 0
    assert rep["oeb_deg"] == pytest.approx(math.degrees(rep["oeb_rad"]))
    assert rep["mode"] == "two_stage"

    boosted = json.loads(cfg)
    boosted["signal"]["power_w"] = 2.0
    rep2 = risloc.compute_bounds(json.dumps(boosted))
    assert rep2["peb_m"] == pytest.approx(rep["peb_m"] / math.sqrt(2), rel=1e-9)


def test_proposed_design_focuses_the_received_power():
    cfg = make_config()
    mu_proposed = np.asarray(
        risloc.channel_response(cfg, 1, np.asarray(risloc.design_phases(cfg, "proposed")))
    )
    mu_random = np.asarray(
        risloc.channel_response(cfg, 1, np.asarray(risloc.design_phases(cfg, "random")))
    )
    mu_mirror = np.asarray(
        risloc.channel_response(cfg, 1, np.asarray(risloc.design_phases(cfg, "mirror")))
    )
    assert np.linalg.norm(mu_proposed) > np.linalg.norm(mu_random)
    assert np.linalg.norm(mu_proposed) > np.linalg.norm(mu_mirror)


def test_run_sweep_csv():
    cfg = make_config()
    csv = risloc.run_sweep_csv(cfg)
    lines = csv.strip().split("\n")
    assert len(lines) == 2
    assert lines[0].startswith("ms_x,strategy,peb_m")
    assert risloc.run_sweep_csv(cfg) == csv  # deterministic


def test_mle_trials_smoke():
    cfg = json.loads(make_config())
    cfg["stations"]["ris"]["position"] = [1.5, 1.5, 0.5]
    cfg["stations"]["ris"]["elements"] = 16
    cfg["stations"]["bs"]["elements"] = 16
    cfg["stations"]["ms"]["position"] = [2.0, 1.0, -0.5]
    cfg["signal"]["subcarriers"] = 2
    cfg["mle"] = {
        "box_half_width": [0.0075, 0.0075, 0.0075, 0.2, 0.2, 0.2],
        "grid_points": [5, 5, 5, 1, 1, 1],
        "estimate": [True, True, True, False, False, False],
        "refinement": "local_descent",
        "max_refine_iters": 20,
        "snapshots": 1,
        "trials": 3,
    }
    out = risloc.mle_trials(json.dumps(cfg), 3)
    assert out["trials"] == 3
    assert out["effective_snr_db"] > 25
    assert 0 < out["rmse_position_m"] < 10 * out["peb_m"]


def test_shipped_configs_parse():
    cfg_dir = os.environ.get("RISLOC_CONFIG_DIR")
    if not cfg_dir:
        pytest.skip("RISLOC_CONFIG_DIR not set")
    names = [n for n in os.listdir(cfg_dir) if n.endswith(".json")]
    assert len(names) >= 10
    for name in names:
        with open(os.path.join(cfg_dir, name)) as f:
            json.load(f)
