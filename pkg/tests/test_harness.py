import json
import math

import numpy as np
import pytest

from carleson_lab.core_math import DomainError, ParamSet
from carleson_lab.harness import (
    SWEEPS,
    DecayFit,
    ExperimentConfig,
    GridSpec,
    RefinementError,
    SweepResult,
    decay_fit,
    dumps_report,
    emit_report,
    error_family,
    k_t_grid,
    multiplier_points,
    positive_axis,
    ray,
    render_svg,
    report_dict,
    run_sweeps,
    signed_axis,
    sobolev_check,
    summary_csv,
    sweep_minor_box,
)
from carleson_lab.multiplier import MajorBox, k_t

SMALL = {"minor-box": (5, 8), "error-term": (5, 8), "kt-difference": (4, 7), "ttstar": (6, 12, 2),
         "ttstar-continuous": (4, 7)}


def small_config(**kw):
    base = dict(windows=dict(SMALL), grid=GridSpec(5, 8, 8), ttstar_pairs=40, ttstar_instances=2,
                continuous_pairs=10, continuous_instances=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_decay_fit_examples():
    f = decay_fit([(j, 2.0 ** (-j / 2)) for j in range(4, 12)])
    assert abs(f.slope + 0.5) < 1e-14 and abs(f.r_squared - 1) < 1e-14 and f.window == (4, 11)
    const = decay_fit([(j, 3.0) for j in range(5)])
    assert const.slope == 0 and const.r_squared == 1
    noise = np.random.default_rng(0).uniform(-1, 1, 12)
    nf = decay_fit([(j, 2.0 ** (-j / 2) * (1 + 0.01 * e)) for j, e in zip(range(4, 16), noise)])
    assert abs(nf.slope + 0.5) <= 0.02
    with pytest.raises(DomainError):
        decay_fit([(1, 1.0), (2, 1.0), (3, 1.0)])
    with pytest.raises(DomainError):
        decay_fit([(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)])
    assert set(f.to_dict()) == {"slope", "intercept", "r2", "window"}


def test_grid_spec_shape_and_nesting():
    g = GridSpec()
    assert g.shape == (64, 64)
    assert GridSpec.from_size(64) == g
    with pytest.raises(DomainError):
        GridSpec.from_size(7)
    coarse, fine = ray(1e-4, 0.5, 29), ray(1e-4, 0.5, 58)
    assert np.allclose(fine[::2], coarse, rtol=1e-15, atol=0)
    box = MajorBox(10)
    xi = signed_axis(box.xi_half_width, 1e-5, g)
    lam = positive_axis(box.lambda_half_width, g)
    assert xi.size == 64 and lam.size == 64
    assert np.sum(np.abs(np.abs(xi) - box.xi_half_width) < 1e-5 * box.xi_half_width) == 4
    assert lam.min() == 0 and lam.max() == 0.5 and xi.min() == -0.5
    assert GridSpec.from_dict(g.to_dict()) == g


def test_multiplier_points_flags_consistent():
    cfg = ExperimentConfig()
    xi, lam, inb = multiplier_points(10, cfg, "minor-box")
    assert xi.size == 64 * 64 + 64
    box = MajorBox(10)
    assert np.array_equal(inb, (np.abs(xi) <= box.xi_half_width) & (np.abs(lam) <= box.lambda_half_width))
    xi2, lam2, _ = multiplier_points(10, cfg, "minor-box")
    assert np.array_equal(xi, xi2) and np.array_equal(lam, lam2)


def test_config_round_trip():
    cfg = ExperimentConfig(params=ParamSet(c=1.4, eps=0.15, nu=0.01, delta1=0.1, delta2=5e-5, nuPrime=3e-3),
                           seed=2 ** 63 + 5, threads=2, grid=GridSpec(10, 20, 4), record_wall_time=True,
                           outputs={"path": "x.json"})
    d = json.loads(json.dumps(cfg.to_dict()))
    back = ExperimentConfig.from_dict(d)
    assert back.to_dict() == cfg.to_dict()
    with pytest.raises(DomainError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(DomainError):
        ExperimentConfig(seed=-1)
    with pytest.raises(DomainError):
        ExperimentConfig(windows={"minor-box": (9, 8)})


def test_k_t_grid_matches_compensated_sum():
    rng = np.random.default_rng(1)
    a1, a2 = rng.uniform(-0.5, 0.5, 5), rng.uniform(0, 0.5, 4)
    for t in (37, 1000, 70000):
        K = k_t_grid(t, a1, a2, 1.5, block=1 << 12)
        ref = np.array([[k_t(t, x, y) for y in a2] for x in a1])
        assert np.max(np.abs(K - ref)) < 1e-12


def test_sobolev_fixtures():
    g = np.array([1.0, -2.0, 0.5])
    const = sobolev_check(lambda ts: np.tile(g, (len(ts), 1)), (0.0, 1.0))
    assert const.a == 0 and abs(const.ratio - 1) < 1e-12 and abs(const.lhs - const.A) < 1e-15
    lin = sobolev_check(lambda ts: np.outer(ts, g), (0.0, 1.0))
    ng = np.linalg.norm(g)
    assert abs(lin.lhs - ng) < 1e-12 and abs(lin.A - ng) < 1e-12 and abs(lin.a - ng) < 1e-9
    assert abs(lin.ratio - 0.5) <= 1e-6
    sampled = sobolev_check(np.outer(np.linspace(0, 1, 9), g), (0.0, 1.0))
    assert abs(sampled.ratio - 0.5) <= 1e-6
    with pytest.raises(RefinementError):
        sobolev_check(lambda ts: np.outer(np.sin(1e4 * ts), g), (0.0, 1.0), max_halvings=2)
    with pytest.raises(RefinementError):
        sobolev_check(np.outer(np.sin(40 * np.linspace(0, 1, 9)), g), (0.0, 1.0))
    with pytest.raises(DomainError):
        sobolev_check(np.ones((4, 2)), (0.0, 1.0))


def test_error_family_shape():
    fam = error_family(6)
    v = fam(np.array([0.0, 1e-3]))
    assert v.shape == (2, 32)


def test_report_schema_svg_and_csv():
    res = SweepResult("minor-box", [1, 2, 3, 4], [1.0, 0.5, 0.25, 0.125],
                      decay_fit([(1, 1.0), (2, 0.5), (3, 0.25), (4, 0.125)]), True, "slope <= -0.025")
    res2 = SweepResult("kt-difference", [1, 2, 3, 4], [1.0, 0.9, 0.8, 0.7], None, False, "x")
    cfg = ExperimentConfig()
    rep = report_dict([res, res2], cfg)
    assert set(rep) == {"config", "sweeps", "versions", "timings"}
    s = rep["sweeps"][0]
    assert set(s) >= {"name", "paperRef", "scaleIndex", "maxValue", "fit", "pass", "criterion"}
    assert set(s["fit"]) == {"slope", "intercept", "r2", "window"}
    assert rep["config"]["grid"]["shape"] == [64, 64]
    assert "wallSeconds" in rep["timings"] and isinstance(rep["timings"]["wallSeconds"], str)
    svg = render_svg(rep)
    assert svg.count("<polyline") == 2 and "http" in svg.split("\n")[0] and "href" not in svg
    assert summary_csv(rep).splitlines()[0] == "name,scale_index,max_value,slope,intercept,r2,pass"
    assert json.loads(dumps_report(rep)) == json.loads(json.dumps(rep))


def test_small_suite_deterministic_and_written(tmp_path):
    cfg = small_config()
    a = run_sweeps(cfg)
    b = run_sweeps(cfg)
    assert [r.name for r in a] == ["minor-box", "error-term", "kt-difference", "ttstar-constant",
                                   "ttstar-uniform", "ttstar-resonant", "ttstar-continuous"]
    ra, rb = dumps_report(report_dict(a, cfg)), dumps_report(report_dict(b, cfg))
    assert ra == rb
    emit_report(a, cfg, tmp_path / "r.json", tmp_path / "csv", tmp_path / "r.svg", tmp_path / "s.csv")
    assert (tmp_path / "r.json").read_text() == ra
    names = sorted(p.name for p in (tmp_path / "csv").iterdir())
    assert "minor-box-mode0.csv" in names and "ttstar-resonant.csv" in names
    for r in a:
        assert r.fit is None or len(r.scale_index) >= 4


def test_parallel_matches_serial():
    cfg = small_config(windows={"minor-box": (5, 8)})
    serial = sweep_minor_box(cfg)
    par = sweep_minor_box(small_config(windows={"minor-box": (5, 8)}, threads=2))
    assert serial.max_value == par.max_value


def test_finer_grid_never_decreases_maxima():
    cfg = small_config(windows={"minor-box": (5, 9)})
    coarse = sweep_minor_box(cfg)
    fine = sweep_minor_box(small_config(windows={"minor-box": (5, 9)}, grid=cfg.grid.refined()))
    assert all(f >= c for f, c in zip(fine.max_value, coarse.max_value))


def test_unknown_sweep_rejected():
    with pytest.raises(DomainError):
        run_sweeps(small_config(), ["nope"])
