import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lipdecay.harness.config import ConfigError, load_config, parse_config
from lipdecay.harness.plots import PLOT_METRICS, emit_plots
from lipdecay.harness.svg import Series, line_plot
from lipdecay.harness.sweep import (AGG_COLUMNS, SweepSpec, aggregate_header, default_arms, default_base,
                                    read_aggregate, run_sweep)
from lipdecay.harness.targets import (RECIPROCAL_GUARD, NoiseModel, TargetFunction, generate_dataset,
                                      make_sampler, truncated_normal)
from lipdecay.linalg import make_rng
from lipdecay.scheduler import SchedulerConfig
from lipdecay.trainer import read_log_csv

SVG_NS = "{http://www.w3.org/2000/svg}"


# -- targets -------------------------------------------------------------------------

def test_noiseless_sine():
    data = generate_dataset(TargetFunction("sine"), NoiseModel(0.0), 200, make_rng(0))
    assert np.array_equal(data.ys, np.sin(data.xs[:, 0]))


def test_builtin_targets():
    x = np.array([-4.0, 1.0, 4.0])
    assert np.allclose(TargetFunction("cubic_sqrt")(x), [-62.0, 2.0, 66.0])
    assert np.allclose(TargetFunction("reciprocal")(x), [-0.25, 1.0, 0.25])


def test_custom_target():
    t = TargetFunction("custom", "sin(x) + x ** 2")
    assert np.allclose(t(np.array([0.0, 2.0])), [0.0, np.sin(2.0) + 4.0])
    assert TargetFunction("custom", "3.0")(np.zeros(4)).shape == (4,)
    with pytest.raises(ValueError):
        TargetFunction("custom")
    with pytest.raises(SyntaxError):
        TargetFunction("custom", "x +")
    with pytest.raises(ValueError):
        TargetFunction("gaussian_bump")


def test_dataset_generation_is_seeded():
    t, n = TargetFunction(), NoiseModel(0.03)
    a = generate_dataset(t, n, 50, make_rng(7))
    b = generate_dataset(t, n, 50, make_rng(7))
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)


def test_unit_noise_variance():
    N = 20000
    data = generate_dataset(TargetFunction("sine"), NoiseModel(1.0), N, make_rng(1))
    resid = data.ys - np.sin(data.xs[:, 0])
    assert abs(np.var(resid) - 1.0) <= 0.1


def test_reciprocal_guard():
    x = TargetFunction("reciprocal").sample_inputs(200000, make_rng(2))
    assert np.min(np.abs(x)) >= RECIPROCAL_GUARD


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(-0.1)
    with pytest.raises(ValueError):
        NoiseModel(float("nan"))
    with pytest.raises(ValueError):
        generate_dataset(TargetFunction(), NoiseModel(), 0, make_rng(0))


def test_truncated_sampler_stays_in_box():
    x = truncated_normal(5000, 1.5, make_rng(3))
    assert x.shape == (5000,) and np.max(np.abs(x)) <= 1.5
    xs, ys = make_sampler(TargetFunction(), NoiseModel(0.0), box=1.5)(100, make_rng(4))
    assert np.max(np.abs(xs)) <= 1.5 and np.allclose(ys, TargetFunction()(xs[:, 0]))


# -- sweeps ----------------------------------------------------------------------------

def tiny_spec(**kw):
    base = dict(axis="N", values=(6,), n_seeds=1, base=default_base().replace(p=4, T=2, lip_samples=16),
                arms={"decay": default_arms()["decay"]})
    base.update(kw)
    return SweepSpec(**base)


def test_sweep_row_count():
    rows = run_sweep(tiny_spec()).aggregate_rows()
    assert len(rows) == 3
    assert [r["t"] for r in rows] == [0, 1, 2]


def test_sweep_row_count_multi():
    spec = tiny_spec(values=(6, 9), n_seeds=2, arms=default_arms())
    rows = run_sweep(spec).aggregate_rows()
    assert len(rows) == 2 * 2 * 3
    assert all(r["n_seeds"] == 2 and r["n_failed"] == 0 for r in rows)


def test_aggregate_matches_per_seed_logs(tmp_path):
    spec = tiny_spec(values=(6, 10), n_seeds=3, arms=default_arms())
    res = run_sweep(spec)
    agg_path = res.write(tmp_path)
    rows = read_aggregate(agg_path)
    for row in rows:
        logs = [read_log_csv(p) for p in sorted((tmp_path / row["arm"] / f"N={int(row['value'])}").glob("log_seed*.csv"))]
        assert len(logs) == 3
        i = int(row["t"])
        for col in AGG_COLUMNS:
            vals = np.array([lg[col][i] for lg in logs])
            assert row[f"{col}_mean"] == pytest.approx(np.mean(vals), abs=1e-12, rel=1e-12, nan_ok=True), col
            assert row[f"{col}_std"] == pytest.approx(np.std(vals), abs=1e-12, rel=1e-12, nan_ok=True), col
    with open(agg_path) as fh:
        assert next(csv.reader(fh)) == aggregate_header()
    assert json.loads((tmp_path / "sweep.json").read_text())["axis"] == "N"
    assert (tmp_path / "summary.csv").read_text().count("\n") == 1 + 2 * 3 * 2


def test_arms_are_paired():
    res = run_sweep(tiny_spec(n_seeds=2, arms=default_arms()))
    for s in (0, 1):
        dec = next(c for c in res.cells if c.arm == "decay" and c.seed == s)
        con = next(c for c in res.cells if c.arm == "constant" and c.seed == s)
        assert dec.log.init_params == con.log.init_params
        r0, s0 = dec.log.records[0], con.log.records[0]
        assert r0.mse_risk == s0.mse_risk and r0.lip_bound == s0.lip_bound


def test_axis_values_change_setup():
    spec = tiny_spec(axis="P", values=(10, 20))
    assert spec.cell_setup(10) == (spec.N, 4, spec.beta)
    assert spec.cell_setup(20)[1] == 9
    with pytest.raises(ValueError):
        tiny_spec(axis="P", values=(11,))
    assert tiny_spec(axis="beta", values=(1.0,)).cell_setup(1.0)[2] == 1.0
    with pytest.raises(ValueError):
        tiny_spec(axis="width", values=(1,))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_failed_cells_are_flagged():
    # an absurd constant rate overflows within a couple of steps
    arms = {"wild": SchedulerConfig(mode="constant", alpha_const=1e6), "decay": default_arms()["decay"]}
    res = run_sweep(tiny_spec(n_seeds=2, arms=arms, base=default_base().replace(p=4, T=30, lip_samples=0)))
    assert len(res.failed) == 2 and all(c.arm == "wild" and c.error for c in res.failed)
    rows = res.aggregate_rows()
    assert {r["arm"] for r in rows} == {"decay"}


def test_test_risk_is_measured():
    res = run_sweep(tiny_spec(test_samples=500))
    risks = res.test_risks("decay", 6)
    assert risks.shape == (1,) and np.isfinite(risks[0]) and risks[0] >= 0


def test_sweep_spec_roundtrip():
    spec = tiny_spec(arms=default_arms(), target=TargetFunction("custom", "x"))
    assert SweepSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    with pytest.raises(ValueError):
        SweepSpec.from_dict({"axis": "N", "values": [5], "bogus": 1})


def test_parallel_matches_serial():
    spec = tiny_spec(values=(6, 8), n_seeds=2)
    a = run_sweep(spec).aggregate_rows()
    b = run_sweep(spec.__class__(**{**spec.__dict__, "n_jobs": 2})).aggregate_rows()
    for ra, rb in zip(a, b):
        for k in ra:
            if not k.startswith("wallclock"):
                assert ra[k] == rb[k] or (ra[k] != ra[k] and rb[k] != rb[k]), k


# -- config ------------------------------------------------------------------------------

def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    for path in root.glob("*.json"):
        cfg = load_config(path)
        if cfg.raw.get("sweep"):
            assert cfg.sweep_spec().n_seeds >= 1


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_config({"nonsense": 1})
    with pytest.raises(ConfigError):
        parse_config({"data": {"target": "nope"}})
    with pytest.raises(ConfigError):
        parse_config({"train": {"p": -3}})


# -- plots --------------------------------------------------------------------------------

def _series_groups(svg_path):
    root = ET.parse(svg_path).getroot()
    assert root.tag == SVG_NS + "svg"
    return [g for g in root.iter(SVG_NS + "g") if g.get("class") == "series"]


def test_plots_overlay_two_arms(tmp_path):
    spec = tiny_spec(values=(6, 9), n_seeds=2, arms=default_arms())
    agg = run_sweep(spec).write(tmp_path / "run")
    paths = emit_plots(agg, tmp_path / "plots")
    per_value = [p for p in paths if "__N=" in p.name]
    assert len(per_value) == len(PLOT_METRICS) * 2
    for p in per_value:
        groups = _series_groups(p)
        assert len(groups) == 2
        assert {g.get("data-label") for g in groups} == {"decay", "constant"}
    by_axis = [p for p in paths if "__by_N" in p.name]
    assert len(by_axis) == len(PLOT_METRICS) * 2
    assert all(len(_series_groups(p)) == 2 for p in by_axis)


def test_plot_skips_empty_metric(tmp_path):
    spec = tiny_spec(base=default_base().replace(p=4, T=2, lip_samples=0))
    agg = run_sweep(spec).write(tmp_path / "run")
    with pytest.warns(RuntimeWarning, match="lip_empirical"):
        paths = emit_plots(agg, tmp_path / "plots")
    assert not any("lip_empirical" in p.name for p in paths)
    assert paths


def test_line_plot_handles_constant_series():
    svg = line_plot([Series("flat", np.arange(3.0), np.ones(3), np.zeros(3))], title="a & b")
    root = ET.fromstring(svg)
    assert root.tag == SVG_NS + "svg"


def test_read_aggregate_rejects_bad_file(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError):
        read_aggregate(p)
