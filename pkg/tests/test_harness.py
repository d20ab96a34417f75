import json
import math

import pytest
from click.testing import CliRunner
from hypothesis import given, settings, strategies as st

from jrcsim.channel import ConfigError
from jrcsim.harness.cli import main
from jrcsim.harness.config import default_config, load_config, loads
from jrcsim.harness.experiments import ExperimentSpec, run_experiment
from jrcsim.harness.tables import Column, ResultTable, emit, load, render


def test_defaults_match_reference_parameters():
    cfg = default_config()
    p = cfg.system_params()
    assert p.carrier_frequency == 28e9 and p.bandwidth == 800e6
    assert 10 * math.log10(p.noise_psd) + 30 == pytest.approx(-174.0)
    assert 10 * math.log10(p.tx_gain) == pytest.approx(18.0)
    assert cfg.scenario_config().tx_power == 10.0
    a = cfg.aoi_params()
    assert (a.sinr_threshold, a.link_distance, a.aoi_max) == (5.0, 200.0, 4.0)
    assert cfg["game"]["penalty_rate_bps"] == 10e9
    assert cfg.capacity_mode.value == "literal"


def test_negative_bandwidth_names_field():
    with pytest.raises(ConfigError, match="bandwidth"):
        loads('{"system": {"bandwidth_hz": -1}}')


@pytest.mark.parametrize("text, word", [
    ('{"system": {"bandwith_hz": 1}}', "bandwith_hz"),
    ('{"radar": {}}', "radar"),
    ('{"game": {"capacity_mode": "exact"}}', "capacity_mode"),
    ('{"scenario": {"num_vehicles": 2.5}}', "num_vehicles"),
    ('{"experiment": {"seeds": []}}', "seeds"),
    ('{"experiment": {"id": "fig99"}}', "experiment.id"),
    ('{"scenario": {"rcs_case": "tiny"}}', "rcs_case"),
    ('{"aoi": {"path_loss_exponent": 1.0}}', "path_loss_exponent"),
])
def test_config_rejections(text, word):
    with pytest.raises(ConfigError, match=word):
        loads(text)


def test_parse_error_reports_position():
    with pytest.raises(ConfigError, match=r"cfg.json:3:\d+"):
        loads('{\n  "system": {\n    "bandwidth_hz": ,\n  }\n}', "cfg.json")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.json")


def test_config_round_trip(tmp_path):
    cfg = loads('{"scenario": {"num_vehicles": 4, "alignment": 0.5}, "game": {"capacity_mode": "consistent"}}')
    path = tmp_path / "eff.json"
    path.write_text(cfg.dumps())
    again = load_config(path)
    assert again.sections == cfg.sections
    assert again.dumps() == cfg.dumps()
    assert again.digest() == cfg.digest()
    assert len(cfg.digest()) == 12


def _table():
    t = ResultTable("demo", (Column("n", "int"), Column("x", "float", "bit"),
                             Column("tag", "str"), Column("ok", "bool")),
                    metadata={"seed": 3, "runtime_s": 1.25})
    t.add(1, 1 / 3, "a", True)
    t.add(2, 1e-17, "b", False)
    t.add(3, math.inf, "c", True)
    return t


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_emit_fixpoint(tmp_path, fmt):
    first = emit(_table(), tmp_path / f"a.{fmt}", fmt)
    loaded = load(first)
    second = emit(loaded, tmp_path / f"b.{fmt}", fmt)
    assert first.read_bytes() == second.read_bytes()
    assert loaded.rows[0][1] == float(f"{1 / 3:.12g}")
    raw = first.read_bytes()
    assert raw.isascii() and b"\r" not in raw
    assert b"runtime" not in raw


def test_twelve_significant_digits():
    text = render(_table(), "csv")
    assert "0.333333333333," in text
    assert "1e-17" in text


def test_empty_table_is_header_only(tmp_path):
    t = ResultTable("empty", (Column("a", "int"), Column("b", "float")))
    path = emit(t, tmp_path / "e.csv")
    lines = path.read_text().splitlines()
    assert lines[-1] == "a,b"
    assert not [line for line in lines if not line.startswith("#") and line != "a,b"]
    assert load(path).rows == []


def test_row_schema_enforced():
    t = ResultTable("t", (Column("a", "int"),))
    with pytest.raises(ValueError):
        t.add(1, 2)
    with pytest.raises(ValueError):
        t.add(1.5)
    s = ResultTable("s", (Column("name", "str"),))
    with pytest.raises(ValueError):
        s.add("caf\u00e9")


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(-10**6, 10**6),
                          st.floats(allow_nan=False, width=64),
                          st.booleans()), max_size=20))
def test_render_is_a_fixpoint(tmp_path_factory, rows):
    t = ResultTable("p", (Column("i", "int"), Column("x", "float"), Column("b", "bool")), rows)
    d = tmp_path_factory.mktemp("fx")
    for fmt in ("csv", "jsonl"):
        once = render(t, fmt)
        (d / "t").write_text(once)
        assert render(load(d / "t"), fmt) == once


def _spec(experiment, seeds=(0,), **sections):
    cfg = default_config().with_overrides(experiment={"id": experiment, "seeds": list(seeds)}, **sections)
    return ExperimentSpec.from_config(cfg)


def _increasing(series):
    """Exponent strictly up; loss strictly up until it rounds to 1.0."""
    xs = [r["loss_exponent"] for r in series]
    losses = [r["packet_loss"] for r in series]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    assert all(b > a or b == a == 1.0 for a, b in zip(losses, losses[1:]))


def test_packet_loss_sweep_monotone():
    rows = run_experiment(_spec("packet-loss-sweep")).tables[0].records()
    for a in {r["a"] for r in rows}:
        _increasing(sorted((r for r in rows if r["a"] == a), key=lambda r: r["density"]))
    for d in {r["density"] for r in rows}:
        _increasing(sorted((r for r in rows if r["density"] == d), key=lambda r: r["a"]))


def test_aoi_sweep_columns():
    table = run_experiment(_spec("aoi-sweep")).tables[0]
    assert [c.name for c in table.columns][:4] == ["a", "success_probability", "effective_load", "average_aoi"]
    for r in table.records():
        rho = r["effective_load"]
        assert r["average_aoi"] == pytest.approx(1 + 1 / rho + rho ** 2 / (1 - rho), rel=1e-9)


def test_algorithm_comparison_columns():
    cfg = default_config().with_overrides(experiment={
        "id": "algorithm-comparison", "seeds": [0],
        "params": {"vehicle_counts": [3], "algorithms": ["ctra", "uniform", "random"]}})
    table = run_experiment(ExperimentSpec.from_config(cfg)).tables[0]
    assert [c.name for c in table.columns] == ["N", "algorithm", "seed", "total_radar_mi",
                                               "utility", "iterations", "feasible"]
    assert table.column("algorithm") == ["ctra", "uniform", "random"]


def test_unknown_preset_param():
    cfg = default_config().with_overrides(experiment={"id": "ctra-convergence", "params": {"Ns": [3]}})
    with pytest.raises(ConfigError, match="Ns"):
        run_experiment(ExperimentSpec.from_config(cfg))


def test_strategy_trace_starts_at_minimum():
    cfg = default_config().with_overrides(scenario={"num_vehicles": 4})
    spec = ExperimentSpec.from_config(cfg.with_overrides(experiment={"id": "strategy-trace"}))
    table = run_experiment(spec).tables[0]
    first = [r for r in table.records() if r["step"] == 0]
    assert [r["ratio"] for r in first] == [0.1] * 4


def test_c3_filter_restricts_ratios():
    cfg = default_config().with_overrides(scenario={"num_vehicles": 4}, game={"apply_c3_filter": True},
                                          experiment={"id": "capacity-report"})
    table = run_experiment(ExperimentSpec.from_config(cfg)).tables[0]
    assert max(table.column("ratio")) <= 0.7 + 1e-12


def test_c3_filter_empty_is_config_error():
    cfg = default_config().with_overrides(game={"apply_c3_filter": True}, aoi={"aoi_max": 1.0},
                                          experiment={"id": "custom"})
    with pytest.raises(ConfigError, match="aoi"):
        run_experiment(ExperimentSpec.from_config(cfg))


def _write_config(tmp_path, body):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_cli_validate(tmp_path):
    runner = CliRunner()
    ok = runner.invoke(main, ["validate", "--config", _write_config(tmp_path, {"scenario": {"num_vehicles": 3}})])
    assert ok.exit_code == 0 and ok.output.startswith("ok ")
    bad = runner.invoke(main, ["validate", "--config", _write_config(tmp_path, {"system": {"bandwidth_hz": -5}})])
    assert bad.exit_code == 1
    dumped = runner.invoke(main, ["validate", "--dump"])
    assert json.loads(dumped.output) == default_config().sections


def test_cli_run_and_report(tmp_path):
    runner = CliRunner()
    cfg = _write_config(tmp_path, {"scenario": {"num_vehicles": 3}})
    out = tmp_path / "out"
    res = runner.invoke(main, ["run", "--config", cfg, "--experiment", "capacity-report",
                               "--seed", "1", "--seed", "2", "--out", str(out), "--format", "jsonl",
                               "--mode", "consistent", "--c3", "off"])
    assert res.exit_code == 0, res.output
    table = load(out / "capacity_report.jsonl")
    assert sorted(set(table.column("seed"))) == [1, 2]
    assert table.metadata["capacity_mode"] == "consistent"
    assert json.loads((out / "config.json").read_text())["experiment"]["seeds"] == [1, 2]
    rep = runner.invoke(main, ["report", str(out / "capacity_report.jsonl")])
    assert rep.exit_code == 0 and "6 rows" in rep.output


def test_cli_exit_codes(tmp_path):
    runner = CliRunner()
    crowded = _write_config(tmp_path, {"scenario": {"num_vehicles": 15}})
    res = runner.invoke(main, ["run", "--config", crowded, "--experiment", "custom", "--out", str(tmp_path / "a")])
    assert res.exit_code == 3
    stuck = _write_config(tmp_path, {"scenario": {"num_vehicles": 6}, "game": {"max_iterations": 1}})
    res = runner.invoke(main, ["run", "--config", stuck, "--experiment", "custom", "--out", str(tmp_path / "b")])
    assert res.exit_code == 2
    res = runner.invoke(main, ["run", "--config", str(tmp_path / "missing.json")])
    assert res.exit_code == 1


@pytest.mark.parametrize("experiment", ["ctra-convergence", "rcs-cases", "strategy-trace"])
def test_preset_output_deterministic(tmp_path, experiment):
    cfg = default_config().with_overrides(scenario={"num_vehicles": 4})
    spec = ExperimentSpec.from_config(cfg.with_overrides(experiment={"id": experiment, "seeds": [5]}))
    a = emit(run_experiment(spec).tables[0], tmp_path / "a.csv")
    b = emit(run_experiment(spec).tables[0], tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
