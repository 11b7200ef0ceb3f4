"""Unit tests for the experiment runner: config validation, the reseed
policy, report serialization, and the command line entry point."""

import json

import pytest

from bernstrings import experiments
from bernstrings.experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    ResultRow,
    emit_report,
    main,
    report_to_dict,
    run,
)


def fast_config(**overrides):
    base = dict(experiment="mixture-tables", seed=0)
    base.update(overrides)
    return ExperimentConfig(**base)


def fake_row(name="synthetic", verdict=True, statistical=True, theoretical=1 / 3):
    return ResultRow(
        name=name,
        theoretical=theoretical,
        empirical=theoretical,
        statistic=0.0,
        p_value=0.5,
        verdict=verdict,
        provenance="synthetic row for runner tests",
        statistical=statistical,
    )


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError, match="unknown experiment"):
        run(ExperimentConfig(experiment="nope"))


def test_fixed_parameter_experiments_reject_model_flags():
    with pytest.raises(ConfigError, match="fixed model parameters"):
        run(ExperimentConfig(experiment="swapped-dependence", a=2.0))
    with pytest.raises(ConfigError, match="deterministic"):
        run(ExperimentConfig(experiment="mixture-tables", replicates=1000))


def test_parameter_range_checks():
    with pytest.raises(ConfigError, match="a must be positive"):
        run(ExperimentConfig(experiment="bern-counts", a=0.0))
    with pytest.raises(ConfigError, match="seed"):
        run(fast_config(seed=-1))
    with pytest.raises(ConfigError, match="replicates"):
        run(ExperimentConfig(experiment="bern-counts", replicates=10))
    with pytest.raises(ConfigError, match="1 <= n <= 8"):
        run(ExperimentConfig(experiment="feller-uniformity", n=9))
    with pytest.raises(ConfigError, match="enumeration horizon"):
        run(ExperimentConfig(experiment="enumeration-oracle", n=30))
    with pytest.raises(ConfigError, match="exceed the enumeration horizon"):
        run(ExperimentConfig(experiment="enumeration-oracle", n=6, dmax=7))


# ---------------------------------------------------------------------------
# reseed policy
# ---------------------------------------------------------------------------


def test_statistical_failure_triggers_one_reseed(monkeypatch):
    calls = []

    def flaky(cfg, seed):
        calls.append(seed)
        return [fake_row(verdict=len(calls) > 1, statistical=True)]

    monkeypatch.setitem(experiments._RUNNERS, "mixture-tables", flaky)
    report = run(fast_config(seed=7))
    assert calls == [7, 8]
    assert report.attempts == (7, 8)
    assert report.passed


def test_second_failure_is_final(monkeypatch):
    monkeypatch.setitem(
        experiments._RUNNERS,
        "mixture-tables",
        lambda cfg, seed: [fake_row(verdict=False, statistical=True)],
    )
    report = run(fast_config(seed=3))
    assert report.attempts == (3, 4)
    assert not report.passed


def test_deterministic_failure_never_reseeds(monkeypatch):
    calls = []

    def broken(cfg, seed):
        calls.append(seed)
        return [fake_row(verdict=False, statistical=False)]

    monkeypatch.setitem(experiments._RUNNERS, "mixture-tables", broken)
    report = run(fast_config(seed=11))
    assert calls == [11]
    assert report.attempts == (11,)
    assert not report.passed


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_empty_test_list_is_valid_json():
    report = ExperimentReport(
        experiment="mixture-tables", config={}, versions={}, attempts=(0,),
        tests=(), passed=True, wall_clock_s=0.01,
    )
    parsed = json.loads(emit_report(report, "json"))
    assert parsed["tests"] == []


def test_json_round_trip():
    report = run(fast_config())
    assert json.loads(emit_report(report, "json")) == report_to_dict(report)


def test_csv_row_count_and_header():
    report = run(fast_config())
    lines = emit_report(report, "csv").decode().splitlines()
    assert lines[0] == "experiment,test,theoretical,empirical,statistic,p_value,verdict"
    assert len(lines) == len(report.tests) + 1
    assert all(line.endswith(("pass", "fail")) for line in lines[1:])


def test_floats_canonicalized_to_12_digits(monkeypatch):
    monkeypatch.setitem(
        experiments._RUNNERS,
        "mixture-tables",
        lambda cfg, seed: [fake_row(theoretical=1.0 / 3.0)],
    )
    report = run(fast_config())
    d = report_to_dict(report)
    assert d["tests"][0]["theoretical"] == float(f"{1.0 / 3.0:.12g}")
    assert b"0.333333333333" in emit_report(report, "json")


def test_rejects_unknown_format():
    report = run(fast_config())
    with pytest.raises(ConfigError):
        emit_report(report, "yaml")


def test_every_row_carries_provenance():
    report = run(fast_config())
    assert report.tests
    assert all(t.provenance for t in report.tests)


def test_versions_recorded():
    report = run(fast_config())
    assert set(report.versions) >= {"bernstrings", "numpy", "scipy"}


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


def drop_wall_clock(d):
    out = dict(d)
    out.pop("wall_clock_s")
    return out


def test_same_seed_same_report():
    r1 = report_to_dict(run(fast_config(seed=5)))
    r2 = report_to_dict(run(fast_config(seed=5)))
    assert drop_wall_clock(r1) == drop_wall_clock(r2)


def test_same_seed_same_report_with_sampling():
    cfg = dict(experiment="feller-uniformity", n=3, replicates=2000, seed=9)
    r1 = report_to_dict(run(ExperimentConfig(**cfg)))
    r2 = report_to_dict(run(ExperimentConfig(**cfg)))
    assert drop_wall_clock(r1) == drop_wall_clock(r2)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_main_success_prints_json(capsys):
    code = main(["--experiment", "mixture-tables"])
    captured = capsys.readouterr()
    assert code == 0
    parsed = json.loads(captured.out)
    assert parsed["experiment"] == "mixture-tables"
    assert "pass" in captured.err


def test_main_config_error_exit_2(capsys):
    code = main(["--experiment", "swapped-dependence", "--a", "2"])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_main_argparse_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["--experiment", "not-a-thing"])
    assert exc.value.code == 2


def test_main_failure_exit_1(monkeypatch, capsys):
    monkeypatch.setitem(
        experiments._RUNNERS,
        "mixture-tables",
        lambda cfg, seed: [fake_row(verdict=False, statistical=False)],
    )
    code = main(["--experiment", "mixture-tables"])
    assert code == 1
    assert "FAIL" in capsys.readouterr().err


def test_main_writes_output_file(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code = main([
        "--experiment", "mixture-tables", "--format", "csv", "--out", str(out),
    ])
    capsys.readouterr()
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("experiment,")
    assert len(lines) > 1
