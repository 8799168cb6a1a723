import json
from pathlib import Path

import jsonschema
import pytest

from poissonlie import cli
from poissonlie.cli import (
    CheckRecord,
    ConfigError,
    ResidualReport,
    SuiteConfig,
    emit_report,
    load_schema,
    main,
    run_suite,
)

GOLDEN = Path(__file__).parent / "golden" / "cdybe_sl2_nu0.35_seed42.json"


def test_config_defaults():
    cfg = SuiteConfig(algebra="su2").validate()
    assert cfg.theta == 0.3 and cfg.nu is None and cfg.samples == 100
    cfg = SuiteConfig(algebra="sl3").validate()
    assert cfg.nu == 0.35


@pytest.mark.parametrize("kw", [
    dict(algebra="so3"),
    dict(algebra="su2", nu=0.3),
    dict(algebra="sl2", theta=0.3),
    dict(algebra="sl2", samples=0),
    dict(algebra="sl2", domain_radius=0.5),
    dict(algebra="sl2", fd_step=1e-2),
    dict(algebra="sl2", fd_step=1e-9),
    dict(algebra="sl2", seed=-1),
    dict(algebra="sl2", nu=0.0),
    dict(algebra="su2", theta=1.5),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SuiteConfig(**kw).validate()


def test_compact_suite_needs_compact_algebra():
    with pytest.raises(ConfigError):
        run_suite("compact", SuiteConfig(algebra="sl2", samples=1))


def test_unknown_tolerance_name():
    with pytest.raises(ConfigError):
        run_suite("cdybe", SuiteConfig(algebra="sl2", samples=1, tolerances={"nope": 1.0}))


def test_trivial_branch_at_half():
    report = run_suite("cdybe", SuiteConfig(algebra="sl2", nu=0.5, samples=10))
    assert report.verdict == "pass"
    rec = {r.check_id: r for r in report.records}
    assert rec["cdybe.monodromy_form"].max_residual <= 1e-12
    # K vanishes identically, so K-scaling controls are not run
    assert "cdybe.monodromy_form_perturbed" not in rec


def test_controls_are_expect_fail():
    report = run_suite("cdybe", SuiteConfig(algebra="su2", samples=3))
    rec = {r.check_id: r for r in report.records}
    assert rec["cdybe.compact_form_printed_constant"].expect == "fail"
    assert rec["cdybe.compact_form_printed_constant"].passed
    assert all(r.passed for r in report.records)


def test_tolerance_override_flips_verdict():
    cfg = SuiteConfig(algebra="sl2", samples=2, tolerances={"cdybe.monodromy_form_fd_route": 1e-20})
    report = run_suite("cdybe", cfg)
    assert report.verdict == "fail"


def test_determinism():
    cfg = dict(algebra="su2", samples=2, seed=7)
    a = emit_report(run_suite("all", SuiteConfig(**cfg)))
    b = emit_report(run_suite("all", SuiteConfig(**cfg)))
    assert a == b
    c = emit_report(run_suite("all", SuiteConfig(**{**cfg, "seed": 8})))
    assert a != c


def test_json_roundtrip_and_schema():
    report = run_suite("momentum", SuiteConfig(algebra="sl2", samples=2))
    text = emit_report(report)
    data = json.loads(text)
    jsonschema.validate(data, load_schema())
    assert ResidualReport.from_dict(data) == report
    assert emit_report(ResidualReport.from_dict(data)) == text


def test_empty_report():
    report = ResidualReport("all", SuiteConfig().validate().echo(), [], "pass")
    data = json.loads(emit_report(report))
    jsonschema.validate(data, load_schema())
    assert data["verdict"] == "pass" and data["records"] == []
    assert "verdict pass" in emit_report(report, "text")


def test_text_format():
    report = ResidualReport("cdybe", SuiteConfig().validate().echo(),
                            [CheckRecord("x.y", "anchor", 3, 1e-9, 1e-10, 1e-8, "pass", True)], "pass", 1.5)
    text = emit_report(report, "text")
    assert "x.y" in text and "ok" in text and "wall time 1.500 s" in text
    with pytest.raises(ValueError):
        emit_report(report, "xml")


def test_every_record_has_anchor():
    for chk in cli.CHECKS:
        assert chk.anchor and chk.expect in ("pass", "fail")


def test_golden_report(tmp_path):
    out = tmp_path / "report.json"
    code = main(["cdybe", "--algebra", "sl2", "--nu", "0.35", "--seed", "42", "--out", str(out)])
    assert code == 0
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert main(["cdybe", "--algebra", "sl2", "--samples", "1", "--format", "text"]) == 0
    assert "verdict pass" in capsys.readouterr().out
    assert main(["cdybe", "--algebra", "sl2", "--samples", "1",
                 "--tol", "cdybe.monodromy_form_fd_route=1e-20"]) == 1
    assert main(["cdybe", "--algebra", "su2", "--nu", "0.3"]) == 2
    assert main(["cdybe", "--algebra", "sl2", "--fd-step", "1"]) == 2
    assert main(["cdybe", "--algebra", "sl2", "--tol", "garbage"]) == 2
    assert main(["bogus"]) == 2
    assert main(["compact", "--algebra", "sl2"]) == 2


def test_numerical_fault_exit_code(monkeypatch, capsys):
    from poissonlie.rmatrix import DerivativeRouteError

    def boom(ctx, rng):
        raise DerivativeRouteError("routes differ")

    chk = cli.CHECKS[0]
    monkeypatch.setattr(cli, "CHECKS", [cli.Check(chk.check_id, chk.anchor, chk.suite, chk.applies, boom)])
    assert main(["cdybe", "--algebra", "sl2", "--samples", "1"]) == 3
    assert "routes differ" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algebra": "sl2", "nu": 0.25, "samples": 1, "seed": 3}))
    assert main(["momentum", "--config", str(cfg), "--nu", "0.3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["config"]["nu"] == 0.3 and data["config"]["seed"] == 3
    cfg.write_text(json.dumps({"algebra": "sl2", "colour": "red"}))
    assert main(["momentum", "--config", str(cfg)]) == 2
    assert main(["momentum", "--config", str(tmp_path / "missing.json")]) == 2


def test_timing_flag(capsys):
    assert main(["momentum", "--algebra", "sl2", "--samples", "1", "--timing"]) == 0
    assert json.loads(capsys.readouterr().out)["wall_time"] is not None
