import json

import pytest
import tomli
from click.testing import CliRunner

from commands import cli
from helpers.exceptions import CalibrationError, ConstraintViolation, MissingKey, TypeMismatch, UnknownKey
from lab.config import apply_overrides, emit_canonical, parse_config, parse_document, with_updates
from lab.outputs import emit_outputs
from lab.schemas import CalibrationResult, RunSpec
from lab.service import (
    calibrate_blowup_amplitude,
    diagnose_outcome,
    eps_monotonicity,
    eps_variants,
    expand_sweep,
    selftest,
    simulate,
)
from lab.tasks import run_sweep, run_task

PDE = "[pde]\np = 3.0\nq = 5.0\nmu = 0.1\n"


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_config_takes_defaults(minimal_config):
    spec = parse_config(minimal_config)
    assert spec.pde.mu == 0.1
    assert (spec.grid.nx, spec.grid.ny) == (151, 251)
    assert spec.domain.rho == 0.5
    assert spec.j_params.gamma == pytest.approx(0.42)
    assert spec.nondeg_params.beta == pytest.approx(1.0 / 3.0)


def test_missing_key(tmp_path):
    with pytest.raises(MissingKey, match="pde.q"):
        parse_config(_write(tmp_path, "[pde]\np = 3.0\nmu = 0.1\n"))


def test_unknown_key(tmp_path):
    with pytest.raises(UnknownKey) as exc:
        parse_config(_write(tmp_path, PDE + "[solver]\ncfl = 0.3\n"))
    assert exc.value.key == "solver.cfl"


def test_type_mismatch(tmp_path):
    with pytest.raises(TypeMismatch) as exc:
        parse_config(_write(tmp_path, PDE + '[grid]\nnx = "many"\n'))
    assert exc.value.key == "grid.nx"


def test_malformed_toml(tmp_path):
    with pytest.raises(TypeMismatch):
        parse_config(_write(tmp_path, "[pde\np = 3.0\n"))


@pytest.mark.parametrize(
    "section",
    [
        "[domain]\nrho = 0.8\n",
        "[grid]\nnx = 150\n",
        "[initial_data]\nmu = 0.2\n",
        "[j_functional]\nalpha = 4.0\n",
        "[calibration]\na_lo = 5.0\na_hi = 1.0\n",
    ],
)
def test_constraint_violations(tmp_path, section):
    with pytest.raises(ConstraintViolation) as exc:
        parse_config(_write(tmp_path, PDE + section))
    assert exc.value.exit_code == 2


def test_rho_outside_x1_is_keyed_on_rho(tmp_path):
    with pytest.raises(ConstraintViolation) as exc:
        parse_config(_write(tmp_path, PDE + "[domain]\nrho = 0.8\n"))
    assert exc.value.key == "domain.rho"
    assert "rho < x1 < L1" in str(exc.value)


def test_x1_outside_l1_is_keyed_on_x1(tmp_path):
    with pytest.raises(ConstraintViolation) as exc:
        parse_config(_write(tmp_path, PDE + "[domain]\nx1 = 1.2\n"))
    assert exc.value.key == "domain.x1"


def test_canonical_round_trip(tiny_config):
    spec = parse_config(tiny_config)
    assert parse_document(tomli.loads(emit_canonical(spec))) == spec


def test_overrides(minimal_config):
    spec = parse_config(minimal_config)
    assert apply_overrides(spec) is spec
    changed = apply_overrides(spec, grad_max=50.0, t_end=0.5)
    assert changed.solver.grad_max == 50.0
    assert changed.solver.t_end == 0.5
    assert spec.solver.t_end == 10.0


def test_expand_sweep(minimal_config):
    spec = parse_config(minimal_config)
    assert expand_sweep(spec) == [("base", spec)]
    swept = with_updates(spec, {"sweep": {"mu": [0.05, 0.2], "amplitude": [2.0, 4.0], "grid": [[31, 51]]}})
    runs = expand_sweep(swept)
    assert [name for name, _ in runs] == [
        "mu=0.05_A=2_grid=31x51",
        "mu=0.05_A=4_grid=31x51",
        "mu=0.2_A=2_grid=31x51",
        "mu=0.2_A=4_grid=31x51",
    ]
    name, last = runs[-1]
    assert last.pde.mu == 0.2
    assert last.initial_data.amplitude == 4.0
    assert (last.grid.nx, last.grid.ny) == (31, 51)
    assert last.sweep.empty


def test_eps_variants(minimal_config):
    spec = parse_config(minimal_config)
    variants = eps_variants(spec)
    assert [v.initial_data.eps for v in variants] == [0.1, 0.15, 0.2]
    assert all(v.initial_data.amplitude == spec.initial_data.amplitude for v in variants)


def test_eps_monotonicity():
    def result(eps, lo, hi):
        return CalibrationResult(a_lo=lo, a_hi=hi, eps=eps, runs=5, history=[])

    assert eps_monotonicity([result(0.2, 3.0, 3.1), result(0.1, 4.0, 4.2)]).non_increasing
    report = eps_monotonicity([result(0.1, 3.0, 3.1), result(0.2, 4.0, 4.2)])
    assert not report.non_increasing
    assert list(report.thresholds) == ["0.1", "0.2"]


def test_selftest_passes():
    checks = selftest()
    names = [c.name for c in checks]
    assert "torsion_maximum" in names
    assert "scaling_equivariance_eps_0.5" in names
    assert "scaling_equivariance_eps_0.25" in names
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_simulate_and_emit(tiny_config, tmp_path):
    spec = parse_config(tiny_config)
    outcome = simulate(spec)
    assert outcome.validation.passed
    report = diagnose_outcome(spec, outcome, with_barriers=False)
    out = tmp_path / "out"
    written = emit_outputs(spec, outcome, report, out)

    names = {p.name for p in written}
    snapshots = len(outcome.result.snapshots)
    assert {"manifest.json", "series.csv", "bottom_profile.csv", "j_max.csv", "diagnostics.json"} <= names
    assert sum(n.startswith("snapshot_") for n in names) == snapshots

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["status"] == "ReachedTEnd"
    assert manifest["steps"] == outcome.result.steps
    assert manifest["snapshots"] == snapshots
    assert "numpy" in manifest["versions"]

    series = (out / "series.csv").read_text(encoding="utf-8").splitlines()
    assert series[0].startswith("#")
    assert series[1].split(",")[:3] == ["t", "dt", "max_grad"]
    assert len(series) == 2 + outcome.result.steps

    snapshot = (out / "snapshot_0000.csv").read_text(encoding="utf-8").splitlines()
    assert snapshot[2] == "x,y,u"
    assert len(snapshot) == 3 + outcome.grid.nx * outcome.grid.ny


def test_artifact_headers_name_their_claims(tiny_config, tmp_path):
    spec = parse_config(tiny_config)
    outcome = simulate(spec)
    report = diagnose_outcome(spec, outcome, with_barriers=False)
    out = tmp_path / "out"
    emit_outputs(spec, outcome, report, out)

    section_names = set(report.sections)
    for name, claims in [
        ("series.csv", ["don1", "don4", "ut_bound", "bernstein"]),
        ("bottom_profile.csv", ["localization", "weighted_profile", "corner"]),
        ("j_max.csv", ["J_sign"]),
        ("snapshot_0000.csv", ["don1", "don3"]),
    ]:
        first = (out / name).read_text(encoding="utf-8").splitlines()[0]
        assert first.endswith("renders: " + ", ".join(claims))
        assert set(claims) <= section_names

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["renders"]["j_max.csv"] == ["J_sign"]


def test_manifest_replays_the_run(tiny_config, tmp_path):
    spec = parse_config(tiny_config)
    outcome = simulate(spec)
    emit_outputs(spec, outcome, None, tmp_path)
    replayed = parse_config(tmp_path / "manifest.json")
    assert replayed == spec
    assert simulate(replayed).result.steps == outcome.result.steps


def test_calibration_needs_blowup_at_a_hi(tiny_config):
    spec = with_updates(
        parse_config(tiny_config), {"calibration": {"a_lo": 0.01, "a_hi": 0.02, "t_end": 1e-3}}
    )
    with pytest.raises(CalibrationError, match="a_hi"):
        calibrate_blowup_amplitude(spec)


def test_run_task_reports_errors(tmp_path):
    row = run_task("broken", {"pde": {"p": 3.0, "mu": 0.1}}, str(tmp_path))
    assert row.status == "error"
    assert "pde.q" in row.error


def test_sweep_writes_index(tiny_config, tmp_path):
    spec = with_updates(parse_config(tiny_config), {"sweep": {"amplitude": [0.005, 0.01]}})
    rows = run_sweep(spec, tmp_path, workers=1)
    assert [r.name for r in rows] == ["A=0.005", "A=0.01"]
    assert all(r.status == "ReachedTEnd" for r in rows)
    assert (tmp_path / "sweep_index.csv").exists()
    assert (tmp_path / "A=0.01" / "manifest.json").exists()


def test_cli_selftest():
    result = CliRunner().invoke(cli, ["selftest"])
    assert result.exit_code == 0, result.output
    assert "torsion_maximum" in result.output


def test_cli_simulate(tiny_config, tmp_path):
    result = CliRunner().invoke(cli, ["simulate", "--config", str(tiny_config), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "ReachedTEnd" in result.output
    assert (tmp_path / "manifest.json").exists()


def test_cli_diagnose_without_blowup_exits_1(tiny_config, tmp_path):
    args = ["diagnose", "--config", str(tiny_config), "--out", str(tmp_path), "--no-barriers"]
    result = CliRunner().invoke(cli, args)
    assert result.exit_code == 1
    assert "inconclusive" in result.output
    assert (tmp_path / "diagnostics.json").exists()


def test_cli_verify_barriers(tiny_config, tmp_path):
    result = CliRunner().invoke(cli, ["verify-barriers", "--config", str(tiny_config), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "barrier_report.json").read_text(encoding="utf-8"))
    assert report["global"]["mu0_found"] > 0.0
    assert report["nondegeneracy"]["min_residual"] >= 0.0
    assert report["nondegeneracy"]["region"]["valid_cells"] == [[0.05, 0.001]]


def test_cli_bad_config_exits_2(tmp_path):
    path = _write(tmp_path, PDE + "[domain]\nrho = 0.8\n")
    result = CliRunner().invoke(cli, ["simulate", "--config", str(path)])
    assert result.exit_code == 2


def test_run_spec_requires_pde():
    with pytest.raises(MissingKey):
        parse_document({})
    assert isinstance(parse_document({"pde": {"p": 3.0, "q": 5.0, "mu": 0.0}}), RunSpec)
