import json
import math

import numpy as np
import pytest

from kreinpert import io
from kreinpert.cli import (
    ExperimentConfig,
    generate_instance,
    main,
    reproduce,
    rows_to_csv,
    run_sweep,
    trial_rng,
)
from kreinpert.errors import ConfigInvalid
from kreinpert.linalg import eigvalsh, spectral_norm
from kreinpert.sylvester import guarantee


def write_block(path, a0, a1, b, c):
    doc = {k: io.matrix_to_doc(np.asarray(m, dtype=complex))
           for k, m in zip(("A0", "A1", "B", "C"), (a0, a1, b, c))}
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def scalar_block(tmp_path):
    return write_block(tmp_path / "ex1.json", [[-0.5]], [[0.5]], [[0.4]], [[-0.4]])


def test_solve_sylvester_methods(tmp_path):
    a0, a1, y = tmp_path / "a0.json", tmp_path / "a1.json", tmp_path / "y.json"
    io.write_matrix(np.diag([-1.0, -2.0]), a0)
    io.write_matrix([[1.0]], a1)
    io.write_matrix([[1.0, 2.0]], y)
    for method in ("kron", "contour", "semigroup"):
        out = tmp_path / f"{method}.json"
        assert main(["solve-sylvester", "--a0", str(a0), "--a1", str(a1), "--y", str(y),
                     "--method", method, "--out", str(out)]) == 0
        x = io.matrix_from_doc(json.loads(out.read_text())["X"])
        assert np.allclose(x, [[-0.5, -2.0 / 3.0]], atol=1e-9)


def test_solve_riccati_and_dual(tmp_path, scalar_block):
    out = tmp_path / "k.json"
    assert main(["solve-riccati", "--block", scalar_block, "--delta", "1", "--out", str(out)]) == 0
    k = io.matrix_from_doc(json.loads(out.read_text())["K"])
    assert k[0, 0].real == pytest.approx(0.5, abs=1e-10)
    assert main(["solve-riccati", "--block", scalar_block, "--delta", "1", "--dual", "--out", str(out)]) == 0
    kp = io.matrix_from_doc(json.loads(out.read_text())["K"])
    assert np.allclose(kp, k.conj().T, atol=1e-10)


def test_diagonalize(tmp_path, scalar_block):
    out = tmp_path / "d.json"
    assert main(["diagonalize", "--block", scalar_block, "--delta", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert max(doc["identity_residuals"]) < 1e-12


def test_verify_command_exit_codes(tmp_path, scalar_block, capsys):
    out = tmp_path / "r.json"
    assert main(["verify-tpi", "--block", scalar_block, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["failures"] == []
    bad = write_block(tmp_path / "bad.json", [[-0.5]], [[0.5]], [[0.4]], [[0.4]])
    assert main(["verify-tpi", "--block", bad]) == 1
    assert "error" in capsys.readouterr().err


def test_hypothesis_violation_exit_1(tmp_path):
    blk = write_block(tmp_path / "big.json", [[-0.5]], [[0.5]], [[0.6]], [[-0.6]])
    assert main(["solve-riccati", "--block", blk, "--delta", "1"]) == 1


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["reproduce", "nope"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1
    assert main(["solve-riccati", "--block", str(tmp_path / "missing.json"), "--delta", "1"]) == 1


def test_oscillator_command(tmp_path):
    out = tmp_path / "osc.json"
    assert main(["oscillator", "--n", "12", "--matrices", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["failures"] == [] and doc["V"]["rows"] == 12
    pot = tmp_path / "pot.json"
    pot.write_text(json.dumps({"b_coeffs": [0.0, 1.0, 0.0, -0.1], "gauss": 0.5}))
    assert main(["oscillator", "--n", "12", "--beta", "0.2", "--potential", f"file:{pot}",
                 "--out", str(out)]) == 0
    pot.write_text(json.dumps({"b_coeffs": [1.0]}))
    assert main(["oscillator", "--n", "12", "--potential", f"file:{pot}"]) == 1
    assert main(["oscillator", "--potential", "builtin:nothing"]) == 1


@pytest.mark.parametrize("example", ["ex1", "ex2", "exns"])
def test_reproduce_command(tmp_path, example):
    out = tmp_path / "rep.json"
    assert main(["reproduce", example, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert all(ch["ok"] for ch in doc["checks"].values())


def test_reproduce_values():
    doc = reproduce("ex1")
    assert doc["K"][0, 0].real == pytest.approx(0.5, abs=1e-10)
    doc = reproduce("ex2")
    assert doc["closed_form"]["k_plus"] == pytest.approx(0.9 / (1 + math.sqrt(0.19)), abs=1e-12)
    doc = reproduce("exns")
    x = doc["closed_form"]["X1"]
    assert abs(x) == pytest.approx(1.0) and doc["verdict"].spectrum_real is False
    assert reproduce("exns", d=2.0, b=1.0)["verdict"].diagonalizable is False
    assert reproduce("exns", d=2.0, b=0.5)["verdict"].spectrum_real is True


def sweep_config(tmp_path, **over):
    doc = {"seed": 7, "disposition": "generic", "sizes": [3, 3], "trials": 3,
           "v_norm_grid": [0.2, 0.45, 0.7, 1.0]}
    doc.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_sweep_deterministic(tmp_path):
    cfg = sweep_config(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 1 + 3 * 4
    assert lines[0].startswith("seed,trial,disposition,regime")
    regimes = {line.split(",")[3] for line in lines[1:]}
    assert regimes == {"guaranteed", "reality_only", "beyond"}


def test_sweep_report_format(tmp_path):
    cfg = sweep_config(tmp_path, disposition="subordinated", sizes=[2, 2], trials=2,
                       v_norm_grid=[0.3], output={"format": "report"})
    out = tmp_path / "rep.json"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["guaranteed_failures"] == 0


@pytest.mark.parametrize("bad", [
    {"trials": 0}, {"disposition": "weird"}, {"sizes": [1]}, {"d": -1.0},
    {"tolerances": {"nope": 1}}, {"output": {"format": "xml"}}, {"extra": 1},
    {"v_norm_grid": [-0.1]},
])
def test_sweep_config_errors(tmp_path, bad):
    assert main(["sweep", "--config", sweep_config(tmp_path, **bad)]) == 1


def test_config_missing_key():
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({"disposition": "generic", "sizes": [2, 2]})


def test_instance_templates():
    cfg = ExperimentConfig(seed=1, disposition="subordinated", sizes=(1, 1))
    op = generate_instance(cfg, 0)
    assert op.A0[0, 0] == -0.5 and op.A1[0, 0] == 0.5
    assert spectral_norm(op.B) == pytest.approx(0.45, rel=1e-12)
    assert op.is_j_selfadjoint()
    cfg = ExperimentConfig(seed=1, disposition="annular_gap", sizes=(1, 2), d=2.0)
    op = generate_instance(cfg, 0)
    assert op.A0[0, 0] == 0.0 and np.allclose(np.diag(op.A1).real, [-2.0, 2.0])


@pytest.mark.parametrize("kind,sizes", [("subordinated", (3, 4)), ("annular_gap", (3, 4)),
                                        ("generic", (4, 4))])
def test_instance_distance_and_disposition(kind, sizes):
    cfg = ExperimentConfig(seed=3, disposition=kind, sizes=sizes, d=1.5)
    for trial in range(5):
        op = generate_instance(cfg, trial)
        g = guarantee(eigvalsh(op.A0), eigvalsh(op.A1))
        assert g.disposition == kind and g.d == pytest.approx(1.5, abs=1e-12)


def test_seed_reproducibility():
    cfg = ExperimentConfig(seed=11, disposition="generic", sizes=(3, 3))
    a, b = generate_instance(cfg, 2), generate_instance(cfg, 2)
    assert np.array_equal(a.L, b.L)
    assert not np.array_equal(a.L, generate_instance(cfg, 3).L)
    assert trial_rng(11, 2).random() == trial_rng(11, 2).random()


def test_non_j_mode_rows_record_error():
    cfg = ExperimentConfig(seed=1, disposition="subordinated", sizes=(2, 2), j_mode=False)
    rows = run_sweep(cfg)
    assert rows[0].error and not rows[0].passed
    assert "ConfigInvalid" in rows_to_csv(rows)


def test_reproduce_detects_mismatch(monkeypatch, tmp_path):
    import kreinpert.cli as cli
    from kreinpert.errors import MismatchWithClosedForm

    real = cli.solve_fixed_point

    def off(op, delta, *a, **kw):
        sol = real(op, delta, *a, **kw)
        return type(sol)(**{**sol.__dict__, "K": sol.K + 1e-6})

    monkeypatch.setattr(cli, "solve_fixed_point", off)
    with pytest.raises(MismatchWithClosedForm) as info:
        reproduce("ex2")
    assert info.value.check == "k_minus"
    out = tmp_path / "bad.json"
    assert main(["reproduce", "ex1", "--out", str(out)]) == 2
    assert json.loads(out.read_text())["checks"]["K"]["ok"] is False


def test_complex_cells_are_informational(tmp_path):
    cfg = sweep_config(tmp_path, disposition="subordinated", sizes=[1, 1], trials=2,
                       v_norm_grid=[0.45, 0.7])
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    beyond = [r for r in rows if r[3] == "beyond"]
    assert len(beyond) == 2
    # spectrum_real column is false, the row still passes
    assert all(r[11] == "false" and r[14] == "true" for r in beyond)
