import json
import subprocess
import sys

import numpy as np
import pytest

from acbm.classes import sphere_F
from acbm.cli import EXIT_INVARIANT, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, run
from acbm.conformal import ConformalPointData, g0_generator
from acbm.fundamental import associated_forms
from acbm.scene import Generator, ParseError, Scene, dumps, loads
from acbm.structure import canonical_structure, random_structure


def write(tmp_path, scene, name="s.scene"):
    path = tmp_path / name
    path.write_text(dumps(scene) if isinstance(scene, Scene) else scene)
    return str(path)


def test_round_trip_is_byte_identical(rng):
    s = random_structure(2, 3)
    scene = Scene(s, F=rng.standard_normal((5, 5, 5)), conformal=g0_generator(s, 1))
    text = dumps(scene)
    again = loads(text)
    assert dumps(again) == text
    assert np.array_equal(again.F, scene.F)
    assert np.array_equal(again.structure.g, s.g)


def test_generator_round_trip():
    scene = Scene(canonical_structure(1), generator=Generator("F4", 2, np.array([1.5])))
    assert dumps(loads(dumps(scene))) == dumps(scene)
    F = loads(dumps(scene)).resolve_F()
    assert associated_forms(F, scene.structure).theta[-1] == pytest.approx(1.5)


@pytest.mark.parametrize(
    "mutate,where",
    [
        (lambda t: t.replace("xi 0 0 1", "xi 0 0 1x"), "line 4"),
        (lambda t: t.replace("version 1", "version 2"), "version"),
        (lambda t: t.replace("\nn 1\n", "\nn one\n"), "'n'"),
        (lambda t: t.replace("eta 0 0 1", "eta 0 1"), "'eta'"),
        (lambda t: t + "bogus 1\n", "bogus"),
        (lambda t: t + "weingarten 0 0 0 0 0 0 0 0 0\n", "at most one"),
    ],
)
def test_parse_errors_are_located(mutate, where):
    text = mutate(dumps(Scene(canonical_structure(1), F=np.zeros((3, 3, 3)))))
    with pytest.raises(ParseError, match=where):
        loads(text)


def test_validate_canonical_zero(tmp_path):
    path = write(tmp_path, Scene(canonical_structure(1), F=np.zeros((3, 3, 3))))
    code, report = run(["validate", path])
    assert code == EXIT_OK
    assert all(v == 0.0 for v in report["structure"]["residuals"].values())
    assert all(v == 0.0 for v in report["F"]["residuals"].values())


def test_validate_reports_eta_xi(tmp_path, capsys):
    s = canonical_structure(1)
    text = dumps(Scene(s)).replace("eta 0 0 1", "eta 0 0 2")
    code, report = run(["validate", write(tmp_path, text)])
    assert code == EXIT_VALIDATION
    assert "eta(xi) = 1" in report["violations"]


def test_malformed_number_exit_code(tmp_path, capsys):
    text = dumps(Scene(canonical_structure(1))).replace("g 1", "g 1..0")
    code, _ = run(["validate", write(tmp_path, text)])
    assert code == EXIT_PARSE
    assert "line 6" in capsys.readouterr().err


def test_classify_generator_and_zero(tmp_path):
    code, report = run(["classify", write(tmp_path, Scene(random_structure(2, 1), generator=Generator("F11", 4)))])
    assert code == EXIT_OK and report["class"] == "F11"
    code, report = run(["classify", write(tmp_path, Scene(canonical_structure(1), F=np.zeros((3, 3, 3))))])
    assert report["class"] == "F0"


def test_classify_weingarten(tmp_path):
    s = canonical_structure(1)
    A = np.diag([0.7, 0.7, 0.0])
    code, report = run(["classify", write(tmp_path, Scene(s, weingarten=A))])
    assert code == EXIT_OK
    assert set(report["class"].split("+")) <= {"F4", "F5", "F6"}


def test_classify_without_F(tmp_path):
    code, _ = run(["classify", write(tmp_path, Scene(canonical_structure(1)))])
    assert code == EXIT_VALIDATION


def test_connection_sphere(tmp_path):
    s = canonical_structure(2)
    code, report = run(["connection", write(tmp_path, Scene(s, F=sphere_F(np.pi / 6, s)))])
    assert code == EXIT_OK
    assert report["t_xi"] == pytest.approx(2.0, abs=1e-12)
    assert report["t_star_xi"] == pytest.approx(-2 * np.sqrt(3), abs=1e-12)
    assert max(abs(x) for x in report["torsion_forms"]["t_hat"]) < 1e-12
    assert report["torsion_classes"] == ["T31"]


def test_connection_coincidence_flag(tmp_path):
    s = random_structure(2, 2)
    _, report = run(["connection", write(tmp_path, Scene(s, generator=Generator("F3", 1)))])
    assert report["phiB_equals_canonical"] is False
    _, report = run(["connection", write(tmp_path, Scene(s, F=np.zeros((5, 5, 5))))])
    assert report["phiB_equals_canonical"] is True and report["torsion_max_abs"] == 0.0


def test_conformal_g0_and_non_g0(tmp_path):
    s = canonical_structure(2)
    scene = Scene(s, generator=Generator("F3", 1), conformal=g0_generator(s, 5))
    code, report = run(["conformal", write(tmp_path, scene), "--check-invariance"])
    assert code == EXIT_OK
    assert report["trials"][0]["T_residual"] < 1e-8
    c = ConformalPointData(0.2, 0.1, -0.3, s.eta, np.zeros(5), np.zeros(5))
    code, report = run(["conformal", write(tmp_path, Scene(s, generator=Generator("F3", 1), conformal=c))])
    trial = report["trials"][0]
    assert trial["N_phiphi_residual"] < 1e-8
    assert trial["T_residual"] > 1e-3 and not trial["in_G0"]


def test_conformal_class_leak_is_flagged(tmp_path):
    s = random_structure(2, 3)
    scene = Scene(s, generator=Generator("F9", 2), conformal=ConformalPointData(0.0, 0.4, 0.0))
    code, report = run(["conformal", write(tmp_path, scene), "--check-invariance"])
    assert code == EXIT_INVARIANT
    assert report["trials"][0]["checks"]["classes_preserved"] is False


def test_conformal_trials_are_deterministic(tmp_path):
    path = write(tmp_path, Scene(random_structure(1, 2)))
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    run(["conformal", path, "--trials", "5", "--seed", "7", "--out", str(out1)])
    run(["conformal", path, "--trials", "5", "--seed", "7", "--out", str(out2)])
    assert out1.read_text() == out2.read_text()
    assert len(json.loads(out1.read_text())["trials"]) == 5


def test_tolerance_env(tmp_path, monkeypatch):
    path = write(tmp_path, Scene(canonical_structure(1), F=np.zeros((3, 3, 3))))
    monkeypatch.setenv("ACBM_TOL", "1e-4")
    _, report = run(["validate", path])
    assert report["tol"] == 1e-4
    monkeypatch.setenv("ACBM_TOL", "nope")
    assert run(["validate", path])[0] == EXIT_VALIDATION


def test_console_entry_point(tmp_path):
    path = write(tmp_path, Scene(canonical_structure(1), F=np.zeros((3, 3, 3))))
    proc = subprocess.run([sys.executable, "-m", "acbm.cli", "validate", path], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "command: validate" in proc.stdout
