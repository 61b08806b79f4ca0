import json
import subprocess
import sys

import pytest

from orbitforge.cli import main
from orbitforge.config import RunConfig, read_config_file, resolve
from orbitforge.errors import InvalidInputError


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = geo-lorenz\nmodel.mu = 1.8  # slope\nsection.delta: 0.05\nseed = 7\n")
    values = read_config_file(str(cfg))
    assert values == {"model": "geo-lorenz", "mu": 1.8, "delta": 0.05, "seed": 7}
    merged = resolve(values, {"mu": 1.95, "delta": None})
    assert merged.mu == 1.95 and merged.delta == 0.05 and merged.seed == 7


def test_config_rejects_unknown_keys_and_bad_values(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    with pytest.raises(InvalidInputError):
        read_config_file(str(cfg))
    cfg.write_text("section.d = abc\n")
    with pytest.raises(InvalidInputError):
        read_config_file(str(cfg))
    with pytest.raises(InvalidInputError):
        RunConfig(delta=1.5).validate()
    with pytest.raises(InvalidInputError):
        RunConfig(U=0.1, V=0.5).validate()


def test_find_orbit_geo_lorenz(tmp_path, capsys):
    assert run(tmp_path, "find-orbit", "--model", "geo-lorenz", "--mu", "1.9") == 0
    orbit = load(tmp_path, "orbit")["result"]
    assert orbit["period"] == 4
    assert orbit["lambda_h"] == pytest.approx(1.9 ** 4)
    assert (tmp_path / "covering_graph.dot").exists()
    assert "period: 4" in (tmp_path / "summary.txt").read_text()
    assert "period-4 orbit" in capsys.readouterr().out


def test_outputs_are_deterministic(tmp_path):
    run(tmp_path, "find-orbit", "--model", "geo-lorenz")
    first = {p.name: p.read_bytes() for p in tmp_path.glob("*.json") if ".meta" not in p.name}
    run(tmp_path, "find-orbit", "--model", "geo-lorenz")
    second = {p.name: p.read_bytes() for p in tmp_path.glob("*.json") if ".meta" not in p.name}
    assert first == second
    assert load(tmp_path, "orbit")["seed"] == 0


def test_appendix_components(tmp_path):
    assert run(tmp_path / "t", "find-orbit", "--model", "appendix", "--component", "t") == 0
    assert load(tmp_path / "t", "orbit")["result"]["period"] == 3
    assert run(tmp_path / "b", "find-orbit", "--model", "appendix", "--component", "b") == 3
    diag = load(tmp_path / "b", "diagnostics")["result"]
    assert "growth-failure" in diag["message"] or diag["dead_ends"]


def test_identity_is_a_covering_failure(tmp_path):
    assert run(tmp_path, "find-orbit", "--model", "identity") == 3


def test_verify_exit_codes(tmp_path):
    assert run(tmp_path, "verify-hyperbolic", "--model", "geo-lorenz") == 0
    assert load(tmp_path, "hyperbolicity")["result"]["verdict"] == "pass"
    assert run(tmp_path, "verify-hyperbolic", "--model", "identity") == 6


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, "find-orbit") == 2
    assert run(tmp_path, "section", "--model", "lorenz", "--delta", "1.5") == 2
    assert run(tmp_path, "singularities", "--model", "geo-lorenz") == 2
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_singularities_command(tmp_path, capsys):
    assert run(tmp_path, "singularities", "--model", "lorenz") == 0
    kinds = sorted(s["classification"] for s in load(tmp_path, "singularities")["result"]["singularities"])
    assert kinds == ["lorenz_like", "two_positive", "two_positive"]
    assert run(tmp_path, "singularities", "--model", "lorenz", "--rho", "0.5") == 0
    kinds = [s["classification"] for s in load(tmp_path, "singularities")["result"]["singularities"]]
    assert kinds == ["other_hyperbolic"]


def test_section_command(tmp_path):
    assert run(tmp_path, "section", "--model", "lorenz") == 0
    secs = load(tmp_path, "sections")["result"]["sections"]
    assert [s["side"] for s in secs] == ["top", "bottom"]


def test_map_pipeline_certifies_an_orbit(tmp_path):
    assert run(tmp_path, "pipeline", "--model", "geo-lorenz") == 0
    rep = load(tmp_path, "pipeline")["result"]
    assert rep["status"] == "orbit-certified"
    assert [s["status"] for s in rep["stages"]][:2] == ["not-applicable", "not-applicable"]


def test_probe_command_on_saddle(tmp_path):
    assert run(tmp_path, "stability-probe", "--model", "saddle", "--U", "1", "--V", "0.1",
               "--horizon", "10", "--probe-samples", "20") == 0
    assert load(tmp_path, "stability_probe")["result"]["escape_fraction"] == 1.0


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "orbitforge", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.strip()
