import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmfinv import acceptance, cli, config
from qmfinv.config import ConfigError, ExperimentConfig, SimulationParams, SpectralParams
from qmfinv.filters import TransitionFn

F = Fraction

rat = st.fractions(min_value=-4, max_value=4, max_denominator=1000)


@given(rat, st.integers(1, 5000), st.integers(0, 5000), rat, st.integers(0, 2**31))
def test_config_round_trip(x0, paths, steps, x, seed):
    cfg = ExperimentConfig(
        command="simulate",
        filter={"builtin": "haar"},
        set={"points": ["1/3", "2/3"]},
        simulation=SimulationParams(x0=x0, paths=paths, steps=steps, eps=F(1, 1024)),
        spectral=SpectralParams(x=x, k_max=3, t_max=9),
        seed=seed,
    )
    assert config.loads(config.dumps(cfg)) == cfg


@pytest.mark.parametrize(
    "text, where",
    [
        ('command = "cohen"\n[cohen]\nT = [["-1/2", 0.5]]\n', "cohen.T[0][1]"),
        ('command = "simulate"\n[simulation]\nx0 = "1/0"\n', "simulation.x0"),
        ('command = "x"\ncolour = 1\n', "colour"),
        ('command = "x"\n[set]\npoints = ["1/3"]\nintervals = []\n', "set"),
        ('command = "x"\n[filter]\nbuiltin = "db4"\n', "filter.builtin"),
        ('command = "x"\n[subshift]\nJ = 1\n', "subshift"),
        ("command = \n", "toml"),
    ],
)
def test_config_errors_carry_location(text, where):
    with pytest.raises(ConfigError) as e:
        config.loads(text)
    assert e.value.location == where


def test_run_requires_seed_for_simulation(tmp_path):
    cfg = config.loads('command = "simulate"\n[filter]\nbuiltin = "haar"\n')
    cfg.output = str(tmp_path)
    with pytest.raises(ConfigError):
        cli.run(cfg)


def test_config_file_run(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        f'command = "eval-product"\noutput = "{tmp_path / "o"}"\n'
        '[filter.construct]\ntheorem = "1"\nB = { points = ["1/3", "2/3"] }\n'
        '[spectral]\nx = "1/3"\nk_max = 4\n'
    )
    assert cli.main(["run", "--config", str(path)]) == 0
    rows = (tmp_path / "o" / "product.csv").read_text().splitlines()
    assert rows[0] == "k,lower,upper,exact_zero,terms_used" and len(rows) == 10
    assert all(r.split(",")[3] == "1" for r in rows[1:])
    assert (tmp_path / "o" / "product.gp").exists()
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["all_exact_zero"] and summary["passed"]


def test_malformed_config_status(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text('command = "cohen"\n[cohen]\nj_max = "many"\n')
    assert cli.main(["run", "--config", str(path)]) == 2
    assert "cohen.j_max" in capsys.readouterr().err


def test_recipes(tmp_path):
    assert cli.main(["run", "--recipe", "example-4-1", "--out", str(tmp_path / "a")]) == 0
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert s["exit_set"] == "IntervalSet({1/6} u {5/6})" and s["invariance"]
    assert cli.main(["run", "--recipe", "thm1-onethird", "--out", str(tmp_path / "b")]) == 0
    s = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert s["sum_phi_hat_one_third"] == [0.0, 0.0] and s["all_terms_exact_zero"]


def test_shannon_recipe_reports_cohen_failure(tmp_path):
    assert cli.main(["run", "--recipe", "shannon", "--out", str(tmp_path)]) == 1
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["invariance"] and not s["cohen"]["passed"]


def test_cohen_accepts_negative_rational_bounds(tmp_path):
    args = ["cohen", "--filter", "haar", "--T", "-1/2", "1/2", "--j-max", "8", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["passed"]


def test_simulate_csv_byte_identical(tmp_path):
    args = ["simulate", "--filter", "haar", "--seed", "9", "--paths", "20", "--steps", "80"]
    assert cli.main(args + ["--out", str(tmp_path / "1")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "2")]) == 0
    a = (tmp_path / "1" / "paths.csv").read_bytes()
    assert a == (tmp_path / "2" / "paths.csv").read_bytes()
    assert a.splitlines()[0] == b"path_id,t_absorbed,final_state_num,final_state_den,decouple_count"


def test_simulate_without_seed_is_rejected():
    with pytest.raises(SystemExit) as e:
        cli.main(["simulate", "--filter", "haar"])
    assert e.value.code == 2


def test_build_g_and_refusals(tmp_path):
    assert cli.main(["build-g", "--forbidden", "00", "11", "22", "--J", "2", "--out", str(tmp_path / "g")]) == 0
    d = json.loads((tmp_path / "g" / "g.json").read_text())
    assert d["m"] == 2 and d["default"] == "1/3"
    assert cli.main(["build-g", "--forbidden", "00", "01", "02", "--J", "2", "--out", str(tmp_path / "r")]) == 1
    assert cli.main(["build-g", "--generator", "example_3_1", "--truncation", "10", "--out", str(tmp_path / "s")]) == 1
    s = json.loads((tmp_path / "s" / "summary.json").read_text())
    assert s["witness"] == "(01)*1"


def test_build_filter_then_reload(tmp_path):
    out = tmp_path / "f"
    assert cli.main(["build-filter", "--construct", "thm1", "--points", "1/3", "2/3", "--out", str(out)]) == 0
    assert cli.main(["cohen", "--filter", str(out / "filter.json"), "--j-max", "8", "--grid-n", "256", "--out", str(tmp_path / "c")]) == 1
    assert cli.main(["analyze-set", "--points", "1/3", "2/3", "--filter", str(out / "filter.json"), "--out", str(tmp_path / "s")]) == 0


def test_analyze_commands(tmp_path):
    assert cli.main(["analyze-subshift", "--forbidden", "00", "11", "--out", str(tmp_path / "a")]) == 0
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert s["exit_set_closed"] and s["star_images_disjoint"]
    assert cli.main(["analyze-set", "--interval", "0", "1/4", "closed-open", "--interval", "3/4", "1", "closed", "--out", str(tmp_path / "b")]) == 0
    s = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert s["exit_set"] == "IntervalSet([3/8,5/8))"


class _Tampered(TransitionFn):
    name = "cos3"

    def _float(self, x):
        return math.cos(3 * math.pi * x) ** 2 + (0.01 if 0.1 < x < 0.2 else 0.0)


def test_tampered_fixture_fails_residual_criterion(monkeypatch, capsys):
    real = acceptance.builtin
    monkeypatch.setattr(acceptance, "builtin", lambda n: _Tampered() if n == "cos3" else real(n))
    r = acceptance.run_criterion(3)
    assert not r.passed
    monkeypatch.setattr(acceptance, "run_all", lambda level: [r])
    assert cli.main(["verify", "quick"]) == 1
