import math
from pathlib import Path

import pytest

from slowcert.cli import main

SCALAR_BRAKE = 2 * math.exp(math.sqrt(2)) / (math.e - 1)

CUSTOM_SCALAR = f"""
[run]
example = "custom"
alpha = [1.0]

[grid]
samples = 300
seed = 2
time_samples = 32

[custom]
dim_state = 1
dim_param = 1
f = ["x1/sqrt(1+x1^2)*(1-90*tau1)"]
p = ["cos(t)^2"]
p_prime = ["-sin(2*t)"]
p_bar = 1.0
period = {math.pi!r}
V = "exp(sqrt(1+x1^2)) - e"
alpha1 = "exp(sqrt(1+s^2)) - e"
alpha2 = "exp(sqrt(1+s^2)) - e"
q = "45*tau1 - {SCALAR_BRAKE!r}"
c_a = 0.0
c_b = {math.pi * (22.5 - SCALAR_BRAKE)!r}
T = {math.pi!r}
m_bar = {45.0 - SCALAR_BRAKE!r}
"""


def write_config(tmp_path: Path, body: str, name: str = "run.toml") -> Path:
    path = tmp_path / name
    path.write_text(body)
    return path


def test_init_writes_template(tmp_path):
    target = tmp_path / "template.toml"
    assert main(["init", "--out", str(target)]) == 0
    text = target.read_text()
    assert "[run]" in text and "[grid]" in text and "example" in text


def test_validate_scalar_passes(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [1.0]\n'
        "[grid]\nsamples = 400\nseed = 1\ntime_samples = 32\n",
    )
    code = main(["validate", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert code == 0
    report = (tmp_path / "out" / "report.txt").read_text()
    assert "0 violations / 400 samples" in report
    assert "sampling, not proof" in report


def test_certify_writes_summary_and_trajectories(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "pendulum"\nalpha = [0.01, 1.0]\n'
        "[grid]\nsamples = 200\nseed = 3\ntime_samples = 16\n"
        "[trajectories]\ncount = 2\nradius = 4.0\nhorizon = 8.0\n",
    )
    out = tmp_path / "out"
    assert main(["certify", "--config", str(cfg), "--out", str(out)]) == 0
    summary = (out / "certificates.csv").read_text().splitlines()
    assert summary[0] == "# slowcert-csv v1"
    assert summary[1] == "# seed=3"
    assert summary[2].startswith("alpha,threshold_ugas,threshold_iss,decrease_coeff")
    assert len(summary) == 5  # header block + one row per alpha
    trajs = sorted(out.glob("traj_pendulum_*.csv"))
    assert len(trajs) == 4  # 2 alphas x 2 trajectories
    header = trajs[0].read_text().splitlines()[2]
    assert header == "t,x1,x2,V_hat,V_sharp,dV_sharp_dt,decrease_bound"


def test_certify_is_byte_deterministic(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [1.0]\n'
        "[grid]\nsamples = 150\nseed = 11\ntime_samples = 16\n"
        "[trajectories]\ncount = 2\nradius = 4.0\nhorizon = 6.0\n",
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["certify", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["certify", "--config", str(cfg), "--out", str(out_b)]) == 0
    files_a = sorted(p.name for p in out_a.glob("*.csv"))
    files_b = sorted(p.name for p in out_b.glob("*.csv"))
    assert files_a == files_b and files_a
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_worker_count_does_not_change_output(tmp_path, monkeypatch):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [1.0]\n'
        "[grid]\nsamples = 120\nseed = 8\ntime_samples = 16\n"
        "[trajectories]\ncount = 3\nradius = 4.0\nhorizon = 6.0\n",
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    monkeypatch.delenv("SLOWCERT_THREADS", raising=False)
    assert main(["certify", "--config", str(cfg), "--out", str(out_a)]) == 0
    monkeypatch.setenv("SLOWCERT_THREADS", "3")
    assert main(["certify", "--config", str(cfg), "--out", str(out_b)]) == 0
    for name in sorted(p.name for p in out_a.glob("*.csv")):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_seed_flag_changes_output(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [1.0]\n'
        "[grid]\nsamples = 150\nseed = 11\ntime_samples = 16\n"
        "[trajectories]\ncount = 1\nradius = 4.0\nhorizon = 6.0\n",
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["certify", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["certify", "--config", str(cfg), "--seed", "12", "--out", str(out_b)]) == 0
    name = "traj_scalar_alpha1_0.csv"
    assert (out_a / name).read_bytes() != (out_b / name).read_bytes()


def test_custom_example_validates(tmp_path):
    cfg = write_config(tmp_path, CUSTOM_SCALAR)
    assert main(["validate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0


def test_custom_matches_builtin_scalar(tmp_path, scalar_bundle):
    import numpy as np

    from slowcert.cli import build_custom, load_config

    cfg_path = write_config(tmp_path, CUSTOM_SCALAR)
    cfg = load_config(cfg_path, "validate", None, None)
    frozen, path, family, sig = build_custom(cfg.custom)
    rng = np.random.default_rng(55)
    for _ in range(100):
        x = rng.uniform(-8, 8, size=1)
        t = float(rng.uniform(0, 20))
        tau = np.array([float(rng.uniform(0, 1))])
        assert frozen.field(x, t, tau)[0] == pytest.approx(
            scalar_bundle.frozen.field(x, t, tau)[0], abs=1e-12
        )
        assert family.V(x, t, tau) == pytest.approx(
            scalar_bundle.family.V(x, t, tau), abs=1e-12
        )
        assert path.value(t)[0] == pytest.approx(
            scalar_bundle.path.value(t)[0], abs=1e-15
        )


def test_parse_error_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "[run\nexample=")
    assert main(["validate", "--config", str(cfg)]) == 2
    assert "parse error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.toml")]) == 2


def test_bad_expression_exits_2(tmp_path):
    body = CUSTOM_SCALAR.replace('"cos(t)^2"', '"cos(t^2"')
    cfg = write_config(tmp_path, body)
    assert main(["validate", "--config", str(cfg)]) == 2


def test_numeric_failure_exits_3(tmp_path, capsys):
    body = CUSTOM_SCALAR.replace('V = "exp(sqrt(1+x1^2)) - e"', 'V = "log(x1)"')
    cfg = write_config(tmp_path, body)
    assert main(["validate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_failed_check_exits_1(tmp_path):
    # doubling c_b makes the window-average condition fail
    body = CUSTOM_SCALAR.replace(
        f"c_b = {math.pi * (22.5 - SCALAR_BRAKE)!r}",
        f"c_b = {2 * math.pi * (22.5 - SCALAR_BRAKE)!r}",
    )
    cfg = write_config(tmp_path, body)
    assert main(["validate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 1
    report = (tmp_path / "out" / "report.txt").read_text()
    assert "A4: FAIL" in report
    assert "overall: FAIL" in report


def test_sweep_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [0.5, 2.0]\n'
        "[grid]\nsamples = 100\nseed = 5\ntime_samples = 16\n",
    )
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert "grid decrease spot-check: pass" in (out / "report.txt").read_text()


def test_alpha_star_mode(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\n'
        "[trajectories]\ncount = 2\nradius = 4.0\nhorizon = 6.0\n"
        "[alpha_star]\nlo = 0.001\nhi = 1.0\niterations = 2\n",
    )
    out = tmp_path / "out"
    assert main(["alpha-star", "--config", str(cfg), "--out", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "empirical decrease boundary" in report
    assert "analytic threshold" in report
    assert (out / "alpha_star.csv").exists()


def test_iss_mode_requires_control_channel(tmp_path):
    cfg = write_config(
        tmp_path,
        '[run]\nexample = "scalar"\nalpha = [1.0]\n',
    )
    assert main(["iss", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
