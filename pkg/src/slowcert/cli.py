"""Command-line front end: config ingestion, pipeline orchestration, CSV emission.

Pipeline per mode:
  validate    sample-falsify the standing assumptions
  certify     validate, then build certificates and check decrease along
              seeded trajectories for each requested alpha
  sweep       per-alpha certificate summary with a grid decrease spot-check
  iss         growth checks, worst-case gated derivative, and a disturbance
              simulation against the gated certificate
  alpha-star  bisect for the empirical decrease boundary and report it next
              to the analytic threshold
  init        write a documented template config

Exit codes: 0 all requested checks pass, 1 a check failed, 2 configuration
or parse error, 3 numerical failure (the module error is surfaced verbatim).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10
    import tomli as tomllib

from . import examples as ex
from .averaging import AveragedSignal
from .certificate import (
    build_certificate,
    certificate_derivative_scaled,
    check_iss_growth,
    frozen_value,
)
from .core import FrozenFamily, LyapunovFamily, ParameterPath, SlowSystem
from .errors import (
    ConfigError,
    IntegrationError,
    NonMonotoneError,
    NumericalError,
    SlowcertError,
)
from .expressions import parse_expression, state_variables
from .reporting import GridSpec, map_workers
from .simverify import (
    AlphaSearchSpec,
    attach_certificate_values,
    check_decrease_along,
    check_gated_derivative,
    default_horizon,
    estimate_alpha_star,
    falsify_assumption1,
    integrate,
    scaled_leq,
    seed_batch,
    simulate_iss,
)

CSV_VERSION = "# slowcert-csv v1"

TEMPLATE = """\
# slowcert run configuration (all values shown are the defaults)

[run]
example = "scalar"          # scalar | pendulum | friction | identification | custom
alpha = [1.0]               # time-scale constants for certify/sweep/iss
out = "out"                 # output directory (--out overrides)
formats = ["csv", "text"]   # artifact kinds to write

[grid]
radius = 10.0               # sup-norm radius of the state box
samples = 5000              # falsification sample count
seed = 0                    # recorded in every output file
time_samples = 512          # 1-d anchors for the window-average condition
slack = 1e-9                # tolerance scale: lhs <= rhs + slack*(1+|rhs|)
# t_max = 100.0             # default: 20 * max(T, 1) * alpha

[trajectories]
count = 8                   # seeded initial states per alpha
radius = 5.0
margin_tol = 1e-6           # decrease-check tolerance scale
# horizon = 50.0            # default: clamp(4*alpha*max(T,1), 5, 200)

[iss]
disturbance = "0.1*sin(t)"  # expression in t
horizon = 200.0

[alpha_star]
lo = 0.001
hi = 10.0
iterations = 20

# To verify your own system, set example = "custom" and fill in:
# [custom]
# dim_state = 1
# dim_param = 1
# f = ["x1/sqrt(1+x1^2)*(1-90*tau1)"]   # one expression per state equation
# p = ["cos(t)^2"]                      # slow signal components, in t
# p_prime = ["-sin(2*t)"]               # optional; finite differences otherwise
# p_bar = 1.0                           # optional declared sup |p'|
# period = 3.141592653589793            # or estimation_horizon = [lo, hi]
# V = "exp(sqrt(1+x1^2)) - e"           # in x1..xn, t, tau1..taud
# alpha1 = "exp(sqrt(1+s^2)) - e"       # sandwich bounds, in s
# alpha2 = "exp(sqrt(1+s^2)) - e"
# q = "45*tau1 - 4.787631819946196"     # decay rate, in tau1..taud
# c_a = 0.0
# c_b = 55.64504575213465
# T = 3.141592653589793
# m_bar = 40.2123681800538              # optional declared sup |q(p(.))|
# g = [["0"], ["1"]]                    # optional control rows, for iss mode
"""


@dataclass(frozen=True)
class RunConfig:
    mode: str
    example: str
    alpha_list: tuple[float, ...]
    out_dir: Path
    formats: tuple[str, ...]
    grid: GridSpec
    traj_count: int
    traj_radius: float
    traj_horizon: float | None
    margin_tol: float
    iss_disturbance: str
    iss_horizon: float
    astar_lo: float
    astar_hi: float
    astar_iterations: int
    custom: dict | None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def load_config(path: Path, mode: str, seed: int | None, out: str | None) -> RunConfig:
    try:
        raw = tomllib.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config parse error in {path}: {err}") from None

    run = raw.get("run", {})
    grid_raw = raw.get("grid", {})
    traj = raw.get("trajectories", {})
    iss = raw.get("iss", {})
    astar = raw.get("alpha_star", {})

    example = run.get("example", "scalar")
    alphas = tuple(float(a) for a in run.get("alpha", [1.0]))
    if mode in ("certify", "sweep", "iss") and not alphas:
        raise ConfigError(f"mode {mode!r} needs a nonempty alpha list")
    grid = GridSpec(
        radius=float(grid_raw.get("radius", 10.0)),
        n_samples=int(grid_raw.get("samples", 5000)),
        seed=int(seed if seed is not None else grid_raw.get("seed", 0)),
        t_max=(float(grid_raw["t_max"]) if "t_max" in grid_raw else None),
        n_time_samples=int(grid_raw.get("time_samples", 512)),
        slack=float(grid_raw.get("slack", 1e-9)),
    )
    formats = tuple(str(f) for f in run.get("formats", ("csv", "text")))
    if not set(formats) <= {"csv", "text"}:
        raise ConfigError(f"unknown output formats in {formats!r}; use csv and/or text")
    return RunConfig(
        mode=mode,
        example=example,
        alpha_list=alphas,
        out_dir=Path(out if out is not None else run.get("out", "out")),
        formats=formats,
        grid=grid,
        traj_count=int(traj.get("count", 8)),
        traj_radius=float(traj.get("radius", 5.0)),
        traj_horizon=(float(traj["horizon"]) if "horizon" in traj else None),
        margin_tol=float(traj.get("margin_tol", 1e-6)),
        iss_disturbance=str(iss.get("disturbance", "0.1*sin(t)")),
        iss_horizon=float(iss.get("horizon", 200.0)),
        astar_lo=float(astar.get("lo", 1e-3)),
        astar_hi=float(astar.get("hi", 10.0)),
        astar_iterations=int(astar.get("iterations", 20)),
        custom=raw.get("custom"),
    )


def _expr_list(texts, variables) -> list:
    return [parse_expression(str(t), variables=variables) for t in texts]


def build_custom(custom: dict):
    """Assemble a (frozen, path, family, signal) quadruple from expressions."""
    try:
        n = int(custom["dim_state"])
        d = int(custom["dim_param"])
        f_texts = custom["f"]
        p_texts = custom["p"]
        v_text = custom["V"]
        a1_text = custom["alpha1"]
        a2_text = custom["alpha2"]
        q_text = custom["q"]
        c_a = float(custom["c_a"])
        c_b = float(custom["c_b"])
        T = float(custom["T"])
    except KeyError as err:
        raise ConfigError(f"[custom] section is missing the key {err.args[0]!r}") from None

    xvars = state_variables(n, d)
    f_exprs = _expr_list(f_texts, xvars)
    if len(f_exprs) != n:
        raise ConfigError(f"[custom] f needs {n} expressions, got {len(f_exprs)}")

    def f(x, t, tau):
        env = tuple(float(v) for v in x) + (float(t),) + tuple(float(v) for v in tau)
        return np.array([e(*env) for e in f_exprs])

    p_exprs = _expr_list(p_texts, ("t",))
    if len(p_exprs) != d:
        raise ConfigError(f"[custom] p needs {d} expressions, got {len(p_exprs)}")

    def p(t):
        return np.array([e(float(t)) for e in p_exprs])

    p_prime = None
    if "p_prime" in custom:
        pp_exprs = _expr_list(custom["p_prime"], ("t",))

        def p_prime(t):
            return np.array([e(float(t)) for e in pp_exprs])

    path = ParameterPath(
        dim=d,
        p=p,
        p_prime=p_prime,
        p_bar=(float(custom["p_bar"]) if "p_bar" in custom else None),
        period=(float(custom["period"]) if "period" in custom else None),
        estimation_horizon=(
            tuple(float(v) for v in custom["estimation_horizon"])
            if "estimation_horizon" in custom
            else None
        ),
    )

    g = None
    dim_control = 0
    if "g" in custom:
        rows = [ _expr_list(row, xvars) for row in custom["g"] ]
        if len(rows) != n or not rows or len({len(r) for r in rows}) != 1:
            raise ConfigError("[custom] g must be a rectangular list of n expression rows")
        dim_control = len(rows[0])

        def g(x, t, tau):
            env = tuple(float(v) for v in x) + (float(t),) + tuple(float(v) for v in tau)
            return np.array([[e(*env) for e in row] for row in rows])

    frozen = FrozenFamily(
        dim_state=n, dim_param=d, f=f, g=g, dim_control=dim_control
    )

    v_expr = parse_expression(str(v_text), variables=xvars)

    def V(x, t, tau):
        env = tuple(float(v) for v in x) + (float(t),) + tuple(float(v) for v in tau)
        return v_expr(*env)

    a1_expr = parse_expression(str(a1_text), variables=("s",))
    a2_expr = parse_expression(str(a2_text), variables=("s",))
    q_expr = parse_expression(str(q_text), variables=tuple(f"tau{j+1}" for j in range(d)))

    family = LyapunovFamily(
        V=V,
        alpha1=lambda s: a1_expr(float(s)),
        alpha2=lambda s: a2_expr(float(s)),
        q=lambda tau: q_expr(*(float(v) for v in tau)),
        c_a=c_a,
        c_b=c_b,
        T=T,
    )

    sig = None
    if "m_bar" in custom:
        sig = AveragedSignal(
            theta=lambda l: family.q(path.value(l)),
            m_bar=float(custom["m_bar"]),
            window_T=T,
        )
    return frozen, path, family, sig


@dataclass
class _Target:
    name: str
    frozen: FrozenFamily
    path: ParameterPath
    family: LyapunovFamily
    signal: AveragedSignal | None
    bundle: ex.ExampleBundle | None

    def system(self, alpha: float) -> SlowSystem:
        return SlowSystem(frozen=self.frozen, path=self.path, alpha=alpha)


def _resolve_target(cfg: RunConfig) -> _Target:
    if cfg.example == "custom":
        if cfg.custom is None:
            raise ConfigError('example = "custom" needs a [custom] section')
        frozen, path, family, sig = build_custom(cfg.custom)
        return _Target("custom", frozen, path, family, sig, None)
    bundle = ex.by_name(cfg.example)
    return _Target(bundle.name, bundle.frozen, bundle.path, bundle.family, bundle.signal, bundle)


def _write_csv(path: Path, seed: int, header: list[str], rows: list[list]) -> None:
    lines = [CSV_VERSION, f"# seed={seed}", ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _trajectory_csv(path: Path, seed: int, cert, traj) -> None:
    traj = attach_certificate_values(cert, traj)
    n = traj.states.shape[1]
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + ["V_hat", "V_sharp", "dV_sharp_dt", "decrease_bound"]
    )
    rows = []
    for k, t in enumerate(traj.times):
        t = float(t)
        x = traj.states[k]
        vhat = frozen_value(cert, x, t)
        bracket, gain = certificate_derivative_scaled(cert, x, t)
        if bracket == 0.0:
            dv = 0.0
        elif gain < 700.0:
            dv = bracket * math.exp(gain)
        else:
            dv = math.copysign(math.inf, bracket)
        rows.append(
            [t]
            + [float(v) for v in x]
            + [vhat, float(traj.cert_values[k]), float(dv), -cert.decrease_coeff * vhat]
        )
    _write_csv(path, seed, header, rows)


def _falsify_lines(target: _Target, alpha: float, grid: GridSpec) -> tuple[list[str], bool]:
    reports = falsify_assumption1(target.family, target.system(alpha), grid)
    lines = [r.summary() for r in reports]
    return lines, all(r.passed for r in reports)


def run(cfg: RunConfig) -> int:
    """Execute the configured pipeline; returns the process exit code."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    want_csv = "csv" in cfg.formats
    target = _resolve_target(cfg)
    lines: list[str] = [
        f"slowcert {cfg.mode} report",
        f"example: {target.name}",
        f"seed: {cfg.grid.seed}",
        "grid checks are sampling, not proof: 'pass' means no violation was "
        "found among the stated number of samples",
        "",
    ]
    ok = True

    if cfg.mode == "validate":
        alpha = cfg.alpha_list[0] if cfg.alpha_list else 1.0
        rep_lines, ok = _falsify_lines(target, alpha, cfg.grid)
        lines += [f"assumption falsification at alpha={_fmt(alpha)}:"] + [
            "  " + ln for ln in rep_lines
        ]

    elif cfg.mode in ("certify", "sweep"):
        summary_rows = []
        for alpha in cfg.alpha_list:
            sys_a = target.system(alpha)
            cert = build_certificate(target.family, sys_a, sig=target.signal)
            rep_lines, assumptions_ok = _falsify_lines(target, alpha, cfg.grid)
            lines += [f"alpha={_fmt(alpha)}:"] + ["  " + ln for ln in rep_lines]
            if cert.below_threshold and cert.threshold_ugas > 0:
                lines.append(
                    f"  warning: alpha <= analytic threshold {_fmt(cert.threshold_ugas)}; "
                    "the decrease guarantee is not claimed here"
                )
            if cfg.mode == "certify":
                x0s = seed_batch(
                    cfg.traj_count, target.frozen.dim_state, cfg.traj_radius, cfg.grid.seed
                )
                horizon = cfg.traj_horizon or default_horizon(target.family.T, alpha)

                def run_one(x0):
                    traj = integrate(sys_a, x0, 0.0, horizon, sample_dt=horizon / 120.0)
                    return traj, check_decrease_along(cert, traj, margin_tol=cfg.margin_tol)

                # trajectories may run on SLOWCERT_THREADS workers; files are
                # written sequentially afterwards
                results = map_workers(run_one, x0s)
                dec_ok = all(report.passed for _, report in results)
                if want_csv:
                    for i, (traj, _) in enumerate(results):
                        _trajectory_csv(
                            out / f"traj_{target.name}_alpha{alpha:.6g}_{i}.csv",
                            cfg.grid.seed,
                            cert,
                            traj,
                        )
                lines.append(f"  decrease along {len(x0s)} trajectories: "
                             f"{'pass' if dec_ok else 'FAIL'}")
            else:
                xs_t = seed_batch(
                    cfg.grid.n_samples, target.frozen.dim_state + 1, 1.0, cfg.grid.seed
                )
                t_max = cfg.grid.resolve_t_max(target.family.T, alpha)
                dec_ok = True
                failures = 0
                for row in xs_t:
                    x = cfg.grid.radius * row[:-1]
                    t = t_max * 0.5 * (row[-1] + 1.0)
                    bracket, gain = certificate_derivative_scaled(cert, x, float(t))
                    vhat = frozen_value(cert, x, float(t))
                    bound = -cert.decrease_coeff * vhat + 1e-9 * (1.0 + vhat)
                    if not scaled_leq(bracket, gain, bound):
                        dec_ok = False
                        failures += 1
                lines.append(
                    f"  grid decrease spot-check: {'pass' if dec_ok else 'FAIL'} "
                    f"({failures} violations / {len(xs_t)} samples)"
                )
            all_ok = assumptions_ok and dec_ok
            ok = ok and all_ok
            summary_rows.append(
                [
                    alpha,
                    cert.threshold_ugas,
                    cert.threshold_iss,
                    cert.decrease_coeff,
                    cert.below_threshold,
                    all_ok,
                ]
            )
        if want_csv:
            _write_csv(
                out / "certificates.csv",
                cfg.grid.seed,
                ["alpha", "threshold_ugas", "threshold_iss", "decrease_coeff",
                 "below_threshold", "pass"],
                summary_rows,
            )

    elif cfg.mode == "iss":
        family = target.family
        if target.bundle is not None and target.bundle.iss_family is not None:
            family = target.bundle.iss_family
        if target.frozen.g is None:
            raise ConfigError(f"example {target.name!r} has no control channel for iss mode")
        u_expr = parse_expression(cfg.iss_disturbance, variables=("t",))

        def disturbance(t):
            return np.full(target.frozen.dim_control, u_expr(float(t)))

        for alpha in cfg.alpha_list:
            sys_a = target.system(alpha)
            cert = build_certificate(family, sys_a, sig=target.signal)
            growth = check_iss_growth(family, sys_a, cfg.grid)
            gated = check_gated_derivative(cert, cfg.grid)
            lines += [f"alpha={_fmt(alpha)}:"] + [
                "  " + r.summary() for r in growth + [gated]
            ]
            if not cert.alpha > cert.threshold_iss:
                lines.append(
                    f"  warning: alpha <= iss threshold {_fmt(cert.threshold_iss)}"
                )
            x0 = np.zeros(target.frozen.dim_state)
            x0[0] = cfg.traj_radius
            report = simulate_iss(cert, disturbance, x0, cfg.iss_horizon)
            lines += [
                f"  disturbance simulation: blow_up={report.blow_up}, "
                f"gated segments={report.gated_segments}, "
                f"gate violations={len(report.gate_violations.witnesses)}, "
                f"ultimate bound={_fmt(report.ultimate_bound)}",
            ]
            if want_csv:
                _trajectory_csv(
                    out / f"traj_iss_{target.name}_alpha{alpha:.6g}.csv",
                    cfg.grid.seed,
                    cert,
                    report.trajectory,
                )
            ok = ok and all(r.passed for r in growth) and gated.passed \
                and report.gate_violations.passed and not report.blow_up

    elif cfg.mode == "alpha-star":
        spec = AlphaSearchSpec(
            alpha_lo=cfg.astar_lo,
            alpha_hi=cfg.astar_hi,
            iterations=cfg.astar_iterations,
            n_trajectories=cfg.traj_count,
            radius=cfg.traj_radius,
            horizon=cfg.traj_horizon,
            seed=cfg.grid.seed,
            margin_tol=cfg.margin_tol,
        )
        try:
            report = estimate_alpha_star(
                target.family, target.system(cfg.astar_hi), spec, sig=target.signal
            )
            lines += [
                f"empirical decrease boundary: {_fmt(report.empirical_boundary)} "
                f"({report.status})",
                f"analytic threshold: {_fmt(report.analytic_threshold)}",
                "probes:",
            ] + [
                f"  alpha={_fmt(a)}: {'pass' if p else 'fail'}" for a, p in report.probes
            ]
            if want_csv:
                _write_csv(
                    out / "alpha_star.csv",
                    cfg.grid.seed,
                    ["empirical_boundary", "analytic_threshold", "status"],
                    [[report.empirical_boundary, report.analytic_threshold, report.status]],
                )
        except NonMonotoneError as err:
            lines.append(f"non-monotone pass region: {err}")

    else:
        raise ConfigError(f"unknown mode {cfg.mode!r}")

    lines.append("")
    lines.append("overall: " + ("pass" if ok else "FAIL"))
    if "text" in cfg.formats:
        (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slowcert",
        description="construct and numerically verify Lyapunov certificates "
        "for slowly time-varying systems",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("validate", "certify", "sweep", "iss", "alpha-star"):
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=None)
    sp_init = sub.add_parser("init", help="write a documented template config")
    sp_init.add_argument("--out", type=str, default="slowcert.toml")

    args = parser.parse_args(argv)
    if args.mode == "init":
        Path(args.out).write_text(TEMPLATE)
        print(f"wrote {args.out}")
        return 0
    try:
        cfg = load_config(args.config, args.mode, args.seed, args.out)
        return run(cfg)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (NumericalError, OverflowError, IntegrationError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except SlowcertError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
