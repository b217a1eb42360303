"""Numerical verification engine: ODE integration, grid falsification of the
standing assumptions, trajectory decrease checks, empirical threshold search,
and disturbance simulation.

All grid checks are sampling, not proof: an empty report says "no violation
found among N samples". Fixed seeds give bit-identical reports.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from .certificate import (
    Certificate,
    build_certificate,
    certificate_derivative_scaled,
    eval_certificate_log,
    frozen_value,
    iss_gate,
)
from .core import LyapunovFamily, SlowSystem, as_vector
from .errors import ConfigError, IntegrationError, NonMonotoneError, NumericalError
from .quad import adaptive_simpson
from .reporting import (
    GridSpec,
    ViolationReport,
    Witness,
    sample_points,
    sobol_unit_box,
)

BLOWUP_RADIUS = 1.0e6

# Dormand-Prince 5(4) tableau. The fifth-order solution is propagated; the
# embedded fourth-order difference drives the error-per-unit-step controller,
# which makes the global error scale like tol^(5/4).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = tuple(
    b5 - b4
    for b5, b4 in zip(
        _B5,
        (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40),
    )
)


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    max_error_estimate: float


@dataclass(frozen=True)
class Trajectory:
    """A time-stamped state sequence, optionally with certificate values attached."""

    times: np.ndarray
    states: np.ndarray
    stats: IntegratorStats
    cert_values: np.ndarray | None = None
    cert_log_values: np.ndarray | None = None

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape[0] != self.times.shape[0]:
            raise ConfigError("trajectory times and states are misaligned")
        if self.times.shape[0] >= 2 and not np.all(np.diff(self.times) > 0):
            raise ConfigError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ConfigError("trajectory states must be finite")
        for vals in (self.cert_values, self.cert_log_values):
            if vals is not None and vals.shape[0] != self.times.shape[0]:
                raise ConfigError("certificate values misaligned with times")


def _adapt_control(control) -> Callable[[float, np.ndarray], np.ndarray] | None:
    """Accept u(t, x) or u(t); normalize to u(t, x)."""
    if control is None:
        return None

    def u(t, x):
        try:
            return control(t, x)
        except TypeError:
            return control(t)

    return u


def integrate(
    sys: SlowSystem,
    x0,
    t0: float,
    tf: float,
    control=None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    sample_dt: float | None = None,
) -> Trajectory:
    """Adaptive embedded Runge-Kutta 4(5) integration of the slow system.

    With ``control`` present the field is f(x,t,p(t/alpha)) + g(...)*u; the
    control may have signature u(t, x) or u(t). ``sample_dt`` turns on dense
    output: accepted steps are interpolated with the C1 cubic Hermite onto a
    uniform grid of that stride (the knots themselves are returned otherwise).

    Raises:
        IntegrationError: step size collapsed below 1e-14 of the span, the
            state left the blow-up radius 1e6, or the field went non-finite
            persistently; the partial trajectory rides on the exception.
        ConfigError: tf <= t0 or t0 < 0.
    """
    if not tf > t0:
        raise ConfigError("integration needs tf > t0")
    if t0 < 0:
        raise ConfigError("integration starts at t0 >= 0")
    x = as_vector(x0, sys.frozen.dim_state, "x0")
    u = _adapt_control(control)
    frozen, path, alpha = sys.frozen, sys.path, sys.alpha

    def field(t: float, y: np.ndarray) -> np.ndarray:
        tau = path.value(t / alpha)
        dy = frozen.field(y, t, tau)
        if u is not None:
            dy = dy + frozen.control_matrix(y, t, tau) @ as_vector(
                u(t, y), frozen.dim_control, "u"
            )
        return dy

    span = tf - t0
    h_min = 1e-14 * span
    knots_t = [t0]
    knots_x = [x.copy()]
    k1 = field(t0, x)
    if not np.all(np.isfinite(k1)):
        raise NumericalError(f"field is non-finite at the initial point t={t0!r}")
    knots_f = [k1.copy()]

    def fail(reason: str, message: str):
        stats = IntegratorStats(steps, rejected, max_err)
        raise IntegrationError(
            message, reason, np.array(knots_t), np.array(knots_x), stats
        )

    t = t0
    h = min(span, max(1e-6, 1e-3 * span))
    steps = rejected = 0
    max_err = 0.0
    ks = [np.empty_like(x) for _ in range(7)]
    while t < tf:
        h = min(h, tf - t)
        ks[0] = k1
        bad = False
        for i in range(1, 7):
            xi = x.copy()
            for a, k in zip(_A[i], ks):
                xi += (h * a) * k
            ks[i] = field(t + _C[i] * h, xi)
            if not np.all(np.isfinite(ks[i])):
                bad = True
                break
        if not bad:
            x5 = x.copy()
            for b, k in zip(_B5, ks):
                if b != 0.0:
                    x5 += (h * b) * k
            err = np.zeros_like(x)
            for e, k in zip(_E, ks):
                if e != 0.0:
                    err += (h * e) * k
            scale = atol + rtol * np.maximum(np.abs(x), np.abs(x5))
            errn = float(np.sqrt(np.mean((err / scale) ** 2))) / h
            bad = not math.isfinite(errn)
        if bad:
            rejected += 1
            h *= 0.25
            if h < h_min:
                fail("non_finite", f"field went non-finite near t={t:.6g}")
            continue
        if errn <= 1.0:
            t = t + h
            x = x5
            k1 = ks[6]  # FSAL: stage 7 sits at the step endpoint
            steps += 1
            max_err = max(max_err, float(np.max(np.abs(err))))
            knots_t.append(t)
            knots_x.append(x.copy())
            knots_f.append(k1.copy())
            if float(np.max(np.abs(x))) > BLOWUP_RADIUS:
                fail(
                    "blow_up",
                    f"state exceeded the blow-up radius {BLOWUP_RADIUS:.0e} at t={t:.6g}",
                )
        else:
            rejected += 1
        h *= min(5.0, max(0.2, 0.9 * max(errn, 1e-16) ** (-0.25)))
        if h < h_min:
            fail("step_collapse", f"step size collapsed below {h_min:.3e} at t={t:.6g}")

    stats = IntegratorStats(steps, rejected, max_err)
    times = np.array(knots_t)
    states = np.array(knots_x)
    if sample_dt is None:
        return Trajectory(times=times, states=states, stats=stats)
    return Trajectory(
        times=(grid := np.arange(t0, tf + 0.5 * sample_dt, sample_dt)),
        states=_hermite_sample(times, states, np.array(knots_f), grid),
        stats=stats,
    )


def _hermite_sample(ts, xs, fs, grid) -> np.ndarray:
    """C1 cubic Hermite interpolation of knot states onto the sample grid."""
    grid = np.clip(grid, ts[0], ts[-1])
    idx = np.clip(np.searchsorted(ts, grid, side="right") - 1, 0, len(ts) - 2)
    h = ts[idx + 1] - ts[idx]
    s = ((grid - ts[idx]) / h)[:, None]
    h = h[:, None]
    x0, x1 = xs[idx], xs[idx + 1]
    f0, f1 = fs[idx], fs[idx + 1]
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s**2 * (3 - 2 * s)
    h11 = s**2 * (s - 1)
    return h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1


def _identity_mu(v: float) -> float:
    return v


def _falsify_conditions(
    family: LyapunovFamily,
    sys: SlowSystem,
    grid: GridSpec,
    mu_fn: Callable[[float], float],
) -> list[ViolationReport]:
    xs, ts, taus = sample_points(grid, sys.frozen.dim_state, family.T, sys.alpha, sys.path)
    slack = grid.slack
    w1: list[Witness] = []
    w2: list[Witness] = []
    w3: list[Witness] = []
    for x, t, tau in zip(xs, ts, taus):
        t = float(t)
        r = float(np.linalg.norm(x))
        v = family.value(x, t, tau)
        muv = float(mu_fn(v))

        lo = float(family.alpha1(r))
        hi = float(family.alpha2(r))
        if lo > v + slack * (1.0 + abs(v)):
            w1.append(Witness((tuple(x), t, tuple(tau)), lo, v, v + slack * (1 + abs(v)) - lo))
        if v > hi + slack * (1.0 + abs(hi)):
            w1.append(Witness((tuple(x), t, tuple(tau)), v, hi, hi + slack * (1 + abs(hi)) - v))

        vdot = family.grad_t(x, t, tau) + float(
            np.dot(family.grad_x(x, t, tau), sys.frozen.field(x, t, tau))
        )
        rhs2 = -float(family.q(tau)) * muv
        tol2 = slack * (1.0 + abs(rhs2))
        if vdot > rhs2 + tol2:
            w2.append(Witness((tuple(x), t, tuple(tau)), vdot, rhs2, rhs2 + tol2 - vdot))

        vtau = float(np.linalg.norm(family.grad_tau(x, t, tau)))
        rhs3 = family.c_a * muv
        tol3 = slack * (1.0 + abs(rhs3))
        if vtau > rhs3 + tol3:
            w3.append(Witness((tuple(x), t, tuple(tau)), vtau, rhs3, rhs3 + tol3 - vtau))

    # Averaging condition: a one-dimensional sweep in the window anchor,
    # covering anchors whose window reaches into negative path time.
    t_max = grid.resolve_t_max(family.T, sys.alpha)
    anchors = np.linspace(0.0, max(family.T, t_max / sys.alpha), grid.n_time_samples)
    w4: list[Witness] = []

    def q_of_p(s: float) -> float:
        return float(family.q(sys.path.value(s)))

    for t in anchors:
        t = float(t)
        val = adaptive_simpson(q_of_p, t - family.T, t, tol=1e-10)
        tol4 = slack * (1.0 + abs(family.c_b))
        if val < family.c_b - tol4:
            w4.append(Witness((t,), val, family.c_b, val - (family.c_b - tol4)))

    n = len(xs)
    return [
        ViolationReport("A1", tuple(w1), n),
        ViolationReport("A2", tuple(w2), n),
        ViolationReport("A3", tuple(w3), n),
        ViolationReport("A4", tuple(w4), int(grid.n_time_samples)),
    ]


def falsify_assumption1(
    family: LyapunovFamily, sys: SlowSystem, grid: GridSpec
) -> list[ViolationReport]:
    """Sample the four standing conditions of the plainly-decaying form.

    Returns one report per condition (sandwich, decay, tau-gradient bound,
    positive-on-average window integral). Violations are results, not errors.
    """
    if family.mu is not None:
        raise ConfigError(
            "family carries a mu weight; use falsify_assumption2 or transform it"
        )
    return _falsify_conditions(family, sys, grid, _identity_mu)


def falsify_assumption2(
    family: LyapunovFamily, sys: SlowSystem, grid: GridSpec
) -> list[ViolationReport]:
    """Mu-weighted variant: decay and tau-gradient bounds scale with mu(V)."""
    if family.mu is None:
        return _falsify_conditions(family, sys, grid, _identity_mu)
    mu = family.mu
    mu_fn = mu.value if hasattr(mu, "value") else mu
    return _falsify_conditions(family, sys, grid, mu_fn)


def attach_certificate_values(cert: Certificate, traj: Trajectory) -> Trajectory:
    """Return a copy of the trajectory with certificate values at every knot."""
    logs = np.array(
        [eval_certificate_log(cert, x, float(t)) for t, x in zip(traj.times, traj.states)]
    )
    with np.errstate(over="ignore"):
        vals = np.exp(logs)
    return replace(traj, cert_values=vals, cert_log_values=logs)


def check_decrease_along(
    cert: Certificate, traj: Trajectory, margin_tol: float = 1e-6,
    state_floor: float = 1e-8,
) -> ViolationReport:
    """Check the guaranteed decrease rate of the certificate along a trajectory.

    At consecutive knots the discrete decrement must satisfy

        (Vs(t_{k+1}) - Vs(t_k)) / dt <= -decrease_coeff * V(t_k)
                                         + margin_tol * (1 + V(t_k))

    where V is the frozen value along the path. One-sided differences at the
    knots keep the check valid for families with finite-difference gradients.
    Segments whose endpoints both lie below ``state_floor`` are excluded: a
    state that has decayed to the integrator's absolute-tolerance resolution
    is noise, and the exponential gain amplifies that noise arbitrarily.
    """
    if traj.cert_values is None:
        traj = attach_certificate_values(cert, traj)
    vs = traj.cert_values
    if not np.all(np.isfinite(vs)):
        raise OverflowError(
            "certificate values overflow along this trajectory; "
            "rerun at a smaller alpha or work in log space"
        )
    witnesses: list[Witness] = []
    norms = np.linalg.norm(traj.states, axis=1)
    audited = 0
    for k in range(len(traj.times) - 1):
        if max(norms[k], norms[k + 1]) <= state_floor:
            continue
        audited += 1
        dt = float(traj.times[k + 1] - traj.times[k])
        vhat = frozen_value(cert, traj.states[k], float(traj.times[k]))
        slope = float(vs[k + 1] - vs[k]) / dt
        rhs = -cert.decrease_coeff * vhat + margin_tol * (1.0 + vhat)
        if slope > rhs:
            witnesses.append(
                Witness(
                    (float(traj.times[k]), tuple(traj.states[k])),
                    slope,
                    rhs,
                    rhs - slope,
                )
            )
    return ViolationReport("decrease", tuple(witnesses), audited)


@dataclass(frozen=True)
class AlphaSearchSpec:
    """Bisection control for locating the empirical decrease boundary."""

    alpha_lo: float
    alpha_hi: float
    iterations: int = 20
    n_trajectories: int = 8
    radius: float = 5.0
    horizon: float | None = None
    seed: int = 0
    margin_tol: float = 1e-6
    sample_dt: float | None = None

    def __post_init__(self):
        if not (0 < self.alpha_lo < self.alpha_hi):
            raise ConfigError("need 0 < alpha_lo < alpha_hi")


@dataclass(frozen=True)
class AlphaStarReport:
    empirical_boundary: float
    analytic_threshold: float
    status: str  # "bracketed" | "all_pass" | "none_pass"
    probes: tuple[tuple[float, bool], ...]


def seed_batch(n: int, dim: int, radius: float, seed: int) -> np.ndarray:
    """Deterministic batch of initial states in the sup-norm ball."""
    u = sobol_unit_box(n, dim, seed)
    return radius * (2.0 * u - 1.0)


def default_horizon(T: float, alpha: float) -> float:
    """Trajectory length for decrease checks: a few windows, capped for speed."""
    return float(min(max(4.0 * alpha * max(T, 1.0), 5.0), 200.0))


def decrease_passes(
    family: LyapunovFamily,
    sys: SlowSystem,
    x0s,
    margin_tol: float = 1e-6,
    horizon: float | None = None,
    sample_dt: float | None = None,
    sig=None,
    m_bar: float | None = None,
) -> bool:
    """Build the certificate at sys.alpha and run the decrease check on a batch."""
    cert = build_certificate(family, sys, sig=sig, m_bar=m_bar)
    tf = horizon if horizon is not None else default_horizon(family.T, sys.alpha)
    dt = sample_dt if sample_dt is not None else tf / 120.0
    for x0 in x0s:
        try:
            traj = integrate(sys, x0, 0.0, tf, sample_dt=dt)
        except IntegrationError:
            return False
        if not check_decrease_along(cert, traj, margin_tol=margin_tol).passed:
            return False
    return True


def estimate_alpha_star(
    family: LyapunovFamily,
    sys_template: SlowSystem,
    search: AlphaSearchSpec,
    sig=None,
    m_bar: float | None = None,
) -> AlphaStarReport:
    """Bisect for the alpha where the certificate decrease empirically begins to hold.

    The analytic threshold is sufficient, not necessary, so the empirical
    boundary is expected at or below it. Monotonicity of the pass predicate
    in alpha is not guaranteed by the theory; a pass at the low end combined
    with a failure at the high end raises NonMonotoneError rather than
    pretending a boundary exists.
    """
    x0s = seed_batch(
        search.n_trajectories, sys_template.frozen.dim_state, search.radius, search.seed
    )

    def passes(alpha: float) -> bool:
        sys = replace(sys_template, alpha=alpha)
        return decrease_passes(
            family,
            sys,
            x0s,
            margin_tol=search.margin_tol,
            horizon=search.horizon,
            sample_dt=search.sample_dt,
            sig=sig,
            m_bar=m_bar,
        )

    analytic = build_certificate(
        family, replace(sys_template, alpha=search.alpha_hi), sig=sig, m_bar=m_bar
    ).threshold_ugas

    probes: list[tuple[float, bool]] = []
    lo_pass = passes(search.alpha_lo)
    probes.append((search.alpha_lo, lo_pass))
    hi_pass = passes(search.alpha_hi)
    probes.append((search.alpha_hi, hi_pass))

    if lo_pass and hi_pass:
        return AlphaStarReport(search.alpha_lo, analytic, "all_pass", tuple(probes))
    if lo_pass and not hi_pass:
        raise NonMonotoneError(
            f"decrease check passes at alpha={search.alpha_lo} but fails at "
            f"alpha={search.alpha_hi}; the pass region is not monotone here"
        )
    if not lo_pass and not hi_pass:
        return AlphaStarReport(search.alpha_hi, analytic, "none_pass", tuple(probes))

    lo, hi = search.alpha_lo, search.alpha_hi
    for _ in range(search.iterations):
        mid = 0.5 * (lo + hi)
        ok = passes(mid)
        probes.append((mid, ok))
        if ok:
            hi = mid
        else:
            lo = mid
    return AlphaStarReport(hi, analytic, "bracketed", tuple(probes))


@dataclass(frozen=True)
class IssReport:
    """Outcome of a disturbance simulation against the gated certificate."""

    trajectory: Trajectory
    gated_segments: int
    gate_violations: ViolationReport
    ultimate_bound: float
    blow_up: bool
    alpha_above_iss_threshold: bool


def simulate_iss(
    cert: Certificate,
    disturbance,
    x0,
    horizon: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    sample_dt: float | None = None,
    log_margin: float = 1e-9,
) -> IssReport:
    """Integrate the controlled system and audit the gated decrease property.

    Wherever the input satisfied |u| <= chi(|x|) at both ends of a knot
    segment, the certificate must have decreased over that segment (checked
    in log space, so very large gains cannot overflow the comparison).
    Segments where the state sits at the integrator's absolute-tolerance
    noise floor are excluded from the audit: there the state is resolution
    noise and log-values of the certificate are meaningless. The empirical
    ultimate bound is the largest state norm over the final third of the
    horizon. Blow-ups are reported, not raised.
    """
    sys = cert.sys
    if sys.frozen.g is None:
        raise ConfigError("ISS simulation needs a control channel g")
    noise_floor = 100.0 * atol
    u = _adapt_control(disturbance)
    blow_up = False
    try:
        traj = integrate(
            sys, x0, 0.0, horizon, control=u, rtol=rtol, atol=atol, sample_dt=sample_dt
        )
    except IntegrationError as err:
        if err.reason != "blow_up":
            raise
        blow_up = True
        traj = Trajectory(times=err.times, states=err.states, stats=err.stats)

    logs = np.array(
        [eval_certificate_log(cert, x, float(t)) for t, x in zip(traj.times, traj.states)]
    )
    with np.errstate(over="ignore"):
        vals = np.exp(logs)
    traj = replace(traj, cert_values=vals, cert_log_values=logs)

    gated = [
        float(np.linalg.norm(as_vector(u(float(t), x), sys.frozen.dim_control, "u")))
        <= iss_gate(cert, float(np.linalg.norm(x)))
        for t, x in zip(traj.times, traj.states)
    ]
    witnesses: list[Witness] = []
    n_gated = 0
    norms = np.linalg.norm(traj.states, axis=1)
    for k in range(len(traj.times) - 1):
        if max(norms[k], norms[k + 1]) <= noise_floor:
            continue
        if gated[k] and gated[k + 1]:
            n_gated += 1
            if logs[k + 1] > logs[k] + log_margin:
                witnesses.append(
                    Witness(
                        (float(traj.times[k]), tuple(traj.states[k])),
                        float(logs[k + 1]),
                        float(logs[k]),
                        float(logs[k] + log_margin - logs[k + 1]),
                    )
                )
    tail = traj.states[traj.times >= traj.times[-1] - (horizon / 3.0)]
    ultimate = float(np.max(np.linalg.norm(tail, axis=1))) if len(tail) else math.inf
    return IssReport(
        trajectory=traj,
        gated_segments=n_gated,
        gate_violations=ViolationReport("L2", tuple(witnesses), max(n_gated, 0)),
        ultimate_bound=ultimate,
        blow_up=blow_up,
        alpha_above_iss_threshold=cert.alpha > cert.threshold_iss,
    )


def scaled_leq(bracket: float, gain_log: float, bound: float) -> bool:
    """Decide bracket * exp(gain_log) <= bound without forming the product.

    Used to compare a gain-scaled derivative against an unscaled bound when
    the exponential would overflow or underflow double precision.
    """
    if bracket == 0.0:
        return 0.0 <= bound
    if bracket < 0.0:
        if bound >= 0.0:
            return True
        # both negative: need gain + log(-bracket) >= log(-bound)
        return gain_log + math.log(-bracket) >= math.log(-bound)
    if bound <= 0.0:
        return False
    return gain_log + math.log(bracket) <= math.log(bound)


def check_certificate_sandwich(
    cert: Certificate, grid: GridSpec
) -> ViolationReport:
    """Sample the two-sided bound hat_alpha1(|x|) <= Vs <= hat_alpha2(|x|).

    The comparison runs in log space so certificates whose gain exceeds the
    double-precision range are still checked honestly; the slack becomes a
    relative tolerance there.
    """
    xs, ts, _ = sample_points(
        grid, cert.sys.frozen.dim_state, cert.family.T, cert.alpha, cert.sys.path
    )
    witnesses: list[Witness] = []
    log_slack = max(grid.slack, 1e-15)
    for x, t in zip(xs, ts):
        t = float(t)
        r = float(np.linalg.norm(x))
        z = eval_certificate_log(cert, x, t)
        lo = cert.hat_alpha1(r)
        hi = cert.hat_alpha2(r)
        log_lo = math.log(lo) if lo > 0 else -math.inf
        log_hi = math.log(hi) if hi > 0 else -math.inf
        if z < log_lo - log_slack:
            witnesses.append(Witness((tuple(x), t), log_lo, z, z - log_lo))
        if z > log_hi + log_slack:
            witnesses.append(Witness((tuple(x), t), z, log_hi, log_hi - z))
    return ViolationReport("L1", tuple(witnesses), len(xs))


def check_gated_derivative(
    cert: Certificate, grid: GridSpec, margin: float = 1e-9
) -> ViolationReport:
    """Grid check of the gated decrease with worst-case inputs on the boundary.

    With u = chi(|x|) in the direction maximizing V_x·g·u, verifies the
    gain-scaled controlled derivative against -(c_b/4T) * V. Both sides of
    the gated decrease inequality carry the same exponential gain, which is
    divided out exactly, so the check cannot overflow at large alpha.
    """
    sys = cert.sys
    fam = cert.family
    if sys.frozen.g is None:
        raise ConfigError("gated derivative check needs a control channel g")
    xs, ts, _ = sample_points(grid, sys.frozen.dim_state, fam.T, cert.alpha, sys.path)
    witnesses: list[Witness] = []
    for x, t in zip(xs, ts):
        t = float(t)
        bracket, _ = certificate_derivative_scaled(cert, x, t)
        u_level = iss_gate(cert, float(np.linalg.norm(x)))
        tau = sys.path.value(t / cert.alpha)
        vx = fam.grad_x(x, t, tau)
        g = sys.frozen.control_matrix(x, t, tau)
        w = g.T @ vx
        lhs = bracket + u_level * float(np.linalg.norm(w))
        vhat = fam.value(x, t, tau)
        rhs = -(fam.c_b / (4.0 * fam.T)) * vhat
        tol = margin * (1.0 + abs(rhs))
        if lhs > rhs + tol:
            witnesses.append(Witness((tuple(x), t), lhs, rhs, rhs + tol - lhs))
    return ViolationReport("L2", tuple(witnesses), len(xs))
