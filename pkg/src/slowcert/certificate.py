"""Construction and evaluation of the exponential-gain Lyapunov certificate.

Given a family satisfying the four averaging conditions, the certificate is

    V_sharp(t, x) = exp((alpha/T) * double window integral of q(p(.)) at t/alpha)
                    * V(x, t, p(t/alpha))

with a guaranteed strict decrease rate once alpha clears the analytic
threshold 2*T*c_a*p_bar/c_b, and an ISS version gated by the class-K-infinity
function chi once alpha clears twice that.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .averaging import (
    LOG_MAX,
    AveragedSignal,
    exp_gain_log,
    signal_from_family,
    window_integral,
)
from .core import LyapunovFamily, SlowSystem, as_vector, estimate_p_bar
from .errors import ConfigError
from .reporting import GridSpec, ViolationReport, Witness, sample_points


@dataclass(frozen=True)
class Certificate:
    """The constructed certificate with its thresholds and decrease data.

    ``threshold_iss`` is exactly twice ``threshold_ugas``. ``decrease_coeff``
    is (c_b / 2T) * exp(-alpha*T*m_bar/2); for very large alpha the float
    field can underflow to zero, so the log form is kept alongside it.
    ``below_threshold`` is a warning flag, not an error: the construction is
    still evaluable below the threshold, the decrease guarantee simply is not
    claimed there.
    """

    family: LyapunovFamily
    sys: SlowSystem
    sig: AveragedSignal
    alpha: float
    p_bar: float
    m_bar: float
    threshold_ugas: float
    threshold_iss: float
    decrease_coeff: float
    log_decrease_coeff: float
    hat_alpha1: Callable[[float], float]
    hat_alpha2: Callable[[float], float]
    below_threshold: bool


def build_certificate(
    family: LyapunovFamily,
    sys: SlowSystem,
    sig: AveragedSignal | None = None,
    p_bar: float | None = None,
    m_bar: float | None = None,
) -> Certificate:
    """Assemble the certificate for the given family and slow system.

    A prebuilt averaged signal can be passed to reuse a fast Theta closure or
    a declared m_bar; otherwise Theta = q o p is composed generically and the
    bound is grid-estimated with the default safety factor. Using an
    overestimated m_bar only weakens the asserted decrease bound, so the
    construction stays sound.

    Raises:
        ConfigError: nonpositive c_b or T, or a family still in mu-weighted
            form (transform it first).
    """
    if family.c_b <= 0 or family.T <= 0:
        raise ConfigError("certificate construction needs c_b > 0 and T > 0")
    if family.mu is not None:
        raise ConfigError(
            "family is in mu-weighted form; apply transform_family before "
            "building a certificate"
        )
    if p_bar is None:
        p_bar = sys.path.p_bar
    if p_bar is None:
        p_bar = estimate_p_bar(sys.path)
    if sig is None:
        sig = signal_from_family(family, sys.path, m_bar=m_bar)
    elif m_bar is not None and m_bar != sig.m_bar:
        sig = AveragedSignal(theta=sig.theta, m_bar=m_bar, window_T=sig.window_T)
    if sig.window_T != family.T:
        raise ConfigError("averaged signal window does not match the family's T")

    alpha = sys.alpha
    T = family.T
    threshold = 2.0 * T * family.c_a * p_bar / family.c_b
    half_band = 0.5 * alpha * T * sig.m_bar
    log_coeff = math.log(family.c_b / (2.0 * T)) - half_band
    coeff = math.exp(log_coeff) if log_coeff > -745.0 else 0.0

    a1, a2 = family.alpha1, family.alpha2
    lo_scale = math.exp(-half_band) if half_band < 745.0 else 0.0
    hi_scale = math.exp(half_band) if half_band < LOG_MAX else math.inf

    def hat_alpha1(s: float) -> float:
        return lo_scale * float(a1(s))

    def hat_alpha2(s: float) -> float:
        return hi_scale * float(a2(s))

    return Certificate(
        family=family,
        sys=sys,
        sig=sig,
        alpha=alpha,
        p_bar=p_bar,
        m_bar=sig.m_bar,
        threshold_ugas=threshold,
        threshold_iss=2.0 * threshold,
        decrease_coeff=coeff,
        log_decrease_coeff=log_coeff,
        hat_alpha1=hat_alpha1,
        hat_alpha2=hat_alpha2,
        below_threshold=not (alpha > threshold),
    )


def frozen_value(cert: Certificate, x, t: float) -> float:
    """V(x, t, p(t/alpha)): the frozen Lyapunov value along the slow path."""
    x = as_vector(x, cert.sys.frozen.dim_state, "x")
    return cert.family.value(x, t, cert.sys.path.value(t / cert.alpha))


def eval_certificate_log(cert: Certificate, x, t: float) -> float:
    """log of the certificate value; -inf where V vanishes (the origin)."""
    v = frozen_value(cert, x, t)
    if v < 0.0:
        raise ConfigError(f"V(x,t,tau) = {v!r} is negative; not a Lyapunov family")
    gain = exp_gain_log(cert.sig, t, cert.alpha)
    if v == 0.0:
        return -math.inf
    return gain + math.log(v)

def eval_certificate(cert: Certificate, x, t: float) -> float:
    """The certificate value, computed in log space and then exponentiated.

    Raises:
        OverflowError: the value exceeds double precision; use
            ``eval_certificate_log`` instead.
    """
    z = eval_certificate_log(cert, x, t)
    if z == -math.inf:
        return 0.0
    if z > LOG_MAX:
        raise OverflowError(
            f"certificate log-value {z:.6g} overflows double precision; "
            "use eval_certificate_log"
        )
    return math.exp(z)


def certificate_derivative_scaled(cert: Certificate, x, t: float) -> tuple[float, float]:
    """Time derivative of the certificate along the slow flow, gain factored out.

    Returns (bracket, gain_log) with d/dt V_sharp = exp(gain_log) * bracket.
    The bracket assembles the analytic chain rule

        V_t + V_x . f + V_tau . p'(t/alpha)/alpha
        + (q(p(t/alpha)) - (1/T) * window integral of q(p(.))) * V

    so checks against gain-scaled bounds can cancel the exponential exactly.
    """
    x = as_vector(x, cert.sys.frozen.dim_state, "x")
    sys = cert.sys
    fam = cert.family
    u = t / cert.alpha
    tau = sys.path.value(u)
    v = fam.value(x, t, tau)
    f = sys.frozen.field(x, t, tau)
    vt = fam.grad_t(x, t, tau)
    vx = fam.grad_x(x, t, tau)
    vtau = fam.grad_tau(x, t, tau)
    pdot = sys.path.derivative(u)
    win = window_integral(cert.sig, u)
    bracket = (
        vt
        + float(np.dot(vx, f))
        + float(np.dot(vtau, pdot)) / cert.alpha
        + (float(fam.q(tau)) - win / fam.T) * v
    )
    return bracket, exp_gain_log(cert.sig, t, cert.alpha)


def certificate_derivative(cert: Certificate, x, t: float) -> float:
    """d/dt of the certificate along the slow flow at (x, t).

    Raises:
        OverflowError: the gain-scaled value overflows; use the scaled form.
    """
    bracket, gain = certificate_derivative_scaled(cert, x, t)
    if bracket == 0.0:
        return 0.0
    z = gain + math.log(abs(bracket))
    if z > LOG_MAX:
        raise OverflowError(
            f"certificate derivative log-magnitude {z:.6g} overflows; "
            "use certificate_derivative_scaled"
        )
    return math.copysign(math.exp(z), bracket)


def iss_gate(cert: Certificate, s: float) -> float:
    """The class-K-infinity input gate chi(s) for the ISS certificate.

    chi(s) = c_b * sqrt(alpha1(s)) / (2*T*c_a^2 * (1 + alpha1(s)^(1/4))).

    Raises:
        ConfigError: c_a = 0. The growth conditions on V_x and g are stated
            with a positive constant; a tau-independent V still needs a
            positive c_a to gate inputs.
    """
    fam = cert.family
    if fam.c_a <= 0.0:
        raise ConfigError(
            "the ISS gate needs c_a > 0: the gradient and control-matrix "
            "growth conditions are stated with a positive constant"
        )
    if s < 0:
        raise ConfigError("gate argument must be nonnegative")
    a1 = float(fam.alpha1(s))
    return fam.c_b * math.sqrt(a1) / (2.0 * fam.T * fam.c_a**2 * (1.0 + a1**0.25))


def check_iss_growth(
    family: LyapunovFamily, sys: SlowSystem, grid: GridSpec
) -> list[ViolationReport]:
    """Sample the gradient and control-matrix growth conditions.

    Checks |V_x(x,t,tau)| <= c_a*sqrt(alpha1(|x|)) and, with |.| the spectral
    norm, |g(x,t,tau)| <= c_a*(1 + alpha1(|x|)^(1/4)) over the sampled grid.
    tau is drawn from the path image, which covers every time-scale constant
    at once. Violations are data, not errors: the reports carry them.
    """
    if sys.frozen.g is None:
        raise ConfigError("growth check needs a control channel g on the frozen family")
    xs, ts, taus = sample_points(grid, sys.frozen.dim_state, family.T, sys.alpha, sys.path)
    w5: list[Witness] = []
    w6: list[Witness] = []
    c_a = family.c_a
    for x, t, tau in zip(xs, ts, taus):
        t = float(t)
        r = float(np.linalg.norm(x))
        a1 = float(family.alpha1(r))
        vx = float(np.linalg.norm(family.grad_x(x, t, tau)))
        rhs5 = c_a * math.sqrt(a1)
        tol5 = grid.slack * (1.0 + abs(rhs5))
        if vx > rhs5 + tol5:
            w5.append(Witness((tuple(x), t, tuple(tau)), vx, rhs5, rhs5 + tol5 - vx))
        gn = float(np.linalg.norm(sys.frozen.control_matrix(x, t, tau), 2))
        rhs6 = c_a * (1.0 + a1**0.25)
        tol6 = grid.slack * (1.0 + abs(rhs6))
        if gn > rhs6 + tol6:
            w6.append(Witness((tuple(x), t, tuple(tau)), gn, rhs6, rhs6 + tol6 - gn))
    n = len(xs)
    return [
        ViolationReport("A5", tuple(w5), n),
        ViolationReport("A6", tuple(w6), n),
    ]


def worst_case_gate_input(cert: Certificate) -> Callable[[float, np.ndarray], np.ndarray]:
    """Input signal saturating the gate in the direction that stresses it most.

    Returns u(t, x) = chi(|x|) * unit(g^T V_x^T): the unit vector maximizing
    V_x . g . u, i.e. the boundary case of the gated decrease condition.
    """
    sys = cert.sys
    fam = cert.family

    def gate_input(t: float, x: np.ndarray) -> np.ndarray:
        x = as_vector(x, sys.frozen.dim_state, "x")
        tau = sys.path.value(t / cert.alpha)
        vx = fam.grad_x(x, t, tau)
        g = sys.frozen.control_matrix(x, t, tau)
        w = g.T @ vx
        norm = float(np.linalg.norm(w))
        level = iss_gate(cert, float(np.linalg.norm(x)))
        if norm == 0.0:
            return np.zeros(sys.frozen.dim_control)
        return level * w / norm

    return gate_input
