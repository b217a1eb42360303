"""Averaging identities: the double window integral, its time derivative, and
the exponential gain built from them.

The double integral of the averaged signal over a sliding window is computed
through its single-integral (Fubini) form

    integral over [t-T, t] x [s, t] of Theta(l) dl ds
        = integral over [t-T, t] of (r - t + T) * Theta(r) dr

which needs O(N) instead of O(N^2) evaluations. The nested form survives only
as a test oracle.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .core import LyapunovFamily, ParameterPath
from .errors import ConfigError
from .quad import adaptive_simpson

QUAD_TOL = 1e-10
QUAD_MAX_DEPTH = 40

# math.exp overflows just above this; callers wanting larger exponents must
# stay in log space.
LOG_MAX = 709.0


@dataclass(frozen=True)
class AveragedSignal:
    """The scalar signal Theta(l) = q(p(l)) with its norm bound and window length."""

    theta: Callable[[float], float]
    m_bar: float
    window_T: float

    def __post_init__(self):
        if self.m_bar < 0:
            raise ConfigError("m_bar must be nonnegative")
        if self.window_T <= 0:
            raise ConfigError("window_T must be positive")

    def check_bound(self, ls, tol: float = 1e-12) -> None:
        for l in ls:
            v = abs(float(self.theta(float(l))))
            if v > self.m_bar + tol:
                raise ConfigError(
                    f"|Theta({l!r})| = {v:.6g} exceeds declared m_bar = {self.m_bar:.6g}"
                )


def estimate_m_bar(
    theta: Callable[[float], float],
    lo: float,
    hi: float,
    n: int = 100_000,
    safety: float = 1.05,
) -> float:
    """Grid estimate of sup |Theta| over [lo, hi], times a safety factor."""
    if safety < 1.0:
        raise ConfigError("safety factor must be >= 1")
    if n <= 0 or hi <= lo:
        raise ConfigError("m_bar estimation grid is empty")
    ls = np.linspace(lo, hi, n)
    best = max(abs(float(theta(float(l)))) for l in ls)
    return best * safety


def signal_from_family(
    family: LyapunovFamily,
    path: ParameterPath,
    m_bar: float | None = None,
    horizon: tuple[float, float] | None = None,
    n: int = 100_000,
    safety: float = 1.05,
) -> AveragedSignal:
    """Build Theta = q o p for a family, estimating the bound when not declared."""

    def theta(l: float) -> float:
        return float(family.q(path.value(l)))

    if m_bar is None:
        if horizon is None:
            lo, hi = path.default_horizon()
            lo = min(lo, lo - family.T)
        else:
            lo, hi = horizon
        m_bar = estimate_m_bar(theta, lo, hi, n=n, safety=safety)
    return AveragedSignal(theta=theta, m_bar=m_bar, window_T=family.T)


def double_avg_integral(sig: AveragedSignal, t: float) -> float:
    """The double window integral at time t, via the single-integral form.

    Adaptive Simpson at absolute tolerance 1e-10. The result always satisfies
    |value| <= T^2 * m_bar / 2.
    """
    T = sig.window_T
    theta = sig.theta
    return adaptive_simpson(
        lambda r: (r - t + T) * theta(r), t - T, t, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH
    )


def double_avg_nested_oracle(sig: AveragedSignal, t: float, tol: float = 1e-9) -> float:
    """Literal nested-quadrature form of the double integral. Test oracle only."""
    T = sig.window_T
    theta = sig.theta

    def inner(s: float) -> float:
        return adaptive_simpson(theta, s, t, tol=tol * 0.01, max_depth=QUAD_MAX_DEPTH)

    return adaptive_simpson(inner, t - T, t, tol=tol, max_depth=QUAD_MAX_DEPTH)


def window_integral(sig: AveragedSignal, t: float) -> float:
    """Plain window integral of Theta over [t - T, t]."""
    return adaptive_simpson(
        sig.theta, t - sig.window_T, t, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH
    )


def double_avg_time_derivative(sig: AveragedSignal, t: float) -> float:
    """d/dt of the double window integral: T*Theta(t) - window integral."""
    return sig.window_T * float(sig.theta(t)) - window_integral(sig, t)


def envelope_bound(sig: AveragedSignal) -> float:
    """The uniform bound T^2 * m_bar / 2 on the double window integral."""
    return 0.5 * sig.window_T * sig.window_T * sig.m_bar


def exp_gain_log(sig: AveragedSignal, t: float, alpha: float) -> float:
    """Exponent of the gain: (alpha/T) times the double integral at t/alpha.

    Never overflows for finite inputs; quadrature errors propagate.
    """
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    return (alpha / sig.window_T) * double_avg_integral(sig, t / alpha)


def exp_gain(sig: AveragedSignal, t: float, alpha: float) -> float:
    """The exponential gain multiplying the frozen Lyapunov function.

    Bounded between exp(-alpha*T*m_bar/2) and exp(+alpha*T*m_bar/2).

    Raises:
        OverflowError: the exponent exceeds the double-precision range; the
            caller can work in log space via ``exp_gain_log``.
    """
    z = exp_gain_log(sig, t, alpha)
    if z > LOG_MAX:
        raise OverflowError(
            f"gain exponent {z:.6g} overflows double precision; use exp_gain_log"
        )
    return math.exp(z)
