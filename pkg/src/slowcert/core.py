"""Domain types: parameter paths, frozen families, Lyapunov families, slow systems.

Everything here is immutable after construction and evaluation is a pure
function of the arguments, so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError

# Finite-difference step for gradients supplied implicitly: h = max(1e-6, 1e-8*|arg|).
FD_ABS = 1e-6
FD_REL = 1e-8


def _fd_step(value: float) -> float:
    return max(FD_ABS, FD_REL * abs(value))


def as_vector(value, dim: int, what: str) -> np.ndarray:
    """Coerce a scalar or sequence to a float vector of the expected length."""
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape != (dim,):
        raise ConfigError(f"{what} has shape {arr.shape}, expected ({dim},)")
    return arr


@dataclass(frozen=True)
class ParameterPath:
    """The slow signal p: R -> R^d together with its derivative bound.

    ``p`` must be evaluable on all of the real line: the certificate integrals
    reach back to t/alpha - T, which is negative for small t. Built-in paths
    are globally defined; user paths must set ``globally_defined`` truthfully,
    we never extrapolate.

    Attributes:
        p: time -> parameter vector (shape (dim,)).
        p_prime: optional analytic derivative; central differences otherwise.
        p_bar: optional declared bound sup_r |p'(r)|; estimated when absent.
        period: optional period of p.
        estimation_horizon: (lo, hi) interval for sup estimates when aperiodic.
        globally_defined: p is evaluable for every real argument.
        finite_diff_ok: allow finite-difference fallback for p'.
    """

    dim: int
    p: Callable[[float], np.ndarray]
    p_prime: Callable[[float], np.ndarray] | None = None
    p_bar: float | None = None
    period: float | None = None
    estimation_horizon: tuple[float, float] | None = None
    globally_defined: bool = True
    finite_diff_ok: bool = True

    def __post_init__(self):
        if self.dim <= 0:
            raise ConfigError("parameter dimension must be positive")
        if self.p_bar is not None and self.p_bar < 0:
            raise ConfigError("p_bar must be nonnegative")
        if self.period is not None and self.period <= 0:
            raise ConfigError("period must be positive")
        if not self.globally_defined:
            raise ConfigError(
                "parameter paths must be declared evaluable on all of R; "
                "the certificate integrals reach negative times"
            )

    def value(self, r: float) -> np.ndarray:
        return as_vector(self.p(r), self.dim, "p(r)")

    def derivative(self, r: float) -> np.ndarray:
        if self.p_prime is not None:
            return as_vector(self.p_prime(r), self.dim, "p'(r)")
        if not self.finite_diff_ok:
            raise ConfigError(
                "path has no p_prime and finite differences were disabled"
            )
        h = _fd_step(r)
        return (self.value(r + h) - self.value(r - h)) / (2.0 * h)

    def default_horizon(self) -> tuple[float, float]:
        """Interval used for sup estimates: one period, or the declared horizon."""
        if self.period is not None:
            return (0.0, self.period)
        if self.estimation_horizon is not None:
            return self.estimation_horizon
        raise ConfigError(
            "path needs a period, an estimation_horizon, or declared bounds "
            "before sup-type constants can be estimated"
        )

    def check_derivative_bound(self, rs) -> None:
        """Verify |p'(r)| <= p_bar on the sampled grid."""
        if self.p_bar is None:
            return
        for r in rs:
            g = float(np.linalg.norm(self.derivative(float(r))))
            if g > self.p_bar * (1.0 + 1e-9) + 1e-12:
                raise ConfigError(
                    f"|p'({r!r})| = {g:.6g} exceeds declared p_bar = {self.p_bar:.6g}"
                )

    def check_period(self, rs, tol: float = 1e-9) -> None:
        if self.period is None:
            return
        for r in rs:
            d = float(np.linalg.norm(self.value(float(r) + self.period) - self.value(float(r))))
            if d > tol:
                raise ConfigError(f"p is not {self.period}-periodic at r={r!r} (gap {d:.3e})")


def estimate_p_bar(
    path: ParameterPath,
    lo: float | None = None,
    hi: float | None = None,
    n: int = 100_000,
    safety: float = 1.05,
) -> float:
    """Grid estimate of sup |p'(r)| times a safety factor.

    The estimate is never below any sampled value; refining the grid can only
    increase the pre-safety-factor maximum.

    Raises:
        ConfigError: empty grid, safety factor below 1, or no usable horizon.
    """
    if safety < 1.0:
        raise ConfigError("safety factor must be >= 1")
    if n <= 0:
        raise ConfigError("sup estimation grid is empty")
    if lo is None or hi is None:
        lo, hi = path.default_horizon()
    if hi <= lo:
        raise ConfigError("sup estimation grid is empty (hi <= lo)")
    rs = np.linspace(lo, hi, n)
    best = 0.0
    for r in rs:
        g = float(np.linalg.norm(path.derivative(float(r))))
        if g > best:
            best = g
    return best * safety


@dataclass(frozen=True)
class FrozenFamily:
    """The parameterized vector field f(x, t, tau), optionally with a control matrix g.

    f(0, t, tau) = 0 is required for the stability claims to be meaningful;
    ``check_equilibrium`` enforces it on a sampled grid rather than assuming
    it silently.
    """

    dim_state: int
    dim_param: int
    f: Callable[[np.ndarray, float, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, float, np.ndarray], np.ndarray] | None = None
    dim_control: int = 0
    state_bound: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.dim_state <= 0 or self.dim_param <= 0:
            raise ConfigError("state and parameter dimensions must be positive")
        if (self.g is None) != (self.dim_control == 0):
            raise ConfigError("dim_control must be positive exactly when g is present")

    def field(self, x: np.ndarray, t: float, tau: np.ndarray) -> np.ndarray:
        return as_vector(self.f(x, t, tau), self.dim_state, "f(x,t,tau)")

    def control_matrix(self, x: np.ndarray, t: float, tau: np.ndarray) -> np.ndarray:
        if self.g is None:
            raise ConfigError("frozen family has no control channel g")
        mat = np.asarray(self.g(x, t, tau), dtype=float)
        if mat.shape != (self.dim_state, self.dim_control):
            raise ConfigError(
                f"g(x,t,tau) has shape {mat.shape}, expected "
                f"({self.dim_state}, {self.dim_control})"
            )
        return mat

    def check_equilibrium(self, ts, taus, tol: float = 1e-10) -> None:
        """Verify f(0, t, tau) = 0 on the sampled (t, tau) grid."""
        zero = np.zeros(self.dim_state)
        for t in ts:
            for tau in taus:
                v = self.field(zero, float(t), np.asarray(tau, dtype=float))
                if float(np.linalg.norm(v)) > tol:
                    raise ConfigError(
                        f"f(0, {t!r}, {tau!r}) = {v!r}; the origin is not an equilibrium"
                    )

    def check_state_bound(self, xs, ts, taus, tol: float = 1e-9) -> None:
        if self.state_bound is None:
            return
        for x in xs:
            x = np.asarray(x, dtype=float)
            bound = self.state_bound(float(np.linalg.norm(x)))
            for t in ts:
                for tau in taus:
                    v = float(np.linalg.norm(self.field(x, float(t), np.asarray(tau, float))))
                    if v > bound * (1.0 + 1e-9) + tol:
                        raise ConfigError(
                            f"|f| = {v:.6g} exceeds the declared state bound {bound:.6g} "
                            f"at x={x!r}, t={t!r}, tau={tau!r}"
                        )


@dataclass(frozen=True)
class LyapunovFamily:
    """A family V(x, t, tau) with sandwich functions and averaging data.

    Gradients may be supplied analytically; any that are absent fall back to
    central finite differences with step max(1e-6, 1e-8*|argument|). ``mu``
    is set only for families in the relaxed (mu-weighted) form; ``None``
    means the decay condition is linear in V.
    """

    V: Callable[[np.ndarray, float, np.ndarray], float]
    alpha1: Callable[[float], float]
    alpha2: Callable[[float], float]
    q: Callable[[np.ndarray], float]
    c_a: float
    c_b: float
    T: float
    V_t: Callable[[np.ndarray, float, np.ndarray], float] | None = None
    V_x: Callable[[np.ndarray, float, np.ndarray], np.ndarray] | None = None
    V_tau: Callable[[np.ndarray, float, np.ndarray], np.ndarray] | None = None
    mu: object | None = None  # transform.MuFunction when present

    def __post_init__(self):
        if self.c_a < 0:
            raise ConfigError("c_a must be nonnegative")
        if self.c_b <= 0:
            raise ConfigError("c_b must be positive")
        if self.T <= 0:
            raise ConfigError("the averaging window T must be positive")

    def value(self, x: np.ndarray, t: float, tau: np.ndarray) -> float:
        v = float(self.V(x, t, tau))
        if not math.isfinite(v):
            raise NumericalError(f"V returned {v!r} at x={x!r}, t={t!r}, tau={tau!r}")
        return v

    def grad_t(self, x: np.ndarray, t: float, tau: np.ndarray) -> float:
        if self.V_t is not None:
            return float(self.V_t(x, t, tau))
        h = _fd_step(t)
        return (self.value(x, t + h, tau) - self.value(x, t - h, tau)) / (2.0 * h)

    def grad_x(self, x: np.ndarray, t: float, tau: np.ndarray) -> np.ndarray:
        if self.V_x is not None:
            return as_vector(self.V_x(x, t, tau), x.shape[0], "V_x")
        out = np.empty_like(x, dtype=float)
        for i in range(x.shape[0]):
            h = _fd_step(float(x[i]))
            xp = x.astype(float).copy()
            xm = x.astype(float).copy()
            xp[i] += h
            xm[i] -= h
            out[i] = (self.value(xp, t, tau) - self.value(xm, t, tau)) / (2.0 * h)
        return out

    def grad_tau(self, x: np.ndarray, t: float, tau: np.ndarray) -> np.ndarray:
        if self.V_tau is not None:
            return np.atleast_1d(np.asarray(self.V_tau(x, t, tau), dtype=float))
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty_like(tau)
        for i in range(tau.shape[0]):
            h = _fd_step(float(tau[i]))
            tp = tau.copy()
            tm = tau.copy()
            tp[i] += h
            tm[i] -= h
            out[i] = (self.value(x, t, tp) - self.value(x, t, tm)) / (2.0 * h)
        return out


@dataclass(frozen=True)
class SlowSystem:
    """The slow dynamics dx/dt = f(x, t, p(t/alpha))."""

    frozen: FrozenFamily
    path: ParameterPath
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("the time-scale constant alpha must be positive")
        if self.path.dim != self.frozen.dim_param:
            raise ConfigError(
                f"path dimension {self.path.dim} does not match the frozen "
                f"family's parameter dimension {self.frozen.dim_param}"
            )


def eval_slow_field(sys: SlowSystem, x, t: float) -> np.ndarray:
    """Evaluate the slow field f(x, t, p(t/alpha)).

    This is the exact composition used everywhere else in the package; there
    is no caching between here and the frozen field.

    Raises:
        NumericalError: the field returned a non-finite component.
    """
    x = as_vector(x, sys.frozen.dim_state, "x")
    dx = sys.frozen.field(x, t, sys.path.value(t / sys.alpha))
    if not np.all(np.isfinite(dx)):
        raise NumericalError(f"slow field is non-finite at x={x!r}, t={t!r}")
    return dx


def check_class_kinfty(
    fn: Callable[[float], float],
    samples,
    zero_tol: float = 1e-12,
    name: str = "function",
) -> None:
    """Check class-K-infinity structure on a sampled increasing sequence.

    Verifies fn(0) = 0 within ``zero_tol`` and strict increase along the
    sorted positive samples. Unboundedness cannot be verified in finitude and
    is not attempted.
    """
    if abs(float(fn(0.0))) > zero_tol:
        raise ConfigError(f"{name}(0) = {fn(0.0)!r}, expected 0 within {zero_tol}")
    xs = sorted(float(s) for s in samples if s > 0)
    prev_x, prev_y = 0.0, 0.0
    for s in xs:
        y = float(fn(s))
        if not (y > prev_y):
            raise ConfigError(
                f"{name} is not strictly increasing: {name}({prev_x}) = {prev_y}, "
                f"{name}({s}) = {y}"
            )
        prev_x, prev_y = s, y
