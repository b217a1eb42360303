"""Conversion of mu-weighted Lyapunov families into plainly-decaying ones.

A family whose decay condition reads -q(tau)*mu(V) instead of -q(tau)*V is
rescaled through

    k(r) = exp(xi * integral from 1 to r of 1/mu(l) dl),  k(0) = 0

with xi = 2*B and B = sup of mu' over [0, 1]. That choice makes k a C1
class-K-infinity function with the exact identity k'(r)*mu(r) = 2*B*k(r),
so V := k(V~) decays linearly with q := 2*B*q~, c_a := 2*B*c~_a and
c_b := 2*B*c~_b. The 1/mu integrand blows up like 1/(c3*l) at zero, so the
quadrature runs in the substituted variable u = log(l) where it is tame.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .core import FD_ABS, FD_REL, LyapunovFamily
from .errors import ConfigError, DomainError
from .quad import adaptive_simpson

# Flush k to exactly zero once the exponent is this far under the smallest
# positive normal; the limit is exactly 0 and subnormals would only add noise.
UNDERFLOW_KNEE = math.log(2.2250738585072014e-308) + 20.0
MUCON_PROBE_R = 1.0e6


@dataclass(frozen=True)
class MuFunction:
    """A positive definite C1 weight with its stiffness data.

    ``B`` is sup of mu' over [0, 1]; ``c3`` is a constant with
    mu(r) <= c3*r on [0, 1]. Both are grid-estimated when not declared.
    The divergence of the integral of 1/mu at infinity cannot be verified
    numerically in finitude: we check growth up to r = 1e6 against
    ``divergence_floor`` and otherwise require ``declare_divergent``.
    """

    mu: Callable[[float], float]
    mu_prime: Callable[[float], float] | None = None
    B: float | None = None
    c3: float | None = None
    declare_divergent: bool = False
    divergence_floor: float = 10.0

    def value(self, s: float) -> float:
        return float(self.mu(s))

    def derivative(self, s: float) -> float:
        if self.mu_prime is not None:
            return float(self.mu_prime(s))
        h = max(FD_ABS, FD_REL * abs(s))
        if s - h < 0.0:
            # one-sided at the boundary of the domain
            return (self.value(s + h) - self.value(max(s, 0.0))) / h
        return (self.value(s + h) - self.value(s - h)) / (2.0 * h)


def stiffness_B(mu: MuFunction, n: int = 20_001, safety: float = 1.0) -> float:
    """Grid maximum of mu' over [0, 1], times a safety factor.

    Raises:
        ConfigError: the estimate is nonpositive, i.e. mu is not positive
            definite as declared.
    """
    if mu.B is not None:
        if mu.B <= 0:
            raise ConfigError("declared B must be positive")
        return mu.B
    grid = np.linspace(0.0, 1.0, n)
    best = max(mu.derivative(float(s)) for s in grid)
    if best <= 0.0:
        raise ConfigError(
            f"sup of mu' over [0,1] estimated as {best:.3e}; "
            "mu is not positive definite as declared"
        )
    return best * safety


def _estimate_c3(mu: MuFunction) -> float:
    if mu.c3 is not None:
        if mu.c3 <= 0:
            raise ConfigError("declared c3 must be positive")
        return mu.c3
    rs = np.geomspace(1e-8, 1.0, 4001)
    best = max(mu.value(float(r)) / float(r) for r in rs)
    if best <= 0.0:
        raise ConfigError("mu vanishes on (0, 1]; not positive definite")
    return best * 1.05


def _integral_inv_mu_from_one(mu: MuFunction, r: float, tol: float = 1e-11) -> float:
    """Signed integral of 1/mu from 1 to r, in the log-substituted variable."""
    if r <= 0.0:
        raise DomainError("integral of 1/mu reaches the singular endpoint 0")
    if r == 1.0:
        return 0.0

    def integrand(u: float) -> float:
        l = math.exp(u)
        return l / mu.value(l)

    return adaptive_simpson(integrand, 0.0, math.log(r), tol=tol)


def validate_mu(mu: MuFunction, n: int = 2001) -> tuple[float, float]:
    """Check positive definiteness, the linear cap near zero, and divergence.

    Returns (B, c3) for the validated function.

    Raises:
        ConfigError: mu(0) != 0, mu not positive on (0, 1], mu(r) > c3*r on
            the sampled grid, or the divergence proxy fails without a
            declared divergence certificate.
    """
    if abs(mu.value(0.0)) > 1e-12:
        raise ConfigError(f"mu(0) = {mu.value(0.0)!r}, expected 0")
    B = stiffness_B(mu)
    c3 = _estimate_c3(mu)
    for r in np.linspace(1e-6, 1.0, n):
        v = mu.value(float(r))
        if v <= 0.0:
            raise ConfigError(f"mu({r!r}) = {v!r} is not positive")
        if v > c3 * float(r) + 1e-12:
            raise ConfigError(
                f"mu({r!r}) = {v:.6g} exceeds the linear cap c3*r = {c3 * float(r):.6g}"
            )
    if not mu.declare_divergent:
        growth = _integral_inv_mu_from_one(mu, MUCON_PROBE_R, tol=1e-8)
        if growth < mu.divergence_floor:
            raise ConfigError(
                f"integral of 1/mu from 1 to {MUCON_PROBE_R:.0e} is only "
                f"{growth:.3g} < floor {mu.divergence_floor:.3g}; the "
                "divergence condition looks violated. Declare divergence "
                "explicitly if mu is known to satisfy it."
            )
    return B, c3


def k_eval(mu: MuFunction, r: float, B: float | None = None) -> float:
    """The rescaling k(r) with xi = 2*B; k(0) = 0 by definition.

    Monotone nondecreasing; below the underflow knee the value is flushed to
    exactly zero (the exponent provably diverges to -infinity there).
    """
    if r < 0.0:
        raise DomainError("k is defined on [0, infinity)")
    if r == 0.0:
        return 0.0
    if B is None:
        B = stiffness_B(mu)
    z = 2.0 * B * _integral_inv_mu_from_one(mu, r)
    if z < UNDERFLOW_KNEE:
        return 0.0
    return math.exp(z)


def k_prime_eval(mu: MuFunction, r: float, B: float | None = None) -> float:
    """Derivative of the rescaling: (xi / mu(r)) * k(r), with k'(0) = 0.

    Zero at r = 0 by the one-sided limit; the power bound
    k'(r) <= xi * mu(1)^(-xi/B) * mu(r)^(xi/B - 1) holds on (0, 1].

    Raises:
        DomainError: negative argument.
    """
    if r < 0.0:
        raise DomainError("k' is defined on [0, infinity)")
    if r == 0.0:
        return 0.0
    if B is None:
        B = stiffness_B(mu)
    xi = 2.0 * B
    z = xi * _integral_inv_mu_from_one(mu, r)
    lz = math.log(xi) - math.log(mu.value(r)) + z
    if lz < UNDERFLOW_KNEE:
        return 0.0
    return math.exp(lz)


def transform_family(tilde: LyapunovFamily) -> LyapunovFamily:
    """Rescale a mu-weighted family into one with a linear decay condition.

    Applies V := k(V~), alpha_i := k o alpha~_i, q := 2B*q~, c_a := 2B*c~_a,
    c_b := 2B*c~_b, clearing mu. Gradients are composed through the chain
    rule with k'. The certificate threshold of the result works out to
    2*T*c~_a*p_bar/c~_b: the stiffness factor B cancels between the rescaled
    c_a and c_b, so the weighted family's own constants decide how large the
    time-scale constant must be.

    Raises:
        ConfigError: tilde has no mu, or mu fails validation.
    """
    if tilde.mu is None:
        raise ConfigError("transform_family expects a family with a mu weight")
    mu = tilde.mu
    if not isinstance(mu, MuFunction):
        mu = MuFunction(mu=mu)
    B, _ = validate_mu(mu)

    V0, q0 = tilde.V, tilde.q
    a1, a2 = tilde.alpha1, tilde.alpha2
    gt, gx, gtau = tilde.grad_t, tilde.grad_x, tilde.grad_tau

    def V(x, t, tau):
        return k_eval(mu, float(V0(x, t, tau)), B)

    def V_t(x, t, tau):
        return k_prime_eval(mu, float(V0(x, t, tau)), B) * gt(x, t, tau)

    def V_x(x, t, tau):
        return k_prime_eval(mu, float(V0(x, t, tau)), B) * gx(x, t, tau)

    def V_tau(x, t, tau):
        return k_prime_eval(mu, float(V0(x, t, tau)), B) * gtau(x, t, tau)

    return LyapunovFamily(
        V=V,
        V_t=V_t,
        V_x=V_x,
        V_tau=V_tau,
        alpha1=lambda s: k_eval(mu, float(a1(s)), B),
        alpha2=lambda s: k_eval(mu, float(a2(s)), B),
        q=lambda tau: 2.0 * B * float(q0(tau)),
        c_a=2.0 * B * tilde.c_a,
        c_b=2.0 * B * tilde.c_b,
        T=tilde.T,
        mu=None,
    )
