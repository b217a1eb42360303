"""Scalar adaptive Simpson quadrature and a vectorized Gauss-Legendre window helper.

The adaptive Simpson routine is the production integrator for every window
integral in the package (averaging, assumption checks, the k-transform).
The Gauss-Legendre helper exists only to precompute smooth window integrals
on dense time grids where per-point adaptive calls would be wasteful.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from .errors import NumericalError, QuadratureError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_DEPTH = 40


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> float:
    """Integrate f over [a, b] to an absolute tolerance.

    Classic adaptive Simpson with Richardson extrapolation, run on an explicit
    stack so deep refinements cannot hit the interpreter recursion limit.
    The per-interval budget is halved on each split, so the accumulated error
    is bounded by ``tol``.

    Raises:
        QuadratureError: an interval reached ``max_depth`` while its local
            error estimate still exceeded the local budget.
        NumericalError: the integrand returned a non-finite value.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    def ev(x: float) -> float:
        y = f(x)
        if not math.isfinite(y):
            raise NumericalError(f"integrand returned {y!r} at x={x!r}")
        return y

    fa, fb = ev(a), ev(b)
    m = 0.5 * (a + b)
    fm = ev(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    # entries: (a, fa, m, fm, b, fb, simpson(a,b), local_tol, depth)
    stack = [(a, fa, m, fm, b, fb, whole, tol, 0)]
    while stack:
        a0, fa0, m0, fm0, b0, fb0, s0, tol0, depth = stack.pop()
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm = ev(lm)
        frm = ev(rm)
        sl = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        sr = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = sl + sr - s0
        if abs(delta) <= 15.0 * tol0:
            total += sl + sr + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{a0:.6g}, {b0:.6g}] "
                f"after depth {depth}; local error estimate {abs(delta) / 15.0:.3e} "
                f"exceeds budget {tol0:.3e}",
                error_estimate=abs(delta) / 15.0,
                interval=(a0, b0),
            )
        else:
            stack.append((a0, fa0, lm, flm, m0, fm0, sl, 0.5 * tol0, depth + 1))
            stack.append((m0, fm0, rm, frm, b0, fb0, sr, 0.5 * tol0, depth + 1))
    return sign * total


def gauss_legendre_window(
    theta_grid: Callable[[np.ndarray], np.ndarray],
    ts: np.ndarray,
    width: float,
    order: int = 10,
    panels: int = 24,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the two window integrals used by the averaging identities on a grid.

    For every t in ``ts`` computes, with c = ``width``,

        weighted(t) = integral over [t-c, t] of (r - t + c) * theta(r) dr
        plain(t)    = integral over [t-c, t] of theta(r) dr

    ``theta_grid`` must accept an ndarray of times and return the matching
    ndarray of values. Composite Gauss-Legendre of the given order; for smooth
    integrands the result is accurate to machine precision long before the
    default panel count.

    Returns:
        (weighted, plain) as ndarrays aligned with ``ts``.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    h = width / panels
    # offsets u in [-c, 0]: panel j spans [-c + j*h, -c + (j+1)*h]
    starts = -width + h * np.arange(panels)
    offs = (starts[:, None] + 0.5 * h * (nodes[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * weights, panels)

    ts = np.asarray(ts, dtype=float)
    r = ts[:, None] + offs[None, :]
    th = np.asarray(theta_grid(r.ravel()), dtype=float).reshape(r.shape)
    if not np.all(np.isfinite(th)):
        raise NumericalError("window integrand returned non-finite values on the grid")
    plain = th @ w
    weighted = th @ (w * (offs + width))
    return weighted, plain
