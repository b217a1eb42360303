import math

import numpy as np
import pytest
from scipy.integrate import quad

from slowcert import NumericalError, QuadratureError, adaptive_simpson
from slowcert.quad import gauss_legendre_window


def test_polynomial_exact():
    assert adaptive_simpson(lambda x: x**3, 0.0, 1.0) == pytest.approx(0.25, abs=1e-13)


def test_sin_halfwave():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-11)


def test_reversed_bounds_flip_sign():
    fwd = adaptive_simpson(math.exp, 0.0, 1.0)
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-fwd, abs=1e-13)


def test_empty_interval():
    assert adaptive_simpson(math.exp, 2.0, 2.0) == 0.0


def test_matches_scipy_on_oscillatory():
    f = lambda x: math.cos(7.3 * x) * math.exp(-0.2 * x) + x * math.sin(3 * x)
    ref, _ = quad(f, -1.0, 4.0, epsabs=1e-13, epsrel=1e-13)
    assert adaptive_simpson(f, -1.0, 4.0, tol=1e-11) == pytest.approx(ref, abs=1e-9)


def test_depth_exhaustion_raises():
    # integrable singularity, but a depth budget of 2 cannot resolve it
    f = lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0
    with pytest.raises(QuadratureError) as err:
        adaptive_simpson(f, 0.0, 1.0, tol=1e-12, max_depth=2)
    assert err.value.error_estimate is not None


def test_nonfinite_integrand_raises():
    with pytest.raises(NumericalError):
        adaptive_simpson(lambda x: float("nan"), 0.0, 1.0)


def test_gauss_legendre_window_matches_adaptive():
    theta = lambda r: np.sin(1.3 * r) + 0.5 * np.cos(4.0 * r)
    c = 2.0
    ts = np.linspace(-1.0, 6.0, 9)
    weighted, plain = gauss_legendre_window(theta, ts, c)
    for i, t in enumerate(ts):
        t = float(t)
        w_ref = adaptive_simpson(lambda r: (r - t + c) * theta(r), t - c, t, tol=1e-12)
        p_ref = adaptive_simpson(theta, t - c, t, tol=1e-12)
        assert weighted[i] == pytest.approx(w_ref, abs=1e-11)
        assert plain[i] == pytest.approx(p_ref, abs=1e-11)
