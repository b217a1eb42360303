import math

import numpy as np
import pytest

from slowcert import (
    ConfigError,
    FrozenFamily,
    LyapunovFamily,
    NumericalError,
    ParameterPath,
    SlowSystem,
    check_class_kinfty,
    estimate_p_bar,
    eval_slow_field,
)


def test_scalar_field_at_origin(scalar_bundle):
    sys1 = scalar_bundle.system(1.0)
    assert eval_slow_field(sys1, [0.0], 3.7) == pytest.approx([0.0])


def test_scalar_field_hand_value(scalar_bundle):
    # cos^2(0) = 1, so the bracket is 1 - 90 and the field is -89/sqrt(2)
    sys1 = scalar_bundle.system(1.0)
    got = eval_slow_field(sys1, [1.0], 0.0)
    assert got[0] == pytest.approx(-89.0 / math.sqrt(2.0), rel=1e-12)


def test_pendulum_field_hand_value(pendulum_bundle):
    # with no extra damping the bracket is 1: f(1,1) = (1, -2)
    f = pendulum_bundle.frozen.field(np.array([1.0, 1.0]), 0.0, np.array([0.0]))
    assert f == pytest.approx([1.0, -2.0])


def test_field_composition_is_exact(scalar_bundle):
    sys2 = scalar_bundle.system(2.5)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(-5, 5, size=1)
        t = float(rng.uniform(0, 30))
        via_sys = eval_slow_field(sys2, x, t)
        direct = sys2.frozen.field(x, t, sys2.path.value(t / 2.5))
        assert np.array_equal(via_sys, direct)


def test_nonfinite_field_raises():
    frozen = FrozenFamily(
        dim_state=1, dim_param=1, f=lambda x, t, tau: np.array([x[0] / (t - 1.0)])
    )
    path = ParameterPath(dim=1, p=lambda t: np.array([0.0]), p_bar=0.0, period=1.0)
    sys1 = SlowSystem(frozen=frozen, path=path, alpha=1.0)
    with pytest.raises(NumericalError):
        eval_slow_field(sys1, [2.0], 1.0)


class TestEstimatePBar:
    def test_constant_path(self):
        path = ParameterPath(
            dim=2, p=lambda t: np.array([1.0, -3.0]), period=1.0,
            p_prime=lambda t: np.zeros(2),
        )
        assert estimate_p_bar(path) == 0.0

    def test_cos_squared(self):
        path = ParameterPath(
            dim=1,
            p=lambda t: np.array([math.cos(t) ** 2]),
            p_prime=lambda t: np.array([-math.sin(2 * t)]),
            period=math.pi,
        )
        got = estimate_p_bar(path, safety=1.0)
        assert got == pytest.approx(1.0, abs=1e-7)

    def test_three_sigma_path(self, friction_bundle):
        got = estimate_p_bar(friction_bundle.path, safety=1.0)
        assert got == pytest.approx(0.25 * math.sqrt(3.0), abs=1e-7)

    def test_finite_difference_fallback(self):
        path = ParameterPath(dim=1, p=lambda t: np.array([math.sin(t)]), period=2 * math.pi)
        assert estimate_p_bar(path, n=20001, safety=1.0) == pytest.approx(1.0, abs=1e-5)

    def test_refinement_is_monotone(self):
        path = ParameterPath(
            dim=1,
            p=lambda t: np.array([math.sin(9.7 * t)]),
            p_prime=lambda t: np.array([9.7 * math.cos(9.7 * t)]),
            period=2 * math.pi / 9.7,
        )
        coarse = estimate_p_bar(path, n=11, safety=1.0)
        fine = estimate_p_bar(path, n=21, safety=1.0)  # nested grid
        assert fine >= coarse

    def test_empty_grid_rejected(self):
        path = ParameterPath(dim=1, p=lambda t: np.array([0.0]), period=1.0)
        with pytest.raises(ConfigError):
            estimate_p_bar(path, n=0)
        with pytest.raises(ConfigError):
            estimate_p_bar(path, safety=0.5)


def test_path_derivative_bound_check():
    path = ParameterPath(
        dim=1,
        p=lambda t: np.array([math.sin(t)]),
        p_prime=lambda t: np.array([math.cos(t)]),
        p_bar=0.5,  # wrong on purpose
        period=2 * math.pi,
    )
    with pytest.raises(ConfigError):
        path.check_derivative_bound(np.linspace(0, 6.3, 100))


def test_path_period_check():
    path = ParameterPath(dim=1, p=lambda t: np.array([t]), period=1.0)
    with pytest.raises(ConfigError):
        path.check_period([0.0, 0.5])


def test_disabled_finite_differences_rejected():
    path = ParameterPath(
        dim=1, p=lambda t: np.array([math.sin(t)]), period=2 * math.pi,
        finite_diff_ok=False,
    )
    with pytest.raises(ConfigError, match="finite differences"):
        path.derivative(0.3)


def test_non_global_path_rejected():
    with pytest.raises(ConfigError, match="negative times"):
        ParameterPath(dim=1, p=lambda t: np.array([t]), globally_defined=False)


def test_equilibrium_check_rejects_offset_field():
    frozen = FrozenFamily(
        dim_state=1, dim_param=1, f=lambda x, t, tau: np.array([x[0] + 0.1])
    )
    with pytest.raises(ConfigError):
        frozen.check_equilibrium(ts=[0.0], taus=[[0.0]])


def test_state_bound_check(scalar_bundle):
    frozen = FrozenFamily(
        dim_state=1,
        dim_param=1,
        f=scalar_bundle.frozen.f,
        state_bound=lambda s: 91.0 * s / math.sqrt(1 + s * s) + 1e-9,
    )
    xs = [np.array([v]) for v in np.linspace(-30, 30, 31)]
    frozen.check_state_bound(xs, ts=[0.0, 1.0], taus=[[0.0], [1.0]])


class TestClassKInfty:
    def test_bundle_sandwich_functions(self, all_bundles):
        samples = np.geomspace(1e-6, 50.0, 200)
        for bundle in all_bundles:
            check_class_kinfty(bundle.family.alpha1, samples, name=f"{bundle.name}.alpha1")
            check_class_kinfty(bundle.family.alpha2, samples, name=f"{bundle.name}.alpha2")

    def test_alpha1_below_alpha2(self, all_bundles):
        for bundle in all_bundles:
            for s in np.linspace(0.0, 20.0, 101):
                assert bundle.family.alpha1(s) <= bundle.family.alpha2(s) + 1e-12

    def test_rejects_nonzero_at_origin(self):
        with pytest.raises(ConfigError):
            check_class_kinfty(lambda s: s + 1.0, [1.0, 2.0])

    def test_rejects_decreasing(self):
        with pytest.raises(ConfigError):
            check_class_kinfty(lambda s: -s, [1.0, 2.0])


def test_finite_difference_gradients_match_analytic(friction_bundle):
    fam = friction_bundle.family
    bare = LyapunovFamily(
        V=fam.V, alpha1=fam.alpha1, alpha2=fam.alpha2, q=fam.q,
        c_a=fam.c_a, c_b=fam.c_b, T=fam.T,
    )
    rng = np.random.default_rng(11)
    for _ in range(25):
        x = rng.uniform(-5, 5, size=2)
        t = float(rng.uniform(0, 10))
        tau = rng.uniform(0, 1, size=3)
        assert bare.grad_t(x, t, tau) == pytest.approx(fam.grad_t(x, t, tau), abs=1e-5)
        np.testing.assert_allclose(
            bare.grad_x(x, t, tau), fam.grad_x(x, t, tau), atol=1e-5
        )
        np.testing.assert_allclose(
            bare.grad_tau(x, t, tau), fam.grad_tau(x, t, tau), atol=1e-5
        )


def test_bad_constants_rejected(scalar_bundle):
    fam = scalar_bundle.family
    with pytest.raises(ConfigError):
        LyapunovFamily(V=fam.V, alpha1=fam.alpha1, alpha2=fam.alpha2, q=fam.q,
                       c_a=fam.c_a, c_b=-1.0, T=fam.T)
    with pytest.raises(ConfigError):
        LyapunovFamily(V=fam.V, alpha1=fam.alpha1, alpha2=fam.alpha2, q=fam.q,
                       c_a=fam.c_a, c_b=fam.c_b, T=0.0)
    with pytest.raises(ConfigError):
        SlowSystem(frozen=scalar_bundle.frozen, path=scalar_bundle.path, alpha=0.0)
