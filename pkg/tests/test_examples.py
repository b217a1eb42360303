import math

import numpy as np
import pytest

from slowcert import (
    ConfigError,
    GridSpec,
    by_name,
    eval_certificate,
    falsify_assumption1,
    friction_example,
    identification_example,
    pendulum_example,
    pendulum_window_margin,
)
from slowcert.quad import adaptive_simpson


def test_registry(all_bundles):
    for bundle in all_bundles:
        assert by_name(bundle.name).name == bundle.name
    with pytest.raises(ConfigError):
        by_name("nonsense")


def test_all_bundles_pass_falsification(all_bundles):
    grid = GridSpec(n_samples=4000, seed=31, n_time_samples=128)
    for bundle in all_bundles:
        reports = falsify_assumption1(bundle.family, bundle.system(1.0), grid)
        assert all(r.passed for r in reports), (
            bundle.name,
            [r.summary() for r in reports],
        )


class TestScalar:
    def test_v_vanishes_at_origin(self, scalar_bundle):
        assert scalar_bundle.family.value(np.array([0.0]), 0.0, np.array([0.5])) == 0.0

    def test_ratio_sandwich_on_wide_grid(self, scalar_bundle):
        # (2e^sqrt2/(e-1)) * V >= x^2/(1+x^2) * e^sqrt(1+x^2) >= V/2 for |x| <= 50
        C = scalar_bundle.expected["brake_constant"]
        for x in np.linspace(-50.0, 50.0, 2001):
            if x == 0.0:
                continue
            v = float(scalar_bundle.family.V(np.array([x]), 0.0, np.array([0.0])))
            mid = x * x / (1.0 + x * x) * math.exp(math.sqrt(1.0 + x * x))
            assert C * v >= mid * (1.0 - 1e-12)
            assert mid >= 0.5 * v * (1.0 - 1e-12)

    def test_closed_form_agrees(self, scalar_bundle):
        rng = np.random.default_rng(33)
        for alpha in (0.1, 1.0, 10.0):
            cert = scalar_bundle.certificate(alpha)
            for _ in range(10):
                x = rng.uniform(-10, 10, size=1)
                t = float(rng.uniform(0, 10 * alpha))
                want = scalar_bundle.closed_form_certificate(x, t, alpha)
                assert eval_certificate(cert, x, t) == pytest.approx(want, rel=1e-8)

    def test_not_exponentially_stable_flag(self, scalar_bundle):
        assert scalar_bundle.expected["globally_exponentially_stable"] is False
        # the field really is bounded by 91 in norm
        rng = np.random.default_rng(4)
        for _ in range(200):
            x = np.array([float(rng.uniform(-1e4, 1e4))])
            tau = np.array([float(rng.uniform(0, 1))])
            assert abs(float(scalar_bundle.frozen.field(x, 0.0, tau)[0])) <= 91.0


class TestPendulum:
    def test_decay_lemma_spot_value(self, pendulum_bundle):
        # x = (1, 1), tau = -1, full damping knob: gradient dot field is 0,
        # the claimed bound is -(1 - 5) * V = 12
        fam = pendulum_bundle.family
        x = np.array([1.0, 1.0])
        grad = fam.grad_x(x, 0.0, np.array([-1.0]))
        f = np.array([1.0, -1.0 - (1.0 + (-1.0) * 1.0) * 1.0])
        assert float(grad @ f) == pytest.approx(0.0, abs=1e-12)
        assert -(1.0 + 5.0 * -1.0) * fam.value(x, 0.0, np.array([-1.0])) == 12.0

    def test_decay_lemma_on_grid(self, pendulum_bundle):
        rng = np.random.default_rng(35)
        fam = pendulum_bundle.family
        frozen = pendulum_bundle.frozen
        for _ in range(2000):
            x = rng.uniform(-10, 10, size=2)
            t = float(rng.uniform(0, 40))
            tau = np.array([float(rng.uniform(-5, 0))])
            vdot = float(fam.grad_x(x, t, tau) @ frozen.field(x, t, tau))
            rhs = -(1.0 + 5.0 * float(tau[0])) * fam.value(x, t, tau)
            assert vdot <= rhs + 1e-9 * (1.0 + abs(rhs))

    def test_v_dominates_half_norm(self, pendulum_bundle):
        rng = np.random.default_rng(36)
        for _ in range(500):
            x = rng.uniform(-10, 10, size=2)
            v = pendulum_bundle.family.value(x, 0.0, np.array([0.0]))
            assert v >= 0.5 * float(x @ x) - 1e-12

    def test_positive_b2_rejected(self):
        with pytest.raises(ConfigError, match="nonpositive"):
            pendulum_example(b2=lambda t: 0.1 * math.sin(t), c_b=1.0)

    def test_out_of_range_m_rejected(self):
        with pytest.raises(ConfigError):
            pendulum_example(m=lambda x, t: 1.5)

    def test_window_condition_modes(self, pendulum_bundle):
        T = pendulum_bundle.family.T
        c_b = pendulum_bundle.expected["c_b"]
        b2 = lambda t: -0.1 * (1.0 + math.sin(t))
        for t in (0.0, 1.7, 12.0):
            # construction-consistent form: margin exactly zero by periodicity
            assert pendulum_window_margin(b2, T, c_b, t, "rate") == pytest.approx(
                0.0, abs=1e-9
            )
            # the fixed-offset form gives a different number entirely
            # (negative here: the two conditions really do disagree)
            off = pendulum_window_margin(b2, T, c_b, t, "offset")
            assert off == pytest.approx(5.0 - 0.4 * math.pi**2 - c_b, abs=1e-9)
        with pytest.raises(ConfigError):
            pendulum_window_margin(b2, T, c_b, 0.0, "bogus")

    def test_closed_form_convention(self, pendulum_bundle):
        rng = np.random.default_rng(37)
        for alpha in (0.01, 1.0):
            cert = pendulum_bundle.certificate(alpha)
            factor = pendulum_bundle.closed_form_gain_factor(alpha)
            for _ in range(8):
                x = rng.uniform(-5, 5, size=2)
                t = float(rng.uniform(0, 10))
                want = factor * pendulum_bundle.closed_form_certificate(x, t, alpha)
                assert eval_certificate(cert, x, t) == pytest.approx(want, rel=1e-8)


class TestFriction:
    def test_gain_constant(self, friction_bundle):
        assert friction_bundle.expected["A"] == 10.5  # k_o = 1, beta2 = 1
        assert friction_bundle.expected["decay_gain"] == pytest.approx(
            1.0 / (4.0 * 10.5**2 * 2.0), rel=1e-12
        )

    def test_norm_sandwich_on_grid(self, friction_bundle):
        fam = friction_bundle.family
        A = friction_bundle.expected["A"]
        rng = np.random.default_rng(38)
        for _ in range(2000):
            x = rng.uniform(-10, 10, size=2)
            t = float(rng.uniform(0, 20))
            tau = rng.uniform(0, 1, size=3)
            v = fam.value(x, t, tau)
            n2 = float(x @ x)
            assert 0.5 * n2 <= v + 1e-12
            assert v <= 2.0 * A * A * 2.0 * n2 + 1e-12

    def test_decay_chain_endpoint_on_grid(self, friction_bundle):
        fam = friction_bundle.family
        frozen = friction_bundle.frozen
        rng = np.random.default_rng(39)
        for _ in range(2000):
            x = rng.uniform(-10, 10, size=2)
            t = float(rng.uniform(0, 20))
            tau = rng.uniform(0, 1, size=3)
            vdot = fam.grad_t(x, t, tau) + float(
                fam.grad_x(x, t, tau) @ frozen.field(x, t, tau)
            )
            rhs = -float(fam.q(tau)) * fam.value(x, t, tau)
            assert vdot <= rhs + 1e-9 * (1.0 + abs(rhs))

    def test_zero_viscosity_degenerates_to_nonincrease(self, friction_bundle):
        # tau_1 = 0 turns the decay rate off; the derivative bound becomes
        # V_dot <= 0 and the falsifier must not flag it
        fam = friction_bundle.family
        frozen = friction_bundle.frozen
        rng = np.random.default_rng(40)
        for _ in range(500):
            x = rng.uniform(-10, 10, size=2)
            t = float(rng.uniform(0, 20))
            tau = np.array([0.0, float(rng.uniform(0, 1)), float(rng.uniform(0, 1))])
            assert fam.q(tau) == 0.0
            vdot = fam.grad_t(x, t, tau) + float(
                fam.grad_x(x, t, tau) @ frozen.field(x, t, tau)
            )
            assert vdot <= 1e-9

    def test_increasing_stiffness_rejected(self):
        with pytest.raises(ConfigError, match="nonincreasing"):
            friction_example(
                k=lambda t: 1.0 + 0.4 * math.sin(t),
                k_prime=lambda t: 0.4 * math.cos(t),
                k_o=0.5,
                k_bar=1.5,
            )

    def test_out_of_range_sigma_rejected(self):
        bad = lambda t: 1.2
        with pytest.raises(ConfigError, match="sigma"):
            friction_example(sigmas=(bad, bad, bad), c_b=1.0, p_bar=0.0, period=1.0)

    def test_closed_form_agrees(self, friction_bundle):
        alpha = 2.0 * friction_bundle.expected["threshold_ugas"]
        cert = friction_bundle.certificate(alpha)
        rng = np.random.default_rng(41)
        for _ in range(10):
            x = rng.uniform(-5, 5, size=2)
            t = float(rng.uniform(0, 100))
            want = friction_bundle.closed_form_certificate(x, t, alpha)
            assert eval_certificate(cert, x, t) == pytest.approx(want, rel=1e-8)


class TestIdentification:
    def test_default_gram_is_pi_identity(self):
        # window Gram of (cos, sin) over one full period, by direct quadrature
        for t0 in (0.0, 0.9):
            for (i, j), want in (((0, 0), math.pi), ((0, 1), 0.0), ((1, 1), math.pi)):
                comp = [math.cos, math.sin]
                got = adaptive_simpson(
                    lambda r: comp[i](r) * comp[j](r), t0, t0 + 2 * math.pi, tol=1e-12
                )
                assert got == pytest.approx(want, abs=1e-10)

    def test_kappa_formula(self, identification_bundle):
        want = math.pi + 8.0 * math.pi**5 + 4.0 * math.pi**2
        assert identification_bundle.expected["kappa"] == pytest.approx(want, rel=1e-15)

    def test_c_b_formula(self, identification_bundle):
        kappa = identification_bundle.expected["kappa"]
        denom = kappa + (2 * math.pi) ** 2 * math.pi
        assert identification_bundle.expected["c_b"] == pytest.approx(
            math.pi**2 / (2.0 * denom), rel=1e-15
        )

    def test_quadratic_sandwich_over_tau_box(self, identification_bundle):
        fam = identification_bundle.family
        kappa = identification_bundle.expected["kappa"]
        upper = identification_bundle.expected["sandwich_upper"]
        rng = np.random.default_rng(43)
        for _ in range(1000):
            x = rng.uniform(-10, 10, size=2)
            t = float(rng.uniform(0, 40))
            tau = np.array([float(rng.uniform(-math.pi, 0.0))])
            v = fam.value(x, t, tau)
            n2 = float(x @ x)
            assert kappa * n2 <= v + 1e-9 * (1 + v)
            assert v <= upper * n2 + 1e-9 * (1 + upper * n2)
            vtau = float(np.linalg.norm(fam.grad_tau(x, t, tau)))
            assert vtau <= v + 1e-9 * (1 + v)

    def test_zero_rate_freezes_everything(self, identification_bundle):
        fam = identification_bundle.family
        frozen = identification_bundle.frozen
        kappa = identification_bundle.expected["kappa"]
        x = np.array([1.3, -0.4])
        tau = np.array([0.0])
        assert fam.value(x, 2.0, tau) == pytest.approx(kappa * float(x @ x), rel=1e-12)
        assert fam.q(tau) == 0.0
        assert fam.grad_t(x, 2.0, tau) == 0.0
        np.testing.assert_allclose(frozen.field(x, 2.0, tau), np.zeros(2), atol=1e-15)

    def test_persistency_failure_rejected(self):
        # a half-period window Gram is (pi/2) I, far below the declared pi
        with pytest.raises(ConfigError, match="persistency"):
            identification_example(c_tilde=math.pi)

    def test_nonunit_regressor_rejected(self):
        with pytest.raises(ConfigError, match="deviates"):
            identification_example(m=lambda t: np.array([2.0 * np.cos(t), 2.0 * np.sin(t)]))

    def test_closed_form_agrees(self, identification_bundle):
        cert = identification_bundle.certificate(1.0)
        rng = np.random.default_rng(44)
        for _ in range(10):
            x = rng.uniform(-5, 5, size=2)
            t = float(rng.uniform(0, 30))
            want = identification_bundle.closed_form_certificate(x, t, 1.0)
            assert eval_certificate(cert, x, t) == pytest.approx(want, rel=1e-8)

    def test_spline_falls_back_to_quadrature_outside_horizon(self, identification_bundle):
        fam = identification_bundle.family
        x = np.array([0.7, 0.2])
        tau = np.array([-1.0])
        inside = fam.value(x, 10.0, tau)
        far = fam.value(x, 500.0, tau)  # outside the precomputed horizon
        assert math.isfinite(far)
        # same time modulo the regressor period: the moment matrices agree
        period = 2.0 * math.pi
        t_far = 10.0 + 78.0 * period  # = 500.06..., just outside the horizon
        assert fam.value(x, t_far, tau) == pytest.approx(inside, rel=1e-8)
