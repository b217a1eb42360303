"""Explicit strict Lyapunov certificates for slowly time-varying systems.

Given a family of Lyapunov-like functions for the frozen dynamics
dx/dt = f(x, t, tau) whose decay rate q(tau) is positive on average along
the slow parameter path p, the package constructs the exponential-gain
certificate for dx/dt = f(x, t, p(t/alpha)), computes the analytic
time-scale thresholds, and verifies every assumption and conclusion
numerically via quadrature, adaptive ODE integration, and seeded grid
falsification. An input-to-state variant gates control inputs through an
explicit class-K-infinity function.
"""

from .averaging import (
    AveragedSignal,
    double_avg_integral,
    double_avg_nested_oracle,
    double_avg_time_derivative,
    envelope_bound,
    estimate_m_bar,
    exp_gain,
    exp_gain_log,
    signal_from_family,
    window_integral,
)
from .certificate import (
    Certificate,
    build_certificate,
    certificate_derivative,
    certificate_derivative_scaled,
    check_iss_growth,
    eval_certificate,
    eval_certificate_log,
    frozen_value,
    iss_gate,
    worst_case_gate_input,
)
from .core import (
    FrozenFamily,
    LyapunovFamily,
    ParameterPath,
    SlowSystem,
    check_class_kinfty,
    estimate_p_bar,
    eval_slow_field,
)
from .errors import (
    ConfigError,
    DomainError,
    ExpressionError,
    IntegrationError,
    NonMonotoneError,
    NumericalError,
    QuadratureError,
    SlowcertError,
)
from .examples import (
    EXAMPLE_NAMES,
    ExampleBundle,
    by_name,
    friction_example,
    identification_example,
    pendulum_example,
    pendulum_window_margin,
    scalar_example,
)
from .expressions import Expression, parse_expression
from .quad import adaptive_simpson
from .reporting import GridSpec, ViolationReport, Witness
from .simverify import (
    AlphaSearchSpec,
    AlphaStarReport,
    IntegratorStats,
    IssReport,
    Trajectory,
    attach_certificate_values,
    check_certificate_sandwich,
    check_decrease_along,
    check_gated_derivative,
    estimate_alpha_star,
    falsify_assumption1,
    falsify_assumption2,
    integrate,
    scaled_leq,
    seed_batch,
    simulate_iss,
)
from .transform import (
    MuFunction,
    k_eval,
    k_prime_eval,
    stiffness_B,
    transform_family,
    validate_mu,
)

__version__ = "0.1.0"
