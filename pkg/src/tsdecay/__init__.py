"""Hybrid discrete/continuous calculus on closed subsets of R, exponential
functions, delay shift operators, characteristic roots of delayed dynamic
equations, simulation of such equations, and exponential decay certificates."""

from .errors import TsError, ConfigError
from .timescale import (
    TimeScale,
    GridPolicy,
    DenseInterval,
    ArithmeticGrid,
    GeometricGrid,
    SqrtGrid,
    ExplicitPoints,
    sigma,
    rho,
    mu,
    mu_tilde,
    delta_integral,
    delta_derivative,
    iterate_points,
    timescale_from_json,
    timescale_from_file,
)
from .tsexp import log_exp_ts, exp_ts, exp_pow, ominus, is_regressive
from .shifts import (
    ShiftSystem,
    DelaySpec,
    builtin_shift,
    custom_shift,
    make_delay_spec,
    delay_apply,
    validate_shift_axioms,
    shift_from_json,
    delays_from_json,
)
from .halanay import (
    HalanayProblem,
    RootField,
    char_poly,
    s_window,
    largest_root,
    verify_largest,
    root_field,
    default_root_grid,
    problem_from_json,
)
from .simulate import (
    Trajectory,
    simulate,
    constant_history,
    table_history,
    exponential_envelope,
)
from .certify import (
    AuditReport,
    BoundReport,
    Certificate,
    SweepResult,
    audit_conditions,
    choose_K0,
    verify_bound,
    decay_rate,
    certify,
    sweep_grid,
    problem_digest,
)

__version__ = "0.1.0"
