import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from tsdecay.errors import (
    ConfigError,
    NoSignChange,
    NotBracketed,
    OutOfDomain,
    OutsideS,
    PreconditionViolated,
)
from tsdecay.halanay import (
    HalanayProblem,
    char_poly,
    default_root_grid,
    largest_root,
    problem_from_json,
    root_field,
    s_window,
    sup_endpoint_crosscheck,
    verify_largest,
)
from tsdecay.shifts import builtin_shift, make_delay_spec
from tsdecay.timescale import ArithmeticGrid, DenseInterval, TimeScale


def integer_problem(p=0.5, q=(0.2, 0.1), ell=1.0, K=2.0, h_r=1.0):
    Z = TimeScale.integers()
    spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, h_r))
    return HalanayProblem(spec, "sum_power", p, q, ell, (), K)


def reals_problem(p=2.0, q=(0.0, 1.0), delays=(0.0, 1.0)):
    R = TimeScale.reals()
    spec = make_delay_spec(builtin_shift("translation", R, t0=0.0), delays)
    return HalanayProblem(spec, "sum_power", p, q)


def q_scale_problem():
    # one q-step of delay on 2^Z restricted to n >= -1, decay 0.6, feedback 0.3
    ts = TimeScale.q_grid(2.0, nmin=-1)
    spec = make_delay_spec(builtin_shift("scaling", ts, t0=1.0), (1.0, 2.0))
    return HalanayProblem(spec, "sum_power", 0.6, (0.0, 0.3))


class TestCharPoly:
    def test_integer_expanded_form(self):
        # one unit delay on the integers collapses to a quadratic in k
        prob = integer_problem()
        for k in (-0.9, -0.5, -0.17, -0.01, 0.0):
            expected = (k + 0.5) * (1 + k) - (0.2 * (1 + k) + 0.1)
            assert char_poly(prob, 5.0, k) == pytest.approx(expected, abs=1e-14)

    def test_value_at_zero_is_margin(self):
        prob = integer_problem()
        assert char_poly(prob, 5.0, 0.0) == pytest.approx(0.2, abs=1e-14)

    def test_value_at_zero_with_fractional_power(self):
        # K^(ell-1) scales the coefficient mass when ell < 1
        prob = integer_problem(p=0.5, q=(0.0, 0.3), ell=0.5, K=4.0)
        assert char_poly(prob, 5.0, 0.0) == pytest.approx(0.5 - 0.3 / 2.0, abs=1e-14)

    def test_reals_normalized_residual(self):
        prob = reals_problem()
        raw = char_poly(prob, 5.0, -0.4)
        assert raw == pytest.approx(1.6 * math.exp(-0.4) - 1.0, rel=1e-12)
        assert raw * math.exp(0.4) == pytest.approx(0.10817530235872970, abs=1e-12)

    def test_t_independence_when_ell_is_one(self):
        prob = q_scale_problem()
        a = char_poly(prob, 4.0, -0.2)
        expected = (-0.2 + 0.6) * (1 + -0.2 * 2.0) - 0.3
        assert a == pytest.approx(expected, abs=1e-14)

    def test_outside_s_raises(self):
        prob = integer_problem()
        with pytest.raises(OutsideS):
            char_poly(prob, 5.0, -1.0)
        with pytest.raises(OutsideS):
            char_poly(prob, 5.0, -1.7)

    def test_sup_form_against_direct_formula(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 2.0))
        prob = HalanayProblem(spec, "sup", 0.5, (0.2,), 1.0, (), 2.0)
        for k in (-0.4, -0.1, -0.02):
            expected = (k + 0.5) * (1 + k) ** 5 - 2.0 * 0.2 * (1 + k) ** 3
            assert char_poly(prob, 5.0, k) == pytest.approx(expected, rel=1e-12)

    def test_max_form_matches_sup_form(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 2.0))
        sup = HalanayProblem(spec, "sup", 0.5, (0.2,), 1.0, (), 2.0)
        mx = HalanayProblem(spec, "max", 0.5, (0.2,), 1.0, (), 2.0)
        for k in (-0.4, -0.1):
            assert char_poly(mx, 7.0, k) == char_poly(sup, 7.0, k)

    def test_sup_endpoint_realizes_window_sup(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 2.0))
        prob = HalanayProblem(spec, "sup", 0.5, (0.2,), 1.0, (), 2.0)
        assert sup_endpoint_crosscheck(prob, 6.0, -0.3) < 1e-12

    def test_product_form_against_direct_formula(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0, 2.0))
        prob = HalanayProblem(
            spec, "product", 0.5, (0.1, 0.1, 0.2), 1.0, (0.2, 0.3, 0.5), 2.0
        )
        t = 6.0
        for k in (-0.3, -0.05):
            direct = (k + 0.5) * (1 + k) ** 6 - (
                0.1 * 0.1 * 0.2
            ) * (1 + k) ** (0.2 * 6 + 0.3 * 5 + 0.5 * 4)
            assert char_poly(prob, t, k) == pytest.approx(direct, rel=1e-12)

    def test_product_root_is_t_invariant(self):
        # the e_k(t, t0) factor scales both terms identically when the
        # exponents sum to 1, so the crossing point does not move with t
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0, 2.0))
        prob = HalanayProblem(
            spec, "product", 0.5, (0.1, 0.1, 0.2), 1.0, (0.2, 0.3, 0.5), 2.0
        )
        r5, _ = largest_root(prob, 5.0)
        r9, _ = largest_root(prob, 9.0)
        assert r5 == pytest.approx(r9, abs=1e-10)


class TestConstructorValidation:
    def test_bad_form(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "polynomial", 0.5, (0.2, 0.1))

    def test_coefficient_count_mismatch(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "sum_power", 0.5, (0.2,))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "sup", 0.5, (0.2, 0.1))

    def test_exponent_validation(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "product", 0.5, (0.1, 0.2), 1.0, (0.5, 0.6))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "product", 0.5, (0.1, 0.2), 1.0, (1.2, -0.2))
        with pytest.raises(ValueError):
            HalanayProblem(spec, "sum_power", 0.5, (0.2, 0.1), ell=0.0)
        with pytest.raises(ValueError):
            HalanayProblem(spec, "sum_power", 0.5, (0.2, 0.1), ell=1.2)
        with pytest.raises(ValueError):
            HalanayProblem(spec, "sum_power", 0.5, (0.2, 0.1), Kconst=1.0)


class TestSWindow:
    def test_integers(self):
        assert s_window(integer_problem(), 5.0) == (-1.0, 0.0)

    def test_reals_floor(self):
        assert s_window(reals_problem(), 5.0) == (-1e6, 0.0)
        assert s_window(reals_problem(), 5.0, floor=-1e3) == (-1e3, 0.0)

    def test_q_scale_uses_closed_delay_window(self):
        # window [1/2, 2] on the doubling grid: sup of graininess is mu(2) = 2
        prob = q_scale_problem()
        assert s_window(prob, 2.0) == (-0.5, 0.0)
        assert s_window(prob, 8.0) == (-0.125, 0.0)


class TestLargestRoot:
    def test_integer_quadratic_oracle(self):
        # k^2 + 1.3k + 0.2 = 0, larger root (-1.3 + sqrt(0.89)) / 2
        prob = integer_problem()
        root, residual = largest_root(prob, 5.0)
        assert root == pytest.approx(-0.17830094339716984, abs=1e-12)
        assert residual < 1e-12
        assert verify_largest(prob, 5.0, root)

    def test_reals_transcendental_oracle(self):
        # (k+2)e^k = 1 has the same roots as k + 2 - e^{-k} = 0
        oracle = brentq(lambda k: k + 2.0 - math.exp(-k), -1.0, 0.0, xtol=1e-15)
        assert oracle == pytest.approx(-0.4428544010023886, abs=1e-12)
        root, residual = largest_root(reals_problem(), 5.0)
        assert root == pytest.approx(oracle, abs=1e-9)
        assert residual < 1e-12

    def test_q_scale_quadratic_oracles(self):
        prob = q_scale_problem()
        root2, _ = largest_root(prob, 2.0)
        assert root2 == pytest.approx(-0.21690481051546995, abs=1e-12)
        # t = 4: 2k^2 + 2.2k + 0.3 = 0
        root4, _ = largest_root(prob, 4.0)
        assert root4 == pytest.approx(-0.1594875162046673, abs=1e-12)
        # t = 8: 4k^2 + 3.4k + 0.3 = 0 has discriminant 2.6^2, root exactly -0.1
        root8, _ = largest_root(prob, 8.0)
        assert root8 == pytest.approx(-0.1, abs=1e-12)

    def test_q_scale_residuals_to_large_t(self):
        prob = q_scale_problem()
        for n in range(1, 11):
            t = float(2**n)
            root, residual = largest_root(prob, t)
            lo, hi = s_window(prob, t)
            assert lo < root < hi
            assert residual < 1e-10
            assert verify_largest(prob, t, root)

    def test_undelayed_rate_is_minus_p(self):
        # with no feedback terms the construction reduces to x^Delta = -p x
        root, _ = largest_root(reals_problem(p=0.25, q=(0.0, 0.0)), 5.0)
        assert root == pytest.approx(-0.25, abs=1e-10)
        root, _ = largest_root(integer_problem(p=0.5, q=(0.0, 0.0)), 5.0)
        assert root == pytest.approx(-0.5, abs=1e-10)

    def test_K_has_no_effect_when_ell_is_one(self):
        a, _ = largest_root(integer_problem(K=2.0), 5.0)
        b, _ = largest_root(integer_problem(K=10.0), 5.0)
        assert a == pytest.approx(b, abs=1e-13)

    def test_K_matters_for_fractional_powers(self):
        a, _ = largest_root(integer_problem(q=(0.0, 0.1), ell=0.5, K=2.0), 5.0)
        b, _ = largest_root(integer_problem(q=(0.0, 0.1), ell=0.5, K=16.0), 5.0)
        assert abs(a - b) > 1e-4

    def test_classical_characteristic_equation_on_reals(self):
        # two delays: roots must match k + p - sum q_i e^{-k h_i} = 0
        prob = reals_problem(p=2.0, q=(0.0, 0.3, 0.5), delays=(0.0, 0.5, 1.0))
        classical = lambda k: k + 2.0 - 0.3 * math.exp(-0.5 * k) - 0.5 * math.exp(-k)
        oracle = brentq(classical, -2.0, 0.0, xtol=1e-15)
        root, _ = largest_root(prob, 3.0)
        assert root == pytest.approx(oracle, abs=1e-8)

    def test_sup_form_root_via_companion_matrix(self):
        # (k+0.5)(1+k)^5 - 0.4(1+k)^3 = (1+k)^3 ((k+0.5)(1+k)^2 - 0.4)
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 2.0))
        prob = HalanayProblem(spec, "sup", 0.5, (0.2,), 1.0, (), 2.0)
        cubic = np.polynomial.polynomial.polyroots([0.1, 2.0, 2.5, 1.0])
        candidates = [r.real for r in cubic if abs(r.imag) < 1e-12 and -1 < r.real < 0]
        oracle = max(candidates)
        root, residual = largest_root(prob, 5.0)
        assert root == pytest.approx(oracle, abs=1e-10)
        assert residual < 1e-10

    def test_inadmissible_margin_raises(self):
        with pytest.raises(PreconditionViolated):
            largest_root(integer_problem(p=0.2, q=(0.0, 0.3)), 5.0)

    def test_no_crossing_reported(self):
        # p = 3 with no feedback: zeros at -3 and -1 both sit outside S = (-1, 0)
        with pytest.raises(NoSignChange):
            largest_root(integer_problem(p=3.0, q=(0.0, 0.0)), 5.0)

    def test_touching_root_reported(self):
        # p = 1 with no feedback: (1+k)^2 grazes zero at the window edge
        with pytest.raises(NotBracketed):
            largest_root(integer_problem(p=1.0, q=(0.0, 0.0)), 5.0)


class TestRootField:
    def test_constant_coefficients_constant_field(self):
        prob = integer_problem()
        field = root_field(prob, [float(t) for t in range(2, 13)])
        assert not field.partial
        assert not any(field.jump_flags)
        for lam, res in zip(field.lam, field.residual):
            assert lam == pytest.approx(-0.17830094339716984, abs=1e-12)
            assert res < 1e-10

    def test_q_scale_field_varies(self):
        prob = q_scale_problem()
        field = root_field(prob, [2.0, 4.0, 8.0])
        assert field.lam == pytest.approx((-0.21690481051546995, -0.1594875162046673, -0.1), abs=1e-12)
        assert field.s_lower == pytest.approx((-0.5, -0.25, -0.125))
        assert not field.partial

    def test_value_at_left_piecewise_constant(self):
        prob = q_scale_problem()
        field = root_field(prob, [2.0, 4.0, 8.0])
        assert field.value_at(2.0) == field.lam[0]
        assert field.value_at(3.9) == field.lam[0]
        assert field.value_at(4.0) == field.lam[1]
        assert field.value_at(100.0) == field.lam[2]
        # history window times clamp to the first grid value
        assert field.value_at(0.5) == field.lam[0]

    def test_partial_field_captures_errors(self):
        prob = integer_problem(p=0.2, q=(0.0, 0.3))
        field = root_field(prob, [2.0, 3.0])
        assert field.partial
        assert all(math.isnan(v) for v in field.lam)
        assert all(e is not None and "PreconditionViolated" in e for e in field.errors)
        with pytest.raises(OutOfDomain):
            field.value_at(2.5)

    def test_jump_flag_on_abrupt_rate_change(self):
        # piecewise constant feedback strength makes the root jump at t = 10
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        q1 = lambda t: 0.05 if t < 10 else 0.49
        prob = HalanayProblem(spec, "sum_power", 0.5, (0.0, q1))
        field = root_field(prob, [8.0, 9.0, 10.0, 11.0], jump_rel=0.3)
        assert field.jump_flags[2]
        assert not field.jump_flags[1]
        assert not field.jump_flags[3]
        # the default threshold is looser and lets this step through
        assert not any(root_field(prob, [8.0, 9.0, 10.0, 11.0]).jump_flags)

    def test_empty_grid(self):
        field = root_field(integer_problem(), [])
        assert field.grid == ()
        assert not field.partial
        with pytest.raises(OutOfDomain):
            field.value_at(1.0)


class TestDefaultRootGrid:
    def test_integers_enumerates_points(self):
        grid = default_root_grid(integer_problem(), 20.0)
        assert grid == [float(t) for t in range(0, 21)]

    def test_mixed_scale_caps_and_keeps_endpoints(self):
        ts = TimeScale([DenseInterval(0.0, 1.0), ArithmeticGrid(1.5, 0.5, None)])
        spec = make_delay_spec(builtin_shift("translation", ts, t0=2.0), (2.0, 2.5))
        prob = HalanayProblem(spec, "sum_power", 0.5, (0.0, 0.2))
        grid = default_root_grid(prob, 40.0, cap=32)
        assert len(grid) <= 32
        assert grid[0] == 2.0
        assert grid[-1] == 40.0
        assert all(a < b for a, b in zip(grid, grid[1:]))


class TestJsonIngest:
    def test_round_trip(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        prob = problem_from_json(
            {"form": "sum_power", "p": 0.5, "q": [0.2, 0.1], "ell": 1.0, "K": 2.0},
            spec,
        )
        root, _ = largest_root(prob, 5.0)
        assert root == pytest.approx(-0.17830094339716984, abs=1e-12)

    def test_trivial_slot_padding(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        prob = problem_from_json({"form": "sum_power", "p": 0.5, "q": [0.3]}, spec)
        assert prob.q[0] == 0.0
        assert prob.q[1] == 0.3

    def test_error_pointers(self):
        Z = TimeScale.integers()
        spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
        with pytest.raises(ConfigError) as err:
            problem_from_json({"form": "fancy", "p": 0.5, "q": [0.1]}, spec)
        assert err.value.pointer == "/problem/form"
        with pytest.raises(ConfigError) as err:
            problem_from_json({"form": "sum_power", "q": [0.1]}, spec)
        assert err.value.pointer == "/problem/p"
        with pytest.raises(ConfigError) as err:
            problem_from_json({"p": 0.5, "q": [0.1, "x"]}, spec)
        assert err.value.pointer == "/problem/q/1"
        with pytest.raises(ConfigError) as err:
            problem_from_json({"p": 0.5, "q": [0.1], "ell": 2.0}, spec)
        assert err.value.pointer == "/problem"


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(min_value=0.05, max_value=2.0),
    frac=st.floats(min_value=0.01, max_value=0.9),
)
def test_root_exists_inside_window_property(p, frac):
    prob = integer_problem(p=p, q=(0.0, frac * p))
    root, residual = largest_root(prob, 6.0)
    lo, hi = s_window(prob, 6.0)
    assert lo < root < hi
    assert residual < 1e-8
    assert verify_largest(prob, 6.0, root)


@settings(max_examples=30, deadline=None)
@given(
    p=st.floats(min_value=0.1, max_value=1.5),
    q1=st.floats(min_value=0.01, max_value=0.5),
)
def test_more_feedback_means_slower_decay(p, q1):
    # enlarging a feedback coefficient moves the largest root toward zero
    if q1 * 1.5 >= p:
        return
    a, _ = largest_root(integer_problem(p=p, q=(0.0, q1)), 6.0)
    b, _ = largest_root(integer_problem(p=p, q=(0.0, q1 * 1.5)), 6.0)
    assert b > a - 1e-12
