import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvebif import ConstantForm, Nonlinearity, ProblemInstance, Segment, Weight
from curvebif.shoot import Blocked, Caps, find_regular, integrate_path, shoot_residual


def test_lambda_zero_is_a_straight_line(jump_weight, bump_f):
    pb = ProblemInstance(0.0, jump_weight, bump_f)
    path = integrate_path(pb, 0.7)
    assert path.terminal == "reached"
    assert path.theta_end == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(path.us, 0.7)


def test_zero_weight_keeps_lines_for_any_lambda(bump_f):
    w = Weight(0.5, (Segment(0.0, 0.5, ConstantForm(0.0)), Segment(0.5, 1.0, ConstantForm(0.0))))
    pb = ProblemInstance(7.3, w, bump_f)
    path = integrate_path(pb, 1.3)
    assert path.terminal == "reached"
    assert np.allclose(path.us, 1.3)
    assert path.theta_end == pytest.approx(0.0, abs=1e-13)


def test_residual_zero_everywhere_at_lambda_zero(jump_weight, bump_f):
    pb = ProblemInstance(0.0, jump_weight, bump_f)
    for s0 in (1e-4, 0.3, 12.0):
        assert shoot_residual(pb, s0) == pytest.approx(0.0, abs=1e-13)


def test_solvers_refuse_negative_lambda(jump_weight, bump_f):
    pb = ProblemInstance(-1.0, jump_weight, bump_f)
    with pytest.raises(ValueError):
        find_regular(pb)
    with pytest.raises(ValueError):
        integrate_path(pb, -0.1)


def test_scan_preconditions(jump_weight, bump_f):
    pb = ProblemInstance(1.0, jump_weight, bump_f)
    with pytest.raises(ValueError):
        find_regular(pb, s_min=0.0, s_max=1.0)
    with pytest.raises(ValueError):
        find_regular(pb, n_scan=8)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.0, 30.0), s0=st.floats(1e-3, 50.0))
def test_flux_variable_bounded_by_representation(jump_weight, bump_f, lam, s0):
    pb = ProblemInstance(lam, jump_weight, bump_f)
    path = integrate_path(pb, s0)
    assert np.max(np.abs(np.sin(path.thetas))) <= 1.0


def test_vertical_event_near_node_for_steep_shots(jump_weight, bump_f, lam0_jump):
    # heights near the peak bend hard; the tangent goes vertical and the
    # event location sits before the node on the positive side
    pb = ProblemInstance(20.0 * lam0_jump, jump_weight, bump_f)
    path = integrate_path(pb, 2.0)
    assert path.terminal == "vertical"
    assert path.state_end[0] < 0.4


def test_blocked_is_a_value(jump_weight, mild_f, lam0_jump):
    pb = ProblemInstance(2.0 * lam0_jump, jump_weight, mild_f)
    got = shoot_residual(pb, 1e-6)
    assert isinstance(got, Blocked)
    assert got.event in ("u_zero", "vertical")


def test_find_regular_mild_existence(mild_solution):
    pb, sol = mild_solution
    assert abs(sol.theta_end) <= 1e-10
    assert sol.residual <= 1e-5
    assert abs(sol.balance) <= 1e-5
    assert sol.sup_norm == pytest.approx(sol.us[0])  # max at the left end
    assert np.all(np.diff(sol.us) <= 1e-12)  # non-increasing
    assert np.min(sol.us) > 0


def test_find_regular_empty_below_lam0(mild_family, lam0_jump):
    pb = mild_family.at(0.5 * lam0_jump)
    assert find_regular(pb, s_min=1e-6, s_max=1e3, n_scan=64) == []


def test_step_weight_flux_balance_identity(mild_solution):
    # A int_{u(z)}^{u(0)} f = B int_{u(1)}^{u(z)} f for step weights
    pb, sol = mild_solution
    F = pb.f.potential
    uz = sol.u_at(0.4)
    lhs = 1.0 * (F(sol.us[0]) - F(uz))
    rhs = 2.0 * (F(uz) - F(sol.us[-1]))
    assert lhs == pytest.approx(rhs, rel=1e-4)


def test_two_solutions_for_large_lambda_p2(jump_weight):
    f = Nonlinearity(kind="prototype", p=2.0, q=0.5, M=0.05)
    # small peak keeps both branches inside the graph regime
    pb = ProblemInstance(300.0, jump_weight, f)
    sols = find_regular(pb, s_min=1e-8, s_max=1e3, n_scan=96)
    assert len(sols) >= 2
    assert sols[0].sup_norm < sols[1].sup_norm
    for s in sols:
        assert s.residual <= 1e-5


def test_smallest_solution_shrinks_with_lambda(jump_weight):
    f = Nonlinearity(kind="prototype", p=2.0, q=0.5, M=1.0)
    sups = []
    for lam in (1e2, 1e3):
        sols = find_regular(ProblemInstance(lam, jump_weight, f), s_min=1e-8, s_max=1e3, n_scan=48)
        assert sols
        sups.append(sols[0].sup_norm)
    assert sups[1] == pytest.approx(sups[0] / 10.0, rel=0.05)  # lam^(-1/(p-1))


def test_blocked_below_dead_core_threshold():
    # p < 1: heights below the tangential-landing threshold cross the
    # trivial line inside (z, 1] and block; above it a regular solution
    # with a small positive tail exists
    w = Weight(0.5, (Segment(0.0, 0.5, ConstantForm(1.0)), Segment(0.5, 1.0, ConstantForm(-2.0))))
    f = Nonlinearity(kind="prototype", p=0.5, q=0.5, M=10.0)
    pb = ProblemInstance(1.0, w, f)
    blocked = [shoot_residual(pb, s0) for s0 in (0.01, 0.02, 0.03, 0.04, 0.05)]
    assert all(isinstance(b, Blocked) and b.event == "u_zero" for b in blocked)
    assert any(0.5 < b.x_stop <= 1.0 for b in blocked)
    sols = find_regular(pb, s_min=1e-3, s_max=10.0, n_scan=64)
    assert sols and sols[0].us[-1] > 0


def test_dead_core_continuation_from_tangency():
    # start just under the touchdown manifold u = d^4/36 of u'' = 2 sqrt(u):
    # the path grazes the trivial line with a flat tangent past the node,
    # continues exactly as u == 0 (f(0) = 0), and is flagged
    from curvebif.shoot import _march

    w = Weight(0.5, (Segment(0.0, 0.5, ConstantForm(1.0)), Segment(0.5, 1.0, ConstantForm(-2.0))))
    f = Nonlinearity(kind="prototype", p=0.5, q=0.5, M=10.0)
    pb = ProblemInstance(1.0, w, f)
    x0, d = 0.85, 0.05
    path = _march(pb, x0 - d, 0.97 * d ** 4 / 36.0, math.atan(-(d ** 3) / 9.0), 1.0, Caps(), collect=True)
    assert path.dead_core
    assert path.terminal == "reached"
    assert path.theta_end == 0.0
    assert path.us[-1] == 0.0


def test_solution_serialization(mild_solution):
    _, sol = mild_solution
    d = sol.to_dict()
    assert d["kind"] == "regular"
    assert d["jump"] == 0.0
    assert {"lambda", "mesh", "residual"} <= set(d)
    assert len(d["mesh"][0]) == 3
