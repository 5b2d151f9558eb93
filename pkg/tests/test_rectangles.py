import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pasfhn.model import ModelParams, solve_equilibrium
from pasfhn.rectangles import (ErrorFieldSamples, ErrorRectangleInputs, InvarianceMonitor,
                               Rectangle, aspect_for, empirical_delta_star, error_field,
                               error_rectangle, error_rectangle_pqr, face_flux_margin,
                               find_rectangle, gauge_norm, in_D_Delta, monitor_invariance,
                               pas_field)
from pasfhn.solver import FieldState, Grid, Trajectory, pas_system, simulate
from pasfhn.source import SourceParams

EQ = solve_equilibrium(6.0, 8.0)
V0 = EQ.v0
MODEL = ModelParams(0.5, 8.0, 6.0)


def source_with_delta(delta, omega1=100.0):
    # both sources centred at x=0 with d=1, so sup(|A|+|B|) = a + b = delta
    return SourceParams(a=delta / 2, b=delta / 2, d1=1.0, d2=1.0, x0=0.0, omega1=omega1, eta=1.0)


def set_ls_bound(L, S, v0, Delta):
    return (v0 * v0 - 1 - S / L) / (Delta ** 2 * (-v0 - L) / L ** 2 + (-v0 - L / 3))


# ---------------------------------------------------------------- D(Delta)

def test_in_d_delta_example():
    assert set_ls_bound(0.5, 0.5, V0, 0.1) == pytest.approx(0.97, abs=0.01)
    assert in_D_Delta(Rectangle(0.5, 0.5), V0, 8.0, 0.1)


def test_in_d_delta_strict_ratio_boundary():
    assert not in_D_Delta(Rectangle(0.4, 0.4 / 8.0), V0, 8.0, 0.0)


def test_in_d_delta_zero_delta_reduces():
    L, S = 0.6, 0.3
    reduced = (V0 * V0 - 1 - S / L) / (-V0 - L / 3)
    assert in_D_Delta(Rectangle(L, S), V0, 8.0, 0.0) == (L < reduced)


def test_in_d_delta_requires_v0_below_minus_one():
    with pytest.raises(ValueError):
        in_D_Delta(Rectangle(0.1, 0.1), -0.5, 8.0, 0.0)


def test_rectangle_validation():
    with pytest.raises(ValueError):
        Rectangle(0.0, 1.0)


@pytest.mark.parametrize("bound", [1e-3, 0.1, 0.5, 5.0])
def test_find_rectangle_zero_delta_always(bound):
    r = find_rectangle(V0, 8.0, 0.0, bound)
    assert r is not None and max(r.L, r.S) <= bound
    assert in_D_Delta(r, V0, 8.0, 0.0)
    assert r.S / r.L == pytest.approx(aspect_for(V0, 8.0))


def test_find_rectangle_large_delta_none():
    assert find_rectangle(V0, 8.0, 10.0, 0.5) is None


def test_empirical_delta_star_brackets():
    ds = empirical_delta_star(V0, 8.0, 0.5, tol=1e-8)
    assert find_rectangle(V0, 8.0, ds, 0.5) is not None
    assert find_rectangle(V0, 8.0, ds * (1 + 1e-6) + 1e-9, 0.5) is None


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.3), st.floats(0.01, 2.0))
def test_find_rectangle_postcondition(Delta, bound):
    r = find_rectangle(V0, 8.0, Delta, bound)
    if r is not None:
        assert in_D_Delta(r, V0, 8.0, Delta) and max(r.L, r.S) <= bound


# ---------------------------------------------------------------- faces

def test_top_face_value():
    h1, h2 = pas_field(0.5, 0.5, 0.0, V0, 0.5, 8.0)
    assert h2 == pytest.approx(0.5 * (0.5 - 4.0))


@pytest.mark.parametrize("Delta", [0.0, 0.05, 0.1])
def test_certified_rectangles_have_inward_faces(Delta):
    src = source_with_delta(Delta)
    r = find_rectangle(V0, 8.0, Delta, 0.5)
    assert r is not None
    assert face_flux_margin("H", r, MODEL, EQ, src, 2001, 200) < 0


def test_flat_rectangle_fails_top_face():
    r = Rectangle(0.4, 0.4 / 8.0 * 0.5)
    assert face_flux_margin("H", r, MODEL, EQ, source_with_delta(0.0), 201, 20) > 0


def test_margin_monotone_in_amplitude_on_right_face():
    # at x=0, t=0 the envelope term -env (L + v0) grows with |a|
    r = Rectangle(0.3, 0.2)
    vals = []
    for a in (0.0, 0.05, 0.1, 0.2):
        env = a * a / 2
        vals.append(pas_field(r.L, 0.0, env, V0, 0.5, 8.0)[0])
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_jitter_keeps_certificate(rng):
    src = source_with_delta(0.05)
    r = find_rectangle(V0, 8.0, 0.05, 0.5)
    jitter = rng.uniform(-0.05, 0.05, 2001)
    assert face_flux_margin("H", r, MODEL, EQ, src, 2001, 50, x_jitter=jitter) < 0


def test_error_field_faces():
    r = Rectangle(0.05, 0.05 * 1.3 / 8)
    aux = ErrorFieldSamples(V=np.array([0.0, 0.01]), Fv=np.array([0.0, 1e-4]),
                            phi1=np.array([0.0, 1e-3]), phi2=np.array([-V0, -V0 - 0.01]))
    assert face_flux_margin("X", r, MODEL, EQ, aux=aux) < 0
    with pytest.raises(ValueError):
        face_flux_margin("X", r, MODEL, EQ)
    with pytest.raises(ValueError):
        face_flux_margin("Q", r, MODEL, EQ)


def test_error_field_reduces_without_fv():
    x1, x2 = error_field(0.1, 0.02, 0.0, 0.0, 0.0, -V0, V0, 0.5, 8.0)
    c = 1 - V0 ** 2
    assert x1 == pytest.approx(c * 0.1 - 0.1 ** 3 / 3 - 0.02 - V0 * 0.01)
    assert x2 == pytest.approx(0.5 * (0.1 - 8 * 0.02))


# ---------------------------------------------------------------- gauge / invariance

def test_gauge_examples():
    r = Rectangle(0.2, 0.1)
    n = 5
    assert gauge_norm(FieldState(0.0, np.zeros(n), np.zeros(n)), r) == 0.0
    u1, u2 = np.zeros(n), np.zeros(n)
    u1[2], u2[2] = 0.2, 0.1
    assert gauge_norm(FieldState(0.0, u1, u2), r) == pytest.approx(1.0)
    u1[2] = 0.1
    assert gauge_norm(FieldState(0.0, u1, u2), r) == pytest.approx(1.0)


def test_gauge_bounds_sup_norm(rng):
    r = Rectangle(0.3, 0.1)
    for _ in range(50):
        s = FieldState(0.0, rng.uniform(-0.3, 0.3, 9), rng.uniform(-0.1, 0.1, 9))
        if gauge_norm(s, r) < 1:
            assert max(np.max(np.abs(s.u1)), np.max(np.abs(s.u2))) <= max(r.L, r.S)


def test_monitor_examples():
    r = Rectangle(0.2, 0.1)
    z = Trajectory([0.0, 1.0], np.zeros((2, 4)), np.zeros((2, 4)))
    rep = monitor_invariance(z, r)
    assert rep.invariant and rep.max_gauge == 0.0 and rep.first_exit_time is None
    u1 = np.zeros((3, 4))
    u1[2, 1] = 0.4
    rep = monitor_invariance(Trajectory([0.0, 1.0, 2.0], u1, np.zeros((3, 4))), r)
    assert not rep.invariant and rep.max_gauge == pytest.approx(2.0) and rep.first_exit_time == 2.0


def test_monitor_finer_sampling_never_later(rng):
    r = Rectangle(1.0, 1.0)
    t = np.linspace(0, 1, 41)
    u1 = (1.5 * np.sin(3 * t))[:, None] * np.ones((1, 3))
    fine = monitor_invariance(Trajectory(t, u1, 0 * u1), r)
    coarse = monitor_invariance(Trajectory(t[::4], u1[::4], 0 * u1[::4]), r)
    assert fine.first_exit_time <= coarse.first_exit_time


def test_pas_run_stays_in_certified_rectangle():
    src = source_with_delta(0.1)
    r = find_rectangle(V0, 8.0, 0.1, 0.5)
    g = Grid(40.0, 801)
    bump = np.exp(-g.x ** 2)
    mon = InvarianceMonitor(r)
    tr = simulate(pas_system(MODEL, src, EQ, g), g,
                  FieldState(0.0, 0.5 * r.L * bump, 0.5 * r.S * bump), 20.0, 0.02, 10, mon)
    assert mon.report().invariant
    assert monitor_invariance(tr, r).invariant
    assert np.max(np.abs(tr.u1)) <= r.L


# ---------------------------------------------------------------- error rectangle

def bisect_smaller_root(P, Q, R):
    f = lambda L: P - Q * L + R * L * L
    lo, hi = 0.0, Q / (2 * R)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_error_rectangle_example():
    inp = ErrorRectangleInputs(0.01, 0.001, 0.01, 0.1, V0, 8.0)
    P, Q, R = error_rectangle_pqr(inp)
    K = abs(V0) + 1.01
    assert P == pytest.approx(0.01 ** 3 / 3 + K * 1e-4)
    assert R == pytest.approx(K + 0.01)
    er = error_rectangle(inp)
    assert er is not None and er.L_hat > 0
    assert er.L_hat == pytest.approx(P / Q, rel=0.02)
    assert abs(er.L_hat - bisect_smaller_root(P, Q, R)) <= 1e-12
    assert er.L_hat == pytest.approx((Q - math.sqrt(Q * Q - 4 * P * R)) / (2 * R), rel=1e-10)
    rect = er.rectangle(inp)
    assert rect.S == pytest.approx(1.1 * er.L_hat / 8.0)


def test_error_rectangle_degenerate():
    er = error_rectangle(ErrorRectangleInputs(0.0, 0.0, 0.0, 0.1, V0, 8.0))
    assert er.L_hat == 0.0 and er.degenerate and er.rectangle(None) is None


def test_error_rectangle_large_c3_none():
    assert error_rectangle(ErrorRectangleInputs(0.01, 0.001, 1.0, 0.1, V0, 8.0)) is None


def test_error_rectangle_inputs_validation():
    with pytest.raises(ValueError):
        ErrorRectangleInputs(-0.1, 0.0, 0.0, 0.1, V0, 8.0)
    with pytest.raises(ValueError):
        ErrorRectangleInputs(0.1, 0.0, 0.0, 100.0, V0, 8.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.3), st.floats(0, 0.3), st.floats(0, 0.3), st.floats(0.01, 5.0))
def test_error_rectangle_root_property(C1, C2, C3, eps):
    if not V0 ** 2 - 1 - (1 + eps) / 8 > 0:
        return
    inp = ErrorRectangleInputs(C1, C2, C3, eps, V0, 8.0)
    P, Q, R = error_rectangle_pqr(inp)
    er = error_rectangle(inp)
    if Q <= 0 or 4 * P * R >= Q * Q:
        assert er is None
    else:
        assert abs(er.L_hat - bisect_smaller_root(P, Q, R)) <= 1e-12
