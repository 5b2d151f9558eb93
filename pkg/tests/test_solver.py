import math
import warnings

import numpy as np
import pytest

from pasfhn.model import ModelParams, solve_equilibrium
from pasfhn.solver import (BlowUpError, ConfigurationError, ContractionError, FieldState, Grid,
                           ImexStepper, StabilityWarning, SystemSpec, Trajectory,
                           TrajectoryInterpolant, build_system, centered_system, full_system,
                           heat_kernel, heat_propagate, linear_error_system, pas_system,
                           picard_linear_error, simulate, step_imex, y_norm)
from pasfhn.solver import kernels
from pasfhn.solver.heat import KernelTruncationWarning
from pasfhn.solver.io import read_trajectory_csv, run_manifest, write_trajectory_csv
from pasfhn.source import SourceParams

MODEL = ModelParams(0.5, 8.0, 6.0)
EQ = solve_equilibrium(6.0, 8.0)
SMALL = SourceParams(a=0.00225, b=0.00225, d1=0.75, d2=0.75, x0=0.5, omega1=10.0, eta=1.0)
ZERO = SMALL.with_amplitudes(0.0, 0.0)


def zero_reaction(u1, u2, t):
    return np.zeros_like(u1), np.zeros_like(u2)


def diffusion_spec(rho=0.0):
    return SystemSpec("custom", zero_reaction, (1.0, rho))


def gaussian(x, var):
    return np.exp(-x * x / (2 * var)) / math.sqrt(2 * math.pi * var)


# ---------------------------------------------------------------- grid / trajectory

def test_grid_spacing_and_refine():
    g = Grid(1.0, 21)
    assert g.dx == pytest.approx(0.1)
    r = g.refined()
    assert r.n_points == 41 and np.allclose(r.x[::2], g.x)
    with pytest.raises(ConfigurationError):
        Grid(1.0, 2)
    with pytest.raises(ConfigurationError):
        Grid(0.0, 11)


def test_y_norm_definition():
    tr = Trajectory([0.0], [[-2.0, 1.0]], [[0.0, 0.5]])
    assert y_norm(tr, 1) == 2.0
    assert y_norm(tr, 2) == 0.5
    z = Trajectory([0.0, 1.0], np.zeros((2, 3)), np.zeros((2, 3)))
    assert y_norm(z) == 0.0


def test_trajectory_is_read_only_and_copies():
    u = np.zeros((1, 3))
    tr = Trajectory([0.0], u, u)
    assert u.flags.writeable
    with pytest.raises(ValueError):
        tr.u1[0, 0] = 1.0


def test_interpolant_linear_and_coverage():
    tr = Trajectory([0.0, 1.0], [[0.0], [2.0]], [[1.0], [3.0]])
    it = TrajectoryInterpolant(tr)
    v, w = it(0.25)
    assert v[0] == pytest.approx(0.5) and w[0] == pytest.approx(1.5)
    with pytest.raises(ConfigurationError):
        it(1.5)


# ---------------------------------------------------------------- kernels

@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_tridiagonal_backends_agree(backend, rng):
    if backend == "numba" and not kernels.NUMBA_AVAILABLE:
        pytest.skip("numba missing")
    n = 50
    lower, diag, upper = kernels.cn_matrix(n, 0.7)
    A = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    rhs = rng.standard_normal(n)
    x = kernels.make_tridiag(lower, diag, upper, backend=backend).solve(rhs)
    assert np.allclose(A @ x, rhs, atol=1e-12)
    out = np.empty(n)
    kernels.cn_apply(rhs, 0.35, out, backend=backend)
    ref = rhs.copy()
    ref[1:-1] += 0.35 * (rhs[:-2] - 2 * rhs[1:-1] + rhs[2:])
    assert np.allclose(out, ref, atol=1e-14)


# ---------------------------------------------------------------- stepping

def test_zero_reaction_keeps_u2_and_smooths_u1():
    g = Grid(5.0, 201)
    u1 = gaussian(g.x, 0.2)
    u2 = np.cos(g.x)
    s = FieldState(0.0, u1, u2)
    stepper = ImexStepper(diffusion_spec(), g, 0.01)
    peak = np.max(np.abs(u1))
    for _ in range(50):
        s = stepper.step(s)
        assert np.array_equal(s.u2, u2)
        assert np.max(np.abs(s.u1)) <= peak + 1e-15
        peak = np.max(np.abs(s.u1))


def test_step_imex_blowup_and_warning():
    g = Grid(1.0, 11)
    bad = FieldState(0.3, np.full(11, np.nan), np.zeros(11))
    with pytest.raises(BlowUpError) as exc:
        step_imex(bad, 0.01, diffusion_spec(), g)
    assert exc.value.t == 0.3
    stiff = SystemSpec("custom", zero_reaction, (1.0, 0.0), stiffness=1000.0)
    with pytest.warns(StabilityWarning):
        step_imex(FieldState.zeros(g), 0.01, stiff, g)


def test_reaction_overflow_raises_blowup():
    g = Grid(1.0, 11)
    spec = SystemSpec("custom", lambda u, w, t: (u ** 3, 0 * w), (1.0, 0.0))
    init = FieldState(0.0, np.full(11, 10.0), np.zeros(11))
    with np.errstate(all="ignore"), pytest.raises(BlowUpError):
        simulate(spec, g, init, 10.0, 0.1)


def manufactured_error(n, k=1.5 * math.pi, T=1.0):
    """Max error against u = e^{-t} cos(kx) for u_t - u_xx = -u^3/3 + forcing."""
    g = Grid(1.0, n)
    x = g.x
    cosx = np.cos(k * x)

    def reaction(u, w, t):
        exact = math.exp(-t) * cosx
        return -u ** 3 / 3 + (k * k - 1) * exact + exact ** 3 / 3, np.zeros_like(w)

    spec = SystemSpec("custom", reaction, (1.0, 0.0))
    init = FieldState(0.0, cosx.copy(), np.zeros(n))
    init.u1[[0, -1]] = 0.0
    tr = simulate(spec, g, init, T, 0.5 * g.dx)
    return float(np.max(np.abs(tr.u1[-1] - math.exp(-T) * cosx)))


def test_manufactured_solution_second_order():
    errs = [manufactured_error(n) for n in (21, 41, 81, 161)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.2 <= r <= 4.8 for r in ratios), ratios


def test_pas_zero_forcing_fixed_point():
    g = Grid(10.0, 101)
    tr = simulate(pas_system(MODEL, ZERO, EQ, g), g, FieldState.zeros(g), 2.0, 0.01)
    assert np.all(tr.u1 == 0.0) and np.all(tr.u2 == 0.0)


def test_linear_error_zero_forcing():
    g = Grid(10.0, 101)
    V = TrajectoryInterpolant(Trajectory([0.0, 1.0], np.zeros((2, 101)), np.zeros((2, 101))))
    tr = simulate(linear_error_system(MODEL, ZERO, EQ, g, V), g, FieldState.zeros(g), 1.0, 0.01)
    assert np.all(tr.u1 == 0.0) and np.all(tr.u2 == 0.0)


def test_coupled_coverage_error():
    g = Grid(10.0, 101)
    V = TrajectoryInterpolant(Trajectory([0.0, 0.5], np.zeros((2, 101)), np.zeros((2, 101))))
    with pytest.raises(ConfigurationError):
        simulate(linear_error_system(MODEL, SMALL, EQ, g, V), g, FieldState.zeros(g), 1.0, 0.01)


def test_full_equals_centered_shifted():
    src = SMALL.with_amplitudes(0.05, 0.03)
    g = Grid(20.0, 401)
    v = 0.05 * np.exp(-g.x ** 2)
    w = 0.01 * np.exp(-g.x ** 2)
    dt = 2 * math.pi / (src.omega2 * 40)
    c = simulate(centered_system(MODEL, src, EQ, g), g, FieldState(0.0, v, w), 1.0, dt)
    f = simulate(full_system(MODEL, src, EQ, g), g, FieldState(0.0, v + EQ.v0, w + EQ.w0), 1.0, dt)
    assert np.max(np.abs(f.u1 - EQ.v0 - c.u1)) <= 1e-10
    assert np.max(np.abs(f.u2 - EQ.w0 - c.u2)) <= 1e-10


def test_sampling_and_meta():
    g = Grid(5.0, 51)
    tr = simulate(diffusion_spec(), g, FieldState.zeros(g), 1.0, 0.03, sample_every=5)
    assert tr.times[-1] == pytest.approx(1.0)
    assert tr.meta["n_steps"] * tr.meta["dt"] == pytest.approx(1.0)
    assert len(tr) == 1 + math.ceil(tr.meta["n_steps"] / 5)


def test_backends_give_same_trajectory():
    if not kernels.NUMBA_AVAILABLE:
        pytest.skip("numba missing")
    g = Grid(10.0, 201)
    src = SMALL.with_amplitudes(0.05, 0.03)
    init = FieldState(0.0, 0.05 * np.exp(-g.x ** 2), np.zeros(201))
    spec = pas_system(MODEL, src, EQ, g)
    a = simulate(spec, g, init, 1.0, 0.01, backend="numpy")
    b = simulate(spec, g, init, 1.0, 0.01, backend="numba")
    assert np.max(np.abs(a.u1 - b.u1)) <= 1e-13


# ---------------------------------------------------------------- heat kernel

def test_heat_constant_and_identity():
    g = Grid(10.0, 201)
    c = np.full(201, 3.0)
    assert np.allclose(heat_propagate(c, 1.0, 0.5, g), 3.0, rtol=0, atol=1e-13)
    u = np.sin(g.x)
    assert np.array_equal(heat_propagate(u, 0.0, 1.0, g), u)
    assert np.array_equal(heat_propagate(u, 1.0, 0.0, g), u)
    assert heat_kernel(1.0, 0.5, 0.1).sum() == pytest.approx(1.0)


def test_heat_gaussian_oracle():
    g = Grid(20.0, 4001)
    s2, sigma, t = 0.5, 0.7, 0.8
    out = heat_propagate(gaussian(g.x, s2), sigma, t, g)
    assert np.max(np.abs(out - gaussian(g.x, s2 + 2 * sigma * t))) <= 1e-6


def test_heat_truncation_warning():
    g = Grid(1.0, 11)
    with pytest.warns(KernelTruncationWarning):
        heat_propagate(np.zeros(11), 1.0, 10.0, g)


def test_heat_matches_fd_diffusion():
    g = Grid(40.0, 4001)
    u0 = np.exp(-g.x ** 2) * np.cos(g.x)
    fd = simulate(diffusion_spec(), g, FieldState(0.0, u0, np.zeros_like(u0)), 1.0, 0.01)
    assert np.max(np.abs(fd.u1[-1] - heat_propagate(u0, 1.0, 1.0, g))) <= 1e-3


# ---------------------------------------------------------------- Picard

def _pas_run(g, T=1.0):
    V0 = 0.004 * np.exp(-g.x ** 2)
    return simulate(pas_system(MODEL, SMALL, EQ, g), g, FieldState(0.0, V0, 0 * V0), T, 0.005)


def test_picard_zero_iterates():
    g = Grid(20.0, 401)
    pas = _pas_run(g)
    r = picard_linear_error(MODEL, SMALL, EQ, pas, g, 1.0, 0, 0.005)
    assert np.all(r.trajectory.u1 == 0.0) and r.distances == []


def test_picard_zero_source():
    g = Grid(20.0, 401)
    pas = simulate(pas_system(MODEL, ZERO, EQ, g), g, FieldState.zeros(g), 1.0, 0.01)
    r = picard_linear_error(MODEL, ZERO, EQ, pas, g, 1.0, 3, 0.005)
    assert np.all(r.trajectory.u1 == 0.0) and np.all(r.trajectory.u2 == 0.0)


def test_picard_contracts_below_alpha():
    g = Grid(20.0, 801)
    pas = _pas_run(g)
    r = picard_linear_error(MODEL, SMALL, EQ, pas, g, 1.0, 6, 0.0025)
    assert r.alpha < 1
    assert all(q <= r.alpha for q in r.ratios[1:])


def test_picard_divergence_detected():
    # a huge epsilon makes the coupling term dominate and the iteration expand
    g = Grid(20.0, 201)
    pas = _pas_run(g)
    wild = ModelParams(400.0, 8.0, 6.0)
    with pytest.raises(ContractionError):
        picard_linear_error(wild, SMALL.with_amplitudes(0.5, 0.5), EQ, pas, g, 1.0, 12, 0.02)


# ---------------------------------------------------------------- io

def test_csv_roundtrip_and_manifest(tmp_path):
    g = Grid(5.0, 11)
    tr = Trajectory([0.0, 0.5], np.arange(22.0).reshape(2, 11) / 7, np.ones((2, 11)) / 3,
                    {"dt": 0.5, "tag": "custom"})
    p = write_trajectory_csv(tmp_path / "t.csv", tr, g)
    times, x, u1, u2 = read_trajectory_csv(p)
    assert np.array_equal(times, tr.times) and np.array_equal(x, g.x)
    assert np.array_equal(u1, tr.u1) and np.array_equal(u2, tr.u2)
    m = run_manifest(tr, g, SMALL)
    assert m["grid"]["n_points"] == 11 and "tail_over_delta" in m["truncation"]


def test_build_system_tags():
    g = Grid(5.0, 11)
    assert build_system("pas", MODEL, SMALL, EQ, g).tag == "pas"
    with pytest.raises(ValueError):
        build_system("nope", MODEL, SMALL, EQ, g)
    with pytest.raises(ValueError):
        SystemSpec("nope", zero_reaction)
