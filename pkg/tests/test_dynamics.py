import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from couplab.dynamics import (BlowUpError, CglModel, ConfigError, LowHighToyModel, ModelContractError,
                              NoiseOperator, SineDrift, SpectralField, ToyCoefficients, TorusModel, ZeroDrift,
                              build_model, energy_path, energy_start, energy_update, girsanov_drift_binding,
                              girsanov_drift_torus, log_likelihood_ratio, phi, phi_reconstruct, simulate,
                              sobolev_norm, step_cgl, step_lowhigh, step_torus, torus_delta, torus_dist,
                              trajectory_csv)
from couplab.dynamics.base import noise_shift_drift, recover_noise, transition_logdensity

LINEAR_TOY = ToyCoefficients(a_f=0.0, a_g=0.0, b_g=0.0, s0=1.0, s1=0.0, h0=1.0, h1=0.0)


def quiet_cgl(**kw):
    M = kw.pop("M", 4)
    N = kw.pop("N", 2)
    noise = NoiseOperator(N, 1, M, low_scale=0.0, high_scale=0.0)
    return CglModel(M=M, N=N, N1=1, noise=noise, **kw)


# ---------------------------------------------------------------- torus

def test_step_torus_examples():
    m = TorusModel(ZeroDrift(), dt=0.01)
    assert step_torus(m, 0.3, 0.0) == 0.3
    assert step_torus(m, 0.9, 0.2) == pytest.approx(0.1)
    m = TorusModel(SineDrift(1.0), dt=0.01)
    assert step_torus(m, 0.25, 0.0) == pytest.approx(0.25 - 0.01, abs=1e-15)


def test_torus_delta_range():
    x = np.linspace(0, 1, 101, endpoint=False)
    d = torus_delta(x[:, None], x[None, :])
    assert d.min() >= -0.5 and d.max() < 0.5
    assert np.max(torus_dist(x[:, None] + d, x[None, :])) <= 1e-12


def test_torus_drift_examples():
    m = TorusModel(ZeroDrift(), dt=0.01)
    path = np.linspace(0.2, 0.7, 101)
    np.testing.assert_allclose(girsanov_drift_torus(m, 1.0, 0.1, 0.4, path), 0.3)
    m = TorusModel(SineDrift(1.0), dt=0.01)
    assert np.all(girsanov_drift_torus(m, 1.0, 0.3, 0.3, path) == 0.0)


def test_torus_drift_bound_along_paths():
    m = TorusModel(SineDrift(1.0), dt=1e-2)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x1, x2 = rng.random(2)
        path = np.cumsum(np.r_[x2, 0.1 * rng.standard_normal(100)])
        d = girsanov_drift_torus(m, 1.0, x1, x2, path)
        assert np.max(np.abs(d)) <= abs(torus_delta(x1, x2)) + 2 * m.sup_f + 1e-12


def test_torus_contract_checks():
    with pytest.raises(ModelContractError):
        TorusModel(SineDrift(1.0), lip_f=1.0)
    with pytest.raises(ModelContractError):
        TorusModel(ZeroDrift(), dt=0.0)


# ---------------------------------------------------------------- toy model

def test_step_lowhigh_linear_decay():
    m = LowHighToyModel(LINEAR_TOY, dt=0.01)
    x, y = step_lowhigh(m, (np.array(0.7), np.array(-1.3)), (0.0, 0.0))
    assert x == pytest.approx(0.7 * 0.98) and y == pytest.approx(-1.3 * 0.98)
    x, y = step_lowhigh(LowHighToyModel(dt=0.01), (np.array(0.0), np.array(0.0)), (0.0, 0.0))
    # default g(0, 0) = b_g != 0, so only the linear-coefficient model stays at rest
    assert x == 0.0
    assert step_lowhigh(m, (np.array(0.0), np.array(0.0)), (0.0, 0.0)) == (0.0, 0.0)


def test_step_lowhigh_constant_coefficients_closed_form():
    c = ToyCoefficients(a_f=0.0, a_g=0.0, b_g=0.3, s0=1.5, s1=0.0, h0=0.4, h1=0.0)
    m = LowHighToyModel(c, dt=0.02)
    x0, y0, db, de = 0.3, -0.8, 0.05, -0.07
    x, y = step_lowhigh(m, (np.array(x0), np.array(y0)), (db, de))
    assert abs(x - (x0 * (1 - 0.04) + 1.5 * db)) <= 1e-14
    assert abs(y - (y0 * (1 - 0.04) - 0.3 * np.cos(x0) * 0.02 + 0.4 * de)) <= 1e-14


def test_linear_toy_matches_discrete_ou_law():
    # dX = -2X dt + dB under Euler: X_n ~ N(x0 r^n, dt sum_j r^(2j)), r = 1 - 2 dt
    m = LowHighToyModel(LINEAR_TOY, dt=0.01)
    n, size, x0 = 100, 20_000, 1.5
    db, de = m.draw_noise(np.random.default_rng(0), size, n)
    X, Y, _ = simulate(m, np.tile([x0, -x0], (size, 1)), db, de)
    r = 1 - 2 * m.dt
    sd = np.sqrt(m.dt * np.sum(r ** (2 * np.arange(n))))
    assert stats.kstest(X[:, -1, 0], "norm", args=(x0 * r ** n, sd)).pvalue > 1e-3
    assert stats.kstest(Y[:, -1, 0], "norm", args=(-x0 * r ** n, sd)).pvalue > 1e-3


def test_toy_contract_checks():
    with pytest.raises(ModelContractError):
        LowHighToyModel(ToyCoefficients(a_g=1.5))
    with pytest.raises(ModelContractError):
        LowHighToyModel(sigma0=2.0)


def test_phi_round_trip_and_non_anticipative():
    m = LowHighToyModel(dt=1e-2)
    rng = np.random.default_rng(1)
    u0 = rng.standard_normal((20, 2))
    db, de = m.draw_noise(rng, 20, 100)
    X, Y, mX = simulate(m, u0, db, de)
    Yr = phi_reconstruct(m, X, de, u0)
    assert np.max(np.abs(Yr - Y)) <= 1e-10
    de2 = de.copy()
    de2[:, 50:] += 1.0
    Y2, _ = phi(m, X, de2, u0[:, 1:])
    np.testing.assert_array_equal(Y2[:, :51], Y[:, :51])
    assert not np.allclose(Y2[:, 51:], Y[:, 51:])
    with pytest.raises(ModelContractError):
        phi(m, X[:, :-1], de, u0[:, 1:])


def test_phi_zero_inputs():
    m = LowHighToyModel(ToyCoefficients(b_g=0.0), dt=1e-2)
    X = np.zeros((1, 11, 1))
    Y, _ = phi(m, X, np.zeros((1, 10, 1)), np.zeros((1, 1)))
    assert np.all(Y == 0.0)


def test_phi_contraction_in_high_modes():
    m = LowHighToyModel(dt=1e-3)
    rng = np.random.default_rng(2)
    db, de = m.draw_noise(rng, 50, 2000)
    u1 = np.c_[rng.standard_normal(50), rng.standard_normal(50)]
    X, Y1, _ = simulate(m, u1, db, de)
    y2 = rng.standard_normal((50, 1)) * 3
    Y2, _ = phi(m, X, de, y2)
    t = m.dt * np.arange(2001)
    lhs = np.abs(Y1 - Y2)[..., 0]
    rhs = np.exp(-t)[None, :] * np.abs(u1[:, 1:] - y2)
    assert np.all(lhs <= rhs * (1 + 1e-12))


def test_binding_drift_examples_and_bound():
    m = LowHighToyModel(dt=1e-3)
    rng = np.random.default_rng(3)
    db, de = m.draw_noise(rng, 30, 1000)
    u1 = rng.standard_normal((30, 2))
    X, _, _ = simulate(m, u1, db, de)
    assert np.all(girsanov_drift_binding(m, X, de, u1, u1) == 0.0)
    u2 = u1.copy()
    u2[:, 1] += rng.standard_normal(30) * 2
    d = girsanov_drift_binding(m, X, de, u1, u2)
    t = m.dt * np.arange(1000)
    bound = m.lip_f / m.sigma0 * np.exp(-t)[None, :] * np.abs(u1[:, 1] - u2[:, 1])[:, None]
    assert np.all(np.abs(d[..., 0]) <= bound * (1 + 1e-12))
    dc = girsanov_drift_binding(m, X, de, u1, u2, cutoff=400)
    assert np.all(dc[:, 400:] == 0.0)
    np.testing.assert_array_equal(dc[:, :400], d[:, :400])


def test_log_likelihood_ratio_examples():
    assert log_likelihood_ratio(np.zeros((3, 5, 1)), np.ones((3, 5, 1)), 0.1).tolist() == [0.0] * 3
    dW = np.array([0.1, -0.2, 0.05, 0.3])[:, None]
    d = np.full_like(dW, 2.0)
    # 2 * 0.25 - 0.5 * 4 * 4 * 0.01
    assert log_likelihood_ratio(d, dW, 0.01) == pytest.approx(0.5 - 0.08, abs=1e-15)
    with pytest.raises(ModelContractError):
        log_likelihood_ratio(d, dW[:-1], 0.01)


@pytest.mark.parametrize("model", [LowHighToyModel(dt=1e-2), CglModel(M=8, N=4, N1=2, dt=1e-3)],
                         ids=["toy", "cgl"])
def test_girsanov_equals_kernel_density_ratio(model):
    rng = np.random.default_rng(4)
    dim = model.low_dim + model.high_dim
    u1 = (0.3 * rng.standard_normal((10, dim))).astype(model.dtype)
    u2 = u1.copy()
    u2[:, model.low_dim:] += 0.5
    db, de = model.draw_noise(rng, 10, 50)
    X, _, m1 = simulate(model, u1, db, de)
    _, m2 = phi(model, X, de, u2[:, model.low_dim:])
    lk = transition_logdensity(model, X, m2) - transition_logdensity(model, X, m1)
    lg = log_likelihood_ratio(noise_shift_drift(model, X, m1, m2), db, model.dt)
    np.testing.assert_allclose(lk, lg, atol=1e-10)
    np.testing.assert_allclose(recover_noise(model, X, m1), db, atol=1e-12)


# ---------------------------------------------------------------- CGL

def test_cgl_zero_is_fixed_point():
    m = CglModel(M=8, N=4, N1=2)
    out = step_cgl(m, np.zeros(8, complex), np.zeros(8, complex))
    assert np.all(out == 0)


def test_cgl_single_mode_nonlinearity_matches_quadrature():
    m = CglModel(M=8, N=4, N1=2, sigma=1.0, case="H1")
    a1 = 0.7 - 0.4j
    a = np.zeros(8, complex)
    a[0] = a1
    e1 = lambda x: np.sqrt(2) * np.sin(np.pi * x)
    re = integrate.quad(lambda x: (abs(a1) ** 2 * e1(x) ** 2 * a1 * e1(x) * e1(x)).real, 0, 1, epsabs=1e-14)[0]
    im = integrate.quad(lambda x: (abs(a1) ** 2 * e1(x) ** 2 * a1 * e1(x) * e1(x)).imag, 0, 1, epsabs=1e-14)[0]
    got = m.nonlinearity(a)[0]
    assert abs(got - (m.eta + 1j * m.lam) * (re + 1j * im)) <= 1e-10


def test_cgl_dealiasing_cutoff():
    m = CglModel(M=8, N=4, N1=2, sigma=1.0, case="H1")
    rng = np.random.default_rng(5)
    a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    full = m.nonlinearity(a, full=True)
    cut = m.grid.cutoff
    assert full.shape[-1] == m.grid_size
    assert np.all(full[cut:] == 0)
    np.testing.assert_allclose(full[:8], m.nonlinearity(a), atol=1e-12)


def test_cgl_linear_run_is_exact():
    m = quiet_cgl(nonlinear=False, dt=1e-3)
    rng = np.random.default_rng(6)
    a0 = rng.standard_normal((1, 4)) + 1j * rng.standard_normal((1, 4))
    db, de = m.draw_noise(rng, 1, 500)
    X, Y, _ = simulate(m, a0, db, de)
    a = m.join(X, Y)[0, -1]
    np.testing.assert_allclose(a, a0[0] * np.exp(-(m.eps + 1j) * m.mu * 0.5), rtol=1e-12)


def test_cgl_blowup_reports_time():
    m = CglModel(M=8, N=4, N1=2, dt=0.05, case="H1")
    u = np.zeros((1, 8), complex)
    u[0, 0] = 50.0
    db, de = m.draw_noise(np.random.default_rng(0), 1, 20)
    with pytest.raises(BlowUpError) as err:
        simulate(m, u, db, de, t0=1.0)
    assert 1.0 < err.value.time <= 2.0
    with pytest.raises(BlowUpError) as err:
        a = u[0]
        for j in range(20):
            a = step_cgl(m, a, np.zeros(8), t=j * m.dt)
    assert np.isfinite(err.value.time)


def test_cgl_contract_checks():
    with pytest.raises(ModelContractError):
        CglModel(sigma=1.6, case="L2")
    with pytest.raises(ModelContractError):
        CglModel(case="H1", lam=-1)
    with pytest.raises(ModelContractError):
        CglModel(M=8, N=4, N1=2, grid_size=10)
    with pytest.raises(ModelContractError):
        SpectralField(np.zeros(8), grid_size=4)


def test_sobolev_norm_examples():
    assert sobolev_norm(np.zeros(6), 1.5) == 0.0
    a = np.zeros(6, complex)
    a[2] = 0.5 - 0.5j
    mu3 = (3 * np.pi) ** 2
    assert sobolev_norm(a, 1.0) == pytest.approx(mu3 ** 0.5 * abs(a[2]))
    assert sobolev_norm(SpectralField(a), 2.0) == pytest.approx(mu3 * abs(a[2]))
    with pytest.raises(ModelContractError):
        sobolev_norm(a, 3.5)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=32), st.floats(0.0, 2.0))
def test_sobolev_interpolation(vals, s):
    a = np.asarray(vals)
    lhs = sobolev_norm(a, s)
    rhs = sobolev_norm(a, 0.0) ** (1 - s / 2) * sobolev_norm(a, 2.0) ** (s / 2)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


# ---------------------------------------------------------------- energy

def test_energy_zero_path():
    m = CglModel(M=8, N=4, N1=2, case="H1")
    states = np.zeros((2, 11, 8), complex)
    assert np.all(energy_path(m, states, m.dt) == 0)
    led = energy_start(m, np.zeros(8, complex))
    for _ in range(5):
        led = energy_update(m, led, np.zeros(8, complex), m.dt)
    assert led.value == 0.0 and led.t == pytest.approx(5 * m.dt)


def test_energy_single_mode_closed_form():
    m = quiet_cgl(nonlinear=False, dt=1e-3)
    a0 = np.zeros((1, 4), complex)
    a0[0, 0] = 0.8 + 0.6j
    db, de = m.draw_noise(np.random.default_rng(0), 1, 1000)
    X, Y, _ = simulate(m, a0, db, de)
    p = m.join(X, Y)
    E = energy_path(m, p, m.dt)[0]
    t = m.dt * np.arange(1001)
    k = 2 * m.eps * m.mu[0]
    closed = np.exp(-k * t) + m.eps * m.mu[0] * (1 - np.exp(-k * t)) / k
    np.testing.assert_allclose(E, closed, rtol=1e-5)
    # the ledger accumulates the same trapezoid sums step by step
    led = energy_start(m, p[0, 0])
    assert led.value == pytest.approx(m.lyapunov(p[0, 0]))
    for j in range(1, 1001):
        led = energy_update(m, led, p[0, j], m.dt)
    assert led.value == pytest.approx(E[-1], rel=1e-12)


def test_energy_integrals_nondecreasing():
    m = CglModel(M=8, N=4, N1=2, case="H1")
    rng = np.random.default_rng(8)
    db, de = m.draw_noise(rng, 3, 200)
    X, Y, _ = simulate(m, 0.3 * np.ones((3, 8), complex), db, de)
    p = m.join(X, Y)
    led = energy_start(m, p[:, 0])
    prev = {k: v.copy() for k, v in led.integrals.items()}
    for j in range(1, 201):
        led = energy_update(m, led, p[:, j], m.dt)
        for k, v in led.integrals.items():
            assert np.all(v >= prev[k])
        prev = {k: v.copy() for k, v in led.integrals.items()}


# ---------------------------------------------------------------- config

def test_build_model_and_errors():
    m = build_model({"model": "torus", "drift": {"kind": "sine", "amp": 0.5}})
    assert isinstance(m, TorusModel) and m.sup_f == 0.5
    assert isinstance(build_model({"model": "cgl", "M": 8, "N": 4, "N1": 2}), CglModel)
    with pytest.raises(ConfigError):
        build_model({"model": "nope"})
    with pytest.raises(ConfigError):
        build_model({"model": "torus", "bogus": 1})
    with pytest.raises(ConfigError):
        build_model({"model": "cgl", "M": 4, "N": 8})


def test_trajectory_csv_layout():
    m = LowHighToyModel()
    text = trajectory_csv(m, [0.0, 0.1], np.array([[1.0, 2.0], [3.0, 4.0]]), [0.5, 0.25])
    lines = text.strip().split("\n")
    assert lines[0] == "time,x,y,energy"
    assert lines[2] == "0.1,3.0,4.0,0.25"
