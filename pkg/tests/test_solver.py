import numpy as np
import pytest

from lpturb import spectral
from lpturb.core import GridSpec
from lpturb.generate import random_solenoidal, single_mode
from lpturb.solver import (ForcingSpec, PhysicalParams, SolverConfig,
                           SolverState, StepSizeError,
                           energy_balance_residual, run, step)


def _beltrami_config(g, dt, t_end, mu=0.05, d_i=0.05):
    params = PhysicalParams(nu=0.0, mu=mu, d_i=d_i, L=g.L)
    return SolverConfig(model="EMHD", params=params, dt=dt, t_end=t_end)


def test_beltrami_emhd_exponential_decay():
    # a Beltrami field is a steady solution of ideal EMHD; with resistivity
    # it decays as exp(-mu k^2 t) exactly
    g = GridSpec(32, 1.0)
    B0 = single_mode(g, (0, 0, 2), amplitude=0.5, kind="beltrami")
    mu, d_i, dt, n_steps = 0.05, 0.05, 2.5e-4, 100
    config = _beltrami_config(g, dt, n_steps * dt, mu=mu, d_i=d_i)
    result = run(config, SolverState(0.0, B0))
    k = 2 * np.pi * 2 / g.L
    decay = np.exp(-mu * k**2 * n_steps * dt)
    assert np.allclose(result.final.B.data, decay * B0.data,
                       atol=1e-6 * decay * np.abs(B0.data).max())


def test_solenoidality_preserved():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=0, amplitude=0.5)
    config = _beltrami_config(g, 5e-4, 0.01, d_i=0.02)
    result = run(config, SolverState(0.0, B))
    for snap in result.snapshots:
        b_hat = spectral.forward(snap.fields["B"])
        assert spectral.divergence_l2(b_hat) < 1e-10


def test_ideal_energy_conservation():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=1, amplitude=0.5)
    params = PhysicalParams(nu=0.0, mu=0.0, d_i=0.02, L=1.0)
    config = SolverConfig(model="EMHD", params=params, dt=5e-4, t_end=0.05)
    result = run(config, SolverState(0.0, B))
    e0 = result.budget[0]["E_b"]
    e1 = result.budget[-1]["E_b"]
    assert abs(e1 - e0) < 1e-6 * e0


def test_rk4_convergence_order():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=2, amplitude=0.5)
    params = PhysicalParams(nu=0.0, mu=0.01, d_i=0.02, L=1.0)

    def _solve(dt):
        config = SolverConfig(model="EMHD", params=params, dt=dt, t_end=0.02)
        return run(config, SolverState(0.0, B)).final.B.data

    coarse = _solve(2e-3)
    medium = _solve(1e-3)
    fine = _solve(5e-4)
    err_cm = np.max(np.abs(coarse - medium))
    err_mf = np.max(np.abs(medium - fine))
    ratio = err_cm / err_mf
    assert 14.0 < ratio < 18.0


def test_cfl_guard():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=3, amplitude=5.0)
    params = PhysicalParams(nu=0.0, mu=0.0, d_i=0.5, L=1.0)
    config = SolverConfig(model="EMHD", params=params, dt=0.01, t_end=0.1)
    with pytest.raises(StepSizeError):
        run(config, SolverState(0.0, B))


def test_energy_balance_residual_order():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=4, amplitude=0.5)
    params = PhysicalParams(nu=0.0, mu=0.02, d_i=0.02, L=1.0)

    def _residual(dt):
        config = SolverConfig(model="EMHD", params=params, dt=dt, t_end=dt)
        state = SolverState(0.0, B)
        after = step(state, config)
        return abs(energy_balance_residual(state, after, config))

    r_coarse = _residual(2e-3)
    r_fine = _residual(1e-3)
    assert r_coarse / r_fine > 8.0   # at least fourth-order in dt


def test_forced_run_gains_energy_from_forcing():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2], seed=5, amplitude=0.1)
    params = PhysicalParams(nu=0.0, mu=0.0, d_i=0.02, L=1.0)
    config = SolverConfig(model="EMHD", params=params, dt=5e-4, t_end=0.05,
                          forcing=ForcingSpec(shells=(1, 2), amplitude=0.2,
                                              seed=1))
    result = run(config, SolverState(0.0, B))
    assert result.budget[-1]["E_b"] > result.budget[0]["E_b"]
    assert all(np.isfinite(row["forcing_input"]) for row in result.budget)


def test_mhd_model_runs_with_velocity():
    g = GridSpec(16, 1.0)
    B = random_solenoidal(g, -1.0, [1], seed=6, amplitude=0.3)
    u = random_solenoidal(g, -1.0, [1], seed=7, amplitude=0.3)
    params = PhysicalParams(nu=0.01, mu=0.01, d_i=0.0, L=1.0)
    config = SolverConfig(model="MHD", params=params, dt=1e-3, t_end=0.01)
    result = run(config, SolverState(0.0, B, u))
    assert result.final.u is not None
    u_hat = spectral.forward(result.final.u)
    assert spectral.divergence_l2(u_hat) < 1e-10
    # viscous + resistive run loses total energy
    assert (result.budget[-1]["E_b"] + result.budget[-1]["E_u"]
            < result.budget[0]["E_b"] + result.budget[0]["E_u"])


def test_hall_mhd_reduces_to_mhd_at_zero_di():
    g = GridSpec(16, 1.0)
    B = random_solenoidal(g, -1.0, [1], seed=8, amplitude=0.3)
    u = random_solenoidal(g, -1.0, [1], seed=9, amplitude=0.3)
    params = PhysicalParams(nu=0.01, mu=0.01, d_i=0.0, L=1.0)
    out = {}
    for model in ("MHD", "HALL_MHD"):
        config = SolverConfig(model=model, params=params, dt=1e-3, t_end=0.01)
        out[model] = run(config, SolverState(0.0, B.copy(), u.copy()))
    assert np.allclose(out["MHD"].final.B.data, out["HALL_MHD"].final.B.data,
                       atol=1e-14)


def test_invalid_model_rejected():
    params = PhysicalParams(nu=0.0, mu=0.0, d_i=0.0, L=1.0)
    with pytest.raises(ValueError):
        SolverConfig(model="NAVIER", params=params, dt=1e-3, t_end=0.01)
