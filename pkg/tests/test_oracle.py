import numpy as np
import pytest

from thirdq import ivp, observables
from thirdq.errors import ModelError
from thirdq.fockspace import build_fock_rep
from thirdq.model import single_spin_boson
from thirdq.oracle import (
    IntegratorConfig,
    evolve_observable_oracle,
    expectation,
    integrate_master_equation,
)
from thirdq.util import unvec


def paper_state():
    return ivp.InitialState.fock(0, spin=ivp.spin_plus_x())


def test_config_validation():
    with pytest.raises(ModelError):
        IntegratorConfig(method="euler")
    with pytest.raises(ModelError):
        IntegratorConfig(rtol=-1.0)
    with pytest.raises(ModelError):
        IntegratorConfig(cutoff=1)


def test_initial_time_returns_exact_state():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 6)
    rho0 = paper_state()
    want = rho0.full_matrix(rep).reshape(-1, order="F")
    for method in ("matrix-exponential", "adaptive-RK"):
        cfg = IntegratorConfig(method=method, cutoff=6)
        states = integrate_master_equation(spec, rho0, [0.0, 0.5], cfg)
        assert np.abs(states[0] - want).max() == 0.0


def test_unsorted_times_rejected():
    spec = single_spin_boson(0.2)
    with pytest.raises(ModelError):
        integrate_master_equation(spec, paper_state(), [1.0, 0.5],
                                  IntegratorConfig(cutoff=4))


def test_pure_damping_occupation_decay():
    spec = single_spin_boson(0.0)
    rho0 = ivp.InitialState.fock(1, spin=ivp.spin_mixed())
    times = np.linspace(0, 2, 9)
    for method, tol in (("matrix-exponential", 1e-9), ("adaptive-RK", 1e-7)):
        cfg = IntegratorConfig(method=method, cutoff=8)
        res = evolve_observable_oracle(spec, rho0, observables.number_op,
                                       times, cfg)
        assert np.abs(res.real_values() - np.exp(-2 * times)).max() < tol


def test_trace_preserved_along_trajectory():
    spec = single_spin_boson(0.2)
    cfg = IntegratorConfig(cutoff=16)
    times = np.linspace(0, 5, 6)
    states = integrate_master_equation(spec, paper_state(), times, cfg)
    rep = build_fock_rep(spec, 16)
    eye = observables.identity(rep)
    for state in states:
        assert abs(expectation(state, eye) - 1.0) < 1e-9


def test_positivity_along_trajectory():
    spec = single_spin_boson(0.2)
    cfg = IntegratorConfig(cutoff=16)
    times = np.linspace(0, 8, 9)
    states = integrate_master_equation(spec, paper_state(), times, cfg)
    for state in states:
        rho = unvec(state)
        evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        assert evals.min() >= -1e-7


def test_expectation_examples():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 6)
    rho = paper_state().full_matrix(rep)
    assert expectation(rho, observables.identity(rep)) == pytest.approx(1.0)
    assert expectation(rho, observables.sigma_x(rep)) == pytest.approx(1.0)
    assert expectation(rho, observables.sigma_z(rep)) == pytest.approx(0.0)
    # vectorized input agrees with the matrix input
    v = rho.reshape(-1, order="F")
    assert expectation(v, observables.sigma_x(rep)) == pytest.approx(1.0)


def test_expectation_dimension_mismatch():
    with pytest.raises(ModelError):
        expectation(np.eye(4), np.eye(6))


def test_methods_cross_check():
    spec = single_spin_boson(0.3)
    times = np.linspace(0, 4, 9)
    vals = {}
    for method in ("matrix-exponential", "adaptive-RK"):
        cfg = IntegratorConfig(method=method, cutoff=12)
        res = evolve_observable_oracle(spec, paper_state(),
                                       observables.sigma_x, times, cfg)
        vals[method] = res.real_values()
    gap = np.abs(vals["matrix-exponential"] - vals["adaptive-RK"]).max()
    assert gap <= 10 * max(1e-9, 1e-11)


def test_cutoff_convergence():
    spec = single_spin_boson(0.2)
    times = np.linspace(0, 6, 7)
    vals = {}
    for cutoff in (20, 30):
        cfg = IntegratorConfig(cutoff=cutoff)
        res = evolve_observable_oracle(spec, paper_state(),
                                       observables.sigma_x, times, cfg)
        vals[cutoff] = res.real_values()
    assert np.abs(vals[20] - vals[30]).max() <= 1e-8
