"""Brute-force integrator of the master equation on the truncated space.

This is the package's ground truth: it never touches the spectral machinery,
only the explicit generator matrix, and integrates  d rho / dt = L rho
either by matrix-exponential stepping or with an adaptive Runge-Kutta
scheme.  Defaults (rtol 1e-9, atol 1e-11) keep its error well below the
1e-6 tolerances the spectral route is held to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp as _solve_ivp
from scipy.sparse.linalg import expm_multiply

from .errors import ModelError, StepFailure
from .fockspace import build_dense_liouvillian, build_fock_rep
from .ivp import EvolutionResult, InitialState
from .model import ModelSpec
from .util import vec

METHODS = ("matrix-exponential", "adaptive-RK")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "matrix-exponential"
    rtol: float = 1e-9
    atol: float = 1e-11
    cutoff: int = 30

    def __post_init__(self):
        if self.method not in METHODS:
            raise ModelError(f"method must be one of {METHODS}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ModelError("rtol and atol must be positive")
        if self.cutoff < 2:
            raise ModelError("cutoff must be >= 2")


def integrate_master_equation(spec: ModelSpec, rho0: InitialState, times,
                              cfg: IntegratorConfig | None = None) -> np.ndarray:
    """States rho(t_k) as rows of vectorized matrices.

    ``times`` must be sorted ascending and non-negative; integration always
    starts from t = 0 so the first requested time need not be 0.
    """
    cfg = cfg or IntegratorConfig()
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ModelError("times must be a non-empty 1-d array")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ModelError("times must be sorted ascending from 0")

    rep = build_fock_rep(spec, cfg.cutoff)
    rho = rho0.full_matrix(rep)
    Lhat = build_dense_liouvillian(spec, rep)
    v0 = vec(rho).astype(complex)

    if cfg.method == "matrix-exponential":
        out = np.empty((times.size, v0.size), dtype=complex)
        v = v0
        t_prev = 0.0
        for i, t in enumerate(times):
            dt = t - t_prev
            if dt > 0:
                v = expm_multiply(Lhat * dt, v)
                t_prev = t
            out[i] = v
        return out

    sol = _solve_ivp(
        lambda _t, y: Lhat @ y,
        t_span=(0.0, float(times[-1]) if times[-1] > 0 else 1e-12),
        y0=v0,
        t_eval=times,
        method="DOP853",
        rtol=cfg.rtol,
        atol=cfg.atol,
    )
    if not sol.success:
        raise StepFailure(float(sol.t[-1]) if sol.t.size else 0.0)
    return sol.y.T.copy()


def expectation(state, observable) -> complex:
    """Tr(A rho) for a vectorized or matrix-valued state."""
    A = np.asarray(observable, dtype=complex)
    state = np.asarray(state)
    if state.ndim == 2:
        if state.shape[0] != A.shape[1]:
            raise ModelError("observable and state dimensions do not match")
        return complex(np.trace(A @ state))
    dim = A.shape[0]
    if state.size != dim * dim:
        raise ModelError("observable and state dimensions do not match")
    # column stacking: vec index k*dim + j holds rho[j, k]; Tr(A rho) weights
    # component rho[j, k] by A[k, j], which is exactly A.ravel(order="C")
    return complex(A.ravel(order="C") @ state)


def evolve_observable_oracle(spec: ModelSpec, rho0: InitialState, observable,
                             times, cfg: IntegratorConfig | None = None
                             ) -> EvolutionResult:
    """Observable expectation series along the integrated trajectory.

    ``observable`` may be a full-space matrix or a builder ``rep -> matrix``.
    """
    cfg = cfg or IntegratorConfig()
    if callable(observable):
        observable = observable(build_fock_rep(spec, cfg.cutoff))
    states = integrate_master_equation(spec, rho0, times, cfg)
    w = np.asarray(observable, dtype=complex).ravel(order="C")
    values = states @ w
    return EvolutionResult(times=np.asarray(times, dtype=float),
                           values=values, method="oracle")
