"""Rapidity spectrum, normal-mode transformation and Lyapunov solve.

The 2n x 2n matrix X is diagonalized as X = P diag(beta) P^-1; the
eigenvalues beta_r ("rapidities") set the decay ladder

    lambda_m = -2 sum_r m_r beta_r,

and the matrix Z solves the continuous Lyapunov equation X^T Z + Z X = Y.
Stability means Re(beta_r) >= 0 for every r; zero real parts are admitted
(marginal, persistently oscillating directions).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_sylvester

from .errors import DefectiveX, LyapunovUnsolvable
from .superop import QuadraticForm

log = logging.getLogger(__name__)

STABILITY_TOL = 1e-10
RESONANCE_TOL = 1e-10
DEFECTIVE_COND = 1e10


@dataclass(frozen=True)
class SpectralData:
    """Rapidities, eigenvector transformation and Lyapunov solution."""

    betas: np.ndarray
    P: np.ndarray
    Pinv: np.ndarray
    Z: np.ndarray
    stable: bool

    @property
    def marginal(self) -> bool:
        """True when some rapidity sits on the imaginary axis."""
        return bool(np.any(np.abs(self.betas.real) <= STABILITY_TOL))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Unit-normalize columns and make the first nonzero component real-positive."""
    out = np.array(vecs, dtype=complex)
    for i in range(out.shape[1]):
        v = out[:, i]
        norm = np.linalg.norm(v)
        if norm > 0:
            v = v / norm
        mags = np.abs(v)
        nz = np.nonzero(mags > 1e-12 * mags.max())[0]
        if nz.size:
            pivot = v[nz[0]]
            v = v * (pivot.conj() / abs(pivot))
        out[:, i] = v
    return out


def _sort_key(beta: complex, vec: np.ndarray):
    # descending real part, then descending imaginary part, then a
    # deterministic descending lexicographic tie-break on the phase-fixed
    # eigenvector (keeps identity eigenvectors in natural order)
    return (
        -round(beta.real, 12),
        -round(beta.imag, 12),
        tuple(-np.round(vec.real, 10)),
        tuple(-np.round(vec.imag, 10)),
    )


def diagonalize_X(qf: QuadraticForm | np.ndarray):
    """Eigendecomposition of X with a deterministic ordering.

    Returns (betas, P, Pinv) with X = P diag(betas) P^-1, betas sorted by
    descending real part then descending imaginary part, eigenvectors
    unit-norm and phase-fixed.  An exactly diagonal X short-circuits to a
    permutation P so that reference models reproduce P = I exactly.

    Raises :class:`DefectiveX` when cond(P) exceeds 1e10.
    """
    X = qf.X if isinstance(qf, QuadraticForm) else np.asarray(qf, dtype=complex)
    dim = X.shape[0]

    if not np.any(X - np.diag(np.diagonal(X))):
        betas = np.diagonal(X).astype(complex)
        vecs = np.eye(dim, dtype=complex)
    else:
        betas, vecs = np.linalg.eig(X)
        vecs = _fix_phases(vecs)

    order = sorted(range(dim), key=lambda i: _sort_key(betas[i], vecs[:, i]))
    betas = betas[order]
    P = vecs[:, order]

    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > DEFECTIVE_COND:
        raise DefectiveX(float(cond))
    Pinv = np.linalg.inv(P)
    return betas, P, Pinv


def solve_lyapunov(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Solve X^T Z + Z X = Y (Bartels-Stewart via the Sylvester solver).

    A vanishing Y short-circuits to Z = 0, which keeps models with a
    resonant but unforced spectrum (e.g. the empty model, X = 0) usable.
    The result is symmetrized when Y is symmetric; the symmetrization
    deviation is logged.

    Raises :class:`LyapunovUnsolvable` on a resonant pair beta_r + beta_s ~ 0.
    """
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if not np.any(Y):
        return np.zeros_like(Y)

    betas = np.linalg.eigvals(X)
    sums = betas[:, None] + betas[None, :]
    r, s = np.unravel_index(np.argmin(np.abs(sums)), sums.shape)
    if abs(sums[r, s]) < RESONANCE_TOL:
        raise LyapunovUnsolvable((int(r), int(s)), complex(sums[r, s]))

    Z = solve_sylvester(X.T, X, Y)
    y_scale = np.abs(Y).max()
    if np.abs(Y - Y.T).max() <= 1e-12 * max(y_scale, 1.0):
        dev = np.abs(Z - Z.T).max()
        if dev > 0:
            log.debug("Lyapunov solution symmetrized, deviation %.3e", dev)
        Z = (Z + Z.T) / 2
    return Z


def assert_stability(betas: np.ndarray) -> bool:
    """True iff every rapidity has Re(beta) >= -1e-10."""
    return bool(np.min(np.asarray(betas).real) >= -STABILITY_TOL)


def mode_eigenvalue(betas: np.ndarray, m) -> complex:
    """Decay-ladder eigenvalue lambda_m = -2 sum_r m_r beta_r."""
    betas = np.asarray(betas)
    m = np.asarray(m)
    if m.shape != betas.shape:
        raise ValueError(
            f"multi-index length {m.shape} does not match {betas.shape}"
        )
    if np.any(m < 0) or not np.issubdtype(m.dtype, np.integer):
        raise ValueError("multi-index entries must be non-negative integers")
    return complex(-2.0 * np.dot(m, betas))


def build_spectral_data(qf: QuadraticForm) -> SpectralData:
    """Diagonalize X and solve the Lyapunov equation in one step."""
    betas, P, Pinv = diagonalize_X(qf)
    Z = solve_lyapunov(qf.X, qf.Y)
    return SpectralData(betas=betas, P=P, Pinv=Pinv, Z=Z,
                        stable=assert_stability(betas))
