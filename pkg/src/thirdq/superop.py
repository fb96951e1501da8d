"""Quadratic superoperator form of the generator and per-sector shifts.

In the doubled mode basis b = (a_0, a_1, a'_0, a'_1) the generator takes the
form  L = (b - d) . S (b - d)  plus a sector scalar, with

    S = [[0, -X], [-X^T, Y]],        Y = Y^T,

where X and Y are 2n x 2n blocks assembled from the structure matrices and
the Hamiltonian coefficients, G is the 4n x 2n matrix of couplings linear in
the spin operators, and the shift d solves  2 S d = -G sigma_tilde  in each
spin sector.

Blocks are obtained by normal ordering the expanded generator (primed modes
to the left).  Note two consequences of the right-multiplication maps
reversing operator products: the lower-right block of X carries -i*H (not
its conjugate), and the (a_1, sigma^R) block of G carries +i*conj(Omega)^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularS
from .model import ModelSpec, Sector, StructureMatrices

SINGULAR_EPS = 1e-10


@dataclass(frozen=True)
class QuadraticForm:
    """Matrices X (2n x 2n), Y (2n x 2n), S (4n x 4n), G (4n x 2n).

    ``W`` and ``trace_mn`` are carried along because the sector scalar S0
    needs them; they do not enter the quadratic form itself.
    """

    n: int
    X: np.ndarray
    Y: np.ndarray
    S: np.ndarray
    G: np.ndarray
    W: np.ndarray
    trace_mn: complex

    @property
    def trace_x(self) -> complex:
        return complex(np.trace(self.X))


@dataclass(frozen=True)
class SectorShift:
    """Shift vector d and scalar S0 for one spin sector.

    ``decay_offset`` is the sector's scalar in the normal form of the
    generator, S0 - (tr M - tr N); it vanishes when the jump operators carry
    no spin-dephasing weight in the sector.
    """

    sector: Sector
    d: np.ndarray
    S0: complex
    decay_offset: complex


def build_quadratic_form(sm: StructureMatrices, spec: ModelSpec) -> QuadraticForm:
    """Assemble X, Y, S, G from the structure matrices and H, K, Omega."""
    H, K, Om = spec.H, spec.K, spec.Omega
    M, N, L = sm.M, sm.N, sm.L

    X = 0.5 * np.block([
        [1j * H.conj() - N.conj() + M, -2j * K - L + L.T],
        [2j * K.conj() - L.conj() + L.conj().T, -1j * H - N + M.conj()],
    ])
    Y = 0.5 * np.block([
        [-2j * K.conj() - L.conj() - L.conj().T, 2 * N],
        [2 * N.T, 2j * K - L - L.T],
    ])
    Y = (Y + Y.T) / 2  # exactly symmetric (K is symmetric to tolerance only)

    n2 = 2 * spec.n
    S = np.zeros((2 * n2, 2 * n2), dtype=complex)
    S[:n2, n2:] = -X
    S[n2:, :n2] = -X.T
    S[n2:, n2:] = Y

    OmT = Om.T
    OmcT = Om.conj().T
    E, F = sm.E, sm.F
    G = np.block([
        [F.conj() - E - 1j * OmT, -F.conj() + E + 1j * OmT],
        [-F + E.conj() - 1j * OmcT, F - E.conj() + 1j * OmcT],
        [-F - E.conj() - 1j * OmcT, 2 * F],
        [2 * F.conj(), -F.conj() - E + 1j * OmT],
    ])
    trace_mn = complex(np.trace(M) - np.trace(N))
    return QuadraticForm(n=spec.n, X=X, Y=Y, S=S, G=G, W=sm.W,
                         trace_mn=trace_mn)


def sector_shift(qf: QuadraticForm, sector: Sector) -> SectorShift:
    """Shift vector d = -(1/2) S^-1 G sigma_tilde and scalar S0 for a sector.

    When the sector forcing G sigma_tilde vanishes identically (e.g. no
    boson-spin coupling in the jumps), d = 0 regardless of S, so the solve
    is skipped and a singular S is not an error.

    Raises :class:`SingularS` when a solve is required but cond(S) exceeds
    1/1e-10.
    """
    sig = sector.sigma_tilde()
    sL = np.array(sector.sL, dtype=float)
    sR = np.array(sector.sR, dtype=float)
    g = qf.G @ sig

    if np.abs(g).max() == 0.0:
        d = np.zeros_like(g)
    else:
        svals = np.linalg.svd(qf.S, compute_uv=False)
        if svals[-1] <= SINGULAR_EPS * svals[0]:
            raise SingularS(float(svals[-1]))
        d = -0.5 * np.linalg.solve(qf.S, g)

    # (1/4) sig . G^T S^-1 G sig  ==  -(1/2) (G sig) . d
    quad = -0.5 * np.dot(g, d)
    dephasing = np.dot(sL - sR, qf.W @ sR - qf.W.conj() @ sL)
    S0 = qf.trace_mn + quad - dephasing
    return SectorShift(sector=sector, d=d, S0=complex(S0),
                       decay_offset=complex(S0 - qf.trace_mn))
