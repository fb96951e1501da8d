"""Observable matrices on the full (boson x spin) space.

Spin-component observables are defined for two-level sites in the diagonal
basis fixed by the site's spectrum: with the default spectrum (+1, -1) these
are the standard Pauli matrices.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelError
from .fockspace import FockRep

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def _embed_spin(rep: FockRep, site: int, op2: np.ndarray) -> np.ndarray:
    if len(rep.spin_spectra[site]) != 2:
        raise ModelError(
            f"spin component observables need a two-level site; site {site} "
            f"has {len(rep.spin_spectra[site])} levels"
        )
    out = np.eye(1, dtype=complex)
    for j, spectrum in enumerate(rep.spin_spectra):
        block = op2 if j == site else np.eye(len(spectrum), dtype=complex)
        out = np.kron(out, block)
    return np.kron(np.eye(rep.dim_b, dtype=complex), out)


def sigma_x(rep: FockRep, site: int = 0) -> np.ndarray:
    return _embed_spin(rep, site, _PAULI["x"])


def sigma_y(rep: FockRep, site: int = 0) -> np.ndarray:
    return _embed_spin(rep, site, _PAULI["y"])


def sigma_z(rep: FockRep, site: int = 0) -> np.ndarray:
    return np.kron(np.eye(rep.dim_b, dtype=complex),
                   _embed_full_sigma(rep, site))


def _embed_full_sigma(rep: FockRep, site: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for j, spectrum in enumerate(rep.spin_spectra):
        block = np.diag(np.array(spectrum, dtype=float)) if j == site \
            else np.eye(len(spectrum))
        out = np.kron(out, block)
    return out


def number_op(rep: FockRep, mode: int = 0) -> np.ndarray:
    a = np.asarray(rep.a_ops[mode])
    return np.kron(a.conj().T @ a, np.eye(rep.dim_s, dtype=complex))


def identity(rep: FockRep) -> np.ndarray:
    return np.eye(rep.dim_b * rep.dim_s, dtype=complex)


NAMED = {
    "sx": sigma_x,
    "sy": sigma_y,
    "sz": sigma_z,
    "number": number_op,
    "identity": identity,
}


def by_name(name: str):
    """Observable builder (rep -> matrix) for a CLI name."""
    try:
        return NAMED[name]
    except KeyError:
        raise ModelError(
            f"unknown observable {name!r}; choose from {sorted(NAMED)}"
        ) from None
