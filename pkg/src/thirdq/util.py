"""Small shared helpers: vectorization maps, interior masks, parallelism, JSON.

Vectorization convention (used by every module): column stacking, so that
``vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)``.  A matrix ``rho`` is flattened
with ``rho.reshape(-1, order="F")`` and restored with the matching reshape.
Tensor factors are ordered (boson) x (spin) throughout.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sp

THREADS_ENV = "THIRDQ_THREADS"


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if dim is None:
        dim = round(len(v) ** 0.5)
    return v.reshape((dim, dim), order="F")


def lmul(a) -> sp.csr_matrix:
    """Superoperator for left multiplication: rho -> a @ rho."""
    a = sp.csr_matrix(a)
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def rmul(b) -> sp.csr_matrix:
    """Superoperator for right multiplication: rho -> rho @ b."""
    b = sp.csr_matrix(b)
    return sp.kron(b.T, sp.identity(b.shape[0], format="csr"), format="csr")


def boson_occupations(cutoff: int, n_modes: int) -> np.ndarray:
    """Per-mode occupation numbers of each boson basis state.

    Returns an (cutoff**n_modes, n_modes) integer array; mode 0 is the
    slowest-varying tensor factor.
    """
    dim = cutoff**n_modes
    occ = np.empty((dim, n_modes), dtype=int)
    idx = np.arange(dim)
    for j in range(n_modes - 1, -1, -1):
        occ[:, j] = idx % cutoff
        idx = idx // cutoff
    return occ


def interior_mask_vec(cutoff: int, n_modes: int, max_occ: int,
                      dim_s: int = 1) -> np.ndarray:
    """Boolean mask over the vectorized operator space.

    True for basis operators |row><col| whose boson occupations on both the
    row and the column index are all <= max_occ.  ``dim_s`` extends the mask
    over a trailing spin factor (all spin states admitted).
    """
    occ = boson_occupations(cutoff, n_modes)
    ok_b = (occ <= max_occ).all(axis=1)
    ok = np.repeat(ok_b, dim_s) if dim_s > 1 else ok_b
    # column-stacking: vec index = col * dim + row
    return np.logical_and.outer(ok, ok).reshape(-1, order="F")


def thread_count() -> int:
    """Worker cap from the THIRDQ_THREADS environment variable (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order; threads per THIRDQ_THREADS."""
    items = list(items)
    workers = min(thread_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def complex_to_pairs(a: np.ndarray) -> list:
    """Encode a complex array as nested lists of [re, im] pairs."""
    a = np.asarray(a, dtype=complex)
    stacked = np.stack([a.real, a.imag], axis=-1)
    return stacked.tolist()


def pairs_to_complex(data, shape: tuple | None = None) -> np.ndarray:
    """Decode nested [re, im] pairs into a complex array."""
    a = np.asarray(data, dtype=float)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ValueError("expected [re, im] pairs in the innermost dimension")
    out = a[..., 0] + 1j * a[..., 1]
    if shape is not None and out.shape != tuple(shape):
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    return out


def format_float(x: float) -> str:
    """Deterministic shortest round-trip formatting for CSV output."""
    return repr(float(x))
