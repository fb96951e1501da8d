"""Finite-matrix representation on a truncated Fock space tensored with spins.

Conventions (used everywhere):

* vectorization is column-stacking, vec(A rho B) = kron(B.T, A) vec(rho);
* tensor order is (boson factor) x (spin factor);
* "interior" basis operators |row><col| have every boson occupation at most
  cutoff - 3 on both indices.  Truncation necessarily breaks the canonical
  algebra at the edge; quadratic identities are exact on interior columns,
  so all commutation/equivalence checks restrict to the interior.

The doubled mode superoperators are

    a_{0,j} = a_j (left),        a'_{0,j} = adag_j (left) - adag_j (right),
    a_{1,j} = adag_j (right),    a'_{1,j} = a_j (right)  - a_j (left),

which satisfy [a_{nu,j}, a'_{mu,k}] = delta delta on the interior.  Within a
spin sector the spin operators reduce to scalars and everything closes on
the boson block alone; the per-sector normal modes are

    zeta   = P^T ((a - s) - Z (a' - s')),      zeta' = P^-1 (a' - s'),

with (s, s') the halves of the sector shift d.  The transpose on P (relative
to the eigendecomposition X = P diag(beta) P^-1) is what makes the zeta pairs
almost-canonical; it is verified against the dense generator in the tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from math import sqrt

import numpy as np
import scipy.sparse as sp

from .errors import (
    AmbiguousKernelWarning,
    ModelError,
    NoKernel,
    TruncationOverflow,
    UnstableSpectrum,
)
from .model import ModelSpec, Sector, build_structure_matrices, enumerate_sectors
from .spectral import SpectralData, build_spectral_data
from .superop import SectorShift, build_quadratic_form, sector_shift
from .util import boson_occupations, interior_mask_vec, lmul, parallel_map, rmul

NULL_SPACE_RTOL = 1e-8
SUPPORT_RTOL = 1e-12
INTERIOR_MARGIN = 3  # occupations <= cutoff - 3 count as interior


def annihilation(cutoff: int) -> np.ndarray:
    """Single-mode annihilation matrix on Fock states |0>..|cutoff-1>."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)


@dataclass(frozen=True)
class FockRep:
    """Truncated matrices of the mode and spin operators."""

    cutoff: int
    n: int
    a_ops: tuple          # n boson-space matrices
    sigma_ops: tuple      # n diagonal spin-space matrices
    dim_b: int
    dim_s: int
    spin_spectra: tuple

    def full_a(self, j: int) -> sp.csr_matrix:
        return sp.kron(sp.csr_matrix(self.a_ops[j]),
                       sp.identity(self.dim_s, format="csr"), format="csr")

    def full_sigma(self, j: int) -> sp.csr_matrix:
        return sp.kron(sp.identity(self.dim_b, format="csr"),
                       sp.csr_matrix(self.sigma_ops[j]), format="csr")

    def spin_index(self, labels) -> int:
        """Position of a joint spin eigenvalue assignment in the spin basis."""
        idx = 0
        for j, spectrum in enumerate(self.spin_spectra):
            matches = [p for p, v in enumerate(spectrum)
                       if abs(v - labels[j]) <= 1e-12]
            if not matches:
                raise ModelError(
                    f"eigenvalue {labels[j]} not in spectrum of sigma_{j}"
                )
            idx = idx * len(spectrum) + matches[0]
        return idx


def build_fock_rep(spec: ModelSpec, cutoff: int) -> FockRep:
    """Truncated operator matrices for a model (cutoff >= 2)."""
    if cutoff < 2:
        raise ModelError(f"cutoff must be >= 2, got {cutoff}")
    n = spec.n
    a1 = annihilation(cutoff)
    a_ops = []
    for j in range(n):
        op = np.eye(1)
        for k in range(n):
            op = np.kron(op, a1 if k == j else np.eye(cutoff))
        a_ops.append(op)
    sigma_ops = []
    for j, spectrum in enumerate(spec.spin_spectra):
        op = np.eye(1)
        for k, other in enumerate(spec.spin_spectra):
            block = np.diag(np.array(spectrum, dtype=float)) if k == j \
                else np.eye(len(other))
            op = np.kron(op, block)
        sigma_ops.append(op)
    dim_s = spec.dim_s
    return FockRep(cutoff=cutoff, n=n, a_ops=tuple(a_ops),
                   sigma_ops=tuple(sigma_ops), dim_b=cutoff**n,
                   dim_s=dim_s, spin_spectra=spec.spin_spectra)


@dataclass(frozen=True)
class SuperRep:
    """Doubled-mode superoperators on the vectorized truncated space.

    ``ahat``/``ahat_prime`` act on the full (boson x spin) vectorized space;
    the ``boson_*`` variants are their single spin-sector blocks, used for
    all per-sector work.
    """

    rep: FockRep
    vec_dim: int
    ahat: tuple
    ahat_prime: tuple
    sigmaL: tuple
    sigmaR: tuple
    boson_ahat: tuple
    boson_ahat_prime: tuple


def build_super_basis(rep: FockRep) -> SuperRep:
    """Left/right multiplication maps assembled into the doubled-mode basis."""
    n = rep.n
    ahat, ahat_prime = [], []
    ba, bap = [], []
    for j in range(n):                      # nu = 0 block
        af = rep.full_a(j)
        ahat.append(lmul(af))
        ahat_prime.append(lmul(af.conj().T) - rmul(af.conj().T))
        ab = sp.csr_matrix(rep.a_ops[j])
        ba.append(lmul(ab))
        bap.append(lmul(ab.conj().T) - rmul(ab.conj().T))
    for j in range(n):                      # nu = 1 block
        af = rep.full_a(j)
        ahat.append(rmul(af.conj().T))
        ahat_prime.append(rmul(af) - lmul(af))
        ab = sp.csr_matrix(rep.a_ops[j])
        ba.append(rmul(ab.conj().T))
        bap.append(rmul(ab) - lmul(ab))
    sigmaL = tuple(lmul(rep.full_sigma(j)) for j in range(n))
    sigmaR = tuple(rmul(rep.full_sigma(j)) for j in range(n))
    dim = rep.dim_b * rep.dim_s
    return SuperRep(rep=rep, vec_dim=dim * dim, ahat=tuple(ahat),
                    ahat_prime=tuple(ahat_prime), sigmaL=sigmaL,
                    sigmaR=sigmaR, boson_ahat=tuple(ba),
                    boson_ahat_prime=tuple(bap))


def interior_mask(rep: FockRep, max_occ: int | None = None,
                  with_spin: bool = False) -> np.ndarray:
    """Interior mask over the (boson-block or full) vectorized space."""
    if max_occ is None:
        max_occ = rep.cutoff - INTERIOR_MARGIN
    return interior_mask_vec(rep.cutoff, rep.n, max_occ,
                             dim_s=rep.dim_s if with_spin else 1)


def build_dense_liouvillian(spec: ModelSpec, rep: FockRep) -> sp.csr_matrix:
    """Explicit generator matrix assembled directly from H and the L_mu.

    Uses the rate convention  d rho/dt = -i[H, rho]
    + sum_mu (2 L rho L' - {L'L, rho})  and returns a sparse CSR matrix on
    the vectorized space.
    """
    n = spec.n
    dim = rep.dim_b * rep.dim_s
    a_full = [rep.full_a(j) for j in range(n)]
    adag_full = [op.conj().T.tocsr() for op in a_full]
    sig_full = [rep.full_sigma(j) for j in range(n)]

    Hf = sp.csr_matrix((dim, dim), dtype=complex)
    for j in range(n):
        for k in range(n):
            if spec.H[j, k] != 0:
                Hf = Hf + spec.H[j, k] * (adag_full[j] @ a_full[k])
            if spec.K[j, k] != 0:
                Hf = Hf + spec.K[j, k] * (a_full[j] @ a_full[k])
                Hf = Hf + spec.K[j, k].conjugate() * (adag_full[j] @ adag_full[k])
            if spec.Omega[j, k] != 0:
                Hf = Hf + spec.Omega[j, k] * (sig_full[j] @ a_full[k])
                Hf = Hf + spec.Omega[j, k].conjugate() * (adag_full[k] @ sig_full[j])

    Lhat = -1j * lmul(Hf) + 1j * rmul(Hf)
    for jump in spec.jumps:
        Lf = sp.csr_matrix((dim, dim), dtype=complex)
        for j in range(n):
            if jump.l[j] != 0:
                Lf = Lf + jump.l[j] * a_full[j]
            if jump.k[j] != 0:
                Lf = Lf + jump.k[j] * adag_full[j]
            if jump.w[j] != 0:
                Lf = Lf + jump.w[j] * sig_full[j]
        Ldag = Lf.conj().T.tocsr()
        LdL = (Ldag @ Lf).tocsr()
        Lhat = Lhat + 2 * sp.kron(Lf.conj(), Lf, format="csr") \
            - lmul(LdL) - rmul(LdL)
    return Lhat.tocsr()


@dataclass(frozen=True)
class SectorBasis:
    """Normal modes and steady state restricted to one spin sector."""

    sector: Sector
    zeta: tuple
    zeta_prime: tuple
    ness_vec: np.ndarray | None
    betas: np.ndarray
    shift: SectorShift
    cutoff: int
    n_modes: int

    @property
    def dim_b(self) -> int:
        """Boson Hilbert-space dimension of the sector block."""
        return self.cutoff ** self.n_modes

    @property
    def dim(self) -> int:
        """Vectorized dimension the zeta matrices act on."""
        return self.dim_b ** 2


def build_zeta(sup: SuperRep, sd: SpectralData, shift: SectorShift) -> SectorBasis:
    """Sector normal modes zeta, zeta' as dense boson-block matrices."""
    if not sd.stable:
        raise UnstableSpectrum(
            f"min Re(beta) = {sd.betas.real.min():.3e} < 0; "
            f"steady-state construction refused"
        )
    rep = sup.rep
    n2 = 2 * rep.n
    d = shift.d
    dim = rep.dim_b**2
    eye = np.eye(dim, dtype=complex)
    xs = [sup.boson_ahat[k].toarray() - d[k] * eye for k in range(n2)]
    xps = [sup.boson_ahat_prime[k].toarray() - d[n2 + k] * eye
           for k in range(n2)]

    P, Pinv, Z = sd.P, sd.Pinv, sd.Z
    zeta, zeta_prime = [], []
    for r in range(n2):
        zr = np.zeros((dim, dim), dtype=complex)
        zpr = np.zeros((dim, dim), dtype=complex)
        for k in range(n2):
            mix = xs[k].copy()
            for ll in range(n2):
                if Z[k, ll] != 0:
                    mix -= Z[k, ll] * xps[ll]
            zr += P[k, r] * mix          # P^T row r
            zpr += Pinv[r, k] * xps[k]
        zeta.append(zr)
        zeta_prime.append(zpr)
    return SectorBasis(sector=shift.sector, zeta=tuple(zeta),
                       zeta_prime=tuple(zeta_prime), ness_vec=None,
                       betas=sd.betas.copy(), shift=shift,
                       cutoff=rep.cutoff, n_modes=rep.n)


def find_ness(basis: SectorBasis, rtol: float = NULL_SPACE_RTOL) -> np.ndarray:
    """Common kernel vector of the lowering modes on the interior subspace.

    Returns the unit-norm kernel vector, phase-fixed so its largest-magnitude
    component is real positive.  Raises :class:`NoKernel` when no singular
    value falls below ``rtol`` (default 1e-8) of the largest; emits
    :class:`AmbiguousKernelWarning` when the kernel is degenerate.  A looser
    ``rtol`` admits steady states whose tails brush the truncation edge, at
    the cost of the corresponding truncation error.
    """
    mask = interior_mask_vec(basis.cutoff, basis.n_modes,
                             basis.cutoff - INTERIOR_MARGIN)
    cols = np.nonzero(mask)[0]
    stacked = np.vstack([z[:, cols] for z in basis.zeta])
    _, svals, vh = np.linalg.svd(stacked, full_matrices=False)
    tol = rtol * svals[0] if svals[0] > 0 else np.inf
    if svals[-1] >= tol:
        raise NoKernel(float(svals[-1]))
    if len(svals) > 1 and svals[-2] < tol:
        warnings.warn(
            f"steady-state kernel has dimension >= 2 "
            f"(second singular value {svals[-2]:.3e}); using the first vector",
            AmbiguousKernelWarning,
        )
    v = np.zeros(basis.dim, dtype=complex)
    v[cols] = vh[-1].conj()
    pivot = v[np.argmax(np.abs(v))]
    v = v * (pivot.conj() / abs(pivot))
    v /= np.linalg.norm(v)
    return v


def ness_support(basis: SectorBasis) -> int:
    """Largest boson occupation carrying steady-state weight above 1e-12."""
    if basis.ness_vec is None:
        raise ModelError("steady state not attached to this basis")
    v = np.abs(basis.ness_vec)
    occ = boson_occupations(basis.cutoff, basis.n_modes).max(axis=1)
    dim_b = basis.dim_b
    rows = np.arange(basis.dim) % dim_b
    colsi = np.arange(basis.dim) // dim_b
    signif = v > SUPPORT_RTOL * v.max()
    both = np.maximum(occ[rows[signif]], occ[colsi[signif]])
    return int(both.max()) if both.size else 0


def build_decay_mode(basis: SectorBasis, m, *,
                     check_truncation: bool = True) -> np.ndarray:
    """Decay mode Theta_m = prod_r (zeta'_r)^{m_r} / sqrt(m_r!) |NESS>.

    Factors are applied in index order r = 1..2n (the rightmost factor acts
    first).  With ``check_truncation`` the mode is refused when it would leak
    outside the interior subspace; the coefficient fit disables the check
    because its least-squares solve tolerates (and reports) edge-truncated
    modes.
    """
    if basis.ness_vec is None:
        raise ModelError("steady state not attached to this basis")
    m = tuple(int(x) for x in m)
    n2 = 2 * basis.n_modes
    if len(m) != n2 or any(x < 0 for x in m):
        raise ModelError(f"multi-index must be {n2} non-negative integers")
    if check_truncation:
        total = sum(m)
        if total + ness_support(basis) >= basis.cutoff - 2:
            raise TruncationOverflow(
                f"mode {m} would leak outside the interior "
                f"(|m| = {total}, steady-state support "
                f"{ness_support(basis)}, cutoff {basis.cutoff})"
            )
    v = basis.ness_vec.copy()
    for r in range(n2 - 1, -1, -1):
        for step in range(1, m[r] + 1):
            v = (basis.zeta_prime[r] @ v) / sqrt(step)
    return v


def build_decay_modes(basis: SectorBasis, indices) -> np.ndarray:
    """Decay modes for many multi-indices as columns of one matrix.

    Modes are built incrementally from the steady state, one raising step at
    a time; predecessors missing from ``indices`` are filled in internally.
    """
    wanted = [tuple(int(x) for x in m) for m in indices]
    zero = (0,) * (2 * basis.n_modes)

    def pred(m):
        j = next(i for i, x in enumerate(m) if x > 0)
        return j, m[:j] + (m[j] - 1,) + m[j + 1:]

    need = set(wanted) | {zero}
    stack = list(need)
    while stack:
        m = stack.pop()
        if m == zero:
            continue
        _, prev = pred(m)
        if prev not in need:
            need.add(prev)
            stack.append(prev)

    cache = {zero: basis.ness_vec}
    for m in sorted(need):
        if m == zero:
            continue
        j, prev = pred(m)
        cache[m] = (basis.zeta_prime[j] @ cache[prev]) / sqrt(m[j])
    return np.column_stack([cache[m] for m in wanted])


def build_normal_form_liouvillian(basis: SectorBasis, sd: SpectralData,
                                  shift: SectorShift) -> np.ndarray:
    """Sector generator in normal form, -2 sum_r beta_r zeta'_r zeta_r
    minus the sector scalar.

    The scalar is ``shift.decay_offset`` = S0 - (tr M - tr N): the reordering
    constant tr X cancels the Gram trace in S0, so sectors without
    spin-dephasing weight (offset 0) hold a true steady state.
    """
    dim = basis.dim
    out = np.zeros((dim, dim), dtype=complex)
    for r, beta in enumerate(sd.betas):
        if beta != 0:
            out -= 2 * beta * (basis.zeta_prime[r] @ basis.zeta[r])
    out -= shift.decay_offset * np.eye(dim, dtype=complex)
    return out


def sector_vec_indices(rep: FockRep, sector: Sector) -> np.ndarray:
    """Full-space vectorized indices of one spin sector's boson block.

    Entry ``b2 * dim_b + b1`` of the result is the full-space vec index of
    the basis operator |b1, sL><b2, sR|, so fancy indexing with this array
    maps full-space superoperators onto their sector boson blocks.
    """
    iL = rep.spin_index(sector.sL)
    iR = rep.spin_index(sector.sR)
    b = np.arange(rep.dim_b)
    rows = b * rep.dim_s + iL                 # full-space row (ket) indices
    cols = b * rep.dim_s + iR                 # full-space column (bra) indices
    D = rep.dim_b * rep.dim_s
    return (np.repeat(cols, rep.dim_b) * D + np.tile(rows, rep.dim_b))


def sector_block(mat, rep: FockRep, sector: Sector) -> np.ndarray:
    """Extract one sector's dense boson block from a full-space superoperator."""
    idx = sector_vec_indices(rep, sector)
    if sp.issparse(mat):
        return np.asarray(mat.tocsr()[idx][:, idx].todense())
    return np.asarray(mat)[np.ix_(idx, idx)]


def build_sector_bases(spec: ModelSpec, cutoff: int):
    """Full per-sector pipeline: shifts, normal modes and steady states.

    Returns ``(rep, sd, bases)`` with ``bases`` a dict keyed by
    :class:`Sector` in enumeration order.  Sectors are processed in parallel
    when THIRDQ_THREADS allows.
    """
    sm = build_structure_matrices(spec)
    qf = build_quadratic_form(sm, spec)
    sd = build_spectral_data(qf)
    if not sd.stable:
        raise UnstableSpectrum(
            f"min Re(beta) = {sd.betas.real.min():.3e} < 0"
        )
    rep = build_fock_rep(spec, cutoff)
    sup = build_super_basis(rep)
    sectors = enumerate_sectors(spec)

    def one(sector):
        shift = sector_shift(qf, sector)
        basis = build_zeta(sup, sd, shift)
        return replace(basis, ness_vec=find_ness(basis))

    bases = parallel_map(one, sectors)
    return rep, sd, dict(zip(sectors, bases))
