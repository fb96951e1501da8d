import numpy as np
import pytest

from thirdq.errors import (
    AmbiguousKernelWarning,
    NoKernel,
    TruncationOverflow,
    UnstableSpectrum,
)
from thirdq.fockspace import (
    SectorBasis,
    annihilation,
    build_decay_mode,
    build_decay_modes,
    build_dense_liouvillian,
    build_fock_rep,
    build_normal_form_liouvillian,
    build_super_basis,
    build_zeta,
    find_ness,
    interior_mask,
    sector_block,
)
from thirdq.model import (
    ModelSpec,
    Sector,
    build_structure_matrices,
    enumerate_sectors,
    single_spin_boson,
)
from thirdq.spectral import SpectralData, build_spectral_data, mode_eigenvalue
from thirdq.superop import build_quadratic_form, sector_shift
from thirdq.util import vec

from conftest import analytic_ness, central_identity_mismatch, random_stable_model


def pipeline(spec, cutoff):
    sm = build_structure_matrices(spec)
    qf = build_quadratic_form(sm, spec)
    sd = build_spectral_data(qf)
    rep = build_fock_rep(spec, cutoff)
    sup = build_super_basis(rep)
    return qf, sd, rep, sup


def sector_by_label(spec, sL, sR):
    for sector in enumerate_sectors(spec):
        if sector.sL == (sL,) and sector.sR == (sR,):
            return sector
    raise AssertionError("sector not found")


# ---------------------------------------------------------------------------
# representation basics
# ---------------------------------------------------------------------------

def test_annihilation_matrix_elements():
    a = annihilation(5)
    for k in range(1, 5):
        e = np.zeros(5)
        e[k] = 1.0
        out = a @ e
        assert out[k - 1] == pytest.approx(np.sqrt(k))
    assert not np.any(a @ np.eye(5)[:, :1])  # a|0> = 0


def test_boson_spin_commute_by_construction():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 4)
    af = rep.full_a(0).toarray()
    sf = rep.full_sigma(0).toarray()
    assert np.abs(af @ sf - sf @ af).max() == 0.0


def test_super_basis_left_lowering_action():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 2)
    sup = build_super_basis(rep)
    for s_idx in range(2):
        spin = np.zeros((2, 2))
        spin[s_idx, s_idx] = 1.0
        rho_in = np.kron(np.array([[0, 0], [1, 0]]), spin)   # |1><0| x |s><s|
        rho_out = np.kron(np.array([[1, 0], [0, 0]]), spin)  # |0><0| x |s><s|
        assert np.abs(sup.ahat[0] @ vec(rho_in) - vec(rho_out)).max() < 1e-14


def test_super_basis_prime_annihilates_identity():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 4)
    sup = build_super_basis(rep)
    v = vec(np.eye(rep.dim_b * rep.dim_s, dtype=complex))
    assert np.abs(sup.ahat_prime[0] @ v).max() < 1e-14


def test_almost_canonical_interior_commutators():
    spec = single_spin_boson(0.2)
    rep = build_fock_rep(spec, 12)
    sup = build_super_basis(rep)
    # single application of a creation operator: occupations < cutoff - 1
    mask = interior_mask(rep, max_occ=rep.cutoff - 2, with_spin=True)
    idx = np.nonzero(mask)[0]
    eye = np.eye(sup.vec_dim)
    for nu in range(2):
        for mu in range(2):
            want = eye if nu == mu else 0 * eye
            comm = (sup.ahat[nu] @ sup.ahat_prime[mu]
                    - sup.ahat_prime[mu] @ sup.ahat[nu]).toarray()
            gap = np.abs((comm - want)[np.ix_(idx, idx)]).max()
            assert gap <= 1e-10
    for nu in range(2):
        for mu in range(2):
            c1 = (sup.ahat[nu] @ sup.ahat[mu]
                  - sup.ahat[mu] @ sup.ahat[nu]).toarray()
            c2 = (sup.ahat_prime[nu] @ sup.ahat_prime[mu]
                  - sup.ahat_prime[mu] @ sup.ahat_prime[nu]).toarray()
            assert np.abs(c1[np.ix_(idx, idx)]).max() <= 1e-10
            assert np.abs(c2[np.ix_(idx, idx)]).max() <= 1e-10


# ---------------------------------------------------------------------------
# sector normal modes
# ---------------------------------------------------------------------------

def test_zeta_example1_is_shifted_annihilation():
    z1 = 0.2
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 8)
    for sector in enumerate_sectors(spec):
        sh = sector_shift(qf, sector)
        basis = build_zeta(sup, sd, sh)
        a_left = sup.boson_ahat[0].toarray()
        want = a_left + z1 * sector.sL[0] * np.eye(64)
        assert np.abs(basis.zeta[0] - want).max() < 1e-13


def test_zeta_zero_model_unshifted():
    spec = ModelSpec.of(n=1)
    qf, sd, rep, sup = pipeline(spec, 6)
    sector = enumerate_sectors(spec)[0]
    sh = sector_shift(qf, sector)
    basis = build_zeta(sup, sd, sh)
    for r in range(2):
        assert np.abs(basis.zeta[r]
                      - sup.boson_ahat[r].toarray()).max() == 0.0
        assert np.abs(basis.zeta_prime[r]
                      - sup.boson_ahat_prime[r].toarray()).max() == 0.0


def test_zeta_interior_almost_canonical():
    rng = np.random.default_rng(41)
    spec = random_stable_model(rng)
    qf, sd, rep, sup = pipeline(spec, 12)
    sector = enumerate_sectors(spec)[1]
    basis = build_zeta(sup, sd, sector_shift(qf, sector))
    idx = np.nonzero(interior_mask(rep))[0]
    eye = np.eye(basis.dim)
    for r in range(2):
        for s in range(2):
            comm = (basis.zeta[r] @ basis.zeta_prime[s]
                    - basis.zeta_prime[s] @ basis.zeta[r])
            want = eye if r == s else 0 * eye
            assert np.abs((comm - want)[np.ix_(idx, idx)]).max() <= 1e-8


def test_build_zeta_refuses_unstable():
    spec = single_spin_boson(0.2)
    qf, sd, rep, sup = pipeline(spec, 4)
    bad = SpectralData(betas=np.array([-0.1, 0.5]), P=sd.P, Pinv=sd.Pinv,
                       Z=sd.Z, stable=False)
    sh = sector_shift(qf, enumerate_sectors(spec)[0])
    with pytest.raises(UnstableSpectrum):
        build_zeta(sup, bad, sh)


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

def test_ness_is_coherent_outer_product():
    z1 = 0.2
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 20)
    for sector in enumerate_sectors(spec):
        basis = build_zeta(sup, sd, sector_shift(qf, sector))
        v = find_ness(basis)
        fid = abs(np.vdot(analytic_ness(20, z1, sector), v)) ** 2
        assert fid >= 1 - 1e-10


def test_ness_zero_model_is_vacuum():
    spec = ModelSpec.of(n=1, jumps=[([1.0], [0.0], [0.0])])
    qf, sd, rep, sup = pipeline(spec, 8)
    basis = build_zeta(sup, sd, sector_shift(qf, enumerate_sectors(spec)[0]))
    v = find_ness(basis)
    want = np.zeros(64)
    want[0] = 1.0  # vec(|0><0|)
    assert np.abs(v - want).max() < 1e-12


def test_ness_scale_convention():
    z1 = 0.2
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 20)
    basis = build_zeta(sup, sd,
                       sector_shift(qf, sector_by_label(spec, 1.0, -1.0)))
    v = find_ness(basis)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    top = v[np.argmax(np.abs(v))]
    assert top.imag == pytest.approx(0.0, abs=1e-12)
    assert top.real == pytest.approx(np.exp(-z1**2), abs=1e-10)


def test_no_kernel_raises():
    basis = SectorBasis(
        sector=Sector(sL=(1.0,), sR=(1.0,)),
        zeta=(np.eye(16, dtype=complex),),
        zeta_prime=(np.eye(16, dtype=complex),),
        ness_vec=None, betas=np.array([0.5]), shift=None, cutoff=4, n_modes=1,
    )
    with pytest.raises(NoKernel):
        find_ness(basis)


def test_degenerate_kernel_warns():
    z = np.diag(np.arange(16, dtype=complex))
    z[1, 1] = 0.0  # two zero diagonal entries -> two-dimensional kernel
    basis = SectorBasis(
        sector=Sector(sL=(1.0,), sR=(1.0,)),
        zeta=(z,), zeta_prime=(z,),
        ness_vec=None, betas=np.array([0.5]), shift=None, cutoff=4, n_modes=1,
    )
    with pytest.warns(AmbiguousKernelWarning):
        find_ness(basis)


def test_ness_fixed_point_of_dense_generator():
    z1 = 0.2
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 16)
    Ld = build_dense_liouvillian(spec, rep)
    idx = np.nonzero(interior_mask(rep))[0]
    for sector in enumerate_sectors(spec):
        basis = build_zeta(sup, sd, sector_shift(qf, sector))
        v = find_ness(basis)
        resid = (sector_block(Ld, rep, sector) @ v)[idx]
        assert np.linalg.norm(resid) <= 1e-7 * np.linalg.norm(v)


def test_truncation_convergence_of_ness_fidelity():
    # a loose kernel tolerance admits the low-cutoff steady states whose
    # tails brush the truncation edge, where convergence is measurable
    z1 = 1.0
    spec = single_spin_boson(z1)
    sector_lab = (1.0, -1.0)
    infidelities = []
    for cutoff in (8, 10, 12, 14, 16, 20):
        qf, sd, rep, sup = pipeline(spec, cutoff)
        sector = sector_by_label(spec, *sector_lab)
        basis = build_zeta(sup, sd, sector_shift(qf, sector))
        v = find_ness(basis, rtol=0.1)
        fid = abs(np.vdot(analytic_ness(cutoff, z1, sector), v)) ** 2
        infidelities.append(1 - fid)
    assert all(b <= a + 1e-13 for a, b in zip(infidelities, infidelities[1:]))
    assert infidelities[0] > 1e-4 and infidelities[-1] < 1e-10


# ---------------------------------------------------------------------------
# decay modes
# ---------------------------------------------------------------------------

def test_decay_mode_zero_index_is_ness(ex1_bases30):
    spec, rep, sd, bases = ex1_bases30
    basis = next(iter(bases.values()))
    v = build_decay_mode(basis, (0, 0))
    assert np.abs(v - basis.ness_vec).max() == 0.0


def test_decay_mode_eigenrelation_cutoff16():
    z1 = 0.2
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 16)
    Ld = build_dense_liouvillian(spec, rep)
    idx = np.nonzero(interior_mask(rep))[0]
    from dataclasses import replace
    for sector in enumerate_sectors(spec):
        basis = build_zeta(sup, sd, sector_shift(qf, sector))
        basis = replace(basis, ness_vec=find_ness(basis))
        blk = sector_block(Ld, rep, sector)
        theta = build_decay_mode(basis, (0, 1))
        resid = (blk @ theta - (-1.0) * theta)[idx]
        assert np.linalg.norm(resid) <= 1e-6 * np.linalg.norm(theta)


def test_decay_mode_eigenrelation_up_to_total_three(ex1_bases30):
    spec, rep, sd, bases = ex1_bases30
    Ld = build_dense_liouvillian(spec, rep)
    idx = np.nonzero(interior_mask(rep))[0]
    for sector, basis in list(bases.items())[:2]:
        blk = sector_block(Ld, rep, sector)
        for m in [(0, 0), (1, 0), (0, 2), (2, 1), (3, 0)]:
            lam = mode_eigenvalue(sd.betas, np.array(m))
            theta = build_decay_mode(basis, m)
            resid = (blk @ theta - lam * theta)[idx]
            assert np.linalg.norm(resid) <= 1e-6 * np.linalg.norm(theta)


def test_decay_mode_sigma_x_traces(ex1_bases30):
    z1 = 0.2
    spec, rep, sd, bases = ex1_bases30
    efac = np.exp(-2 * z1**2)
    for sector, basis in bases.items():
        sL, sR = sector.sL[0], sector.sR[0]
        delta = 1.0 if sR == -sL else 0.0
        trace = {}
        for m in [(0, 0), (0, 1), (1, 0)]:
            theta = build_decay_mode(basis, m)
            # Tr(sigma_x Theta) factorizes into <sR|sx|sL> tr_b(theta)
            tr_b = np.trace(theta.reshape(basis.dim_b, basis.dim_b, order="F").T)
            trace[m] = delta * tr_b
        assert trace[(0, 0)] == pytest.approx(delta * efac, abs=1e-10)
        assert trace[(0, 1)] == pytest.approx(delta * efac * 2 * z1 * sR,
                                              abs=1e-10)
        assert trace[(1, 0)] == pytest.approx(delta * efac * 2 * z1 * sL,
                                              abs=1e-10)


def test_decay_mode_truncation_guard(ex1_bases30):
    spec, rep, sd, bases = ex1_bases30
    basis = next(iter(bases.values()))
    with pytest.raises(TruncationOverflow):
        build_decay_mode(basis, (15, 15))
    # same index is fine with the guard disabled (used by the fitter)
    v = build_decay_mode(basis, (15, 15), check_truncation=False)
    assert np.isfinite(v).all()


def test_decay_modes_bulk_matches_single(ex1_bases30):
    spec, rep, sd, bases = ex1_bases30
    basis = next(iter(bases.values()))
    idx_list = [(0, 0), (0, 1), (1, 1), (2, 0)]
    bulk = build_decay_modes(basis, idx_list)
    for col, m in enumerate(idx_list):
        single = build_decay_mode(basis, m)
        assert np.abs(bulk[:, col] - single).max() < 1e-12


# ---------------------------------------------------------------------------
# dense generator
# ---------------------------------------------------------------------------

def test_dense_liouvillian_preserves_trace():
    rng = np.random.default_rng(42)
    spec = random_stable_model(rng)
    rep = build_fock_rep(spec, 8)
    Ld = build_dense_liouvillian(spec, rep)
    D = rep.dim_b * rep.dim_s
    tr_vec = vec(np.eye(D, dtype=complex))
    resid = np.abs(tr_vec @ Ld).max()
    scale = np.abs(Ld.data).max() if Ld.nnz else 1.0
    assert resid <= 1e-10 * scale


def test_dense_liouvillian_pure_damping_spectrum():
    spec = single_spin_boson(0.0)
    rep = build_fock_rep(spec, 8)
    Ld = build_dense_liouvillian(spec, rep).toarray()
    evals = np.sort_complex(np.linalg.eigvals(Ld))
    want = np.sort_complex(np.array(
        [-(j + k) for j in range(8) for k in range(8)
         for _ in range(4)], dtype=complex))
    assert np.abs(evals - want).max() < 1e-8


def test_dense_liouvillian_preserves_hermiticity():
    rng = np.random.default_rng(43)
    spec = random_stable_model(rng)
    rep = build_fock_rep(spec, 6)
    Ld = build_dense_liouvillian(spec, rep)
    D = rep.dim_b * rep.dim_s
    rho = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = rho + rho.conj().T
    out = (Ld @ vec(rho)).reshape(D, D, order="F")
    assert np.abs(out - out.conj().T).max() <= 1e-12 * np.abs(out).max()


# ---------------------------------------------------------------------------
# normal form vs explicit generator
# ---------------------------------------------------------------------------

def test_central_identity_example1_cutoff16():
    assert central_identity_mismatch(single_spin_boson(0.2), 16) <= 1e-8


def test_central_identity_example2_scalar_gap():
    z2 = 0.3
    spec1 = single_spin_boson(0.2)
    spec2 = single_spin_boson(0.2, z2)
    cutoff = 10
    qf1, sd1, rep1, sup1 = pipeline(spec1, cutoff)
    qf2, sd2, rep2, sup2 = pipeline(spec2, cutoff)
    sector = sector_by_label(spec1, 1.0, -1.0)
    nf1 = build_normal_form_liouvillian(
        build_zeta(sup1, sd1, sector_shift(qf1, sector)), sd1,
        sector_shift(qf1, sector))
    nf2 = build_normal_form_liouvillian(
        build_zeta(sup2, sd2, sector_shift(qf2, sector)), sd2,
        sector_shift(qf2, sector))
    gap = nf2 - nf1
    want = -4 * z2**2 * np.eye(nf1.shape[0])
    assert np.abs(gap - want).max() < 1e-12


def test_central_identity_zero_model():
    spec = ModelSpec.of(n=1)
    qf, sd, rep, sup = pipeline(spec, 6)
    sector = enumerate_sectors(spec)[0]
    sh = sector_shift(qf, sector)
    basis = build_zeta(sup, sd, sh)
    nf = build_normal_form_liouvillian(basis, sd, sh)
    assert not np.any(nf)


def test_central_identity_random_n1_models():
    rng = np.random.default_rng(44)
    for _ in range(5):
        spec = random_stable_model(rng)
        assert central_identity_mismatch(spec, 10) <= 1e-8


def test_central_identity_random_n2_model():
    # exercises complex Hermitian H and Omega coupling at two modes/sites
    rng = np.random.default_rng(45)
    spec = random_stable_model(rng, n=2)
    assert central_identity_mismatch(spec, 5) <= 1e-8


def test_lambda_ladder_in_dense_spectrum_per_sector():
    z1 = 0.3
    spec = single_spin_boson(z1)
    qf, sd, rep, sup = pipeline(spec, 8)
    Ld = build_dense_liouvillian(spec, rep)
    for sector in enumerate_sectors(spec):
        blk = sector_block(Ld, rep, sector)
        evals = np.linalg.eigvals(blk)
        offset = sector_shift(qf, sector).decay_offset
        for m0 in range(4):
            for m1 in range(4 - m0):
                lam = mode_eigenvalue(sd.betas, np.array([m0, m1])) - offset
                assert np.abs(evals - lam).min() <= 1e-6


def test_sector_bases_pipeline_consistency(ex1_bases30):
    spec, rep, sd, bases = ex1_bases30
    assert len(bases) == 4
    for sector, basis in bases.items():
        assert basis.sector == sector
        for z in basis.zeta:
            assert np.linalg.norm(z @ basis.ness_vec) <= 1e-8
