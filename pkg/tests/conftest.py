import numpy as np
import pytest

from thirdq.fockspace import (
    build_dense_liouvillian,
    build_fock_rep,
    build_normal_form_liouvillian,
    build_sector_bases,
    build_super_basis,
    build_zeta,
    interior_mask,
    sector_block,
)
from thirdq.ivp import coherent_amplitudes
from thirdq.model import (
    JumpOperator,
    ModelSpec,
    build_structure_matrices,
    enumerate_sectors,
    single_spin_boson,
)
from thirdq.spectral import build_spectral_data
from thirdq.superop import build_quadratic_form, sector_shift
from thirdq.util import vec


def random_complex(rng, *shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_stable_model(rng, n=1, n_jumps=2, with_H=True, with_K=True,
                        with_Om=True):
    """Rejection-sample a valid model with a comfortably stable spectrum."""
    while True:
        H = random_complex(rng, n, n, scale=0.4)
        H = H + H.conj().T
        K = random_complex(rng, n, n, scale=0.15)
        K = K + K.T
        Om = random_complex(rng, n, n, scale=0.3)
        jumps = [
            JumpOperator.of(random_complex(rng, n, scale=1.0),
                            random_complex(rng, n, scale=0.2),
                            random_complex(rng, n, scale=0.5))
            for _ in range(n_jumps)
        ]
        spec = ModelSpec.of(
            n=n,
            H=H if with_H else None,
            K=K if with_K else None,
            Omega=Om if with_Om else None,
            jumps=jumps,
        )
        qf = build_quadratic_form(build_structure_matrices(spec), spec)
        try:
            sd = build_spectral_data(qf)
        except Exception:
            continue
        if sd.betas.real.min() < 0.02:
            continue
        if np.linalg.cond(sd.P) > 1e6:
            continue
        svals = np.linalg.svd(qf.S, compute_uv=False)
        if svals[-1] < 1e-6 * svals[0]:
            continue
        return spec


def analytic_ness(cutoff, z1, sector):
    """Coherent outer product |-z1 sL> <-z1 sR| as a unit vectorized operator."""
    a1 = coherent_amplitudes(cutoff, -z1 * sector.sL[0])
    a2 = coherent_amplitudes(cutoff, -z1 * sector.sR[0])
    v = vec(np.outer(a1, a2.conj()))
    return v / np.linalg.norm(v)


def central_identity_mismatch(spec, cutoff):
    """Worst interior elementwise gap between the explicit generator and the
    normal form, over all sectors."""
    sm = build_structure_matrices(spec)
    qf = build_quadratic_form(sm, spec)
    sd = build_spectral_data(qf)
    rep = build_fock_rep(spec, cutoff)
    sup = build_super_basis(rep)
    Ld = build_dense_liouvillian(spec, rep)
    idx = np.nonzero(interior_mask(rep))[0]
    worst = 0.0
    for sector in enumerate_sectors(spec):
        sh = sector_shift(qf, sector)
        basis = build_zeta(sup, sd, sh)
        nf = build_normal_form_liouvillian(basis, sd, sh)
        dblock = sector_block(Ld, rep, sector)
        gap = np.abs(nf[np.ix_(idx, idx)] - dblock[np.ix_(idx, idx)]).max()
        worst = max(worst, gap)
    return worst


@pytest.fixture(scope="session")
def ex1_bases30():
    """Reference model at z1 = 0.2, full pipeline at cutoff 30."""
    spec = single_spin_boson(0.2)
    rep, sd, bases = build_sector_bases(spec, 30)
    return spec, rep, sd, bases


@pytest.fixture(scope="session")
def ex1_z1_bases30():
    """Reference model at z1 = 1.0, full pipeline at cutoff 30."""
    spec = single_spin_boson(1.0)
    rep, sd, bases = build_sector_bases(spec, 30)
    return spec, rep, sd, bases
