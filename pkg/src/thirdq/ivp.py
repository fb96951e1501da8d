"""Initial value problem via decay-mode expansion, plus closed-form curves.

The initial state splits into spin sectors; within each sector the boson
block is fitted as a combination of decay modes,

    rho_0^s = sum_m c_m^s Theta_m^s,

by least squares over multi-indices with every entry below ``trunc``.  Each
mode then evolves with its generator eigenvalue, and observables are traced
against the modes:

    <A(t)> = sum_{s,m} c_m^s exp[(lambda_m - offset_s) t] Tr(A Theta_m^s),

with lambda_m = -2 sum m_r beta_r and offset_s the sector dephasing scalar
(zero for the reference single-mode model).  The exponent is the decaying
direction: lambda_m has non-positive real part for stable spectra.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np

from .errors import IllConditionedWarning, ModelError
from .fockspace import (
    FockRep,
    SectorBasis,
    build_decay_modes,
    build_fock_rep,
    build_sector_bases,
)
from .model import ModelSpec, Sector, enumerate_sectors
from .spectral import mode_eigenvalue
from .util import format_float, parallel_map, unvec, vec

COND_WARN = 1e12
STATE_TOL = 1e-10
DEFAULT_TRUNC = 18
DEFAULT_CUTOFF = 30


# ---------------------------------------------------------------------------
# initial states
# ---------------------------------------------------------------------------

def spin_plus_x() -> np.ndarray:
    """The spin state (I + sigma_x) / 2 for a single two-level site."""
    return np.full((2, 2), 0.5, dtype=complex)


def spin_up() -> np.ndarray:
    return np.diag([1.0, 0.0]).astype(complex)


def spin_down() -> np.ndarray:
    return np.diag([0.0, 1.0]).astype(complex)


def spin_mixed(dim: int = 2) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def coherent_amplitudes(cutoff: int, alpha: complex) -> np.ndarray:
    """Truncated coherent-state amplitudes <k|alpha> = e^{-|a|^2/2} a^k/sqrt(k!)."""
    k = np.arange(cutoff)
    amps = np.zeros(cutoff, dtype=complex)
    amps[0] = 1.0
    for j in range(1, cutoff):
        amps[j] = amps[j - 1] * alpha / np.sqrt(j)
    return amps * np.exp(-abs(alpha) ** 2 / 2)


@dataclass(frozen=True)
class InitialState:
    """Product initial state: a boson part and an explicit spin matrix.

    The boson part is stored symbolically (Fock index or coherent amplitude)
    so one state can be materialized at any cutoff; ``explicit`` ties the
    state to the cutoff it was built for.
    """

    kind: str
    spin: np.ndarray
    fock_k: tuple | None = None
    alpha: tuple | None = None
    boson: np.ndarray | None = None

    @classmethod
    def fock(cls, k=0, *, spin) -> "InitialState":
        kk = tuple(int(x) for x in np.atleast_1d(k))
        return cls(kind="fock", spin=np.asarray(spin, dtype=complex), fock_k=kk)

    @classmethod
    def coherent(cls, alpha, *, spin) -> "InitialState":
        aa = tuple(complex(x) for x in np.atleast_1d(alpha))
        return cls(kind="coherent", spin=np.asarray(spin, dtype=complex),
                   alpha=aa)

    @classmethod
    def explicit(cls, boson, spin) -> "InitialState":
        return cls(kind="explicit", spin=np.asarray(spin, dtype=complex),
                   boson=np.asarray(boson, dtype=complex))

    def boson_matrix(self, cutoff: int, n_modes: int = 1) -> np.ndarray:
        if self.kind == "fock":
            kk = self.fock_k
            if len(kk) != n_modes:
                raise ModelError(f"need {n_modes} Fock indices, got {len(kk)}")
            if any(k >= cutoff or k < 0 for k in kk):
                raise ModelError(f"Fock index {kk} outside cutoff {cutoff}")
            v = np.eye(1)
            for k in kk:
                e = np.zeros(cutoff)
                e[k] = 1.0
                v = np.kron(v, e)
            v = v.ravel()
            return np.outer(v, v).astype(complex)
        if self.kind == "coherent":
            aa = self.alpha
            if len(aa) != n_modes:
                raise ModelError(f"need {n_modes} amplitudes, got {len(aa)}")
            v = np.eye(1)
            for a in aa:
                v = np.kron(v, coherent_amplitudes(cutoff, a))
            v = v.ravel()
            v = v / np.linalg.norm(v)  # renormalize after truncation
            return np.outer(v, v.conj())
        dim = cutoff**n_modes
        if self.boson.shape != (dim, dim):
            raise ModelError(
                f"explicit boson matrix has shape {self.boson.shape}, "
                f"expected {(dim, dim)}"
            )
        return self.boson

    def full_matrix(self, rep: FockRep) -> np.ndarray:
        """Materialize, tensor with the spin part, and validate."""
        if self.spin.shape != (rep.dim_s, rep.dim_s):
            raise ModelError(
                f"spin part has shape {self.spin.shape}, expected "
                f"{(rep.dim_s, rep.dim_s)}"
            )
        rho = np.kron(self.boson_matrix(rep.cutoff, rep.n), self.spin)
        herm = np.abs(rho - rho.conj().T).max()
        tr = abs(np.trace(rho) - 1.0)
        if herm > STATE_TOL or tr > STATE_TOL:
            raise ModelError(
                f"initial state invalid (hermiticity {herm:.2e}, "
                f"trace deviation {tr:.2e})"
            )
        evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        if evals.min() < -STATE_TOL:
            raise ModelError(
                f"initial state not positive semidefinite "
                f"(min eigenvalue {evals.min():.2e})"
            )
        return rho


# ---------------------------------------------------------------------------
# expansion in decay modes
# ---------------------------------------------------------------------------

def multi_indices(n_modes_doubled: int, trunc: int) -> tuple:
    """All multi-indices with every entry < trunc, lexicographic order."""
    return tuple(_iproduct(range(trunc), repeat=n_modes_doubled))


@dataclass(frozen=True)
class ModeExpansion:
    """Per-sector expansion coefficients of an initial state.

    ``coefficients[sector][m]`` is c_m^s; ``residual[sector]`` the 2-norm
    least-squares misfit; ``modes[sector]`` caches the mode columns in
    ``indices`` order for fast evaluation.
    """

    trunc: int
    indices: tuple
    coefficients: dict
    residual: dict
    bases: dict
    modes: dict


def project_initial_state(rho0: InitialState, spec: ModelSpec,
                          cutoff: int) -> dict:
    """Sector boson blocks of the initial state, as vectorized operators."""
    rep = build_fock_rep(spec, cutoff)
    rho0.full_matrix(rep)  # validation
    vb = vec(rho0.boson_matrix(cutoff, spec.n))
    blocks = {}
    for sector in enumerate_sectors(spec):
        iL = rep.spin_index(sector.sL)
        iR = rep.spin_index(sector.sR)
        blocks[sector] = vb * complex(rho0.spin[iL, iR])
    return blocks


def solve_coefficients(blocks: dict, bases: dict, trunc: int) -> ModeExpansion:
    """Least-squares fit of each sector block in its decay-mode basis.

    Emits :class:`IllConditionedWarning` (and keeps the SVD-based solution)
    when the fit matrix condition number exceeds 1e12; precision stops
    improving once the basis hits that floor.
    """
    if trunc < 1:
        raise ModelError("trunc must be >= 1")
    sectors = list(bases)
    any_basis = bases[sectors[0]]
    indices = multi_indices(2 * any_basis.n_modes, trunc)

    def one(sector):
        basis = bases[sector]
        A = build_decay_modes(basis, indices)
        b = blocks[sector]
        coef, res, rank, svals = np.linalg.lstsq(A, b, rcond=None)
        if svals[-1] > 0:
            cond = svals[0] / svals[-1]
        else:
            cond = np.inf
        if cond > COND_WARN:
            warnings.warn(
                f"fit matrix for sector {sector.label()} has condition "
                f"estimate {cond:.3e}",
                IllConditionedWarning,
            )
        resid = float(np.linalg.norm(A @ coef - b))
        return coef, resid, A

    results = parallel_map(one, sectors)
    coefficients, residual, modes = {}, {}, {}
    for sector, (coef, resid, A) in zip(sectors, results):
        coefficients[sector] = dict(zip(indices, coef))
        residual[sector] = resid
        modes[sector] = A
    return ModeExpansion(trunc=trunc, indices=indices,
                         coefficients=coefficients, residual=residual,
                         bases=dict(bases), modes=modes)


def refit(expansion: ModeExpansion, blocks: dict, trunc: int) -> ModeExpansion:
    """Re-solve at a smaller trunc reusing the cached mode columns."""
    if trunc > expansion.trunc:
        raise ModelError("refit trunc exceeds the cached mode set")
    keep = [i for i, m in enumerate(expansion.indices)
            if all(x < trunc for x in m)]
    indices = tuple(expansion.indices[i] for i in keep)
    coefficients, residual, modes = {}, {}, {}
    for sector, A in expansion.modes.items():
        sub = A[:, keep]
        coef, *_ = np.linalg.lstsq(sub, blocks[sector], rcond=None)
        coefficients[sector] = dict(zip(indices, coef))
        residual[sector] = float(np.linalg.norm(sub @ coef - blocks[sector]))
        modes[sector] = sub
    return ModeExpansion(trunc=trunc, indices=indices,
                         coefficients=coefficients, residual=residual,
                         bases=expansion.bases, modes=modes)


# ---------------------------------------------------------------------------
# observable evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionResult:
    """Time series of one observable with its provenance."""

    times: np.ndarray
    values: np.ndarray
    method: str

    def real_values(self, tol: float = 1e-8) -> np.ndarray:
        vals = np.asarray(self.values)
        if np.iscomplexobj(vals) and np.abs(vals.imag).max() > tol:
            warnings.warn(
                f"discarding imaginary part up to "
                f"{np.abs(vals.imag).max():.2e}", UserWarning,
            )
        return vals.real.astype(float) if np.iscomplexobj(vals) \
            else vals.astype(float)


def _sector_observable_block(observable: np.ndarray, basis: SectorBasis,
                             bases: dict) -> np.ndarray:
    """Block A[(b1, sR), (b2, sL)] whose trace against theta gives Tr(A Theta)."""
    dim_b = basis.dim_b
    D = observable.shape[0]
    dim_s = D // dim_b
    if dim_b * dim_s != D:
        raise ModelError("observable dimension incompatible with the basis")
    A4 = observable.reshape(dim_b, dim_s, dim_b, dim_s)
    iL, iR = _sector_spin_indices(basis.sector, bases)
    return A4[:, iR, :, iL]


def _sector_spin_indices(sector: Sector, bases: dict):
    # the distinct left labels, in sector-enumeration order, are exactly the
    # joint spin basis order
    ordered = []
    for s in bases:
        if s.sL not in ordered:
            ordered.append(s.sL)
    return ordered.index(sector.sL), ordered.index(sector.sR)


def mode_traces(expansion: ModeExpansion, observable: np.ndarray,
                sector: Sector) -> np.ndarray:
    """Tr(A Theta_m) for every cached mode of one sector."""
    basis = expansion.bases[sector]
    A_blk = _sector_observable_block(np.asarray(observable, dtype=complex),
                                     basis, expansion.bases)
    w = A_blk.ravel(order="C")
    return w @ expansion.modes[sector]


def sector_eigenvalues(expansion: ModeExpansion, sector: Sector) -> np.ndarray:
    """Generator eigenvalue of each cached mode: lambda_m minus the sector offset."""
    basis = expansion.bases[sector]
    lam = np.array([mode_eigenvalue(basis.betas, np.array(m))
                    for m in expansion.indices])
    return lam - basis.shift.decay_offset


def evolve_observable(expansion: ModeExpansion, observable, times
                      ) -> EvolutionResult:
    """Expectation series from the mode expansion."""
    times = np.asarray(times, dtype=float)
    observable = np.asarray(observable, dtype=complex)
    values = np.zeros(times.size, dtype=complex)
    for sector, coef_map in expansion.coefficients.items():
        traces = mode_traces(expansion, observable, sector)
        coefs = np.array([coef_map[m] for m in expansion.indices])
        weights = coefs * traces
        live = np.abs(weights) > 0
        if not np.any(live):
            continue
        lam = sector_eigenvalues(expansion, sector)[live]
        values += np.exp(np.outer(times, lam)) @ weights[live]
    return EvolutionResult(times=times, values=values, method="spectral")


def reconstruct_state(expansion: ModeExpansion, t: float) -> np.ndarray:
    """Full density matrix at time t rebuilt from the mode expansion."""
    sectors = list(expansion.bases)
    basis0 = expansion.bases[sectors[0]]
    dim_b = basis0.dim_b
    dim_s = int(round(len(sectors) ** 0.5))
    out = np.zeros((dim_b * dim_s, dim_b * dim_s), dtype=complex)
    for sector in sectors:
        basis = expansion.bases[sector]
        coefs = np.array([expansion.coefficients[sector][m]
                          for m in expansion.indices])
        lam = sector_eigenvalues(expansion, sector)
        amp = coefs * np.exp(lam * t)
        theta = unvec(expansion.modes[sector] @ amp, dim_b)
        iL, iR = _sector_spin_indices(sector, expansion.bases)
        spin_block = np.zeros((dim_s, dim_s), dtype=complex)
        spin_block[iL, iR] = 1.0
        out += np.kron(theta, spin_block)
    return out


# ---------------------------------------------------------------------------
# reference curves and the small-z coefficient system
# ---------------------------------------------------------------------------

def closed_form_sigma_x(z1: complex, z2: complex, t, sigma_x0: float = 1.0):
    """Reference curve <sigma_x(t)> = <sigma_x(0)> exp[-4|z1|^2 (1 - e^-t) - 4|z2|^2 t]."""
    t = np.asarray(t, dtype=float)
    u1, u2 = abs(z1) ** 2, abs(z2) ** 2
    out = sigma_x0 * np.exp(-4 * u1 * (1 - np.exp(-t)) - 4 * u2 * t)
    return out if out.ndim else float(out)


def small_z_sigma_x(z1: complex, t):
    """Slow-mode approximation e^{-2|z1|^2} (1 - 2|z1|^2 + 4|z1|^2 e^{-t})."""
    t = np.asarray(t, dtype=float)
    u = abs(z1) ** 2
    out = np.exp(-2 * u) * (1 - 2 * u + 4 * u * np.exp(-t))
    return out if out.ndim else float(out)


def small_z_system(z1: complex, sector: Sector):
    """The quadratic-order 4x4 coefficient system for one sector.

    Returns ``(matrix, rhs, solution)``: the coefficient matrix (including
    its e^{-|z1|^2} prefactor), the right-hand side (1/2, 0, 0, 0), and the
    closed-form solution vector.  Row/column order is the lexicographic mode
    order (0,0), (0,1), (1,0), (1,1).
    """
    sL, sR = float(sector.sL[0]), float(sector.sR[0])
    z = complex(z1)
    zc = z.conjugate()
    u = abs(z) ** 2
    mat = np.exp(-u) * np.array([
        [1, z * sR, zc * sL, -1 + u * sL * sR],
        [-zc * sR, 1 - u, -(zc**2) * sL * sR, zc * (sL + sR)],
        [-z * sL, -(z**2) * sL * sR, 1 - u, z * (sL + sR)],
        [u * sL * sR, -z * sL, -zc * sR, 1 - u * (2 + sL * sR)],
    ], dtype=complex)
    rhs = np.array([0.5, 0, 0, 0], dtype=complex)
    pref = np.exp(u) / (2 * (1 + 3 * u**2 + 2 * u**3))
    solution = pref * np.array([
        1 - u * (2 - sL * sR) + u**2 * (4 + 2 * sL * sR),
        zc * (1 - u) * sR,
        z * (1 - u) * sL,
        u * (1 + 2 * u) * sL * sR,
    ], dtype=complex)
    return mat, rhs, solution


def extract_z_parameters(spec: ModelSpec):
    """(l1, z1, z2) for models of the worked single-mode form.

    Accepts L1 = l1 a + w1 sigma_z (z1 = w1 / l1) plus an optional pure
    dephasing channel L2 = z2 sigma_z; anything else is a ModelError.
    """
    if spec.n != 1 or np.any(spec.H) or np.any(spec.K) or np.any(spec.Omega):
        raise ModelError("closed form defined only for the single-mode "
                         "loss-plus-dephasing model")
    jumps = [j for j in spec.jumps
             if np.any(j.l) or np.any(j.k) or np.any(j.w)]
    loss = [j for j in jumps if np.any(j.l)]
    deph = [j for j in jumps if not np.any(j.l) and np.any(j.w)]
    if len(loss) != 1 or len(loss) + len(deph) != len(jumps) \
            or any(np.any(j.k) for j in jumps) or len(deph) > 1:
        raise ModelError("closed form needs exactly one loss channel and at "
                         "most one dephasing channel")
    l1 = complex(loss[0].l[0])
    z1 = complex(loss[0].w[0]) / l1
    z2 = complex(deph[0].w[0]) if deph else 0.0
    return l1, z1, z2


def closed_form_curve(spec: ModelSpec, times, sigma_x0: float = 1.0
                      ) -> EvolutionResult:
    """Closed-form <sigma_x(t)> for a conforming model, any loss scale.

    A loss coefficient l1 != 1 rescales time inside the relaxing factor:
    exp[-4|z1|^2 (1 - e^{-|l1|^2 t}) - 4 |z2|^2 t].
    """
    l1, z1, z2 = extract_z_parameters(spec)
    times = np.asarray(times, dtype=float)
    scale = abs(l1) ** 2
    vals = sigma_x0 * np.exp(
        -4 * abs(z1) ** 2 * (1 - np.exp(-scale * times))
        - 4 * abs(z2) ** 2 * times
    )
    return EvolutionResult(times=times, values=vals.astype(complex),
                           method="closed_form")


def small_z_curve(spec: ModelSpec, times) -> EvolutionResult:
    """Slow-mode approximation curve, dephasing factored in."""
    l1, z1, z2 = extract_z_parameters(spec)
    times = np.asarray(times, dtype=float)
    vals = small_z_sigma_x(z1, abs(l1) ** 2 * times) \
        * np.exp(-4 * abs(z2) ** 2 * times)
    return EvolutionResult(times=times, values=vals.astype(complex),
                           method="small_z_approx")


# ---------------------------------------------------------------------------
# pipeline and serialization
# ---------------------------------------------------------------------------

def default_time_grid(tmax: float = 10.0, npoints: int = 200) -> np.ndarray:
    """t = 0 followed by npoints logarithmically spaced points on [1e-2, tmax]."""
    return np.concatenate([[0.0], np.geomspace(1e-2, tmax, npoints)])


def evolve_spectral(spec: ModelSpec, rho0: InitialState, observable, times,
                    cutoff: int = DEFAULT_CUTOFF, trunc: int = DEFAULT_TRUNC):
    """Full spectral pipeline; returns (EvolutionResult, ModeExpansion).

    ``observable`` may be a matrix on the full space or a builder
    ``rep -> matrix``.
    """
    rep, _sd, bases = build_sector_bases(spec, cutoff)
    if callable(observable):
        observable = observable(rep)
    blocks = project_initial_state(rho0, spec, cutoff)
    expansion = solve_coefficients(blocks, bases, trunc)
    result = evolve_observable(expansion, observable, times)
    return result, expansion


def write_evolution_csv(results, path) -> None:
    """Serialize EvolutionResult series as CSV columns t, value, method."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("t,value,method\n")
        for res in results:
            vals = res.real_values()
            for t, v in zip(res.times, vals):
                f.write(f"{format_float(t)},{format_float(v)},{res.method}\n")
