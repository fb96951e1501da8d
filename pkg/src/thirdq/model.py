"""Physical model definition and its structure matrices.

A model couples n bosonic modes to n mutually commuting spin-like operators
sigma_j (finite real spectra, diagonal in the canonical spin basis).  The
Hamiltonian is quadratic in the mode operators,

    H = a'.H a + a.K a + a'.conj(K) a' + sigma.Omega a + a'.Omega' sigma,

with H Hermitian, K symmetric and Omega arbitrary, and each jump operator is
linear,

    L_mu = l_mu . a  +  k_mu . a'  +  w_mu . sigma.

The Gram-type structure matrices M, N, L, W, E, F are bilinear sums over the
jump vectors and feed the superoperator quadratic form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ModelError
from .util import complex_to_pairs, pairs_to_complex

HERMITICITY_TOL = 1e-12

DEFAULT_SPIN_SPECTRUM = (1.0, -1.0)


def _as_complex_matrix(a, n: int, name: str) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.shape != (n, n):
        raise ModelError(f"{name} must be {n}x{n}, got shape {m.shape}")
    m.flags.writeable = False
    return m


def _as_complex_vector(a, n: int, name: str) -> np.ndarray:
    v = np.array(a, dtype=complex).reshape(-1)
    if v.shape != (n,):
        raise ModelError(f"{name} must have length {n}, got {v.shape}")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class JumpOperator:
    """Coefficient vectors (l, k, w) of one linear jump operator."""

    l: np.ndarray
    k: np.ndarray
    w: np.ndarray

    @classmethod
    def of(cls, l, k, w, n: int | None = None) -> "JumpOperator":
        l = np.atleast_1d(np.asarray(l, dtype=complex))
        if n is None:
            n = l.shape[0]
        return cls(
            _as_complex_vector(l, n, "l"),
            _as_complex_vector(np.atleast_1d(np.asarray(k, dtype=complex)), n, "k"),
            _as_complex_vector(np.atleast_1d(np.asarray(w, dtype=complex)), n, "w"),
        )


@dataclass(frozen=True)
class ModelSpec:
    """Validated model: matrices H, K, Omega, jump vectors and spin spectra."""

    n: int
    H: np.ndarray
    K: np.ndarray
    Omega: np.ndarray
    jumps: tuple
    spin_spectra: tuple

    @classmethod
    def of(cls, n: int, H=None, K=None, Omega=None, jumps=(),
           spin_spectra=None, validate: bool = True) -> "ModelSpec":
        """Build and validate a model; zero matrices fill missing pieces.

        ``validate=False`` skips the invariant check so that diagnostic code
        can inspect a broken model through :func:`validate_model`.
        """
        if n < 1:
            raise ModelError(f"n must be a positive integer, got {n}")
        zero = np.zeros((n, n), dtype=complex)
        H = _as_complex_matrix(zero if H is None else H, n, "H")
        K = _as_complex_matrix(zero if K is None else K, n, "K")
        Omega = _as_complex_matrix(zero if Omega is None else Omega, n, "Omega")
        jump_tuple = tuple(
            j if isinstance(j, JumpOperator) else JumpOperator.of(*j, n=n)
            for j in jumps
        )
        for j in jump_tuple:
            for name in ("l", "k", "w"):
                if getattr(j, name).shape != (n,):
                    raise ModelError(
                        f"jump vector {name} has length "
                        f"{getattr(j, name).shape[0]}, expected {n}"
                    )
        if spin_spectra is None:
            spin_spectra = tuple(DEFAULT_SPIN_SPECTRUM for _ in range(n))
        spectra = tuple(tuple(float(s) for s in spec) for spec in spin_spectra)
        if len(spectra) != n:
            raise ModelError(f"need {n} spin spectra, got {len(spectra)}")
        spec = cls(n=n, H=H, K=K, Omega=Omega, jumps=jump_tuple,
                   spin_spectra=spectra)
        if validate:
            violations = validate_model(spec)
            if violations:
                raise ModelError("; ".join(violations))
        return spec

    @property
    def dim_s(self) -> int:
        """Dimension of the joint spin space."""
        d = 1
        for spec in self.spin_spectra:
            d *= len(spec)
        return d


@dataclass(frozen=True)
class StructureMatrices:
    """Gram sums M, N, L, W, E, F over the jump vectors (each n x n)."""

    M: np.ndarray
    N: np.ndarray
    L: np.ndarray
    W: np.ndarray
    E: np.ndarray
    F: np.ndarray


@dataclass(frozen=True)
class Sector:
    """Joint left/right spin eigenvalue labels (s^L, s^R)."""

    sL: tuple
    sR: tuple

    def sigma_tilde(self) -> np.ndarray:
        """The real 2n-vector (s^L, s^R) that replaces the spin operators."""
        return np.array(self.sL + self.sR, dtype=float)

    def label(self, sep: str = ",") -> str:
        """Signed eigenvalues joined by ``sep``, left labels then right.

        CSV cells use ``sep=";"`` so the label never collides with the
        column delimiter.
        """
        return sep.join(f"{v:+g}" for v in self.sL + self.sR)


def validate_model(spec: ModelSpec) -> list:
    """Return a list of invariant violations (empty when the model is valid).

    H must be Hermitian and K symmetric to within 1e-12 relative to the
    matrix norm; every spin spectrum must be non-empty and finite.  Models
    beyond tolerance are reported, never silently symmetrized.
    """
    out = []
    herm = np.abs(spec.H - spec.H.conj().T).max()
    scale_h = max(np.abs(spec.H).max(), 1.0)
    if herm > HERMITICITY_TOL * scale_h:
        out.append(f"H not Hermitian, deviation {herm:g}")
    sym = np.abs(spec.K - spec.K.T).max()
    scale_k = max(np.abs(spec.K).max(), 1.0)
    if sym > HERMITICITY_TOL * scale_k:
        out.append(f"K not symmetric, deviation {sym:g}")
    for i, spectrum in enumerate(spec.spin_spectra):
        if len(spectrum) == 0:
            out.append(f"spin spectrum {i} is empty")
        elif not all(np.isfinite(spectrum)):
            out.append(f"spin spectrum {i} contains non-finite values")
    return out


def build_structure_matrices(spec: ModelSpec) -> StructureMatrices:
    """Accumulate the six Gram-type structure matrices over the jump list."""
    n = spec.n
    M = np.zeros((n, n), dtype=complex)
    N = np.zeros_like(M)
    L = np.zeros_like(M)
    W = np.zeros_like(M)
    E = np.zeros_like(M)
    F = np.zeros_like(M)
    for j in spec.jumps:
        M += np.outer(j.l, j.l.conj())
        N += np.outer(j.k, j.k.conj())
        L += np.outer(j.l, j.k.conj())
        W += np.outer(j.w, j.w.conj())
        E += np.outer(j.l, j.w.conj())
        F += np.outer(j.k, j.w.conj())
    # Gram sums are Hermitian by construction; enforce it exactly.
    M = (M + M.conj().T) / 2
    N = (N + N.conj().T) / 2
    W = (W + W.conj().T) / 2
    return StructureMatrices(M=M, N=N, L=L, W=W, E=E, F=F)


def enumerate_sectors(spec: ModelSpec) -> list:
    """All joint eigenvalue sectors, left labels varying slowest.

    Spectrum entries keep the order given in ``spin_spectra``, so the sector
    list (and every file keyed by it) is reproducible across runs.
    """
    assignments = list(product(*spec.spin_spectra))
    return [Sector(sL=left, sR=right)
            for left in assignments for right in assignments]


def single_spin_boson(z1: complex, z2: complex | None = None) -> ModelSpec:
    """One damped mode with a spin-shifted loss channel, L1 = a + z1*sigma_z.

    With ``z2`` set and nonzero, a pure-dephasing channel L2 = z2*sigma_z is
    added (z2 = 0 is the same model without the extra channel).
    """
    jumps = [JumpOperator.of([1.0], [0.0], [z1])]
    if z2:
        jumps.append(JumpOperator.of([0.0], [0.0], [z2]))
    return ModelSpec.of(n=1, jumps=jumps)


def load_model(path) -> ModelSpec:
    """Read a model from its JSON file format.

    The object carries ``n``, optional matrices ``H``, ``K``, ``Omega``
    (row-major [re, im] pairs), ``jumps`` (objects with vectors l, k, w) and
    optional ``spin_spectra``; missing matrices default to zero and missing
    spectra to (+1, -1) per site.
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return model_from_dict(data)


def model_from_dict(data: dict) -> ModelSpec:
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError("model file must carry a positive integer 'n'") from exc

    def mat(key):
        if key not in data or data[key] is None:
            return None
        return pairs_to_complex(data[key], shape=(n, n))

    def jvec(obj, key):
        if key not in obj or obj[key] is None:
            return np.zeros(n, dtype=complex)
        return pairs_to_complex(obj[key], shape=(n,))

    jumps = [
        JumpOperator.of(jvec(j, "l"), jvec(j, "k"), jvec(j, "w"), n=n)
        for j in data.get("jumps", [])
    ]
    spectra = data.get("spin_spectra")
    return ModelSpec.of(n=n, H=mat("H"), K=mat("K"), Omega=mat("Omega"),
                        jumps=jumps, spin_spectra=spectra)


def model_to_dict(spec: ModelSpec) -> dict:
    return {
        "n": spec.n,
        "H": complex_to_pairs(spec.H),
        "K": complex_to_pairs(spec.K),
        "Omega": complex_to_pairs(spec.Omega),
        "jumps": [
            {"l": complex_to_pairs(j.l), "k": complex_to_pairs(j.k),
             "w": complex_to_pairs(j.w)}
            for j in spec.jumps
        ],
        "spin_spectra": [list(s) for s in spec.spin_spectra],
    }


def save_model(spec: ModelSpec, path) -> None:
    data = model_to_dict(spec)
    lines = [
        f' "{key}": {json.dumps(value, separators=(",", ":"))}'
        for key, value in data.items()
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write("{\n" + ",\n".join(lines) + "\n}\n")
