"""Pure and mixed quantum states, Born probabilities, Schmidt data, and the
perfect-correlation partner construction for maximally entangled states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_complex_matrix, as_hermitian, as_projector, eig_hermitian, kron, partial_trace

__all__ = [
    "PureState",
    "SchmidtData",
    "as_density",
    "max_entangled",
    "singlet",
    "schmidt_decompose",
    "is_maximally_entangled",
    "born_joint",
    "partner_projection",
    "random_state_vector",
    "random_rank1_projector",
    "random_pure_state",
]

UNIT_NORM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Bipartite pure state: a unit-norm ket on H_A ⊗ H_B with declared factor dims."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.dim_a < 1 or self.dim_b < 1:
            raise ValueError("factor dimensions must be >= 1")
        if amp.size != self.dim_a * self.dim_b:
            raise ValueError(f"amplitude length {amp.size} != {self.dim_a}·{self.dim_b}")
        if not np.all(np.isfinite(amp.real)) or not np.all(np.isfinite(amp.imag)):
            raise ValueError("amplitudes must be finite")
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"state norm {nrm} deviates from 1 by more than {UNIT_NORM_TOL:.1e}")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    def matrix(self) -> np.ndarray:
        """Amplitude matrix M with M[a, b] = ⟨ab|Ψ⟩."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def density(self) -> np.ndarray:
        """Density operator |Ψ⟩⟨Ψ|."""
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class SchmidtData:
    """Schmidt (biorthogonal) decomposition Ψ = Σ_i β_i ψ_i ⊗ φ_i.

    coefficients are non-negative and descending; left[:, i] = ψ_i and
    right[:, i] = φ_i are orthonormal families.
    """

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.coefficients, dtype=float)
        left = np.asarray(self.left, dtype=np.complex128)
        right = np.asarray(self.right, dtype=np.complex128)
        k = beta.size
        if np.any(beta < -1e-12) or np.any(np.diff(beta) > 1e-12):
            raise ValueError("Schmidt coefficients must be non-negative and descending")
        if abs(np.sum(beta**2) - 1.0) > 1e-10:
            raise ValueError("Schmidt coefficients must satisfy sum of squares = 1")
        for name, basis in (("left", left), ("right", right)):
            if basis.ndim != 2 or basis.shape[1] != k:
                raise ValueError(f"{name} basis must hold {k} column vectors")
            gram = basis.conj().T @ basis
            if np.max(np.abs(gram - np.eye(k))) > 1e-10:
                raise ValueError(f"{name} basis is not orthonormal")
        object.__setattr__(self, "coefficients", _frozen(beta))
        object.__setattr__(self, "left", _frozen(left))
        object.__setattr__(self, "right", _frozen(right))

    def reconstruct(self) -> np.ndarray:
        """Amplitude vector of Σ_i β_i ψ_i ⊗ φ_i."""
        amp = np.einsum("i,ai,bi->ab", self.coefficients, self.left, self.right)
        return amp.reshape(-1)


def as_density(m, tol: float = 1e-10) -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, positive semidefinite."""
    rho = as_hermitian(m, tol=tol)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace {tr} deviates from 1 by more than {tol:.1e}")
    w, _ = eig_hermitian(rho)
    if w[0] < -tol:
        raise ValueError(f"not positive semidefinite: min eigenvalue {w[0]:.3e}")
    return rho


def max_entangled(n: int) -> PureState:
    """The canonical maximally entangled state (1/√n) Σ_i |i⟩|i⟩."""
    if n < 2:
        raise ValueError("maximally entangled state needs local dimension >= 2")
    amp = np.zeros(n * n, dtype=np.complex128)
    amp[:: n + 1] = 1 / np.sqrt(n)
    return PureState(n, n, amp)


def singlet() -> PureState:
    """The two-qubit singlet (|01⟩ − |10⟩)/√2."""
    amp = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)
    return PureState(2, 2, amp)


def schmidt_decompose(s: PureState) -> SchmidtData:
    """Schmidt decomposition via SVD of the amplitude matrix.

    Phases are fixed so each left vector's largest-magnitude component is
    real positive, with the compensating phase absorbed into the right vector.
    """
    u, sv, vh = np.linalg.svd(s.matrix())
    k = min(s.dim_a, s.dim_b)
    left = u[:, :k]
    right = vh[:k, :].T  # columns φ_i, with φ_i[b] = (V†)[i, b]
    lead = np.argmax(np.abs(left), axis=0)
    phases = left[lead, np.arange(k)]
    safe = np.where(np.abs(phases) > 0, phases / np.where(np.abs(phases) > 0, np.abs(phases), 1), 1)
    left = left * safe.conj()
    right = right * safe
    return SchmidtData(coefficients=sv[:k], left=left, right=right)


def is_maximally_entangled(s: PureState, tol: float = 1e-10) -> bool:
    """True when all Schmidt coefficients equal 1/√n within `tol` (square input)."""
    if s.dim_a != s.dim_b:
        return False
    beta = schmidt_decompose(s).coefficients
    return bool(np.max(np.abs(beta - 1 / np.sqrt(s.dim_a))) <= tol)


def born_joint(rho: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """Born probability Tr(ρ · P⊗Q) for projectors P on A and Q on B.

    The result is clamped to [0, 1] only when within 1e-12 of the boundary;
    anything further outside [−1e-10, 1+1e-10] signals invalid inputs.
    """
    rho = as_complex_matrix(rho)
    p = as_projector(p)
    q = as_projector(q)
    da, db = p.shape[0], q.shape[0]
    if rho.shape != (da * db, da * db):
        raise ValueError(f"state dim {rho.shape} incompatible with projector dims {da}×{db}")
    val = np.trace(rho @ kron(p, q))
    prob = float(val.real)
    if prob < -1e-10 or prob > 1 + 1e-10:
        raise ValueError(f"Tr(ρ P⊗Q) = {prob} outside [0, 1]: invalid inputs")
    if -1e-12 <= prob < 0:
        prob = 0.0
    elif 1 < prob <= 1 + 1e-12:
        prob = 1.0
    return prob


def partner_projection(psi: PureState, p: np.ndarray) -> np.ndarray:
    """Perfectly correlated partner of a rank-1 projector, for maximally entangled Ψ.

    For P = |x⟩⟨x| with x = Σ_i c_i ψ_i in the Schmidt basis, returns
    Q = |y⟩⟨y| with y = Σ_i c̄_i φ_i, which satisfies
    p_Ψ(P) = p_Ψ(P, Q) = p_Ψ(Q).
    """
    if not is_maximally_entangled(psi):
        raise ValueError("partner projection requires a maximally entangled state")
    p = as_projector(p)
    if abs(np.trace(p).real - 1.0) > 1e-10:
        raise ValueError("partner projection requires a rank-1 projector")
    if p.shape[0] != psi.dim_a:
        raise ValueError(f"projector dim {p.shape[0]} != A-side dim {psi.dim_a}")
    w, v = eig_hermitian(p)
    x = v[:, -1]
    sd = schmidt_decompose(psi)
    c = sd.left.conj().T @ x  # c_i = ⟨ψ_i|x⟩
    y = sd.right @ c.conj()
    y = y / np.linalg.norm(y)
    return np.outer(y, y.conj())


def random_state_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unit vector: normalized complex Gaussian."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_rank1_projector(dim: int, seed) -> np.ndarray:
    """Haar-distributed rank-1 projector; deterministic for a fixed seed."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    x = random_state_vector(dim, _as_rng(seed))
    return np.outer(x, x.conj())


def random_pure_state(dim_a: int, dim_b: int, seed) -> PureState:
    """Haar-random bipartite pure state (testing helper)."""
    amp = random_state_vector(dim_a * dim_b, _as_rng(seed))
    return PureState(dim_a, dim_b, amp)


def reduced_density(psi: PureState, side: str = "B") -> np.ndarray:
    """Reduced density operator of a pure state after tracing out `side`."""
    return partial_trace(psi.density(), psi.dims, side=side)
