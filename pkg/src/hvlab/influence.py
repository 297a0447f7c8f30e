"""Influence-free operators and their induced maps.

A unit-trace self-adjoint operator L on H⊗H that is non-negative on every
product projection defines the probability assignment
p(P, Q) = Tr(L · P⊗Q).  The same data is carried by a linear positive map
Phi on B(H) with Tr(P Phi(Q)) = Tr(L · P⊗Q); Phi(Q) is Alice's unnormalized
conditional state given Bob's outcome Q.  This module constructs both
representations, reconstructs L from product-projection probabilities by
linear inversion, and provides numeric verifiers for the structural facts
the no-go argument rests on: purity of Phi(Q) for pure states,
proportionality profiles under convex splits, and Hilbert-Schmidt
conformality for maximally entangled states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import as_complex_matrix, as_hermitian, eig_hermitian, hs_inner, hs_norm, kron
from .states import PureState, is_maximally_entangled, random_state_vector, schmidt_decompose

__all__ = [
    "PhiMap",
    "as_lambda_operator",
    "phi_from_lambda",
    "phi_from_pure_state",
    "min_product_projection_value",
    "duality_gap",
    "PurityReport",
    "purity_profile",
    "verify_lemma1",
    "ProportionalityReport",
    "proportionality_profile",
    "ConformalityReport",
    "verify_lemma3",
    "ic_projectors",
    "reconstruct_lambda",
]


@dataclass(frozen=True)
class PhiMap:
    """Linear map on n×n operators, stored as its n²×n² matrix.

    The matrix acts on row-major vectorizations: vec(Phi(Q)) = matrix @ vec(Q).
    """

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        n = self.dim
        if m.shape != (n * n, n * n):
            raise ValueError(f"map matrix shape {m.shape} != ({n * n}, {n * n})")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        norm = self.unit_trace()
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"Tr(Phi(1)) = {norm}, expected 1")

    def __call__(self, q) -> np.ndarray:
        q = as_complex_matrix(q)
        n = self.dim
        if q.shape != (n, n):
            raise ValueError(f"operator shape {q.shape} != ({n}, {n})")
        return (self.matrix @ q.reshape(-1)).reshape(n, n)

    def unit_trace(self) -> float:
        """Tr(Phi(1)), the map's normalization record."""
        return float(np.trace(self(np.eye(self.dim))).real)


def as_lambda_operator(m, n: int, tol: float = 1e-10) -> np.ndarray:
    """Validate a unit-trace self-adjoint operator on H⊗H with factor dims n×n.

    Positive semidefiniteness is NOT required; non-negativity on product
    projections is a sampled property, checked separately by
    min_product_projection_value.
    """
    lam = as_hermitian(m)
    if lam.shape != (n * n, n * n):
        raise ValueError(f"operator shape {lam.shape} != ({n * n}, {n * n})")
    tr = np.trace(lam).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace {tr} deviates from 1 by more than {tol:.1e}")
    return lam


def phi_from_lambda(lam: np.ndarray, n: int) -> PhiMap:
    """The map dual to L under Tr(L · P⊗Q) = Tr(P · Phi(Q)).

    Explicitly Phi(Q) = Tr_B(L · (1⊗Q)); the matrix below is the same
    contraction written index-wise.
    """
    lam = as_complex_matrix(lam)
    if lam.shape != (n * n, n * n):
        raise ValueError(f"operator shape {lam.shape} != ({n * n}, {n * n})")
    m4 = lam.reshape(n, n, n, n)
    return PhiMap(matrix=m4.transpose(0, 2, 3, 1).reshape(n * n, n * n), dim=n)


def phi_from_pure_state(psi: PureState) -> PhiMap:
    """The map of a pure state, built from its Schmidt data.

    Phi(Q) = Σ_ij β_i β_j |ψ_i⟩⟨ψ_j| ⟨φ_j|Q|φ_i⟩.  Independent of
    phi_from_lambda(|Ψ⟩⟨Ψ|) as a construction route; the two agree to 1e-10.
    """
    if psi.dim_a != psi.dim_b:
        raise ValueError("map construction requires equal factor dimensions")
    sd = schmidt_decompose(psi)
    amp = (sd.left * sd.coefficients) @ sd.right.T
    # matrix[(a,b),(c,d)] = amp[a,d]·conj(amp[b,c])
    n = psi.dim_a
    m4 = np.einsum("ad,bc->abcd", amp, amp.conj())
    return PhiMap(matrix=m4.reshape(n * n, n * n), dim=n)


def min_product_projection_value(lam: np.ndarray, n: int, samples: int = 10_000, seed: int = 0) -> float:
    """Minimum of Tr(L · P⊗Q) over seeded Haar samples of rank-1 product pairs.

    A sampled necessary check of the defining positivity; no claim of proof.
    """
    lam = as_complex_matrix(lam)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    ys = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    z = np.einsum("ka,kb->kab", xs, ys).reshape(samples, n * n)
    vals = np.einsum("ki,ij,kj->k", z.conj(), lam, z).real
    return float(vals.min())


def duality_gap(lam: np.ndarray, phi: PhiMap, samples: int = 100, seed: int = 0) -> float:
    """Max |Tr(L·P⊗Q) − Tr(P·Phi(Q))| over sampled rank-1 product pairs."""
    n = phi.dim
    lam = as_complex_matrix(lam)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    ys = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    z = np.einsum("ka,kb->kab", xs, ys).reshape(samples, n * n)
    lhs = np.einsum("ki,ij,kj->k", z.conj(), lam, z).real
    # Tr(P_k Phi(Q_k)) with vec(Q_k) the row-major flattening of y_k y_k†
    vec_q = np.einsum("kb,kd->kbd", ys, ys.conj()).reshape(samples, n * n)
    phis = (phi.matrix @ vec_q.T).T.reshape(samples, n, n)
    rhs = np.einsum("ka,kab,kb->k", xs.conj(), phis, xs).real
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class PurityReport:
    """Outcome of sampling Phi(Q) for rank-1 Q and checking numerical rank 1."""

    samples: int
    skipped: int
    max_second_eigenvalue_ratio: float

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_second_eigenvalue_ratio <= tol


def purity_profile(phi: PhiMap, samples: int, seed: int, skip_trace: float = 1e-8) -> PurityReport:
    """Ratio of the second-largest eigenvalue of Phi(Q) to its trace, sampled.

    Rank-1 Q with Tr(Phi(Q)) ≤ skip_trace are skipped and counted, matching
    the non-zero-probability premise of the purity statement.
    """
    rng = np.random.default_rng(seed)
    n = phi.dim
    worst = 0.0
    skipped = 0
    for _ in range(samples):
        y = random_state_vector(n, rng)
        out = phi(np.outer(y, y.conj()))
        tr = np.trace(out).real
        if tr <= skip_trace:
            skipped += 1
            continue
        w, _ = eig_hermitian(out)
        second = max(abs(w[0]), abs(w[-2])) if n >= 2 else 0.0
        worst = max(worst, second / tr)
    return PurityReport(samples=samples, skipped=skipped, max_second_eigenvalue_ratio=worst)


def verify_lemma1(psi: PureState, samples: int = 1000, seed: int = 0) -> PurityReport:
    """For a pure state, Phi(rank-1) is proportional to a rank-1 projection."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return purity_profile(phi_from_pure_state(psi), samples=samples, seed=seed)


@dataclass(frozen=True)
class ProportionalityReport:
    """Per-Q least-squares scalars c(Q) with Phi_L(Q) ≈ c(Q)·Phi_Ψ(Q)."""

    c_values: np.ndarray
    residuals: np.ndarray
    skipped: int

    def __post_init__(self):
        object.__setattr__(self, "c_values", np.asarray(self.c_values, dtype=float))
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))

    @property
    def mean_c(self) -> float:
        return float(self.c_values.mean())

    @property
    def max_c_deviation(self) -> float:
        return float(np.max(np.abs(self.c_values - self.c_values.mean())))

    @property
    def min_c(self) -> float:
        return float(self.c_values.min())

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def _fit_scale(reference: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """Least-squares c with target ≈ c·reference, plus HS residual."""
    denom = hs_inner(reference, reference).real
    c = hs_inner(reference, target).real / denom
    return c, hs_norm(target - c * reference)


def proportionality_profile(
    psi: PureState,
    lam: np.ndarray,
    samples: int = 200,
    seed: int = 0,
    skip_trace: float = 1e-8,
) -> ProportionalityReport:
    """Fit Phi_L(Q) = c(Q)·Phi_Ψ(Q) over sampled rank-1 Q and record residuals.

    Exact proportionality with constant c is what a convex split of a pure
    state's map forces; the fit plus residual turns that into a measurable
    quantity.  Q with Phi_Ψ(Q) numerically zero are skipped and counted.
    """
    if not is_maximally_entangled(psi):
        raise ValueError("proportionality profile requires a maximally entangled state")
    n = psi.dim_a
    phi_psi = phi_from_pure_state(psi)
    phi_lam = phi_from_lambda(lam, n)
    rng = np.random.default_rng(seed)
    cs, res = [], []
    skipped = 0
    for _ in range(samples):
        y = random_state_vector(n, rng)
        q = np.outer(y, y.conj())
        ref = phi_psi(q)
        if hs_norm(ref) <= skip_trace:
            skipped += 1
            continue
        c, r = _fit_scale(ref, phi_lam(q))
        cs.append(c)
        res.append(r)
    return ProportionalityReport(c_values=np.array(cs), residuals=np.array(res), skipped=skipped)


@dataclass(frozen=True)
class ConformalityReport:
    """Single-constant fit of Tr(Phi(A†)Phi(B)) = c·Tr(A†B) over sampled pairs."""

    is_hs_conformal: bool
    factor: float
    max_deviation: float
    pairs: int


def verify_lemma3(psi: PureState, pairs: int = 500, seed: int = 0, tol: float = 1e-8) -> ConformalityReport:
    """Check Hilbert-Schmidt conformality of the state's map on random pairs.

    Samples unit-HS-norm operator pairs (A, B), fits the single constant c in
    Tr(Phi(A†)Phi(B)) = c·Tr(A†B), and reports the worst deviation.  For a
    maximally entangled state the fit is exact and c = 1/n².
    """
    phi = phi_from_pure_state(psi)
    n = phi.dim
    rng = np.random.default_rng(seed)
    lhs = np.empty(pairs, dtype=np.complex128)
    rhs = np.empty(pairs, dtype=np.complex128)
    for k in range(pairs):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        lhs[k] = np.trace(phi(a.conj().T) @ phi(b))
        rhs[k] = hs_inner(a, b)
    factor = float((np.vdot(rhs, lhs) / np.vdot(rhs, rhs)).real)
    max_dev = float(np.max(np.abs(lhs - factor * rhs)))
    return ConformalityReport(
        is_hs_conformal=max_dev <= tol,
        factor=factor,
        max_deviation=max_dev,
        pairs=pairs,
    )


def ic_projectors(n: int) -> list[np.ndarray]:
    """Informationally complete family of n² rank-1 projectors on C^n.

    Basis projectors |i⟩⟨i|, then for each pair i<j the projectors onto
    (|i⟩+|j⟩)/√2 and (|i⟩+i|j⟩)/√2.  Spans the Hermitian operators.
    """
    if n < 2:
        raise ValueError("dimension must be >= 2")
    projs = []
    eye = np.eye(n, dtype=np.complex128)
    for i in range(n):
        projs.append(np.outer(eye[i], eye[i].conj()))
    for i in range(n):
        for j in range(i + 1, n):
            u = (eye[i] + eye[j]) / np.sqrt(2)
            projs.append(np.outer(u, u.conj()))
            w = (eye[i] + 1j * eye[j]) / np.sqrt(2)
            projs.append(np.outer(w, w.conj()))
    return projs


def reconstruct_lambda(
    prob_oracle: Callable[[np.ndarray, np.ndarray], float],
    n: int,
    trace_tol: float = 1e-6,
) -> np.ndarray:
    """Recover the unit-trace self-adjoint L from product-projection probabilities.

    Queries the oracle on the n²×n² informationally complete product pairs
    E_a ⊗ E_b and solves the linear system Tr(L · E_a⊗E_b) = oracle(E_a, E_b).
    Raises if the system is singular (oracle not linear / insufficient
    independence) or the recovered trace deviates from 1 by more than
    trace_tol (oracle inconsistent).
    """
    projs = ic_projectors(n)
    d = n * n
    rows = np.empty((d * d, d * d), dtype=np.complex128)
    vals = np.empty(d * d, dtype=float)
    k = 0
    for ea in projs:
        for eb in projs:
            rows[k] = kron(ea, eb).T.reshape(-1)
            vals[k] = float(prob_oracle(ea, eb))
            k += 1
    try:
        z = np.linalg.solve(rows, vals.astype(np.complex128))
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular reconstruction system: {exc}") from exc
    lam = z.reshape(d, d)
    herm_dev = np.max(np.abs(lam - lam.conj().T))
    if herm_dev > trace_tol:
        raise ValueError(f"oracle inconsistent: reconstructed operator non-Hermitian by {herm_dev:.3e}")
    lam = (lam + lam.conj().T) / 2
    tr = np.trace(lam).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"oracle inconsistent: reconstructed trace {tr} deviates from 1")
    return lam
