"""Dense complex linear algebra: the substrate for all operators and states."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_complex_matrix",
    "as_hermitian",
    "as_projector",
    "projector_rank",
    "kron",
    "hs_inner",
    "hs_norm",
    "eig_hermitian",
    "partial_trace",
    "partial_transpose",
    "hermitian_basis",
    "traceless_hermitian_basis",
]

HERMITIAN_TOL = 1e-12
PROJECTOR_TOL = 1e-10


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a C-ordered complex128 matrix, rejecting non-finite entries."""
    a = np.array(m, dtype=np.complex128, order="C")
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix entries must be finite")
    return a


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermiticity to `tol` and return the symmetrized (M + M†)/2."""
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"Hermitian matrix must be square, got {a.shape}")
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise ValueError(f"not Hermitian: max |M - M†| = {dev:.3e} > {tol:.1e}")
    return (a + a.conj().T) / 2


def as_projector(m, tol: float = PROJECTOR_TOL) -> np.ndarray:
    """Validate an orthogonal projector: Hermitian, idempotent, integer trace."""
    p = as_hermitian(m, tol=tol)
    dev = np.max(np.abs(p @ p - p))
    if dev > tol:
        raise ValueError(f"not idempotent: max |P² - P| = {dev:.3e} > {tol:.1e}")
    tr = np.trace(p).real
    if abs(tr - round(tr)) > tol:
        raise ValueError(f"projector trace {tr} not within {tol:.1e} of an integer")
    return p


def projector_rank(p: np.ndarray) -> int:
    """Rank of a validated projector, read off its trace."""
    return int(round(np.trace(p).real))


def kron(a, b) -> np.ndarray:
    """Tensor product A ⊗ B."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(A†B)."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    """Hilbert-Schmidt norm ‖A‖ = √Tr(A†A)."""
    return float(np.linalg.norm(as_complex_matrix(a)))


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues w ascending and eigenvectors in the
    columns of v.  Each column's phase is fixed so that its largest-magnitude
    component is real and positive, making the output reproducible.
    Raises numpy.linalg.LinAlgError if the solver fails to converge.
    """
    h = as_hermitian(m, tol=1e-10)
    w, v = np.linalg.eigh(h)
    lead = np.argmax(np.abs(v), axis=0)
    phases = v[lead, np.arange(v.shape[1])]
    phases = phases / np.abs(phases)
    v = v * phases.conj()
    return w, v


def _split4(m, dims: tuple[int, int]) -> np.ndarray:
    da, db = dims
    a = as_complex_matrix(m)
    if a.shape != (da * db, da * db):
        raise ValueError(f"matrix shape {a.shape} does not factor as ({da}·{db})²")
    return a.reshape(da, db, da, db)


def partial_trace(m, dims: tuple[int, int], side: str = "B") -> np.ndarray:
    """Trace out one factor of a bipartite operator on H_A ⊗ H_B.

    `side` names the factor removed: partial_trace(rho, dims, "B") is the
    reduced operator on A.
    """
    m4 = _split4(m, dims)
    if side == "B":
        return np.einsum("abcb->ac", m4)
    if side == "A":
        return np.einsum("abad->bd", m4)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def partial_transpose(m, dims: tuple[int, int], side: str = "B") -> np.ndarray:
    """Transpose the indices of one factor only.  Exact involution."""
    m4 = _split4(m, dims)
    if side == "B":
        out = m4.transpose(0, 3, 2, 1)
    elif side == "A":
        out = m4.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    da, db = dims
    return np.ascontiguousarray(out.reshape(da * db, da * db))


def hermitian_basis(d: int) -> np.ndarray:
    """HS-orthonormal Hermitian basis of d×d operators, identity direction first.

    Generalized Gell-Mann construction: normalized identity, symmetric and
    antisymmetric off-diagonal pairs, then diagonal (traceless) elements.
    Shape (d², d, d).
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    mats = [np.eye(d, dtype=np.complex128) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            mats.append(s)
            t = np.zeros((d, d), dtype=np.complex128)
            t[j, k] = -1j / np.sqrt(2)
            t[k, j] = 1j / np.sqrt(2)
            mats.append(t)
    for l in range(1, d):
        g = np.zeros((d, d), dtype=np.complex128)
        g[np.arange(l), np.arange(l)] = 1
        g[l, l] = -l
        mats.append(g / np.sqrt(l * (l + 1)))
    return np.stack(mats)


def traceless_hermitian_basis(d: int) -> np.ndarray:
    """The d²−1 traceless elements of hermitian_basis(d)."""
    return hermitian_basis(d)[1:]
