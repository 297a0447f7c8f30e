"""Convex-decomposition feasibility search over influence-free operators.

A maximally entangled state admits no non-trivial convex split
rho = eta·L1 + (1−eta)·L2 into unit-trace self-adjoint operators that stay
non-negative on all product projections.  The search parameterizes candidate
splits as L1 = rho + (1−eta)·t·D, L2 = rho − eta·t·D with a traceless
Hermitian direction D, which satisfies the convex identity exactly and turns
feasibility against a sampled set of product projections into linear
constraints in t.  The largest feasible t shrinks toward zero as the sample
grows when rho is maximally entangled, and stays bounded away from zero for
an interior comparator such as the maximally mixed state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .influence import phi_from_lambda, phi_from_pure_state, proportionality_profile
from .linalg import hs_inner, hs_norm, traceless_hermitian_basis
from .states import PureState, is_maximally_entangled

__all__ = [
    "DecompositionProblem",
    "FeasibilityCertificate",
    "sample_product_pairs",
    "product_values",
    "max_perturbation",
    "perturbation_ladder",
    "perturbation_ladder_certificates",
    "ConstancyReport",
    "verify_constancy_chain",
    "basis_image_conditioning",
]


@dataclass(frozen=True)
class DecompositionProblem:
    """Feasibility search setup for one target state.

    `policy` selects the perturbation direction: "random" draws `directions`
    seeded unit-HS-norm traceless Hermitian directions and solves the exact
    one-dimensional feasibility problem for each; "lp" additionally maximizes
    seeded linear probes over the full traceless operator basis, which yields
    the per-sample-set exact maximum along every probe.
    """

    rho: np.ndarray
    n: int
    eta: float = 0.5
    samples: int = 1000
    seed: int = 0
    policy: str = "random"
    directions: int = 1
    delta: np.ndarray | None = None

    def __post_init__(self):
        if not (0 < self.eta < 1):
            raise ValueError("eta must be strictly interior to (0, 1)")
        if self.samples < self.n**4:
            raise ValueError(
                f"need at least n^4 = {self.n ** 4} samples (informationally complete)"
            )
        if self.policy not in ("random", "lp", "given"):
            raise ValueError(f"unknown direction policy {self.policy!r}")
        if self.policy == "given" and self.delta is None:
            raise ValueError("policy 'given' requires a delta direction")


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Largest feasible perturbation found, with its direction and residuals."""

    t_max: float
    delta: np.ndarray
    min_residual: float
    samples: int
    eta: float
    seed: int
    policy: str


def sample_product_pairs(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` Haar rank-1 product vectors x⊗y on C^n ⊗ C^n, rows of shape n²."""
    xs = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    ys = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    return np.einsum("ka,kb->kab", xs, ys).reshape(count, n * n)


def product_values(op: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Tr(op · P⊗Q) for each product vector row of z (quadratic forms)."""
    return np.einsum("ki,ij,kj->k", z.conj(), op, z).real


def _t_max_for_direction(r: np.ndarray, dvals: np.ndarray, eta: float) -> float:
    """Exact largest t >= 0 keeping r + (1−eta)·t·d >= 0 and r − eta·t·d >= 0."""
    bounds = []
    neg = dvals < 0
    pos = dvals > 0
    if np.any(neg):
        bounds.append(np.min(r[neg] / ((1 - eta) * -dvals[neg])))
    if np.any(pos):
        bounds.append(np.min(r[pos] / (eta * dvals[pos])))
    if not bounds:
        return math.inf
    return float(max(0.0, min(bounds)))


def _random_traceless_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    d = n * n
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (z + z.conj().T) / 2
    h -= np.trace(h).real / d * np.eye(d)
    return h / hs_norm(h)


def _lp_directions(
    r: np.ndarray, z: np.ndarray, n: int, eta: float, rng: np.random.Generator, probes: int
) -> tuple[float, np.ndarray]:
    """Maximize seeded linear probes over the sampled feasibility polytope.

    Variables are coefficients over the orthonormal traceless Hermitian basis;
    returns the feasible perturbation of largest HS norm found.
    """
    basis = traceless_hermitian_basis(n * n)
    nb = basis.shape[0]
    gmat = np.empty((len(r), nb))
    for m in range(nb):
        gmat[:, m] = product_values(basis[m], z)
    a_ub = np.vstack([-(1 - eta) * gmat, eta * gmat])
    b_ub = np.concatenate([r, r])
    best_norm = 0.0
    best_x = np.zeros(nb)
    for _ in range(probes):
        w = rng.standard_normal(nb)
        w /= np.linalg.norm(w)
        res = linprog(-w, A_ub=a_ub, b_ub=b_ub, bounds=(None, None), method="highs")
        if res.status == 3:
            raise ValueError("degenerate sample: probe unbounded - increase N")
        if not res.success:
            raise ValueError(f"LP failed: {res.message}")
        nrm = float(np.linalg.norm(res.x))
        if nrm > best_norm:
            best_norm = nrm
            best_x = res.x
    delta = np.einsum("m,mij->ij", best_x, basis)
    return best_norm, delta


def max_perturbation(p: DecompositionProblem) -> FeasibilityCertificate:
    """Search for the largest feasible convex-split perturbation of rho.

    Samples `p.samples` product rank-1 pairs, then maximizes t (or the probe
    functionals for policy "lp") subject to both split halves staying
    non-negative on every sample.  Residuals are re-checked independently at
    the returned t.
    """
    rng = np.random.default_rng(p.seed)
    if p.policy == "given":
        deltas = [np.asarray(p.delta, dtype=np.complex128)]
    elif p.policy == "random":
        deltas = [_random_traceless_direction(p.n, rng) for _ in range(p.directions)]
    else:
        deltas = []
    z = sample_product_pairs(p.n, p.samples, rng)
    r = product_values(p.rho, z)

    best_t = -1.0
    best_delta = None
    for delta in deltas:
        dvals = product_values(delta, z)
        t = _t_max_for_direction(r, dvals, p.eta)
        if math.isinf(t):
            raise ValueError("degenerate sample: all constraints inactive - increase N")
        if t > best_t:
            best_t, best_delta = t, delta

    if p.policy == "lp":
        norm, delta = _lp_directions(r, z, p.n, p.eta, rng, probes=max(1, p.directions))
        if norm > best_t:
            best_t, best_delta = norm, delta / max(norm, 1e-300)

    assert best_delta is not None
    scaled = best_t * best_delta
    res1 = r + (1 - p.eta) * product_values(scaled, z)
    res2 = r - p.eta * product_values(scaled, z)
    min_residual = float(min(res1.min(), res2.min()))
    return FeasibilityCertificate(
        t_max=best_t,
        delta=best_delta,
        min_residual=min_residual,
        samples=p.samples,
        eta=p.eta,
        seed=p.seed,
        policy=p.policy,
    )


def perturbation_ladder(
    rho: np.ndarray,
    n: int,
    eta: float,
    ladder: list[int],
    seeds: list[int],
) -> dict[int, list[float]]:
    """t_max per sample-count prefix, for each seed.

    Samples are nested: each seed draws max(ladder) product pairs once and
    evaluates every rung on a prefix, so t_max is non-increasing along the
    ladder by construction (a min over a growing constraint set).
    """
    return {
        rung: [c["t_max"] for c in certs]
        for rung, certs in perturbation_ladder_certificates(rho, n, eta, ladder, seeds).items()
    }


def perturbation_ladder_certificates(
    rho: np.ndarray,
    n: int,
    eta: float,
    ladder: list[int],
    seeds: list[int],
) -> dict[int, list[dict]]:
    """Nested-prefix ladder with per-rung recheck residuals, one record per seed."""
    ladder = sorted(ladder)
    out: dict[int, list[dict]] = {rung: [] for rung in ladder}
    for seed in seeds:
        rng = np.random.default_rng(seed)
        delta = _random_traceless_direction(n, rng)
        z = sample_product_pairs(n, ladder[-1], rng)
        r = product_values(rho, z)
        dvals = product_values(delta, z)
        for rung in ladder:
            t = _t_max_for_direction(r[:rung], dvals[:rung], eta)
            if math.isinf(t):
                raise ValueError("degenerate sample: all constraints inactive - increase N")
            res1 = r[:rung] + (1 - eta) * t * dvals[:rung]
            res2 = r[:rung] - eta * t * dvals[:rung]
            out[rung].append(
                {
                    "seed": seed,
                    "t_max": t,
                    "min_residual": float(min(res1.min(), res2.min())),
                }
            )
    return out


@dataclass(frozen=True)
class ConstancyReport:
    """Proportionality constants across an operator basis and random probes."""

    c_values: np.ndarray
    max_c_deviation: float
    mean_c: float
    max_residual: float
    hs_distance_to_scaled_state: float


def verify_constancy_chain(
    psi: PureState,
    lam: np.ndarray,
    basis: list[np.ndarray],
    samples: int = 50,
    seed: int = 0,
) -> ConstancyReport:
    """Fit per-element constants c(Q_i) over a projector basis plus random probes.

    When the fit is exact everywhere with a single constant, linearity forces
    the operator to be that multiple of |Ψ⟩⟨Ψ|, and the unit-trace
    normalization pins the constant to 1; the report carries the HS distance
    to mean_c·|Ψ⟩⟨Ψ| so that chain is checkable numerically.
    """
    if not is_maximally_entangled(psi):
        raise ValueError("constancy chain requires a maximally entangled state")
    n = psi.dim_a
    flat = np.array([np.asarray(q).reshape(-1) for q in basis])
    if len(basis) < n * n or np.linalg.matrix_rank(flat, tol=1e-10) < n * n:
        raise ValueError("basis does not span the operator space")
    phi_psi = phi_from_pure_state(psi)
    phi_lam = phi_from_lambda(lam, n)
    cs = []
    res = []
    for q in basis:
        ref = phi_psi(q)
        target = phi_lam(q)
        denom = hs_inner(ref, ref).real
        c = hs_inner(ref, target).real / denom
        cs.append(c)
        res.append(hs_norm(target - c * ref))
    profile = proportionality_profile(psi, lam, samples=samples, seed=seed)
    cs = np.array(list(cs) + list(profile.c_values))
    res = np.array(list(res) + list(profile.residuals))
    mean_c = float(cs.mean())
    dist = hs_norm(np.asarray(lam) - mean_c * psi.density())
    return ConstancyReport(
        c_values=cs,
        max_c_deviation=float(np.max(np.abs(cs - mean_c))),
        mean_c=mean_c,
        max_residual=float(res.max()),
        hs_distance_to_scaled_state=float(dist),
    )


def basis_image_conditioning(
    psi: PureState, basis: list[np.ndarray]
) -> tuple[float, bool]:
    """Gram conditioning of {Phi_Ψ(Q_i)} under the HS inner product.

    Returns (condition number of the image Gram matrix, flag); the flag is
    true iff the smallest singular value exceeds 1e-10, i.e. the image is
    itself a basis.  For maximally entangled Ψ conformality makes the image
    Gram a positive multiple of the input Gram, so the conditioning matches.
    """
    phi = phi_from_pure_state(psi)
    images = [phi(q) for q in basis]
    k = len(images)
    gram = np.empty((k, k), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            gram[i, j] = hs_inner(images[i], images[j])
    sv = np.linalg.svd(gram, compute_uv=False)
    smallest = float(sv[-1])
    cond = float(sv[0] / sv[-1]) if smallest > 0 else math.inf
    return cond, smallest > 1e-10
