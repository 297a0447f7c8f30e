"""Leggett-type hidden-variable families on two qubits.

Each hidden variable is a pair of Bloch vectors (mu, nu).  The joint outcome
distribution for spin measurements along directions a, b is

    p(alpha, beta) = (1 + alpha·eta·(a·mu) + beta·eta·(b·nu) + alpha·beta·C) / 4,

with eta in (0, 1] and a correlation coefficient C constrained only by
positivity of the four outcomes.  The module provides the positivity bounds
on C, the averaged-correlation bound 2 − (2/3)|sin(phi/2)| and its quantum
counterpart 2|cos(phi/2)|, the crossing angle between them, a linear-program
maximization of the averaged correlation sum over discretized models, and an
adapter exposing the family through the hv-models checker interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from .hvmodels import CtxPair, HVModel, MeasurementContext
from .states import singlet

__all__ = [
    "as_bloch",
    "LeggettLambda",
    "DirectionTriple",
    "product_correlation",
    "quantum_singlet_correlation",
    "zero_correlation",
    "c_bounds",
    "leggett_joint",
    "leggett_bound",
    "quantum_lhs",
    "violation_region",
    "fibonacci_sphere",
    "LPResult",
    "max_lhs_lp",
    "qubit_projector",
    "direction_context",
    "leggett_hv_model",
]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


def as_bloch(v) -> np.ndarray:
    """Validate a unit 3-vector."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(a)} is not 1")
    return a


@dataclass(frozen=True, eq=False)
class LeggettLambda:
    """Hidden state: Bloch pair (mu, nu), purity parameter eta in (0, 1]."""

    mu: np.ndarray
    nu: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        mu, nu = as_bloch(self.mu), as_bloch(self.nu)
        mu.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        if not (0 < self.eta <= 1):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class DirectionTriple:
    """Direction sets (a_i, b_i, b'_i) for three planes, common angle phi.

    Invariants: angle(b_i, b'_i) = phi and a_i parallel to b_i + b'_i for
    each plane.  The latter makes the quantum averaged-correlation value
    exactly 2|cos(phi/2)|.
    """

    a: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    phi: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        bp = np.asarray(self.b_prime, dtype=float)
        if a.shape != (3, 3) or b.shape != (3, 3) or bp.shape != (3, 3):
            raise ValueError("direction sets must each hold three 3-vectors (rows)")
        for i in range(3):
            for row in (a[i], b[i], bp[i]):
                as_bloch(row)
            ang = np.arccos(np.clip(b[i] @ bp[i], -1, 1))
            if abs(ang - self.phi) > 1e-10:
                raise ValueError(f"plane {i}: angle(b, b') = {ang} != phi = {self.phi}")
            s = b[i] + bp[i]
            if np.linalg.norm(s) > 1e-12:
                cross = np.linalg.norm(np.cross(a[i], s / np.linalg.norm(s)))
                if cross > 1e-10:
                    raise ValueError(f"plane {i}: a not parallel to b + b'")
        for arr, name in ((a, "a"), (b, "b"), (bp, "b_prime")):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def canonical(cls, phi: float) -> "DirectionTriple":
        """Axis-aligned triple: a_i = e_i, b/b' split by phi in plane (e_i, e_{i+1})."""
        c, s = np.cos(phi / 2), np.sin(phi / 2)
        eye = np.eye(3)
        a = eye.copy()
        b = np.array([c * eye[i] + s * eye[(i + 1) % 3] for i in range(3)])
        bp = np.array([c * eye[i] - s * eye[(i + 1) % 3] for i in range(3)])
        return cls(a=a, b=b, b_prime=bp, phi=phi)

    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """The six (a_i, b) pairs entering the averaged correlation sum."""
        out = []
        for i in range(3):
            out.append((self.a[i], self.b[i]))
            out.append((self.a[i], self.b_prime[i]))
        return out


CorrelationFn = Callable[[LeggettLambda, np.ndarray, np.ndarray], float]


def product_correlation(lam: LeggettLambda, a, b) -> float:
    """Factorizing choice C = (eta a·mu)(eta b·nu); makes OI hold."""
    return float(lam.eta * (np.asarray(a) @ lam.mu) * lam.eta * (np.asarray(b) @ lam.nu))


def quantum_singlet_correlation(lam: LeggettLambda, a, b) -> float:
    """Singlet correlation −a·b (admissible only where the bounds allow)."""
    return float(-(np.asarray(a) @ np.asarray(b)))


def zero_correlation(lam: LeggettLambda, a, b) -> float:
    return 0.0


def c_bounds(lam: LeggettLambda, a, b) -> tuple[float, float]:
    """Positivity bounds on the correlation coefficient.

    With u = eta a·mu and v = eta b·nu the four outcome probabilities are
    non-negative iff |u+v| − 1 <= C <= 1 − |u−v|.
    """
    u = lam.eta * float(as_bloch(a) @ lam.mu)
    v = lam.eta * float(as_bloch(b) @ lam.nu)
    return abs(u + v) - 1, 1 - abs(u - v)


def leggett_joint(
    lam: LeggettLambda, c: CorrelationFn, a, b, alpha: int, beta: int
) -> float:
    """Outcome probability of the Leggett family.

    Rejects correlation values outside the positivity bounds, reporting the
    violating sign pair.  The four outcomes sum to 1 exactly.
    """
    if alpha not in (-1, 1) or beta not in (-1, 1):
        raise ValueError("outcome signs must be ±1")
    a = as_bloch(a)
    b = as_bloch(b)
    u = lam.eta * float(a @ lam.mu)
    v = lam.eta * float(b @ lam.nu)
    cval = float(c(lam, a, b))
    lo, hi = abs(u + v) - 1, 1 - abs(u - v)
    if cval < lo - 1e-12 or cval > hi + 1e-12:
        for sa in (1, -1):
            for sb in (1, -1):
                if 1 + sa * u + sb * v + sa * sb * cval < -1e-12:
                    raise ValueError(
                        f"correlation {cval} violates positivity at signs ({sa}, {sb})"
                    )
        raise ValueError(f"correlation {cval} outside positivity bounds [{lo}, {hi}]")
    return (1 + alpha * u + beta * v + alpha * beta * cval) / 4


def leggett_bound(phi: float) -> float:
    """Upper bound 2 − (2/3)|sin(phi/2)| on the averaged correlation sum."""
    if not (0 <= phi < 2 * np.pi):
        raise ValueError("phi must lie in [0, 2π)")
    return 2 - (2 / 3) * abs(np.sin(phi / 2))


def quantum_lhs(d: DirectionTriple) -> float:
    """Quantum value of the averaged correlation sum with singlet correlations."""
    total = 0.0
    for i in range(3):
        cb = -(d.a[i] @ d.b[i])
        cbp = -(d.a[i] @ d.b_prime[i])
        total += abs(cb + cbp)
    return total / 3


def violation_region(tol: float = 1e-12) -> tuple[float, float]:
    """The angle interval (0, phi*) where the quantum value exceeds the bound.

    phi* solves 2cos(phi/2) = 2 − (2/3)sin(phi/2), found by bisection.
    """
    def gap(phi: float) -> float:
        return 2 * np.cos(phi / 2) - leggett_bound(phi)

    lo, hi = 1e-9, np.pi
    if gap(lo) <= 0 or gap(hi) >= 0:
        raise RuntimeError("bisection bracket invalid")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.0, (lo + hi) / 2


def fibonacci_sphere(count: int, seed: int = 0) -> np.ndarray:
    """Antipodally symmetric Fibonacci lattice of `count` unit vectors.

    count must be even: count/2 lattice points plus their antipodes, rotated
    by a seeded Haar rotation.  The exact antipodal symmetry makes the flat
    average-marginal constraint feasible with uniform weights.
    """
    if count < 2 or count % 2 != 0:
        raise ValueError("grid point count must be even and >= 2")
    half = count // 2
    k = np.arange(half)
    golden = (1 + np.sqrt(5)) / 2
    z = 1 - (k + 0.5) / half  # upper hemisphere band z in (0, 1)
    theta = 2 * np.pi * k / golden
    r = np.sqrt(np.clip(1 - z * z, 0, None))
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 3))
    q, rr = np.linalg.qr(m)
    q = q * np.sign(np.diagonal(rr))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    pts = pts @ q.T
    return np.vstack([pts, -pts])


@dataclass(frozen=True)
class LPResult:
    """Solution of the discretized maximization: value, weights, correlations."""

    value: float
    weights: np.ndarray
    c_values: np.ndarray  # shape (G, 6): chosen C per grid point and pair
    branch: tuple[int, int, int]
    grid_points: int


def max_lhs_lp(
    d: DirectionTriple,
    grid: np.ndarray,
    eta: float = 1.0,
    nu: np.ndarray | None = None,
) -> LPResult:
    """Maximize the averaged correlation sum over discretized Leggett models.

    Decision variables are the hidden-variable weights rho(lambda) on the grid
    (mu = grid row, nu = −mu unless given).  For a fixed choice of the three
    outer absolute-value signs the per-lambda correlations decouple and sit at
    their positivity bounds, so each branch is a linear program in rho alone:

        maximize (1/3) Σ_i sigma_i Σ_g rho_g (C_i(g) + C'_i(g))
        s.t. rho >= 0, Σ rho = 1, Σ_g rho_g mu_g = 0 (and Σ rho_g nu_g = 0),

    with C at the upper bound where sigma_i = +1 and at the lower bound where
    sigma_i = −1.  All eight branches are solved and the best one returned.
    """
    mu = np.asarray(grid, dtype=float)
    if mu.ndim != 2 or mu.shape[1] != 3:
        raise ValueError("grid must have shape (G, 3)")
    paired = nu is None
    nu = -mu if paired else np.asarray(nu, dtype=float)
    if nu.shape != mu.shape:
        raise ValueError("nu grid shape must match mu grid")
    g = mu.shape[0]
    pairs = d.pairs()
    lo = np.empty((g, 6))
    hi = np.empty((g, 6))
    for p, (a, b) in enumerate(pairs):
        u = eta * (mu @ a)
        v = eta * (nu @ b)
        lo[:, p] = np.abs(u + v) - 1
        hi[:, p] = 1 - np.abs(u - v)

    # with nu = -mu the nu marginal rows duplicate the mu rows; drop them
    rows = [np.ones(g), mu.T] if paired else [np.ones(g), mu.T, nu.T]
    a_eq = np.vstack(rows)
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[0] = 1.0

    best: LPResult | None = None
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                sigma = (s0, s1, s2)
                coef = np.zeros(g)
                for i in range(3):
                    cols = (2 * i, 2 * i + 1)
                    if sigma[i] == 1:
                        coef += hi[:, cols[0]] + hi[:, cols[1]]
                    else:
                        coef -= lo[:, cols[0]] + lo[:, cols[1]]
                res = linprog(-coef / 3, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
                if not res.success:
                    raise ValueError(f"marginal constraint infeasible on this grid: {res.message}")
                value = -res.fun
                if best is None or value > best.value:
                    cvals = np.empty((g, 6))
                    for i in range(3):
                        pick = hi if sigma[i] == 1 else lo
                        cvals[:, 2 * i] = pick[:, 2 * i]
                        cvals[:, 2 * i + 1] = pick[:, 2 * i + 1]
                    best = LPResult(
                        value=float(value),
                        weights=res.x,
                        c_values=cvals,
                        branch=sigma,
                        grid_points=g,
                    )
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# hv-models adapter


def qubit_projector(u) -> np.ndarray:
    """Spin projector (1 + u·σ)/2 onto Bloch direction u."""
    u = as_bloch(u)
    return (np.eye(2, dtype=np.complex128) + np.einsum("i,ijk->jk", u, PAULI)) / 2


def direction_context(u, label: str) -> MeasurementContext:
    """The qubit context {P_{+u}, P_{−u}} for measuring along u."""
    u = as_bloch(u)
    return MeasurementContext(
        projectors=(qubit_projector(u), qubit_projector(-u)), outcome=0, label=label
    )


def _bloch_of_projector(p: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ijk,kj->i", PAULI, p))


def leggett_hv_model(
    lambdas: list[LeggettLambda],
    weights: np.ndarray,
    c: CorrelationFn,
) -> HVModel:
    """Expose a Leggett family as an HVModel of the singlet state.

    Outcomes are labelled by projections: the probability of outcome
    projectors (P, Q) is the family's formula evaluated at their Bloch
    vectors, so there is no context dependence whatever.
    """

    def joint(lam: LeggettLambda, ctx_a, ctx_b, i, j):
        ua = _bloch_of_projector(ctx_a.projectors[i])
        ub = _bloch_of_projector(ctx_b.projectors[j])
        return leggett_joint(lam, c, ua, ub, 1, 1)

    return HVModel(
        rho=singlet().density(),
        dims=(2, 2),
        lambdas=tuple(lambdas),
        weights=np.asarray(weights, dtype=float),
        joint=joint,
    )


def leggett_context_pairs(d: DirectionTriple) -> list[CtxPair]:
    """Context pairs from a direction triple: a_i on A, b_i and b'_i on B.

    Each direction also appears with its antipode under a distinct label:
    measuring along −u uses the same projector set as +u, so far-side
    context pairs share outcome projectors and the conditional and joint
    non-contextuality comparisons are non-vacuous.
    """
    ctx_a = [direction_context(d.a[i], f"A:a{i}") for i in range(3)]
    ctx_a += [direction_context(-d.a[i], f"A:-a{i}") for i in range(3)]
    ctx_b = [direction_context(d.b[i], f"B:b{i}") for i in range(3)]
    ctx_b += [direction_context(-d.b[i], f"B:-b{i}") for i in range(3)]
    ctx_b += [direction_context(d.b_prime[i], f"B:bp{i}") for i in range(3)]
    return [(a, b) for a in ctx_a for b in ctx_b]
