"""Hidden-variable models as first-class objects, plus condition checkers.

A model assigns, to every hidden variable λ and every pair of local
measurement contexts, a joint outcome distribution over the two contexts'
projectors.  The checkers turn the locality and non-contextuality conditions
into worst-witness reports:

  OI          joint factorizes into the two in-context marginals
  PI          a side's marginal does not depend on the far context
  CPI         a side's outcome-conditioned probabilities do not depend on
              the far context
  REPRODUCTION  the λ-average matches the Born probabilities of the model's
              quantum state
  TRIVIALITY  every single λ already matches the Born probabilities
  MARGINAL-NC marginals agree across all context pairs containing a projector
  JOINT-NC    joints agree across all context pairs containing both projectors
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .linalg import as_projector
from .states import born_joint

__all__ = [
    "MeasurementContext",
    "HVModel",
    "ConditionReport",
    "check_oi",
    "check_pi",
    "check_cpi",
    "check_reproduction",
    "check_triviality",
    "check_marginal_noncontextuality",
    "check_joint_noncontextuality",
    "ALL_CHECKS",
    "run_all_checks",
    "trivial_quantum_model",
    "basis_context",
    "rotated_context",
    "TabularModel",
    "random_factorized_model",
    "random_noncontextual_model",
    "planted_signalling_model",
    "planted_contextual_joint_model",
]

COMPLETENESS_TOL = 1e-10
PROB_SLACK = 1e-12
MATCH_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementContext:
    """A complete projective measurement: orthonormal projectors summing to 1.

    `outcome` is the index of the distinguished projector the context is set
    up to measure; `label` is a stable identifier used in witnesses.
    """

    projectors: tuple[np.ndarray, ...]
    outcome: int
    label: str

    def __post_init__(self):
        projs = tuple(as_projector(p) for p in self.projectors)
        dim = projs[0].shape[0]
        total = sum(projs)
        if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
            raise ValueError(f"context {self.label!r}: projectors do not sum to identity")
        for i, pi in enumerate(projs):
            for j, pj in enumerate(projs):
                expect = pi if i == j else 0
                if np.max(np.abs(pi @ pj - expect)) > COMPLETENESS_TOL:
                    raise ValueError(f"context {self.label!r}: projectors {i},{j} not orthogonal")
        if not (0 <= self.outcome < len(projs)):
            raise ValueError(f"context {self.label!r}: outcome index {self.outcome} out of range")
        for p in projs:
            p.setflags(write=False)
        object.__setattr__(self, "projectors", projs)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True)
class HVModel:
    """Hidden-variable model of a bipartite quantum state.

    `joint(lam, ctx_a, ctx_b, i, j)` is the per-λ probability of outcomes
    (i, j) when the two sides measure the given contexts.  `weights[k]` is
    the distribution over `lambdas[k]` and must sum to 1.
    """

    rho: np.ndarray
    dims: tuple[int, int]
    lambdas: tuple[Any, ...]
    weights: np.ndarray
    joint: Callable[[Any, MeasurementContext, MeasurementContext, int, int], float]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.lambdas):
            raise ValueError("weights and lambdas length mismatch")
        if np.any(w < 0):
            raise ValueError("hidden-variable weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"hidden-variable weights sum to {w.sum()}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def table(self, lam, ctx_a: MeasurementContext, ctx_b: MeasurementContext) -> np.ndarray:
        """Full outcome table for one (λ, context pair); validates normalization."""
        t = np.empty((len(ctx_a), len(ctx_b)))
        for i in range(len(ctx_a)):
            for j in range(len(ctx_b)):
                t[i, j] = self.joint(lam, ctx_a, ctx_b, i, j)
        if t.min() < -PROB_SLACK or t.max() > 1 + PROB_SLACK:
            raise ValueError(
                f"model probability outside [0,1] at λ={lam!r}, contexts "
                f"({ctx_a.label!r}, {ctx_b.label!r})"
            )
        if abs(t.sum() - 1.0) > 1e-10:
            raise ValueError(
                f"model outcome table sums to {t.sum()} at λ={lam!r}, contexts "
                f"({ctx_a.label!r}, {ctx_b.label!r})"
            )
        return t


@dataclass(frozen=True)
class ConditionReport:
    """Worst-witness verdict of one condition check."""

    condition: str
    violation: float
    witness: tuple | None
    tol: float
    skipped: int = 0
    comparisons: int = 0

    @property
    def passed(self) -> bool:
        return self.violation <= self.tol

    @property
    def inconclusive(self) -> bool:
        return self.comparisons == 0


CtxPair = tuple[MeasurementContext, MeasurementContext]


def _match_index(registry: list[np.ndarray], p: np.ndarray) -> int:
    """Index of `p` in the registry, matching numerically; appends when new."""
    for k, q in enumerate(registry):
        if p.shape == q.shape and np.max(np.abs(p - q)) <= MATCH_TOL:
            return k
    registry.append(p)
    return len(registry) - 1


def _worse(best, candidate):
    return candidate if candidate[0] > best[0] else best


def check_oi(m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10) -> ConditionReport:
    """Outcome independence: joint = product of the two in-context marginals."""
    worst = (0.0, None)
    comparisons = 0
    for lam in m.lambdas:
        for ctx_a, ctx_b in ctx_pairs:
            t = m.table(lam, ctx_a, ctx_b)
            pa = t.sum(axis=1)
            pb = t.sum(axis=0)
            gap = np.abs(t - np.outer(pa, pb))
            comparisons += gap.size
            i, j = np.unravel_index(np.argmax(gap), gap.shape)
            worst = _worse(worst, (float(gap[i, j]), (lam, ctx_a.label, ctx_b.label, int(i), int(j))))
    return ConditionReport("OI", worst[0], worst[1], tol, comparisons=comparisons)


def _grouped_pairs(ctx_pairs: list[CtxPair], side: str) -> dict[str, list[CtxPair]]:
    """Group context pairs by the near-side context label (side = the fixed one)."""
    groups: dict[str, list[CtxPair]] = {}
    for pair in ctx_pairs:
        key = pair[0].label if side == "A" else pair[1].label
        groups.setdefault(key, []).append(pair)
    return groups


def check_pi(m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10) -> ConditionReport:
    """Parameter independence: per-λ marginals do not depend on the far context."""
    worst = (0.0, None)
    comparisons = 0
    for side in ("A", "B"):
        groups = _grouped_pairs(ctx_pairs, side)
        for key, g in groups.items():
            far_labels = {(p[1] if side == "A" else p[0]).label for p in g}
            if len(far_labels) < 2:
                raise ValueError(
                    f"inconclusive: {side}-side context {key!r} has fewer than 2 far-side contexts"
                )
        for lam in m.lambdas:
            for pairs in groups.values():
                margs = []
                for ctx_a, ctx_b in pairs:
                    t = m.table(lam, ctx_a, ctx_b)
                    margs.append(t.sum(axis=1) if side == "A" else t.sum(axis=0))
                for u in range(len(pairs)):
                    for v in range(u + 1, len(pairs)):
                        gap = np.abs(margs[u] - margs[v])
                        comparisons += gap.size
                        i = int(np.argmax(gap))
                        far_u = pairs[u][1].label if side == "A" else pairs[u][0].label
                        far_v = pairs[v][1].label if side == "A" else pairs[v][0].label
                        near = pairs[u][0].label if side == "A" else pairs[u][1].label
                        worst = _worse(worst, (float(gap[i]), (lam, side, near, far_u, far_v, i)))
    return ConditionReport("PI", worst[0], worst[1], tol, comparisons=comparisons)


def check_cpi(
    m: HVModel,
    ctx_pairs: list[CtxPair],
    tol: float = 1e-10,
    cond_floor: float = 1e-8,
) -> ConditionReport:
    """Conditional parameter independence: far-outcome-conditioned probabilities
    do not depend on the far context.

    Compares p(P|Q) across far contexts that both contain Q (matched
    numerically); tuples with conditioning probability below cond_floor are
    skipped and counted.
    """
    worst = (0.0, None)
    comparisons = 0
    skipped = 0
    for side in ("A", "B"):
        groups = _grouped_pairs(ctx_pairs, side)
        for lam in m.lambdas:
            for pairs in groups.values():
                if len(pairs) < 2:
                    continue
                # conditioned[c_key][(near_outcome, far_projector_id)] per far context
                registry: list[np.ndarray] = []
                seen: dict[tuple[int, int], list[tuple[float, str]]] = {}
                for ctx_a, ctx_b in pairs:
                    t = m.table(lam, ctx_a, ctx_b)
                    near_ctx, far_ctx = (ctx_a, ctx_b) if side == "A" else (ctx_b, ctx_a)
                    tn = t if side == "A" else t.T  # rows = near outcomes
                    far_marg = tn.sum(axis=0)
                    for j, q in enumerate(far_ctx.projectors):
                        qid = _match_index(registry, q)
                        if far_marg[j] < cond_floor:
                            skipped += len(near_ctx)
                            continue
                        for i in range(len(near_ctx)):
                            cond = tn[i, j] / far_marg[j]
                            seen.setdefault((i, qid), []).append((cond, far_ctx.label))
                for (i, qid), entries in seen.items():
                    for u in range(len(entries)):
                        for v in range(u + 1, len(entries)):
                            if entries[u][1] == entries[v][1]:
                                continue
                            gap = abs(entries[u][0] - entries[v][0])
                            comparisons += 1
                            worst = _worse(
                                worst,
                                (gap, (lam, side, i, qid, entries[u][1], entries[v][1])),
                            )
    if comparisons == 0:
        raise ValueError("inconclusive: all conditioning tuples skipped or incomparable")
    return ConditionReport("CPI", worst[0], worst[1], tol, skipped=skipped, comparisons=comparisons)


def _born_table(m: HVModel, ctx_a: MeasurementContext, ctx_b: MeasurementContext) -> np.ndarray:
    t = np.empty((len(ctx_a), len(ctx_b)))
    for i, p in enumerate(ctx_a.projectors):
        for j, q in enumerate(ctx_b.projectors):
            t[i, j] = born_joint(m.rho, p, q)
    return t


def check_reproduction(m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10) -> ConditionReport:
    """λ-averaged probabilities must reproduce the Born probabilities of rho."""
    worst = (0.0, None)
    comparisons = 0
    for ctx_a, ctx_b in ctx_pairs:
        avg = np.zeros((len(ctx_a), len(ctx_b)))
        for lam, w in zip(m.lambdas, m.weights):
            avg += w * m.table(lam, ctx_a, ctx_b)
        gap = np.abs(avg - _born_table(m, ctx_a, ctx_b))
        comparisons += gap.size
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        worst = _worse(worst, (float(gap[i, j]), (ctx_a.label, ctx_b.label, int(i), int(j))))
    return ConditionReport("REPRODUCTION", worst[0], worst[1], tol, comparisons=comparisons)


def check_triviality(m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10) -> ConditionReport:
    """A model is trivial when every λ already matches the Born probabilities."""
    worst = (0.0, None)
    comparisons = 0
    for ctx_a, ctx_b in ctx_pairs:
        born = _born_table(m, ctx_a, ctx_b)
        for lam in m.lambdas:
            gap = np.abs(m.table(lam, ctx_a, ctx_b) - born)
            comparisons += gap.size
            i, j = np.unravel_index(np.argmax(gap), gap.shape)
            worst = _worse(worst, (float(gap[i, j]), (lam, ctx_a.label, ctx_b.label, int(i), int(j))))
    return ConditionReport("TRIVIALITY", worst[0], worst[1], tol, comparisons=comparisons)


def check_marginal_noncontextuality(
    m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10
) -> ConditionReport:
    """Spread of a projector's marginal across all context pairs containing it."""
    worst = (0.0, None)
    comparisons = 0
    for side in ("A", "B"):
        for lam in m.lambdas:
            registry: list[np.ndarray] = []
            values: dict[int, list[float]] = {}
            for ctx_a, ctx_b in ctx_pairs:
                t = m.table(lam, ctx_a, ctx_b)
                near = ctx_a if side == "A" else ctx_b
                marg = t.sum(axis=1) if side == "A" else t.sum(axis=0)
                for i, p in enumerate(near.projectors):
                    values.setdefault(_match_index(registry, p), []).append(float(marg[i]))
            for pid, vals in values.items():
                if len(vals) < 2:
                    continue
                spread = max(vals) - min(vals)
                comparisons += len(vals)
                worst = _worse(worst, (spread, (lam, side, pid)))
    return ConditionReport("MARGINAL-NC", worst[0], worst[1], tol, comparisons=comparisons)


def check_joint_noncontextuality(
    m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10
) -> ConditionReport:
    """Spread of a joint probability across all context pairs containing both projectors."""
    worst = (0.0, None)
    comparisons = 0
    for lam in m.lambdas:
        reg_a: list[np.ndarray] = []
        reg_b: list[np.ndarray] = []
        values: dict[tuple[int, int], list[float]] = {}
        for ctx_a, ctx_b in ctx_pairs:
            t = m.table(lam, ctx_a, ctx_b)
            ids_a = [_match_index(reg_a, p) for p in ctx_a.projectors]
            ids_b = [_match_index(reg_b, q) for q in ctx_b.projectors]
            for i, pa in enumerate(ids_a):
                for j, qb in enumerate(ids_b):
                    values.setdefault((pa, qb), []).append(float(t[i, j]))
        for key, vals in values.items():
            if len(vals) < 2:
                continue
            spread = max(vals) - min(vals)
            comparisons += len(vals)
            worst = _worse(worst, (spread, (lam, key[0], key[1])))
    return ConditionReport("JOINT-NC", worst[0], worst[1], tol, comparisons=comparisons)


ALL_CHECKS = {
    "OI": check_oi,
    "PI": check_pi,
    "CPI": check_cpi,
    "REPRODUCTION": check_reproduction,
    "TRIVIALITY": check_triviality,
    "MARGINAL-NC": check_marginal_noncontextuality,
    "JOINT-NC": check_joint_noncontextuality,
}


def run_all_checks(
    m: HVModel, ctx_pairs: list[CtxPair], tol: float = 1e-10, cond_floor: float = 1e-8
) -> dict[str, ConditionReport | ValueError]:
    """Run every checker; inconclusive preconditions surface as the ValueError."""
    out: dict[str, ConditionReport | ValueError] = {}
    for name, fn in ALL_CHECKS.items():
        try:
            if name == "CPI":
                out[name] = fn(m, ctx_pairs, tol, cond_floor)
            else:
                out[name] = fn(m, ctx_pairs, tol)
        except ValueError as exc:
            out[name] = exc
    return out


# ---------------------------------------------------------------------------
# Built-in model families and context constructors


def trivial_quantum_model(rho: np.ndarray, dims: tuple[int, int], n_lambdas: int = 1) -> HVModel:
    """The model whose every λ predicts exactly the Born probabilities."""

    def joint(lam, ctx_a, ctx_b, i, j):
        return born_joint(rho, ctx_a.projectors[i], ctx_b.projectors[j])

    w = np.full(n_lambdas, 1.0 / n_lambdas)
    return HVModel(rho=rho, dims=dims, lambdas=tuple(range(n_lambdas)), weights=w, joint=joint)


def basis_context(dim: int, label: str, outcome: int = 0) -> MeasurementContext:
    """The computational-basis context on C^dim."""
    eye = np.eye(dim, dtype=np.complex128)
    projs = tuple(np.outer(eye[i], eye[i].conj()) for i in range(dim))
    return MeasurementContext(projectors=projs, outcome=outcome, label=label)


def rotated_context(
    base: MeasurementContext, keep: int, rng: np.random.Generator, label: str
) -> MeasurementContext:
    """A context sharing projector `keep` with `base`, the complement rotated.

    Draws a Haar unitary on the orthogonal complement of the kept projector's
    range, producing a genuinely different context containing the same
    projector (needs dim >= 3 to differ).
    """
    kept = base.projectors[keep]
    others = [p for i, p in enumerate(base.projectors) if i != keep]
    vecs = []
    for p in others:
        w, v = np.linalg.eigh(p)
        vecs.append(v[:, -1])
    span = np.column_stack(vecs)
    k = span.shape[1]
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    rotated = span @ q
    projs = [kept] + [np.outer(rotated[:, i], rotated[:, i].conj()) for i in range(k)]
    return MeasurementContext(projectors=tuple(projs), outcome=0, label=label)


@dataclass(frozen=True)
class TabularModel:
    """Synthetic model: per-(λ, context pair) outcome tables in a dict.

    Used by the generated-model property tests and the planted families.
    Keys are (λ, ctx_a.label, ctx_b.label).
    """

    rho: np.ndarray
    dims: tuple[int, int]
    lambdas: tuple[Any, ...]
    weights: np.ndarray
    tables: dict

    def model(self) -> HVModel:
        tables = self.tables

        def joint(lam, ctx_a, ctx_b, i, j):
            return float(tables[(lam, ctx_a.label, ctx_b.label)][i, j])

        return HVModel(
            rho=self.rho, dims=self.dims, lambdas=self.lambdas, weights=self.weights, joint=joint
        )


def _shared_projector_contexts(
    dim: int, per_side: int, rng: np.random.Generator, prefix: str
) -> list[MeasurementContext]:
    """Context family on C^dim sharing the |0⟩⟨0| projector (dim >= 3 to differ)."""
    base = basis_context(dim, f"{prefix}0")
    ctxs = [base]
    for k in range(1, per_side):
        ctxs.append(rotated_context(base, keep=0, rng=rng, label=f"{prefix}{k}"))
    return ctxs


def _random_distribution(rng: np.random.Generator, size: int) -> np.ndarray:
    # floor keeps entries > 0.1 so planted shifts never clip
    w = rng.random(size) + 0.5
    return w / w.sum()


def random_factorized_model(
    dim: int = 3,
    n_lambdas: int = 3,
    per_side: int = 2,
    signalling: bool = False,
    epsilon: float = 0.05,
    seed: int = 0,
) -> tuple[HVModel, list[CtxPair]]:
    """Random OI-satisfying tabular model; optionally far-context-dependent.

    Each (λ, context pair) table is an outer product of outcome marginals.
    With signalling=True the A-side marginal is perturbed depending on the
    far context label, violating PI (and, since OI holds, CPI) by about
    epsilon.
    """
    rng = np.random.default_rng(seed)
    ctx_a = _shared_projector_contexts(dim, per_side, rng, "A")
    ctx_b = _shared_projector_contexts(dim, per_side, rng, "B")
    pairs = [(a, b) for a in ctx_a for b in ctx_b]
    lambdas = tuple(range(n_lambdas))
    tables = {}
    for lam in lambdas:
        fa = {c.label: _random_distribution(rng, dim) for c in ctx_a}
        fb = {c.label: _random_distribution(rng, dim) for c in ctx_b}
        for a in ctx_a:
            for b in ctx_b:
                pa = fa[a.label].copy()
                if signalling and b.label != ctx_b[0].label:
                    pa[0] += epsilon
                    pa[1] -= epsilon
                tables[(lam, a.label, b.label)] = np.outer(pa, fb[b.label])
    rho = np.eye(dim * dim, dtype=np.complex128) / (dim * dim)
    tm = TabularModel(
        rho=rho,
        dims=(dim, dim),
        lambdas=lambdas,
        weights=np.full(n_lambdas, 1 / n_lambdas),
        tables=tables,
    )
    return tm.model(), pairs


def _zero_margin_perturbation(dim: int) -> np.ndarray:
    """A dim×dim matrix with zero row and column sums (marginal-preserving)."""
    d = np.zeros((dim, dim))
    d[0, 0], d[0, 1] = 1, -1
    d[1, 0], d[1, 1] = -1, 1
    return d


def random_noncontextual_model(
    dim: int = 3,
    n_lambdas: int = 3,
    per_side: int = 2,
    contextual_joint: bool = False,
    epsilon: float = 0.02,
    seed: int = 0,
) -> tuple[HVModel, list[CtxPair]]:
    """Random model with non-contextual marginals, built from per-λ states.

    Each λ carries a density operator W_λ; tables are its Born probabilities,
    so joints (hence marginals and conditionals) depend only on the
    projectors.  With contextual_joint=True a marginal-preserving
    perturbation is added whenever the far side measures a non-base context:
    MARGINAL-NC still passes while CPI and JOINT-NC fail by about epsilon.
    """
    rng = np.random.default_rng(seed)
    ctx_a = _shared_projector_contexts(dim, per_side, rng, "A")
    ctx_b = _shared_projector_contexts(dim, per_side, rng, "B")
    pairs = [(a, b) for a in ctx_a for b in ctx_b]
    lambdas = tuple(range(n_lambdas))
    tables = {}
    bump = _zero_margin_perturbation(dim)
    for lam in lambdas:
        z = rng.standard_normal((dim * dim, dim * dim)) + 1j * rng.standard_normal(
            (dim * dim, dim * dim)
        )
        w_lam = z @ z.conj().T
        # mix with the maximally mixed state so every cell stays above epsilon
        w_lam = 0.5 * w_lam / np.trace(w_lam).real + 0.5 * np.eye(dim * dim) / (dim * dim)
        for a in ctx_a:
            for b in ctx_b:
                t = np.empty((dim, dim))
                for i, p in enumerate(a.projectors):
                    for j, q in enumerate(b.projectors):
                        t[i, j] = born_joint(w_lam, p, q)
                if contextual_joint and b.label != ctx_b[0].label:
                    t = t + epsilon * bump
                tables[(lam, a.label, b.label)] = t
    rho = np.eye(dim * dim, dtype=np.complex128) / (dim * dim)
    tm = TabularModel(
        rho=rho,
        dims=(dim, dim),
        lambdas=lambdas,
        weights=np.full(n_lambdas, 1 / n_lambdas),
        tables=tables,
    )
    return tm.model(), pairs


def planted_signalling_model(
    dim: int = 3, epsilon: float = 0.05, seed: int = 0
) -> tuple[HVModel, list[CtxPair]]:
    """Strawman whose A-side marginal shifts by epsilon with Bob's context."""
    return random_factorized_model(dim=dim, signalling=True, epsilon=epsilon, seed=seed)


def planted_contextual_joint_model(
    dim: int = 3, epsilon: float = 0.02, seed: int = 0
) -> tuple[HVModel, list[CtxPair]]:
    """Context-dependent joints over fixed marginals: PI passes, CPI fails."""
    return random_noncontextual_model(dim=dim, contextual_joint=True, epsilon=epsilon, seed=seed)
