"""Convex-decomposition feasibility search and the constancy chain."""

import numpy as np
import pytest

from hvlab.influence import ic_projectors
from hvlab.linalg import hermitian_basis
from hvlab.nogo import (
    DecompositionProblem,
    basis_image_conditioning,
    max_perturbation,
    perturbation_ladder,
    verify_constancy_chain,
)
from hvlab.states import PureState, max_entangled, singlet


def test_problem_validation():
    rho = np.eye(9) / 9
    with pytest.raises(ValueError):
        DecompositionProblem(rho=rho, n=3, eta=1.0, samples=200)
    with pytest.raises(ValueError):
        DecompositionProblem(rho=rho, n=3, samples=80)  # below n^4
    with pytest.raises(ValueError):
        DecompositionProblem(rho=rho, n=3, samples=200, policy="nope")


def test_convexity_identity_exact():
    # the (delta, t) parameterization satisfies eta·L1 + (1-eta)·L2 = rho identically
    rho = max_entangled(2).density()
    p = DecompositionProblem(rho=rho, n=2, eta=0.3, samples=100, seed=1)
    cert = max_perturbation(p)
    l1 = rho + (1 - p.eta) * cert.t_max * cert.delta
    l2 = rho - p.eta * cert.t_max * cert.delta
    assert np.max(np.abs(p.eta * l1 + (1 - p.eta) * l2 - rho)) <= 1e-15
    assert abs(np.trace(cert.delta)) <= 1e-10  # traceless direction


def test_certificate_soundness():
    for rho, n in ((np.eye(4) / 4, 2), (max_entangled(2).density(), 2)):
        cert = max_perturbation(DecompositionProblem(rho=rho, n=n, samples=500, seed=3))
        assert cert.t_max >= 0
        assert cert.min_residual >= -1e-12


def test_interior_point_stays_feasible():
    # explicit feasible pair for I/9: traceless diagonal direction keeps both
    # halves non-negative on all product projections for small t
    rho = np.eye(9) / 9
    for samples in (200, 1000, 5000):
        cert = max_perturbation(
            DecompositionProblem(rho=rho, n=3, eta=0.5, samples=samples, seed=7)
        )
        assert cert.t_max > 0.05


def test_entangled_t_max_shrinks():
    ladder = [200, 1000, 5000]
    seeds = list(range(8))
    ent = perturbation_ladder(max_entangled(3).density(), 3, 0.5, ladder, seeds)
    med = [float(np.median(ent[r])) for r in ladder]
    assert med[0] >= med[1] >= med[2]
    # per-seed monotone by nested-prefix construction
    for i in range(len(seeds)):
        assert ent[200][i] >= ent[1000][i] >= ent[5000][i]


def test_entangled_2x2_also_shrinks():
    ladder = [100, 1000, 4000]
    seeds = list(range(8))
    ent = perturbation_ladder(max_entangled(2).density(), 2, 0.5, ladder, seeds)
    med = [float(np.median(ent[r])) for r in ladder]
    assert med[0] >= med[1] >= med[2]


def test_separable_vs_entangled_contrast():
    ladder = [5000]
    seeds = list(range(8))
    ent = perturbation_ladder(max_entangled(3).density(), 3, 0.5, ladder, seeds)
    mix = perturbation_ladder(np.eye(9) / 9, 3, 0.5, ladder, seeds)
    assert np.median(mix[5000]) >= 10 * np.median(ent[5000])


def test_lp_policy_beats_single_random_direction():
    rho = np.eye(4) / 4
    base = DecompositionProblem(rho=rho, n=2, samples=100, seed=5, policy="random")
    lp = DecompositionProblem(rho=rho, n=2, samples=100, seed=5, policy="lp", directions=4)
    t_rand = max_perturbation(base).t_max
    t_lp = max_perturbation(lp).t_max
    assert t_lp >= t_rand * 0.99  # the LP probes dominate a single direction


def test_given_direction_policy():
    rho = np.eye(4) / 4
    delta = np.diag([1.0, -1.0, 1.0, -1.0]) / 2
    cert = max_perturbation(
        DecompositionProblem(rho=rho, n=2, samples=400, seed=2, policy="given", delta=delta)
    )
    # z†δz = (|y0|² − |y1|²)/2 ∈ [−1/2, 1/2] and r = 1/4, so with eta = 1/2 the
    # exact cap is t = (1/4)/((1/2)·(1/2)) = 1; sampled t_max approaches it from above
    assert 1.0 <= cert.t_max <= 1.2


def test_constancy_chain_self():
    psi = max_entangled(3)
    rep = verify_constancy_chain(psi, psi.density(), ic_projectors(3), samples=30, seed=0)
    assert abs(rep.mean_c - 1) <= 1e-10
    assert rep.max_c_deviation <= 1e-10
    assert rep.max_residual <= 1e-10
    assert rep.hs_distance_to_scaled_state <= 1e-8


def test_constancy_chain_detects_mixed_lambda():
    psi = max_entangled(3)
    rep = verify_constancy_chain(psi, np.eye(9) / 9, ic_projectors(3), samples=30, seed=0)
    assert rep.max_residual > 1e-2  # rank-1 images vs identity-proportional images


def test_constancy_chain_requires_spanning_basis():
    psi = max_entangled(2)
    with pytest.raises(ValueError):
        verify_constancy_chain(psi, psi.density(), ic_projectors(2)[:3])


def test_basis_image_conditioning_maximally_entangled():
    psi = max_entangled(3)
    # orthonormal operator basis: image Gram is a positive multiple of identity
    basis = list(hermitian_basis(3))
    cond, spans = basis_image_conditioning(psi, basis)
    assert spans
    assert abs(cond - 1) <= 1e-8
    # rank-1 projector basis: conditioning matches the input Gram's
    projs = ic_projectors(3)
    k = len(projs)
    gram_in = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            gram_in[i, j] = np.trace(projs[i].conj().T @ projs[j])
    sv = np.linalg.svd(gram_in, compute_uv=False)
    cond_in = sv[0] / sv[-1]
    cond_img, spans_img = basis_image_conditioning(psi, projs)
    assert spans_img
    assert abs(cond_img - cond_in) / cond_in <= 1e-8


def test_basis_image_collapses_for_product_state():
    a = np.array([1, 0], dtype=complex)
    b = np.array([0, 1], dtype=complex)
    psi = PureState(2, 2, np.kron(a, b))
    _, spans = basis_image_conditioning(psi, ic_projectors(2))
    assert not spans


def test_basis_image_skewed_state():
    amp = np.zeros(4, dtype=complex)
    amp[0], amp[3] = np.sqrt(0.8), np.sqrt(0.2)
    cond, spans = basis_image_conditioning(PureState(2, 2, amp), ic_projectors(2))
    assert spans
    assert cond > 1.5


def test_singlet_constancy_instances():
    # the 2x2 route: the singlet's own map is the unique fixed point
    psi = singlet()
    rep = verify_constancy_chain(psi, psi.density(), ic_projectors(2), samples=20, seed=1)
    assert abs(rep.mean_c - 1) <= 1e-10
    assert rep.hs_distance_to_scaled_state <= 1e-8
