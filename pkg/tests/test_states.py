"""States, Schmidt data, Born probabilities, and the partner construction."""

import numpy as np
import pytest

from hvlab.linalg import partial_trace
from hvlab.states import (
    PureState,
    as_density,
    born_joint,
    is_maximally_entangled,
    max_entangled,
    partner_projection,
    random_pure_state,
    random_rank1_projector,
    schmidt_decompose,
    singlet,
)


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def test_pure_state_rejects_non_unit():
    with pytest.raises(ValueError):
        PureState(2, 2, np.array([1.0, 1.0, 0, 0]))


def test_max_entangled_bell():
    psi = max_entangled(2)
    assert np.allclose(psi.amplitudes, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])


def test_max_entangled_flat_schmidt():
    beta = schmidt_decompose(max_entangled(3)).coefficients
    assert np.allclose(beta, 1 / np.sqrt(3), atol=1e-12)


def test_max_entangled_marginal():
    rho_a = partial_trace(max_entangled(3).density(), (3, 3), side="B")
    assert np.allclose(rho_a, np.eye(3) / 3, atol=1e-12)


def test_max_entangled_rejects_small_n():
    with pytest.raises(ValueError):
        max_entangled(1)


def test_schmidt_product_state():
    psi = PureState(2, 2, np.array([0, 1, 0, 0], dtype=complex))  # |0>|1>
    sd = schmidt_decompose(psi)
    assert abs(sd.coefficients[0] - 1) < 1e-12
    assert np.all(sd.coefficients[1:] < 1e-12)


def test_schmidt_singlet():
    sd = schmidt_decompose(singlet())
    assert np.allclose(sd.coefficients, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)


def test_schmidt_biorthogonal_input():
    amp = np.zeros(4, dtype=complex)
    amp[0], amp[3] = np.sqrt(0.8), np.sqrt(0.2)
    sd = schmidt_decompose(PureState(2, 2, amp))
    assert np.allclose(sd.coefficients, [np.sqrt(0.8), np.sqrt(0.2)], atol=1e-12)


def test_schmidt_invariants_and_roundtrip():
    for seed, (da, db) in enumerate([(2, 2), (3, 3), (2, 4), (4, 4), (4, 3)]):
        psi = random_pure_state(da, db, seed=seed)
        sd = schmidt_decompose(psi)
        k = len(sd.coefficients)
        assert abs(np.sum(sd.coefficients**2) - 1) <= 1e-10
        assert np.all(np.diff(sd.coefficients) <= 1e-12)  # descending
        assert np.max(np.abs(sd.left.conj().T @ sd.left - np.eye(k))) <= 1e-10
        assert np.max(np.abs(sd.right.conj().T @ sd.right - np.eye(k))) <= 1e-10
        # reconstruction up to global phase
        rec = sd.reconstruct()
        phase = np.vdot(rec, psi.amplitudes)
        phase /= abs(phase)
        assert np.linalg.norm(rec * phase - psi.amplitudes) <= 1e-9


def test_as_density_rejects_nonpositive():
    with pytest.raises(ValueError):
        as_density(np.diag([1.5, -0.5]))


def test_born_bell_correlations():
    rho = singlet().density()
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    assert abs(born_joint(rho, p0, p1) - 0.5) < 1e-12
    assert abs(born_joint(rho, p0, p0) - 0.0) < 1e-12


def test_born_max_entangled_3():
    # oracle: direct amplitude evaluation |<00|Psi>|^2 = 1/3
    psi = max_entangled(3)
    p = np.zeros((3, 3), dtype=complex)
    p[0, 0] = 1
    assert abs(born_joint(psi.density(), p, p) - 1 / 3) < 1e-12


def test_born_marginal_matches_partial_trace():
    rng = np.random.default_rng(8)
    psi = random_pure_state(3, 3, seed=11)
    rho = psi.density()
    for seed in range(5):
        p = random_rank1_projector(3, seed=100 + seed)
        lhs = born_joint(rho, p, np.eye(3))
        rhs = np.trace(partial_trace(rho, (3, 3), side="B") @ p).real
        assert abs(lhs - rhs) <= 1e-10


def test_born_rejects_invalid():
    with pytest.raises(ValueError):
        born_joint(-singlet().density(), np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def test_partner_basis_projector():
    psi = max_entangled(3)
    p = np.zeros((3, 3), dtype=complex)
    p[0, 0] = 1
    q = partner_projection(psi, p)
    assert np.allclose(q, p, atol=1e-12)
    rho = psi.density()
    for val in (
        born_joint(rho, p, np.eye(3)),
        born_joint(rho, p, q),
        born_joint(rho, np.eye(3), q),
    ):
        assert abs(val - 1 / 3) < 1e-10


def test_partner_bloch_x_direction():
    psi = max_entangled(2)
    x = ket(1, 1)  # +x eigenstate
    p = np.outer(x, x.conj())
    q = partner_projection(psi, p)
    rho = psi.density()
    pp = born_joint(rho, p, np.eye(2))
    assert abs(pp - 0.5) <= 1e-10
    assert abs(born_joint(rho, p, q) - pp) <= 1e-10


def test_partner_defining_identity_random():
    for n in (2, 3, 4):
        psi = max_entangled(n)
        rho = psi.density()
        for seed in range(25):
            p = random_rank1_projector(n, seed=seed)
            q = partner_projection(psi, p)
            marg = born_joint(rho, p, np.eye(n))
            assert abs(marg - 1 / n) <= 1e-10
            assert abs(born_joint(rho, p, q) - marg) <= 1e-10


def test_partner_rejects_non_maximal():
    amp = np.zeros(4, dtype=complex)
    amp[0], amp[3] = np.sqrt(0.8), np.sqrt(0.2)
    with pytest.raises(ValueError):
        partner_projection(PureState(2, 2, amp), np.diag([1.0, 0.0]))


def test_partner_rejects_higher_rank():
    with pytest.raises(ValueError):
        partner_projection(max_entangled(3), np.diag([1.0, 1.0, 0.0]))


def test_random_projector_deterministic():
    a = random_rank1_projector(4, seed=123)
    b = random_rank1_projector(4, seed=123)
    assert np.array_equal(a, b)


def test_random_projector_is_projector():
    for seed in range(10):
        p = random_rank1_projector(3, seed=seed)
        assert np.max(np.abs(p @ p - p)) < 1e-12
        assert abs(np.trace(p).real - 1) < 1e-12


def test_random_projector_haar_first_moment():
    # Monte Carlo check of the Haar first moment: mean projector = 1/dim
    dim, n = 2, 100_000
    rng = np.random.default_rng(2024)
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    projs = np.einsum("ki,kj->kij", z, z.conj())
    mean = projs.mean(axis=0)
    se = projs.std(axis=0) / np.sqrt(n)
    dev = np.abs(mean - np.eye(dim) / dim)
    assert np.all(dev <= 3 * se + 1e-12)


def test_is_maximally_entangled():
    assert is_maximally_entangled(max_entangled(3))
    assert is_maximally_entangled(singlet())
    amp = np.zeros(4, dtype=complex)
    amp[0], amp[3] = np.sqrt(0.8), np.sqrt(0.2)
    assert not is_maximally_entangled(PureState(2, 2, amp))
