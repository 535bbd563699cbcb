import numpy as np
import pytest

from povmc import linalg
from povmc.errors import DimensionError, DomainError, ValidationError
from povmc.linalg import BipartiteShape
from povmc import rand as qrand


def random_hermitian(rng, d):
    g = qrand.ginibre(rng, d, d)
    return (g + g.conj().T) / 2


def test_hermitian_eig_identity():
    w, v = linalg.hermitian_eig(np.eye(2))
    assert np.allclose(w, [1.0, 1.0])


def test_hermitian_eig_diagonal():
    w, v = linalg.hermitian_eig(np.diag([3.0, 1.0]))
    assert np.allclose(w, [3.0, 1.0])
    assert np.abs(np.abs(v) - np.eye(2)).max() < 1e-12


def test_hermitian_eig_pauli_x():
    # characteristic polynomial of [[0,1],[1,0]] is t^2 - 1: eigenvalues +/- 1
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    w, v = linalg.hermitian_eig(x)
    assert np.allclose(w, [1.0, -1.0])
    rec = (v * w) @ v.conj().T
    assert np.abs(rec - x).max() < 1e-12


def test_hermitian_eig_reconstruction_random():
    rng = np.random.default_rng(0)
    for _ in range(20):
        h = random_hermitian(rng, 5)
        w, v = linalg.hermitian_eig(h)
        assert np.all(np.diff(w) <= 1e-12)
        rec = (v * w) @ v.conj().T
        assert np.linalg.norm(rec - h) <= 1e-10 * np.linalg.norm(h)
        assert np.abs(v.conj().T @ v - np.eye(5)).max() < 1e-12


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        linalg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_matrix_sqrt_cases():
    assert np.allclose(linalg.matrix_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(linalg.matrix_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    proj = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert np.allclose(linalg.matrix_sqrt(proj), proj)


def test_matrix_sqrt_squares_back():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = qrand.density_matrix(rng, 4)
        r = linalg.matrix_sqrt(p)
        assert np.linalg.norm(r @ r - p) <= 1e-10 * max(np.linalg.norm(p), 1e-30)


def test_matrix_sqrt_rejects_negative():
    with pytest.raises(DomainError):
        linalg.matrix_sqrt(np.diag([1.0, -1e-3]))


def test_pinv_sqrt_kernel_and_support():
    assert np.allclose(linalg.pinv_sqrt(np.eye(2)), np.eye(2))
    assert np.allclose(linalg.pinv_sqrt(np.diag([4.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_sqrt_composes_with_sqrt():
    rng = np.random.default_rng(2)
    for _ in range(10):
        sigma = qrand.density_matrix(rng, 4)  # full rank almost surely
        left = linalg.pinv_sqrt(sigma) @ linalg.matrix_sqrt(sigma)
        assert np.abs(left - np.eye(4)).max() < 1e-9


def test_pinv_sqrt_support_projector():
    rng = np.random.default_rng(3)
    p = qrand.density_matrix(rng, 5, rank=3)
    isq = linalg.pinv_sqrt(p)
    proj = isq @ p @ isq
    assert np.abs(proj @ proj - proj).max() < 1e-9
    assert abs(np.trace(proj).real - 3) < 1e-9


def test_partial_trace_product():
    rng = np.random.default_rng(4)
    rho = qrand.density_matrix(rng, 3)
    tau = qrand.density_matrix(rng, 2)
    full = linalg.kron(rho, tau)
    shape = BipartiteShape(3, 2)
    assert np.abs(linalg.partial_trace(full, shape, "A") - tau).max() < 1e-12
    assert np.abs(linalg.partial_trace(full, shape, "B") - rho).max() < 1e-12


def test_partial_trace_bell():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    red = linalg.partial_trace(rho, BipartiteShape(2, 2), "B")
    assert np.abs(red - np.eye(2) / 2).max() < 1e-12


def test_partial_trace_preserves_trace_and_linearity():
    # oracle: direct index summation
    rng = np.random.default_rng(5)
    shape = BipartiteShape(3, 2)
    a = qrand.ginibre(rng, 6, 6)
    b = qrand.ginibre(rng, 6, 6)
    for side in ("A", "B"):
        ta = linalg.partial_trace(a, shape, side)
        assert abs(np.trace(ta) - np.trace(a)) < 1e-12
        combo = linalg.partial_trace(2.0 * a - 1.5 * b, shape, side)
        assert np.abs(combo - (2.0 * ta - 1.5 * linalg.partial_trace(b, shape, side))).max() < 1e-12
    # elementwise oracle for tr_A
    direct = np.zeros((2, 2), dtype=complex)
    for i in range(3):
        for bb in range(2):
            for bb2 in range(2):
                direct[bb, bb2] += a[i * 2 + bb, i * 2 + bb2]
    assert np.abs(direct - linalg.partial_trace(a, shape, "A")).max() < 1e-12


def test_partial_trace_shape_mismatch():
    with pytest.raises(DimensionError):
        linalg.partial_trace(np.eye(5), BipartiteShape(2, 2), "A")


def test_kron_mixed_product():
    rng = np.random.default_rng(6)
    a, b, c, d = (qrand.ginibre(rng, 2, 2) for _ in range(4))
    lhs = linalg.kron(a, b) @ linalg.kron(c, d)
    rhs = linalg.kron(a @ c, b @ d)
    assert np.abs(lhs - rhs).max() < 1e-12
    assert np.abs(linalg.kron(np.eye(2), np.eye(3)) - np.eye(6)).max() == 0.0


def test_vec_to_op_product_vector():
    eta = np.array([1.0, 2.0j])
    k = np.array([0.5, 0.5, 1j])
    phi = np.kron(eta, k)
    f = linalg.vec_to_op(phi, BipartiteShape(2, 3))
    # product vector maps to |eta><conj(k)|
    assert np.abs(f - np.outer(eta, k)).max() < 1e-12
    assert np.linalg.matrix_rank(f) == 1


def test_vec_to_op_maximally_entangled():
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / np.sqrt(2)
    f = linalg.vec_to_op(phi, BipartiteShape(2, 2))
    assert np.abs(f - np.eye(2) / np.sqrt(2)).max() < 1e-12


def test_vec_op_round_trip_and_norm():
    rng = np.random.default_rng(7)
    shape = BipartiteShape(3, 4)
    for _ in range(10):
        phi = qrand.ginibre(rng, 12, 1).reshape(-1)
        f = linalg.vec_to_op(phi, shape)
        assert np.abs(linalg.op_to_vec(f) - phi).max() < 1e-12
        assert abs(np.linalg.norm(f) - np.linalg.norm(phi)) < 1e-12


def test_schmidt_decompose_product_and_bell():
    shape = BipartiteShape(2, 2)
    prod = np.kron(np.array([1.0, 0.0]), np.array([0.6, 0.8]))
    c, u, v = linalg.schmidt_decompose(2.0 * prod, shape)
    assert abs(c[0] - 2.0) < 1e-12 and c[1] < 1e-12
    bell = np.zeros(4)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    c, u, v = linalg.schmidt_decompose(bell, shape)
    assert np.allclose(c, [1 / np.sqrt(2)] * 2)


def test_schmidt_decompose_reconstructs():
    rng = np.random.default_rng(8)
    shape = BipartiteShape(3, 5)
    for _ in range(10):
        phi = qrand.pure_state(rng, 15)
        c, u, v = linalg.schmidt_decompose(phi, shape)
        rec = sum(c[i] * np.kron(u[:, i], v[:, i]) for i in range(len(c)))
        assert np.abs(rec - phi).max() < 1e-10
        assert abs(np.sum(c ** 2) - 1.0) < 1e-10
        # coefficients match the singular values of the reshaped vector
        sv = np.linalg.svd(linalg.vec_to_op(phi, shape), compute_uv=False)
        assert np.abs(c - sv[: len(c)]).max() < 1e-10


def test_schmidt_decompose_zero_vector():
    with pytest.raises(DomainError):
        linalg.schmidt_decompose(np.zeros(4), BipartiteShape(2, 2))


def test_purify_pure_and_mixed():
    # pure state purifies to (eigenvector x eigenvector)
    v = np.array([0.6, 0.8j])
    psi = linalg.purify(np.outer(v, v.conj()))
    f = linalg.vec_to_op(psi, BipartiteShape(2, 2))
    assert np.linalg.matrix_rank(np.round(f, 10)) == 1
    # maximally mixed qubit purifies to a Bell-type state
    psi = linalg.purify(np.eye(2) / 2)
    assert np.allclose(np.abs(psi), [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])


def test_purify_partial_traces():
    rng = np.random.default_rng(9)
    for _ in range(10):
        sigma = qrand.density_matrix(rng, 4)
        psi = linalg.purify(sigma)
        rho = np.outer(psi, psi.conj())
        shape = BipartiteShape(4, 4)
        assert np.abs(linalg.partial_trace(rho, shape, "A") - sigma).max() < 1e-10
        assert np.abs(linalg.partial_trace(rho, shape, "B") - sigma).max() < 1e-10


def test_purify_deterministic():
    rng = np.random.default_rng(10)
    sigma = qrand.density_matrix(rng, 3)
    assert np.array_equal(linalg.purify(sigma), linalg.purify(sigma.copy()))


def test_distances():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    assert abs(linalg.trace_distance(a, a)) == 0.0
    assert abs(linalg.trace_distance(a, b) - 1.0) < 1e-12  # orthogonal pure states
    rng = np.random.default_rng(11)
    x = qrand.density_matrix(rng, 3)
    y = qrand.density_matrix(rng, 3)
    # eigenvalue-sum oracle for Hermitian difference
    oracle = 0.5 * np.abs(np.linalg.eigvalsh(x - y)).sum()
    assert abs(linalg.trace_distance(x, y) - oracle) < 1e-12
    assert abs(linalg.frob_distance(x, y) - np.linalg.norm(x - y)) < 1e-15
    # metric axioms on a triple
    z = qrand.density_matrix(rng, 3)
    for dist in (linalg.trace_distance, linalg.frob_distance):
        assert dist(x, y) >= 0
        assert abs(dist(x, y) - dist(y, x)) < 1e-12
        assert dist(x, z) <= dist(x, y) + dist(y, z) + 1e-12


def test_extend_to_unitary():
    rng = np.random.default_rng(12)
    v = np.linalg.qr(qrand.ginibre(rng, 5, 2))[0]
    u = linalg.extend_to_unitary(v)
    assert np.abs(u.conj().T @ u - np.eye(5)).max() < 1e-10
    assert np.abs(u[:, :2] - v).max() < 1e-12


def test_transpose_in_basis():
    rng = np.random.default_rng(13)
    a = random_hermitian(rng, 4)
    # computational basis: plain transpose
    assert np.abs(linalg.transpose_in_basis(a, np.eye(4)) - a.T).max() < 1e-12
    u = qrand.haar_unitary(rng, 4)
    t = linalg.transpose_in_basis(a, u)
    # involutive and Hermiticity preserving
    assert np.abs(linalg.transpose_in_basis(t, u) - a).max() < 1e-12
    assert np.abs(t - t.conj().T).max() < 1e-12
