import numpy as np
import pytest

from stcalc.lorentz_sl2c import (
    h_of,
    is_hermitian,
    is_sl2,
    is_so_plus,
    minkowski_eta,
    minkowski_sq,
    normalize_sl2,
    pauli,
    phi,
    phi_matrix,
    predicted_time_entry,
    random_sl2,
    w_of,
)


def test_pauli_tables_frozen():
    assert np.array_equal(pauli(0), np.eye(2))
    assert np.array_equal(pauli(1), np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.array_equal(pauli(2), np.array([[0, -1j], [1j, 0]], dtype=complex))
    assert np.array_equal(pauli(3), np.array([[1, 0], [0, -1]], dtype=complex))


def test_h_of_values():
    w = np.array([1.0, 2.0, 3.0, 4.0])
    h = h_of(w)
    assert h[0, 0] == 5.0 and h[1, 1] == -3.0
    assert h[0, 1] == 2.0 - 3.0j and h[1, 0] == 2.0 + 3.0j
    assert is_hermitian(h)
    assert np.allclose(h, sum(w[k] * pauli(k) for k in range(4)))


def _dyadic_vectors(rng, count):
    """Random complex 4-vectors whose parts are dyadic rationals, so all the
    encode/decode arithmetic is exact in binary floating point."""
    scale = 2.0**-12
    re = rng.integers(-(2**24), 2**24, size=(count, 4)) * scale
    im = rng.integers(-(2**24), 2**24, size=(count, 4)) * scale
    return re + 1j * im


def test_decode_encode_roundtrip_exact_on_dyadics():
    rng = np.random.default_rng(42)
    for w in _dyadic_vectors(rng, 200):
        assert np.array_equal(w_of(h_of(w)), w)


def test_decode_encode_roundtrip_generic():
    rng = np.random.default_rng(43)
    for _ in range(200):
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert np.max(np.abs(w_of(h_of(w)) - w)) < 1e-13


def test_encode_decode_roundtrip_on_matrices():
    rng = np.random.default_rng(44)
    h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = h + h.conj().T  # hermitian => in the image of h_of over the reals
    assert np.max(np.abs(h_of(w_of(h)) - h)) < 1e-13


def test_det_matches_quadratic_form():
    rng = np.random.default_rng(45)
    for _ in range(200):
        w = rng.normal(size=4)
        assert abs(np.linalg.det(h_of(w)) - minkowski_sq(w)) <= 1e-12


def test_minkowski_signature():
    assert minkowski_sq([1, 0, 0, 0]) == 1
    for k in range(1, 4):
        e = [0, 0, 0, 0]
        e[k] = 1
        assert minkowski_sq(e) == -1
    assert np.array_equal(minkowski_eta(), np.diag([1.0, -1.0, -1.0, -1.0]))


def test_phi_of_spin_rotation():
    theta = 0.7318
    U = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    S = phi(U)
    expected = np.eye(4)
    expected[1, 1] = np.cos(theta)
    expected[2, 2] = np.cos(theta)
    expected[2, 1] = np.sin(theta)
    expected[1, 2] = -np.sin(theta)
    assert np.max(np.abs(S - expected)) < 1e-12


def test_phi_of_boost():
    lam = 0.4141
    U = np.diag([np.exp(0.5 * lam), np.exp(-0.5 * lam)])
    S = phi(U)
    expected = np.eye(4)
    expected[0, 0] = np.cosh(lam)
    expected[3, 3] = np.cosh(lam)
    expected[0, 3] = np.sinh(lam)
    expected[3, 0] = np.sinh(lam)
    assert np.max(np.abs(S - expected)) < 1e-12


def test_phi_is_homomorphism():
    rng = np.random.default_rng(46)
    for _ in range(50):
        U = random_sl2(rng)
        V = random_sl2(rng)
        resid = np.max(np.abs(phi(U @ V) - phi(U) @ phi(V)))
        assert resid <= 1e-9


def test_phi_kernel_is_plus_minus_identity():
    assert np.max(np.abs(phi(np.eye(2)) - np.eye(4))) <= 1e-12
    assert np.max(np.abs(phi(-np.eye(2)) - np.eye(4))) <= 1e-12
    rng = np.random.default_rng(47)
    for _ in range(100):
        U = random_sl2(rng)
        if min(np.max(np.abs(U - np.eye(2))), np.max(np.abs(U + np.eye(2)))) < 0.1:
            continue
        assert np.max(np.abs(phi(U) - np.eye(4))) > 1e-3


def test_phi_rejects_non_unimodular():
    with pytest.raises(ValueError):
        phi(2.0 * np.eye(2))


def test_phi_time_entry_closed_form():
    rng = np.random.default_rng(48)
    for _ in range(100):
        U = random_sl2(rng)
        assert abs(phi(U)[0, 0] - predicted_time_entry(U)) <= 1e-12


def test_phi_lands_in_proper_orthochronous_group():
    rng = np.random.default_rng(49)
    for _ in range(100):
        S = phi(random_sl2(rng))
        assert is_so_plus(S, tol=1e-9)
        assert abs(np.linalg.det(S) - 1.0) <= 1e-9


def test_phi_preserves_quadratic_form():
    rng = np.random.default_rng(50)
    for _ in range(50):
        S = phi(random_sl2(rng))
        w = rng.normal(size=4)
        assert abs(minkowski_sq(S @ w) - minkowski_sq(w)) <= 1e-9


def test_normalize_sl2():
    rng = np.random.default_rng(51)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    U = normalize_sl2(M)
    assert is_sl2(U, tol=1e-12)
    with pytest.raises(ValueError):
        normalize_sl2(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_phi_matrix_runs_on_object_arrays():
    U = np.empty((2, 2), dtype=object)
    V = np.exp(0.3j) * np.eye(2)  # not unimodular matters not for phi_matrix
    for i in range(2):
        for j in range(2):
            U[i, j] = complex(V[i, j])
    S_obj = phi_matrix(U).astype(complex)
    S_num = phi_matrix(V.astype(complex))
    assert np.max(np.abs(S_obj - S_num)) < 1e-14
