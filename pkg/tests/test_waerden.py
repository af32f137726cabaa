import numpy as np
import pytest

from stcalc.lorentz_sl2c import h_of, phi, random_sl2
from stcalc.spintensor_core import SpinType, contract, from_components, tensor_product
from stcalc.waerden import (
    completeness_residuals,
    g_inv,
    g_inv_array,
    g_symbol,
    g_symbol_array,
    metric_conversion_residuals,
    spinor_to_tensor,
    tensor_to_spinor,
)


def test_symbol_tables_frozen():
    up = g_symbol_array()
    expected_up = np.zeros((2, 2, 4), dtype=complex)
    expected_up[0, 0] = [1, 0, 0, 1]
    expected_up[0, 1] = [0, 1, -1j, 0]
    expected_up[1, 0] = [0, 1, 1j, 0]
    expected_up[1, 1] = [1, 0, 0, -1]
    assert np.array_equal(up, expected_up)

    lo = g_inv_array()
    expected_lo = np.zeros((4, 2, 2), dtype=complex)
    expected_lo[0] = [[0.5, 0], [0, 0.5]]
    expected_lo[1] = [[0, 0.5], [0.5, 0]]
    expected_lo[2] = [[0, 0.5j], [-0.5j, 0]]
    expected_lo[3] = [[0.5, 0], [0, -0.5]]
    assert np.array_equal(lo, expected_lo)


def test_scalar_accessors_are_one_based():
    assert g_symbol(1, 2, 2) == -1j
    assert g_symbol(2, 1, 2) == 1j
    assert g_inv(2, 1, 2) == 0.5j
    assert g_inv(3, 2, 2) == -0.5


def test_conjugate_swap_symmetry():
    up = g_symbol_array()
    lo = g_inv_array()
    for q in range(4):
        for i in range(2):
            for j in range(2):
                assert up[i, j, q] == np.conj(up[j, i, q])
                assert lo[q, i, j] == np.conj(lo[q, j, i])


def test_completeness_identities_exact():
    r1, r2 = completeness_residuals()
    assert r1 == 0.0
    assert r2 == 0.0


def test_metric_conversion_residuals():
    res = metric_conversion_residuals()
    assert set(res) == {"cov_to_spin", "spin_to_cov", "con_to_spin", "spin_to_con"}
    for name, value in res.items():
        assert value <= 1e-15, name


def test_vector_conversion_equals_hermitian_encoding():
    rng = np.random.default_rng(70)
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    x = from_components(SpinType(0, 0, 0, 0, 1, 0), w)
    conv = tensor_to_spinor(x, 0)
    assert conv.stype == SpinType(1, 0, 1, 0, 0, 0)
    assert np.allclose(conv.comps, h_of(w), atol=1e-15)


def test_upper_conversion_roundtrip():
    rng = np.random.default_rng(71)
    t = SpinType(0, 0, 0, 0, 1, 0)
    x = from_components(t, rng.normal(size=4) + 1j * rng.normal(size=4))
    conv = tensor_to_spinor(x, 0)
    back = spinor_to_tensor(conv, 0, 1)
    assert back.stype == t
    assert np.max(np.abs(back.comps - x.comps)) <= 1e-15


def test_upper_conversion_roundtrip_interior_slot():
    rng = np.random.default_rng(72)
    t = SpinType(1, 0, 1, 0, 1, 0)
    x = from_components(
        t, rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape)
    )
    conv = tensor_to_spinor(x, 2)
    # fresh slots land at the ends of the upper spinor / upper barred groups
    assert conv.stype == SpinType(2, 0, 2, 0, 0, 0)
    back = spinor_to_tensor(conv, 1, 3)
    assert back.stype == t
    assert np.max(np.abs(back.comps - x.comps)) <= 1e-15


def test_lower_conversion_roundtrip():
    rng = np.random.default_rng(73)
    t = SpinType(0, 0, 0, 0, 0, 1)
    x = from_components(t, rng.normal(size=4) + 1j * rng.normal(size=4))
    conv = tensor_to_spinor(x, 0)
    assert conv.stype == SpinType(0, 1, 0, 1, 0, 0)
    back = spinor_to_tensor(conv, 0, 1)
    assert back.stype == t
    assert np.max(np.abs(back.comps - x.comps)) <= 1e-15


def test_conversion_preserves_contraction():
    rng = np.random.default_rng(74)
    x = from_components(
        SpinType(0, 0, 0, 0, 1, 0), rng.normal(size=4) + 1j * rng.normal(size=4)
    )
    y = from_components(
        SpinType(0, 0, 0, 0, 0, 1), rng.normal(size=4) + 1j * rng.normal(size=4)
    )
    direct = np.dot(x.comps, y.comps)
    xs = tensor_to_spinor(x, 0)  # (1,0|1,0|0,0)
    ys = tensor_to_spinor(y, 0)  # (0,1|0,1|0,0)
    prod = tensor_product(xs, ys)  # (1,1|1,1|0,0)
    total = contract(contract(prod, 0, 1), 0, 1)
    assert total.comps == pytest.approx(direct, abs=1e-12)


def test_equivariance_with_covering_map():
    rng = np.random.default_rng(75)
    t = SpinType(0, 0, 0, 0, 1, 0)
    for _ in range(50):
        U = random_sl2(rng)
        S = phi(U)
        w = rng.normal(size=4)
        lhs = tensor_to_spinor(from_components(t, S @ w), 0).comps
        rhs = U @ tensor_to_spinor(from_components(t, w), 0).comps @ U.conj().T
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_slot_validation():
    rng = np.random.default_rng(76)
    t = SpinType(1, 0, 1, 0, 1, 1)
    x = from_components(
        t, rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape)
    )
    with pytest.raises(ValueError):
        tensor_to_spinor(x, 0)  # spinor slot, not tensorial
    with pytest.raises(ValueError):
        spinor_to_tensor(x, 0, 0)  # second slot is not barred
    with pytest.raises(ValueError):
        spinor_to_tensor(tensor_to_spinor(x, 3), 0, 3)  # upper vs lower pair
