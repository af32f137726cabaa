import numpy as np
import pytest

from stcalc import exprs as E
from stcalc import extended_fields as XF
from stcalc import spintensor_core as core
from stcalc.extended_fields import (
    BundlePoint,
    BundleSignature,
    ExtendedField,
    as_field,
    bundle_dim,
    const_field,
    native,
    random_point,
    vertical_lift_coeffs,
    vnabla,
    vnabla_along,
    vnabla_bar,
    zero_field,
)
from stcalc.spintensor_core import SpinTensor, SpinType

from util import max_abs, random_field

SPINOR = SpinType(1, 0, 0, 0, 0, 0)
VECTOR = SpinType(0, 0, 0, 0, 1, 0)
SIG = BundleSignature((SPINOR, VECTOR))


def test_signature_offsets_and_env():
    assert SIG.nslots == 2
    assert SIG.stype(1) == SPINOR
    assert SIG.offsets() == {1: 4, 2: 6}
    assert SIG.env_length == 10
    with pytest.raises(IndexError):
        SIG.stype(3)
    rng = np.random.default_rng(0)
    pt = random_point(SIG, rng)
    env = SIG.env_of(pt)
    assert env.shape == (10,)
    assert np.allclose(env[:4], pt.x)
    assert np.array_equal(env[4:6], pt.arg(1).flat)
    assert np.array_equal(env[6:], pt.arg(2).flat)


def test_bundle_dim_hand_computed_values():
    assert bundle_dim(BundleSignature((SPINOR,))) == 8
    assert bundle_dim(BundleSignature((VECTOR,))) == 12
    assert bundle_dim(SIG) == 2 * (2 + 4) + 4 == 16
    assert bundle_dim(BundleSignature((SpinType(1, 1, 1, 0, 0, 0), SpinType(0, 0, 0, 0, 1, 1)))) == 2 * (8 + 16) + 4


def test_native_field_returns_argument():
    rng = np.random.default_rng(1)
    pt = random_point(SIG, rng)
    for P in (1, 2):
        got = native(SIG, P).eval(pt)
        assert got.stype == SIG.stype(P)
        assert np.array_equal(got.comps, pt.arg(P).comps)


def test_field_eval_checks_point():
    rng = np.random.default_rng(2)
    other = BundleSignature((SPINOR,))
    pt = random_point(other, rng)
    with pytest.raises(ValueError):
        native(SIG, 1).eval(pt)


def test_const_and_zero_fields():
    rng = np.random.default_rng(3)
    pt = random_point(SIG, rng)
    v = SpinTensor(VECTOR, np.arange(4) + 0j)
    assert np.array_equal(const_field(SIG, v).eval(pt).comps, v.comps)
    assert np.all(zero_field(SIG, SPINOR).eval(pt).comps == 0)


def test_algebra_commutes_with_eval():
    rng = np.random.default_rng(4)
    a = random_field(rng, SIG, SpinType(1, 0, 0, 1, 0, 0))
    b = random_field(rng, SIG, SpinType(1, 0, 0, 1, 0, 0))
    c = random_field(rng, SIG, SpinType(0, 1, 0, 0, 1, 0))
    pt = random_point(SIG, rng)

    lhs = XF.add(a, b).eval(pt).comps
    rhs = core.add(a.eval(pt), b.eval(pt)).comps
    assert max_abs(lhs - rhs) < 1e-12

    lhs = XF.tensor_product(a, c).eval(pt).comps
    rhs = core.tensor_product(a.eval(pt), c.eval(pt)).comps
    assert max_abs(lhs - rhs) < 1e-12

    prod = XF.tensor_product(a, c)
    lhs = XF.contract(prod, 0, 1).eval(pt).comps
    rhs = core.contract(core.tensor_product(a.eval(pt), c.eval(pt)), 0, 1).comps
    assert max_abs(lhs - rhs) < 1e-12

    lhs = XF.tau(a).eval(pt).comps
    rhs = core.tau(a.eval(pt)).comps
    assert max_abs(lhs - rhs) < 1e-12

    lhs = XF.scale(a, 2.5 - 1j).eval(pt).comps
    rhs = core.scale(a.eval(pt), 2.5 - 1j).comps
    assert max_abs(lhs - rhs) < 1e-12

    # scaling by a scalar expression multiplies the evaluated entries
    s = E.sin(E.coord(0)) + E.comp(1, 0)
    env = SIG.env_of(pt)
    sval = E.eval_compiled(s, env, SIG.offsets())
    lhs = XF.scale(a, s).eval(pt).comps
    assert max_abs(lhs - sval * a.eval(pt).comps) < 1e-12


def test_vnabla_operator_types():
    slot = SpinType(1, 1, 0, 1, 2, 0)
    sig = BundleSignature((slot,))
    x = zero_field(sig, SpinType())
    assert vnabla(x, 1).stype == slot.dual()
    assert vnabla_bar(x, 1).stype == slot.conjugate_type().dual()


def test_vnabla_of_native_spinor_is_identity_pattern():
    sig = BundleSignature((SPINOR,))
    rng = np.random.default_rng(5)
    pt = random_point(sig, rng)
    K = vnabla(native(sig, 1), 1)
    assert K.stype == SpinType(1, 1, 0, 0, 0, 0)
    assert np.array_equal(K.eval(pt).comps, np.eye(2))
    # conjugate-direction derivative of the native field vanishes
    Kbar = vnabla_bar(native(sig, 1), 1)
    assert max_abs(Kbar.eval(pt).comps) == 0.0


def test_vnabla_directional_projects_native():
    rng = np.random.default_rng(6)
    pt = random_point(SIG, rng)
    for P in (1, 2):
        Y = SpinTensor(
            SIG.stype(P),
            rng.normal(size=SIG.stype(P).shape) + 1j * rng.normal(size=SIG.stype(P).shape),
        )
        for R in (1, 2):
            got = vnabla_along(native(SIG, R), P, Y).eval(pt)
            if P == R:
                assert np.array_equal(got.comps, Y.comps)
            else:
                assert max_abs(got.comps) == 0.0


def test_vnabla_directional_on_conjugated_native():
    rng = np.random.default_rng(7)
    pt = random_point(SIG, rng)
    for P in (1, 2):
        Y = SpinTensor(
            SIG.stype(P),
            rng.normal(size=SIG.stype(P).shape) + 1j * rng.normal(size=SIG.stype(P).shape),
        )
        for R in (1, 2):
            got = vnabla_along(XF.tau(native(SIG, R)), P, Y).eval(pt)
            if P == R:
                assert np.array_equal(got.comps, core.tau(Y).comps)
            else:
                assert max_abs(got.comps) == 0.0


def test_vnabla_directional_matches_curve_derivative():
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(10):
        X = random_field(rng, SIG, SpinType(0, 1, 0, 0, 0, 0))
        pt = random_point(SIG, rng)
        P = int(rng.integers(1, 3))
        t = SIG.stype(P)
        Y = SpinTensor(t, rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape))

        def shifted(s):
            args = list(pt.args)
            args[P - 1] = SpinTensor(t, args[P - 1].comps + s * Y.comps)
            return BundlePoint(pt.x, tuple(args))

        fd = (X.eval(shifted(h)).comps - X.eval(shifted(-h)).comps) / (2 * h)
        an = vnabla_along(X, P, Y).eval(pt).comps
        assert max_abs(fd - an) < 1e-6 * max(1.0, max_abs(an))


def test_vnabla_entries_are_wirtinger_partials():
    # for a scalar field, the operator's entries enumerate all component
    # partials exactly once
    sig = BundleSignature((SPINOR,))
    c0, c1 = E.comp(1, 0), E.comp(1, 1)
    Xs = as_field(sig, SpinType(), np.array(c0 * c0 + 2 * c1, dtype=object))
    rng = np.random.default_rng(9)
    pt = random_point(sig, rng)
    z = pt.arg(1).flat
    got = vnabla(Xs, 1).eval(pt)
    assert got.stype == SpinType(0, 1, 0, 0, 0, 0)
    assert got.comps[0] == pytest.approx(2 * z[0])
    assert got.comps[1] == pytest.approx(2.0)
    gotbar = vnabla_bar(Xs, 1).eval(pt)
    assert gotbar.stype == SpinType(0, 0, 0, 1, 0, 0)
    assert max_abs(gotbar.comps) == 0.0


def test_vertical_lift_coeffs_real_and_complexified():
    rng = np.random.default_rng(10)
    t = SpinType(1, 0, 1, 0, 0, 0)
    sig = BundleSignature((t,))
    Y = SpinTensor(t, rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape))
    holo, anti = vertical_lift_coeffs(sig, 1, Y)
    assert np.array_equal(holo, Y.flat)
    assert np.array_equal(anti, np.conjugate(Y.flat))

    # complexified lift: independent conjugate-direction coefficients
    Ybar = SpinTensor(
        t.conjugate_type(),
        rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape),
    )
    holo2, anti2 = vertical_lift_coeffs(sig, 1, Y, Ybar)
    assert np.array_equal(holo2, Y.flat)
    # pairing: coefficient of the conjugate-component direction I is Ybar at
    # the group-swapped index
    perm, _ = core.conjugate_layout_array(Ybar.comps, Ybar.stype)
    assert np.array_equal(anti2, perm.reshape(-1))

    with pytest.raises(ValueError):
        vertical_lift_coeffs(sig, 1, SpinTensor(SpinType(), np.array(1 + 0j)))


def test_vnabla_along_consistent_with_lift_coeffs():
    rng = np.random.default_rng(11)
    sig = BundleSignature((SPINOR,))
    X = random_field(rng, sig, SpinType())
    pt = random_point(sig, rng)
    Y = SpinTensor(SPINOR, rng.normal(size=2) + 1j * rng.normal(size=2))
    holo, anti = vertical_lift_coeffs(sig, 1, Y)
    env = sig.env_of(pt)
    offs = sig.offsets()
    manual = sum(
        holo[l] * E.eval_compiled(E.diff_comp(X.entries[()], 1, l), env, offs)
        + anti[l] * E.eval_compiled(E.diff_comp_bar(X.entries[()], 1, l), env, offs)
        for l in range(2)
    )
    got = vnabla_along(X, 1, Y).eval(pt).comps[()]
    assert abs(got - manual) < 1e-12 * max(1.0, abs(manual))
