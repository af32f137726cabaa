"""Command-line harness: expression grammar, scenario files, suites."""

import numpy as np
import pytest

from stcalc.cli import (
    CheckResult,
    Scenario,
    ScenarioError,
    _index_string,
    _load_scenario,
    _parse_index_string,
    format_expression,
    format_scenario,
    main,
    parse_expression,
    parse_scenario,
    run_suite,
)
from stcalc.exprs import (
    Comp,
    CompBar,
    Const,
    Coord,
    Mul,
    Neg,
    Pow,
    comp,
    comp_bar,
    const,
    coord,
    cos,
    eval_compiled,
    eval_tree,
    exp,
    power,
    sin,
)
from stcalc.extended_fields import BundleSignature, random_point
from stcalc.spintensor_core import SpinType

SIG = BundleSignature((SpinType(1, 0, 0, 0, 0, 0), SpinType(0, 0, 0, 0, 1, 0)))


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------


def _value(text, env=np.zeros(4, dtype=complex)):
    return eval_tree(parse_expression(text), env, None)


def test_parse_numbers():
    assert _value("3") == 3.0
    assert _value("2.5") == 2.5
    assert _value(".5") == 0.5
    assert _value("1e-3") == 1e-3
    assert _value("2.5e2") == 250.0
    assert _value("1.5j") == 1.5j
    assert _value("2j") == 2j


def test_parse_precedence_and_ops():
    assert _value("1 + 2*3") == 7.0
    assert _value("(1 + 2)*3") == 9.0
    assert _value("2*3^2") == 18.0
    assert _value("-3^2") == -9.0
    assert _value("7 - 4 - 2") == 1.0
    assert _value("8 / 4 / 2") == 1.0
    assert _value("2^-2") == 0.25
    assert _value("--3") == 3.0


def test_parse_coords_and_functions():
    env = np.array([0.3, -0.7, 0.2, 0.9], dtype=complex)
    assert eval_tree(parse_expression("x0 + 2*x3"), env, None) == pytest.approx(
        0.3 + 1.8
    )
    got = eval_tree(parse_expression("sin(x1) + cos(x1)^2 - exp(x2)"), env, None)
    want = np.sin(-0.7) + np.cos(-0.7) ** 2 - np.exp(0.2)
    assert got == pytest.approx(want)


def test_parse_component_references():
    e = parse_expression("S1.2", SIG)
    assert repr(e) == repr(Comp(1, 1))
    e = parse_expression("S2.3", SIG)
    assert repr(e) == repr(Comp(2, 3))
    e = parse_expression("conj(S1.1)", SIG)
    assert repr(e) == repr(CompBar(1, 0))


def test_parse_component_references_mixed_type():
    # one upper spinor, one lower barred, one lower tensorial slot
    sig = BundleSignature((SpinType(1, 0, 0, 1, 0, 1),))
    t = sig.stype(1)
    e = parse_expression("S1.2_1bar_3", sig)
    assert repr(e) == repr(Comp(1, t.lin_of_storage((1, 0, 3))))
    with pytest.raises(ScenarioError):
        parse_expression("S1.2_1_3", sig)  # missing bar marker
    with pytest.raises(ScenarioError):
        parse_expression("S1.2bar_1bar_3", sig)  # bar on a spinor slot
    with pytest.raises(ScenarioError):
        parse_expression("S1.2_1bar", sig)  # wrong index count


def test_parse_scalar_slot_reference():
    sig = BundleSignature((SpinType(0, 0, 0, 0, 0, 0),))
    assert repr(parse_expression("S1", sig)) == repr(Comp(1, 0))
    with pytest.raises(ScenarioError):
        parse_expression("S1.1", sig)


def test_parse_errors():
    with pytest.raises(ScenarioError, match="unknown variable"):
        parse_expression("x0 + y1")
    with pytest.raises(ScenarioError):
        parse_expression("1 +")
    with pytest.raises(ScenarioError):
        parse_expression("sin x0")
    with pytest.raises(ScenarioError):
        parse_expression("(x0")
    with pytest.raises(ScenarioError):
        parse_expression("x0^x1")
    with pytest.raises(ScenarioError, match="not allowed"):
        parse_expression("S1.1", None)
    with pytest.raises(ScenarioError, match="outside the signature"):
        parse_expression("S9.1", SIG)


def test_index_string_roundtrip_all_linear_indices():
    t = SpinType(2, 1, 1, 1, 1, 1)
    for lin in range(t.count):
        storage = np.unravel_index(lin, t.shape)
        s = _index_string(t, storage)
        assert _parse_index_string(t, s) == lin


def _random_expr_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        kind = rng.integers(5)
        if kind == 0:
            return const(float(rng.normal()))
        if kind == 1:
            return const(complex(rng.normal(), rng.normal()))
        if kind == 2:
            return coord(int(rng.integers(4)))
        P = int(rng.integers(1, SIG.nslots + 1))
        lin = int(rng.integers(SIG.stype(P).count))
        return comp(P, lin) if kind == 3 else comp_bar(P, lin)
    kind = rng.integers(7)
    a = _random_expr_tree(rng, depth - 1)
    if kind == 0:
        return a + _random_expr_tree(rng, depth - 1)
    if kind == 1:
        return a - _random_expr_tree(rng, depth - 1)
    if kind == 2:
        return a * _random_expr_tree(rng, depth - 1)
    if kind == 3:
        return -a
    if kind == 4:
        return sin(a)
    if kind == 5:
        return cos(a)
    return power(a, int(rng.integers(1, 4)))


def test_format_parse_roundtrip_random_expressions():
    rng = np.random.default_rng(80)
    offs = SIG.offsets()
    for _ in range(200):
        e = _random_expr_tree(rng, 3)
        text = format_expression(e, SIG)
        back = parse_expression(text, SIG)
        assert format_expression(back, SIG) == text
        env = SIG.env_of(random_point(SIG, rng))
        assert eval_compiled(back, env, offs) == pytest.approx(
            eval_compiled(e, env, offs), abs=1e-12
        )


def test_format_expression_spot_checks():
    assert format_expression(coord(0) + const(2.0) * coord(1)) == "x0 + 2.0*x1"
    assert format_expression(Mul(coord(0) + coord(1), coord(2))) == "(x0 + x1)*x2"
    assert format_expression(Neg(Mul(coord(0), coord(1)))) == "-x0*x1"
    assert format_expression(Mul(coord(0), Neg(coord(1)))) == "x0*(-x1)"
    assert format_expression(Pow(coord(0) + coord(1), -2)) == "(x0 + x1)^-2"
    assert format_expression(comp_bar(1, 1), SIG) == "conj(S1.2)"
    assert format_expression(const(1.5 - 2.0j)) == "(1.5 - 2.0j)"
    assert format_expression(const(-3.0) * coord(2)) == "(-3.0)*x2"


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


def test_shipped_scenarios_parse_and_roundtrip():
    for name in ("rotation", "flat"):
        sc = _load_scenario(name)
        canon = format_scenario(sc)
        again = format_scenario(parse_scenario(canon))
        assert again == canon
        assert sc.signature.nslots == 2
        assert sc.transition is not None


def test_scenario_defaults_and_sections():
    sc = parse_scenario(
        """
        [signature]
        slot (1,0|0,0|0,0)
        [frame]
        upsilon 0 0 = 1.0
        upsilon 1 1 = 1.0
        upsilon 2 2 = 1.0
        upsilon 3 3 = 1.0
        """
    )
    assert sc.samples == 16
    assert sc.seed == 20260823
    assert sc.box == (-0.9, 0.9)
    assert sc.transition is None
    assert sc.connection is None
    assert sc.fields == {}
    assert sc.frame.metric is None


def test_scenario_error_reports_line_number():
    bad = "\n".join(
        [
            "[signature]",
            "slot (1,0|0,0|0,0)",
            "[frame]",
            "upsilon 0 0 = 1.0",
            "upsilon 1 1 = 1.0 + wobble",
        ]
    )
    with pytest.raises(ScenarioError, match="line 5"):
        parse_scenario(bad)
    with pytest.raises(ScenarioError, match="before any section"):
        parse_scenario("upsilon 0 0 = 1.0")
    with pytest.raises(ScenarioError, match="signature"):
        parse_scenario("[frame]\nupsilon 0 0 = 1.0")
    with pytest.raises(ScenarioError, match="frame"):
        parse_scenario("[signature]\nslot (1,0|0,0|0,0)")


def test_scenario_rejects_components_outside_fields():
    bad = "\n".join(
        [
            "[signature]",
            "slot (1,0|0,0|0,0)",
            "[frame]",
            "upsilon 0 0 = S1.1",
        ]
    )
    with pytest.raises(ScenarioError, match="line 4"):
        parse_scenario(bad)


def test_scenario_field_entries_land_in_right_slots():
    sc = _load_scenario("rotation")
    psi = sc.fields["psi"]
    assert psi.stype == SpinType(1, 0, 0, 0, 0, 0)
    assert repr(psi.entries[0]) == repr(comp(1, 0) + const(0.5) * coord(1))
    flow = sc.fields["flow"]
    assert repr(flow.entries[0]) == repr(sin(coord(1)))
    assert repr(flow.entries[3]) == repr(const(0.2) * comp(2, 3))


def test_run_suite_rejects_unknown_suite():
    sc = _load_scenario("flat")
    with pytest.raises(ScenarioError, match="unknown suite"):
        run_suite("bogus", sc)


def test_frames_suite_needs_transition():
    sc = parse_scenario(
        """
        [signature]
        slot (1,0|0,0|0,0)
        [frame]
        upsilon 0 0 = 1.0
        upsilon 1 1 = 1.0
        upsilon 2 2 = 1.0
        upsilon 3 3 = 1.0
        """
    )
    with pytest.raises(ScenarioError, match="transition"):
        run_suite("frames", sc)


# ---------------------------------------------------------------------------
# the command-line entry point
# ---------------------------------------------------------------------------


def _run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.mark.parametrize("scenario", ["rotation", "flat"])
@pytest.mark.parametrize("suite", ["group", "metric", "waerden", "frames"])
def test_verify_fast_suites_pass(capsys, scenario, suite):
    rc, out, _ = _run(
        capsys, ["verify", "--scenario", scenario, "--suite", suite]
    )
    assert rc == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines and all(l.startswith("PASS ") for l in lines)
    assert "seed=20260823" in out.splitlines()[0]


def test_verify_all_suites_pass_on_rotation(capsys):
    rc, out, _ = _run(capsys, ["verify", "--scenario", "rotation", "--suite", "all"])
    assert rc == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(lines) >= 30
    assert all(l.startswith("PASS ") for l in lines)
    assert all("max_err=" in l for l in lines)


def test_verify_custom_seed_and_samples_in_header(capsys):
    rc, out, _ = _run(
        capsys,
        [
            "verify",
            "--scenario",
            "flat",
            "--suite",
            "group",
            "--seed",
            "7",
            "--samples",
            "4",
        ],
    )
    assert rc == 0
    header = out.splitlines()[0]
    assert "seed=7" in header and "samples=4" in header


def test_verify_reads_scenario_from_path(tmp_path, capsys):
    sc = _load_scenario("flat")
    p = tmp_path / "mine.scn"
    p.write_text(format_scenario(sc), encoding="utf-8")
    rc, out, _ = _run(capsys, ["verify", "--scenario", str(p), "--suite", "metric"])
    assert rc == 0
    assert f"scenario={p}" in out.splitlines()[0]


def test_verify_tiny_tolerance_fails(capsys):
    rc, out, _ = _run(
        capsys,
        ["verify", "--scenario", "flat", "--suite", "group", "--tol", "1e-30"],
    )
    assert rc == 1
    assert any(l.startswith("FAIL ") for l in out.splitlines())


def test_verify_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("STCALC_TOL", "1e-30")
    rc, out, _ = _run(capsys, ["verify", "--scenario", "flat", "--suite", "group"])
    assert rc == 1
    # an explicit flag wins over the environment
    monkeypatch.setenv("STCALC_TOL", "1e-30")
    rc, out, _ = _run(
        capsys,
        ["verify", "--scenario", "flat", "--suite", "group", "--tol", "100.0"],
    )
    assert rc == 0


def test_verify_missing_scenario_errors(capsys):
    rc, _, err = _run(capsys, ["verify", "--scenario", "nope", "--suite", "group"])
    assert rc == 2
    assert "no such scenario" in err


def test_phi_identity_and_center(capsys):
    rc, out, _ = _run(capsys, ["phi", "--matrix", "1,0;0,1"])
    assert rc == 0
    got = np.array([[float(x) for x in row.split()] for row in out.splitlines()])
    assert np.array_equal(got, np.eye(4))
    rc, out, _ = _run(capsys, ["phi", "--matrix=-1,0;0,-1"])
    assert rc == 0
    got = np.array([[float(x) for x in row.split()] for row in out.splitlines()])
    assert np.array_equal(got, np.eye(4))


def test_phi_boost_values(capsys):
    rc, out, _ = _run(capsys, ["phi", "--matrix", "1.25,0.75;0.75,1.25"])
    assert rc == 0
    got = np.array([[float(x) for x in row.split()] for row in out.splitlines()])
    want = np.eye(4)
    want[0, 0] = want[1, 1] = 2.125
    want[0, 1] = want[1, 0] = 1.875
    assert np.allclose(got, want, atol=1e-12)


def test_phi_rejects_bad_input(capsys):
    rc, _, err = _run(capsys, ["phi", "--matrix", "2,0;0,1"])
    assert rc == 2 and "unimodular" in err
    rc, _, err = _run(capsys, ["phi", "--matrix", "1,0;0"])
    assert rc == 2
    rc, _, err = _run(capsys, ["phi", "--matrix", "spam"])
    assert rc == 2


def test_dim_command(capsys):
    rc, out, _ = _run(capsys, ["dim", "--scenario", "rotation"])
    assert rc == 0
    assert out.strip() == "16"


def test_no_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit):
        main([])
