"""Command-line verification harness.

``stcalc verify`` parses a scenario file (or one of the shipped ones),
runs the requested identity suite on it, and prints one line per check:
``PASS|FAIL <check-id> max_err=<value>``.  The header records the seed so
every run is reproducible; the exit status is 0 exactly when all checks
pass.  ``stcalc phi`` prints the 4x4 image of a unimodular 2x2 matrix
under the covering map, and ``stcalc dim`` prints the real dimension of a
scenario's composite bundle.

Scenario files are plain text with bracketed section headers
(``[signature]``, ``[frame]``, ``[metric]``, ``[transition]``,
``[field NAME type=(a,b|c,d|e,f)]``, ``[connection]``, ``[sampling]``),
one statement per line and ``#`` comments.  Expressions are infix over
``x0..x3``, component variables ``S<slot>.<indices>`` (spinor and barred
indices 1-based with a ``bar`` suffix on barred ones, tensorial indices
0-based), ``conj(...)``, ``sin``/``cos``/``exp``, ``+ - * / ^``.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .differentiation import (
    ConnectionData,
    contract_covariant,
    covariant_apply,
    decompose,
    degenerate_from_fields,
    DegenerateFields,
    nabla_differential,
    random_connection,
    random_covariant,
    random_data,
    recompose,
    spatial_from_connection,
    transform_data,
    transform_field,
    zero_data,
    apply as apply_data,
)
from .exprs import (
    Add,
    Comp,
    CompBar,
    Const,
    Coord,
    Cos,
    Exp,
    Expr,
    Mul,
    Neg,
    Pow,
    Sin,
    comp,
    comp_bar,
    conj,
    const,
    coord,
    cos,
    exp,
    power,
    sin,
)
from .extended_fields import (
    BundlePoint,
    BundleSignature,
    ExtendedField,
    add as field_add,
    bundle_dim,
    contract as field_contract,
    eval_expr_array,
    native,
    random_point,
    scale as field_scale,
    tau,
    tensor_product,
    vnabla,
    vnabla_along,
    vnabla_bar,
)
from .frames import (
    FrameChart,
    TransitionField,
    numeric_transition,
    theta_identity_residuals,
    theta_params,
    theta_params_fd,
    tilde_frame,
    transform_components,
)
from .lorentz_sl2c import (
    minkowski_eta,
    minkowski_sq,
    h_of,
    phi,
    predicted_time_entry,
    random_sl2,
    w_of,
)
from .spin_metric import (
    lower_barred,
    lower_spinor,
    raise_barred,
    raise_spinor,
    sl2_invariance_residual,
)
from .spintensor_core import SpinTensor, SpinType, tau as spin_tau
from .waerden import (
    completeness_residuals,
    metric_conversion_residuals,
    tensor_to_spinor,
)

__all__ = [
    "Scenario",
    "ScenarioError",
    "parse_scenario",
    "format_scenario",
    "parse_expression",
    "format_expression",
    "run_suite",
    "SUITES",
    "main",
]

DEFAULT_SAMPLES = 16
DEFAULT_SEED = 20260823
DEFAULT_BOX = (-0.9, 0.9)


class ScenarioError(ValueError):
    """Malformed scenario text or unusable scenario contents."""


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?:"
    r"(?P<comp>S\d+(?:\.[0-9]+(?:bar)?(?:_[0-9]+(?:bar)?)*)?)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?j?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)

_FUNCS = {"sin": sin, "cos": cos, "exp": exp, "conj": conj}


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ScenarioError(f"cannot read expression at {text[pos:]!r}")
        toks.append((m.lastgroup, m.group()))
        pos = m.end()
    toks.append(("end", ""))
    return toks


def _index_string(stype: SpinType, storage) -> str:
    items = []
    for axis, v in enumerate(storage):
        fam, _ = stype.slot_kind(axis)
        if fam == "tensor":
            items.append(str(v))
        elif fam == "barred":
            items.append(f"{v + 1}bar")
        else:
            items.append(str(v + 1))
    return "_".join(items)


def _parse_index_string(stype: SpinType, text: str | None) -> int:
    if stype.naxes == 0:
        if text:
            raise ScenarioError("scalar slot takes no component indices")
        return 0
    if not text:
        raise ScenarioError("missing component indices")
    items = text.split("_")
    if len(items) != stype.naxes:
        raise ScenarioError(
            f"expected {stype.naxes} indices for type {stype}, got {len(items)}"
        )
    storage = []
    for axis, item in enumerate(items):
        m = re.fullmatch(r"(\d+)(bar)?", item)
        if m is None:
            raise ScenarioError(f"bad component index {item!r}")
        v, barred = int(m.group(1)), m.group(2) is not None
        fam, _ = stype.slot_kind(axis)
        if barred != (fam == "barred"):
            raise ScenarioError(
                f"index {item!r} does not match a {fam} slot (position {axis})"
            )
        if fam == "tensor":
            if not 0 <= v <= 3:
                raise ScenarioError(f"tensorial index {v} out of range 0..3")
            storage.append(v)
        else:
            if not 1 <= v <= 2:
                raise ScenarioError(f"{fam} index {v} out of range 1..2")
            storage.append(v - 1)
    return stype.lin_of_storage(tuple(storage))


class _ExprParser:
    def __init__(self, text: str, signature: BundleSignature | None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.signature = signature

    def _peek(self):
        return self.toks[self.pos]

    def _next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def parse(self) -> Expr:
        e = self._expr()
        kind, text = self._peek()
        if kind != "end":
            raise ScenarioError(f"unexpected {text!r} after expression")
        return e

    def _expr(self) -> Expr:
        e = self._term()
        while self._peek()[1] in ("+", "-"):
            op = self._next()[1]
            rhs = self._term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def _term(self) -> Expr:
        # a leading sign binds the whole product: -a*b parses as -(a*b)
        neg = False
        while self._peek()[1] in ("+", "-"):
            if self._next()[1] == "-":
                neg = not neg
        e = self._power()
        while self._peek()[1] in ("*", "/"):
            op = self._next()[1]
            rhs = self._unary()
            e = e * rhs if op == "*" else e / rhs
        return -e if neg else e

    def _unary(self) -> Expr:
        if self._peek()[1] == "-":
            self._next()
            return -self._unary()
        if self._peek()[1] == "+":
            self._next()
            return self._unary()
        return self._power()

    def _power(self) -> Expr:
        e = self._atom()
        while self._peek()[1] == "^":
            self._next()
            neg = False
            if self._peek()[1] == "-":
                self._next()
                neg = True
            kind, text = self._next()
            if kind != "num" or not re.fullmatch(r"\d+", text):
                raise ScenarioError(f"exponent must be an integer, got {text!r}")
            k = int(text)
            e = power(e, -k if neg else k)
        return e

    def _atom(self) -> Expr:
        kind, text = self._next()
        if kind == "num":
            if text.endswith("j"):
                return const(complex(0.0, float(text[:-1])))
            return const(float(text))
        if kind == "op" and text == "(":
            e = self._expr()
            if self._next()[1] != ")":
                raise ScenarioError("missing closing parenthesis")
            return e
        if kind == "name":
            if re.fullmatch(r"x[0-3]", text):
                return coord(int(text[1]))
            if text in _FUNCS:
                if self._next()[1] != "(":
                    raise ScenarioError(f"{text} needs parentheses")
                e = self._expr()
                if self._next()[1] != ")":
                    raise ScenarioError("missing closing parenthesis")
                return _FUNCS[text](e)
            raise ScenarioError(f"unknown variable {text!r}")
        if kind == "comp":
            if self.signature is None:
                raise ScenarioError(
                    "component variables are not allowed in this section"
                )
            head, _, rest = text.partition(".")
            P = int(head[1:])
            if not 1 <= P <= self.signature.nslots:
                raise ScenarioError(f"argument slot {P} outside the signature")
            lin = _parse_index_string(self.signature.stype(P), rest or None)
            return comp(P, lin)
        raise ScenarioError(f"unexpected {text!r} in expression")


def parse_expression(text: str, signature: BundleSignature | None = None) -> Expr:
    """Parse one infix expression (component variables need a signature)."""
    return _ExprParser(text, signature).parse()


def _fmt_const(v: complex) -> tuple[str, int]:
    v = complex(v)
    if v.imag == 0:
        s = repr(v.real)
        return s, (1 if s.startswith("-") else 3)
    if v.real == 0:
        s = repr(v.imag) + "j"
        return s, (1 if s.startswith("-") else 3)
    sign = "+" if v.imag > 0 else "-"
    return f"({v.real!r} {sign} {abs(v.imag)!r}j)", 3


def _comp_name(slot: int, lin: int, signature: BundleSignature) -> str:
    t = signature.stype(slot)
    if t.naxes == 0:
        return f"S{slot}"
    storage = np.unravel_index(lin, t.shape)
    return f"S{slot}." + _index_string(t, storage)


def _fmt(e: Expr, signature: BundleSignature | None, ctx: int) -> str:
    if isinstance(e, Const):
        s, p = _fmt_const(e.value)
    elif isinstance(e, Coord):
        s, p = f"x{e.index}", 3
    elif isinstance(e, (Comp, CompBar)):
        if signature is None:
            raise ScenarioError("cannot print component variables here")
        name = _comp_name(e.slot, e.lin, signature)
        s = name if isinstance(e, Comp) else f"conj({name})"
        p = 3
    elif isinstance(e, Add):
        if isinstance(e.b, Neg):
            s = f"{_fmt(e.a, signature, 1)} - {_fmt(e.b.a, signature, 2)}"
        else:
            s = f"{_fmt(e.a, signature, 1)} + {_fmt(e.b, signature, 1)}"
        p = 1
    elif isinstance(e, Mul):
        s = f"{_fmt(e.a, signature, 2)}*{_fmt(e.b, signature, 2)}"
        p = 2
    elif isinstance(e, Neg):
        s, p = f"-{_fmt(e.a, signature, 2)}", 1
    elif isinstance(e, Pow):
        s, p = f"{_fmt(e.a, signature, 3)}^{e.k}", 2
    elif isinstance(e, Sin):
        s, p = f"sin({_fmt(e.a, signature, 0)})", 3
    elif isinstance(e, Cos):
        s, p = f"cos({_fmt(e.a, signature, 0)})", 3
    elif isinstance(e, Exp):
        s, p = f"exp({_fmt(e.a, signature, 0)})", 3
    else:
        raise ScenarioError(f"cannot print {type(e).__name__} nodes")
    return f"({s})" if p < ctx else s


def format_expression(e: Expr, signature: BundleSignature | None = None) -> str:
    """Canonical parseable rendering of an expression."""
    return _fmt(e, signature, 0)


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    """Everything a verification run needs: a bundle signature, a frame
    chart (with optional metric), an optional transition, named fields, an
    optional connection, and the sampling policy."""

    signature: BundleSignature
    frame: FrameChart
    transition: TransitionField | None = None
    fields: dict[str, ExtendedField] = field(default_factory=dict)
    connection: ConnectionData | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    box: tuple[float, float] = DEFAULT_BOX
    path: str | None = None


_TYPE_RE = re.compile(
    r"\(\s*(\d+)\s*,\s*(\d+)\s*\|\s*(\d+)\s*,\s*(\d+)\s*\|\s*(\d+)\s*,\s*(\d+)\s*\)"
)

_SECTION_RE = re.compile(r"\[\s*([a-z]+)(?:\s+([^\]]*?))?\s*\]")


def _parse_type(text: str, where: str) -> SpinType:
    m = _TYPE_RE.fullmatch(text.strip())
    if m is None:
        raise ScenarioError(f"{where}: bad slot type {text!r}")
    return SpinType(*(int(g) for g in m.groups()))


def _split_statement(line: str, where: str) -> tuple[list[str], str]:
    head, sep, rhs = line.partition("=")
    if not sep:
        raise ScenarioError(f"{where}: expected 'key ... = expression'")
    return head.split(), rhs.strip()


def parse_scenario(text: str, path: str | None = None) -> Scenario:
    """Parse scenario text; errors carry the 1-based line number."""
    sections: list[tuple[str, str | None, list[tuple[int, str]]]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.fullmatch(line)
        if m is not None:
            current = (m.group(1), m.group(2), [])
            sections.append(current)
            continue
        if current is None:
            raise ScenarioError(f"line {lineno}: statement before any section")
        current[2].append((lineno, line))

    # signature first: everything else may reference its slots
    slots: list[SpinType] = []
    for name, extra, lines in sections:
        if name != "signature":
            continue
        for lineno, line in lines:
            where = f"line {lineno}"
            parts = line.split(None, 1)
            if parts[0] != "slot" or len(parts) != 2:
                raise ScenarioError(f"{where}: expected 'slot (a,b|c,d|e,f)'")
            slots.append(_parse_type(parts[1], where))
    if not slots:
        raise ScenarioError("missing or empty [signature] section")
    sig = BundleSignature(tuple(slots))

    def parse_rhs(rhs, where, with_components):
        try:
            return parse_expression(rhs, sig if with_components else None)
        except ScenarioError as err:
            raise ScenarioError(f"{where}: {err}") from None

    ups = np.full((4, 4), Const(0.0), dtype=object)
    metric = None
    frak = None
    fields: dict[str, ExtendedField] = {}
    conn_arrays = None
    samples, seed, box = DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_BOX
    saw_frame = False

    for name, extra, lines in sections:
        if name == "signature":
            continue
        if name == "frame":
            saw_frame = True
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                if len(lhs) != 3 or lhs[0] != "upsilon":
                    raise ScenarioError(f"{where}: expected 'upsilon V I = expr'")
                v, i = int(lhs[1]), int(lhs[2])
                if not (0 <= v <= 3 and 0 <= i <= 3):
                    raise ScenarioError(f"{where}: frame indices out of range")
                ups[v, i] = parse_rhs(rhs, where, False)
        elif name == "metric":
            if metric is None:
                metric = np.full((4, 4), Const(0.0), dtype=object)
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                if len(lhs) != 3 or lhs[0] != "g":
                    raise ScenarioError(f"{where}: expected 'g V W = expr'")
                v, w = int(lhs[1]), int(lhs[2])
                if not (0 <= v <= 3 and 0 <= w <= 3):
                    raise ScenarioError(f"{where}: metric indices out of range")
                metric[v, w] = parse_rhs(rhs, where, False)
        elif name == "transition":
            if frak is None:
                frak = np.full((2, 2), Const(0.0), dtype=object)
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                if len(lhs) != 3 or lhs[0] != "frakS":
                    raise ScenarioError(f"{where}: expected 'frakS R C = expr'")
                r, c = int(lhs[1]), int(lhs[2])
                if not (0 <= r <= 1 and 0 <= c <= 1):
                    raise ScenarioError(f"{where}: transition indices out of range")
                frak[r, c] = parse_rhs(rhs, where, False)
        elif name == "field":
            m = re.fullmatch(r"(\w+)\s+type=(.*)", (extra or "").strip())
            if m is None:
                raise ScenarioError(
                    "field section needs '[field NAME type=(a,b|c,d|e,f)]'"
                )
            fname = m.group(1)
            ftype = _parse_type(m.group(2), f"field {fname}")
            entries = np.full(ftype.shape, Const(0.0), dtype=object)
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                if lhs[0] != "entry" or len(lhs) > 2:
                    raise ScenarioError(f"{where}: expected 'entry INDEXES = expr'")
                ix = lhs[1] if len(lhs) == 2 else None
                try:
                    lin = _parse_index_string(ftype, ix)
                except ScenarioError as err:
                    raise ScenarioError(f"{where}: {err}") from None
                entries.reshape(-1)[lin] = parse_rhs(rhs, where, True)
            fields[fname] = ExtendedField(sig, ftype, entries)
        elif name == "connection":
            if conn_arrays is None:
                conn_arrays = {
                    "A": np.full((4, 2, 2), Const(0.0), dtype=object),
                    "Abar": np.full((4, 2, 2), Const(0.0), dtype=object),
                    "Gam": np.full((4, 4, 4), Const(0.0), dtype=object),
                }
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                if len(lhs) != 4 or lhs[0] not in conn_arrays:
                    raise ScenarioError(
                        f"{where}: expected 'A|Abar|Gam J K I = expr'"
                    )
                arr = conn_arrays[lhs[0]]
                j, k, i = int(lhs[1]), int(lhs[2]), int(lhs[3])
                dim = arr.shape[1]
                if not (0 <= j <= 3 and 0 <= k < dim and 0 <= i < dim):
                    raise ScenarioError(f"{where}: connection indices out of range")
                arr[j, k, i] = parse_rhs(rhs, where, True)
        elif name == "sampling":
            for lineno, line in lines:
                where = f"line {lineno}"
                lhs, rhs = _split_statement(line, where)
                key = lhs[0] if len(lhs) == 1 else None
                if key == "points":
                    samples = int(rhs)
                elif key == "seed":
                    seed = int(rhs)
                elif key == "box":
                    lo, hi = rhs.split()
                    box = (float(lo), float(hi))
                else:
                    raise ScenarioError(
                        f"{where}: expected 'points|seed|box = ...'"
                    )
        else:
            raise ScenarioError(f"unknown section [{name}]")

    if not saw_frame:
        raise ScenarioError("missing [frame] section")
    frame = FrameChart(ups, metric=metric)
    transition = TransitionField(frak) if frak is not None else None
    connection = ConnectionData(**conn_arrays) if conn_arrays is not None else None
    return Scenario(
        sig, frame, transition, fields, connection, samples, seed, box, path
    )


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def _type_str(t: SpinType) -> str:
    return (
        f"({t.up_spinor},{t.lo_spinor}|{t.up_barred},{t.lo_barred}"
        f"|{t.up_tensor},{t.lo_tensor})"
    )


def format_scenario(sc: Scenario) -> str:
    """Canonical text for a scenario: fixed section order, row-major
    entries, zero entries omitted.  ``parse_scenario`` is its inverse."""
    sig = sc.signature
    out = ["[signature]"]
    for t in sig.slots:
        out.append(f"slot {_type_str(t)}")
    out += ["", "[frame]"]
    for v in range(4):
        for i in range(4):
            e = sc.frame.upsilon[v, i]
            if not _is_zero(e):
                out.append(f"upsilon {v} {i} = {_fmt(e, None, 0)}")
    if sc.frame.metric is not None:
        out += ["", "[metric]"]
        for v in range(4):
            for w in range(4):
                e = sc.frame.metric[v, w]
                if not _is_zero(e):
                    out.append(f"g {v} {w} = {_fmt(e, None, 0)}")
    if sc.transition is not None:
        out += ["", "[transition]"]
        for r in range(2):
            for c in range(2):
                e = sc.transition.frakS[r, c]
                if not _is_zero(e):
                    out.append(f"frakS {r} {c} = {_fmt(e, None, 0)}")
    for fname in sorted(sc.fields):
        F = sc.fields[fname]
        out += ["", f"[field {fname} type={_type_str(F.stype)}]"]
        flat = F.entries.reshape(-1)
        for lin in range(F.stype.count):
            if _is_zero(flat[lin]):
                continue
            if F.stype.naxes == 0:
                out.append(f"entry = {_fmt(flat[lin], sig, 0)}")
            else:
                storage = np.unravel_index(lin, F.stype.shape)
                ix = _index_string(F.stype, storage)
                out.append(f"entry {ix} = {_fmt(flat[lin], sig, 0)}")
    if sc.connection is not None:
        out += ["", "[connection]"]
        for key, arr in (
            ("A", sc.connection.A),
            ("Abar", sc.connection.Abar),
            ("Gam", sc.connection.Gam),
        ):
            for j in range(4):
                for k in range(arr.shape[1]):
                    for i in range(arr.shape[2]):
                        if not _is_zero(arr[j, k, i]):
                            out.append(
                                f"{key} {j} {k} {i} = {_fmt(arr[j, k, i], sig, 0)}"
                            )
    out += [
        "",
        "[sampling]",
        f"points = {sc.samples}",
        f"seed = {sc.seed}",
        f"box = {sc.box[0]!r} {sc.box[1]!r}",
        "",
    ]
    return "\n".join(out)


def _load_scenario(spec: str) -> Scenario:
    """Read a scenario from a path or from the shipped collection."""
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return parse_scenario(fh.read(), path=spec)
    from importlib.resources import files

    name = spec if spec.endswith(".scn") else spec + ".scn"
    res = files("stcalc").joinpath("scenarios", name)
    if not res.is_file():
        raise ScenarioError(f"no such scenario file or shipped scenario: {spec}")
    return parse_scenario(res.read_text(encoding="utf-8"), path=spec)


# ---------------------------------------------------------------------------
# check plumbing
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    check_id: str
    max_err: float
    tol: float

    def passed(self, tol_override: float | None = None) -> bool:
        tol = self.tol if tol_override is None else tol_override
        return self.max_err <= tol


def _rng_for(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng([seed, sum(suite.encode())])


def _points(n, rng, box):
    return [rng.uniform(box[0], box[1], size=4) for _ in range(n)]


def _envs(sig, n, rng, box):
    return [sig.env_of(random_point(sig, rng, box=box)) for _ in range(n)]


def _field_vals(F: ExtendedField, env) -> np.ndarray:
    return eval_expr_array(F.entries, env, F.signature.offsets())


def _rand_field(sig, stype, rng, x_dep=True, c_dep=True) -> ExtendedField:
    out = np.empty(stype.shape, dtype=object)
    for ix in np.ndindex(*stype.shape):
        e = const(complex(rng.normal(), rng.normal()))
        if x_dep:
            e = e + const(complex(rng.normal(), rng.normal())) * coord(
                int(rng.integers(4))
            )
        if c_dep and sig.nslots:
            P = int(rng.integers(1, sig.nslots + 1))
            lin = int(rng.integers(sig.stype(P).count))
            leaf = comp(P, lin) if rng.integers(2) else comp_bar(P, lin)
            e = e + const(complex(rng.normal(), rng.normal())) * leaf
        out[ix] = e
    return ExtendedField(sig, stype, out)


def _dyadic_vectors(rng, n):
    re_ = rng.integers(-512, 513, size=(n, 4)).astype(float)
    im = rng.integers(-512, 513, size=(n, 4)).astype(float)
    return (re_ + 1j * im) / 256.0


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _suite_group(sc: Scenario, rng, samples) -> list[CheckResult]:
    out = []
    worst = 0.0
    for _ in range(200):
        U, V = random_sl2(rng), random_sl2(rng)
        worst = max(worst, float(np.max(np.abs(phi(U @ V) - phi(U) @ phi(V)))))
    out.append(CheckResult("group-homomorphism", worst, 1e-9))

    eye2, eye4 = np.eye(2), np.eye(4)
    worst = max(
        float(np.max(np.abs(phi(eye2) - eye4))),
        float(np.max(np.abs(phi(-eye2) - eye4))),
    )
    out.append(CheckResult("group-kernel-identity", worst, 1e-12))

    sep = np.inf
    count = 0
    while count < 100:
        U = random_sl2(rng)
        if min(np.max(np.abs(U - eye2)), np.max(np.abs(U + eye2))) < 0.1:
            continue
        sep = min(sep, float(np.max(np.abs(phi(U) - eye4))))
        count += 1
    out.append(CheckResult("group-kernel-separation", max(0.0, 1e-3 - sep), 0.0))

    worst_t, worst_d = 0.0, 0.0
    for _ in range(100):
        U = random_sl2(rng)
        S = phi(U)
        worst_t = max(worst_t, abs(S[0, 0] - predicted_time_entry(U)))
        worst_d = max(worst_d, abs(np.linalg.det(S) - 1.0))
    out.append(CheckResult("group-first-entry", worst_t, 1e-12))
    out.append(CheckResult("group-unit-determinant", worst_d, 1e-9))

    worst_r, worst_q = 0.0, 0.0
    for w in _dyadic_vectors(rng, 1000):
        worst_r = max(worst_r, float(np.max(np.abs(w_of(h_of(w)) - w))))
        worst_q = max(worst_q, abs(np.linalg.det(h_of(w)) - minkowski_sq(w)))
    out.append(CheckResult("group-vector-roundtrip", worst_r, 1e-12))
    out.append(CheckResult("group-determinant-quadrance", worst_q, 1e-12))
    return out


def _suite_metric(sc: Scenario, rng, samples) -> list[CheckResult]:
    out = []
    worst = 0.0
    for _ in range(100):
        worst = max(worst, sl2_invariance_residual(random_sl2(rng)))
    out.append(CheckResult("metric-transition-invariance", worst, 1e-12))

    worst = 0.0
    for _ in range(50):
        a = SpinTensor(
            SpinType(1, 0, 0, 0, 0, 0),
            rng.normal(size=2) + 1j * rng.normal(size=2),
        )
        b = SpinTensor(
            SpinType(0, 0, 1, 0, 0, 0),
            rng.normal(size=2) + 1j * rng.normal(size=2),
        )
        worst = max(
            worst,
            float(np.max(np.abs(raise_spinor(lower_spinor(a, 0), 0).comps - a.comps))),
            float(np.max(np.abs(raise_barred(lower_barred(b, 0), 0).comps - b.comps))),
        )
    out.append(CheckResult("metric-raise-lower-roundtrip", worst, 1e-12))
    return out


def _suite_waerden(sc: Scenario, rng, samples) -> list[CheckResult]:
    out = []
    c1, c2 = completeness_residuals()
    out.append(CheckResult("waerden-completeness", max(c1, c2), 1e-12))
    mc = metric_conversion_residuals()
    out.append(CheckResult("waerden-metric-conversion", max(mc.values()), 1e-12))

    worst = 0.0
    for _ in range(50):
        a = SpinTensor(
            SpinType(0, 0, 0, 0, 1, 0),
            rng.normal(size=4) + 1j * rng.normal(size=4),
        )
        tr = numeric_transition(random_sl2(rng))
        left = tensor_to_spinor(transform_components(a, tr, "forward"), 0)
        right = transform_components(tensor_to_spinor(a, 0), tr, "forward")
        worst = max(worst, float(np.max(np.abs(left.comps - right.comps))))
    out.append(CheckResult("waerden-equivariance", worst, 1e-9))
    return out


def _suite_frames(sc: Scenario, rng, samples) -> list[CheckResult]:
    if sc.transition is None:
        raise ScenarioError("the frames suite needs a [transition] section")
    out = []
    xs = _points(samples, rng, sc.box)
    out.append(
        CheckResult("frames-unimodularity", sc.transition.unimodularity_residual(xs), 1e-9)
    )
    if sc.frame.metric is not None:
        out.append(
            CheckResult(
                "frames-orthonormality", sc.frame.orthonormality_residual(xs), 1e-9
            )
        )
    res = theta_identity_residuals(sc.frame, sc.transition, xs)
    for key, val in res.items():
        out.append(CheckResult("frames-" + key.replace("_", "-"), val, 1e-8))

    th = theta_params(sc.frame, sc.transition)
    worst = 0.0
    for x in xs[:3]:
        fd = theta_params_fd(sc.frame, sc.transition, x)
        for key in fd:
            sym = eval_expr_array(th[key], np.asarray(x, dtype=complex), None)
            worst = max(worst, float(np.max(np.abs(sym - fd[key]))))
    out.append(CheckResult("frames-structure-fd-oracle", worst, 1e-6))
    return out


def _random_spintensor(t: SpinType, rng) -> SpinTensor:
    return SpinTensor(
        t, rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape)
    )


def _suite_vertical(sc: Scenario, rng, samples) -> list[CheckResult]:
    sig = sc.signature
    out = []

    worst_dir, worst_conj, worst_split = 0.0, 0.0, 0.0
    for P in range(1, sig.nslots + 1):
        t = sig.stype(P)
        nat = native(sig, P)
        for _ in range(5):
            Y = _random_spintensor(t, rng)
            pt = random_point(sig, rng, box=sc.box)
            got = vnabla_along(nat, P, Y).eval(pt)
            worst_dir = max(worst_dir, float(np.max(np.abs(got.comps - Y.comps))))
            gotc = vnabla_along(tau(nat), P, Y).eval(pt)
            worst_conj = max(
                worst_conj, float(np.max(np.abs(gotc.comps - spin_tau(Y).comps)))
            )
        env = sig.env_of(random_point(sig, rng, box=sc.box))
        for F in (vnabla_bar(nat, P), vnabla(tau(nat), P)):
            worst_split = max(worst_split, float(np.max(np.abs(_field_vals(F, env)))))
    out.append(CheckResult("vertical-lift-reproduces-direction", worst_dir, 1e-12))
    out.append(CheckResult("vertical-conjugate-pairing", worst_conj, 1e-12))
    out.append(CheckResult("vertical-holomorphic-split", worst_split, 1e-12))

    pool = list(sc.fields.values())
    types = [SpinType(1, 0, 0, 0, 0, 0), SpinType(0, 0, 0, 0, 1, 0)]
    while len(pool) < 6:
        pool.append(_rand_field(sig, types[len(pool) % 2], rng))
    h = 1e-5
    worst = 0.0
    for k in range(50):
        F = pool[k % len(pool)]
        P = 1 + k % sig.nslots
        t = sig.stype(P)
        Y = _random_spintensor(t, rng)
        pt = random_point(sig, rng, box=sc.box)
        sym = vnabla_along(F, P, Y).eval(pt).comps

        def at(tshift):
            args = list(pt.args)
            args[P - 1] = SpinTensor(t, args[P - 1].comps + tshift * Y.comps)
            return F.eval(BundlePoint(pt.x, tuple(args))).comps

        fd = (at(h) - at(-h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(sym - fd))))
    out.append(CheckResult("vertical-curve-oracle", worst, 1e-6))
    return out


def _suite_differentiation(sc: Scenario, rng, samples) -> list[CheckResult]:
    sig, chart = sc.signature, sc.frame
    out = []
    envs = _envs(sig, 2, rng, sc.box)

    worst_lin, worst_leib, worst_contr = 0.0, 0.0, 0.0
    for _ in range(50):
        D = random_data(sig, rng)
        X = _rand_field(sig, SpinType(1, 0, 0, 0, 0, 0), rng)
        Y = _rand_field(sig, SpinType(1, 0, 0, 0, 0, 0), rng)
        a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
        lhs = apply_data(D, field_add(field_scale(X, a), field_scale(Y, b)), chart)
        rhs = field_add(
            field_scale(apply_data(D, X, chart), a),
            field_scale(apply_data(D, Y, chart), b),
        )
        W = _rand_field(sig, SpinType(0, 0, 0, 0, 0, 1), rng)
        lhs2 = apply_data(D, tensor_product(X, W), chart)
        rhs2 = field_add(
            tensor_product(apply_data(D, X, chart), W),
            tensor_product(X, apply_data(D, W, chart)),
        )
        M = _rand_field(sig, SpinType(1, 1, 0, 0, 0, 0), rng)
        lhs3 = apply_data(D, field_contract(M, 0, 1), chart)
        rhs3 = field_contract(apply_data(D, M, chart), 0, 1)
        for env in envs:
            worst_lin = max(
                worst_lin,
                float(np.max(np.abs(_field_vals(lhs, env) - _field_vals(rhs, env)))),
            )
            worst_leib = max(
                worst_leib,
                float(np.max(np.abs(_field_vals(lhs2, env) - _field_vals(rhs2, env)))),
            )
            worst_contr = max(
                worst_contr,
                float(np.max(np.abs(_field_vals(lhs3, env) - _field_vals(rhs3, env)))),
            )
    out.append(CheckResult("differentiation-linearity", worst_lin, 1e-9))
    out.append(CheckResult("differentiation-leibniz", worst_leib, 1e-9))
    out.append(CheckResult("differentiation-contraction", worst_contr, 1e-9))

    deg = degenerate_from_fields(
        DegenerateFields(
            _rand_field(sig, SpinType(1, 1, 0, 0, 0, 0), rng),
            _rand_field(sig, SpinType(0, 0, 1, 1, 0, 0), rng),
            _rand_field(sig, SpinType(0, 0, 0, 0, 1, 1), rng),
        )
    )
    worst = 0.0
    for _ in range(100):
        f = _rand_field(sig, SpinType(0, 0, 0, 0, 0, 0), rng)
        e = apply_data(deg, f, chart).entries[()]
        worst = max(worst, abs(complex(e.value)) if isinstance(e, Const) else np.inf)
    out.append(CheckResult("differentiation-scalar-annihilation", worst, 1e-12))

    if sc.transition is not None:
        tr = sc.transition
        tchart = tilde_frame(chart, tr)
        worst = 0.0
        for D, X in [
            (random_data(sig, rng), _rand_field(sig, SpinType(1, 0, 0, 0, 0, 1), rng)),
            (
                contract_covariant(
                    random_covariant(sig, rng), _rand_field(sig, SpinType(0, 0, 0, 0, 1, 0), rng)
                ),
                _rand_field(sig, SpinType(0, 1, 1, 0, 0, 0), rng),
            ),
        ]:
            lhs = transform_field(apply_data(D, X, chart), tr, "forward")
            rhs = apply_data(
                transform_data(D, chart, tr, "forward"),
                transform_field(X, tr, "forward"),
                tchart,
            )
            for env in _envs(sig, 3, rng, sc.box):
                worst = max(
                    worst,
                    float(np.max(np.abs(_field_vals(lhs, env) - _field_vals(rhs, env)))),
                )
        out.append(CheckResult("differentiation-transform-square", worst, 1e-8))

    CD = random_covariant(sig, rng)
    Yv = _rand_field(sig, SpinType(0, 0, 0, 0, 1, 0), rng)
    X = _rand_field(sig, SpinType(1, 0, 0, 0, 0, 1), rng)
    direct = covariant_apply(CD, Yv, X, chart)
    diff = nabla_differential(CD, X, chart)
    t = X.stype
    axis = t.up_spinor + t.lo_spinor + t.up_barred + t.lo_barred + t.up_tensor
    worst = 0.0
    for env in _envs(sig, 3, rng, sc.box):
        dv = np.moveaxis(_field_vals(diff, env), axis, 0)
        yv = eval_expr_array(Yv.entries, env, sig.offsets())
        via = np.tensordot(yv, dv, axes=(0, 0))
        worst = max(worst, float(np.max(np.abs(via - _field_vals(direct, env)))))
    out.append(CheckResult("differentiation-covariant-two-routes", worst, 1e-9))

    conns = [
        ConnectionData(
            np.full((4, 2, 2), Const(0.0), dtype=object),
            np.full((4, 2, 2), Const(0.0), dtype=object),
            np.full((4, 4, 4), Const(0.0), dtype=object),
        ),
        random_connection(rng, sig, x_dep=False),
        random_connection(rng, sig, x_dep=True),
    ]
    if sc.connection is not None:
        conns.append(sc.connection)
    worst = 0.0
    for conn in conns:
        sp = spatial_from_connection(sig, conn)
        for P in range(1, sig.nslots + 1):
            for F in (native(sig, P), tau(native(sig, P))):
                Yd = _rand_field(sig, SpinType(0, 0, 0, 0, 1, 0), rng)
                res = covariant_apply(sp, Yd, F, chart)
                for env in _envs(sig, 2, rng, sc.box):
                    worst = max(worst, float(np.max(np.abs(_field_vals(res, env)))))
    out.append(CheckResult("differentiation-spatial-annihilation", worst, 1e-9))
    return out


def _suite_decomposition(sc: Scenario, rng, samples) -> list[CheckResult]:
    sig = sc.signature
    out = []

    def data_residual(D1, D2, envs):
        worst = 0.0
        offs = sig.offsets()
        for env in envs:
            for part in ("Zvec", "A", "Abar", "Gam"):
                a = eval_expr_array(getattr(D1, part), env, offs)
                b = eval_expr_array(getattr(D2, part), env, offs)
                worst = max(worst, float(np.max(np.abs(a - b))))
            for P in range(1, sig.nslots + 1):
                for part in ("Zcomp", "Zbar"):
                    a = eval_expr_array(getattr(D1, part)[P], env, offs)
                    b = eval_expr_array(getattr(D2, part)[P], env, offs)
                    worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    worst = 0.0
    for k in range(20):
        conn = (
            sc.connection
            if (sc.connection is not None and k == 0)
            else random_connection(rng, sig, x_dep=bool(k % 2), c_dep=bool(k % 3))
        )
        D = random_data(sig, rng)
        back = recompose(decompose(D, conn), conn)
        worst = max(worst, data_residual(D, back, _envs(sig, 2, rng, sc.box)))
    out.append(CheckResult("decomposition-roundtrip", worst, 1e-9))

    conn = sc.connection or random_connection(rng, sig, x_dep=True)
    envs = _envs(sig, 3, rng, sc.box)
    offs = sig.offsets()

    D = zero_data(sig)
    D.Zcomp[1] = _rand_field(sig, sig.stype(1), rng).entries
    parts = decompose(D, conn)
    worst = 0.0
    for env in envs:
        worst = max(worst, float(np.max(np.abs(eval_expr_array(parts.X.entries, env, offs)))))
        worst = max(
            worst,
            float(
                np.max(
                    np.abs(
                        eval_expr_array(parts.Y[1].entries, env, offs)
                        - eval_expr_array(D.Zcomp[1], env, offs)
                    )
                )
            ),
        )
        for F in (parts.S.spinor, parts.S.barred, parts.S.tensor):
            worst = max(worst, float(np.max(np.abs(eval_expr_array(F.entries, env, offs)))))
    out.append(CheckResult("decomposition-vertical-case", worst, 1e-12))

    sp = spatial_from_connection(sig, conn)
    Xv = _rand_field(sig, SpinType(0, 0, 0, 0, 1, 0), rng)
    parts = decompose(contract_covariant(sp, Xv), conn)
    worst = 0.0
    for env in envs:
        worst = max(
            worst,
            float(
                np.max(
                    np.abs(
                        eval_expr_array(parts.X.entries, env, offs)
                        - eval_expr_array(Xv.entries, env, offs)
                    )
                )
            ),
        )
        for P in range(1, sig.nslots + 1):
            worst = max(worst, float(np.max(np.abs(eval_expr_array(parts.Y[P].entries, env, offs)))))
            worst = max(worst, float(np.max(np.abs(eval_expr_array(parts.Ybar[P].entries, env, offs)))))
        for F in (parts.S.spinor, parts.S.barred, parts.S.tensor):
            worst = max(worst, float(np.max(np.abs(eval_expr_array(F.entries, env, offs)))))
    out.append(CheckResult("decomposition-spatial-case", worst, 1e-12))

    fields = DegenerateFields(
        _rand_field(sig, SpinType(1, 1, 0, 0, 0, 0), rng),
        _rand_field(sig, SpinType(0, 0, 1, 1, 0, 0), rng),
        _rand_field(sig, SpinType(0, 0, 0, 0, 1, 1), rng),
    )
    parts = decompose(degenerate_from_fields(fields), conn)
    worst = 0.0
    for env in envs:
        worst = max(worst, float(np.max(np.abs(eval_expr_array(parts.X.entries, env, offs)))))
        for P in range(1, sig.nslots + 1):
            worst = max(worst, float(np.max(np.abs(eval_expr_array(parts.Y[P].entries, env, offs)))))
        for F, src in (
            (parts.S.spinor, fields.spinor),
            (parts.S.barred, fields.barred),
            (parts.S.tensor, fields.tensor),
        ):
            worst = max(
                worst,
                float(
                    np.max(
                        np.abs(
                            eval_expr_array(F.entries, env, offs)
                            - eval_expr_array(src.entries, env, offs)
                        )
                    )
                ),
            )
    out.append(CheckResult("decomposition-degenerate-case", worst, 1e-12))
    return out


_SUITE_FNS = {
    "group": _suite_group,
    "metric": _suite_metric,
    "waerden": _suite_waerden,
    "frames": _suite_frames,
    "vertical": _suite_vertical,
    "differentiation": _suite_differentiation,
    "decomposition": _suite_decomposition,
}

SUITES = tuple(_SUITE_FNS) + ("all",)


def run_suite(
    name: str,
    sc: Scenario,
    seed: int | None = None,
    samples: int | None = None,
) -> list[CheckResult]:
    """Run one suite (or all of them) on a scenario."""
    if name not in SUITES:
        raise ScenarioError(f"unknown suite {name!r}")
    seed = sc.seed if seed is None else seed
    samples = sc.samples if samples is None else samples
    names = list(_SUITE_FNS) if name == "all" else [name]
    out = []
    for n in names:
        out.extend(_SUITE_FNS[n](sc, _rng_for(seed, n), samples))
    return out


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _cmd_verify(args) -> int:
    sc = _load_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    samples = sc.samples if args.samples is None else args.samples
    tol_override = args.tol
    if tol_override is None and os.environ.get("STCALC_TOL"):
        tol_override = float(os.environ["STCALC_TOL"])

    start = time.perf_counter()
    results = run_suite(args.suite, sc, seed=seed, samples=samples)
    elapsed = time.perf_counter() - start

    print(
        f"# stcalc verify suite={args.suite} scenario={args.scenario} "
        f"seed={seed} samples={samples}"
    )
    failed = 0
    for r in results:
        ok = r.passed(tol_override)
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {r.check_id} max_err={r.max_err:.3e}")
    print(
        f"# {len(results)} checks, {len(results) - failed} passed, "
        f"{failed} failed in {elapsed:.2f}s"
    )
    return 0 if failed == 0 else 1


def _cmd_phi(args) -> int:
    rows = args.matrix.split(";")
    try:
        U = np.array(
            [[complex(x.strip()) for x in row.split(",")] for row in rows],
            dtype=complex,
        )
    except ValueError:
        print(f"cannot parse matrix {args.matrix!r}", file=sys.stderr)
        return 2
    if U.shape != (2, 2):
        print("matrix must be 2x2 as 'a,b;c,d'", file=sys.stderr)
        return 2
    det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
    if abs(det - 1.0) > 1e-9:
        print(f"matrix is not unimodular: det = {det:.6g}", file=sys.stderr)
        return 2
    S = phi(U)
    for row in S:
        print(" ".join(f"{x:.12g}" for x in row))
    return 0


def _cmd_dim(args) -> int:
    sc = _load_scenario(args.scenario)
    print(bundle_dim(sc.signature))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stcalc",
        description="Spin-tensor calculus verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run an identity suite on a scenario")
    v.add_argument(
        "--scenario",
        default="rotation",
        help="path to a .scn file, or the name of a shipped scenario "
        "(rotation, flat)",
    )
    v.add_argument("--suite", default="all", choices=SUITES)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument(
        "--tol",
        type=float,
        default=None,
        help="override every check tolerance (also via STCALC_TOL)",
    )
    v.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("phi", help="print the 4x4 image of a unimodular 2x2 matrix")
    p.add_argument("--matrix", required=True, help="entries as 'a,b;c,d'")
    p.set_defaults(fn=_cmd_phi)

    d = sub.add_parser("dim", help="print the real bundle dimension of a scenario")
    d.add_argument("--scenario", required=True)
    d.set_defaults(fn=_cmd_dim)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
