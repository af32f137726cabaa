"""Scalar expressions over a bundle chart, with exact derivatives.

An expression is a tree over the leaves

* ``Coord(i)``          -- the i-th (real) base coordinate, i = 0..3,
* ``Comp(P, lin)``      -- the lin-th canonical component of the P-th
                           spin-tensor argument slot (P is 1-based),
* ``CompBar(P, lin)``   -- its complex conjugate, treated as an independent
                           variable when differentiating (Wirtinger style),
* ``Const(value)``      -- a complex constant,

combined with ``+``, ``*``, negation, integer powers and the entire functions
sin, cos, exp.  Conjugation is structural: it never introduces a wrapper
node, instead it swaps ``Comp``/``CompBar`` and pushes through everything
else (coordinates are real, the allowed transcendentals commute with
conjugation).

For fast repeated evaluation an expression compiles once into a flat
postfix program executed by a small stack machine.  The machine has two
interchangeable implementations: a compiled Cython kernel and a pure-Python
interpreter with identical semantics.  The compiled one is selected at import
when available; set ``STCALC_PURE_EVAL=1`` to force the fallback.
"""

from __future__ import annotations

import cmath
import os
from dataclasses import dataclass

import numpy as np

if os.environ.get("STCALC_PURE_EVAL"):
    from . import _expr_eval_py as _kernel

    _KERNEL_NAME = "python"
else:
    try:
        from . import _expr_eval as _kernel

        _KERNEL_NAME = "compiled"
    except ImportError:
        from . import _expr_eval_py as _kernel

        _KERNEL_NAME = "python"

__all__ = [
    "Expr",
    "Const",
    "Coord",
    "Comp",
    "CompBar",
    "const",
    "coord",
    "comp",
    "comp_bar",
    "sin",
    "cos",
    "exp",
    "power",
    "conj",
    "diff_coord",
    "diff_comp",
    "diff_comp_bar",
    "substitute_components",
    "eval_tree",
    "Program",
    "compile_program",
    "run_program",
    "eval_compiled",
    "kernel_name",
    "as_expr_matrix",
    "sym_det",
    "sym_adjugate",
    "sym_inverse",
]

OP_CONST = 0
OP_LOADX = 1
OP_LOADC = 2
OP_LOADCC = 3
OP_ADD = 4
OP_MUL = 5
OP_NEG = 6
OP_POW = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10


def kernel_name() -> str:
    return _KERNEL_NAME


class Expr:
    __slots__ = ("_prog", "_prog_key")

    def __init__(self):
        self._prog = None
        self._prog_key = None

    def __add__(self, other):
        return _add(self, _wrap(other))

    def __radd__(self, other):
        return _add(_wrap(other), self)

    def __sub__(self, other):
        return _add(self, _neg(_wrap(other)))

    def __rsub__(self, other):
        return _add(_wrap(other), _neg(self))

    def __mul__(self, other):
        return _mul(self, _wrap(other))

    def __rmul__(self, other):
        return _mul(_wrap(other), self)

    def __truediv__(self, other):
        other = _wrap(other)
        if isinstance(other, Const):
            return _mul(self, Const(1.0 / other.value))
        return _mul(self, _pow(other, -1))

    def __rtruediv__(self, other):
        return _mul(_wrap(other), _pow(self, -1))

    def __neg__(self):
        return _neg(self)

    def __pow__(self, k):
        return power(self, k)

    def conjugate(self):
        return conj(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = complex(value)

    def __repr__(self):
        return f"{self.value}"


class Coord(Expr):
    __slots__ = ("index",)

    def __init__(self, index):
        super().__init__()
        if not 0 <= index <= 3:
            raise ValueError(f"coordinate index {index} out of range")
        self.index = index

    def __repr__(self):
        return f"x{self.index}"


class Comp(Expr):
    __slots__ = ("slot", "lin")

    def __init__(self, slot, lin):
        super().__init__()
        self.slot = slot
        self.lin = lin

    def __repr__(self):
        return f"S{self.slot}[{self.lin}]"


class CompBar(Expr):
    __slots__ = ("slot", "lin")

    def __init__(self, slot, lin):
        super().__init__()
        self.slot = slot
        self.lin = lin

    def __repr__(self):
        return f"conj(S{self.slot}[{self.lin}])"


class Add(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__()
        self.a = a
        self.b = b

    def __repr__(self):
        return f"({self.a!r} + {self.b!r})"


class Mul(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__()
        self.a = a
        self.b = b

    def __repr__(self):
        return f"({self.a!r}*{self.b!r})"


class Neg(Expr):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__()
        self.a = a

    def __repr__(self):
        return f"(-{self.a!r})"


class Pow(Expr):
    __slots__ = ("a", "k")

    def __init__(self, a, k):
        super().__init__()
        self.a = a
        self.k = k

    def __repr__(self):
        return f"({self.a!r}**{self.k})"


class Sin(Expr):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__()
        self.a = a

    def __repr__(self):
        return f"sin({self.a!r})"


class Cos(Expr):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__()
        self.a = a

    def __repr__(self):
        return f"cos({self.a!r})"


class Exp(Expr):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__()
        self.a = a

    def __repr__(self):
        return f"exp({self.a!r})"


_ZERO = Const(0.0)
_ONE = Const(1.0)


def _wrap(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.integer, np.floating, np.complexfloating)):
        return Const(complex(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def _pow(a, k):
    k = int(k)
    if k == 0:
        return _ONE
    if k == 1:
        return a
    if isinstance(a, Const):
        if a.value == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Const(a.value**k)
    return Pow(a, k)


def const(value) -> Expr:
    return Const(value)


def coord(i: int) -> Expr:
    return Coord(i)


def comp(slot: int, lin: int) -> Expr:
    return Comp(slot, lin)


def comp_bar(slot: int, lin: int) -> Expr:
    return CompBar(slot, lin)


def sin(a) -> Expr:
    a = _wrap(a)
    if isinstance(a, Const):
        return Const(cmath.sin(a.value))
    return Sin(a)


def cos(a) -> Expr:
    a = _wrap(a)
    if isinstance(a, Const):
        return Const(cmath.cos(a.value))
    return Cos(a)


def exp(a) -> Expr:
    a = _wrap(a)
    if isinstance(a, Const):
        return Const(cmath.exp(a.value))
    return Exp(a)


def power(a, k: int) -> Expr:
    if isinstance(k, float) and not k.is_integer():
        raise ValueError("only integer powers are supported")
    return _pow(_wrap(a), int(k))


# ---------------------------------------------------------------------------
# structural conjugation, derivatives, substitution (all memoized on the DAG)
# ---------------------------------------------------------------------------


def conj(e: Expr) -> Expr:
    return _conj(_wrap(e), {})


def _conj(e, memo):
    r = memo.get(id(e))
    if r is not None:
        return r
    if isinstance(e, Const):
        r = Const(e.value.conjugate())
    elif isinstance(e, Coord):
        r = e
    elif isinstance(e, Comp):
        r = CompBar(e.slot, e.lin)
    elif isinstance(e, CompBar):
        r = Comp(e.slot, e.lin)
    elif isinstance(e, Add):
        r = _add(_conj(e.a, memo), _conj(e.b, memo))
    elif isinstance(e, Mul):
        r = _mul(_conj(e.a, memo), _conj(e.b, memo))
    elif isinstance(e, Neg):
        r = _neg(_conj(e.a, memo))
    elif isinstance(e, Pow):
        r = _pow(_conj(e.a, memo), e.k)
    elif isinstance(e, Sin):
        r = sin(_conj(e.a, memo))
    elif isinstance(e, Cos):
        r = cos(_conj(e.a, memo))
    elif isinstance(e, Exp):
        r = exp(_conj(e.a, memo))
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[id(e)] = r
    return r


def diff_coord(e: Expr, i: int) -> Expr:
    return _diff(_wrap(e), ("x", i), {})


def diff_comp(e: Expr, slot: int, lin: int) -> Expr:
    return _diff(_wrap(e), ("c", slot, lin), {})


def diff_comp_bar(e: Expr, slot: int, lin: int) -> Expr:
    return _diff(_wrap(e), ("cc", slot, lin), {})


def _diff(e, var, memo):
    r = memo.get(id(e))
    if r is not None:
        return r
    if isinstance(e, Const):
        r = _ZERO
    elif isinstance(e, Coord):
        r = _ONE if var[0] == "x" and var[1] == e.index else _ZERO
    elif isinstance(e, Comp):
        hit = var[0] == "c" and var[1] == e.slot and var[2] == e.lin
        r = _ONE if hit else _ZERO
    elif isinstance(e, CompBar):
        hit = var[0] == "cc" and var[1] == e.slot and var[2] == e.lin
        r = _ONE if hit else _ZERO
    elif isinstance(e, Add):
        r = _add(_diff(e.a, var, memo), _diff(e.b, var, memo))
    elif isinstance(e, Mul):
        r = _add(
            _mul(_diff(e.a, var, memo), e.b),
            _mul(e.a, _diff(e.b, var, memo)),
        )
    elif isinstance(e, Neg):
        r = _neg(_diff(e.a, var, memo))
    elif isinstance(e, Pow):
        r = _mul(
            _mul(Const(e.k), _pow(e.a, e.k - 1)),
            _diff(e.a, var, memo),
        )
    elif isinstance(e, Sin):
        r = _mul(cos(e.a), _diff(e.a, var, memo))
    elif isinstance(e, Cos):
        r = _neg(_mul(sin(e.a), _diff(e.a, var, memo)))
    elif isinstance(e, Exp):
        r = _mul(exp(e.a), _diff(e.a, var, memo))
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[id(e)] = r
    return r


def substitute_components(e: Expr, mapping) -> Expr:
    """Replace every argument-component leaf by an expression.

    ``mapping(slot, lin)`` must return the replacement for ``Comp(slot,
    lin)``; conjugated leaves receive the structural conjugate of the same
    replacement.  Coordinates and constants pass through.
    """
    get = mapping if callable(mapping) else lambda s, l: mapping[(s, l)]
    return _subs(_wrap(e), get, {})


def _subs(e, get, memo):
    r = memo.get(id(e))
    if r is not None:
        return r
    if isinstance(e, (Const, Coord)):
        r = e
    elif isinstance(e, Comp):
        r = _wrap(get(e.slot, e.lin))
    elif isinstance(e, CompBar):
        r = conj(_wrap(get(e.slot, e.lin)))
    elif isinstance(e, Add):
        r = _add(_subs(e.a, get, memo), _subs(e.b, get, memo))
    elif isinstance(e, Mul):
        r = _mul(_subs(e.a, get, memo), _subs(e.b, get, memo))
    elif isinstance(e, Neg):
        r = _neg(_subs(e.a, get, memo))
    elif isinstance(e, Pow):
        r = _pow(_subs(e.a, get, memo), e.k)
    elif isinstance(e, Sin):
        r = sin(_subs(e.a, get, memo))
    elif isinstance(e, Cos):
        r = cos(_subs(e.a, get, memo))
    elif isinstance(e, Exp):
        r = exp(_subs(e.a, get, memo))
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[id(e)] = r
    return r


def eval_tree(e: Expr, x, comps=None) -> complex:
    """Reference tree-walking evaluator (used to cross-check the kernels).

    ``x`` is a length-4 sequence of coordinates, ``comps`` a dict mapping the
    1-based slot number to the flat complex component array of that slot.
    """
    return _eval(_wrap(e), x, comps or {}, {})


def _eval(e, x, comps, memo):
    r = memo.get(id(e))
    if r is not None:
        return r
    if isinstance(e, Const):
        r = e.value
    elif isinstance(e, Coord):
        r = complex(x[e.index])
    elif isinstance(e, Comp):
        r = complex(comps[e.slot][e.lin])
    elif isinstance(e, CompBar):
        r = complex(comps[e.slot][e.lin]).conjugate()
    elif isinstance(e, Add):
        r = _eval(e.a, x, comps, memo) + _eval(e.b, x, comps, memo)
    elif isinstance(e, Mul):
        r = _eval(e.a, x, comps, memo) * _eval(e.b, x, comps, memo)
    elif isinstance(e, Neg):
        r = -_eval(e.a, x, comps, memo)
    elif isinstance(e, Pow):
        r = _powc(_eval(e.a, x, comps, memo), e.k)
    elif isinstance(e, Sin):
        r = cmath.sin(_eval(e.a, x, comps, memo))
    elif isinstance(e, Cos):
        r = cmath.cos(_eval(e.a, x, comps, memo))
    elif isinstance(e, Exp):
        r = cmath.exp(_eval(e.a, x, comps, memo))
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[id(e)] = r
    return r


def _powc(v: complex, k: int) -> complex:
    m = -k if k < 0 else k
    out = 1.0 + 0.0j
    base = v
    while m:
        if m & 1:
            out *= base
        base *= base
        m >>= 1
    return 1.0 / out if k < 0 else out


# ---------------------------------------------------------------------------
# compilation to the stack machine
# ---------------------------------------------------------------------------


@dataclass
class Program:
    codes: np.ndarray
    iargs: np.ndarray
    consts: np.ndarray
    stack_need: int


_MAX_PROGRAM = 2_000_000


def compile_program(e: Expr, offsets=None) -> Program:
    """Flatten an expression into a postfix program.

    ``offsets`` maps each 1-based argument slot to the start of its
    components inside the environment vector ``[x0..x3, slot 1 components,
    slot 2 components, ...]``.  Expressions without argument leaves compile
    with ``offsets=None``.
    """
    codes: list[int] = []
    iargs: list[int] = []
    consts: list[complex] = []
    const_ix: dict[complex, int] = {}

    def emit(op, arg=0):
        codes.append(op)
        iargs.append(arg)
        if len(codes) > _MAX_PROGRAM:
            raise ValueError("expression too large to compile")

    def comp_address(slot, lin):
        if offsets is None or slot not in offsets:
            raise ValueError(
                f"expression references argument slot {slot} "
                "but no offset table was given for it"
            )
        return offsets[slot] + lin

    work = [(e, False)]
    while work:
        node, ready = work.pop()
        if ready:
            if isinstance(node, Add):
                emit(OP_ADD)
            elif isinstance(node, Mul):
                emit(OP_MUL)
            elif isinstance(node, Neg):
                emit(OP_NEG)
            elif isinstance(node, Pow):
                emit(OP_POW, node.k)
            elif isinstance(node, Sin):
                emit(OP_SIN)
            elif isinstance(node, Cos):
                emit(OP_COS)
            else:
                emit(OP_EXP)
            continue
        if isinstance(node, Const):
            ix = const_ix.get(node.value)
            if ix is None:
                ix = len(consts)
                consts.append(node.value)
                const_ix[node.value] = ix
            emit(OP_CONST, ix)
        elif isinstance(node, Coord):
            emit(OP_LOADX, node.index)
        elif isinstance(node, Comp):
            emit(OP_LOADC, comp_address(node.slot, node.lin))
        elif isinstance(node, CompBar):
            emit(OP_LOADCC, comp_address(node.slot, node.lin))
        elif isinstance(node, (Add, Mul)):
            work.append((node, True))
            work.append((node.b, False))
            work.append((node.a, False))
        elif isinstance(node, (Neg, Pow, Sin, Cos, Exp)):
            work.append((node, True))
            work.append((node.a, False))
        else:
            raise TypeError(f"unknown node {type(node).__name__}")

    depth = 0
    need = 0
    for op in codes:
        if op in (OP_CONST, OP_LOADX, OP_LOADC, OP_LOADCC):
            depth += 1
            need = max(need, depth)
        elif op in (OP_ADD, OP_MUL):
            depth -= 1
    if depth != 1:
        raise AssertionError("malformed program")

    return Program(
        codes=np.asarray(codes, dtype=np.int64),
        iargs=np.asarray(iargs, dtype=np.int64),
        consts=np.asarray(consts if consts else [0.0], dtype=np.complex128),
        stack_need=need,
    )


def run_program(prog: Program, env: np.ndarray) -> complex:
    stack = np.empty(prog.stack_need, dtype=np.complex128)
    return _kernel.eval_program(prog.codes, prog.iargs, prog.consts, env, stack)


def eval_compiled(e: Expr, env: np.ndarray, offsets=None) -> complex:
    """Evaluate via the stack machine, caching the compiled program on the
    node (re-compiled only when the offset table changes)."""
    key = None if offsets is None else tuple(sorted(offsets.items()))
    if e._prog is None or e._prog_key != key:
        e._prog = compile_program(e, offsets)
        e._prog_key = key
    return run_program(e._prog, env)


# ---------------------------------------------------------------------------
# small symbolic matrix helpers (object arrays of expressions)
# ---------------------------------------------------------------------------


def as_expr_matrix(M) -> np.ndarray:
    """Wrap a numeric matrix (or nested list) into an expression matrix."""
    M = np.asarray(M)
    out = np.empty(M.shape, dtype=object)
    for ix in np.ndindex(*M.shape):
        v = M[ix]
        out[ix] = v if isinstance(v, Expr) else Const(v)
    return out


def sym_det(M) -> Expr:
    """Determinant of a small expression matrix by cofactor expansion."""
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("square matrix required")
    if n == 1:
        return _wrap(M[0, 0])
    if n == 2:
        return _wrap(M[0, 0]) * M[1, 1] - _wrap(M[0, 1]) * M[1, 0]
    total = _ZERO
    for j in range(n):
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        term = _wrap(M[0, j]) * sym_det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def sym_adjugate(M) -> np.ndarray:
    n = M.shape[0]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            cof = sym_det(minor)
            out[j, i] = cof if (i + j) % 2 == 0 else -cof
    return out


def sym_inverse(M) -> np.ndarray:
    """Inverse of a small expression matrix: adjugate over determinant."""
    det = sym_det(M)
    inv_det = _pow(det, -1) if not isinstance(det, Const) else Const(1.0 / det.value)
    return sym_adjugate(M) * inv_det
