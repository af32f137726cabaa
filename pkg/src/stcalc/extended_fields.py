"""Extended fields over a composite spin-tensor bundle.

A bundle chart consists of the four base coordinates plus, for every argument
slot P of the signature, the canonical components of the P-th spin-tensor
argument.  An extended field of a given signature and type is a shaped array
of scalar expressions in those variables (see ``exprs``); evaluating it at a
bundle point yields an ordinary spin-tensor.

The module provides the algebra of such fields (addition, scaling by scalar
expressions, tensor product, contraction, conjugate transposition), the
native fields (the extended field returning an argument slot verbatim), and
the canonical vertical derivatives: partial differentiation in the argument
components and in their conjugates.  Operator-born slots are placed before
the field's own slots within each slot group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprs import (
    Const,
    Expr,
    comp,
    diff_comp,
    diff_comp_bar,
    eval_compiled,
)
from .exprs import Expr as ScalarExpr  # noqa: F401  (re-exported API name)
from .spintensor_core import (
    SpinTensor,
    SpinType,
    conjugate_layout_array,
    contract_array,
    tau_array,
    tensor_product_array,
)

__all__ = [
    "ScalarExpr",
    "BundleSignature",
    "BundlePoint",
    "ExtendedField",
    "as_field",
    "zero_field",
    "const_field",
    "native",
    "add",
    "scale",
    "tensor_product",
    "contract",
    "tau",
    "vnabla",
    "vnabla_bar",
    "vnabla_along",
    "bundle_dim",
    "vertical_lift_coeffs",
    "eval_expr_array",
    "random_point",
]


@dataclass(frozen=True)
class BundleSignature:
    """Ordered list of spin-tensor argument slots (1-based access)."""

    slots: tuple[SpinType, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))

    @property
    def nslots(self) -> int:
        return len(self.slots)

    def stype(self, P: int) -> SpinType:
        if not 1 <= P <= self.nslots:
            raise IndexError(f"argument slot {P} out of range (1..{self.nslots})")
        return self.slots[P - 1]

    def offsets(self) -> dict[int, int]:
        """Start of each slot's components in the environment vector."""
        offs = {}
        pos = 4
        for P in range(1, self.nslots + 1):
            offs[P] = pos
            pos += self.stype(P).count
        return offs

    @property
    def env_length(self) -> int:
        return 4 + sum(t.count for t in self.slots)

    def env_of(self, point: "BundlePoint") -> np.ndarray:
        env = np.empty(self.env_length, dtype=complex)
        env[:4] = point.x
        pos = 4
        for P in range(1, self.nslots + 1):
            cnt = self.stype(P).count
            env[pos : pos + cnt] = point.arg(P).flat
            pos += cnt
        return env


def bundle_dim(signature: BundleSignature) -> int:
    """Real dimension of the composite bundle: each complex component counts
    twice, plus the four base coordinates."""
    return 2 * sum(t.count for t in signature.slots) + 4


@dataclass
class BundlePoint:
    """A base point plus one spin-tensor value per argument slot."""

    x: np.ndarray
    args: tuple[SpinTensor, ...]

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.shape != (4,):
            raise ValueError("base point needs exactly 4 coordinates")
        self.args = tuple(self.args)

    def arg(self, P: int) -> SpinTensor:
        return self.args[P - 1]

    def matches(self, signature: BundleSignature) -> bool:
        return len(self.args) == signature.nslots and all(
            a.stype == signature.stype(P) for P, a in enumerate(self.args, start=1)
        )


def random_point(
    signature: BundleSignature,
    rng: np.random.Generator,
    box: tuple[float, float] = (-0.9, 0.9),
    arg_scale: float = 1.0,
) -> BundlePoint:
    lo, hi = box
    x = rng.uniform(lo, hi, size=4)
    args = []
    for t in signature.slots:
        re = rng.normal(scale=arg_scale, size=t.shape)
        im = rng.normal(scale=arg_scale, size=t.shape)
        args.append(SpinTensor(t, re + 1j * im))
    return BundlePoint(x, tuple(args))


@dataclass
class ExtendedField:
    """A spin-tensor-valued function on the bundle, one expression per
    component (entries shaped like ``stype.shape``)."""

    signature: BundleSignature
    stype: SpinType
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=object)
        if arr.shape != self.stype.shape:
            raise ValueError(
                f"entry shape {arr.shape} does not match type {self.stype}"
            )
        self.entries = arr

    def entry(self, *storage_index) -> Expr:
        return self.entries[tuple(storage_index)]

    def eval(self, point: BundlePoint) -> SpinTensor:
        if not point.matches(self.signature):
            raise ValueError("bundle point does not match the field's signature")
        env = self.signature.env_of(point)
        offs = self.signature.offsets()
        out = np.empty(self.stype.shape, dtype=complex)
        for ix in np.ndindex(*self.stype.shape):
            out[ix] = eval_compiled(self.entries[ix], env, offs)
        return SpinTensor(self.stype, out)


def eval_expr_array(arr, env: np.ndarray, offsets) -> np.ndarray:
    """Evaluate an object array of expressions into a complex array."""
    arr = np.asarray(arr, dtype=object)
    out = np.empty(arr.shape, dtype=complex)
    for ix in np.ndindex(*arr.shape):
        out[ix] = eval_compiled(arr[ix], env, offsets)
    return out


def as_field(signature: BundleSignature, stype: SpinType, entries) -> ExtendedField:
    """Build a field, wrapping plain numbers into constant expressions."""
    arr = np.empty(stype.shape, dtype=object)
    src = np.asarray(entries, dtype=object)
    if src.shape != stype.shape:
        src = src.reshape(stype.shape)
    for ix in np.ndindex(*stype.shape):
        v = src[ix]
        arr[ix] = v if isinstance(v, Expr) else Const(v)
    return ExtendedField(signature, stype, arr)


def zero_field(signature: BundleSignature, stype: SpinType) -> ExtendedField:
    return as_field(signature, stype, np.zeros(stype.shape, dtype=complex))


def const_field(signature: BundleSignature, value: SpinTensor) -> ExtendedField:
    return as_field(signature, value.stype, value.comps)


def native(signature: BundleSignature, P: int) -> ExtendedField:
    """The extended field whose value is the P-th argument itself."""
    t = signature.stype(P)
    arr = np.empty(t.shape, dtype=object)
    for ix in np.ndindex(*t.shape):
        arr[ix] = comp(P, t.lin_of_storage(ix))
    return ExtendedField(signature, t, arr)


def _check_same_bundle(a: ExtendedField, b: ExtendedField):
    if a.signature != b.signature:
        raise ValueError("fields live over different bundle signatures")


def add(a: ExtendedField, b: ExtendedField) -> ExtendedField:
    _check_same_bundle(a, b)
    if a.stype != b.stype:
        raise ValueError(f"type mismatch: {a.stype} vs {b.stype}")
    out = np.empty(a.stype.shape, dtype=object)
    for ix in np.ndindex(*a.stype.shape):
        out[ix] = a.entries[ix] + b.entries[ix]
    return ExtendedField(a.signature, a.stype, out)


def scale(a: ExtendedField, c) -> ExtendedField:
    """Multiply by a complex number or a scalar expression."""
    out = np.empty(a.stype.shape, dtype=object)
    for ix in np.ndindex(*a.stype.shape):
        out[ix] = a.entries[ix] * c
    return ExtendedField(a.signature, a.stype, out)


def tensor_product(a: ExtendedField, b: ExtendedField) -> ExtendedField:
    _check_same_bundle(a, b)
    arr, stype = tensor_product_array(a.entries, a.stype, b.entries, b.stype)
    return ExtendedField(a.signature, stype, arr)


def contract(a: ExtendedField, up_slot: int, down_slot: int) -> ExtendedField:
    arr, stype = contract_array(a.entries, a.stype, up_slot, down_slot)
    return ExtendedField(a.signature, stype, np.asarray(arr, dtype=object))


def tau(a: ExtendedField) -> ExtendedField:
    arr, stype = tau_array(a.entries, a.stype)
    return ExtendedField(a.signature, stype, np.asarray(arr, dtype=object))


# ---------------------------------------------------------------------------
# vertical (argument-direction) differentiation
# ---------------------------------------------------------------------------


def _concat_types(op: SpinType, fld: SpinType) -> SpinType:
    return SpinType(*(x + y for x, y in zip(op.counts, fld.counts)))


def _interleave(op: SpinType, op_ix, fld: SpinType, fld_ix) -> tuple[int, ...]:
    out = []
    for g in range(6):
        out.extend(op_ix[ax] for ax in op.axes_of_group(g))
        out.extend(fld_ix[ax] for ax in fld.axes_of_group(g))
    return tuple(out)


def _groups_of(t: SpinType, ix):
    return [[ix[ax] for ax in t.axes_of_group(g)] for g in range(6)]


def vnabla(X: ExtendedField, P: int) -> ExtendedField:
    """Partial differentiation in the components of argument slot P.

    The operator carries the dual slots of the slot-P type, placed before
    X's slots within each group; its entry at a given operator multi-index
    is the partial derivative in the argument component with the up/down
    groups swapped.
    """
    sigP = X.signature.stype(P)
    op_type = sigP.dual()
    out_type = _concat_types(op_type, X.stype)
    out = np.empty(out_type.shape, dtype=object)
    for op_ix in op_type.storage_indices():
        g = _groups_of(op_type, op_ix)
        s_ix = tuple(g[1] + g[0] + g[3] + g[2] + g[5] + g[4])
        lin = sigP.lin_of_storage(s_ix)
        for f_ix in np.ndindex(*X.stype.shape):
            out[_interleave(op_type, op_ix, X.stype, f_ix)] = diff_comp(
                X.entries[f_ix], P, lin
            )
    return ExtendedField(X.signature, out_type, out)


def vnabla_bar(X: ExtendedField, P: int) -> ExtendedField:
    """Partial differentiation in the conjugated components of slot P.

    The operator carries the dual of the conjugate-swapped slot-P type; its
    entries differentiate in the conjugated argument components, with the
    index regrouping that matches the conjugate layout.
    """
    sigP = X.signature.stype(P)
    op_type = sigP.conjugate_type().dual()
    out_type = _concat_types(op_type, X.stype)
    out = np.empty(out_type.shape, dtype=object)
    for op_ix in op_type.storage_indices():
        g = _groups_of(op_type, op_ix)
        s_ix = tuple(g[3] + g[2] + g[1] + g[0] + g[5] + g[4])
        lin = sigP.lin_of_storage(s_ix)
        for f_ix in np.ndindex(*X.stype.shape):
            out[_interleave(op_type, op_ix, X.stype, f_ix)] = diff_comp_bar(
                X.entries[f_ix], P, lin
            )
    return ExtendedField(X.signature, out_type, out)


def vnabla_along(X: ExtendedField, P: int, Y: SpinTensor) -> ExtendedField:
    """Derivative along the vertical direction Y in slot P.

    This is the velocity of X along the curve that shifts the P-th argument
    by t*Y: the holomorphic part contracts Y against the component
    derivatives, the antiholomorphic part contracts the conjugate of Y
    against the conjugate-component derivatives.
    """
    sigP = X.signature.stype(P)
    if Y.stype != sigP:
        raise ValueError(f"direction type {Y.stype} does not match slot {P}")
    yflat = Y.flat
    out = np.empty(X.stype.shape, dtype=object)
    for f_ix in np.ndindex(*X.stype.shape):
        e = X.entries[f_ix]
        total = Const(0.0)
        for lin in range(sigP.count):
            total = total + yflat[lin] * diff_comp(e, P, lin)
            total = total + yflat[lin].conjugate() * diff_comp_bar(e, P, lin)
        out[f_ix] = total
    return ExtendedField(X.signature, X.stype, out)


def vertical_lift_coeffs(
    signature: BundleSignature, P: int, Y: SpinTensor, Ybar: SpinTensor | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the canonical vertical lift of a slot-P direction.

    Returns ``(holo, anti)``: ``holo[lin]`` multiplies the basis vector
    "partial in component lin of slot P", ``anti[lin]`` multiplies "partial
    in the conjugate of component lin".  With ``Ybar`` omitted the lift is
    the real one (velocity of the straight curve through Y), so ``anti`` is
    the elementwise conjugate of ``holo``; passing an independent ``Ybar``
    (in the conjugate-swapped layout) gives the complexified lift.
    """
    sigP = signature.stype(P)
    if Y.stype != sigP:
        raise ValueError(f"direction type {Y.stype} does not match slot {P}")
    holo = Y.flat.copy()
    if Ybar is None:
        anti = np.conjugate(holo)
    else:
        if Ybar.stype != sigP.conjugate_type():
            raise ValueError(
                "conjugate direction must have the conjugate-swapped type"
            )
        arr, _ = conjugate_layout_array(Ybar.comps, Ybar.stype)
        anti = arr.reshape(-1).copy()
    return holo, anti
