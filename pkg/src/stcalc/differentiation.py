"""First-order differentiation operators on extended fields.

Every type-preserving first-order differentiation operator over a composite
bundle is determined by pointwise data: a weight for each frame derivative
of the entries, one weight array per argument slot for the holomorphic
component derivatives and one for the antiholomorphic ones, and three small
matrices that rotate the value indices (a 2x2 for plain spinor slots, a 2x2
for barred slots, a 4x4 for tensorial slots).  This module implements

* the action of such data on fields,
* its rewrite under a change of frame pair (with the structure-function
  corrections and the change of argument variables),
* direction-resolved (covariant) variants and their contraction,
* connections, the spatial operator they induce, horizontal lifts,
* the unique splitting of any operator into a base-directional part,
  vertical parts, and a pure index rotation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprs import (
    Const,
    Expr,
    as_expr_matrix,
    comp,
    comp_bar,
    coord,
    diff_comp,
    diff_comp_bar,
    substitute_components,
)
from .extended_fields import (
    BundleSignature,
    ExtendedField,
    native,
    tau,
)
from .frames import (
    FrameChart,
    theta_params,
    tilde_frame,
    transform_array,
)
from .spintensor_core import SpinType, apply_matrix_to_axis, conjugate_layout_array

__all__ = [
    "DifferentiationData",
    "ConnectionData",
    "CovariantData",
    "DegenerateFields",
    "DecompositionParts",
    "index_action",
    "zero_data",
    "apply",
    "transform_field",
    "transform_data",
    "degenerate_from_fields",
    "contract_covariant",
    "covariant_apply",
    "nabla_differential",
    "spatial_from_connection",
    "horizontal_lift_coeffs",
    "decompose",
    "recompose",
    "random_data",
    "random_connection",
    "random_covariant",
]

_ZERO = Const(0.0)

_VECTOR_T = SpinType(0, 0, 0, 0, 1, 0)
_SPIN_ACTION_T = SpinType(1, 1, 0, 0, 0, 0)
_BARRED_ACTION_T = SpinType(0, 0, 1, 1, 0, 0)
_TENSOR_ACTION_T = SpinType(0, 0, 0, 0, 1, 1)


# ---------------------------------------------------------------------------
# small expression-array helpers
# ---------------------------------------------------------------------------


def _as_exprs(arr, shape) -> np.ndarray:
    out = as_expr_matrix(arr)
    if out.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {out.shape}")
    return out


def _zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out[...] = _ZERO
    return out


def _scaled(arr, s: Expr) -> np.ndarray:
    """Elementwise product of an expression array with a scalar expression."""
    arr = np.asarray(arr, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for ix in np.ndindex(*arr.shape):
        out[ix] = arr[ix] * s
    return out


def _subs_array(arr, mapping) -> np.ndarray:
    arr = np.asarray(arr, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for ix in np.ndindex(*arr.shape):
        out[ix] = substitute_components(arr[ix], mapping)
    return out


def _sandwich(left, mid, right) -> np.ndarray:
    return np.dot(np.dot(left, mid), right)


# ---------------------------------------------------------------------------
# operator data
# ---------------------------------------------------------------------------


@dataclass
class DifferentiationData:
    """Pointwise data of a type-preserving first-order operator.

    ``Zvec[i]`` weights the derivative along the i-th frame vector;
    ``Zcomp[P]`` (shaped like slot P) weights the holomorphic component
    derivatives of slot P; ``Zbar[P]`` (shaped like the conjugate-swapped
    type of slot P) weights the antiholomorphic ones.  ``A`` (2x2) acts on
    plain spinor value slots, ``Abar`` (2x2) on barred ones, ``Gam`` (4x4)
    on tensorial ones: plus on upper slots, minus the transpose on lower
    slots.  All entries are expressions over the bundle variables.
    """

    signature: BundleSignature
    Zvec: np.ndarray
    Zcomp: dict[int, np.ndarray]
    Zbar: dict[int, np.ndarray]
    A: np.ndarray
    Abar: np.ndarray
    Gam: np.ndarray

    def __post_init__(self):
        sig = self.signature
        self.Zvec = _as_exprs(self.Zvec, (4,))
        self.Zcomp = {
            P: _as_exprs(self.Zcomp[P], sig.stype(P).shape)
            for P in range(1, sig.nslots + 1)
        }
        self.Zbar = {
            P: _as_exprs(self.Zbar[P], sig.stype(P).conjugate_type().shape)
            for P in range(1, sig.nslots + 1)
        }
        self.A = _as_exprs(self.A, (2, 2))
        self.Abar = _as_exprs(self.Abar, (2, 2))
        self.Gam = _as_exprs(self.Gam, (4, 4))


def zero_data(signature: BundleSignature) -> DifferentiationData:
    return DifferentiationData(
        signature,
        _zeros((4,)),
        {P: _zeros(signature.stype(P).shape) for P in range(1, signature.nslots + 1)},
        {
            P: _zeros(signature.stype(P).conjugate_type().shape)
            for P in range(1, signature.nslots + 1)
        },
        _zeros((2, 2)),
        _zeros((2, 2)),
        _zeros((4, 4)),
    )


def index_action(stype: SpinType, entries, A, Abar, Gam):
    """Sum of the single-slot matrix actions on a component array.

    Each upper slot contracts with its family matrix, each lower slot with
    minus the transpose; plain spinor slots pick ``A``, barred slots
    ``Abar``, tensorial slots ``Gam``.  Returns ``None`` when the type has
    no slots.  Works for numeric and expression arrays alike.
    """
    total = None
    for axis in range(stype.naxes):
        fam, pos = stype.slot_kind(axis)
        mat = {"spinor": A, "barred": Abar, "tensor": Gam}[fam]
        if pos == "up":
            term = apply_matrix_to_axis(mat, entries, axis)
        else:
            term = -apply_matrix_to_axis(np.transpose(mat), entries, axis)
        total = term if total is None else total + term
    return total


def _bar_weights(D: DifferentiationData, P: int) -> np.ndarray:
    """Weights for the antiholomorphic derivatives of slot P, reindexed to
    the slot's own component order (the stored array uses the
    conjugate-swapped layout)."""
    t = D.signature.stype(P).conjugate_type()
    arr, _ = conjugate_layout_array(D.Zbar[P], t)
    return np.asarray(arr, dtype=object).reshape(-1)


def apply(
    D: DifferentiationData, X: ExtendedField, chart: FrameChart
) -> ExtendedField:
    """Act on a field: weighted frame derivatives of every entry, weighted
    component derivatives in both the holomorphic and antiholomorphic
    directions, plus the index action on the value slots."""
    sig = D.signature
    if X.signature != sig:
        raise ValueError("field and operator live over different signatures")
    hol = {P: D.Zcomp[P].reshape(-1) for P in range(1, sig.nslots + 1)}
    anti = {P: _bar_weights(D, P) for P in range(1, sig.nslots + 1)}
    out = np.empty(X.stype.shape, dtype=object)
    for ix in np.ndindex(*X.stype.shape):
        e = X.entries[ix]
        total = None
        for i in range(4):
            term = D.Zvec[i] * chart.frame_derivative(e, i)
            total = term if total is None else total + term
        for P in range(1, sig.nslots + 1):
            for lin in range(sig.stype(P).count):
                total = total + hol[P][lin] * diff_comp(e, P, lin)
                total = total + anti[P][lin] * diff_comp_bar(e, P, lin)
        out[ix] = total
    act = index_action(X.stype, X.entries, D.A, D.Abar, D.Gam)
    if act is not None:
        out = out + act
    return ExtendedField(sig, X.stype, out)


# ---------------------------------------------------------------------------
# change of frame pair
# ---------------------------------------------------------------------------


def _variable_rewrite(sig: BundleSignature, tr, direction: str):
    """Mapping that re-expresses argument components in the other frame
    pair's variables.

    ``forward`` rewrites untilded-variable expressions in tilde variables
    (each component leaf becomes the inverse transform of the natives);
    ``inverse`` goes the other way.
    """
    other = "inverse" if direction == "forward" else "forward"
    table = {}
    for R in range(1, sig.nslots + 1):
        arr = transform_array(native(sig, R).entries, sig.stype(R), tr, other)
        table[R] = np.asarray(arr, dtype=object).reshape(-1)
    return lambda slot, lin: table[slot][lin]


def transform_field(
    X: ExtendedField, tr, direction: str = "forward"
) -> ExtendedField:
    """Full pushforward of a field to the other frame pair: transform the
    component array, then rewrite the argument variables."""
    arr = transform_array(X.entries, X.stype, tr, direction)
    mapping = _variable_rewrite(X.signature, tr, direction)
    return ExtendedField(X.signature, X.stype, _subs_array(arr, mapping))


def _structure_corrections(
    sig: BundleSignature, Zvec, theta, vth, vth_bar
) -> tuple[dict, dict]:
    """Per-slot correction arrays: the base weights contracted against the
    structure-function index action on the natives (plain and conjugated)."""
    corr, corr_bar = {}, {}
    for P in range(1, sig.nslots + 1):
        t = sig.stype(P)
        tc = t.conjugate_type()
        nat = native(sig, P).entries
        tnat = tau(native(sig, P)).entries
        tot = _zeros(t.shape)
        totb = _zeros(tc.shape)
        for i in range(4):
            act = index_action(t, nat, vth[:, i, :], vth_bar[:, i, :], theta[:, i, :])
            if act is None:
                continue
            actb = index_action(
                tc, tnat, vth[:, i, :], vth_bar[:, i, :], theta[:, i, :]
            )
            tot = tot + _scaled(act, Zvec[i])
            totb = totb + _scaled(actb, Zvec[i])
        corr[P] = tot
        corr_bar[P] = totb
    return corr, corr_bar


def transform_data(
    D: DifferentiationData, chart: FrameChart, tr, direction: str = "forward"
) -> DifferentiationData:
    """Rewrite operator data for the other frame pair.

    ``forward`` consumes untilded data (in untilded variables) and returns
    tilde data in tilde variables; ``inverse`` goes the other way.  Beyond
    the plain component transforms this adds the structure-function
    corrections: the vertical weights absorb the index action of the
    structure functions on the natives, and the index matrices pick up the
    structure functions themselves.
    """
    sig = D.signature
    th = theta_params(chart, tr)
    theta, vth = th["theta"], th["vartheta"]
    vth_bar = np.conjugate(vth)
    nslots = sig.nslots
    mapping = _variable_rewrite(sig, tr, direction)

    if direction == "forward":
        corr, corr_bar = _structure_corrections(sig, D.Zvec, theta, vth, vth_bar)
        Zvec = apply_matrix_to_axis(tr.T, D.Zvec, 0)
        Zcomp = {
            P: transform_array(D.Zcomp[P] + corr[P], sig.stype(P), tr, "forward")
            for P in range(1, nslots + 1)
        }
        Zbar = {
            P: transform_array(
                D.Zbar[P] + corr_bar[P],
                sig.stype(P).conjugate_type(),
                tr,
                "forward",
            )
            for P in range(1, nslots + 1)
        }
        Acorr = _zeros((2, 2))
        Abcorr = _zeros((2, 2))
        Gcorr = _zeros((4, 4))
        for a in range(4):
            Acorr = Acorr + _scaled(vth[:, a, :], D.Zvec[a])
            Abcorr = Abcorr + _scaled(vth_bar[:, a, :], D.Zvec[a])
            Gcorr = Gcorr + _scaled(theta[:, a, :], D.Zvec[a])
        A = _sandwich(tr.frakT, D.A - Acorr, tr.frakS)
        Abar = _sandwich(
            np.conjugate(tr.frakT), D.Abar - Abcorr, np.conjugate(tr.frakS)
        )
        Gam = _sandwich(tr.T, D.Gam - Gcorr, tr.S)
    elif direction == "inverse":
        sub = lambda arr: _subs_array(arr, mapping)
        Zvec_t = sub(D.Zvec)
        Zvec = apply_matrix_to_axis(tr.S, Zvec_t, 0)
        corr, corr_bar = _structure_corrections(sig, Zvec, theta, vth, vth_bar)
        Zcomp = {
            P: transform_array(sub(D.Zcomp[P]), sig.stype(P), tr, "inverse")
            - corr[P]
            for P in range(1, nslots + 1)
        }
        Zbar = {
            P: transform_array(
                sub(D.Zbar[P]), sig.stype(P).conjugate_type(), tr, "inverse"
            )
            - corr_bar[P]
            for P in range(1, nslots + 1)
        }
        Acorr = _zeros((2, 2))
        Abcorr = _zeros((2, 2))
        Gcorr = _zeros((4, 4))
        for a in range(4):
            Acorr = Acorr + _scaled(vth[:, a, :], Zvec[a])
            Abcorr = Abcorr + _scaled(vth_bar[:, a, :], Zvec[a])
            Gcorr = Gcorr + _scaled(theta[:, a, :], Zvec[a])
        A = _sandwich(tr.frakS, sub(D.A), tr.frakT) + Acorr
        Abar = (
            _sandwich(np.conjugate(tr.frakS), sub(D.Abar), np.conjugate(tr.frakT))
            + Abcorr
        )
        Gam = _sandwich(tr.S, sub(D.Gam), tr.T) + Gcorr
        return DifferentiationData(sig, Zvec, Zcomp, Zbar, A, Abar, Gam)
    else:
        raise ValueError(f"unknown direction {direction!r}")

    sub = lambda arr: _subs_array(arr, mapping)
    return DifferentiationData(
        sig,
        sub(Zvec),
        {P: sub(Zcomp[P]) for P in Zcomp},
        {P: sub(Zbar[P]) for P in Zbar},
        sub(A),
        sub(Abar),
        sub(Gam),
    )


# ---------------------------------------------------------------------------
# degenerate operators
# ---------------------------------------------------------------------------


@dataclass
class DegenerateFields:
    """The three extended fields equivalent to an operator that kills every
    scalar: a mixed spinor pair, a mixed barred pair, a mixed tensorial
    pair (entry order [upper, lower] in each)."""

    spinor: ExtendedField
    barred: ExtendedField
    tensor: ExtendedField

    def __post_init__(self):
        if self.spinor.stype != _SPIN_ACTION_T:
            raise ValueError("spinor part must have one upper, one lower slot")
        if self.barred.stype != _BARRED_ACTION_T:
            raise ValueError("barred part must have one upper, one lower slot")
        if self.tensor.stype != _TENSOR_ACTION_T:
            raise ValueError("tensor part must have one upper, one lower slot")
        if (
            self.spinor.signature != self.barred.signature
            or self.spinor.signature != self.tensor.signature
        ):
            raise ValueError("the three parts live over different signatures")


def degenerate_from_fields(fields: DegenerateFields) -> DifferentiationData:
    """Operator data of a scalar-killing operator: no derivative weights,
    index matrices read off the three equivalent fields."""
    sig = fields.spinor.signature
    base = zero_data(sig)
    return DifferentiationData(
        sig,
        base.Zvec,
        base.Zcomp,
        base.Zbar,
        fields.spinor.entries,
        fields.barred.entries,
        fields.tensor.entries,
    )


# ---------------------------------------------------------------------------
# connections and direction-resolved data
# ---------------------------------------------------------------------------


@dataclass
class ConnectionData:
    """Direction-resolved index matrices of a connection: ``A[j]`` and
    ``Abar[j]`` are 2x2, ``Gam[j]`` is 4x4, for each frame direction j
    (first index)."""

    A: np.ndarray
    Abar: np.ndarray
    Gam: np.ndarray

    def __post_init__(self):
        self.A = _as_exprs(self.A, (4, 2, 2))
        self.Abar = _as_exprs(self.Abar, (4, 2, 2))
        self.Gam = _as_exprs(self.Gam, (4, 4, 4))


@dataclass
class CovariantData:
    """Direction-resolved operator data.  Contracting the direction index
    with a base-vector field yields plain operator data: ``Zmat[i, j]``
    (direction j), per-slot weight arrays with a leading direction axis,
    and a connection for the index matrices."""

    signature: BundleSignature
    Zmat: np.ndarray
    Zcomp: dict[int, np.ndarray]
    Zbar: dict[int, np.ndarray]
    conn: ConnectionData

    def __post_init__(self):
        sig = self.signature
        self.Zmat = _as_exprs(self.Zmat, (4, 4))
        self.Zcomp = {
            P: _as_exprs(self.Zcomp[P], (4,) + sig.stype(P).shape)
            for P in range(1, sig.nslots + 1)
        }
        self.Zbar = {
            P: _as_exprs(self.Zbar[P], (4,) + sig.stype(P).conjugate_type().shape)
            for P in range(1, sig.nslots + 1)
        }


def _direction_entries(Y) -> np.ndarray:
    if isinstance(Y, ExtendedField):
        if Y.stype != _VECTOR_T:
            raise ValueError("direction must be a single-upper-tensorial field")
        return Y.entries
    return _as_exprs(Y, (4,))


def contract_covariant(CD: CovariantData, Y) -> DifferentiationData:
    """Plug a base direction into direction-resolved data."""
    y = _direction_entries(Y)
    sig = CD.signature
    Zvec = _zeros((4,))
    for i in range(4):
        total = None
        for j in range(4):
            term = CD.Zmat[i, j] * y[j]
            total = term if total is None else total + term
        Zvec[i] = total
    Zcomp, Zbar = {}, {}
    for P in range(1, sig.nslots + 1):
        tot = _zeros(sig.stype(P).shape)
        totb = _zeros(sig.stype(P).conjugate_type().shape)
        for j in range(4):
            tot = tot + _scaled(CD.Zcomp[P][j], y[j])
            totb = totb + _scaled(CD.Zbar[P][j], y[j])
        Zcomp[P], Zbar[P] = tot, totb
    A = _zeros((2, 2))
    Abar = _zeros((2, 2))
    Gam = _zeros((4, 4))
    for j in range(4):
        A = A + _scaled(CD.conn.A[j], y[j])
        Abar = Abar + _scaled(CD.conn.Abar[j], y[j])
        Gam = Gam + _scaled(CD.conn.Gam[j], y[j])
    return DifferentiationData(sig, Zvec, Zcomp, Zbar, A, Abar, Gam)


def covariant_apply(
    CD: CovariantData, Y, X: ExtendedField, chart: FrameChart
) -> ExtendedField:
    """Directional action: contract the direction index with Y, then act."""
    return apply(contract_covariant(CD, Y), X, chart)


def _slice_data(CD: CovariantData, j: int) -> DifferentiationData:
    sig = CD.signature
    return DifferentiationData(
        sig,
        CD.Zmat[:, j],
        {P: CD.Zcomp[P][j] for P in range(1, sig.nslots + 1)},
        {P: CD.Zbar[P][j] for P in range(1, sig.nslots + 1)},
        CD.conn.A[j],
        CD.conn.Abar[j],
        CD.conn.Gam[j],
    )


def nabla_differential(
    CD: CovariantData, X: ExtendedField, chart: FrameChart
) -> ExtendedField:
    """The full differential: one directional action per frame direction,
    collected into one extra lower tensorial slot placed first within the
    lower tensorial group."""
    t = X.stype
    pieces = [apply(_slice_data(CD, j), X, chart).entries for j in range(4)]
    out_type = SpinType(
        t.up_spinor,
        t.lo_spinor,
        t.up_barred,
        t.lo_barred,
        t.up_tensor,
        t.lo_tensor + 1,
    )
    axis_pos = t.up_spinor + t.lo_spinor + t.up_barred + t.lo_barred + t.up_tensor
    stacked = np.stack(pieces, axis=0)
    out = np.moveaxis(stacked, 0, axis_pos)
    return ExtendedField(CD.signature, out_type, np.ascontiguousarray(out))


def _connection_weights(
    sig: BundleSignature, conn: ConnectionData
) -> tuple[dict, dict]:
    """Per-slot, per-direction index action of the connection on the
    natives (plain and conjugated)."""
    w, wbar = {}, {}
    for P in range(1, sig.nslots + 1):
        t = sig.stype(P)
        tc = t.conjugate_type()
        nat = native(sig, P).entries
        tnat = tau(native(sig, P)).entries
        arr = np.empty((4,) + t.shape, dtype=object)
        arrb = np.empty((4,) + tc.shape, dtype=object)
        for j in range(4):
            act = index_action(t, nat, conn.A[j], conn.Abar[j], conn.Gam[j])
            actb = index_action(tc, tnat, conn.A[j], conn.Abar[j], conn.Gam[j])
            arr[j] = act if act is not None else _zeros(t.shape)
            arrb[j] = actb if actb is not None else _zeros(tc.shape)
        w[P], wbar[P] = arr, arrb
    return w, wbar


def spatial_from_connection(
    sig: BundleSignature, conn: ConnectionData
) -> CovariantData:
    """The direction-resolved operator that annihilates every native field
    and its conjugate: identity base block, vertical weights equal to minus
    the connection's index action on the natives."""
    w, wbar = _connection_weights(sig, conn)
    return CovariantData(
        sig,
        as_expr_matrix(np.eye(4)),
        {P: -w[P] for P in w},
        {P: -wbar[P] for P in wbar},
        conn,
    )


def horizontal_lift_coeffs(sig: BundleSignature, conn: ConnectionData) -> dict:
    """Coefficients of the horizontal lift of each frame vector.

    ``base`` holds the coefficients on the base frame directions (the
    identity: the lift projects back to the frame vector); ``vertical[P]``
    and ``vertical_bar[P]`` hold the coefficients on the holomorphic and
    antiholomorphic vertical basis directions of slot P, i.e. minus the
    connection's index action on the natives."""
    cd = spatial_from_connection(sig, conn)
    return {
        "base": as_expr_matrix(np.eye(4)),
        "vertical": cd.Zcomp,
        "vertical_bar": cd.Zbar,
    }


# ---------------------------------------------------------------------------
# structural decomposition
# ---------------------------------------------------------------------------


@dataclass
class DecompositionParts:
    """The unique splitting of an operator relative to a connection: a base
    direction, one vertical direction per slot (plain and conjugated), and
    a scalar-killing remainder."""

    X: ExtendedField
    Y: dict[int, ExtendedField]
    Ybar: dict[int, ExtendedField]
    S: DegenerateFields


def decompose(D: DifferentiationData, conn: ConnectionData) -> DecompositionParts:
    """Split operator data into base-directional, vertical, and index-only
    parts: the base direction is the frame-derivative weight vector, the
    vertical directions are the component weights minus their spatial
    share, the remainder collects what is left of the index matrices."""
    sig = D.signature
    cd = spatial_from_connection(sig, conn)
    X = ExtendedField(sig, _VECTOR_T, D.Zvec)
    Y, Ybar = {}, {}
    for P in range(1, sig.nslots + 1):
        t = sig.stype(P)
        tc = t.conjugate_type()
        tot = _zeros(t.shape)
        totb = _zeros(tc.shape)
        for j in range(4):
            tot = tot + _scaled(cd.Zcomp[P][j], D.Zvec[j])
            totb = totb + _scaled(cd.Zbar[P][j], D.Zvec[j])
        Y[P] = ExtendedField(sig, t, D.Zcomp[P] - tot)
        Ybar[P] = ExtendedField(sig, tc, D.Zbar[P] - totb)
    A = _zeros((2, 2))
    Abar = _zeros((2, 2))
    Gam = _zeros((4, 4))
    for j in range(4):
        A = A + _scaled(conn.A[j], D.Zvec[j])
        Abar = Abar + _scaled(conn.Abar[j], D.Zvec[j])
        Gam = Gam + _scaled(conn.Gam[j], D.Zvec[j])
    S = DegenerateFields(
        ExtendedField(sig, _SPIN_ACTION_T, D.A - A),
        ExtendedField(sig, _BARRED_ACTION_T, D.Abar - Abar),
        ExtendedField(sig, _TENSOR_ACTION_T, D.Gam - Gam),
    )
    return DecompositionParts(X, Y, Ybar, S)


def recompose(
    parts: DecompositionParts, conn: ConnectionData
) -> DifferentiationData:
    """Rebuild operator data from its decomposition parts (exact inverse of
    ``decompose`` for the same connection)."""
    sig = parts.X.signature
    cd = spatial_from_connection(sig, conn)
    Zvec = parts.X.entries
    Zcomp, Zbar = {}, {}
    for P in range(1, sig.nslots + 1):
        tot = _zeros(sig.stype(P).shape)
        totb = _zeros(sig.stype(P).conjugate_type().shape)
        for j in range(4):
            tot = tot + _scaled(cd.Zcomp[P][j], Zvec[j])
            totb = totb + _scaled(cd.Zbar[P][j], Zvec[j])
        Zcomp[P] = parts.Y[P].entries + tot
        Zbar[P] = parts.Ybar[P].entries + totb
    A = parts.S.spinor.entries.copy()
    Abar = parts.S.barred.entries.copy()
    Gam = parts.S.tensor.entries.copy()
    for j in range(4):
        A = A + _scaled(conn.A[j], Zvec[j])
        Abar = Abar + _scaled(conn.Abar[j], Zvec[j])
        Gam = Gam + _scaled(conn.Gam[j], Zvec[j])
    return DifferentiationData(sig, Zvec, Zcomp, Zbar, A, Abar, Gam)


# ---------------------------------------------------------------------------
# random test data
# ---------------------------------------------------------------------------


def _random_expr(
    sig: BundleSignature, rng: np.random.Generator, x_dep: bool, c_dep: bool
) -> Expr:
    def cnum():
        return Const(complex(rng.normal(), rng.normal()))

    e = cnum()
    if x_dep:
        e = e + cnum() * coord(int(rng.integers(4)))
    if c_dep and sig.nslots:
        P = int(rng.integers(1, sig.nslots + 1))
        lin = int(rng.integers(sig.stype(P).count))
        leaf = comp(P, lin) if rng.integers(2) else comp_bar(P, lin)
        e = e + cnum() * leaf
    return e


def _random_array(sig, rng, shape, x_dep, c_dep) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    for ix in np.ndindex(*shape):
        out[ix] = _random_expr(sig, rng, x_dep, c_dep)
    return out


def random_data(
    sig: BundleSignature,
    rng: np.random.Generator,
    x_dep: bool = True,
    c_dep: bool = True,
) -> DifferentiationData:
    """Operator data with small random affine entries (for tests)."""
    mk = lambda shape: _random_array(sig, rng, shape, x_dep, c_dep)
    return DifferentiationData(
        sig,
        mk((4,)),
        {P: mk(sig.stype(P).shape) for P in range(1, sig.nslots + 1)},
        {
            P: mk(sig.stype(P).conjugate_type().shape)
            for P in range(1, sig.nslots + 1)
        },
        mk((2, 2)),
        mk((2, 2)),
        mk((4, 4)),
    )


def random_connection(
    rng: np.random.Generator,
    sig: BundleSignature | None = None,
    x_dep: bool = True,
    c_dep: bool = False,
) -> ConnectionData:
    """Connection data with small random affine entries (for tests)."""
    if sig is None:
        sig = BundleSignature(())
    mk = lambda shape: _random_array(sig, rng, shape, x_dep, c_dep)
    return ConnectionData(mk((4, 2, 2)), mk((4, 2, 2)), mk((4, 4, 4)))


def random_covariant(
    sig: BundleSignature,
    rng: np.random.Generator,
    x_dep: bool = True,
    c_dep: bool = True,
) -> CovariantData:
    """Direction-resolved data with small random affine entries."""
    mk = lambda shape: _random_array(sig, rng, shape, x_dep, c_dep)
    return CovariantData(
        sig,
        mk((4, 4)),
        {P: mk((4,) + sig.stype(P).shape) for P in range(1, sig.nslots + 1)},
        {
            P: mk((4,) + sig.stype(P).conjugate_type().shape)
            for P in range(1, sig.nslots + 1)
        },
        random_connection(rng, sig, x_dep, c_dep),
    )
