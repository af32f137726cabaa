"""Frame fields, transition data between frame pairs, and their
frame-derivative structure functions.

A chart carries four frame vector fields (columns of a 4x4 expression
matrix over the base coordinates) and optionally a metric.  A transition
between two frame pairs is generated by a single smooth unimodular 2x2
expression matrix: the 4x4 frame transition is its image under the covering
map, computed symbolically, and the inverses come from exactness (adjugate
for the 2x2, metric-sandwich transpose for the 4x4).

The structure functions replace Jacobian derivatives in transformation laws
for non-holonomic frames: they are frame derivatives of the transition
matrices, contracted back with the inverse transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprs import (
    Expr,
    as_expr_matrix,
    diff_coord,
    eval_compiled,
    sym_adjugate,
    sym_det,
)
from .extended_fields import ExtendedField, eval_expr_array
from .lorentz_sl2c import minkowski_eta, phi_matrix
from .spintensor_core import SpinTensor, SpinType, apply_matrix_to_axis

__all__ = [
    "FrameChart",
    "TransitionField",
    "TransitionMatrices",
    "numeric_transition",
    "christoffel",
    "transform_components",
    "transform_array",
    "theta_params",
    "theta_params_fd",
    "tilde_frame",
    "commutator_coeffs",
    "theta_identity_residuals",
]


def _eval_matrix(arr, x) -> np.ndarray:
    return eval_expr_array(arr, np.asarray(x, dtype=complex), None)


@dataclass
class FrameChart:
    """Four frame vector fields on a coordinate chart; ``upsilon[v, i]`` is
    the v-th component of the i-th frame vector.  ``metric`` (optional) is
    the covariant metric in the same coordinates."""

    upsilon: np.ndarray
    metric: np.ndarray | None = None

    def __post_init__(self):
        self.upsilon = as_expr_matrix(self.upsilon)
        if self.upsilon.shape != (4, 4):
            raise ValueError("frame matrix must be 4x4")
        if self.metric is not None:
            self.metric = as_expr_matrix(self.metric)
            if self.metric.shape != (4, 4):
                raise ValueError("metric must be 4x4")

    def frame_derivative(self, f: Expr, i: int) -> Expr:
        """Derivative of a scalar along the i-th frame vector."""
        total = None
        for v in range(4):
            term = self.upsilon[v, i] * diff_coord(f, v)
            total = term if total is None else total + term
        return total

    def upsilon_at(self, x) -> np.ndarray:
        return _eval_matrix(self.upsilon, x)

    def metric_at(self, x) -> np.ndarray:
        if self.metric is None:
            raise ValueError("chart has no metric")
        return _eval_matrix(self.metric, x)

    def orthonormality_residual(self, xs) -> float:
        """How far the frame Gram matrix is from diag(1,-1,-1,-1)."""
        eta = minkowski_eta()
        worst = 0.0
        for x in xs:
            U = self.upsilon_at(x)
            g = self.metric_at(x)
            worst = max(worst, float(np.max(np.abs(U.T @ g @ U - eta))))
        return worst


def christoffel(metric) -> np.ndarray:
    """Coordinate connection coefficients of a metric: out[k, i, j] is the
    coefficient with upper index k and lower indices i, j."""
    from .exprs import sym_inverse

    g = as_expr_matrix(metric)
    ginv = sym_inverse(g)
    out = np.empty((4, 4, 4), dtype=object)
    for k in range(4):
        for i in range(4):
            for j in range(4):
                total = None
                for s in range(4):
                    term = (ginv[k, s] / 2) * (
                        diff_coord(g[s, j], i)
                        + diff_coord(g[i, s], j)
                        - diff_coord(g[i, j], s)
                    )
                    total = term if total is None else total + term
                out[k, i, j] = total
    return out


@dataclass
class TransitionMatrices:
    """The four matrices of one frame-pair transition (numeric or symbolic):
    2x2 ``frakS`` with inverse ``frakT``, 4x4 ``S`` with inverse ``T``."""

    frakS: np.ndarray
    frakT: np.ndarray
    S: np.ndarray
    T: np.ndarray


@dataclass
class TransitionField:
    """A smooth unimodular 2x2 expression matrix and everything it induces."""

    frakS: np.ndarray

    def __post_init__(self):
        self.frakS = as_expr_matrix(self.frakS)
        if self.frakS.shape != (2, 2):
            raise ValueError("transition generator must be 2x2")
        self.frakT = sym_adjugate(self.frakS)  # inverse, since det = 1
        self.S = phi_matrix(self.frakS)
        eta = minkowski_eta()
        T = np.empty((4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                entry = self.S[j, i]
                sign = eta[i, i] * eta[j, j]
                T[i, j] = entry if sign > 0 else -entry
        self.T = T

    def matrices(self) -> TransitionMatrices:
        return TransitionMatrices(self.frakS, self.frakT, self.S, self.T)

    def matrices_at(self, x) -> TransitionMatrices:
        return TransitionMatrices(
            _eval_matrix(self.frakS, x),
            _eval_matrix(self.frakT, x),
            _eval_matrix(self.S, x),
            _eval_matrix(self.T, x),
        )

    def unimodularity_residual(self, xs) -> float:
        det = sym_det(self.frakS)
        worst = 0.0
        for x in xs:
            env = np.asarray(x, dtype=complex)
            worst = max(worst, abs(eval_compiled(det, env, None) - 1.0))
        return float(worst)


def numeric_transition(U) -> TransitionMatrices:
    """Transition matrices generated by one numeric unimodular 2x2 matrix."""
    from .lorentz_sl2c import phi

    U = np.asarray(U, dtype=complex)
    frakT = np.array([[U[1, 1], -U[0, 1]], [-U[1, 0], U[0, 0]]], dtype=complex)
    S = phi(U)
    eta = minkowski_eta()
    T = eta @ S.T @ eta
    return TransitionMatrices(U, frakT, S, T)


def transform_array(arr, stype: SpinType, tr: TransitionMatrices, direction: str):
    """Transform components of a spin-tensor (or field entries) to the other
    frame pair.

    ``forward`` produces tilde-frame components from untilded ones: upper
    spinor slots contract with ``frakT``, lower spinor slots with ``frakS``,
    barred slots with the conjugated matrices, upper tensorial with ``T``
    and lower tensorial with ``S``.  ``inverse`` swaps the matrix roles.
    """
    if direction == "forward":
        up_sp, lo_sp, up_t, lo_t = tr.frakT, tr.frakS, tr.T, tr.S
    elif direction == "inverse":
        up_sp, lo_sp, up_t, lo_t = tr.frakS, tr.frakT, tr.S, tr.T
    else:
        raise ValueError(f"unknown direction {direction!r}")
    out = arr
    for axis in range(stype.naxes):
        fam, pos = stype.slot_kind(axis)
        if fam == "spinor":
            mat = up_sp if pos == "up" else np.transpose(lo_sp)
        elif fam == "barred":
            mat = np.conjugate(up_sp) if pos == "up" else np.conjugate(
                np.transpose(lo_sp)
            )
        else:
            mat = up_t if pos == "up" else np.transpose(lo_t)
        out = apply_matrix_to_axis(mat, out, axis)
    return out


def transform_components(a, tr: TransitionMatrices, direction: str = "forward"):
    """Wrapper of ``transform_array`` for spin-tensors and extended fields."""
    if isinstance(a, SpinTensor):
        return SpinTensor(a.stype, transform_array(a.comps, a.stype, tr, direction))
    if isinstance(a, ExtendedField):
        arr = transform_array(a.entries, a.stype, tr, direction)
        return ExtendedField(a.signature, a.stype, np.asarray(arr, dtype=object))
    raise TypeError(f"cannot transform {type(a).__name__}")


# ---------------------------------------------------------------------------
# structure functions
# ---------------------------------------------------------------------------


def tilde_frame(chart: FrameChart, tr: TransitionField) -> FrameChart:
    """The frame whose vectors are the S-combinations of the chart's."""
    ups = np.empty((4, 4), dtype=object)
    for v in range(4):
        for i in range(4):
            total = None
            for j in range(4):
                term = chart.upsilon[v, j] * tr.S[j, i]
                total = term if total is None else total + term
            ups[v, i] = total
    return FrameChart(ups, chart.metric)


def theta_params(chart: FrameChart, tr: TransitionField) -> dict[str, np.ndarray]:
    """The four families of structure functions of a transition.

    Keys: ``theta`` (tensorial, untilded frame derivatives), ``theta_tilde``
    (tensorial, tilde frame derivatives), ``vartheta`` and ``vartheta_tilde``
    (spinor counterparts).  Index layout ``[k, i, j]`` with i the derivative
    direction.
    """
    tilde = tilde_frame(chart, tr)

    theta = np.empty((4, 4, 4), dtype=object)
    theta_tilde = np.empty((4, 4, 4), dtype=object)
    for k in range(4):
        for i in range(4):
            for j in range(4):
                tot_u = None
                tot_t = None
                for a in range(4):
                    term_u = tr.S[k, a] * chart.frame_derivative(tr.T[a, j], i)
                    term_t = tr.T[k, a] * tilde.frame_derivative(tr.S[a, j], i)
                    tot_u = term_u if tot_u is None else tot_u + term_u
                    tot_t = term_t if tot_t is None else tot_t + term_t
                theta[k, i, j] = tot_u
                theta_tilde[k, i, j] = tot_t

    vartheta = np.empty((2, 4, 2), dtype=object)
    vartheta_tilde = np.empty((2, 4, 2), dtype=object)
    for k in range(2):
        for i in range(4):
            for j in range(2):
                tot_u = None
                tot_t = None
                for a in range(2):
                    term_u = tr.frakS[k, a] * chart.frame_derivative(tr.frakT[a, j], i)
                    term_t = tr.frakT[k, a] * tilde.frame_derivative(tr.frakS[a, j], i)
                    tot_u = term_u if tot_u is None else tot_u + term_u
                    tot_t = term_t if tot_t is None else tot_t + term_t
                vartheta[k, i, j] = tot_u
                vartheta_tilde[k, i, j] = tot_t

    return {
        "theta": theta,
        "theta_tilde": theta_tilde,
        "vartheta": vartheta,
        "vartheta_tilde": vartheta_tilde,
    }


def theta_params_fd(
    chart: FrameChart, tr: TransitionField, x, h: float = 1e-5
) -> dict[str, np.ndarray]:
    """Finite-difference oracle for ``theta_params`` at one base point."""
    x = np.asarray(x, dtype=float)

    def shift(v, s):
        y = x.copy()
        y[v] += s
        return y

    def d_coord(matrix_fn, v):
        return (matrix_fn(shift(v, h)) - matrix_fn(shift(v, -h))) / (2 * h)

    S_of = lambda y: _eval_matrix(tr.S, y)
    T_of = lambda y: _eval_matrix(tr.T, y)
    fS_of = lambda y: _eval_matrix(tr.frakS, y)
    fT_of = lambda y: _eval_matrix(tr.frakT, y)

    ups = chart.upsilon_at(x)
    ups_tilde = ups @ S_of(x)
    S0, T0, fS0, fT0 = S_of(x), T_of(x), fS_of(x), fT_of(x)

    dT = np.array([d_coord(T_of, v) for v in range(4)])  # [v, a, j]
    dS = np.array([d_coord(S_of, v) for v in range(4)])
    dfT = np.array([d_coord(fT_of, v) for v in range(4)])
    dfS = np.array([d_coord(fS_of, v) for v in range(4)])

    # L_i(M)[a, j] = sum_v frame[v, i] dM[v, a, j]
    L_T = np.einsum("vi,vaj->iaj", ups, dT)
    L_fT = np.einsum("vi,vaj->iaj", ups, dfT)
    Lt_S = np.einsum("vi,vaj->iaj", ups_tilde, dS)
    Lt_fS = np.einsum("vi,vaj->iaj", ups_tilde, dfS)

    return {
        "theta": np.einsum("ka,iaj->kij", S0, L_T),
        "theta_tilde": np.einsum("ka,iaj->kij", T0, Lt_S),
        "vartheta": np.einsum("ka,iaj->kij", fS0, L_fT),
        "vartheta_tilde": np.einsum("ka,iaj->kij", fT0, Lt_fS),
    }


def commutator_coeffs(chart: FrameChart) -> np.ndarray:
    """Expansion coefficients of frame-vector commutators in the frame
    itself: out[k, i, j] multiplies the k-th frame vector in [vec i, vec j]."""
    from .exprs import sym_inverse

    inv = sym_inverse(chart.upsilon)
    out = np.empty((4, 4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            comm = [
                chart.frame_derivative(chart.upsilon[v, j], i)
                - chart.frame_derivative(chart.upsilon[v, i], j)
                for v in range(4)
            ]
            for k in range(4):
                total = None
                for v in range(4):
                    term = inv[k, v] * comm[v]
                    total = term if total is None else total + term
                out[k, i, j] = total
    return out


def theta_identity_residuals(
    chart: FrameChart, tr: TransitionField, xs
) -> dict[str, float]:
    """Residuals of the mutual-expression identities between the structure
    functions of the two frame pairs, and of the antisymmetrized untilded
    structure functions against the frame commutator coefficients, over
    sample base points."""
    th = theta_params(chart, tr)
    c_unt = commutator_coeffs(chart)

    res = {
        "untilde_from_tilde_tensorial": 0.0,
        "tilde_from_untilde_tensorial": 0.0,
        "untilde_from_tilde_spinor": 0.0,
        "tilde_from_untilde_spinor": 0.0,
        "antisymmetry_vs_commutator": 0.0,
    }
    for x in xs:
        m = tr.matrices_at(x)
        theta = eval_expr_array(th["theta"], np.asarray(x, complex), None)
        theta_t = eval_expr_array(th["theta_tilde"], np.asarray(x, complex), None)
        var = eval_expr_array(th["vartheta"], np.asarray(x, complex), None)
        var_t = eval_expr_array(th["vartheta_tilde"], np.asarray(x, complex), None)
        cu = eval_expr_array(c_unt, np.asarray(x, complex), None)

        pred = -np.einsum("ai,cab,kc,bj->kij", m.T, theta_t, m.S, m.T)
        res["untilde_from_tilde_tensorial"] = max(
            res["untilde_from_tilde_tensorial"], float(np.max(np.abs(theta - pred)))
        )
        pred = -np.einsum("ai,cab,kc,bj->kij", m.S, theta, m.T, m.S)
        res["tilde_from_untilde_tensorial"] = max(
            res["tilde_from_untilde_tensorial"], float(np.max(np.abs(theta_t - pred)))
        )
        pred = -np.einsum("ai,cab,kc,bj->kij", m.T, var_t, m.frakS, m.frakT)
        res["untilde_from_tilde_spinor"] = max(
            res["untilde_from_tilde_spinor"], float(np.max(np.abs(var - pred)))
        )
        pred = -np.einsum("ai,cab,kc,bj->kij", m.S, var, m.frakT, m.frakS)
        res["tilde_from_untilde_spinor"] = max(
            res["tilde_from_untilde_spinor"], float(np.max(np.abs(var_t - pred)))
        )
        anti = theta - np.transpose(theta, (0, 2, 1)) - cu
        res["antisymmetry_vs_commutator"] = max(
            res["antisymmetry_vs_commutator"], float(np.max(np.abs(anti)))
        )
    return res
