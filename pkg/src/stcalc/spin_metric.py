"""Skew-symmetric spinor metric and raising/lowering of spinor slots.

The metric with lower indices has entry +1 at row 1, column 2 (1-based) and
-1 at row 2, column 1; the metric with upper indices is its negative (so that
contracting one against the other gives the identity).  The barred copies are
numerically identical.  Lowering sends ``Y^i -> sum_i Y^i d[i,j]``; raising
sends ``Y_i -> sum_i Y[i] dinv[i,j]``.

Slot bookkeeping: the converted slot is appended at the end of its destination
group, so a lower-then-raise round trip is positionally exact when the slot in
question is the last of its group.
"""

from __future__ import annotations

import numpy as np

from .spintensor_core import SpinTensor, SpinType, apply_matrix_to_axis

__all__ = [
    "spin_metric_cov",
    "spin_metric_con",
    "barred_metric_cov",
    "barred_metric_con",
    "lower_spinor",
    "raise_spinor",
    "lower_barred",
    "raise_barred",
    "lower_spinor_array",
    "raise_spinor_array",
    "lower_barred_array",
    "raise_barred_array",
    "sl2_invariance_residual",
]

_D_COV = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
_D_CON = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)


def spin_metric_cov() -> np.ndarray:
    """Metric with two lower spinor slots."""
    return _D_COV.copy()


def spin_metric_con() -> np.ndarray:
    """Metric with two upper spinor slots (inverse of the covariant one)."""
    return _D_CON.copy()


def barred_metric_cov() -> np.ndarray:
    """Barred-slot covariant metric (numerically equal to the plain one)."""
    return _D_COV.copy()


def barred_metric_con() -> np.ndarray:
    return _D_CON.copy()


def _shift_slot(arr, stype: SpinType, slot: int, mat, family: str, direction: str):
    fam, pos = stype.slot_kind(slot)
    want_pos = "up" if direction == "lower" else "down"
    if fam != family or pos != want_pos:
        raise ValueError(
            f"slot {slot} of {stype} is a {pos} {fam} slot; "
            f"cannot {direction} it as {family}"
        )
    # out[..j..] = sum_i arr[..i..] mat[i, j]
    out = apply_matrix_to_axis(np.asarray(mat).T, arr, slot)
    a, b, c, d, e, f = stype.counts
    if family == "spinor":
        if direction == "lower":
            new_type = SpinType(a - 1, b + 1, c, d, e, f)
            dest = (a - 1) + b
        else:
            new_type = SpinType(a + 1, b - 1, c, d, e, f)
            dest = a
    else:
        if direction == "lower":
            new_type = SpinType(a, b, c - 1, d + 1, e, f)
            dest = a + b + (c - 1) + d
        else:
            new_type = SpinType(a, b, c + 1, d - 1, e, f)
            dest = a + b + c
    return np.moveaxis(out, slot, dest), new_type


def lower_spinor_array(arr, stype: SpinType, slot: int):
    return _shift_slot(arr, stype, slot, _D_COV, "spinor", "lower")


def raise_spinor_array(arr, stype: SpinType, slot: int):
    return _shift_slot(arr, stype, slot, _D_CON, "spinor", "raise")


def lower_barred_array(arr, stype: SpinType, slot: int):
    return _shift_slot(arr, stype, slot, _D_COV, "barred", "lower")


def raise_barred_array(arr, stype: SpinType, slot: int):
    return _shift_slot(arr, stype, slot, _D_CON, "barred", "raise")


def lower_spinor(a: SpinTensor, slot: int) -> SpinTensor:
    arr, stype = lower_spinor_array(a.comps, a.stype, slot)
    return SpinTensor(stype, arr)


def raise_spinor(a: SpinTensor, slot: int) -> SpinTensor:
    arr, stype = raise_spinor_array(a.comps, a.stype, slot)
    return SpinTensor(stype, arr)


def lower_barred(a: SpinTensor, slot: int) -> SpinTensor:
    arr, stype = lower_barred_array(a.comps, a.stype, slot)
    return SpinTensor(stype, arr)


def raise_barred(a: SpinTensor, slot: int) -> SpinTensor:
    arr, stype = raise_barred_array(a.comps, a.stype, slot)
    return SpinTensor(stype, arr)


def sl2_invariance_residual(M) -> float:
    """How far a 2x2 matrix is from transforming the metric by its determinant.

    Returns ``max_abs(M^T d M - det(M) d)``, which vanishes for every 2x2
    matrix -- the skew metric is relatively invariant under all of GL(2,C),
    hence invariant under the unimodular group.
    """
    M = np.asarray(M, dtype=complex)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    resid = M.T @ _D_COV @ M - det * _D_COV
    return float(np.max(np.abs(resid)))
