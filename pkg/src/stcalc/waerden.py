"""Conversion between tensorial slots and (spinor, barred) slot pairs.

An upper tensorial slot converts into an upper spinor + upper barred pair by
contraction with the symbol table ``g_symbol(i, ibar, q)``; the inverse table
``g_inv(q, i, ibar)`` undoes it.  The two tables are mutually inverse in both
ways, and they carry the Minkowski metric into (half) the product of the two
skew spinor metrics.

Slot bookkeeping follows the package convention: freshly created slots are
appended at the end of their destination group.
"""

from __future__ import annotations

import numpy as np

from .lorentz_sl2c import minkowski_eta, pauli
from .spin_metric import (
    barred_metric_con,
    barred_metric_cov,
    spin_metric_con,
    spin_metric_cov,
)
from .spintensor_core import SpinTensor, SpinType

__all__ = [
    "g_symbol",
    "g_inv",
    "g_symbol_array",
    "g_inv_array",
    "tensor_to_spinor",
    "spinor_to_tensor",
    "tensor_to_spinor_array",
    "spinor_to_tensor_array",
    "completeness_residuals",
    "metric_conversion_residuals",
]


def _build_tables():
    up = np.empty((2, 2, 4), dtype=complex)  # [i, ibar, q]
    lo = np.empty((4, 2, 2), dtype=complex)  # [q, i, ibar]
    for q in range(4):
        s = pauli(q)
        up[:, :, q] = s
        lo[q] = s.T / 2.0
    return up, lo


_G_UP, _G_LO = _build_tables()


def g_symbol(i: int, ibar: int, q: int) -> complex:
    """Upper conversion symbol; ``i, ibar`` are 1-based, ``q`` is 0-based."""
    return complex(_G_UP[i - 1, ibar - 1, q])


def g_inv(q: int, i: int, ibar: int) -> complex:
    """Lower conversion symbol, inverse to ``g_symbol``."""
    return complex(_G_LO[q, i - 1, ibar - 1])


def g_symbol_array() -> np.ndarray:
    """Table ``[i-1, ibar-1, q]`` of the upper symbols."""
    return _G_UP.copy()


def g_inv_array() -> np.ndarray:
    """Table ``[q, i-1, ibar-1]`` of the lower symbols."""
    return _G_LO.copy()


def tensor_to_spinor_array(arr, stype: SpinType, slot: int):
    """Convert one tensorial slot into a (spinor, barred) pair.

    An upper tensorial slot becomes an upper spinor and an upper barred slot
    (appended at the ends of their groups); a lower slot likewise with the
    inverse table.
    """
    fam, pos = stype.slot_kind(slot)
    if fam != "tensor":
        raise ValueError(f"slot {slot} of {stype} is {fam}, not tensorial")
    a, b, c, d, e, f = stype.counts
    if pos == "up":
        out0 = np.tensordot(arr, _G_UP, axes=(slot, 2))
        new_type = SpinType(a + 1, b, c + 1, d, e - 1, f)
        pos_i, pos_ibar = a, a + 1 + b + c
    else:
        out0 = np.tensordot(arr, np.transpose(_G_LO, (1, 2, 0)), axes=(slot, 2))
        new_type = SpinType(a, b + 1, c, d + 1, e, f - 1)
        pos_i, pos_ibar = a + b, a + b + 1 + c + d
    k = out0.ndim - 2  # the two fresh axes sit at the end
    out = np.moveaxis(out0, k, pos_i)
    out = np.moveaxis(out, k + 1, pos_ibar)
    return out, new_type


def spinor_to_tensor_array(arr, stype: SpinType, spin_slot: int, barred_slot: int):
    """Merge a (spinor, barred) slot pair back into one tensorial slot."""
    fam_s, pos_s = stype.slot_kind(spin_slot)
    fam_b, pos_b = stype.slot_kind(barred_slot)
    if fam_s != "spinor" or fam_b != "barred":
        raise ValueError(
            f"need a (spinor, barred) pair, got ({fam_s}, {fam_b})"
        )
    if pos_s != pos_b:
        raise ValueError("both slots must be upper or both lower")
    a, b, c, d, e, f = stype.counts
    if pos_s == "up":
        out0 = np.tensordot(arr, _G_LO, axes=([spin_slot, barred_slot], [1, 2]))
        new_type = SpinType(a - 1, b, c - 1, d, e + 1, f)
        dest = (a - 1) + b + (c - 1) + d + e
    else:
        out0 = np.tensordot(arr, _G_UP, axes=([spin_slot, barred_slot], [0, 1]))
        new_type = SpinType(a, b - 1, c, d - 1, e, f + 1)
        dest = a + (b - 1) + c + (d - 1) + e + f
    out = np.moveaxis(out0, out0.ndim - 1, dest)
    return out, new_type


def tensor_to_spinor(a: SpinTensor, slot: int) -> SpinTensor:
    arr, stype = tensor_to_spinor_array(a.comps, a.stype, slot)
    return SpinTensor(stype, arr)


def spinor_to_tensor(a: SpinTensor, spin_slot: int, barred_slot: int) -> SpinTensor:
    arr, stype = spinor_to_tensor_array(a.comps, a.stype, spin_slot, barred_slot)
    return SpinTensor(stype, arr)


def completeness_residuals() -> tuple[float, float]:
    """Deviation of the two mutual-inverse contractions from identities."""
    r1 = np.einsum("abp,qab->qp", _G_UP, _G_LO) - np.eye(4)
    r2 = np.einsum("abq,qcd->abcd", _G_UP, _G_LO) - np.einsum(
        "ac,bd->abcd", np.eye(2), np.eye(2)
    )
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


def metric_conversion_residuals() -> dict[str, float]:
    """How exactly the symbol tables carry the spacetime metric into the
    spinor metrics and back (four identities, all zero in exact arithmetic).

    Returns a dict with keys ``cov_to_spin``, ``spin_to_cov``, ``con_to_spin``
    and ``spin_to_con``.
    """
    g = minkowski_eta().astype(complex)
    ginv = minkowski_eta().astype(complex)  # self-inverse
    d_cov = spin_metric_cov()
    d_con = spin_metric_con()
    db_cov = barred_metric_cov()
    db_con = barred_metric_con()

    # axis convention below: (a, b, c, d) = (plain1, plain2, barred1, barred2)
    lhs1 = np.einsum("pq,pac,qbd->abcd", g, _G_LO, _G_LO)
    rhs1 = 0.5 * np.einsum("ab,cd->abcd", d_cov, db_cov)

    lhs2 = np.einsum("abcd,acp,bdq->pq", rhs1, _G_UP, _G_UP)
    rhs2 = g

    lhs3 = np.einsum("pq,acp,bdq->abcd", ginv, _G_UP, _G_UP)
    rhs3 = 2.0 * np.einsum("ab,cd->abcd", d_con, db_con)

    lhs4 = np.einsum("abcd,pac,qbd->pq", rhs3, _G_LO, _G_LO)
    rhs4 = ginv

    return {
        "cov_to_spin": float(np.max(np.abs(lhs1 - rhs1))),
        "spin_to_cov": float(np.max(np.abs(lhs2 - rhs2))),
        "con_to_spin": float(np.max(np.abs(lhs3 - rhs3))),
        "spin_to_con": float(np.max(np.abs(lhs4 - rhs4))),
    }
