"""Core spin-tensor data model and grading-safe algebraic operations.

A spin-tensor is a multidimensional complex array whose index slots come in
six kinds: plain spinor (upper/lower, dimension 2), barred spinor (upper/
lower, dimension 2) and tensorial (upper/lower, dimension 4).  The canonical
slot order is

    upper spinor, lower spinor, upper barred, lower barred,
    upper tensorial, lower tensorial

and components are stored as a shaped row-major numpy array; flattening it
(earlier slots varying slowest) gives the canonical linearization.  Spinor and
barred index values are reported 1-based (1, 2), tensorial ones 0-based
(0..3); storage is uniformly 0-based.

The array-level helpers at the bottom operate on ``(array, SpinType)`` pairs
and are dtype-agnostic: they run unchanged on ``complex128`` arrays (numeric
spin-tensors) and on ``object`` arrays holding scalar expressions (extended
fields), because they only rely on ``+``, ``*`` and elementwise conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _iterprod

import numpy as np

__all__ = [
    "SpinType",
    "SpinTensor",
    "zero",
    "from_components",
    "tensor_product",
    "contract",
    "tau",
    "add",
    "scale",
    "tensor_product_array",
    "contract_array",
    "tau_array",
    "conjugate_layout_array",
    "apply_matrix_to_axis",
]

_FAMILY = ("spinor", "spinor", "barred", "barred", "tensor", "tensor")
_POSITION = ("up", "down", "up", "down", "up", "down")
_DIM = (2, 2, 2, 2, 4, 4)


@dataclass(frozen=True)
class SpinType:
    """Slot-count signature of a spin-tensor.

    The six counts follow the canonical slot order; ``str()`` renders the
    conventional ``(a,b|c,d|e,f)`` form.
    """

    up_spinor: int = 0
    lo_spinor: int = 0
    up_barred: int = 0
    lo_barred: int = 0
    up_tensor: int = 0
    lo_tensor: int = 0

    def __post_init__(self):
        for c in self.counts:
            if c < 0:
                raise ValueError(f"negative slot count in {self!r}")

    @property
    def counts(self) -> tuple[int, ...]:
        return (
            self.up_spinor,
            self.lo_spinor,
            self.up_barred,
            self.lo_barred,
            self.up_tensor,
            self.lo_tensor,
        )

    @property
    def naxes(self) -> int:
        return sum(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        out = []
        for cnt, dim in zip(self.counts, _DIM):
            out.extend([dim] * cnt)
        return tuple(out)

    @property
    def count(self) -> int:
        """Number of independent components (2^spinor-slots * 4^tensor-slots)."""
        spin = self.up_spinor + self.lo_spinor + self.up_barred + self.lo_barred
        tens = self.up_tensor + self.lo_tensor
        return 2**spin * 4**tens

    def group_offsets(self) -> tuple[int, ...]:
        """Cumulative axis offsets of the six slot groups (length 7)."""
        offs = [0]
        for c in self.counts:
            offs.append(offs[-1] + c)
        return tuple(offs)

    def axes_of_group(self, g: int) -> range:
        offs = self.group_offsets()
        return range(offs[g], offs[g + 1])

    def slot_kind(self, axis: int) -> tuple[str, str]:
        """Return ``(family, position)`` for a global slot index."""
        if not 0 <= axis < self.naxes:
            raise IndexError(f"slot {axis} out of range for {self}")
        offs = self.group_offsets()
        for g in range(6):
            if offs[g] <= axis < offs[g + 1]:
                return _FAMILY[g], _POSITION[g]
        raise AssertionError("unreachable")

    def dual(self) -> "SpinType":
        """Signature with every upper/lower pair swapped."""
        return SpinType(
            self.lo_spinor,
            self.up_spinor,
            self.lo_barred,
            self.up_barred,
            self.lo_tensor,
            self.up_tensor,
        )

    def conjugate_type(self) -> "SpinType":
        """Signature of the conjugate transposition (plain <-> barred)."""
        return SpinType(
            self.up_barred,
            self.lo_barred,
            self.up_spinor,
            self.lo_spinor,
            self.up_tensor,
            self.lo_tensor,
        )

    def is_scalar(self) -> bool:
        return self.naxes == 0

    def __str__(self) -> str:
        a, b, c, d, e, f = self.counts
        return f"({a},{b}|{c},{d}|{e},{f})"

    @classmethod
    def parse(cls, text: str) -> "SpinType":
        s = text.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise ValueError(f"malformed type literal: {text!r}")
        blocks = s[1:-1].split("|")
        if len(blocks) != 3:
            raise ValueError(f"malformed type literal: {text!r}")
        vals = []
        for block in blocks:
            parts = block.split(",")
            if len(parts) != 2:
                raise ValueError(f"malformed type literal: {text!r}")
            vals.extend(int(p.strip()) for p in parts)
        return cls(*vals)

    # -- linearization bookkeeping -------------------------------------

    def storage_indices(self):
        """Iterate all 0-based storage multi-indices in canonical order."""
        return _iterprod(*[range(d) for d in self.shape])

    def reported_index(self, storage: tuple[int, ...]) -> tuple[int, ...]:
        """0-based storage multi-index -> reported values (spinors 1-based)."""
        if len(storage) != self.naxes:
            raise ValueError("index length mismatch")
        out = []
        for axis, v in enumerate(storage):
            fam, _ = self.slot_kind(axis)
            out.append(v + 1 if fam in ("spinor", "barred") else v)
        return tuple(out)

    def storage_index(self, reported: tuple[int, ...]) -> tuple[int, ...]:
        """Reported multi-index -> 0-based storage multi-index."""
        if len(reported) != self.naxes:
            raise ValueError("index length mismatch")
        out = []
        for axis, v in enumerate(reported):
            fam, _ = self.slot_kind(axis)
            w = v - 1 if fam in ("spinor", "barred") else v
            if not 0 <= w < self.shape[axis]:
                raise ValueError(f"index value {v} out of range at slot {axis}")
            out.append(w)
        return tuple(out)

    def lin_of_storage(self, storage: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(storage, self.shape)) if self.naxes else 0


@dataclass
class SpinTensor:
    """A numeric spin-tensor: a signature plus a shaped complex array."""

    stype: SpinType
    comps: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.comps, dtype=complex)
        if arr.shape != self.stype.shape:
            raise ValueError(
                f"component shape {arr.shape} does not match type {self.stype}"
            )
        self.comps = arr

    @property
    def flat(self) -> np.ndarray:
        """Canonical linearization (row-major flattening)."""
        return self.comps.reshape(-1)


def zero(stype: SpinType) -> SpinTensor:
    return SpinTensor(stype, np.zeros(stype.shape, dtype=complex))


def from_components(stype: SpinType, values) -> SpinTensor:
    """Build a spin-tensor from a flat or shaped component array."""
    arr = np.asarray(values, dtype=complex)
    if arr.shape != stype.shape:
        arr = arr.reshape(stype.shape)
    return SpinTensor(stype, arr.copy())


def add(a: SpinTensor, b: SpinTensor) -> SpinTensor:
    if a.stype != b.stype:
        raise ValueError(f"type mismatch: {a.stype} vs {b.stype}")
    return SpinTensor(a.stype, a.comps + b.comps)


def scale(a: SpinTensor, c: complex) -> SpinTensor:
    return SpinTensor(a.stype, a.comps * c)


def tensor_product(a: SpinTensor, b: SpinTensor) -> SpinTensor:
    arr, stype = tensor_product_array(a.comps, a.stype, b.comps, b.stype)
    return SpinTensor(stype, arr)


def contract(a: SpinTensor, up_slot: int, down_slot: int) -> SpinTensor:
    arr, stype = contract_array(a.comps, a.stype, up_slot, down_slot)
    return SpinTensor(stype, arr)


def tau(a: SpinTensor) -> SpinTensor:
    arr, stype = tau_array(a.comps, a.stype)
    return SpinTensor(stype, arr)


# ---------------------------------------------------------------------------
# dtype-agnostic array-level implementations
# ---------------------------------------------------------------------------


def tensor_product_array(a_arr, a_type: SpinType, b_arr, b_type: SpinType):
    """Outer product with groupwise slot interleaving.

    The result keeps the canonical slot order: within each of the six slot
    groups, a's slots come first, then b's.
    """
    prod_type = SpinType(*(x + y for x, y in zip(a_type.counts, b_type.counts)))
    raw = np.multiply.outer(a_arr, b_arr)
    na = a_type.naxes
    perm = []
    for g in range(6):
        perm.extend(a_type.axes_of_group(g))
        perm.extend(na + ax for ax in b_type.axes_of_group(g))
    return np.transpose(raw, perm), prod_type


def contract_array(arr, stype: SpinType, up_slot: int, down_slot: int):
    """Sum an upper slot against a lower slot of the same family."""
    fam_u, pos_u = stype.slot_kind(up_slot)
    fam_d, pos_d = stype.slot_kind(down_slot)
    if pos_u != "up" or pos_d != "down":
        raise ValueError(
            f"contract needs (upper, lower) slots, got {pos_u}/{pos_d}"
        )
    if fam_u != fam_d:
        raise ValueError(f"cannot contract {fam_u} slot against {fam_d} slot")
    counts = list(stype.counts)
    for g in range(6):
        if _FAMILY[g] == fam_u and _POSITION[g] == "up":
            counts[g] -= 1
        if _FAMILY[g] == fam_d and _POSITION[g] == "down":
            counts[g] -= 1
    out_type = SpinType(*counts)
    out = np.trace(arr, axis1=up_slot, axis2=down_slot)
    return out, out_type


def conjugate_layout_array(arr, stype: SpinType):
    """Transpose into the conjugate-swapped slot layout without conjugating
    the entries (the pure index permutation underlying ``tau``)."""
    perm = []
    for g in (2, 3, 0, 1, 4, 5):
        perm.extend(stype.axes_of_group(g))
    return np.transpose(arr, perm), stype.conjugate_type()


def tau_array(arr, stype: SpinType):
    """Conjugate transposition: conjugate entries, swap plain and barred
    slot groups (order preserved within each group)."""
    out, out_type = conjugate_layout_array(arr, stype)
    return np.conjugate(out), out_type


def apply_matrix_to_axis(mat, arr, axis: int):
    """Apply a square matrix along one axis: out[.., i, ..] = sum_j M[i,j] a[.., j, ..]."""
    moved = np.tensordot(np.asarray(mat), arr, axes=(1, axis))
    return np.moveaxis(moved, 0, axis)
