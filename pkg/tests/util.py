"""Shared helpers for the test suite: random expressions, fields, points."""

import numpy as np

from stcalc import exprs as E
from stcalc.extended_fields import BundleSignature, ExtendedField, as_field
from stcalc.spintensor_core import SpinType


def random_expr(rng: np.random.Generator, signature: BundleSignature, depth: int = 3):
    """A random smooth expression in the chart variables of ``signature``."""
    if depth <= 0 or rng.random() < 0.25:
        kind = rng.integers(0, 4)
        if kind == 0:
            return E.const(round(rng.normal(), 3) + 1j * round(rng.normal(), 3))
        if kind == 1:
            return E.coord(int(rng.integers(0, 4)))
        if signature.nslots == 0:
            return E.coord(int(rng.integers(0, 4)))
        P = int(rng.integers(1, signature.nslots + 1))
        lin = int(rng.integers(0, signature.stype(P).count))
        return E.comp(P, lin) if kind == 2 else E.comp_bar(P, lin)
    kind = rng.integers(0, 7)
    a = random_expr(rng, signature, depth - 1)
    if kind == 0:
        return a + random_expr(rng, signature, depth - 1)
    if kind == 1:
        return a * random_expr(rng, signature, depth - 1)
    if kind == 2:
        return -a
    if kind == 3:
        return E.sin(E.const(0.3) * a)
    if kind == 4:
        return E.cos(E.const(0.4) * a)
    if kind == 5:
        return E.exp(E.const(0.2) * a)
    return E.power(a, int(rng.integers(2, 4)))


def random_field(
    rng: np.random.Generator,
    signature: BundleSignature,
    stype: SpinType,
    depth: int = 3,
) -> ExtendedField:
    entries = np.empty(stype.shape, dtype=object)
    for ix in np.ndindex(*stype.shape):
        entries[ix] = random_expr(rng, signature, depth)
    return as_field(signature, stype, entries)


def max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0
