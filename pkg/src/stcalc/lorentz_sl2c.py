"""The double cover of the proper orthochronous Lorentz group by SL(2,C).

A real 4-vector ``w`` is encoded as the Hermitian 2x2 matrix

    h(w) = [[w0 + w3, w1 - i w2],
            [w1 + i w2, w0 - w3]],

whose determinant is the quadratic form ``w0^2 - w1^2 - w2^2 - w3^2``.  A
unimodular matrix ``U`` acts by ``h -> U h U*``; reading the result back
through ``w_of`` yields a real linear map ``phi(U)`` on 4-vectors, which is
proper orthochronous.  ``phi`` is a group homomorphism with kernel ``{+I,-I}``.

All the encoding/decoding helpers accept either numeric arrays or object
arrays of scalar expressions: they only use ``+``, ``*`` and elementwise
conjugation, so the same code path produces the symbolic ``phi`` needed for
frame-dependent structure functions.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "pauli",
    "h_of",
    "w_of",
    "minkowski_sq",
    "minkowski_eta",
    "is_hermitian",
    "is_sl2",
    "normalize_sl2",
    "phi",
    "phi_matrix",
    "predicted_time_entry",
    "is_so_plus",
    "random_sl2",
]

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(k: int) -> np.ndarray:
    """The identity (k=0) and the three Pauli matrices (k=1..3)."""
    return _PAULI[k].copy()


def h_of(w):
    """Hermitian 2x2 encoding of a 4-vector; ``h(w) = sum_k w[k] pauli(k)``."""
    w0, w1, w2, w3 = w[0], w[1], w[2], w[3]
    out = np.empty((2, 2), dtype=np.asarray(w).dtype if _is_object(w) else complex)
    out[0, 0] = w0 + w3
    out[0, 1] = w1 + (-1j) * w2
    out[1, 0] = w1 + 1j * w2
    out[1, 1] = w0 - w3
    return out


def w_of(h):
    """Inverse of ``h_of``: read a 4-vector off a 2x2 matrix."""
    out = np.empty(4, dtype=np.asarray(h).dtype if _is_object(h) else complex)
    out[0] = 0.5 * (h[0, 0] + h[1, 1])
    out[1] = 0.5 * (h[0, 1] + h[1, 0])
    out[2] = 0.5j * h[0, 1] + (-0.5j) * h[1, 0]
    out[3] = 0.5 * (h[0, 0] - h[1, 1])
    return out


def minkowski_sq(w):
    """Quadratic form of signature (+,-,-,-)."""
    return w[0] * w[0] - w[1] * w[1] - w[2] * w[2] - w[3] * w[3]


def minkowski_eta() -> np.ndarray:
    return np.diag([1.0, -1.0, -1.0, -1.0])


def _is_object(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def is_hermitian(h, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(h - h.conj().T)) <= tol)


def is_sl2(U, tol: float = 1e-9) -> bool:
    det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
    return bool(abs(det - 1.0) <= tol)


def normalize_sl2(U) -> np.ndarray:
    """Rescale an invertible 2x2 matrix to unit determinant."""
    U = np.asarray(U, dtype=complex)
    det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
    if abs(det) < 1e-12:
        raise ValueError("matrix is (numerically) singular, cannot normalize")
    return U / np.sqrt(det)


def phi_matrix(U):
    """Columns of the induced 4x4 map, computed as ``w(U h(e_j) U*)``.

    Works for numeric and expression-valued ``U``; no unimodularity check is
    performed here.
    """
    Ustar = np.conjugate(U).T
    dtype = object if _is_object(U) else complex
    S = np.empty((4, 4), dtype=dtype)
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        col = w_of(np.dot(np.dot(U, h_of(e)), Ustar))
        for i in range(4):
            S[i, j] = col[i]
    return S


def phi(U, tol: float = 1e-9) -> np.ndarray:
    """The real 4x4 image of a unimodular 2x2 matrix.

    Raises ``ValueError`` when ``det U`` is not 1 within ``tol``.
    """
    U = np.asarray(U, dtype=complex)
    if not is_sl2(U, tol):
        det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
        raise ValueError(
            f"phi needs a unimodular matrix; got det = {det:.6g} "
            "(use normalize_sl2 first)"
        )
    S = phi_matrix(U)
    imag = float(np.max(np.abs(S.imag)))
    if imag > 1e-10:
        raise ValueError(f"induced map has imaginary residue {imag:.3g}")
    return S.real.copy()


def predicted_time_entry(U) -> float:
    """Closed form for the (0,0) entry of ``phi(U)``: half the squared
    Frobenius norm of ``U``."""
    return float(sum(abs(U[i, j]) ** 2 for i in range(2) for j in range(2)) / 2.0)


def is_so_plus(S, tol: float = 1e-9) -> bool:
    """Check S^T eta S = eta, det S = 1 and positive time orientation."""
    S = np.asarray(S, dtype=float)
    eta = minkowski_eta()
    if np.max(np.abs(S.T @ eta @ S - eta)) > tol:
        return False
    if abs(np.linalg.det(S) - 1.0) > tol:
        return False
    return S[0, 0] >= 1.0 - tol


def random_sl2(rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Draw a random unimodular 2x2 matrix (normalized Gaussian entries)."""
    while True:
        U = rng.normal(scale=spread, size=(2, 2)) + 1j * rng.normal(
            scale=spread, size=(2, 2)
        )
        det = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
        if abs(det) > 1e-3:
            return U / np.sqrt(det)
