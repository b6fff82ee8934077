"""Dense symmetric eigensolvers used by every other module.

Generalized symmetric-definite problems A x = lambda B x are reduced to
standard form by a pivot-checked Cholesky factorization B = L L^T: the
standard problem for L^{-1} A L^{-T} is solved with LAPACK and eigenvectors
are back-transformed, which makes them B-orthonormal by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import IndexOutOfRange, InvalidMatrix, NotPositiveDefinite

# Relative pivot tolerance distinguishing a genuinely indefinite matrix from
# Cholesky roundoff.
CHOLESKY_PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum of a symmetric (pencil) problem.

    values are ascending; vectors are orthonormal columns (B-orthonormal
    for generalized problems).
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def order(self) -> int:
        return self.values.shape[0]


def as_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate a square finite real matrix and symmetrize it by averaging."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidMatrix(f"{name}: expected a square matrix, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidMatrix(f"{name}: empty matrix")
    if not np.isfinite(arr).all():
        raise InvalidMatrix(f"{name}: non-finite entries")
    return 0.5 * (arr + arr.T)


def apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude component is positive.

    Ties are broken by the lowest row index (argmax returns the first hit),
    which keeps the output deterministic for identical input bits.
    """
    cols = np.arange(vectors.shape[1])
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, cols])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(a) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, values ascending."""
    m = as_symmetric(a)
    values, vectors = np.linalg.eigh(m)
    return EigenDecomposition(values=values, vectors=apply_sign_convention(vectors))


def cholesky_spd(b, name: str = "B", rtol: float = CHOLESKY_PIVOT_RTOL) -> np.ndarray:
    """Lower Cholesky factor of a positive definite matrix.

    Raises NotPositiveDefinite when the factorization fails outright or any
    pivot falls below rtol times the largest diagonal entry.
    """
    m = as_symmetric(b, name=name)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{name}: Cholesky factorization failed") from exc
    pivots = np.diagonal(lower) ** 2
    if pivots.min() < rtol * np.diagonal(m).max():
        raise NotPositiveDefinite(
            f"{name}: pivot {pivots.min():.3e} below relative tolerance {rtol:g}"
        )
    return lower


def _reduced_standard(a: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Congruence transform L^{-1} A L^{-T} for symmetric A."""
    y = sla.solve_triangular(lower, a, lower=True, check_finite=False)
    c = sla.solve_triangular(lower, y.T, lower=True, check_finite=False)
    return 0.5 * (c + c.T)


def _check_pair(a: np.ndarray, b_order: int) -> None:
    if a.shape[0] != b_order:
        raise InvalidMatrix(
            f"pencil matrices have mismatched orders {a.shape[0]} and {b_order}"
        )


def sym_definite_gep_kth(a, b, k: int) -> tuple[float, np.ndarray]:
    """k-th smallest eigenpair of A x = lambda B x with B positive definite.

    The eigenvector is B-normalized (x^T B x = 1) with the deterministic sign
    convention of apply_sign_convention.
    """
    am = as_symmetric(a, name="A")
    lower = cholesky_spd(b)
    _check_pair(am, lower.shape[0])
    n = am.shape[0]
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"k={k} outside 1..{n}")
    c = _reduced_standard(am, lower)
    values, y = sla.eigh(c, subset_by_index=[k - 1, k - 1], check_finite=False)
    x = sla.solve_triangular(lower, y[:, 0], trans="T", lower=True, check_finite=False)
    x = apply_sign_convention(x.reshape(-1, 1))[:, 0]
    return float(values[0]), x


def sym_definite_gep_full(a, b) -> EigenDecomposition:
    """All eigenpairs of A x = lambda B x, ascending, B-orthonormal vectors."""
    am = as_symmetric(a, name="A")
    lower = cholesky_spd(b)
    _check_pair(am, lower.shape[0])
    c = _reduced_standard(am, lower)
    values, y = np.linalg.eigh(c)
    x = sla.solve_triangular(lower, y, trans="T", lower=True, check_finite=False)
    return EigenDecomposition(values=values, vectors=apply_sign_convention(x))
