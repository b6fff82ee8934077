"""Exact dense baseline via the operator-determinant construction.

The coupled problem is equivalent to a pair of nm x nm generalized
eigenproblems sharing eigenvectors: M1 X = lambda (-M0) X and
M2 X = mu (-M0) X with M0 = kron(B1, C2) - kron(C1, B2) negative definite
under the standing assumptions.  Matrices act on row-major vectorized X, so
kron(A, B) @ X.ravel() == (A @ X @ B.T).ravel().
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidVector, TooLarge
from .linalg import apply_sign_convention, sym_definite_gep_full
from .problem import TwoParamProblem

DEFAULT_ORACLE_CAP = 40000
ORACLE_CAP_ENV = "TWOPARAM_ORACLE_CAP"

# Relative eigenvalue gap below which lambda values are treated as one
# cluster and split by diagonalizing the restricted mu operator.
CLUSTER_RTOL = 1e-8
RANK_ONE_FLAG_TOL = 1e-6


@dataclass(frozen=True)
class KroneckerOperators:
    """Dense nm x nm realizations of the three coupling operators."""

    M0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray

    @property
    def order(self) -> int:
        return self.M0.shape[0]


@dataclass(frozen=True)
class OracleRecord:
    """One eigenpair with its rank-one factors and assigned index."""

    lam: float
    mu: float
    X: np.ndarray
    u: np.ndarray
    v: np.ndarray
    index: tuple[int, int]
    rank_one_residual: float

    @property
    def flagged(self) -> bool:
        return self.rank_one_residual > RANK_ONE_FLAG_TOL


@dataclass(frozen=True)
class OracleSpectrum:
    """All nm eigenpairs, ascending in (lambda, mu)."""

    records: tuple[OracleRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by_index(self) -> dict[tuple[int, int], OracleRecord]:
        return {rec.index: rec for rec in self.records}


def _oracle_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    return int(os.environ.get(ORACLE_CAP_ENV, DEFAULT_ORACLE_CAP))


def build_operators(p: TwoParamProblem, cap: int | None = None) -> KroneckerOperators:
    """Assemble the dense coupling operators (subject to the memory cap)."""
    size = p.n * p.m
    limit = _oracle_cap(cap)
    if size > limit:
        raise TooLarge(f"nm = {size} exceeds oracle cap {limit}")
    m0 = np.kron(p.B1, p.C2) - np.kron(p.C1, p.B2)
    m1 = np.kron(p.A1, p.C2) - np.kron(p.C1, p.A2)
    m2 = np.kron(p.B1, p.A2) - np.kron(p.A1, p.B2)
    return KroneckerOperators(M0=m0, M1=m1, M2=m2)


def rank_one_factor(x_mat) -> tuple[np.ndarray, np.ndarray, float]:
    """Best rank-one approximation u v^T by alternating power iteration.

    Returns a unit-norm u, a v that carries the scale, and the relative
    Frobenius residual ||X - u v^T||_F / ||X||_F.
    """
    x = np.asarray(x_mat, dtype=float)
    norm_x = np.linalg.norm(x)
    if x.ndim != 2 or norm_x == 0.0 or not np.isfinite(x).all():
        raise InvalidVector("rank-one factorization needs a finite nonzero matrix")
    col = int(np.argmax(np.linalg.norm(x, axis=0)))
    v = np.zeros(x.shape[1])
    v[col] = 1.0
    sigma_prev = 0.0
    sigma = 0.0
    for _ in range(20):
        uw = x @ v
        u = uw / np.linalg.norm(uw)
        vw = x.T @ u
        sigma = float(np.linalg.norm(vw))
        v = vw / sigma
        if abs(sigma - sigma_prev) <= 1e-15 * sigma:
            break
        sigma_prev = sigma
    u = apply_sign_convention(u.reshape(-1, 1))[:, 0]
    # Recompute v against the sign-fixed u so u v^T matches X's orientation.
    v_scaled = x.T @ u
    residual = float(np.linalg.norm(x - np.outer(u, v_scaled)) / norm_x)
    return u, v_scaled, residual


def _pencil_spectra(p: TwoParamProblem, lam: float, mu: float, tol_scale: float):
    pencil1 = p.A1 + lam * p.B1 + mu * p.C1
    pencil2 = p.A2 + lam * p.B2 + mu * p.C2
    fro = np.linalg.norm
    tol1 = tol_scale * (fro(p.A1) + abs(lam) * fro(p.B1) + abs(mu) * fro(p.C1))
    tol2 = tol_scale * (fro(p.A2) + abs(lam) * fro(p.B2) + abs(mu) * fro(p.C2))
    return np.linalg.eigvalsh(pencil1), np.linalg.eigvalsh(pencil2), tol1, tol2


def index_of(
    p: TwoParamProblem, lam: float, mu: float, tol_scale: float = 1e-8
) -> tuple[tuple[int, int], float]:
    """Index of (lam, mu) per the zero-position rule, with its defect.

    i is one plus the number of eigenvalues of A1 + lam B1 + mu C1 strictly
    below -tol, where tol is tol_scale times the pencil norm; the defect
    sums the distances of the closest-to-zero eigenvalues over both pencils.
    """
    w1, w2, tol1, tol2 = _pencil_spectra(p, lam, mu, tol_scale)
    i = 1 + int(np.count_nonzero(w1 < -tol1))
    j = 1 + int(np.count_nonzero(w2 < -tol2))
    defect = float(np.abs(w1).min() + np.abs(w2).min())
    return (i, j), defect


def index_range(
    p: TwoParamProblem, lam: float, mu: float, tol_scale: float = 1e-8
) -> tuple[tuple[int, int], tuple[int, int], float]:
    """Admissible index ranges at (lam, mu), honoring near-zero multiplicity.

    When a pencil has several eigenvalues within tolerance of zero the
    eigenvalue carries multiple indices; the ranges [i_lo, i_hi] and
    [j_lo, j_hi] collapse to a point for simple eigenvalues.
    """
    w1, w2, tol1, tol2 = _pencil_spectra(p, lam, mu, tol_scale)
    i_lo = 1 + int(np.count_nonzero(w1 < -tol1))
    j_lo = 1 + int(np.count_nonzero(w2 < -tol2))
    i_hi = i_lo + max(0, int(np.count_nonzero(np.abs(w1) <= tol1)) - 1)
    j_hi = j_lo + max(0, int(np.count_nonzero(np.abs(w2) <= tol2)) - 1)
    defect = float(np.abs(w1).min() + np.abs(w2).min())
    return (i_lo, i_hi), (j_lo, j_hi), defect


def _clusters(values: np.ndarray, rtol: float) -> list[list[int]]:
    groups: list[list[int]] = [[0]]
    for k in range(1, values.size):
        gap = values[k] - values[k - 1]
        scale = max(1.0, abs(values[k]), abs(values[k - 1]))
        if gap < rtol * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def oracle_solve_all(
    p: TwoParamProblem,
    cap: int | None = None,
    cluster_rtol: float = CLUSTER_RTOL,
) -> OracleSpectrum:
    """Solve the dense nm x nm problem and emit all rank-one eigenpairs.

    Clustered lambda eigenvalues are split by diagonalizing the restricted
    mu operator within the cluster; records whose rank-one extraction
    residual exceeds the flag tolerance are kept but marked flagged.
    """
    ops = build_operators(p, cap=cap)
    neg_m0 = -ops.M0
    dec = sym_definite_gep_full(ops.M1, neg_m0)
    records: list[OracleRecord] = []
    for group in _clusters(dec.values, cluster_rtol):
        vecs = dec.vectors[:, group]
        if len(group) == 1:
            mus = np.array([float(vecs[:, 0] @ (ops.M2 @ vecs[:, 0]))])
            split = vecs
        else:
            # Columns are (-M0)-orthonormal, so the restriction of the mu
            # pencil to the cluster is the small symmetric matrix below.
            w = vecs.T @ (ops.M2 @ vecs)
            w = 0.5 * (w + w.T)
            mus, y = np.linalg.eigh(w)
            split = vecs @ y
        order = np.argsort(mus, kind="stable")
        for pos in order:
            lam = float(dec.values[group[0]]) if len(group) == 1 else float(
                np.mean(dec.values[group])
            )
            x_vec = split[:, pos]
            x_mat = x_vec.reshape(p.n, p.m)
            x_mat = x_mat / np.linalg.norm(x_mat)
            flat = apply_sign_convention(x_mat.reshape(-1, 1))[:, 0]
            x_mat = flat.reshape(p.n, p.m)
            u, v, residual = rank_one_factor(x_mat)
            v_norm = np.linalg.norm(v)
            v = v / v_norm if v_norm > 0 else v
            v = apply_sign_convention(v.reshape(-1, 1))[:, 0]
            mu = float(mus[pos])
            idx, _ = index_of(p, lam, mu)
            records.append(
                OracleRecord(
                    lam=lam,
                    mu=mu,
                    X=x_mat,
                    u=u,
                    v=v,
                    index=idx,
                    rank_one_residual=residual,
                )
            )
    records.sort(key=lambda rec: (rec.lam, rec.mu))
    return OracleSpectrum(records=tuple(records))
