"""Index-targeted alternating solver.

Each half step freezes one eigenvector factor, contracts its equation to
three scalars (a, b, c), and takes the requested k-th smallest eigenpair of
the resulting symmetric-definite pencil for the other factor.  At a fixed
point the two pencil eigenvalues coincide and (lambda, mu, u, v) solves the
coupled problem with the requested index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .exceptions import DegenerateForm, IndexOutOfRange, InvalidVector
from .linalg import sym_definite_gep_kth
from .problem import TwoParamProblem


@dataclass(frozen=True)
class QuadraticForms:
    """Scalars x^T A x, x^T B x, x^T C x of one equation at a vector x."""

    a: float
    b: float
    c: float


def quadratic_forms(x, a_mat, b_mat, c_mat) -> QuadraticForms:
    """Contract one equation's matrices against a nonzero vector."""
    vec = np.asarray(x, dtype=float)
    if vec.ndim != 1:
        raise InvalidVector(f"expected a vector, got shape {vec.shape}")
    if not np.isfinite(vec).all() or not vec.any():
        raise InvalidVector("vector must be finite and nonzero")
    return QuadraticForms(
        a=float(vec @ (a_mat @ vec)),
        b=float(vec @ (b_mat @ vec)),
        c=float(vec @ (c_mat @ vec)),
    )


def mu_from(lam: float, f2: QuadraticForms) -> float:
    """Second parameter -(a + lambda*b)/c from equation-2 forms."""
    if f2.c == 0.0:
        raise DegenerateForm("c-form vanished; definiteness assumption violated")
    return -(f2.a + lam * f2.b) / f2.c


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def step_v(
    p: TwoParamProblem, u, j: int, forms1: QuadraticForms | None = None
) -> tuple[float, np.ndarray]:
    """Fix u, return the j-th smallest eigenpair of the equation-2 pencil
    (a1*C2 - c1*A2) v = lambda (c1*B2 - b1*C2) v with a unit eigenvector."""
    f1 = forms1 if forms1 is not None else quadratic_forms(u, p.A1, p.B1, p.C1)
    lhs = f1.a * p.C2 - f1.c * p.A2
    rhs = f1.c * p.B2 - f1.b * p.C2
    lam, vec = sym_definite_gep_kth(lhs, rhs, j)
    return lam, _unit(vec)


def step_u(
    p: TwoParamProblem, v, i: int, forms2: QuadraticForms | None = None
) -> tuple[float, np.ndarray]:
    """Fix v, return the i-th smallest eigenpair of the equation-1 pencil
    (c2*A1 - a2*C1) u = lambda (b2*C1 - c2*B1) u with a unit eigenvector."""
    f2 = forms2 if forms2 is not None else quadratic_forms(v, p.A2, p.B2, p.C2)
    lhs = f2.c * p.A1 - f2.a * p.C1
    rhs = f2.b * p.C1 - f2.c * p.B1
    lam, vec = sym_definite_gep_kth(lhs, rhs, i)
    return lam, _unit(vec)


@dataclass
class SolveOptions:
    """Stopping rule, seeding, and restart policy for solve_index."""

    max_sweeps: int = 25
    tol_lambda: float = 1e-12
    tol_residual: float = 1e-10
    seed: int = 0
    init: str = "random_sphere"
    restarts: int = 5
    u0: np.ndarray | None = None

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.tol_lambda <= 0 or self.tol_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.init not in ("random_sphere", "ones", "given_vector"):
            raise ValueError(f"unknown init strategy {self.init!r}")
        if self.init == "given_vector" and self.u0 is None:
            raise ValueError("init='given_vector' requires u0")


@dataclass(frozen=True)
class TraceEntry:
    """State after one half step (one sub-eigenproblem solve)."""

    half_step: int
    lam: float
    index_error: float


@dataclass
class Solution:
    """Converged (or best-effort) eigenpair for one target index."""

    lam: float
    mu: float
    u: np.ndarray
    v: np.ndarray
    index: tuple[int, int]
    sweeps_used: int
    trace: list[TraceEntry] = field(default_factory=list)
    converged: bool = False

    @property
    def half_steps(self) -> int:
        return len(self.trace)

    @property
    def final_error(self) -> float:
        return self.trace[-1].index_error if self.trace else np.inf


def _kth_smallest_eigenvalue(mat: np.ndarray, k: int) -> float:
    vals = sla.eigh(
        mat, eigvals_only=True, subset_by_index=[k - 1, k - 1], check_finite=False
    )
    return float(vals[0])


def pencil_eigenvalues(
    p: TwoParamProblem, lam: float, mu: float, idx: tuple[int, int]
) -> tuple[float, float]:
    """(i-th smallest eigenvalue of pencil 1, j-th of pencil 2) at (lam, mu)."""
    i, j = idx
    e1 = _kth_smallest_eigenvalue(p.A1 + lam * p.B1 + mu * p.C1, i)
    e2 = _kth_smallest_eigenvalue(p.A2 + lam * p.B2 + mu * p.C2, j)
    return e1, e2


def _initial_u(p: TwoParamProblem, idx: tuple[int, int], opts: SolveOptions, attempt: int) -> np.ndarray:
    if opts.init == "ones" and attempt == 0:
        return _unit(np.ones(p.n))
    if opts.init == "given_vector" and attempt == 0:
        vec = np.asarray(opts.u0, dtype=float)
        if vec.shape != (p.n,) or not np.isfinite(vec).all() or not vec.any():
            raise InvalidVector("u0 must be a finite nonzero vector of length n")
        return _unit(vec)
    # Per-index (and per-restart) seed stream so whole-grid sweeps stay
    # deterministic no matter how indices are scheduled across workers.
    seq = np.random.SeedSequence(opts.seed, spawn_key=(idx[0], idx[1], attempt))
    rng = np.random.default_rng(seq)
    vec = rng.standard_normal(p.n)
    while not vec.any():
        vec = rng.standard_normal(p.n)
    return _unit(vec)


def _pencil_scales(p: TwoParamProblem) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    fro = np.linalg.norm
    return (
        (fro(p.A1), fro(p.B1), fro(p.C1)),
        (fro(p.A2), fro(p.B2), fro(p.C2)),
    )


def residual_scale(p: TwoParamProblem, lam: float, mu: float) -> float:
    """Combined pencil norm used to make residual tolerances scale-free."""
    (a1, b1, c1), (a2, b2, c2) = _pencil_scales(p)
    s1 = a1 + abs(lam) * b1 + abs(mu) * c1
    s2 = a2 + abs(lam) * b2 + abs(mu) * c2
    return max(1.0, s1, s2)


# The iteration floor for lambda moves is set by eigensolver backward error,
# which scales with the pencil norms rather than with |lambda| itself.
_JITTER_GUARD = 1024.0 * np.finfo(float).eps


def _run_attempt(
    p: TwoParamProblem,
    idx: tuple[int, int],
    opts: SolveOptions,
    u0: np.ndarray,
    scales,
) -> Solution:
    i, j = idx
    u = u0
    v = None
    trace: list[TraceEntry] = []
    lam_prev = None
    lam = np.nan
    mu = np.nan
    converged = False
    sweeps = 0
    (na1, nb1, nc1), (na2, nb2, nc2) = scales

    def scale(lam_val: float, mu_val: float) -> float:
        s1 = na1 + abs(lam_val) * nb1 + abs(mu_val) * nc1
        s2 = na2 + abs(lam_val) * nb2 + abs(mu_val) * nc2
        return max(1.0, s1, s2)

    best_err = np.inf
    since_improvement = 0

    def stagnated(lam_val: float, mu_val: float, err_val: float) -> bool:
        s = scale(lam_val, mu_val)
        if err_val > opts.tol_residual * s:
            return False
        # Never stop on an iterate far above the best seen: with one
        # ill-conditioned pencil side the two half-step phases settle at very
        # different error floors and lambda alone cannot tell them apart.
        # Anything within a modest factor of machine level is unimprovable.
        if err_val > max(64.0 * best_err, 32.0 * np.finfo(float).eps * s):
            return False
        lam_tol = opts.tol_lambda * max(1.0, abs(lam_val)) + _JITTER_GUARD * s
        if abs(lam_val - lam_prev) <= lam_tol:
            return True
        # Conditioning floor: within tolerance but lambda still jitters above
        # the guard, and a full sweep brought no improvement.
        return since_improvement >= 2

    def track(err_val: float) -> None:
        nonlocal best_err, since_improvement
        if err_val < 0.5 * best_err:
            best_err = err_val
            since_improvement = 0
        else:
            best_err = min(best_err, err_val)
            since_improvement += 1

    for sweeps in range(1, opts.max_sweeps + 1):
        forms1 = quadratic_forms(u, p.A1, p.B1, p.C1)
        lam, v = step_v(p, u, j, forms1=forms1)
        forms2 = quadratic_forms(v, p.A2, p.B2, p.C2)
        mu = mu_from(lam, forms2)
        e1, e2 = pencil_eigenvalues(p, lam, mu, idx)
        err = abs(e1) + abs(e2)
        trace.append(TraceEntry(len(trace) + 1, lam, err))
        # u is still the previous iterate here, so a full sweep must have
        # happened (lam_prev set) before the pair can be declared converged.
        if lam_prev is not None and stagnated(lam, mu, err):
            converged = True
            break
        track(err)
        lam_prev = lam

        lam, u = step_u(p, v, i, forms2=forms2)
        mu = mu_from(lam, forms2)
        e1, e2 = pencil_eigenvalues(p, lam, mu, idx)
        err = abs(e1) + abs(e2)
        trace.append(TraceEntry(len(trace) + 1, lam, err))
        if stagnated(lam, mu, err):
            converged = True
            break
        track(err)
        lam_prev = lam

    if v is None:  # max_sweeps >= 1 guarantees at least one step_v
        raise AssertionError("solver produced no iterate")
    return Solution(
        lam=float(lam),
        mu=float(mu),
        u=u,
        v=v,
        index=idx,
        sweeps_used=sweeps,
        trace=trace,
        converged=converged,
    )


def solve_index(
    p: TwoParamProblem, idx: tuple[int, int], opts: SolveOptions | None = None
) -> Solution:
    """Run the alternating iteration targeting index (i, j).

    Stops once lambda stagnates and the index error drops below the residual
    tolerance (relative to the pencil norms).  On non-convergence the
    iteration restarts from fresh seeded vectors up to opts.restarts times
    and the best iterate is returned with converged=False.
    """
    opts = opts if opts is not None else SolveOptions()
    i, j = idx
    if not (1 <= i <= p.n and 1 <= j <= p.m):
        raise IndexOutOfRange(f"index {idx} outside (1..{p.n}) x (1..{p.m})")
    scales = _pencil_scales(p)
    best: Solution | None = None
    for attempt in range(opts.restarts + 1):
        u0 = _initial_u(p, idx, opts, attempt)
        sol = _run_attempt(p, idx, opts, u0, scales)
        if sol.converged:
            return sol
        if best is None or sol.final_error < best.final_error:
            best = sol
    return best
