"""Whole-grid sweeps: solve every index of a problem, optionally in parallel.

Workers share the read-only problem via pool initializers and every index
draws from its own seed stream, so the emitted rows are identical whatever
the worker count or scheduling order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .alternating import SolveOptions, Solution, solve_index
from .exceptions import TwoParamError
from .problem import TwoParamProblem


@dataclass(frozen=True)
class SweepRow:
    """Per-index sweep outcome (error_at_probe only when a probe was set)."""

    i: int
    j: int
    lam: float
    mu: float
    error: float
    half_steps: int
    converged: bool
    error_at_probe: float | None = None


_WORKER_STATE: dict = {}


def _row_from_solution(sol: Solution, probe: int | None) -> SweepRow:
    err_probe = None
    if probe is not None and sol.trace:
        err_probe = sol.trace[min(probe, len(sol.trace)) - 1].index_error
    return SweepRow(
        i=sol.index[0],
        j=sol.index[1],
        lam=sol.lam,
        mu=sol.mu,
        error=sol.final_error,
        half_steps=sol.half_steps,
        converged=sol.converged,
        error_at_probe=err_probe,
    )


def _solve_one(
    problem: TwoParamProblem, idx: tuple[int, int], opts: SolveOptions, probe: int | None
) -> SweepRow:
    try:
        sol = solve_index(problem, idx, opts)
    except (TwoParamError, np.linalg.LinAlgError):
        nan = float("nan")
        return SweepRow(
            i=idx[0], j=idx[1], lam=nan, mu=nan, error=nan,
            half_steps=0, converged=False, error_at_probe=nan if probe else None,
        )
    return _row_from_solution(sol, probe)


def _worker_init(problem: TwoParamProblem, opts: SolveOptions, probe: int | None) -> None:
    try:
        from threadpoolctl import threadpool_limits

        _WORKER_STATE["blas_limit"] = threadpool_limits(limits=1)
    except ImportError:
        pass
    _WORKER_STATE["problem"] = problem
    _WORKER_STATE["opts"] = opts
    _WORKER_STATE["probe"] = probe


def _worker_chunk(indices: list[tuple[int, int]]) -> list[SweepRow]:
    problem = _WORKER_STATE["problem"]
    opts = _WORKER_STATE["opts"]
    probe = _WORKER_STATE["probe"]
    return [_solve_one(problem, idx, opts, probe) for idx in indices]


def solve_all_indices(
    problem: TwoParamProblem,
    opts: SolveOptions | None = None,
    workers: int = 1,
    indices: list[tuple[int, int]] | None = None,
    probe_half_step: int | None = None,
) -> list[SweepRow]:
    """Solve every (or the given) index, returning rows sorted by (i, j).

    Per-index failures become NaN rows instead of aborting the sweep.  With
    workers > 1 the indices are chunked across a process pool; results do
    not depend on the worker count.
    """
    opts = opts if opts is not None else SolveOptions()
    if indices is None:
        indices = [
            (i, j) for i in range(1, problem.n + 1) for j in range(1, problem.m + 1)
        ]
    if workers <= 1 or len(indices) <= 1:
        rows = [_solve_one(problem, idx, opts, probe_half_step) for idx in indices]
    else:
        chunk = max(1, math.ceil(len(indices) / (workers * 8)))
        chunks = [indices[k : k + chunk] for k in range(0, len(indices), chunk)]
        rows = []
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_worker_init,
            initargs=(problem, opts, probe_half_step),
        ) as pool:
            for part in pool.map(_worker_chunk, chunks):
                rows.extend(part)
    rows.sort(key=lambda r: (r.i, r.j))
    return rows
