"""Error measures and convergence diagnostics.

The central quantity is the index error at a candidate (lambda, mu): the
i-th smallest eigenvalue of the first pencil plus the j-th smallest of the
second, in absolute value.  It vanishes exactly at the eigenvalue of index
(i, j) and doubles as the residual norm sum for normalized eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alternating import QuadraticForms, pencil_eigenvalues, quadratic_forms
from .exceptions import DegenerateForm, NotEnoughData, NotPositiveDefinite
from .problem import TwoParamProblem


@dataclass(frozen=True)
class IndexErrorResult:
    """Index error |e1| + |e2| with its two signed parts."""

    value: float
    e1: float
    e2: float


def index_error(
    p: TwoParamProblem, lam: float, mu: float, idx: tuple[int, int]
) -> IndexErrorResult:
    """Evaluate the index error at (lam, mu) for target index (i, j).

    Costs one partial symmetric eigensolve per pencil (O(n^3) dense).
    """
    e1, e2 = pencil_eigenvalues(p, lam, mu, idx)
    return IndexErrorResult(value=abs(e1) + abs(e2), e1=e1, e2=e2)


def rayleigh(p: TwoParamProblem, u, v) -> float:
    """Rayleigh quotient of the coupled pencil at the rank-one pair (u, v).

    Evaluated on quadratic forms as -(c2*a1 - a2*c1)/(c2*b1 - b2*c1), which
    equals <X, M1 X>/<X, -M0 X> for X = u v^T without forming Kronecker
    operators.
    """
    f1 = quadratic_forms(u, p.A1, p.B1, p.C1)
    f2 = quadratic_forms(v, p.A2, p.B2, p.C2)
    denom = f2.c * f1.b - f2.b * f1.c
    if denom >= 0.0:
        raise NotPositiveDefinite(
            "rank-one coupling form is not positive; definiteness assumption violated"
        )
    return -(f2.c * f1.a - f2.a * f1.c) / denom


def tangent_slope(forms: QuadraticForms) -> float:
    """Eigencurve tangent slope d(mu)/d(lambda) = -b/c at the iterate."""
    if forms.c == 0.0:
        raise DegenerateForm("c-form vanished; tangent slope undefined")
    return -forms.b / forms.c


def convergence_order(errors, threshold: float = 1e-2, floor: float = 0.0) -> float:
    """Fitted local convergence exponent from an error sequence.

    Least-squares slope of log10(e_{k+1}) against log10(e_k) over the
    longest consecutive run of errors within (floor, threshold].  Pass a
    positive floor (for solver traces, a small multiple of eps times the
    pencil norms) to keep machine-precision saturation out of the fit.
    Raises NotEnoughData below four qualifying points.
    """
    seq = np.asarray(list(errors), dtype=float)
    qualifying = (seq <= threshold) & (seq > floor) & np.isfinite(seq)
    best_run: list[int] = []
    run: list[int] = []
    for k, ok in enumerate(qualifying):
        if ok:
            run.append(k)
            if len(run) > len(best_run):
                best_run = list(run)
        else:
            run = []
    if len(best_run) < 4:
        raise NotEnoughData(
            f"{len(best_run)} qualifying trace points below {threshold:g}; need 4"
        )
    logs = np.log10(seq[best_run])
    x, y = logs[:-1], logs[1:]
    slope = float(np.polyfit(x, y, 1)[0])
    return slope
