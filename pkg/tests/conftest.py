import numpy as np
import pytest

from twoparam import TwoParamProblem


@pytest.fixture(scope="session")
def scalar_problem():
    """1x1 problem with the unique eigenpair (lambda, mu) = (1, 2)."""
    return TwoParamProblem(
        A1=[[5.0]], B1=[[-3.0]], C1=[[-1.0]],
        A2=[[-3.0]], B2=[[1.0]], C2=[[1.0]],
        label="scalar",
    )


@pytest.fixture(scope="session")
def diag2_problem():
    """Fully decoupled 2x2 problem with a closed-form spectrum."""
    return TwoParamProblem(
        A1=np.diag([1.0, 2.0]), B1=np.diag([-2.0, -3.0]), C1=np.diag([-1.0, -2.0]),
        A2=np.diag([0.0, 1.0]), B2=np.eye(2), C2=np.eye(2),
        label="diag2",
    )


def diag2_spectrum(p):
    """Independent oracle for decoupled diagonal problems.

    For every index pair, (lambda, mu) solves the 2x2 linear system built
    from the matching diagonal entries; the index labels are then read off
    by counting negative pencil eigenvalues directly.
    """
    out = {}
    for i in range(p.n):
        for j in range(p.m):
            coeffs = np.array(
                [[p.B1[i, i], p.C1[i, i]], [p.B2[j, j], p.C2[j, j]]]
            )
            rhs = -np.array([p.A1[i, i], p.A2[j, j]])
            lam, mu = np.linalg.solve(coeffs, rhs)
            w1 = np.diagonal(p.A1 + lam * p.B1 + mu * p.C1)
            w2 = np.diagonal(p.A2 + lam * p.B2 + mu * p.C2)
            idx = (1 + int((w1 < -1e-10).sum()), 1 + int((w2 < -1e-10).sum()))
            out[idx] = (float(lam), float(mu))
    return out
