"""Error measures and convergence diagnostics."""

import numpy as np
import pytest

from twoparam import (
    NotEnoughData,
    NotPositiveDefinite,
    SolveOptions,
    TwoParamProblem,
    build_operators,
    convergence_order,
    diagonal_variant,
    index_error,
    random_definite_problem,
    rayleigh,
    solve_index,
    tangent_slope,
)
from twoparam.alternating import QuadraticForms, residual_scale
from twoparam.exceptions import DegenerateForm


class TestIndexError:
    def test_exact_eigenvalue_is_zero(self, diag2_problem):
        res = index_error(diag2_problem, 1.0, -1.0, (1, 1))
        assert res.value == pytest.approx(0.0, abs=1e-13)

    def test_wrong_index_picks_next_eigenvalue(self, diag2_problem):
        # at (1, -1) the first pencil is diag(0, 1): its second smallest
        # eigenvalue is 1 while the second pencil still contributes 0
        res = index_error(diag2_problem, 1.0, -1.0, (2, 1))
        assert res.value == pytest.approx(1.0, abs=1e-13)
        assert res.e1 == pytest.approx(1.0, abs=1e-13)
        assert res.e2 == pytest.approx(0.0, abs=1e-13)

    def test_value_is_sum_of_absolutes(self):
        p = random_definite_problem(5, 5, seed=1)
        res = index_error(p, 0.3, -0.2, (2, 4))
        assert res.value == pytest.approx(abs(res.e1) + abs(res.e2), abs=1e-15)

    def test_converged_solution_within_tolerance(self):
        p = random_definite_problem(7, 7, seed=3)
        opts = SolveOptions(seed=3)
        sol = solve_index(p, (2, 6), opts)
        assert sol.converged
        res = index_error(p, sol.lam, sol.mu, (2, 6))
        assert res.value <= opts.tol_residual * residual_scale(p, sol.lam, sol.mu)

    def test_lipschitz_continuity(self):
        p = random_definite_problem(6, 6, seed=5)
        delta = 1e-6
        base = index_error(p, 0.4, -0.7, (3, 3)).value
        moved_l = index_error(p, 0.4 + delta, -0.7, (3, 3)).value
        moved_m = index_error(p, 0.4, -0.7 + delta, (3, 3)).value
        bound_l = delta * (np.linalg.norm(p.B1, 2) + np.linalg.norm(p.B2, 2))
        bound_m = delta * (np.linalg.norm(p.C1, 2) + np.linalg.norm(p.C2, 2))
        assert abs(moved_l - base) <= 1.01 * bound_l + 1e-12
        assert abs(moved_m - base) <= 1.01 * bound_m + 1e-12


class TestRayleigh:
    def test_scalar_fixture(self, scalar_problem):
        assert rayleigh(scalar_problem, [1.0], [1.0]) == pytest.approx(1.0, abs=1e-14)

    def test_scale_invariance(self):
        p = random_definite_problem(5, 4, seed=2)
        rng = np.random.default_rng(0)
        u, v = rng.standard_normal(5), rng.standard_normal(4)
        base = rayleigh(p, u, v)
        assert rayleigh(p, 3.0 * u, -0.5 * v) == pytest.approx(base, rel=1e-12)

    def test_matches_kronecker_quotient(self):
        p = random_definite_problem(4, 4, seed=6)
        ops = build_operators(p)
        rng = np.random.default_rng(1)
        for _ in range(5):
            u, v = rng.standard_normal(4), rng.standard_normal(4)
            x = np.outer(u, v).ravel()
            ref = (x @ ops.M1 @ x) / (x @ (-ops.M0) @ x)
            assert rayleigh(p, u, v) == pytest.approx(ref, rel=1e-12)

    def test_equals_lambda_at_convergence(self):
        p = random_definite_problem(6, 6, seed=7)
        sol = solve_index(p, (2, 5), SolveOptions(seed=7))
        assert sol.converged
        assert rayleigh(p, sol.u, sol.v) == pytest.approx(
            sol.lam, abs=1e-10 * max(1.0, abs(sol.lam))
        )

    def test_violated_assumptions_detected(self, scalar_problem):
        broken = TwoParamProblem(
            A1=scalar_problem.A1, B1=scalar_problem.B1, C1=[[1.0]],
            A2=scalar_problem.A2, B2=scalar_problem.B2, C2=[[-1.0]],
        )
        with pytest.raises(NotPositiveDefinite):
            rayleigh(broken, [1.0], [1.0])


class TestTangentSlope:
    def test_values(self):
        assert tangent_slope(QuadraticForms(0.0, -2.0, -1.0)) == pytest.approx(-2.0)
        assert tangent_slope(QuadraticForms(9.0, 0.0, 4.0)) == 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateForm):
            tangent_slope(QuadraticForms(1.0, 1.0, 0.0))

    def test_eigencurve_slopes_separated(self):
        # the difference of the two tangent slopes has one sign wherever the
        # coupling form is positive, i.e. for every nonzero pair (u, v)
        p = random_definite_problem(10, 10, seed=8)
        rng = np.random.default_rng(3)
        for _ in range(50):
            u, v = rng.standard_normal(10), rng.standard_normal(10)
            f1 = QuadraticForms(
                float(u @ p.A1 @ u), float(u @ p.B1 @ u), float(u @ p.C1 @ u)
            )
            f2 = QuadraticForms(
                float(v @ p.A2 @ v), float(v @ p.B2 @ v), float(v @ p.C2 @ v)
            )
            assert tangent_slope(f1) - tangent_slope(f2) < 0.0


class TestConvergenceOrder:
    def test_quadratic_synthetic(self):
        errors = [10.0 ** -(2.0**k) for k in range(1, 6)]
        assert convergence_order(errors) == pytest.approx(2.0, abs=1e-9)

    def test_linear_synthetic(self):
        errors = [10.0**-k for k in range(3, 12)]
        assert convergence_order(errors) == pytest.approx(1.0, abs=1e-9)

    def test_not_enough_points(self):
        with pytest.raises(NotEnoughData):
            convergence_order([1e-3, 1e-6, 1e-12])

    def test_floor_points_excluded(self):
        errors = [1e-3, 1e-5, 1e-9, 3e-16, 2e-16, 4e-16, 1e-16, 2e-16]
        with pytest.raises(NotEnoughData):
            convergence_order(errors, floor=1e-14)

    def test_solver_trace_superlinear(self):
        # quadratic ladders leave only 2-3 points below any small threshold
        # before hitting the roundoff floor, so the window includes the
        # initial iterate's error to reach the four-point minimum
        fitted = []
        for seed in range(8):
            p = diagonal_variant(8, 8, seed=seed)
            sol = solve_index(p, (3, 5), SolveOptions(seed=seed))
            floor = 1e3 * np.finfo(float).eps * residual_scale(p, sol.lam, sol.mu)
            try:
                fitted.append(
                    convergence_order(
                        [t.index_error for t in sol.trace],
                        threshold=10.0,
                        floor=floor,
                    )
                )
            except NotEnoughData:
                continue
        assert len(fitted) >= 4
        assert np.median(fitted) >= 1.5
