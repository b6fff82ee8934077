"""Dense Kronecker-operator baseline: assembly, spectrum, factors, indices."""

import numpy as np
import pytest

from twoparam import (
    TooLarge,
    TwoParamProblem,
    build_operators,
    index_of,
    index_range,
    oracle_solve_all,
    random_definite_problem,
    rank_one_factor,
)
from twoparam.exceptions import InvalidVector

from conftest import diag2_spectrum


class TestBuildOperators:
    def test_scalar_values(self, scalar_problem):
        ops = build_operators(scalar_problem)
        assert ops.M0[0, 0] == pytest.approx(-2.0)
        assert ops.M1[0, 0] == pytest.approx(2.0)
        assert ops.M2[0, 0] == pytest.approx(4.0)

    def test_diagonal_entrywise_products(self, diag2_problem):
        ops = build_operators(diag2_problem)
        p = diag2_problem
        for i in range(2):
            for j in range(2):
                k = 2 * i + j
                expected = p.B1[i, i] * p.C2[j, j] - p.C1[i, i] * p.B2[j, j]
                assert ops.M0[k, k] == pytest.approx(expected)
        assert np.count_nonzero(ops.M0 - np.diag(np.diagonal(ops.M0))) == 0

    def test_operators_symmetric(self):
        p = random_definite_problem(4, 3, seed=0)
        ops = build_operators(p)
        for mat in (ops.M0, ops.M1, ops.M2):
            np.testing.assert_allclose(mat, mat.T, atol=1e-12)

    def test_memory_cap(self):
        p = random_definite_problem(5, 5, seed=0)
        with pytest.raises(TooLarge):
            build_operators(p, cap=24)

    def test_cap_env_override(self, monkeypatch):
        p = random_definite_problem(5, 5, seed=0)
        monkeypatch.setenv("TWOPARAM_ORACLE_CAP", "24")
        with pytest.raises(TooLarge):
            build_operators(p)


class TestRankOneFactor:
    def test_exact_basis_outer(self):
        x = np.outer([1.0, 0.0, 0.0], [0.0, 1.0])
        u, v, res = rank_one_factor(x)
        np.testing.assert_allclose(u, [1.0, 0.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(v, [0.0, 1.0], atol=1e-14)
        assert res <= 1e-14

    def test_recovers_random_rank_one(self):
        rng = np.random.default_rng(1)
        u_true = rng.standard_normal(6)
        u_true /= np.linalg.norm(u_true)
        v_true = rng.standard_normal(4)
        v_true /= np.linalg.norm(v_true)
        u, v, res = rank_one_factor(np.outer(u_true, v_true))
        assert res <= 1e-12
        assert abs(abs(u @ u_true) - 1.0) <= 1e-12
        assert abs(abs(v @ v_true / np.linalg.norm(v)) - 1.0) <= 1e-12

    def test_identity_residual(self):
        # the best rank-one part of I/sqrt(2) keeps one singular value, so
        # the relative residual is exactly 1/sqrt(2)
        _, _, res = rank_one_factor(np.eye(2) / np.sqrt(2.0))
        assert res == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(InvalidVector):
            rank_one_factor(np.zeros((2, 2)))


class TestIndexOf:
    def test_diag2_exact_points(self, diag2_problem):
        idx, defect = index_of(diag2_problem, 1.0, -1.0)
        assert idx == (1, 1) and defect == pytest.approx(0.0, abs=1e-12)
        idx, defect = index_of(diag2_problem, 4.0, -5.0)
        assert idx == (2, 2) and defect == pytest.approx(0.0, abs=1e-12)

    def test_perturbed_point_has_defect(self, diag2_problem):
        _, defect = index_of(diag2_problem, 1.0 + 1e-3, -1.0)
        assert defect > 1e-4

    def test_range_collapses_for_simple_eigenvalues(self, diag2_problem):
        (i_lo, i_hi), (j_lo, j_hi), defect = index_range(diag2_problem, 1.0, -1.0)
        assert (i_lo, i_hi) == (1, 1) and (j_lo, j_hi) == (1, 1)
        assert defect == pytest.approx(0.0, abs=1e-12)

    def test_range_widens_at_multiple_eigenvalue(self):
        # equation 2 vanishes identically at mu = -1, so zero has full
        # multiplicity there and every j is admissible
        p = TwoParamProblem(
            A1=np.diag([1.0, 2.0]), B1=-2.0 * np.eye(2), C1=-np.eye(2),
            A2=np.eye(2), B2=np.zeros((2, 2)), C2=np.eye(2),
        )
        _, (j_lo, j_hi), _ = index_range(p, 1.0, -1.0)
        assert (j_lo, j_hi) == (1, 2)


class TestOracleSolveAll:
    def test_scalar_spectrum(self, scalar_problem):
        spec = oracle_solve_all(scalar_problem)
        assert len(spec) == 1
        rec = spec.records[0]
        assert rec.lam == pytest.approx(1.0, abs=1e-12)
        assert rec.mu == pytest.approx(2.0, abs=1e-12)
        assert rec.index == (1, 1)
        assert rec.rank_one_residual <= 1e-14

    def test_diag2_spectrum_with_indices(self, diag2_problem):
        expected = diag2_spectrum(diag2_problem)
        spec = oracle_solve_all(diag2_problem)
        assert len(spec) == 4
        by_index = spec.by_index()
        assert set(by_index) == set(expected)
        for idx, (lam, mu) in expected.items():
            rec = by_index[idx]
            assert rec.lam == pytest.approx(lam, abs=1e-11)
            assert rec.mu == pytest.approx(mu, abs=1e-11)
            assert np.abs(rec.u)[idx[0] - 1] == pytest.approx(1.0, abs=1e-10)
            assert np.abs(rec.v)[idx[1] - 1] == pytest.approx(1.0, abs=1e-10)
            assert rec.rank_one_residual <= 1e-10

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_index_bijection(self, seed):
        p = random_definite_problem(5, 5, seed=seed)
        spec = oracle_solve_all(p)
        indices = {rec.index for rec in spec}
        assert indices == {(i, j) for i in range(1, 6) for j in range(1, 6)}

    def test_residuals_of_recovered_factors(self):
        p = random_definite_problem(6, 5, seed=7)
        for rec in oracle_solve_all(p):
            r1 = np.linalg.norm((p.A1 + rec.lam * p.B1 + rec.mu * p.C1) @ rec.u)
            r2 = np.linalg.norm((p.A2 + rec.lam * p.B2 + rec.mu * p.C2) @ rec.v)
            assert r1 <= 1e-8
            assert r2 <= 1e-8

    def test_mu_routes_agree(self):
        p = random_definite_problem(5, 4, seed=11)
        ops = build_operators(p)
        for rec in oracle_solve_all(p):
            x = rec.X.ravel()
            mu_kron = -(x @ ops.M2 @ x) / (x @ ops.M0 @ x)
            f2a = rec.v @ p.A2 @ rec.v
            f2b = rec.v @ p.B2 @ rec.v
            f2c = rec.v @ p.C2 @ rec.v
            mu_forms = -(f2a + rec.lam * f2b) / f2c
            assert mu_kron == pytest.approx(rec.mu, abs=1e-8)
            assert mu_forms == pytest.approx(rec.mu, abs=1e-8)

    def test_orthogonal_similarity_invariance(self):
        p = random_definite_problem(5, 5, seed=13)
        q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))
        rotated = TwoParamProblem(
            A1=q @ p.A1 @ q.T, B1=q @ p.B1 @ q.T, C1=q @ p.C1 @ q.T,
            A2=p.A2, B2=p.B2, C2=p.C2,
        )
        ref = sorted((rec.lam, rec.mu) for rec in oracle_solve_all(p))
        rot = sorted((rec.lam, rec.mu) for rec in oracle_solve_all(rotated))
        for (la, ma), (lb, mb) in zip(ref, rot):
            scale = max(1.0, abs(la), abs(ma))
            assert abs(la - lb) <= 1e-9 * scale
            assert abs(ma - mb) <= 1e-9 * scale

    def test_degenerate_eigenvalue_cluster(self):
        # equation 2 collapses at mu = -1 (A2 + mu*C2 = 0), so (1, -1) is a
        # genuinely multiple eigenvalue; records stay valid eigenpairs even
        # though the index map cannot be a bijection here
        p = TwoParamProblem(
            A1=np.diag([1.0, 2.0]), B1=-2.0 * np.eye(2), C1=-np.eye(2),
            A2=np.eye(2), B2=np.zeros((2, 2)), C2=np.eye(2),
        )
        spec = oracle_solve_all(p)
        assert len(spec) == 4
        doubled = [rec for rec in spec if abs(rec.mu + 1.0) < 1e-9]
        assert len(doubled) >= 2
        for rec in spec:
            r1 = np.linalg.norm((p.A1 + rec.lam * p.B1 + rec.mu * p.C1) @ rec.u)
            r2 = np.linalg.norm((p.A2 + rec.lam * p.B2 + rec.mu * p.C2) @ rec.v)
            assert r1 <= 1e-9 and r2 <= 1e-9
