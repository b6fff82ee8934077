"""Test-problem constructors: the random definite ensemble and separable
Helmholtz discretizations.

The Helmholtz class covers domains parametrized by a conformal map whose
metric splits as g(x, y) = g1(x) + g2(y) > 0.  Separation of variables
yields v'' + lambda g1 v + mu v = 0 and w'' + lambda g2 w - mu w = 0, which
after central differencing and sign normalization is a two-parameter
problem satisfying the solver's definiteness assumptions exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidMetric
from .problem import RecoveryMap, TwoParamProblem


@dataclass(frozen=True)
class SeparableMetric:
    """Sampled separable conformal factor on interior grid nodes."""

    g1: np.ndarray
    g2: np.ndarray
    domain: tuple[tuple[float, float], tuple[float, float]]
    map_label: str = ""

    def __post_init__(self):
        for name, samples, (lo, hi) in (
            ("g1", np.asarray(self.g1, dtype=float), self.domain[0]),
            ("g2", np.asarray(self.g2, dtype=float), self.domain[1]),
        ):
            object.__setattr__(self, name, samples)
            if samples.ndim != 1 or samples.size == 0:
                raise InvalidMetric(f"{name}: expected a nonempty 1-d sample array")
            if not np.isfinite(samples).all() or (samples <= 0.0).any():
                bad = int(np.argmin(samples))
                h = (hi - lo) / (samples.size + 1)
                raise InvalidMetric(
                    f"{name}: sample {samples[bad]:.6g} at node "
                    f"{lo + (bad + 1) * h:.6g} is not strictly positive"
                )

    @property
    def n(self) -> int:
        return self.g1.size

    @property
    def m(self) -> int:
        return self.g2.size


@dataclass(frozen=True)
class Discretization:
    """Interior Dirichlet grid: n x m nodes with mesh widths h1, h2."""

    n: int
    m: int
    h1: float
    h2: float
    boundary: str = "dirichlet"

    @classmethod
    def from_metric(cls, metric: SeparableMetric) -> "Discretization":
        (a, b), (c, d) = metric.domain
        return cls(
            n=metric.n,
            m=metric.m,
            h1=(b - a) / (metric.n + 1),
            h2=(d - c) / (metric.m + 1),
        )


def interior_nodes(lo: float, hi: float, count: int) -> np.ndarray:
    """Equispaced interior nodes of (lo, hi) with Dirichlet endpoints removed."""
    h = (hi - lo) / (count + 1)
    return lo + h * np.arange(1, count + 1)


def second_difference(count: int, h: float) -> np.ndarray:
    """Dirichlet 3-point second-derivative matrix tridiag(1, -2, 1)/h^2."""
    mat = np.zeros((count, count))
    np.fill_diagonal(mat, -2.0)
    idx = np.arange(count - 1)
    mat[idx, idx + 1] = 1.0
    mat[idx + 1, idx] = 1.0
    return mat / (h * h)


def dirichlet_laplacian_eigenvalue(k: int, count: int, h: float) -> float:
    """Closed-form k-th eigenvalue of -second_difference(count, h)."""
    return (4.0 / (h * h)) * math.sin(k * math.pi / (2.0 * (count + 1))) ** 2


def random_definite_problem(n: int, m: int, seed: int) -> TwoParamProblem:
    """Random ensemble member satisfying the definiteness assumptions.

    A1, A2 are symmetrized standard Gaussians; B and C come from Gaussian
    congruence factors with diagonal weights drawn uniformly from
    (-0.5, 0.5) for equation 1 and (-1.5, -0.5) for equation 2, which keeps
    all rank-one coupling forms strictly positive by construction.
    """
    rng = np.random.default_rng(seed)
    a1 = rng.standard_normal((n, n))
    a2 = rng.standard_normal((m, m))
    s1 = rng.standard_normal((n, n))
    b1 = rng.uniform(-0.5, 0.5, size=n)
    s2 = rng.standard_normal((m, m))
    b2 = rng.uniform(-1.5, -0.5, size=m)
    return TwoParamProblem(
        A1=0.5 * (a1 + a1.T),
        B1=s1 @ np.diag(b1) @ s1.T,
        C1=-(s1 @ s1.T),
        A2=0.5 * (a2 + a2.T),
        B2=s2 @ np.diag(b2) @ s2.T,
        C2=s2 @ s2.T,
        label=f"random-definite n={n} m={m} seed={seed}",
    )


def diagonal_variant(n: int, m: int, seed: int) -> TwoParamProblem:
    """Ensemble variant with identity congruence factors, so B and C are
    diagonal (C1 = -I, C2 = I) while A1, A2 stay dense."""
    rng = np.random.default_rng(seed)
    a1 = rng.standard_normal((n, n))
    a2 = rng.standard_normal((m, m))
    b1 = rng.uniform(-0.5, 0.5, size=n)
    b2 = rng.uniform(-1.5, -0.5, size=m)
    return TwoParamProblem(
        A1=0.5 * (a1 + a1.T),
        B1=np.diag(b1),
        C1=-np.eye(n),
        A2=0.5 * (a2 + a2.T),
        B2=np.diag(b2),
        C2=np.eye(m),
        label=f"diagonal-definite n={n} m={m} seed={seed}",
    )


def separable_helmholtz(
    metric: SeparableMetric, disc: Discretization | None = None
) -> tuple[TwoParamProblem, RecoveryMap]:
    """Discretize the separated Helmholtz pair on the metric's grid.

    The raw triples are (Lx, diag(g1), I) and (Ly, diag(g2), -I); the
    emitted problem swaps the equations and negates lambda so C1 = -I,
    C2 = I and the coupling operator kron(I, diag(g1)) + kron(diag(g2), I)
    is positive definite.  Original eigenvalues are (-lt, mt).
    """
    if disc is None:
        disc = Discretization.from_metric(metric)
    if disc.n != metric.n or disc.m != metric.m:
        raise InvalidMetric(
            f"grid ({disc.n}, {disc.m}) does not match metric samples "
            f"({metric.n}, {metric.m})"
        )
    lx = second_difference(disc.n, disc.h1)
    ly = second_difference(disc.m, disc.h2)
    problem = TwoParamProblem(
        A1=ly,
        B1=-np.diag(metric.g2),
        C1=-np.eye(disc.m),
        A2=lx,
        B2=-np.diag(metric.g1),
        C2=np.eye(disc.n),
        label=f"helmholtz {metric.map_label} grid={disc.n}x{disc.m}",
    )
    rmap = RecoveryMap(b1=-1.0, c1=0.0, b2=0.0, c2=1.0, lambda_sign=-1, swap=True)
    return problem, rmap


def builtin_metric(name: str, n: int, m: int, **params) -> SeparableMetric:
    """Sample one of the built-in separable metrics on an n x m interior grid.

    half_ellipse(c, R):       g1 = c^2 sinh^2(r) on (0, R), g2 = c^2 sin^2(phi) on (0, pi)
    squared_map(a, b, c, d):  g1 = 4x^2,  g2 = 4y^2   (domains must exclude 0)
    exp_map(a, b, kappa):     g1 = e^(2x) - kappa, g2 = kappa, 0 < kappa < e^(2a)
    cosh_map(a, b):           g1 = sinh^2(x), g2 = sin^2(y) on (0, pi)
    rectangle(a, b, c, d):    g1 = g2 = 1/2 (identity map)
    """
    if name == "half_ellipse":
        c = float(params.pop("c", 1.0))
        big_r = float(params.pop("R", 1.0))
        _reject_extra(name, params)
        domain = ((0.0, big_r), (0.0, math.pi))
        r = interior_nodes(0.0, big_r, n)
        phi = interior_nodes(0.0, math.pi, m)
        g1 = (c * np.sinh(r)) ** 2
        g2 = (c * np.sin(phi)) ** 2
        label = f"half_ellipse(c={c:g},R={big_r:g})"
    elif name == "squared_map":
        a, b = float(params.pop("a", 1.0)), float(params.pop("b", 2.0))
        c, d = float(params.pop("c", 1.0)), float(params.pop("d", 2.0))
        _reject_extra(name, params)
        domain = ((a, b), (c, d))
        g1 = 4.0 * interior_nodes(a, b, n) ** 2
        g2 = 4.0 * interior_nodes(c, d, m) ** 2
        label = f"squared_map(a={a:g},b={b:g},c={c:g},d={d:g})"
    elif name == "exp_map":
        a, b = float(params.pop("a", 0.0)), float(params.pop("b", 1.0))
        c, d = float(params.pop("c", 0.0)), float(params.pop("d", math.pi))
        kappa = float(params.pop("kappa", math.exp(2.0 * a) / 2.0))
        _reject_extra(name, params)
        domain = ((a, b), (c, d))
        g1 = np.exp(2.0 * interior_nodes(a, b, n)) - kappa
        g2 = np.full(m, kappa)
        label = f"exp_map(a={a:g},b={b:g},kappa={kappa:g})"
    elif name == "cosh_map":
        a, b = float(params.pop("a", 0.0)), float(params.pop("b", 1.0))
        _reject_extra(name, params)
        domain = ((a, b), (0.0, math.pi))
        g1 = np.sinh(interior_nodes(a, b, n)) ** 2
        g2 = np.sin(interior_nodes(0.0, math.pi, m)) ** 2
        label = f"cosh_map(a={a:g},b={b:g})"
    elif name == "rectangle":
        a, b = float(params.pop("a", 0.0)), float(params.pop("b", 1.0))
        c, d = float(params.pop("c", 0.0)), float(params.pop("d", 1.0))
        _reject_extra(name, params)
        domain = ((a, b), (c, d))
        g1 = np.full(n, 0.5)
        g2 = np.full(m, 0.5)
        label = f"rectangle(a={a:g},b={b:g},c={c:g},d={d:g})"
    else:
        raise InvalidMetric(f"unknown builtin metric {name!r}")
    return SeparableMetric(g1=g1, g2=g2, domain=domain, map_label=label)


def _reject_extra(name: str, params: dict) -> None:
    if params:
        raise InvalidMetric(f"{name}: unknown parameters {sorted(params)}")
