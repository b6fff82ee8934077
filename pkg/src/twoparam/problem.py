"""Problem container, definiteness checks, and affine sign normalization.

A two-parameter problem couples the pencils (A1 + lambda*B1 + mu*C1) u = 0
and (A2 + lambda*B2 + mu*C2) v = 0.  The solver requires C1 negative
definite, C2 positive definite, and the coupling operator
Delta0 = kron(C1, B2) - kron(B1, C2) positive definite.  make_definite
turns any right-definite problem (Delta0 definite of either sign) into that
form through equation swaps, parameter sign flips, and two pencil shifts,
and returns the 2x2 map that translates eigenvalues back.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidMatrix, NotRightDefinite
from .linalg import as_symmetric, sym_definite_gep_kth, sym_eig

DEFAULT_EXHAUSTIVE_THRESHOLD = 4096
PROBLEM_SCHEMA = "twoparam-problem/1"

_MATRIX_KEYS = ("A1", "B1", "C1", "A2", "B2", "C2")


@dataclass(frozen=True)
class TwoParamProblem:
    """Six symmetric matrices defining a two-parameter eigenvalue problem.

    Matrices are symmetrized by averaging at construction and frozen
    read-only, so instances can be shared across worker processes.
    """

    A1: np.ndarray
    B1: np.ndarray
    C1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    C2: np.ndarray
    label: str = ""

    def __post_init__(self):
        for key in _MATRIX_KEYS:
            mat = as_symmetric(getattr(self, key), name=key)
            mat.flags.writeable = False
            object.__setattr__(self, key, mat)
        if not (self.A1.shape == self.B1.shape == self.C1.shape):
            raise InvalidMatrix("equation-1 matrices have inconsistent orders")
        if not (self.A2.shape == self.B2.shape == self.C2.shape):
            raise InvalidMatrix("equation-2 matrices have inconsistent orders")

    @property
    def n(self) -> int:
        return self.A1.shape[0]

    @property
    def m(self) -> int:
        return self.A2.shape[0]

    def matrices(self) -> dict[str, np.ndarray]:
        return {key: getattr(self, key) for key in _MATRIX_KEYS}


@dataclass(frozen=True)
class RecoveryMap:
    """Affine bookkeeping mapping transformed eigenvalues to original ones.

    recover_eigenvalue applies lambda = b1*lt + c1*mt, mu = b2*lt + c2*mt;
    the sign flips and the equation swap applied during normalization are
    already folded into the coefficients, lambda_sign and swap only record
    which discrete moves happened.
    """

    b1: float = 1.0
    c1: float = 0.0
    b2: float = 0.0
    c2: float = 1.0
    lambda_sign: int = 1
    swap: bool = False

    def __post_init__(self):
        det = self.b1 * self.c2 - self.c1 * self.b2
        scale = max(abs(self.b1), abs(self.c1), abs(self.b2), abs(self.c2), 1.0)
        if abs(det) <= 1e-12 * scale:
            raise InvalidMatrix("recovery map is numerically singular")

    @classmethod
    def identity(cls) -> "RecoveryMap":
        return cls()

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.b1, self.c1], [self.b2, self.c2]])

    def to_dict(self) -> dict:
        return {
            "b1": self.b1,
            "c1": self.c1,
            "b2": self.b2,
            "c2": self.c2,
            "lambda_sign": self.lambda_sign,
            "swap": self.swap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecoveryMap":
        return cls(
            b1=float(data["b1"]),
            c1=float(data["c1"]),
            b2=float(data["b2"]),
            c2=float(data["c2"]),
            lambda_sign=int(data.get("lambda_sign", 1)),
            swap=bool(data.get("swap", False)),
        )


def recover_eigenvalue(rmap: RecoveryMap, lm: tuple[float, float]) -> tuple[float, float]:
    """Map a transformed eigenvalue pair back to original coordinates."""
    lt, mt = lm
    return (rmap.b1 * lt + rmap.c1 * mt, rmap.b2 * lt + rmap.c2 * mt)


@dataclass(frozen=True)
class AssumptionReport:
    """Definiteness margins for the solver's standing assumptions."""

    symmetric_ok: dict[str, bool]
    c1_negdef: bool
    c1_min: float
    c1_max: float
    c2_posdef: bool
    c2_min: float
    delta0_posdef: bool
    delta0_min: float
    checked_exhaustively: bool

    @property
    def passed(self) -> bool:
        return (
            all(self.symmetric_ok.values())
            and self.c1_negdef
            and self.c2_posdef
            and self.delta0_posdef
        )

    def to_dict(self) -> dict:
        return {
            "symmetric_ok": dict(self.symmetric_ok),
            "c1_negdef": self.c1_negdef,
            "c1_min": self.c1_min,
            "c1_max": self.c1_max,
            "c2_posdef": self.c2_posdef,
            "c2_min": self.c2_min,
            "delta0_posdef": self.delta0_posdef,
            "delta0_min": self.delta0_min,
            "checked_exhaustively": self.checked_exhaustively,
            "passed": self.passed,
        }


def _delta0_dense(p: TwoParamProblem) -> np.ndarray:
    return np.kron(p.C1, p.B2) - np.kron(p.B1, p.C2)


def _rank_one_min(
    c1: np.ndarray,
    b2: np.ndarray,
    b1: np.ndarray,
    c2: np.ndarray,
    seed: int = 0,
    restarts: int = 8,
    rounds: int = 15,
) -> float:
    """Approximate min of (u ox v)^T (kron(C1,B2) - kron(B1,C2)) (u ox v)
    over unit u, v by alternating smallest-eigenvector updates.

    The value is an upper bound on the true smallest eigenvalue, so a
    negative result certifies indefiniteness while a positive one does not.
    """
    rng = np.random.default_rng(seed)
    n, m = c1.shape[0], b2.shape[0]
    best = np.inf
    for _ in range(restarts):
        v = rng.standard_normal(m)
        v /= np.linalg.norm(v)
        value = np.inf
        for _ in range(rounds):
            bv = float(v @ b2 @ v)
            cv = float(v @ c2 @ v)
            dec = sym_eig(bv * c1 - cv * b1)
            u = dec.vectors[:, 0]
            bu = float(u @ b1 @ u)
            cu = float(u @ c1 @ u)
            dec = sym_eig(cu * b2 - bu * c2)
            v = dec.vectors[:, 0]
            new_value = float(dec.values[0])
            if abs(new_value - value) <= 1e-13 * max(1.0, abs(new_value)):
                value = new_value
                break
            value = new_value
        best = min(best, value)
    return best


def check_assumptions(
    p: TwoParamProblem,
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
) -> AssumptionReport:
    """Report symmetry and the three definiteness margins.

    The coupling operator is assembled densely only when n*m stays at or
    below exhaustive_threshold; otherwise its rank-one quadratic form is
    minimized by a short alternating scheme and the report is flagged
    non-exhaustive.
    """
    symmetric_ok = {
        key: bool(np.array_equal(mat, mat.T)) for key, mat in p.matrices().items()
    }
    c1_vals = sym_eig(p.C1).values
    c2_vals = sym_eig(p.C2).values
    exhaustive = p.n * p.m <= exhaustive_threshold
    if exhaustive:
        delta0_min = float(np.linalg.eigvalsh(_delta0_dense(p)).min())
    else:
        delta0_min = _rank_one_min(p.C1, p.B2, p.B1, p.C2)
    return AssumptionReport(
        symmetric_ok=symmetric_ok,
        c1_negdef=bool(c1_vals[-1] < 0.0),
        c1_min=float(c1_vals[0]),
        c1_max=float(c1_vals[-1]),
        c2_posdef=bool(c2_vals[0] > 0.0),
        c2_min=float(c2_vals[0]),
        delta0_posdef=bool(delta0_min > 0.0),
        delta0_min=delta0_min,
        checked_exhaustively=exhaustive,
    )


def _delta0_sign(p: TwoParamProblem, exhaustive_threshold: int) -> int:
    """+1 if Delta0 is positive definite, -1 if negative definite."""
    if p.n * p.m <= exhaustive_threshold:
        vals = np.linalg.eigvalsh(_delta0_dense(p))
        lo, hi = float(vals[0]), float(vals[-1])
        scale = max(abs(lo), abs(hi), 1e-300)
        if lo > 1e-12 * scale:
            return 1
        if hi < -1e-12 * scale:
            return -1
        raise NotRightDefinite(
            f"coupling operator is indefinite (extreme eigenvalues {lo:.3e}, {hi:.3e})"
        )
    warnings.warn(
        "problem too large for exhaustive definiteness check; "
        "using sampled rank-one probes",
        stacklevel=3,
    )
    pos_min = _rank_one_min(p.C1, p.B2, p.B1, p.C2)
    if pos_min > 0.0:
        return 1
    neg_min = _rank_one_min(-p.C1, p.B2, -p.B1, p.C2)
    if neg_min > 0.0:
        return -1
    raise NotRightDefinite("sampled coupling-operator form changes sign")


@dataclass
class _Normalizer:
    """Working state while composing normalization steps."""

    mats: dict[str, np.ndarray]
    recovery: np.ndarray = field(default_factory=lambda: np.eye(2))
    lambda_sign: int = 1
    swap: bool = False

    def negate_lambda(self) -> None:
        self.mats["B1"] = -self.mats["B1"]
        self.mats["B2"] = -self.mats["B2"]
        self.recovery = self.recovery @ np.array([[-1.0, 0.0], [0.0, 1.0]])
        self.lambda_sign = -self.lambda_sign

    def negate_both(self) -> None:
        for key in ("B1", "B2", "C1", "C2"):
            self.mats[key] = -self.mats[key]
        self.recovery = self.recovery @ np.array([[-1.0, 0.0], [0.0, -1.0]])
        self.lambda_sign = -self.lambda_sign

    def swap_equations(self) -> None:
        m = self.mats
        m["A1"], m["A2"] = m["A2"], m["A1"]
        m["B1"], m["B2"] = m["B2"], m["B1"]
        m["C1"], m["C2"] = m["C2"], m["C1"]
        self.swap = not self.swap

    def shift_b(self, t: float) -> None:
        # B <- B - t*C in both equations; lambda = lt, mu = -t*lt + mt.
        self.mats["B1"] = self.mats["B1"] - t * self.mats["C1"]
        self.mats["B2"] = self.mats["B2"] - t * self.mats["C2"]
        self.recovery = self.recovery @ np.array([[1.0, 0.0], [-t, 1.0]])

    def shift_c(self, s: float) -> None:
        # C <- C - s*B in both equations; lambda = lt - s*mt, mu = mt.
        self.mats["C1"] = self.mats["C1"] - s * self.mats["B1"]
        self.mats["C2"] = self.mats["C2"] - s * self.mats["B2"]
        self.recovery = self.recovery @ np.array([[1.0, -s], [0.0, 1.0]])

    def problem(self, label: str) -> TwoParamProblem:
        return TwoParamProblem(label=label, **self.mats)

    def recovery_map(self) -> RecoveryMap:
        t = self.recovery
        return RecoveryMap(
            b1=float(t[0, 0]),
            c1=float(t[0, 1]),
            b2=float(t[1, 0]),
            c2=float(t[1, 1]),
            lambda_sign=self.lambda_sign,
            swap=self.swap,
        )


def _definiteness_ok(p: TwoParamProblem, exhaustive_threshold: int) -> bool:
    report = check_assumptions(p, exhaustive_threshold=exhaustive_threshold)
    return report.passed


def make_definite(
    p: TwoParamProblem,
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
) -> tuple[TwoParamProblem, RecoveryMap]:
    """Normalize a right-definite problem so the solver assumptions hold.

    Steps, each optional: flip the sign of lambda so the coupling operator
    is positive definite; swap equations or flip both parameter signs until
    C2 gains a positive direction; shift B by the C-pencil to make B1
    negative definite; shift C by the B-pencil past the minimal ratio with
    margin eps.  Raises NotRightDefinite when neither +-Delta0 is definite.
    """
    state = _Normalizer(mats={k: np.asarray(v) for k, v in p.matrices().items()})

    if _delta0_sign(p, exhaustive_threshold) < 0:
        state.negate_lambda()

    current = state.problem(p.label)
    if _definiteness_ok(current, exhaustive_threshold):
        return current, state.recovery_map()

    # Give C2 a positive direction so the B-shift vector exists.
    c2_vals = sym_eig(state.mats["C2"]).values
    c2_scale = max(abs(c2_vals[0]), abs(c2_vals[-1]), 1e-300)
    if c2_vals[-1] <= 1e-12 * c2_scale:
        if c2_vals[-1] < -1e-12 * c2_scale:
            # C2 negative definite: prefer the swap when the other side has a
            # positive direction, otherwise flip both parameter signs.
            c1_vals = sym_eig(state.mats["C1"]).values
            if c1_vals[-1] > 0.0:
                state.swap_equations()
                state.negate_lambda()
            else:
                state.negate_both()
        else:
            warnings.warn(
                "C2 is semidefinite but not definite; swapping equations",
                stacklevel=2,
            )
            state.swap_equations()
            state.negate_lambda()
            swapped_c2 = sym_eig(state.mats["C2"]).values
            if swapped_c2[-1] <= 0.0:
                state.negate_both()

    current = state.problem(p.label)
    if _definiteness_ok(current, exhaustive_threshold):
        return current, state.recovery_map()

    # B-shift: with v^T C2 v > 0 maximal, B <- B - (v^T B2 v / v^T C2 v) C
    # makes B1 negative definite whenever Delta0 is positive definite.
    c2_dec = sym_eig(state.mats["C2"])
    v = c2_dec.vectors[:, -1]
    cv = float(v @ state.mats["C2"] @ v)
    bv = float(v @ state.mats["B2"] @ v)
    state.shift_b(bv / cv)

    # C-shift: rho = min_u u^T C1 u / u^T B1 u with B1 now negative definite,
    # computed as minus the largest eigenvalue of the (C1, -B1) pencil.
    nu, _ = sym_definite_gep_kth(state.mats["C1"], -state.mats["B1"], state.mats["C1"].shape[0])
    rho = -nu
    eps = 1e-2 * max(1.0, abs(rho))
    saved = {k: v.copy() for k, v in state.mats.items()}
    saved_recovery = state.recovery.copy()
    for _ in range(64):
        state.shift_c(rho - eps)
        current = state.problem(p.label)
        if _definiteness_ok(current, exhaustive_threshold):
            return current, state.recovery_map()
        # eps too aggressive for this problem; retry with a smaller margin
        state.mats = {k: v.copy() for k, v in saved.items()}
        state.recovery = saved_recovery.copy()
        eps *= 0.5
    raise NotRightDefinite("normalization failed to reach a definite form")


def save_problem(
    path,
    p: TwoParamProblem,
    recovery: RecoveryMap | None = None,
    manifest: dict | None = None,
) -> None:
    """Write the problem JSON (dense row-major matrix payloads)."""
    payload = {
        "schema": PROBLEM_SCHEMA,
        "n": p.n,
        "m": p.m,
        "label": p.label,
    }
    for key, mat in p.matrices().items():
        payload[key] = [float(x) for x in mat.ravel()]
    if recovery is not None:
        payload["recovery_map"] = recovery.to_dict()
    if manifest is not None:
        payload["manifest"] = manifest
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _matrix_from_payload(data, order: int, key: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.size != order * order:
        raise InvalidMatrix(f"{key}: expected {order * order} entries, got {arr.size}")
    arr = arr.reshape(order, order)
    scale = max(1.0, float(np.abs(arr).max()))
    if np.abs(arr - arr.T).max() > 1e-12 * scale:
        raise InvalidMatrix(f"{key}: stored matrix is not symmetric")
    return arr


def load_problem(path) -> tuple[TwoParamProblem, RecoveryMap | None, dict | None]:
    """Load a problem JSON, validating schema and symmetry."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != PROBLEM_SCHEMA:
        raise InvalidMatrix(f"unsupported problem schema {payload.get('schema')!r}")
    n, m = int(payload["n"]), int(payload["m"])
    mats = {}
    for key in _MATRIX_KEYS:
        order = n if key.endswith("1") else m
        mats[key] = _matrix_from_payload(payload[key], order, key)
    problem = TwoParamProblem(label=str(payload.get("label", "")), **mats)
    recovery = None
    if payload.get("recovery_map") is not None:
        recovery = RecoveryMap.from_dict(payload["recovery_map"])
    return problem, recovery, payload.get("manifest")
