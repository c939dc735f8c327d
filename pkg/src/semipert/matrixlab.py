"""Finite-dimensional instance: implemented semigroup on matrices.

The codomain carries the max norm (sup lattice), the domain the sum norm, so
the operator space between them is again a max lattice: the operator norm of
an n x m matrix is its largest absolute entry and the lattice operations are
entrywise.  Generators are Metzler matrices (nonnegative off-diagonal), the
exact class whose matrix exponentials are entrywise nonnegative; in finite
dimension the extrapolation layer is the identity, so the perturbation is a
plain nonnegative matrix and no completion is simulated.

The perturbed semigroup applied to an initial matrix is built two ways: the
variation-of-constants series with composite Simpson in time (the route under
test) and the matrix exponential of the perturbed generator (the oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from semipert import kernels
from semipert.errors import HypothesisViolation, PreconditionError

__all__ = [
    "expm",
    "spectral_radius",
    "spectral_bound",
    "gershgorin_bound",
    "is_metzler",
    "resolvent_matrix",
    "MatrixSystem",
    "make_system",
    "smallness_norm",
    "check_positive_generation",
    "OperatorSpaceNorms",
    "operator_space_norms",
    "check_matrix_bi_am",
    "dp_series_table",
    "dp_implemented",
    "dp_implemented_terms",
    "StageCertificate",
    "StagedResult",
    "staged_corollary",
    "random_stable_metzler",
    "random_system",
]

MAX_DIM = 16
DEFAULT_PANELS_PER_UNIT = 2048
DEFAULT_SERIES_TERMS = 30

# [13/13] Pade coefficients for the matrix exponential
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


def expm(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """e^{tA} by scaling and squaring with a [13/13] Pade core, t >= 0."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    n = A.shape[0]
    M = t * A
    norm = float(np.abs(M).sum(axis=0).max())
    if norm == 0.0:
        return np.eye(n)
    s = 0 if norm <= _PADE13_THETA else max(0, int(math.ceil(math.log2(norm / _PADE13_THETA))))
    M = M / (2.0 ** s)
    b = _PADE13_B
    ident = np.eye(n)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def spectral_radius(M: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest eigenvalue modulus of |M| by power iteration from the ones vector.

    Converged values are cross-validated against the norm-root estimate
    ||M^64||^(1/64); a gross mismatch or non-convergence raises.
    """
    M = np.asarray(M, dtype=float)
    Mabs = np.abs(M)
    n = M.shape[0]
    x = np.ones(n)
    est_prev = math.inf
    est = 0.0
    for _ in range(max_iter):
        y = Mabs @ x
        est = float(np.max(y))
        if est == 0.0:
            return 0.0
        x = y / est
        if abs(est - est_prev) <= tol * max(est, 1.0):
            break
        est_prev = est
    else:
        raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")
    scaled = Mabs / est
    growth = float(np.abs(np.linalg.matrix_power(scaled, 64)).sum(axis=1).max())
    gelfand = est * growth ** (1.0 / 64.0)
    if abs(gelfand - est) > 0.25 * max(gelfand, est) + 1e-8:
        raise RuntimeError(
            f"power iteration estimate {est:.6g} inconsistent with "
            f"norm-root estimate {gelfand:.6g}")
    return est


def gershgorin_bound(A: np.ndarray) -> float:
    """Upper bound for the largest eigenvalue real part from disc centers+radii."""
    A = np.asarray(A, dtype=float)
    d = np.diag(A)
    radii = np.abs(A).sum(axis=1) - np.abs(d)
    return float(np.max(d + radii))


def spectral_bound(A: np.ndarray) -> float:
    """Largest eigenvalue real part of a Metzler matrix.

    Shifting by the most negative diagonal entry gives a nonnegative matrix
    whose largest eigenvalue is real and maps back to the sought bound.
    """
    A = np.asarray(A, dtype=float)
    if not is_metzler(A):
        raise PreconditionError("spectral_bound expects a Metzler matrix")
    c = -float(np.min(np.diag(A)))
    r = spectral_radius(A + c * np.eye(A.shape[0]))
    out = r - c
    if out > gershgorin_bound(A) + 1e-8:
        raise RuntimeError("spectral bound estimate exceeds its Gershgorin bound")
    return out


def is_metzler(A: np.ndarray, tol: float = 1e-12) -> bool:
    A = np.asarray(A, dtype=float)
    off = A - np.diag(np.diag(A))
    return bool(np.min(off) >= -tol)


def resolvent_matrix(A: np.ndarray, lam: float) -> np.ndarray:
    """(lam I - A)^{-1}; raises when lam is not in the resolvent set."""
    A = np.asarray(A, dtype=float)
    try:
        return np.linalg.inv(lam * np.eye(A.shape[0]) - A)
    except np.linalg.LinAlgError as exc:
        raise HypothesisViolation(
            "spectral parameter in resolvent set",
            f"lam = {lam} makes lam*I - A singular") from exc


@dataclass(frozen=True)
class MatrixSystem:
    """Metzler generator A, nonnegative perturbation B, initial matrix S0,
    spectral parameter lam with lam > spectral bound of A."""

    A: np.ndarray
    B: np.ndarray
    S0: np.ndarray
    lam: float

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=float)
        B = np.ascontiguousarray(self.B, dtype=float)
        S0 = np.ascontiguousarray(np.atleast_2d(self.S0), dtype=float)
        n = A.shape[0]
        if A.shape != (n, n) or B.shape != (n, n) or S0.shape[0] != n:
            raise ValueError("A, B must be n x n and S0 must have n rows")
        if n > MAX_DIM or S0.shape[1] > MAX_DIM:
            raise ValueError(f"dimensions are capped at {MAX_DIM} (desk scale)")
        if not is_metzler(A):
            raise HypothesisViolation(
                "generator Metzler structure",
                "off-diagonal entries of A must be nonnegative for the "
                "unperturbed semigroup to be entrywise nonnegative")
        if np.min(B) < -1e-12:
            raise HypothesisViolation(
                "perturbation nonnegativity",
                "B must be entrywise nonnegative")
        R = resolvent_matrix(A, self.lam)
        if np.min(R) < -1e-10:
            raise HypothesisViolation(
                "resolvent positivity",
                f"(lam I - A)^(-1) has a negative entry at lam = {self.lam}; "
                f"lam must exceed the spectral bound of A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "S0", S0)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.S0.shape[1]


def make_system(A, B, S0, lam: float | None = None) -> MatrixSystem:
    """Build a system; lam defaults to (spectral bound of A) + 1."""
    A = np.asarray(A, dtype=float)
    if lam is None:
        lam = spectral_bound(A) + 1.0
    return MatrixSystem(A=A, B=np.asarray(B, dtype=float),
                        S0=np.asarray(S0, dtype=float), lam=float(lam))


def smallness_norm(sys: MatrixSystem) -> float:
    """Sup-induced operator norm of (lam I - A)^{-1} B (max abs row sum)."""
    R = resolvent_matrix(sys.A, sys.lam)
    return float(np.abs(R @ sys.B).sum(axis=1).max())


def check_positive_generation(A: np.ndarray, t_grid, tol: float = 1e-12) -> bool:
    """True iff e^{tA} is entrywise >= -tol for every t in the grid."""
    return all(float(np.min(expm(A, float(t)))) >= -tol for t in t_grid)


@dataclass(frozen=True)
class OperatorSpaceNorms:
    norm: float
    seminorms: tuple


def operator_space_norms(S: np.ndarray, xs=()) -> OperatorSpaceNorms:
    """Operator norm from the sum-norm domain to the max-norm codomain
    (= largest absolute entry) plus the orbit seminorms ||S x||_inf."""
    S = np.asarray(S, dtype=float)
    norm = float(np.max(np.abs(S))) if S.size else 0.0
    semis = tuple(float(np.max(np.abs(S @ np.asarray(x, dtype=float)))) for x in xs)
    return OperatorSpaceNorms(norm=norm, seminorms=semis)


def check_matrix_bi_am(S: np.ndarray, R: np.ndarray, coords=None,
                       tol: float = 1e-12) -> bool:
    """Sup-to-max identity on nonnegative matrix pairs.

    For entrywise nonnegative S, R and nonnegative single-coordinate vectors
    x: max{||Sx||, ||Rx||} = ||(S v R) x|| in the max norm, and the same for
    the operator norms.  Raises on negative inputs.
    """
    S = np.asarray(S, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.min(S) < 0 or np.min(R) < 0:
        raise PreconditionError("bi-AM identity check requires nonnegative matrices")
    if coords is None:
        coords = range(S.shape[1])
    sup = np.maximum(S, R)
    ok = abs(max(np.max(S), np.max(R)) - np.max(sup)) <= tol
    for k in coords:
        lhs = max(np.max(S[:, k]), np.max(R[:, k]))
        rhs = np.max(sup[:, k])
        ok = ok and abs(lhs - rhs) <= tol
    return bool(ok)


def random_stable_metzler(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random Metzler matrix with strictly dominant negative diagonal."""
    A = rng.uniform(0.0, 1.0, (n, n))
    np.fill_diagonal(A, 0.0)
    np.fill_diagonal(A, -A.sum(axis=1) - rng.uniform(0.0, 1.0, n))
    return A


def random_system(rng: np.random.Generator, max_dim: int = 8,
                  target_smallness: float = 0.5) -> "MatrixSystem":
    """Seeded random instance: stable Metzler A, nonnegative B scaled to the
    target resolvent-norm smallness, nonnegative S0."""
    n = int(rng.integers(2, max_dim + 1))
    m = int(rng.integers(1, max_dim + 1))
    A = random_stable_metzler(rng, n)
    B = rng.uniform(0.0, 1.0, (n, n))
    lam = spectral_bound(A) + 1.0
    R = resolvent_matrix(A, lam)
    B *= target_smallness / np.abs(R @ B).sum(axis=1).max()
    S0 = rng.uniform(0.0, 1.0, (n, m))
    return MatrixSystem(A=A, B=B, S0=S0, lam=lam)


def _series_grid(t: float, panels_per_unit: int) -> tuple[int, float]:
    M = 2 * max(2, int(round(t * panels_per_unit / 2.0)))
    return M, t / M


def dp_series_table(sys: MatrixSystem, t: float, terms: int = DEFAULT_SERIES_TERMS,
                    panels_per_unit: int = DEFAULT_PANELS_PER_UNIT):
    """All series terms applied to S0 on the shared time grid.

    Returns (s_grid, V) with V[n, i] the n-th term at time s_i; the series
    value at any grid time is V[:, i].sum(axis=0).  Requires the smallness
    certificate (sup-induced norm of the resolvent-composed perturbation
    below one); otherwise the staged route applies.
    """
    bound = smallness_norm(sys)
    if bound >= 1.0:
        raise HypothesisViolation(
            "perturbation smallness (norm)",
            f"||(lam I - A)^(-1) B|| = {bound:.6g} >= 1 at lam = {sys.lam}; "
            f"the norm route refuses, try staged_corollary (spectral-radius route)")
    if t <= 0:
        raise ValueError("horizon must be positive")
    if terms < 1:
        raise ValueError("need at least one series term")
    M, h = _series_grid(t, panels_per_unit)
    E1 = expm(sys.A, h)
    E2 = E1 @ E1
    Eh = expm(sys.A, 0.5 * h)
    V = kernels.series_table(E2, E1, Eh, sys.B, sys.S0, h, M, terms)
    s = np.linspace(0.0, t, M + 1)
    return s, V


def dp_implemented(sys: MatrixSystem, t: float, terms: int = DEFAULT_SERIES_TERMS,
                   panels_per_unit: int = DEFAULT_PANELS_PER_UNIT) -> np.ndarray:
    """Series value at time t (sum of all computed terms applied to S0)."""
    _, V = dp_series_table(sys, t, terms, panels_per_unit)
    return V[:, -1].sum(axis=0)


def dp_implemented_terms(sys: MatrixSystem, t: float,
                         terms: int = DEFAULT_SERIES_TERMS,
                         panels_per_unit: int = DEFAULT_PANELS_PER_UNIT) -> np.ndarray:
    """Individual series terms at time t, shape (terms + 1, n, m)."""
    _, V = dp_series_table(sys, t, terms, panels_per_unit)
    return V[:, -1].copy()


@dataclass(frozen=True)
class StageCertificate:
    stage: int
    smallness: float
    smallness_ok: bool
    series_gap: float


@dataclass(frozen=True)
class StagedResult:
    value: np.ndarray
    certificates: tuple
    spectral_radius: float
    chain_violation: float
    chain_ok: bool


def staged_corollary(sys: MatrixSystem, n_stages: int, t: float,
                     terms: int = DEFAULT_SERIES_TERMS,
                     panels_per_unit: int = DEFAULT_PANELS_PER_UNIT) -> StagedResult:
    """Spectral-radius route: apply the norm-smallness construction in stages
    with perturbation B/n, base generator advancing by B/n each stage.

    Requires spectral radius of (lam I - A)^{-1} B below one (weaker than the
    norm condition), and lam above the spectral bound of A + B a posteriori.
    Each stage j carries its own smallness certificate
    ||(lam I - A - (j-1)/n B)^{-1} B/n|| < 1 and a series-vs-exponential gap;
    the entrywise monotone resolvent chain
    (lam I - A)^{-1} <= (lam I - A - s B)^{-1} <= (lam I - A - B)^{-1}
    is verified at s in {0, j/n, 1}.  The final stage's series value
    approximates e^{t (A + B)} S0.
    """
    if n_stages < 1:
        raise ValueError("need at least one stage")
    r = spectral_radius(resolvent_matrix(sys.A, sys.lam) @ sys.B)
    if r >= 1.0:
        raise HypothesisViolation(
            "perturbation smallness (spectral radius)",
            f"r((lam I - A)^(-1) B) = {r:.6g} >= 1 at lam = {sys.lam}")
    sb = spectral_bound(sys.A + sys.B)
    if sys.lam <= sb:
        raise HypothesisViolation(
            "spectral parameter above perturbed bound",
            f"lam = {sys.lam} does not exceed the perturbed spectral bound {sb:.6g}")

    R_base = resolvent_matrix(sys.A, sys.lam)
    R_full = resolvent_matrix(sys.A + sys.B, sys.lam)
    chain_violation = 0.0
    certificates = []
    value = None
    for j in range(1, n_stages + 1):
        A_j = sys.A + ((j - 1) / n_stages) * sys.B
        stage_sys = MatrixSystem(A=A_j, B=sys.B / n_stages, S0=sys.S0, lam=sys.lam)
        small = smallness_norm(stage_sys)
        if small >= 1.0:
            raise HypothesisViolation(
                "stage smallness",
                f"stage {j}: ||(lam I - A_j)^(-1) B/n|| = {small:.6g} >= 1")
        R_mid = resolvent_matrix(sys.A + (j / n_stages) * sys.B, sys.lam)
        chain_violation = max(
            chain_violation,
            float(np.max(R_base - R_mid)),
            float(np.max(R_mid - R_full)),
        )
        value = dp_implemented(stage_sys, t, terms, panels_per_unit)
        oracle_j = expm(sys.A + (j / n_stages) * sys.B, t) @ sys.S0
        gap = float(np.max(np.abs(value - oracle_j)))
        certificates.append(StageCertificate(stage=j, smallness=small,
                                             smallness_ok=small < 1.0,
                                             series_gap=gap))
    return StagedResult(value=value, certificates=tuple(certificates),
                        spectral_radius=r, chain_violation=chain_violation,
                        chain_ok=chain_violation <= 1e-10)
