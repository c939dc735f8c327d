"""Rank-one positive perturbation of the translation semigroup.

The perturbation maps f to (integral of f against mu) times the unit step at
the threshold; the step lives one extrapolation level down and is always
handled through its resolvent image h.  Because the perturbation has rank
one, every term of the perturbed-semigroup series reduces to a scalar trace
function on the time grid:

    phi_n(s) = trace of the n-th series term,
    term_n(t)(x) = Psi_{n-1}(ell(t, x)),   ell(t, x) = clip(x + t - 1, 0, t),

with Psi_{n-1} the running integral of phi_{n-1}.  The recursion for phi_n
integrates Psi_{n-1}(ell(s, .)) against mu, exactly for the piecewise-linear
interpolant (atoms by direct evaluation, density pieces through the second
antiderivative).  An independent check route solves the equivalent scalar
Volterra equation phi = a + k * phi by product integration and reconstructs
the same field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semipert import kernels
from semipert.errors import HypothesisViolation, PreconditionError
from semipert.funcspace import BoundedFunction, CompactWindow, SeminormSpec, \
    compact_sup_seminorm, sup_norm_sampled
from semipert.measures import (
    RegularMeasure,
    integrate,
    is_nonnegative,
    support_bound,
    tail_mass,
    total_variation,
    upper_tail,
)
from semipert.transgroup import g_kernel_threshold, h_function

__all__ = [
    "DSPerturbation",
    "smallness_bound",
    "require_smallness",
    "apply_RB",
    "LocalityCertificate",
    "locality_certificate",
    "extrapolated_convolution",
    "StepIntegralReport",
    "step_function_integral_checks",
    "DPState",
    "DPResult",
    "dyson_phillips",
    "MildSolution",
    "volterra_oracle",
    "PositivityReport",
    "positivity_audit",
]

DEFAULT_DT = 1e-3
DEFAULT_TERMS = 20
TAIL_CERTIFY_FACTOR = 1e-8


@dataclass(frozen=True)
class DSPerturbation:
    """f -> Phi(f) * (unit step at threshold), with Phi integration against mu.

    h is the resolvent image of the step at spectral parameter 1; the series
    construction requires the smallness certificate
    total_variation(mu) * sup|h| < 1.
    """

    mu: RegularMeasure
    threshold: float = None  # type: ignore[assignment]
    h: BoundedFunction = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.threshold is None:
            object.__setattr__(self, "threshold", g_kernel_threshold())
        if self.h is None:
            object.__setattr__(self, "h", h_function())


def smallness_bound(pert: DSPerturbation) -> float:
    """Certified norm bound of the resolvent-composed perturbation."""
    return total_variation(pert.mu) * pert.h.sup_bound


def require_smallness(pert: DSPerturbation) -> float:
    bound = smallness_bound(pert)
    if bound >= 1.0:
        raise HypothesisViolation(
            "perturbation smallness",
            f"total_variation(mu) * sup|h| = {bound:.6g} but the perturbed "
            f"generator construction requires this resolvent-norm bound to be < 1",
        )
    return bound


def apply_RB(pert: DSPerturbation, f: BoundedFunction) -> BoundedFunction:
    """Resolvent image of the perturbation applied to f: Phi(f) * h."""
    return integrate(pert.mu, f) * pert.h


@dataclass(frozen=True)
class LocalityCertificate:
    window: CompactWindow
    tail: float
    lhs: float
    rhs: float
    passed: bool


def locality_certificate(pert: DSPerturbation, eps: float, f: BoundedFunction,
                         windows: tuple = (), resolution: int = 2001) -> LocalityCertificate:
    """Locality of the resolvent-composed perturbation.

    Picks the smallest configured window whose outside mass is below eps and
    verifies  |Phi(f)| * sup|h|  <=  (mass inside) * (window sup of f)
    + eps * sup|f|.  Finitely supported measures always admit a window with
    zero tail, so the default geometric window family terminates.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not windows:
        r = 1.0
        cap = max(2.0 * support_bound(pert.mu), 2.0)
        windows = []
        while r <= cap:
            windows.append(CompactWindow(-r, r))
            r *= 2.0
        windows.append(CompactWindow(-r, r))
        windows = tuple(windows)
    chosen = None
    for w in windows:
        if tail_mass(pert.mu, w) < eps:
            chosen = w
            break
    if chosen is None:
        chosen = windows[-1]
    tail = tail_mass(pert.mu, chosen)
    inside = total_variation(pert.mu) - tail
    h_norm = pert.h.sup_bound
    lhs = abs(integrate(pert.mu, f)) * h_norm
    p_window = compact_sup_seminorm(f, SeminormSpec(chosen, resolution))
    rhs = (inside * p_window + eps * f.sup_bound) * h_norm
    return LocalityCertificate(chosen, tail, lhs, rhs, lhs <= rhs + 1e-12)


def _cumtrapz(vals: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty_like(vals)
    out[0] = 0.0
    np.cumsum(0.5 * dt * (vals[1:] + vals[:-1]), out=out[1:])
    return out


def ell(t, x, threshold: float = 1.0):
    """Active length of the translated step: clip(x + t - threshold, 0, t)."""
    return np.clip(np.asarray(x, dtype=float) + t - threshold, 0.0, t)


def extrapolated_convolution(pert: DSPerturbation, s: np.ndarray, phi: np.ndarray,
                             t: float) -> BoundedFunction:
    """Time integral of the translated perturbation against the trace phi.

    Closed form: the translated step at elapsed time r covers x >= threshold
    - r, so the integral over [0, t] collapses to x -> Psi(ell(t, x)) with
    Psi the running integral of phi.  Continuous, zero left of threshold - t,
    saturated at Psi(t) right of threshold.
    """
    s = np.asarray(s, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if s.shape != phi.shape or s.ndim != 1 or s.size < 2:
        raise ValueError("need matching 1-d sample grid and trace values")
    if s[0] != 0.0 or not np.isclose(s[-1], t):
        raise ValueError("trace must be sampled on [0, t]")
    dt = s[1] - s[0]
    Psi = _cumtrapz(phi, dt)
    thr = pert.threshold

    def fn(x, s=s, Psi=Psi, t=t, thr=thr):
        return np.interp(ell(t, x, thr), s, Psi)

    return BoundedFunction(kind="analytic-primitive", fn=fn,
                           sup_bound=float(np.max(np.abs(Psi))),
                           breakpoints=(thr - t, thr))


@dataclass(frozen=True)
class StepIntegralReport:
    in_space_modulus: float
    min_value: float
    additivity_residual: float
    damped_comparison_margin: float
    positive: bool
    comparison_holds: bool


def step_function_integral_checks(pert: DSPerturbation, steps, t0: float,
                                  window: CompactWindow = CompactWindow(-6.0, 6.0),
                                  resolution: int = 1201) -> StepIntegralReport:
    """Checks on int_0^{t0} (translated perturbation applied to u(s)) ds for a
    step function u = sum x_k on intervals I_k.

    Verifies: the value is a continuous function (sampled modulus of
    continuity reported), nonnegative when all x_k are nonnegative with mu
    nonnegative, additive over the steps, and dominated by the improper
    integral after exponential damping at rate 1 (the damped comparison has
    both sides in closed form; the infinite-horizon side is exactly the
    trace times h).
    """
    intervals = [(float(a), float(b)) for (a, b), _ in steps]
    for a, b in intervals:
        if not (0.0 <= a < b <= t0):
            raise PreconditionError("step intervals must lie inside [0, t0]")
    for (a, b), (c, d) in zip(sorted(intervals), sorted(intervals)[1:]):
        if c < b:
            raise PreconditionError("step intervals must be pairwise disjoint")

    traces = [integrate(pert.mu, x) for _, x in steps]
    thr = pert.threshold
    xs = np.linspace(window.a, window.b, resolution)

    def piece_undamped(a, b, c, x):
        # int_a^b c * 1[x >= thr - s] ds = c * (b - max(a, thr - x))_+
        return c * np.maximum(0.0, b - np.maximum(a, thr - x))

    total = np.zeros_like(xs)
    for (a, b), c in zip((iv for iv, _ in steps), traces):
        total += piece_undamped(a, b, c, xs)

    dxs = np.diff(total)
    in_space_modulus = float(np.max(np.abs(dxs))) if dxs.size else 0.0
    min_value = float(np.min(total))

    # independent route: midpoint quadrature of the combined trace over time
    sq = np.linspace(0.0, t0, 4001)
    mids = 0.5 * (sq[1:] + sq[:-1])
    trace_at = np.zeros_like(mids)
    for (a, b), c in zip((iv for iv, _ in steps), traces):
        trace_at += c * ((mids >= a) & (mids < b))
    active = (xs[:, None] >= thr - mids[None, :])
    quad_total = (t0 / mids.size) * (active * trace_at[None, :]).sum(axis=1)
    additivity_residual = float(np.max(np.abs(quad_total - total)))

    # damped comparison for each single nonnegative element: finite horizon
    # int_0^{t0} e^{-s} 1[x >= thr - s] ds  <=  int_0^inf ...  =  h(x - thr + 1)
    margin = np.inf
    hfun = pert.h
    any_nonneg = False
    for (a, b), c in zip((iv for iv, _ in steps), traces):
        if c < 0:
            continue
        any_nonneg = True
        start = np.clip(thr - xs, 0.0, t0)
        lhs = c * np.maximum(0.0, np.exp(-start) - np.exp(-t0))
        rhs = c * hfun(xs - thr + 1.0)
        margin = min(margin, float(np.min(rhs - lhs)))
    if not any_nonneg:
        margin = 0.0

    positive = min_value >= -1e-12
    comparison = margin >= -1e-12
    return StepIntegralReport(in_space_modulus, min_value, additivity_residual,
                              float(margin), positive, comparison)


# ---------------------------------------------------------------------------
# Scalar trace machinery shared by the series and the Volterra oracle
# ---------------------------------------------------------------------------

def _trace_of_shifted(mu: RegularMeasure, u0: BoundedFunction, s: np.ndarray,
                      density_panels: int = 256) -> np.ndarray:
    """a(s) = integral of u0(. + s) against mu, vectorized over the grid."""
    out = np.zeros_like(s)
    for loc, w in mu.atoms:
        out += w * u0(loc + s)
    panels = density_panels + density_panels % 2
    for a, b, hgt in mu.densities:
        xq = np.linspace(a, b, panels + 1)
        wq = np.ones(panels + 1)
        wq[1:-1:2] = 4.0
        wq[2:-1:2] = 2.0
        vals = u0(xq[None, :] + s[:, None])
        out += hgt * (b - a) / (3.0 * panels) * vals @ wq
    return out


def _xi_eval(s: np.ndarray, Psi: np.ndarray, Xi: np.ndarray, dt: float,
             q: np.ndarray) -> np.ndarray:
    """Second antiderivative at arbitrary points, exact for piecewise-linear Psi."""
    j = np.clip((q / dt).astype(int), 0, s.size - 2)
    th = q - s[j]
    slope = (Psi[j + 1] - Psi[j]) / dt
    return Xi[j] + th * Psi[j] + 0.5 * th * th * slope


@dataclass(frozen=True)
class DPState:
    """Scalar traces of the series terms on the shared time grid."""

    s: np.ndarray
    phis: np.ndarray            # (terms + 1, grid) trace of each term
    Psis: np.ndarray            # running integrals of each trace
    term_sup_norms: np.ndarray  # sup |phi_n|
    ratios: np.ndarray          # successive sup-norm ratios (nan where undefined)
    tail_estimates: np.ndarray  # sup|phi_n| * t


@dataclass(frozen=True)
class DPResult:
    state: DPState
    terms: int
    t: float
    u0: BoundedFunction
    threshold: float
    certified: bool
    tail_estimate: float

    def _check_tau(self, tau: float) -> None:
        if not 0.0 <= tau <= self.t * (1.0 + 1e-12):
            raise ValueError(f"evaluation time {tau} outside the computed [0, {self.t}]")

    def field(self, tau: float, x) -> np.ndarray:
        """Approximate solution value w(tau, x), tau within [0, t]."""
        self._check_tau(tau)
        total = np.asarray(self.u0(np.asarray(x, dtype=float) + tau), dtype=float)
        q = ell(tau, x, self.threshold)
        for n in range(1, self.terms + 1):
            total = total + np.interp(q, self.state.s, self.state.Psis[n - 1])
        return total

    def term_field(self, n: int, tau: float, x) -> np.ndarray:
        """The n-th series term alone at (tau, x); n = 0 is pure transport."""
        self._check_tau(tau)
        if n == 0:
            return np.asarray(self.u0(np.asarray(x, dtype=float) + tau), dtype=float)
        q = ell(tau, x, self.threshold)
        return np.interp(q, self.state.s, self.state.Psis[n - 1])


def dyson_phillips(pert: DSPerturbation, u0: BoundedFunction, t: float,
                   terms: int = DEFAULT_TERMS, dt: float = DEFAULT_DT,
                   density_panels: int = 256) -> DPResult:
    """Series construction of the perturbed evolution applied to u0.

    Computes the trace of the transported datum, then the recursion

        phi_n(s) = integral over x of Psi_{n-1}(ell(s, x)) d mu(x),

    with atoms evaluated on the piecewise-linear Psi directly and density
    pieces integrated exactly through the second antiderivative.  Refuses to
    run when the smallness certificate fails.  The result records per-term
    sup norms, their ratios, and the tail estimate sup|phi_N| * t; it is
    certified when that tail is below 1e-8 * sup|u0|.
    """
    require_smallness(pert)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if terms < 1:
        raise ValueError("need at least one series term")
    if t <= 0:
        raise ValueError("horizon must be positive")
    M = max(2, int(round(t / dt)))
    s = np.linspace(0.0, t, M + 1)
    step = t / M
    thr = pert.threshold

    phis = np.zeros((terms + 1, M + 1))
    Psis = np.zeros_like(phis)
    phis[0] = _trace_of_shifted(pert.mu, u0, s, density_panels)
    for n in range(1, terms + 1):
        prev = phis[n - 1]
        Psi = _cumtrapz(prev, step)
        Psis[n - 1] = Psi
        Xi = _cumtrapz(Psi, step)
        nxt = np.zeros(M + 1)
        for loc, w in pert.mu.atoms:
            nxt += w * np.interp(ell(s, loc, thr), s, Psi)
        for a, b, hgt in pert.mu.densities:
            ulo = np.clip(a + s - thr, 0.0, s)
            uhi = np.clip(b + s - thr, 0.0, s)
            over = max(0.0, b - thr) - max(0.0, a - thr)
            nxt += hgt * (_xi_eval(s, Psi, Xi, step, uhi)
                          - _xi_eval(s, Psi, Xi, step, ulo) + over * Psi)
        phis[n] = nxt
    Psis[terms] = _cumtrapz(phis[terms], step)

    sup_norms = np.max(np.abs(phis), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(sup_norms[:-1] > 0, sup_norms[1:] / sup_norms[:-1], np.nan)
    tails = sup_norms * t
    tail = float(tails[terms])
    certified = tail <= TAIL_CERTIFY_FACTOR * max(u0.sup_bound, np.finfo(float).tiny)
    state = DPState(s=s, phis=phis, Psis=Psis, term_sup_norms=sup_norms,
                    ratios=ratios, tail_estimates=tails)
    return DPResult(state=state, terms=terms, t=t, u0=u0, threshold=thr,
                    certified=certified, tail_estimate=tail)


@dataclass(frozen=True)
class MildSolution:
    """Volterra-route solution: trace phi on the grid plus reconstruction."""

    s: np.ndarray
    phi: np.ndarray
    Psi: np.ndarray
    u0: BoundedFunction
    threshold: float

    def evaluate(self, tau: float, x) -> np.ndarray:
        if not 0.0 <= tau <= self.s[-1] * (1.0 + 1e-12):
            raise ValueError(f"evaluation time {tau} outside the computed horizon")
        q = ell(tau, x, self.threshold)
        out = np.asarray(self.u0(np.asarray(x, dtype=float) + tau), dtype=float)
        return out + np.interp(q, self.s, self.Psi)


def volterra_oracle(pert: DSPerturbation, u0: BoundedFunction, t_max: float,
                    dt: float = DEFAULT_DT, density_panels: int = 256) -> MildSolution:
    """Independent construction of the same solution via the scalar Volterra
    equation phi(t) = a(t) + int_0^t k(t - s) phi(s) ds.

    a is the trace of the transported datum; the kernel k(r) is the measure
    of [threshold - r, infinity).  The continuous (density) part of k enters
    the trapezoid product rule on the grid; atoms enter exactly through the
    running integral of phi, implicit in the diagonal.  The march is stable
    because |k| is bounded by the total variation, below one by hypothesis.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max <= 0:
        raise ValueError("horizon must be positive")
    M = max(2, int(round(t_max / dt)))
    s = np.linspace(0.0, t_max, M + 1)
    step = t_max / M
    thr = pert.threshold
    a_vec = _trace_of_shifted(pert.mu, u0, s, density_panels)
    dens_only = RegularMeasure(densities=pert.mu.densities)
    kdn = np.array([upper_tail(dens_only, thr - r) for r in s])
    atom_w = np.array([w for _, w in pert.mu.atoms], dtype=float)
    atom_c = np.array([thr - loc for loc, _ in pert.mu.atoms], dtype=float)
    phi, Psi = kernels.volterra_march(np.ascontiguousarray(a_vec), kdn,
                                      atom_w, atom_c, step)
    return MildSolution(s=s, phi=phi, Psi=Psi, u0=u0, threshold=thr)


@dataclass(frozen=True)
class PositivityReport:
    min_value: float
    min_term_value: float
    worst_term: int
    certified: bool


def positivity_audit(pert: DSPerturbation, u0: BoundedFunction, times,
                     window: CompactWindow = CompactWindow(-5.0, 5.0),
                     resolution: int = 201, terms: int = DEFAULT_TERMS,
                     dt: float = DEFAULT_DT) -> PositivityReport:
    """Minimum of the series solution and of each individual term over the
    space-time grid, for nonnegative measure and datum.

    Signed measures are rejected: positivity of the perturbation requires a
    nonnegative mu.  The datum is checked on the evaluation grid.
    """
    if not is_nonnegative(pert.mu):
        raise PreconditionError("positivity audit requires a nonnegative measure")
    xs = np.linspace(window.a, window.b, resolution)
    times = tuple(float(t) for t in times)
    t_end = max(times)
    probe = np.concatenate([xs, xs + t_end])
    if np.min(u0(probe)) < -1e-12:
        raise PreconditionError("positivity audit requires a nonnegative datum")
    res = dyson_phillips(pert, u0, t_end, terms=terms, dt=dt)
    min_val = np.inf
    min_term = np.inf
    worst = 0
    for tau in times:
        min_val = min(min_val, float(np.min(res.field(tau, xs))))
        for n in range(terms + 1):
            v = float(np.min(res.term_field(n, tau, xs)))
            if v < min_term:
                min_term = v
                worst = n
    return PositivityReport(min_value=float(min_val), min_term_value=float(min_term),
                            worst_term=worst, certified=res.certified)
