"""Bounded continuous functions on the real line.

Functions are immutable values carrying a vectorized evaluator, a declared
sup bound, and the locations where they are not smooth (used by quadrature
to split integration panels).  Translation is tracked as a single additive
offset so that composing shifts is exact: ``f.shift(t).shift(s)`` evaluates
``f(x + (t + s))`` bit-for-bit identically to ``f.shift(t + s)``.

Also provides the compact-window sup seminorms, mixed seminorms with
vanishing weights, pointwise lattice operations, and the runtime checks for
the lattice/seminorm interaction (sup-to-max identity on nonnegative pairs,
monotonicity of seminorms under domination).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from semipert.errors import PreconditionError

__all__ = [
    "BoundedFunction",
    "CompactWindow",
    "SeminormSpec",
    "MixedSeminormSpec",
    "from_callable",
    "from_grid",
    "constant",
    "compact_sup_seminorm",
    "mixed_seminorm",
    "sup_norm_sampled",
    "lattice_sup",
    "lattice_inf",
    "abs_val",
    "pos_part",
    "neg_part",
    "check_bi_am",
    "check_compatibility",
    "BiAMCheck",
]

DEFAULT_SUP_WINDOW = (-10.0, 10.0)
DEFAULT_SUP_RESOLUTION = 2001


@dataclass(frozen=True)
class BoundedFunction:
    """A bounded function on the line with a declared sup bound.

    kind: "analytic-primitive", "piecewise-polynomial-exp", or "grid-sampled".
    fn: vectorized evaluator of the *unshifted* function.
    sup_bound: declared upper bound for sup|f|; operations propagate it.
    breakpoints: sorted locations (in unshifted coordinates) where f is not
        smooth; quadrature splits panels there.
    offset: accumulated translation, evaluation is fn(x + offset).
    error_bound: declared bound on the numerical error of each evaluation
        (nonzero for quadrature-produced functions).
    nodes/values: only for the grid-sampled kind (linear interpolation with
        constant continuation beyond the endpoints).
    """

    kind: str
    fn: Callable[[np.ndarray], np.ndarray]
    sup_bound: float
    breakpoints: tuple = ()
    offset: float = 0.0
    error_bound: float = 0.0
    nodes: np.ndarray | None = field(default=None, compare=False)
    values: np.ndarray | None = field(default=None, compare=False)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = self.fn(arr + self.offset)
        return out if np.ndim(x) else float(out)

    def shift(self, t: float) -> "BoundedFunction":
        """The translate x -> f(x + t); exact, no resampling."""
        return replace(self, offset=self.offset + t)

    @property
    def effective_breakpoints(self) -> tuple:
        """Non-smooth locations in the shifted coordinate system."""
        return tuple(b - self.offset for b in self.breakpoints)

    def check_bound(self, grid: np.ndarray, tol: float = 1e-12) -> bool:
        """Verify |f| <= sup_bound on the given sample grid."""
        return bool(np.max(np.abs(self(grid))) <= self.sup_bound + tol)

    def __add__(self, other: "BoundedFunction") -> "BoundedFunction":
        return _combine(self, other, np.add, self.sup_bound + other.sup_bound)

    def __sub__(self, other: "BoundedFunction") -> "BoundedFunction":
        return _combine(self, other, np.subtract, self.sup_bound + other.sup_bound)

    def __mul__(self, c: float) -> "BoundedFunction":
        c = float(c)
        return BoundedFunction(
            kind="analytic-primitive",
            fn=lambda x, s=self, c=c: c * s(x),
            sup_bound=abs(c) * self.sup_bound,
            breakpoints=self.effective_breakpoints,
            error_bound=abs(c) * self.error_bound,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "BoundedFunction":
        return self * (-1.0)


def _combine(f: BoundedFunction, g: BoundedFunction, op, bound: float) -> BoundedFunction:
    bps = tuple(sorted(set(f.effective_breakpoints) | set(g.effective_breakpoints)))
    return BoundedFunction(
        kind="analytic-primitive",
        fn=lambda x, f=f, g=g: op(f(x), g(x)),
        sup_bound=float(bound),
        breakpoints=bps,
        error_bound=f.error_bound + g.error_bound,
    )


def from_callable(fn, sup_bound: float, breakpoints: Sequence[float] = (),
                  kind: str = "analytic-primitive") -> BoundedFunction:
    if sup_bound < 0:
        raise ValueError("sup_bound must be nonnegative")
    return BoundedFunction(kind=kind, fn=lambda x, fn=fn: np.asarray(fn(x), dtype=float),
                           sup_bound=float(sup_bound),
                           breakpoints=tuple(sorted(breakpoints)))


def from_grid(nodes, values) -> BoundedFunction:
    """Piecewise-linear function through (nodes, values), constant beyond the ends."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
        raise ValueError("need matching 1-d nodes/values with at least two nodes")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("nodes must be strictly increasing")

    def fn(x, nodes=nodes, values=values):
        return np.interp(x, nodes, values)

    return BoundedFunction(
        kind="grid-sampled",
        fn=fn,
        sup_bound=float(np.max(np.abs(values))),
        breakpoints=tuple(nodes),
        nodes=nodes,
        values=values,
    )


def constant(c: float) -> BoundedFunction:
    c = float(c)
    return BoundedFunction(kind="analytic-primitive",
                           fn=lambda x, c=c: np.full_like(np.asarray(x, dtype=float), c),
                           sup_bound=abs(c))


@dataclass(frozen=True)
class CompactWindow:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"window needs a < b, got [{self.a}, {self.b}]")


@dataclass(frozen=True)
class SeminormSpec:
    """Sup seminorm over a compact window, computed on a uniform sample grid."""

    window: CompactWindow
    resolution: int = 201

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")

    def grid(self) -> np.ndarray:
        return np.linspace(self.window.a, self.window.b, self.resolution)


@dataclass(frozen=True)
class MixedSeminormSpec:
    """Finite list of (weight, window seminorm) pairs, weights tending to zero.

    Models the seminorms sup_n a_n p_n with (a_n) a null sequence, truncated at
    a declared tail index; the tail contributes nothing for norm-bounded inputs
    beyond the weight decay, so only the finite list is stored.
    """

    terms: tuple  # of (float, SeminormSpec)

    def __post_init__(self):
        for w, spec in self.terms:
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if not isinstance(spec, SeminormSpec):
                raise TypeError("each term must pair a weight with a SeminormSpec")


def compact_sup_seminorm(f: BoundedFunction, spec: SeminormSpec) -> float:
    """Max of |f| over the uniform sample grid of the window.

    A lower bound for the true sup; exact for piecewise-linear grid functions
    whose nodes lie on the sample grid.
    """
    return float(np.max(np.abs(f(spec.grid()))))


def mixed_seminorm(f: BoundedFunction, mixed: MixedSeminormSpec) -> float:
    """max_n weight_n * window seminorm; empty list gives 0."""
    if not mixed.terms:
        return 0.0
    return max(w * compact_sup_seminorm(f, spec) for w, spec in mixed.terms)


def sup_norm_sampled(f: BoundedFunction, window: CompactWindow | None = None,
                     resolution: int = DEFAULT_SUP_RESOLUTION) -> float:
    """Sampled stand-in for the sup norm (max of |f| over a wide window grid)."""
    if window is None:
        window = CompactWindow(*DEFAULT_SUP_WINDOW)
    return compact_sup_seminorm(f, SeminormSpec(window, resolution))


def lattice_sup(f: BoundedFunction, g: BoundedFunction) -> BoundedFunction:
    return _combine(f, g, np.maximum, max(f.sup_bound, g.sup_bound))


def lattice_inf(f: BoundedFunction, g: BoundedFunction) -> BoundedFunction:
    return _combine(f, g, np.minimum, max(f.sup_bound, g.sup_bound))


def abs_val(f: BoundedFunction) -> BoundedFunction:
    return BoundedFunction(kind="analytic-primitive", fn=lambda x, f=f: np.abs(f(x)),
                           sup_bound=f.sup_bound, breakpoints=f.effective_breakpoints,
                           error_bound=f.error_bound)


def pos_part(f: BoundedFunction) -> BoundedFunction:
    return BoundedFunction(kind="analytic-primitive",
                           fn=lambda x, f=f: np.maximum(f(x), 0.0),
                           sup_bound=f.sup_bound, breakpoints=f.effective_breakpoints,
                           error_bound=f.error_bound)


def neg_part(f: BoundedFunction) -> BoundedFunction:
    return BoundedFunction(kind="analytic-primitive",
                           fn=lambda x, f=f: np.minimum(f(x), 0.0),
                           sup_bound=f.sup_bound, breakpoints=f.effective_breakpoints,
                           error_bound=f.error_bound)


@dataclass(frozen=True)
class BiAMCheck:
    passed: bool
    seminorm_max: float
    seminorm_of_sup: float
    norm_max: float
    norm_of_sup: float


def check_bi_am(f: BoundedFunction, g: BoundedFunction, spec: SeminormSpec,
                tol: float = 1e-12) -> BiAMCheck:
    """Sup-to-max identity on nonnegative pairs: max{p(f), p(g)} = p(f v g),
    both for the window seminorm and for the sampled sup norm.

    Raises PreconditionError if f or g takes negative values on the grids.
    """
    grid = spec.grid()
    wide = np.linspace(*DEFAULT_SUP_WINDOW, DEFAULT_SUP_RESOLUTION)
    for name, fun in (("f", f), ("g", g)):
        if np.min(fun(grid)) < 0 or np.min(fun(wide)) < 0:
            raise PreconditionError(f"{name} must be nonnegative on the sample grid")
    s = lattice_sup(f, g)
    p_lhs = max(compact_sup_seminorm(f, spec), compact_sup_seminorm(g, spec))
    p_rhs = compact_sup_seminorm(s, spec)
    n_lhs = max(sup_norm_sampled(f), sup_norm_sampled(g))
    n_rhs = sup_norm_sampled(s)
    passed = abs(p_lhs - p_rhs) <= tol and abs(n_lhs - n_rhs) <= tol
    return BiAMCheck(passed, p_lhs, p_rhs, n_lhs, n_rhs)


def check_compatibility(f: BoundedFunction, g: BoundedFunction, spec: SeminormSpec,
                        tol: float = 1e-12) -> bool:
    """Domination monotonicity: |f| <= |g| on the grid implies p(f) <= p(g).

    The precondition is verified on the sample grid; violation raises.
    """
    grid = spec.grid()
    fv, gv = np.abs(f(grid)), np.abs(g(grid))
    if np.any(fv > gv + tol):
        raise PreconditionError("compatibility check requires |f| <= |g| on the sample grid")
    return float(np.max(fv)) <= float(np.max(gv)) + tol
