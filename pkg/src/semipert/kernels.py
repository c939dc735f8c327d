"""Hot numeric kernels, each with a numba-jitted and a pure-numpy path.

The two sequential inner loops that dominate runtime live here:

* ``volterra_march``: product-integration marching for the scalar Volterra
  equation of the second kind (trapezoid on the continuous kernel part,
  exact cumulative handling of kernel jumps from measure atoms, implicit in
  the diagonal term).
* ``series_table``: panel-recursive composite Simpson propagation of the
  variation-of-constants series terms for a matrix semigroup, on a shared
  s-grid (each term at every grid point, so the next term can integrate
  against it).

Selection: the numba path is used when numba imports cleanly and the
environment variable ``SEMIPERT_NO_NUMBA`` is unset/false; otherwise the
numpy fallback.  ``ACTIVE_IMPL`` records the choice.  Both paths evaluate
the same quadrature rules; ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "ACTIVE_IMPL",
    "ENV_FLAG",
    "NUMBA_ENABLED",
    "volterra_march",
    "series_table",
    "volterra_march_numpy",
    "series_table_numpy",
    "numba_kernels",
]

ENV_FLAG = "SEMIPERT_NO_NUMBA"

# cubic Lagrange weights for the midpoint of the first grid cell
# (nodes 0, 1, 2, 3 evaluated at 1/2), used to bootstrap odd-index chains
_W_MID = (0.3125, 0.9375, -0.3125, 0.0625)


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# Volterra second-kind marching
# ---------------------------------------------------------------------------

def _volterra_march_loops(a, kdn, atom_w, atom_c, dt):
    """phi(t) = a(t) + int_0^t k(t-s) phi(s) ds on the uniform grid t_j = j dt.

    kdn holds the continuous kernel part sampled on the grid (trapezoid
    weights); each atom contributes w * Psi(t - c) with Psi the running
    integral of phi, evaluated exactly against the piecewise-linear
    interpolant.  Atom terms touching the current cell enter the implicit
    diagonal.  Returns (phi, Psi).
    """
    M = a.shape[0] - 1
    phi = np.zeros(M + 1)
    Psi = np.zeros(M + 1)
    phi[0] = a[0]
    for j in range(1, M + 1):
        tj = dt * j
        conv = 0.5 * kdn[j] * phi[0]
        for i in range(1, j):
            conv += kdn[j - i] * phi[i]
        rhs = a[j] + dt * conv
        diag = 0.5 * dt * kdn[0]
        for k in range(atom_w.shape[0]):
            w = atom_w[k]
            lag = tj - atom_c[k]
            if lag <= 0.0:
                continue
            if lag >= tj:
                rhs += w * (Psi[j - 1] + 0.5 * dt * phi[j - 1])
                diag += 0.5 * w * dt
            else:
                q = int(lag / dt)
                if q >= j - 1:
                    th = lag - dt * (j - 1)
                    rhs += w * (Psi[j - 1] + th * phi[j - 1]
                                - 0.5 * th * th / dt * phi[j - 1])
                    diag += 0.5 * w * th * th / dt
                else:
                    th = lag - dt * q
                    rhs += w * (Psi[q] + th * phi[q]
                                + 0.5 * th * th / dt * (phi[q + 1] - phi[q]))
        phi[j] = rhs / (1.0 - diag)
        Psi[j] = Psi[j - 1] + 0.5 * dt * (phi[j - 1] + phi[j])
    return phi, Psi


def volterra_march_numpy(a, kdn, atom_w, atom_c, dt):
    """Numpy path: same marching scheme, convolution via a per-step dot."""
    a = np.ascontiguousarray(a, dtype=float)
    kdn = np.ascontiguousarray(kdn, dtype=float)
    M = a.shape[0] - 1
    phi = np.zeros(M + 1)
    Psi = np.zeros(M + 1)
    phi[0] = a[0]
    kdn_rev = kdn[::-1].copy()
    for j in range(1, M + 1):
        tj = dt * j
        conv = 0.5 * kdn[j] * phi[0]
        if j > 1:
            conv += float(np.dot(kdn_rev[M + 1 - j:M], phi[1:j]))
        rhs = a[j] + dt * conv
        diag = 0.5 * dt * kdn[0]
        for w, c in zip(atom_w, atom_c):
            lag = tj - c
            if lag <= 0.0:
                continue
            if lag >= tj:
                rhs += w * (Psi[j - 1] + 0.5 * dt * phi[j - 1])
                diag += 0.5 * w * dt
            else:
                q = int(lag / dt)
                if q >= j - 1:
                    th = lag - dt * (j - 1)
                    rhs += w * (Psi[j - 1] + th * phi[j - 1]
                                - 0.5 * th * th / dt * phi[j - 1])
                    diag += 0.5 * w * th * th / dt
                else:
                    th = lag - dt * q
                    rhs += w * (Psi[q] + th * phi[q]
                                + 0.5 * th * th / dt * (phi[q + 1] - phi[q]))
        phi[j] = rhs / (1.0 - diag)
        Psi[j] = Psi[j - 1] + 0.5 * dt * (phi[j - 1] + phi[j])
    return phi, Psi


# ---------------------------------------------------------------------------
# Matrix variation-of-constants series on a shared grid
# ---------------------------------------------------------------------------

def _series_table_loops(E2, E1, Eh, B, S0, h, M, N):
    """Series terms V[n, i] at s_i = i h for i = 0..M and n = 0..N.

    V[0, i] = e^{s_i A} S0 (propagated), and for n >= 1

        V[n](s) = int_0^s e^{(s-r)A} B V[n-1](r) dr,

    evaluated as composite Simpson on panels [s_i, s_{i+2}] via the exact
    panel recursion V[n, i+2] = e^{2hA} V[n, i] + (single-panel Simpson);
    matrix exponentials of the same generator commute, so the recursion
    reproduces the full composite rule.  Odd indices chain from V[n, 1],
    bootstrapped by Simpson on [0, h] with a cubic-interpolated midpoint.
    """
    ndim = S0.shape[0]
    mdim = S0.shape[1]
    V = np.zeros((N + 1, M + 1, ndim, mdim))
    V[0, 0] = S0
    for i in range(M):
        V[0, i + 1] = E1 @ np.ascontiguousarray(V[0, i])
    F = np.zeros((M + 1, ndim, mdim))
    for n in range(1, N + 1):
        for i in range(M + 1):
            F[i] = B @ np.ascontiguousarray(V[n - 1, i])
        Vhalf = (_W_MID[0] * V[n - 1, 0] + _W_MID[1] * V[n - 1, 1]
                 + _W_MID[2] * V[n - 1, 2] + _W_MID[3] * V[n - 1, 3])
        V[n, 1] = (h / 6.0) * (E1 @ np.ascontiguousarray(F[0])
                               + 4.0 * (Eh @ (B @ np.ascontiguousarray(Vhalf)))
                               + F[1])
        for i in range(M - 1):
            V[n, i + 2] = (E2 @ np.ascontiguousarray(V[n, i])
                           + (h / 3.0) * (E2 @ np.ascontiguousarray(F[i])
                                          + 4.0 * (E1 @ np.ascontiguousarray(F[i + 1]))
                                          + F[i + 2]))
    return V


def series_table_numpy(E2, E1, Eh, B, S0, h, M, N):
    """Numpy path: per-level einsum batching, one dot per panel step."""
    E2 = np.ascontiguousarray(E2, dtype=float)
    E1 = np.ascontiguousarray(E1, dtype=float)
    Eh = np.ascontiguousarray(Eh, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    S0 = np.ascontiguousarray(S0, dtype=float)
    ndim, mdim = S0.shape
    V = np.zeros((N + 1, M + 1, ndim, mdim))
    V[0, 0] = S0
    for i in range(M):
        V[0, i + 1] = E1 @ V[0, i]
    for n in range(1, N + 1):
        F = np.einsum("ij,tjk->tik", B, V[n - 1])
        E2F = np.einsum("ij,tjk->tik", E2, F)
        E1F = np.einsum("ij,tjk->tik", E1, F)
        W = (h / 3.0) * (E2F[:-2] + 4.0 * E1F[1:-1] + F[2:])
        Vn = V[n]
        Vhalf = (_W_MID[0] * V[n - 1, 0] + _W_MID[1] * V[n - 1, 1]
                 + _W_MID[2] * V[n - 1, 2] + _W_MID[3] * V[n - 1, 3])
        Vn[1] = (h / 6.0) * (E1 @ F[0] + 4.0 * (Eh @ (B @ Vhalf)) + F[1])
        for i in range(M - 1):
            Vn[i + 2] = E2 @ Vn[i] + W[i]
    return V


# ---------------------------------------------------------------------------
# Path selection
# ---------------------------------------------------------------------------

_NUMBA_CACHE: dict | None = None


def numba_kernels() -> dict:
    """Compile (once) and return the numba versions of both kernels.

    Raises ImportError if numba is unavailable.  Usable independently of the
    environment flag, e.g. by the benchmark.
    """
    global _NUMBA_CACHE
    if _NUMBA_CACHE is None:
        from numba import njit

        _NUMBA_CACHE = {
            "volterra_march": njit(cache=True)(_volterra_march_loops),
            "series_table": njit(cache=True)(_series_table_loops),
        }
    return _NUMBA_CACHE


def _select():
    if not _env_disabled():
        try:
            k = numba_kernels()
            return k["volterra_march"], k["series_table"], "numba"
        except ImportError:
            pass
    return volterra_march_numpy, series_table_numpy, "numpy"


volterra_march, series_table, ACTIVE_IMPL = _select()
NUMBA_ENABLED = ACTIVE_IMPL == "numba"
