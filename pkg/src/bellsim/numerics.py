"""Special functions and small numerical utilities.

Everything the physics layers need that is not physics: a region-split
Faddeeva evaluator, complex error functions built on it, cached Gauss-Hermite
quadrature rules, a hand-rolled Nelder-Mead simplex, and bracketed bisection.

All functions here are pure; angles and other arguments are plain radians /
floats with no wrapping or unit handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "faddeeva",
    "erf_c",
    "erfi_c",
    "QuadratureRule",
    "gauss_hermite",
    "SimplexResult",
    "minimize_simplex",
    "bisect",
]

_SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# Faddeeva function w(z) = exp(-z^2) * erfc(-i z)
#
# Region-split evaluation, all regions assuming Im(z) >= 0:
#   |z| <= 1.5      Maclaurin series  w(z) = sum_n (iz)^n / Gamma(n/2 + 1)
#   1.5 < |z| < 8   Weideman's rational approximation (SIAM J. Numer. Anal.
#                   31 (1994) 1497), N = 42 terms
#   |z| >= 8        Gauss continued fraction (Abramowitz & Stegun 7.1.15)
# The lower half plane is reached through w(z) = 2 exp(-z^2) - w(-z).
# Region edges were tuned against an mpmath reference and then frozen by the
# test suite; each method overshoots 1e-13 relative accuracy at its edge.
# ---------------------------------------------------------------------------

# 1 / Gamma(n/2 + 1) for the Maclaurin series.  61 terms keep the truncation
# error below 1e-16 relative at |z| = 1.5.
_SERIES_COEF = np.array([1.0 / math.gamma(0.5 * n + 1.0) for n in range(61)])


def _w_series(z: np.ndarray) -> np.ndarray:
    iz = 1j * z
    acc = np.full(z.shape, _SERIES_COEF[-1], dtype=complex)
    for c in _SERIES_COEF[-2::-1]:
        acc = acc * iz + c
    return acc


def _weideman_setup(n_terms: int):
    # Polynomial coefficients for Weideman's method, computed once at import
    # by the FFT recipe from the paper (his MATLAB function cef).
    big_m = 2 * n_terms
    m2 = 2 * big_m
    k = np.arange(-big_m + 1, big_m)
    length = math.sqrt(n_terms / math.sqrt(2.0))
    t = length * np.tan(k * np.pi / (2.0 * big_m))
    f = np.concatenate(([0.0], np.exp(-t * t) * (length * length + t * t)))
    a = np.fft.fft(np.fft.fftshift(f)).real / m2
    return length, a[1 : n_terms + 1][::-1].copy()


_WEIDEMAN_L, _WEIDEMAN_A = _weideman_setup(42)


def _w_weideman(z: np.ndarray) -> np.ndarray:
    length = _WEIDEMAN_L
    iz = 1j * z
    zz = (length + iz) / (length - iz)
    p = np.polyval(_WEIDEMAN_A, zz)
    return 2.0 * p / (length - iz) ** 2 + (1.0 / _SQRT_PI) / (length - iz)


def _w_contfrac(z: np.ndarray, depth: int = 40) -> np.ndarray:
    r = np.zeros_like(z)
    for k in range(depth, 0, -1):
        r = (0.5 * k) / (z - r)
    return 1j / _SQRT_PI / (z - r)


def _faddeeva_upper(z: np.ndarray) -> np.ndarray:
    w = np.empty(z.shape, dtype=complex)
    az = np.abs(z)
    small = az <= 1.5
    big = az >= 8.0
    mid = ~(small | big)
    if small.any():
        w[small] = _w_series(z[small])
    if mid.any():
        w[mid] = _w_weideman(z[mid])
    if big.any():
        w[big] = _w_contfrac(z[big])
    return w


def faddeeva(z):
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz).

    Accepts a complex scalar or array; returns the same shape.  Relative
    accuracy is ~1e-13 or better for |z| <= 30 in the upper half plane.  In
    the lower half plane the reflection w(z) = 2 exp(-z^2) - w(-z) is used,
    so the result overflows to inf exactly where the true value exceeds
    double-precision range (Im z deeply negative).
    """
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("faddeeva: input must be finite")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    lower = arr.imag < 0.0
    w = _faddeeva_upper(np.where(lower, -arr, arr))
    if lower.any():
        zl = arr[lower]
        with np.errstate(over="ignore"):
            w[lower] = 2.0 * np.exp(-zl * zl) - w[lower]
    return complex(w[0]) if scalar else w


def erf_c(z):
    """Error function for complex argument, via the Faddeeva identity.

    erf(z) = 1 - exp(-z^2) w(iz) for Re z >= 0; the left half plane goes
    through the odd reflection erf(-z) = -erf(z), so parity holds exactly.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    neg = arr.real < 0.0
    zr = np.where(neg, -arr, arr)
    out = 1.0 - np.exp(-zr * zr) * np.atleast_1d(faddeeva(1j * zr))
    out[neg] = -out[neg]
    return complex(out[0]) if scalar else out


def erfi_c(z):
    """Imaginary error function erfi(z) = -i erf(iz) for complex argument."""
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    out = -1j * np.atleast_1d(erf_c(1j * np.atleast_1d(arr)))
    return complex(out[0]) if scalar else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# Gauss-Hermite quadrature (weight exp(-x^2) on the whole real line)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrating exp(-x^2) f(x) over the real line."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int


@lru_cache(maxsize=None)
def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule of the given order (1 <= order <= 128).

    Exact for polynomials of degree <= 2*order - 1; weights sum to sqrt(pi).
    Rules are cached, and the returned arrays are marked read-only.
    """
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= 128:
        raise ValueError(f"gauss_hermite: order out of range [1, 128]: {order!r}")
    nodes, weights = np.polynomial.hermite.hermgauss(int(order))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=int(order))


# ---------------------------------------------------------------------------
# Nelder-Mead simplex minimizer
# ---------------------------------------------------------------------------


class SimplexResult(NamedTuple):
    point: np.ndarray
    value: float
    converged: bool
    iterations: int


def minimize_simplex(
    f: Callable[[np.ndarray], float],
    start: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 2000,
) -> SimplexResult:
    """Minimize f over R^k (k <= 8) with the Nelder-Mead simplex.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 0.5, 0.5).  Stops when the simplex diameter (max inf-norm distance
    from the best vertex) drops below tol, or after max_iter iterations; the
    latter is reported through the ``converged`` flag, not an exception.  The
    returned value is f evaluated at the returned point.
    """
    x0 = np.asarray(start, dtype=float).ravel()
    k = x0.size
    if k == 0 or k > 8:
        raise ValueError(f"minimize_simplex: dimension must be 1..8, got {k}")

    # Initial simplex: perturb each coordinate by 5% (or a small absolute
    # step for zero coordinates), same convention as common implementations.
    verts = np.tile(x0, (k + 1, 1))
    for i in range(k):
        if verts[i + 1, i] != 0.0:
            verts[i + 1, i] *= 1.05
        else:
            verts[i + 1, i] = 0.00025
    fvals = np.array([f(v) for v in verts], dtype=float)

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fvals)
        verts, fvals = verts[order], fvals[order]
        if np.max(np.abs(verts[1:] - verts[0])) < tol:
            converged = True
            break
        it += 1

        centroid = verts[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - verts[-1])
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + gamma * (centroid - verts[-1])
            fe = f(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + rho * (xr - centroid)
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = centroid + rho * (verts[-1] - centroid)
                fc = f(xc)
                accept = fc < fvals[-1]
            if accept:
                verts[-1], fvals[-1] = xc, fc
            else:
                verts[1:] = verts[0] + sigma * (verts[1:] - verts[0])
                fvals[1:] = [f(v) for v in verts[1:]]

    best = int(np.argmin(fvals))
    return SimplexResult(
        point=verts[best].copy(),
        value=float(fvals[best]),
        converged=converged,
        iterations=it,
    )


# ---------------------------------------------------------------------------
# Bisection
# ---------------------------------------------------------------------------


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Root of f on [lo, hi] by bisection, to within tol.

    Requires a sign change on the bracket (f(lo) * f(hi) <= 0).
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(
            f"bisect: no sign change on bracket: f({lo}) = {flo}, f({hi}) = {fhi}"
        )
    # Bound the loop count explicitly; tol <= 0 would otherwise spin forever.
    n_steps = max(1, int(math.ceil(math.log2(max((hi - lo) / max(tol, 1e-300), 1.0)))) + 2)
    for _ in range(n_steps):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
