"""Gauss-Lobatto-Legendre (GLL) nodal machinery.

Everything downstream (element geometry, quadrature, the local operator)
consumes a single immutable :class:`SpectralBasis`: the order-N GLL points on
[-1, 1], the matching quadrature weights, and the nodal differentiation
matrix whose entry [i][j] is the derivative of the j-th Lagrange cardinal
polynomial evaluated at the i-th point.

All arithmetic is FP64.  Quadrature on the GLL points is exact for
polynomials of degree <= 2N - 1, nodal differentiation is exact for degree
<= N; both properties are exercised by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralBasis",
    "legendre_and_derivative",
    "gll_points",
    "gll_weights",
    "diff_matrix",
]

_NEWTON_TOL = 1e-15
_NEWTON_MAX_STEPS = 100


def legendre_and_derivative(n: int, x):
    """Legendre polynomial of degree n and its first derivative at x.

    Uses the three-term recurrence together with its derivative, so the
    result is valid on the whole closed interval including the endpoints.
    Accepts a scalar or an ndarray and returns a matching pair.
    """
    if n < 0:
        raise ValueError("polynomial degree must be nonnegative")
    x_arr = np.asarray(x, dtype=float)
    p = np.ones_like(x_arr)
    dp = np.zeros_like(x_arr)
    if n >= 1:
        p_prev, dp_prev = p, dp
        p = x_arr.astype(float, copy=True)
        dp = np.ones_like(x_arr)
        for k in range(1, n):
            a = (2.0 * k + 1.0) / (k + 1.0)
            b = k / (k + 1.0)
            p_next = a * x_arr * p - b * p_prev
            dp_next = a * (p + x_arr * dp) - b * dp_prev
            p_prev, dp_prev = p, dp
            p, dp = p_next, dp_next
    if x_arr.ndim == 0:
        return float(p), float(dp)
    return p, dp


def gll_points(n: int) -> np.ndarray:
    """GLL points of order n, ascending: -1, the roots of L_n', and +1.

    Interior points start from Chebyshev-Lobatto estimates and are polished
    by Newton iteration on L_n' (second derivative from the Legendre ODE)
    to a step tolerance of 1e-15, then symmetrized about the origin.
    """
    if n < 1:
        raise ValueError("order must be at least 1")
    pts = np.empty(n + 1)
    pts[0] = -1.0
    pts[n] = 1.0
    for i in range(1, n):
        x = -np.cos(np.pi * i / n)
        for _ in range(_NEWTON_MAX_STEPS):
            p, dp = legendre_and_derivative(n, x)
            d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
            step = dp / d2p
            x -= step
            if abs(step) < _NEWTON_TOL:
                break
        else:
            raise RuntimeError(f"GLL root refinement did not converge for order {n}")
        pts[i] = x
    # enforce exact antisymmetry, including an exact zero for odd counts
    return 0.5 * (pts - pts[::-1])


def gll_weights(n: int, points: np.ndarray) -> np.ndarray:
    """Quadrature weights 2 / [n (n+1) L_n(x)^2] at the given GLL points."""
    ln, _ = legendre_and_derivative(n, points)
    w = 2.0 / (n * (n + 1) * ln * ln)
    return 0.5 * (w + w[::-1])


def diff_matrix(n: int, points: np.ndarray) -> np.ndarray:
    """Nodal differentiation matrix on the GLL points, closed form.

    Off-diagonal entries are L_n(x_i) / (L_n(x_j) (x_i - x_j)); the only
    nonzero diagonal entries are the two corners -n(n+1)/4 and +n(n+1)/4.
    """
    ln, _ = legendre_and_derivative(n, points)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = ln[:, None] / (ln[None, :] * (points[:, None] - points[None, :]))
    np.fill_diagonal(d, 0.0)
    d[0, 0] = -0.25 * n * (n + 1)
    d[n, n] = 0.25 * n * (n + 1)
    return d


@dataclass(frozen=True)
class SpectralBasis:
    """Immutable bundle of GLL data shared by every kernel of one order."""

    order: int
    points: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray

    @classmethod
    def build(cls, order: int) -> "SpectralBasis":
        pts = gll_points(order)
        wts = gll_weights(order, pts)
        dmat = diff_matrix(order, pts)
        for arr in (pts, wts, dmat):
            arr.flags.writeable = False
        return cls(order=order, points=pts, weights=wts, diff_matrix=dmat)

    @property
    def n1(self) -> int:
        """Points per direction, order + 1."""
        return self.order + 1

    def tensor_weights(self) -> np.ndarray:
        """Flat (n1**3,) array of w_i w_j w_k in the i-fastest node ordering."""
        w = self.weights
        return np.einsum("k,j,i->kji", w, w, w).ravel()
