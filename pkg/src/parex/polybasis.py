"""Legendre and integrated Legendre polynomials on [-1, 1].

Everything here works on scalars or NumPy arrays of reference coordinates.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateIntervalError, InvalidDegreeError


def legendre_table(n, xi):
    """Return ``P_0(xi), ..., P_n(xi)`` stacked along a new leading axis."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n + 1,) + xi.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = xi
    for k in range(1, n):
        out[k + 1] = ((2 * k + 1) * xi * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_eval(i, xi):
    """Legendre polynomial ``P_i`` by the three-term recurrence."""
    if i < 0:
        raise InvalidDegreeError(f"degree must be >= 0, got {i}")
    assert np.all(np.abs(np.asarray(xi)) <= 1.0 + 1e-12), "xi outside [-1, 1]"
    return legendre_table(i, xi)[i]


def integrated_legendre_eval(i, xi):
    """``N_i(xi) = int_{-1}^{xi} P_{i-1}``, evaluated as ``(P_i - P_{i-2})/(2i-1)``."""
    if i < 2:
        raise InvalidDegreeError(f"integrated Legendre degree must be >= 2, got {i}")
    table = legendre_table(i, xi)
    return (table[i] - table[i - 2]) / (2 * i - 1)


def delta_basis(n_terms, xi):
    """Values of ``1, P_1, N_2, ..., N_{n_terms-1}`` at ``xi``.

    This is the basis in which every temporal reconstruction is stored.
    """
    table = legendre_table(max(n_terms - 1, 1), xi)
    out = np.empty((n_terms,) + np.shape(xi))
    out[0] = 1.0
    if n_terms > 1:
        out[1] = table[1]
    for i in range(2, n_terms):
        out[i] = (table[i] - table[i - 2]) / (2 * i - 1)
    return out


def legendre_roots(i, tol=1e-15, maxiter=100):
    """Roots of ``P_i`` by Newton's method from Chebyshev-like initial guesses."""
    if i == 0:
        return np.empty(0)
    k = np.arange(1, i + 1)
    x = np.cos(np.pi * (4 * k - 1) / (4 * i + 2))
    for _ in range(maxiter):
        table = legendre_table(i, x)
        p, pm1 = table[i], table[i - 1]
        dp = i * (pm1 - x * p) / (1.0 - x * x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    return np.sort(x)


@lru_cache(maxsize=None)
def legendre_l1_norm(i):
    """``||P_i||_{L1(-1,1)}``, integrating exactly between consecutive roots."""
    if i < 0:
        raise InvalidDegreeError(f"degree must be >= 0, got {i}")
    if i == 0:
        return 2.0
    # On each sub-interval P_i has one sign, and its antiderivative is N_{i+1}.
    pts = np.concatenate(([-1.0], legendre_roots(i), [1.0]))
    table = legendre_table(i + 1, pts)
    antider = (table[i + 1] - table[i - 1]) / (2 * i + 1)
    return float(np.sum(np.abs(np.diff(antider))))


def legendre_inf_norm_derivative(i):
    """``||P_i'||_{inf,(-1,1)} = P_i'(1) = i(i+1)/2``."""
    if i < 1:
        raise InvalidDegreeError(f"degree must be >= 1, got {i}")
    return i * (i + 1) / 2


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class IntervalMap:
    """Affine map of ``[t_left, t_right]`` onto ``[-1, 1]``."""

    t_left: float
    t_right: float

    def __post_init__(self):
        if not self.t_left < self.t_right:
            raise DegenerateIntervalError(
                f"need t_left < t_right, got [{self.t_left}, {self.t_right}]"
            )

    @property
    def length(self):
        return self.t_right - self.t_left

    @property
    def midpoint(self):
        return 0.5 * (self.t_left + self.t_right)

    def forward(self, s):
        return 2.0 * (np.asarray(s, dtype=float) - self.midpoint) / self.length

    def inverse(self, xi):
        return self.midpoint + 0.5 * self.length * np.asarray(xi, dtype=float)


def interval_map(t_left, t_right):
    return IntervalMap(float(t_left), float(t_right))
