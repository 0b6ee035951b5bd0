"""Piecewise polynomial temporal reconstructions.

On each time interval a degree ``L-1`` polynomial is stored by its
coefficients in the basis ``1, P_1, N_2, ..., N_{L-1}`` of the reference
coordinate (the "delta" coefficients).  Since every ``N_i`` vanishes at
both ends, the first two coefficients are the mean and half-difference of
the endpoint values, and the reconstruction is continuous by construction.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fem1d
from .errors import OutOfIntervalError, SingularCollocationError
from .polybasis import IntervalMap, delta_basis


@dataclass(frozen=True, eq=False)
class DeltaSlab:
    """Delta coefficients of one polynomial piece on ``[t_left, t_right]``.

    ``coeffs[i]`` is the coefficient of the i-th basis function; trailing
    axes are spatial (a grid function, or samples of a field).
    """

    t_left: float
    t_right: float
    coeffs: np.ndarray

    @property
    def order(self):
        return self.coeffs.shape[0]

    @property
    def tau(self):
        return self.t_right - self.t_left

    @property
    def map(self):
        return IntervalMap(self.t_left, self.t_right)

    def __call__(self, t):
        return eval_slab(self, t)

    def derivative_coeffs(self):
        return dudt_slab(self)


def eval_slab(slab, t):
    """Value of the piece at time ``t`` (scalar)."""
    tol = 1e-12 * max(abs(slab.t_left), abs(slab.t_right), slab.tau)
    if not slab.t_left - tol <= t <= slab.t_right + tol:
        raise OutOfIntervalError(f"t={t} outside [{slab.t_left}, {slab.t_right}]")
    xi = float(np.clip(slab.map.forward(t), -1.0, 1.0))
    basis = delta_basis(slab.order, xi)
    return np.tensordot(basis, slab.coeffs, axes=(0, 0))


def dudt_slab(slab):
    """Time derivative in the Legendre basis: coefficient of ``P_{i-1}`` is ``(2/tau) Delta^i``."""
    return (2.0 / slab.tau) * slab.coeffs[1:]


@lru_cache(maxsize=None)
def _interior_solver(xi_nodes):
    xi = np.asarray(xi_nodes)
    if np.min(np.diff(np.sort(xi))) <= 1e-12:
        raise SingularCollocationError(f"interpolation nodes coincide: {xi}")
    order = xi.size
    if order <= 2:
        return None
    mat = delta_basis(order, xi[1:-1])[2:].T
    return np.linalg.inv(mat)


def to_delta_basis(values, xi_nodes):
    """Delta coefficients of the polynomial through ``values`` at ``xi_nodes``.

    ``values`` has shape (L, ...) with one row per node.  When the nodes
    include both endpoints, the first two coefficients come straight from the
    endpoint values and only the bubble coefficients are solved for.
    """
    values = np.asarray(values, dtype=float)
    xi = tuple(float(v) for v in xi_nodes)
    order = len(xi)
    if order != values.shape[0]:
        raise ValueError("one value row per node required")
    if len(set(xi)) != order:
        raise SingularCollocationError(f"interpolation nodes coincide: {xi}")
    if xi[0] != -1.0 or xi[-1] != 1.0:
        mat = delta_basis(order, np.asarray(xi)).T
        if np.linalg.cond(mat) > 1e12:
            raise SingularCollocationError("collocation matrix is singular")
        flat = values.reshape(order, -1)
        return np.linalg.solve(mat, flat).reshape(values.shape)

    out = np.empty_like(values)
    out[0] = 0.5 * (values[-1] + values[0])
    out[1] = 0.5 * (values[-1] - values[0])
    inv = _interior_solver(xi)
    if inv is not None:
        interior = np.asarray(xi[1:-1])
        rest = values[1:-1] - out[0] - np.multiply.outer(interior, out[1]).reshape(
            (order - 2,) + values.shape[1:]
        )
        out[2:] = np.tensordot(inv, rest, axes=(1, 0))
    return out


def interpolation_nodes(order, kind="equispaced"):
    """Reference nodes of the source interpolant, endpoints always included."""
    if kind == "equispaced":
        return tuple(np.linspace(-1.0, 1.0, order))
    if kind == "chebyshev":
        k = np.arange(order)
        xi = -np.cos(np.pi * k / (order - 1))
        xi[0], xi[-1] = -1.0, 1.0
        return tuple(xi)
    raise ValueError(f"unknown node family {kind!r}")


class InterpolatedSource:
    """The piecewise polynomial interpolant in time of the source term.

    On each interval ``f`` is interpolated, pointwise in ``x``, at ``L``
    nodes including both endpoints.  The interpolant is continuous in time.
    """

    def __init__(self, source, tmesh, order, mesh=None, nodes="equispaced"):
        self.source = source
        self.tmesh = tmesh
        self.order = order
        self.mesh = mesh
        self.xi_nodes = interpolation_nodes(order, nodes)
        self._load_cache = {}

    def node_times(self, j):
        return IntervalMap(*self.tmesh.interval(j)).inverse(np.asarray(self.xi_nodes))

    def _load_at(self, t):
        load = self._load_cache.get(t)
        if load is None:
            xq, _ = fem1d.quadrature_points(self.mesh)
            fq = np.broadcast_to(self.source(xq, t), xq.shape)
            load = fem1d.load_from_quadrature(self.mesh, fq)
            self._load_cache[t] = load
        return load

    def load_slab(self, j):
        """Delta coefficients of the load vectors ``(fhat, phi_k)`` on interval j."""
        t_left, t_right = self.tmesh.interval(j)
        times = self.node_times(j)
        times[0], times[-1] = t_left, t_right
        loads = np.stack([self._load_at(float(t)) for t in times])
        # Only the right endpoint load is reused, by the next interval.
        self._load_cache = {t_right: loads[-1]}
        return DeltaSlab(t_left, t_right, to_delta_basis(loads, self.xi_nodes))

    def slab(self, j, x):
        """Delta coefficients of ``fhat`` sampled at spatial points ``x`` on interval j."""
        times = self.node_times(j)
        times[0], times[-1] = self.tmesh.interval(j)
        x = np.asarray(x, dtype=float)
        vals = np.stack([np.broadcast_to(self.source(x, float(t)), x.shape) for t in times])
        t_left, t_right = self.tmesh.interval(j)
        return DeltaSlab(t_left, t_right, to_delta_basis(vals, self.xi_nodes))

    def __call__(self, x, t):
        j = self.tmesh.locate(t)
        return eval_slab(self.slab(j, x), t)


def interpolate_f(problem, tmesh, order, mesh=None, nodes="equispaced"):
    return InterpolatedSource(problem.source, tmesh, order, mesh=mesh, nodes=nodes)


@dataclass(eq=False)
class ReconstructionSet:
    """Delta coefficients of ``u_h``, ``psi`` and the source loads, per interval.

    Arrays have shape (M, L, n): interval, coefficient index, interior node.
    Interval ``j`` (1-based, as in the time mesh) lives in row ``j - 1``.
    """

    tmesh: object
    order: int
    du: np.ndarray
    dpsi: np.ndarray
    dload: np.ndarray
    source: InterpolatedSource
    mesh: fem1d.SpaceMesh

    def _slab(self, arr, j):
        t_left, t_right = self.tmesh.interval(j)
        return DeltaSlab(t_left, t_right, arr[j - 1])

    def u_slab(self, j):
        return self._slab(self.du, j)

    def psi_slab(self, j):
        return self._slab(self.dpsi, j)

    def load_slab(self, j):
        return self._slab(self.dload, j)


def build_reconstruction(traj, mats, source=None):
    """Build the delta coefficients of ``u_h`` and ``psi`` on every interval.

    The first two coefficients follow from the nodal values.  Higher ones
    alternate: a bubble coefficient of ``psi`` is fixed so that the expansion
    of ``psi + du_h/dt`` loses its low Legendre modes, and the matching
    coefficient of ``u_h`` is the discrete elliptic solve with that data.
    """
    source = source if source is not None else traj.source
    tmesh = traj.tmesh
    order = traj.tableau.order
    m_int, n = tmesh.n_intervals, traj.u.shape[1]
    du = np.zeros((m_int, order, n))
    dpsi = np.zeros((m_int, order, n))
    dload = np.zeros((m_int, order, n))
    for j in range(1, m_int + 1):
        tau = tmesh.tau(j)
        row = j - 1
        du[row, 0] = 0.5 * (traj.u[j] + traj.u[j - 1])
        du[row, 1] = 0.5 * (traj.u[j] - traj.u[j - 1])
        dpsi[row, 0] = 0.5 * (traj.psi[j] + traj.psi[j - 1])
        dpsi[row, 1] = 0.5 * (traj.psi[j] - traj.psi[j - 1])
        dload[row] = source.load_slab(j).coeffs
        if order < 3:
            continue
        dpsi[row, 2] = 3.0 * (dpsi[row, 0] + (2.0 / tau) * du[row, 1])
        for i in range(2, order):
            du[row, i] = fem1d.elliptic_solve(
                mats, mats.mass_matvec(dpsi[row, i]) + dload[row, i]
            )
            if i + 1 < order:
                dpsi[row, i + 1] = (2 * i + 1) * (
                    dpsi[row, i - 1] / (2 * i - 3) + (2.0 / tau) * du[row, i]
                )
    return ReconstructionSet(tmesh, order, du, dpsi, dload, source, mats.mesh)


def psi_plus_dudt_coeffs(recon, j):
    """Coefficients ``(A, B)`` with ``psi + du_h/dt = A P_{L-2} + B P_{L-1}`` on interval j."""
    order = recon.order
    tau = recon.tmesh.tau(j)
    du, dpsi = recon.du[j - 1], recon.dpsi[j - 1]
    if order == 2:
        return dpsi[0] + (2.0 / tau) * du[1], dpsi[1].copy()
    a = dpsi[order - 2] / (2 * order - 5) + (2.0 / tau) * du[order - 1]
    b = dpsi[order - 1] / (2 * order - 3)
    return a, b
