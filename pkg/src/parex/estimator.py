"""Maximum-norm a posteriori error estimator for the extrapolated scheme.

The bound at the final time is the sum of four parts: the initial
interpolation error, the time interpolation error of the source, the
temporal reconstruction residual and the elliptic (spatial) error, each
weighted by the Green's function bounds of the parabolic operator.
"""
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy import integrate

from . import fem1d
from .errors import NonPositiveDiffusionError
from .polybasis import delta_basis, gauss_legendre, legendre_l1_norm
from .reconstruct import psi_plus_dudt_coeffs


@dataclass(frozen=True)
class GreenFunctionBounds:
    """``||G(t)||_1 <= kappa0 e^{-gamma t}``, ``||dG/dt(t)||_1 <= (kappa1/t + kappa1_prime) e^{-gamma t}``."""

    kappa0: float
    kappa1: float
    kappa1_prime: float
    gamma: float

    def __post_init__(self):
        for name in ("kappa0", "kappa1", "kappa1_prime", "gamma"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


def sigma(j, tmesh, gamma):
    return math.exp(-gamma * (tmesh.T - float(tmesh.nodes[j])))


def _weight_closed_form(tau, dist):
    """``int_0^tau s (tau - s) / (dist + tau - s) ds`` for ``dist = T - t_j >= 0``."""
    if dist == 0.0:
        return 0.5 * tau * tau
    x = tau / dist
    if x < 0.5:
        # tau^2/2 + dist*tau - dist*(dist+tau)*log(1+x) cancels badly for small x.
        n = np.arange(3, 64)
        terms = (-1.0) ** (n + 1) * x**n / (n * (n - 1))
        return dist * dist * math.fsum(terms[::-1])
    return 0.5 * tau * tau + dist * tau - dist * (dist + tau) * math.log1p(x)


def weight_integral_quad(j, tmesh):
    """Adaptive quadrature of ``int_{I_j} (t_j-t)(t-t_{j-1})/(T-t) dt``."""
    t0, t1 = tmesh.interval(j)
    T = tmesh.T
    if j == tmesh.n_intervals:
        return 0.5 * (t1 - t0) ** 2
    val, _ = integrate.quad(
        lambda t: (t1 - t) * (t - t0) / (T - t), t0, t1, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return val


def weight_integral(j, tmesh, method="closed"):
    """``int_{I_j} (t_j-t)(t-t_{j-1})/(T-t) dt``; ``method`` is "closed" or "quad"."""
    if method == "quad":
        return weight_integral_quad(j, tmesh)
    t0, t1 = tmesh.interval(j)
    return _weight_closed_form(t1 - t0, tmesh.T - t1)


def mu(j, i, tmesh, bounds):
    """Weight bounding ``|int_{I_j} <v, G(T-s)> P_i(xi_j(s)) ds| / (sigma_j ||v||_inf)``."""
    tau = tmesh.tau(j)
    if i == 0:
        return bounds.kappa0 * tau
    direct = 0.5 * bounds.kappa0 * tau * legendre_l1_norm(i)
    by_parts = bounds.kappa1 / tau * weight_integral(j, tmesh) + bounds.kappa1_prime * tau**2 / 6.0
    return min(direct, by_parts)


class EllipticEstimator(Protocol):
    """Bound on ``||y_h - y||_inf`` for the elliptic problem ``L y = g``."""

    def estimate(self, y_h, g) -> float: ...


class ZeroEstimator:
    def __init__(self, mesh=None):
        self.mesh = mesh

    def estimate(self, y_h, g):
        return 0.0


class DefaultEllipticEstimator:
    """Residual estimator for P1 elements in 1D.

    Elementwise ``(h^2/8) max |g - r y_h + d' y_h'| / d_min`` bounds the
    interpolation part of the error.  The nodal error of the Galerkin
    solution is bounded by the same quantity times ``theta = min(1, r_max
    (b-a)^2/(8 d_min))`` (it vanishes when ``r = 0``), and the factor
    ``1/(1 - rho)`` with ``rho = max h^2 r_max/(8 d_min)`` accounts for
    evaluating the residual at ``y_h`` rather than ``y``.  Sound for constant
    diffusion up to sampling and quadrature of ``g``.
    """

    def __init__(self, problem, mesh, samples_per_element=fem1d.SAMPLES_PER_ELEMENT,
                 nodal_correction=True):
        self.mesh = mesh
        self.points = fem1d.sample_points(mesh, samples_per_element)
        pts = self.points
        d = np.broadcast_to(problem.diffusion(pts), pts.shape)
        self.d_min = float(np.min(d))
        if self.d_min <= 0.0:
            raise NonPositiveDiffusionError(f"diffusion must be positive, min is {self.d_min}")
        self.reaction = np.broadcast_to(problem.reaction(pts), pts.shape)
        if problem.diffusion_derivative is not None:
            dd = np.broadcast_to(problem.diffusion_derivative(pts), pts.shape)
        else:
            dd = np.zeros(pts.shape)
        self.diffusion_derivative = dd
        self.has_drift = bool(np.any(dd != 0.0))
        h = mesh.h
        self.h2_8 = h**2 / (8.0 * self.d_min)
        r_max = max(float(np.max(self.reaction)), 0.0)
        length = mesh.nodes[-1] - mesh.nodes[0]
        theta = min(1.0, r_max * length**2 / (8.0 * self.d_min)) if nodal_correction else 0.0
        rho = float(np.max(self.h2_8)) * r_max if nodal_correction else 0.0
        self.factor = (1.0 + theta) / (1.0 - rho) if rho < 1.0 else math.inf

    def residual(self, y_h, g):
        pts = self.points
        res = np.broadcast_to(g(pts), pts.shape) - self.reaction * self.mesh.evaluate(y_h, pts)
        if self.has_drift:
            full = np.zeros(self.mesh.nodes.size)
            full[1:-1] = y_h
            slope = np.diff(full) / self.mesh.h
            res = res + self.diffusion_derivative * slope[:, None]
        return res

    def estimate(self, y_h, g):
        res = self.residual(y_h, g)
        return self.factor * float(np.max(self.h2_8 * np.max(np.abs(res), axis=1)))


def default_elliptic_estimator(problem, mesh):
    return DefaultEllipticEstimator(problem, mesh)


@dataclass
class EstimatorReport:
    eta_init: float
    eta_f: float
    eta_t: float
    eta_ell: float
    total: float
    sigma: np.ndarray
    mu: np.ndarray
    eta_f_intervals: np.ndarray
    eta_t_intervals: np.ndarray
    eta_ell_intervals: np.ndarray
    eta_ell_endpoints: tuple = field(default=(0.0, 0.0))

    def components(self):
        return {
            "eta_init": self.eta_init,
            "eta_f": self.eta_f,
            "eta_t": self.eta_t,
            "eta_ell": self.eta_ell,
        }


def sigmas(tmesh, gamma):
    return np.array([sigma(j, tmesh, gamma) for j in range(tmesh.n_intervals + 1)])


def mu_table(tmesh, bounds, order):
    """``mu[j-1, i]`` for ``j = 1..M``, ``i = 0..order-1``."""
    return np.array(
        [[mu(j, i, tmesh, bounds) for i in range(order)] for j in range(1, tmesh.n_intervals + 1)]
    )


def eta_init(initial, u_h0, mesh, bounds, tmesh):
    err = fem1d.sup_norm_sampled(mesh, lambda x: initial(x) - mesh.evaluate(u_h0, x))
    return bounds.kappa0 * sigma(0, tmesh, bounds.gamma) * err


def eta_f_intervals(source, f, mesh, bounds, tmesh):
    """Per-interval ``kappa0 sigma_j int_{I_j} ||f - fhat||_inf``, Gauss in time."""
    pts = fem1d.sample_points(mesh)
    xg, wg = gauss_legendre(2 * source.order + 2)
    basis = delta_basis(source.order, xg)
    out = np.empty(tmesh.n_intervals)
    for j in range(1, tmesh.n_intervals + 1):
        slab = source.slab(j, pts)
        fhat = np.tensordot(basis, slab.coeffs, axes=(0, 0))
        t0, t1 = tmesh.interval(j)
        times = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xg
        sup = [np.max(np.abs(np.broadcast_to(f(pts, t), pts.shape) - fh)) for t, fh in zip(times, fhat)]
        integral = 0.5 * (t1 - t0) * float(np.dot(wg, sup))
        out[j - 1] = bounds.kappa0 * sigma(j, tmesh, bounds.gamma) * integral
    return out


def eta_f(source, f, mesh, bounds, tmesh):
    return float(np.sum(eta_f_intervals(source, f, mesh, bounds, tmesh)))


def eta_t_intervals(recon, bounds, mus=None):
    tmesh, order = recon.tmesh, recon.order
    mus = mus if mus is not None else mu_table(tmesh, bounds, order)
    out = np.empty(tmesh.n_intervals)
    for j in range(1, tmesh.n_intervals + 1):
        a, b = psi_plus_dudt_coeffs(recon, j)
        out[j - 1] = sigma(j, tmesh, bounds.gamma) * (
            mus[j - 1, order - 2] * np.max(np.abs(a), initial=0.0)
            + mus[j - 1, order - 1] * np.max(np.abs(b), initial=0.0)
        )
    return out


def eta_t(recon, bounds):
    return float(np.sum(eta_t_intervals(recon, bounds)))


def _p1_plus(mesh, values, base):
    return lambda x: base(x) + mesh.evaluate(values, x)


def eta_ell_parts(estimator, recon, traj, f, bounds):
    """``(eta_ell^0, eta_ell^M, per-interval terms)`` with the kappa0 sigma weights applied."""
    tmesh, order, mesh = recon.tmesh, recon.order, recon.mesh
    T = tmesh.T
    kappa0 = bounds.kappa0
    e0 = estimator.estimate(traj.u[0], _p1_plus(mesh, traj.psi[0], lambda x: f(x, 0.0)))
    e_m = estimator.estimate(traj.u[-1], _p1_plus(mesh, traj.psi[-1], lambda x: f(x, T)))
    out = np.empty(tmesh.n_intervals)
    for j in range(1, tmesh.n_intervals + 1):
        cache = {}

        def fhat_coeff(i, x, j=j, cache=cache):
            key = id(x)
            if key not in cache:
                cache[key] = (x, recon.source.slab(j, x).coeffs)
            return cache[key][1][i]

        acc = 0.0
        for i in range(1, order):
            g = _p1_plus(mesh, recon.dpsi[j - 1, i], lambda x, i=i: fhat_coeff(i, x))
            acc += estimator.estimate(recon.du[j - 1, i], g) * legendre_l1_norm(i - 1)
        out[j - 1] = kappa0 * sigma(j, tmesh, bounds.gamma) * acc
    endpoints = (kappa0 * sigma(0, tmesh, bounds.gamma) * e0, kappa0 * e_m)
    return endpoints, out


def assemble_report(eta_init_value, eta_f_j, eta_t_j, ell_endpoints, eta_ell_j, sigma_values, mus):
    """Sum the components in the fixed order init, f, t, ell."""
    ef = float(np.sum(eta_f_j))
    et = float(np.sum(eta_t_j))
    ee = (ell_endpoints[0] + ell_endpoints[1]) + float(np.sum(eta_ell_j))
    total = ((eta_init_value + ef) + et) + ee
    return EstimatorReport(
        eta_init=float(eta_init_value), eta_f=ef, eta_t=et, eta_ell=ee, total=total,
        sigma=sigma_values, mu=mus,
        eta_f_intervals=eta_f_j, eta_t_intervals=eta_t_j, eta_ell_intervals=eta_ell_j,
        eta_ell_endpoints=tuple(ell_endpoints),
    )


def estimate_error(problem, traj, recon, bounds=None, estimator=None):
    """Full estimator for a run; ``estimator`` defaults to the residual estimator."""
    bounds = bounds if bounds is not None else problem.green_bounds
    mesh, tmesh = traj.mesh, traj.tmesh
    if estimator is None:
        estimator = DefaultEllipticEstimator(problem, mesh)
    mus = mu_table(tmesh, bounds, recon.order)
    init = eta_init(problem.initial, traj.u[0], mesh, bounds, tmesh)
    ef = eta_f_intervals(recon.source, problem.source, mesh, bounds, tmesh)
    et = eta_t_intervals(recon, bounds, mus)
    ends, ell = eta_ell_parts(estimator, recon, traj, problem.source, bounds)
    return assemble_report(init, ef, et, ends, ell, sigmas(tmesh, bounds.gamma), mus)
