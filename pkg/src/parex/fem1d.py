"""P1 finite elements on an interval with homogeneous Dirichlet conditions.

Grid functions are plain 1-D arrays holding the interior nodal values; the
boundary values are zero and never stored.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import NonPositiveDiffusionError
from .polybasis import gauss_legendre

QUAD_NODES = 5
SAMPLES_PER_ELEMENT = 8


@dataclass(frozen=True, eq=False)
class SpaceMesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a space mesh needs at least two elements")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, x_a, x_b, n_elements):
        return cls(np.linspace(x_a, x_b, n_elements + 1))

    @property
    def n_elements(self):
        return self.nodes.size - 1

    @property
    def n_interior(self):
        return self.nodes.size - 2

    @property
    def h(self):
        return np.diff(self.nodes)

    @property
    def interior(self):
        return self.nodes[1:-1]

    @cached_property
    def quadrature(self):
        """Gauss points, weights and weighted hat functions, each (elements, QUAD_NODES)."""
        xg, wg = gauss_legendre(QUAD_NODES)
        h = self.h
        mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        xq = mid[:, None] + 0.5 * h[:, None] * xg[None, :]
        wq = 0.5 * h[:, None] * wg[None, :]
        phi_r = (xq - self.nodes[:-1, None]) / h[:, None]
        return xq, wq, wq * (1.0 - phi_r), wq * phi_r

    def zeros(self):
        return np.zeros(self.n_interior)

    def interpolate(self, func):
        """Nodal interpolant of ``func`` (boundary values are dropped)."""
        return np.asarray(func(self.interior), dtype=float)

    def evaluate(self, values, x):
        """Evaluate the P1 function with interior ``values`` at points ``x``."""
        full = np.zeros(self.nodes.size)
        full[1:-1] = values
        return np.interp(x, self.nodes, full)


def _as_nodes(mesh):
    return mesh.nodes if isinstance(mesh, SpaceMesh) else np.asarray(mesh, dtype=float)


def sample_points(mesh, samples_per_element=SAMPLES_PER_ELEMENT):
    """Equispaced points per element, both endpoints included; shape (elements, samples)."""
    nodes = _as_nodes(mesh)
    r = np.linspace(0.0, 1.0, samples_per_element)
    return nodes[:-1, None] + np.diff(nodes)[:, None] * r[None, :]


def sup_norm_sampled(mesh, v, samples_per_element=SAMPLES_PER_ELEMENT):
    """Sampled maximum norm of ``v`` over the mesh.

    ``v`` is either a callable of ``x`` or an array of interior P1 values.
    """
    if samples_per_element < 2:
        raise ValueError("need at least two samples per element")
    if not callable(v):
        v = np.asarray(v, dtype=float)
        # Piecewise linear: the sampled maximum is attained at a node.
        return float(np.max(np.abs(v), initial=0.0))
    pts = sample_points(mesh, samples_per_element)
    return float(np.max(np.abs(v(pts))))


def quadrature_points(mesh):
    """Gauss points (elements, QUAD_NODES) and the matching weights."""
    xq, wq, _, _ = mesh.quadrature
    return xq, wq


@dataclass(eq=False)
class OperatorMatrices:
    """Symmetric tridiagonal mass and stiffness-plus-reaction matrices."""

    mesh: SpaceMesh
    mass_diag: np.ndarray
    mass_off: np.ndarray
    stiff_diag: np.ndarray
    stiff_off: np.ndarray
    _factors: dict = field(default_factory=dict, repr=False)

    def mass_matvec(self, v):
        return kernels.matvec(self.mass_diag, self.mass_off, np.ascontiguousarray(v))

    def stiff_matvec(self, v):
        return kernels.matvec(self.stiff_diag, self.stiff_off, np.ascontiguousarray(v))

    def stiffness_factor(self):
        fac = self._factors.get("stiffness")
        if fac is None:
            fac = self._factors["stiffness"] = kernels.factor(self.stiff_diag, self.stiff_off)
        return fac

    def mass_factor(self):
        fac = self._factors.get("mass")
        if fac is None:
            fac = self._factors["mass"] = kernels.factor(self.mass_diag, self.mass_off)
        return fac

    def euler_factor(self, delta):
        """Factorisation of ``M/delta + A``, cached per step size."""
        key = ("euler", float(delta))
        fac = self._factors.get(key)
        if fac is None:
            fac = self._factors[key] = kernels.factor(
                self.mass_diag / delta + self.stiff_diag,
                self.mass_off / delta + self.stiff_off,
            )
        return fac

    def dense(self):
        """Dense copies ``(mass, stiffness)``, for tests and small problems."""
        def full(d, o):
            return np.diag(d) + np.diag(o, 1) + np.diag(o, -1)
        return full(self.mass_diag, self.mass_off), full(self.stiff_diag, self.stiff_off)


def assemble(problem, mesh):
    """Assemble mass and ``int d u'v' + r u v`` with 5-point Gauss per element."""
    xq, wq = quadrature_points(mesh)
    d = np.broadcast_to(problem.diffusion(xq), xq.shape)
    r = np.broadcast_to(problem.reaction(xq), xq.shape)
    if np.min(d) <= 0.0:
        raise NonPositiveDiffusionError(f"diffusion must be positive, min is {np.min(d)}")

    nodes = mesh.nodes
    h = np.diff(nodes)
    phi_r = (xq - nodes[:-1, None]) / h[:, None]
    phi_l = 1.0 - phi_r

    m_ll = np.sum(wq * phi_l * phi_l, axis=1)
    m_lr = np.sum(wq * phi_l * phi_r, axis=1)
    m_rr = np.sum(wq * phi_r * phi_r, axis=1)
    k_dd = np.sum(wq * d, axis=1) / h**2
    a_ll = k_dd + np.sum(wq * r * phi_l * phi_l, axis=1)
    a_lr = -k_dd + np.sum(wq * r * phi_l * phi_r, axis=1)
    a_rr = k_dd + np.sum(wq * r * phi_r * phi_r, axis=1)

    # Interior node k (1..N-1) is the right node of element k-1 and the left
    # node of element k.
    return OperatorMatrices(
        mesh=mesh,
        mass_diag=np.ascontiguousarray(m_rr[:-1] + m_ll[1:]),
        mass_off=np.ascontiguousarray(m_lr[1:-1]),
        stiff_diag=np.ascontiguousarray(a_rr[:-1] + a_ll[1:]),
        stiff_off=np.ascontiguousarray(a_lr[1:-1]),
    )


def load_from_quadrature(mesh, gq):
    """Load vector ``(g, phi_k)`` from values of ``g`` at the Gauss points.

    ``gq`` may carry leading batch axes: shape (..., elements, QUAD_NODES).
    """
    _, _, w_left, w_right = mesh.quadrature
    if gq.ndim == 2:
        return kernels.hat_load(np.ascontiguousarray(gq, dtype=float), w_left, w_right)
    right = np.sum(gq * w_right, axis=-1)
    left = np.sum(gq * w_left, axis=-1)
    return np.ascontiguousarray(right[..., :-1] + left[..., 1:])


def load_vector(mesh, g):
    """Load vector of a callable ``g(x)``."""
    xq, _ = quadrature_points(mesh)
    return load_from_quadrature(mesh, np.broadcast_to(g(xq), xq.shape))


def elliptic_solve(mats, load):
    """Discrete elliptic solve ``A y = load``."""
    return kernels.solve(mats.stiffness_factor(), np.ascontiguousarray(load, dtype=float))


def mass_solve(mats, rhs):
    return kernels.solve(mats.mass_factor(), np.ascontiguousarray(rhs, dtype=float))


def euler_substep(mats, v_prev, delta, fvec):
    """One backward Euler step: ``(M/delta + A) v = M v_prev/delta + fvec``."""
    if delta <= 0:
        raise ValueError(f"step size must be positive, got {delta}")
    v_prev = np.asarray(v_prev, dtype=float)
    # Increment form keeps steady states fixed to round-off in v_prev alone.
    return v_prev + kernels.solve(mats.euler_factor(delta), fvec - mats.stiff_matvec(v_prev))
