"""Richardson extrapolation of the backward Euler method.

For every time interval, level ``l = 1..L`` runs ``l`` backward Euler
substeps of size ``tau/l`` from the previous accepted state; the accepted
state is the combination ``sum_l alpha_l v_l``.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy

from . import fem1d, kernels
from .errors import IllConditionedTableauError, InvalidOrderError
from .polybasis import delta_basis
from .reconstruct import InterpolatedSource


@dataclass(frozen=True)
class ExtrapolationTableau:
    order: int
    alpha: tuple


@lru_cache(maxsize=None)
def _exact_weights(order):
    # Rational solve: the system is Vandermonde-like and loses digits in floats.
    mat = sympy.Matrix(order, order, lambda m, l: sympy.Rational(1, (l + 1) ** m))
    rhs = sympy.Matrix([1] + [0] * (order - 1))
    return tuple(float(a) for a in mat.LUsolve(rhs))


def extrapolation_tableau(order):
    """Weights with ``sum alpha_l = 1`` and ``sum alpha_l l^-m = 0`` for ``m = 1..L-1``."""
    if order < 2:
        raise InvalidOrderError(f"L must be >= 2, got {order}")
    alpha = np.array(_exact_weights(order), dtype=float)
    levels = np.arange(1, order + 1, dtype=float)
    mat = levels[None, :] ** -np.arange(order, dtype=float)[:, None]
    rhs = np.zeros(order)
    rhs[0] = 1.0
    resid = np.max(np.abs(mat @ alpha - rhs))
    if not resid <= 1e-10:
        raise IllConditionedTableauError(f"tableau residual {resid:.2e} for L={order}")
    return ExtrapolationTableau(order, tuple(float(a) for a in alpha))


@dataclass(eq=False)
class TimeMesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes[0] != 0.0:
            raise ValueError("a time mesh starts at t=0 and has at least one interval")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("time nodes must be strictly increasing")
        nodes.setflags(write=False)
        self.nodes = nodes

    @classmethod
    def uniform(cls, T, n_intervals):
        nodes = np.linspace(0.0, T, n_intervals + 1)
        nodes[-1] = T
        return cls(nodes)

    @property
    def T(self):
        return float(self.nodes[-1])

    @property
    def n_intervals(self):
        return self.nodes.size - 1

    def interval(self, j):
        return float(self.nodes[j - 1]), float(self.nodes[j])

    def tau(self, j):
        return float(self.nodes[j] - self.nodes[j - 1])

    def locate(self, t):
        """Index ``j`` of an interval whose closure contains ``t``."""
        j = int(np.searchsorted(self.nodes, t, side="left"))
        return min(max(j, 1), self.n_intervals)


@dataclass(eq=False)
class StepRecord:
    """Result of one extrapolated step.

    ``substeps[l-1]`` holds the ``l`` states ``v_l`` of level ``l`` in time
    order (empty list when substeps are not retained).
    """

    u: np.ndarray
    psi: np.ndarray
    substeps: list = field(default_factory=list)


def psi_nodal(tableau, finals, penultimates, tau, increments=None):
    """``-sum_l alpha_l (v_l^j - v_l^{j-1/l}) / (tau/l)``.

    ``increments`` may supply the last-substep differences directly, which
    avoids cancellation when the state barely moves.
    """
    if increments is None:
        increments = [v - v_prev for v, v_prev in zip(finals, penultimates)]
    out = np.zeros_like(finals[0])
    for level, (alpha, inc) in enumerate(zip(tableau.alpha, increments), 1):
        out -= alpha * inc * (level / tau)
    return out


def step(mats, tableau, u_prev, t_left, t_right, load_slab, keep_substeps=False):
    """Advance ``u_prev`` from ``t_left`` to ``t_right``.

    ``load_slab`` is the delta representation of the load vector of the
    interpolated source on this interval.
    """
    tau = t_right - t_left
    order = load_slab.order
    u_prev = np.ascontiguousarray(u_prev, dtype=float)
    finals, penultimates, increments, chains = [], [], [], []
    for level in range(1, tableau.order + 1):
        delta = tau / level
        # Substep target times t_{j-k/l}, k = l-1..0, on the reference interval.
        xi = 2.0 * np.arange(1, level + 1) / level - 1.0
        loads = np.ascontiguousarray(delta_basis(order, xi).T @ load_slab.coeffs)
        chain, inc = kernels.euler_chain(
            mats.euler_factor(delta), mats.stiff_diag, mats.stiff_off, u_prev, loads
        )
        finals.append(chain[-1])
        increments.append(inc)
        penultimates.append(chain[-2] if level > 1 else u_prev)
        if keep_substeps:
            chains.append(chain)
    u = np.zeros_like(u_prev)
    for alpha, v in zip(tableau.alpha, finals):
        u += alpha * v
    return StepRecord(u, psi_nodal(tableau, finals, penultimates, tau, increments), chains)


@dataclass(eq=False)
class Trajectory:
    """Nodal states ``u_h^j`` and ``psi^j``, j = 0..M (rows), plus the run inputs.

    A run with ``store=False`` keeps only rows for ``j = 0`` and ``j = M``.
    """

    tmesh: TimeMesh
    tableau: ExtrapolationTableau
    source: InterpolatedSource
    mesh: fem1d.SpaceMesh
    u: np.ndarray
    psi: np.ndarray
    records: list = None

    @property
    def final(self):
        return self.u[-1]


def initial_psi(mats, u0, load0):
    """``psi^0`` from the mass solve ``M psi = A u_h^0 - (fhat(0), phi)``."""
    return fem1d.mass_solve(mats, mats.stiff_matvec(u0) - load0)


def run(problem, mesh, tmesh, order, mats=None, nodes="equispaced",
        keep_records=False, store=True):
    """Solve on ``mesh x tmesh`` with ``order``-step extrapolation.

    With ``store=False`` only the initial and final states are kept (the
    trajectory then has two rows), which is what the reference oracle uses.
    """
    tableau = extrapolation_tableau(order)
    mats = mats if mats is not None else fem1d.assemble(problem, mesh)
    source = InterpolatedSource(problem.source, tmesh, order, mesh=mesh, nodes=nodes)
    u = mesh.interpolate(problem.initial)
    first = source.load_slab(1)
    psi = initial_psi(mats, u, first.coeffs[0] - first.coeffs[1])

    n_rows = tmesh.n_intervals + 1 if store else 2
    us = np.empty((n_rows, u.size))
    psis = np.empty((n_rows, u.size))
    us[0], psis[0] = u, psi
    records = [] if keep_records else None
    for j in range(1, tmesh.n_intervals + 1):
        slab = first if j == 1 else source.load_slab(j)
        t_left, t_right = tmesh.interval(j)
        rec = step(mats, tableau, u, t_left, t_right, slab, keep_substeps=keep_records)
        u = rec.u
        row = j if store else 1
        us[row], psis[row] = rec.u, rec.psi
        if keep_records:
            records.append(rec)
    return Trajectory(tmesh, tableau, source, mesh, us, psis, records)
