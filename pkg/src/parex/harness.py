"""Convergence and efficiency experiments against a self-refined reference."""
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fem1d, timestepper
from .errors import OracleNotConvergedError
from .estimator import DefaultEllipticEstimator, ZeroEstimator, estimate_error
from .fem1d import SpaceMesh
from .reconstruct import build_reconstruction
from .timestepper import TimeMesh

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "M", "N", "L", "e_M", "p_M", "eta_init", "eta_f", "eta_t", "eta_ell",
    "eta_total", "chi_M", "wall_s",
)
ORACLE_TOLERANCE = 0.01


@dataclass
class ReferenceSolution:
    """Final state of a refined run, evaluable anywhere in the domain."""

    mesh: SpaceMesh
    values: np.ndarray
    gap: float
    order: int
    factor: int

    def __call__(self, x):
        return self.mesh.evaluate(self.values, x)


def _final_state(problem, n_space, n_time, order):
    mesh = SpaceMesh.uniform(problem.x_a, problem.x_b, n_space)
    tmesh = TimeMesh.uniform(problem.T, n_time)
    traj = timestepper.run(problem, mesh, tmesh, order, store=False)
    return mesh, traj.final


def reference_solution(problem, n_space, n_time, order, factor=16):
    """Refined solution with ``min(order+2, 5)`` steps on ``factor``-times finer meshes.

    ``gap`` is the sampled maximum difference, on the coarse mesh, between the
    refinement levels ``factor/2`` and ``factor``.
    """
    ref_order = min(order + 2, 5)
    mesh, values = _final_state(problem, factor * n_space, factor * n_time, ref_order)
    ref = ReferenceSolution(mesh, values, math.nan, ref_order, factor)
    if factor >= 2 and factor % 2 == 0:
        half = factor // 2
        mesh_h, values_h = _final_state(problem, half * n_space, half * n_time, ref_order)
        pts = fem1d.sample_points(SpaceMesh.uniform(problem.x_a, problem.x_b, n_space))
        ref.gap = float(np.max(np.abs(ref(pts) - mesh_h.evaluate(values_h, pts))))
    return ref


def check_oracle(ref, error, tolerance=ORACLE_TOLERANCE):
    if not ref.gap <= tolerance * error:
        raise OracleNotConvergedError(ref.gap, error)


def measure_error(mesh, u_h, u_ref):
    """``max |u_ref - u_h|`` over 8 equispaced points per element (endpoints included)."""
    pts = fem1d.sample_points(mesh, 8)
    return float(np.max(np.abs(u_ref(pts) - mesh.evaluate(u_h, pts))))


@dataclass
class RunResult:
    M: int
    N: int
    L: int
    e_M: float
    eta_init: float
    eta_f: float
    eta_t: float
    eta_ell: float
    eta_total: float
    chi_M: float
    wall_s: float
    p_M: Optional[float] = None
    oracle_gap: float = math.nan
    flagged: bool = False
    message: str = ""

    def row(self):
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def make_estimator(kind, problem, mesh):
    if kind == "default":
        return DefaultEllipticEstimator(problem, mesh)
    if kind == "zero":
        return ZeroEstimator(mesh)
    raise ValueError(f"unknown elliptic estimator {kind!r}")


def run_case(problem, n_space, n_time, order, estimator="default", oracle_factor=16,
             nodes="equispaced"):
    """Solve, estimate and measure the error of one configuration."""
    start = time.perf_counter()
    mesh = SpaceMesh.uniform(problem.x_a, problem.x_b, n_space)
    tmesh = TimeMesh.uniform(problem.T, n_time)
    mats = fem1d.assemble(problem, mesh)
    traj = timestepper.run(problem, mesh, tmesh, order, mats=mats, nodes=nodes)
    recon = build_reconstruction(traj, mats)
    report = estimate_error(problem, traj, recon, estimator=make_estimator(estimator, problem, mesh))
    ref = reference_solution(problem, n_space, n_time, order, factor=oracle_factor)
    e_m = measure_error(mesh, traj.final, ref)
    result = RunResult(
        M=n_time, N=n_space, L=order, e_M=e_m,
        eta_init=report.eta_init, eta_f=report.eta_f, eta_t=report.eta_t,
        eta_ell=report.eta_ell, eta_total=report.total,
        chi_M=e_m / report.total if report.total > 0 else math.inf,
        wall_s=0.0, oracle_gap=ref.gap,
    )
    try:
        check_oracle(ref, e_m)
    except OracleNotConvergedError as exc:
        result.flagged = True
        result.message = str(exc)
        log.warning("M=%d: %s", n_time, exc)
    result.wall_s = time.perf_counter() - start
    log.info("M=%d N=%d L=%d e_M=%.3e eta=%.3e (%.2fs)", n_time, n_space, order,
             e_m, report.total, result.wall_s)
    return result


def coupled_space_elements(problem, n_time):
    """Element count giving ``h = tau`` on uniform meshes."""
    return max(2, int(round(n_time * (problem.x_b - problem.x_a) / problem.T)))


def run_table(problem, order, ms, couple="h=tau", n_space=None, estimator="default",
              oracle_factor=16, nodes="equispaced"):
    """One row per ``M`` in the doubling sequence ``ms``, with EOC ``p_M``."""
    ms = list(ms)
    for a, b in zip(ms, ms[1:]):
        if b != 2 * a:
            raise ValueError(f"M values must form a doubling sequence, got {ms}")
    if couple not in ("h=tau", "fixed"):
        raise ValueError(f"unknown coupling {couple!r}")
    if couple == "fixed" and n_space is None:
        raise ValueError("fixed coupling needs N")
    rows = []
    for m in ms:
        n = coupled_space_elements(problem, m) if couple == "h=tau" else n_space
        rows.append(run_case(problem, n, m, order, estimator=estimator,
                             oracle_factor=oracle_factor, nodes=nodes))
    for prev, cur in zip(rows, rows[1:]):
        if prev.e_M > 0 and cur.e_M > 0:
            cur.p_M = (math.log(prev.e_M) - math.log(cur.e_M)) / math.log(2.0)
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(value)
    return f"{value:.6g}"


def format_csv(rows):
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in r.row().values()))
    return "\n".join(lines) + "\n"


def format_markdown(rows):
    lines = [
        "| " + " | ".join(CSV_COLUMNS) + " |",
        "|" + "---|" * len(CSV_COLUMNS),
    ]
    for r in rows:
        lines.append("| " + " | ".join(_fmt(v) for v in r.row().values()) + " |")
    return "\n".join(lines) + "\n"
