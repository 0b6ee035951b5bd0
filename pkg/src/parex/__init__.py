"""Richardson-extrapolated backward Euler with P1 elements for 1D parabolic
problems, and a maximum-norm a posteriori error estimator for it."""
from .estimator import (
    DefaultEllipticEstimator,
    EstimatorReport,
    GreenFunctionBounds,
    estimate_error,
)
from .fem1d import SpaceMesh, assemble
from .harness import RunResult, reference_solution, run_case, run_table
from .kernels import BACKEND
from .problems import (
    ProblemSpec,
    builtin_test_problem,
    load_problem_file,
    manufactured_problem,
    stationary_problem,
)
from .reconstruct import build_reconstruction
from .timestepper import TimeMesh, extrapolation_tableau, run

__all__ = [
    "BACKEND",
    "DefaultEllipticEstimator",
    "EstimatorReport",
    "GreenFunctionBounds",
    "ProblemSpec",
    "RunResult",
    "SpaceMesh",
    "TimeMesh",
    "assemble",
    "build_reconstruction",
    "builtin_test_problem",
    "estimate_error",
    "extrapolation_tableau",
    "load_problem_file",
    "manufactured_problem",
    "reference_solution",
    "run",
    "run_case",
    "run_table",
    "stationary_problem",
]
