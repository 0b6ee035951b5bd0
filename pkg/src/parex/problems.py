"""Problem definitions: ``du/dt - (d u')' + r u = f`` on ``(x_a, x_b) x (0, T]``."""
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .estimator import GreenFunctionBounds


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Coefficients, data and Green's function bounds of a 1D parabolic problem.

    ``diffusion``, ``reaction`` and ``initial`` map ``x`` arrays to arrays,
    ``source`` and ``exact`` map ``(x, t)`` to arrays.
    """

    x_a: float
    x_b: float
    T: float
    diffusion: Callable
    reaction: Callable
    source: Callable
    initial: Callable
    green_bounds: GreenFunctionBounds
    diffusion_derivative: Optional[Callable] = None
    exact: Optional[Callable] = None
    name: str = "problem"

    def __post_init__(self):
        if not self.x_a < self.x_b:
            raise ValueError("need x_a < x_b")
        if not self.T > 0:
            raise ValueError("need T > 0")
        x = np.linspace(self.x_a, self.x_b, 1001)
        if np.min(np.broadcast_to(self.diffusion(x), x.shape)) <= 0:
            raise ValueError("diffusion must be positive")
        if np.min(np.broadcast_to(self.reaction(x), x.shape)) < 0:
            raise ValueError("reaction must be non-negative")
        ends = np.broadcast_to(self.initial(np.array([self.x_a, self.x_b])), (2,))
        if np.max(np.abs(ends)) > 1e-12:
            raise ValueError("initial data must vanish on the boundary")


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _zeros(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def builtin_test_problem():
    """``u_t - u_xx + (5x+6) u = e^{-4t} + cos(pi (x+t)^2)`` on ``(-1,1) x (0,1]``."""
    return ProblemSpec(
        x_a=-1.0,
        x_b=1.0,
        T=1.0,
        diffusion=_ones,
        reaction=lambda x: 5.0 * np.asarray(x) + 6.0,
        source=lambda x, t: np.exp(-4.0 * t) + np.cos(np.pi * (np.asarray(x) + t) ** 2),
        initial=lambda x: np.sin(np.pi * (1.0 + np.asarray(x)) / 2.0),
        green_bounds=GreenFunctionBounds(
            kappa0=1.0, kappa1=3.0 / 2.0**1.5, kappa1_prime=0.0, gamma=0.5
        ),
        diffusion_derivative=_zeros,
        name="builtin",
    )


def manufactured_problem():
    """Heat equation on ``(0,1)`` with exact solution ``e^{-t} sin(pi x)``.

    The Green's function constants are the reaction-free conservative choice
    ``kappa0 = 1, gamma = 0``; ``kappa1`` is borrowed from the builtin problem.
    """
    c = math.pi**2 - 1.0
    return ProblemSpec(
        x_a=0.0,
        x_b=1.0,
        T=1.0,
        diffusion=_ones,
        reaction=_zeros,
        source=lambda x, t: c * np.exp(-t) * np.sin(np.pi * np.asarray(x)),
        initial=lambda x: np.sin(np.pi * np.asarray(x)),
        green_bounds=GreenFunctionBounds(
            kappa0=1.0, kappa1=3.0 / 2.0**1.5, kappa1_prime=0.0, gamma=0.0
        ),
        diffusion_derivative=_zeros,
        exact=lambda x, t: np.exp(-t) * np.sin(np.pi * np.asarray(x)),
        name="manufactured",
    )


def stationary_problem():
    """``u_t - u_xx = 1`` on ``(0,1)`` started from its steady state ``x(1-x)/2``.

    P1 elements are nodally exact here, so the discrete solution never moves.
    """
    return ProblemSpec(
        x_a=0.0,
        x_b=1.0,
        T=1.0,
        diffusion=_ones,
        reaction=_zeros,
        source=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
        initial=lambda x: 0.5 * np.asarray(x) * (1.0 - np.asarray(x)),
        green_bounds=GreenFunctionBounds(kappa0=1.0, kappa1=1.0, kappa1_prime=0.0, gamma=0.0),
        diffusion_derivative=_zeros,
        exact=lambda x, t: 0.5 * np.asarray(x) * (1.0 - np.asarray(x)),
        name="stationary",
    )


_X, _T = sympy.symbols("x t", real=True)
_NAMES = {
    "x": _X,
    "t": _T,
    "pi": sympy.pi,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "ln": sympy.log,
}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


def parse_expression(text, variables=("x", "t")):
    """Parse an arithmetic expression over ``x``, ``t``, ``pi`` and sin/cos/exp/ln.

    Only whitelisted tokens are accepted before the text reaches sympy.
    """
    text = text.replace("π", "pi").replace("−", "-")
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"unexpected character in expression {text!r} at {pos}")
        name = m.group(2)
        if name is not None and (name not in _NAMES or (name in "xt" and name not in variables)):
            raise ValueError(f"unknown name {name!r} in expression {text!r}")
        pos = m.end()
    return parse_expr(
        text,
        local_dict=dict(_NAMES),
        global_dict={"Integer": sympy.Integer, "Float": sympy.Float,
                     "Rational": sympy.Rational, "Symbol": sympy.Symbol},
        transformations=standard_transformations + (convert_xor,),
    )


def _spatial(expr):
    fn = sympy.lambdify(_X, expr, "numpy")
    return lambda x: np.broadcast_to(fn(np.asarray(x, dtype=float)), np.shape(x)) + 0.0


def _space_time(expr):
    fn = sympy.lambdify((_X, _T), expr, "numpy")
    return lambda x, t: np.broadcast_to(fn(np.asarray(x, dtype=float), t), np.shape(x)) + 0.0


def _number(text):
    return float(parse_expression(text, variables=()))


def load_problem_file(path):
    """Read a ``key = value`` problem file (see README for the keys)."""
    entries = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            entries[key] = value
    required = ("x_a", "x_b", "T", "source", "initial")
    missing = [k for k in required if k not in entries]
    if missing:
        raise ValueError(f"{path}: missing keys {missing}")

    d_expr = parse_expression(entries.get("diffusion", "1"), variables=("x",))
    r_expr = parse_expression(entries.get("reaction", "0"), variables=("x",))
    exact = entries.get("exact")
    return ProblemSpec(
        x_a=_number(entries["x_a"]),
        x_b=_number(entries["x_b"]),
        T=_number(entries["T"]),
        diffusion=_spatial(d_expr),
        reaction=_spatial(r_expr),
        source=_space_time(parse_expression(entries["source"])),
        initial=_spatial(parse_expression(entries["initial"], variables=("x",))),
        green_bounds=GreenFunctionBounds(
            kappa0=_number(entries.get("kappa0", "1")),
            # Without a time-derivative bound only the direct branch of mu applies.
            kappa1=_number(entries["kappa1"]) if "kappa1" in entries else math.inf,
            kappa1_prime=_number(entries.get("kappa1_prime", "0")),
            gamma=_number(entries.get("gamma", "0")),
        ),
        diffusion_derivative=_spatial(sympy.diff(d_expr, _X)),
        exact=_space_time(parse_expression(exact)) if exact else None,
        name=str(path),
    )
