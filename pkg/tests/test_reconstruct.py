import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from parex import fem1d, timestepper
from parex.errors import OutOfIntervalError, SingularCollocationError
from parex.fem1d import SpaceMesh
from parex.polybasis import gauss_legendre, legendre_eval
from parex.problems import builtin_test_problem, manufactured_problem, stationary_problem
from parex.reconstruct import (
    DeltaSlab,
    ReconstructionSet,
    build_reconstruction,
    dudt_slab,
    eval_slab,
    interpolate_f,
    interpolation_nodes,
    psi_plus_dudt_coeffs,
    to_delta_basis,
)
from parex.timestepper import TimeMesh


def builtin_run(order, m=16, n=16):
    prob = builtin_test_problem()
    mesh = SpaceMesh.uniform(prob.x_a, prob.x_b, n)
    mats = fem1d.assemble(prob, mesh)
    traj = timestepper.run(prob, mesh, TimeMesh.uniform(prob.T, m), order, mats=mats)
    return prob, mats, traj, build_reconstruction(traj, mats)


# -- to_delta_basis / eval_slab ---------------------------------------------

def test_to_delta_basis_constant():
    out = to_delta_basis(np.full(4, 2.5), interpolation_nodes(4))
    np.testing.assert_allclose(out, [2.5, 0, 0, 0], atol=1e-15)


def test_to_delta_basis_affine():
    xi = interpolation_nodes(5)
    vals = 3.0 + 2.0 * np.asarray(xi)
    out = to_delta_basis(vals, xi)
    np.testing.assert_allclose(out, [3.0, 2.0, 0, 0, 0], atol=1e-14)


def test_to_delta_basis_pure_bubble():
    out = to_delta_basis(np.array([0.0, -0.5, 0.0]), (-1.0, 0.0, 1.0))
    np.testing.assert_allclose(out, [0.0, 0.0, 1.0], atol=1e-15)


def test_to_delta_basis_coincident_nodes():
    with pytest.raises(SingularCollocationError):
        to_delta_basis(np.zeros(3), (-1.0, 1.0, 1.0))


def test_to_delta_basis_general_nodes_full_solve():
    xi = (-0.9, -0.2, 0.4, 0.8)
    coeffs = np.array([0.3, -1.0, 2.0, 0.5])
    slab = DeltaSlab(-1.0, 1.0, coeffs)
    vals = np.array([eval_slab(slab, x) for x in xi])
    np.testing.assert_allclose(to_delta_basis(vals, xi), coeffs, atol=1e-13)


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.sampled_from(["equispaced", "chebyshev"]))
def test_round_trip_at_nodes(order, seed, kind):
    rng = np.random.default_rng(seed)
    xi = interpolation_nodes(order, kind)
    vals = rng.normal(size=(order, 3))
    slab = DeltaSlab(0.5, 0.75, to_delta_basis(vals, xi))
    for k, x in enumerate(xi):
        t = 0.5 + 0.25 * (x + 1) / 2
        np.testing.assert_allclose(eval_slab(slab, t), vals[k], atol=1e-12)


def test_eval_slab_endpoints_and_bounds():
    coeffs = np.array([[1.0, 2.0], [0.5, -1.0], [3.0, 4.0]])
    slab = DeltaSlab(1.0, 1.5, coeffs)
    np.testing.assert_allclose(eval_slab(slab, 1.5), coeffs[0] + coeffs[1], atol=1e-15)
    np.testing.assert_allclose(eval_slab(slab, 1.0), coeffs[0] - coeffs[1], atol=1e-15)
    with pytest.raises(OutOfIntervalError):
        eval_slab(slab, 1.6)
    with pytest.raises(OutOfIntervalError):
        eval_slab(slab, 0.99)


def test_interpolation_nodes():
    assert interpolation_nodes(2) == (-1.0, 1.0)
    np.testing.assert_allclose(interpolation_nodes(4), [-1, -1 / 3, 1 / 3, 1])
    cheb = interpolation_nodes(4, "chebyshev")
    assert cheb[0] == -1.0 and cheb[-1] == 1.0
    with pytest.raises(ValueError):
        interpolation_nodes(3, "random")


# -- dudt_slab ----------------------------------------------------------------

def test_dudt_constant_and_affine():
    assert np.all(dudt_slab(DeltaSlab(0.0, 0.2, np.array([4.0, 0.0, 0.0]))) == 0.0)
    deriv = dudt_slab(DeltaSlab(0.0, 0.2, np.array([4.0, 0.3])))
    np.testing.assert_allclose(deriv, [2 * 0.3 / 0.2])


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_dudt_finite_difference(order):
    rng = np.random.default_rng(order)
    slab = DeltaSlab(0.3, 0.55, rng.normal(size=order))
    deriv = dudt_slab(slab)
    eps = 1e-6 * slab.tau
    for t in np.linspace(0.32, 0.53, 7):
        fd = (eval_slab(slab, t + eps) - eval_slab(slab, t - eps)) / (2 * eps)
        xi = slab.map.forward(t)
        exact = sum(c * legendre_eval(i, xi) for i, c in enumerate(deriv))
        assert fd == pytest.approx(exact, rel=1e-6, abs=1e-6)


# -- interpolate_f -------------------------------------------------------------

@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_interpolant_reproduces_polynomials_in_time(order):
    def f(x, t):
        return (1 + x) * sum((k + 1) * t**k for k in range(order))

    tm = TimeMesh.uniform(1.0, 3)
    fhat = interpolate_f(type("P", (), {"source": staticmethod(f)})(), tm, order)
    x = np.array([0.2, 0.7])
    for t in np.linspace(0, 1, 50):
        np.testing.assert_allclose(fhat(x, t), f(x, t), rtol=1e-12)


def test_linear_interpolant_of_t_squared():
    tm = TimeMesh.uniform(1.0, 1)
    fhat = interpolate_f(type("P", (), {"source": staticmethod(lambda x, t: 0 * x + t * t)})(), tm, 2)
    assert fhat(np.array([0.0]), 0.5)[0] == pytest.approx(0.5)


def test_interpolant_continuous_across_intervals():
    prob = builtin_test_problem()
    tm = TimeMesh.uniform(1.0, 5)
    fhat = interpolate_f(prob, tm, 4)
    x = np.linspace(-1, 1, 9)
    for j in range(1, 5):
        t = float(tm.nodes[j])
        left = eval_slab(fhat.slab(j, x), t)
        right = eval_slab(fhat.slab(j + 1, x), t)
        np.testing.assert_allclose(left, prob.source(x, t), atol=1e-14)
        np.testing.assert_allclose(right, prob.source(x, t), atol=1e-14)


# -- build_reconstruction -----------------------------------------------------

@pytest.mark.parametrize("order", [2, 3, 4])
def test_stationary_reconstruction_is_flat(order):
    prob = stationary_problem()
    mesh = SpaceMesh.uniform(0, 1, 10)
    mats = fem1d.assemble(prob, mesh)
    traj = timestepper.run(prob, mesh, TimeMesh.uniform(1.0, 6), order, mats=mats)
    rec = build_reconstruction(traj, mats)
    assert np.max(np.abs(rec.dpsi)) <= 1e-11
    assert np.max(np.abs(rec.du[:, 1:])) <= 1e-12
    for j in range(1, 7):
        a, b = psi_plus_dudt_coeffs(rec, j)
        assert np.max(np.abs(a)) <= 1e-11 and np.max(np.abs(b)) <= 1e-11


def test_recursion_l3_and_l4():
    for order in (3, 4):
        _, mats, traj, rec = builtin_run(order, m=6, n=8)
        for j in range(1, 7):
            tau = traj.tmesh.tau(j)
            du, dpsi = rec.du[j - 1], rec.dpsi[j - 1]
            scale = 3 * np.max(np.abs(dpsi[0]) + np.abs(2 * du[1] / tau))
            np.testing.assert_allclose(dpsi[2], 3 * (dpsi[0] + 2 * du[1] / tau), atol=1e-14 * scale)
            if order == 4:
                scale = 5 * np.max(np.abs(dpsi[1]) + np.abs(2 * du[2] / tau))
                np.testing.assert_allclose(dpsi[3], 5 * (dpsi[1] + 2 * du[2] / tau),
                                           atol=1e-14 * scale)


def test_endpoint_continuity():
    _, _, traj, rec = builtin_run(4, m=8)
    for j in range(1, 9):
        t0, t1 = traj.tmesh.interval(j)
        np.testing.assert_allclose(rec.u_slab(j)(t1), traj.u[j], atol=1e-12)
        np.testing.assert_allclose(rec.u_slab(j)(t0), traj.u[j - 1], atol=1e-12)
        np.testing.assert_allclose(rec.psi_slab(j)(t1), traj.psi[j], atol=1e-12 * (1 + np.abs(traj.psi[j]).max()))


def test_scalar_surrogate_coefficients_l2():
    tau = 0.25
    tm = TimeMesh.uniform(tau, 1)
    du = np.array([[[0.0], [tau / 2]]])
    dpsi = np.array([[[1.0], [3.0]]])
    rec = ReconstructionSet(tm, 2, du, dpsi, np.zeros_like(du), None, None)
    a, b = psi_plus_dudt_coeffs(rec, 1)
    assert a[0] == pytest.approx(2.0) and b[0] == pytest.approx(3.0)


def two_term_residual(rec, j):
    order = rec.order
    t0, t1 = rec.tmesh.interval(j)
    xg, _ = gauss_legendre(20)
    times = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * xg
    a, b = psi_plus_dudt_coeffs(rec, j)
    u_slab, psi_slab = rec.u_slab(j), rec.psi_slab(j)
    deriv = dudt_slab(u_slab)
    worst, scale = 0.0, 0.0
    for t, xi in zip(times, xg):
        lhs = eval_slab(psi_slab, t) + sum(c * legendre_eval(i, xi) for i, c in enumerate(deriv))
        rhs = a * legendre_eval(order - 2, xi) + b * legendre_eval(order - 1, xi)
        worst = max(worst, np.max(np.abs(lhs - rhs)))
        scale = max(scale, np.max(np.abs(eval_slab(psi_slab, t))), np.max(np.abs(lhs)))
    return worst, scale


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_two_term_identity(order):
    _, _, traj, rec = builtin_run(order)
    for j in range(1, traj.tmesh.n_intervals + 1):
        worst, scale = two_term_residual(rec, j)
        assert worst <= 1e-9 * max(scale, 1.0)


def delta_consistency(rec, mats, j, i):
    """``A du_i - M dpsi_i - dload_i`` relative to its terms."""
    lhs = mats.stiff_matvec(rec.du[j - 1, i])
    rhs = mats.mass_matvec(rec.dpsi[j - 1, i]) + rec.dload[j - 1, i]
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    return np.max(np.abs(lhs - rhs)) / scale


@pytest.mark.parametrize("order", [2, 3, 4])
def test_delta_consistency_all_levels(order):
    _, mats, traj, rec = builtin_run(order)
    for j in range(1, traj.tmesh.n_intervals + 1):
        for i in range(order):
            assert delta_consistency(rec, mats, j, i) <= 1e-10


def test_load_coefficients_match_interpolant():
    prob, mats, traj, rec = builtin_run(3, m=4, n=8)
    mesh = mats.mesh
    for j in range(1, 5):
        t = sum(traj.tmesh.interval(j)) / 2
        direct = fem1d.load_vector(mesh, lambda x: rec.source(x, t))
        np.testing.assert_allclose(rec.load_slab(j)(t), direct, atol=1e-13)


def semi_discrete_exact(prob, mesh, mats):
    mass, stiff = mats.dense()
    b0 = fem1d.load_vector(mesh, lambda x: prob.source(x, 0.0))
    u0 = mesh.interpolate(prob.initial)
    lam, vec = sl.eigh(stiff, mass)
    c0, g = vec.T @ mass @ u0, vec.T @ b0
    return lambda t: vec @ (c0 * np.exp(-lam * t) + g * (np.exp(-t) - np.exp(-lam * t)) / (lam - 1))


@pytest.mark.parametrize("order", [2, 3, 4])
def test_reconstruction_order_at_midpoints(order):
    """Midpoint error against the exact semi-discrete flow (no spatial floor)."""
    prob = manufactured_problem()
    mesh = SpaceMesh.uniform(0, 1, 16)
    mats = fem1d.assemble(prob, mesh)
    exact = semi_discrete_exact(prob, mesh, mats)
    errors = []
    for m in (128, 256):
        tm = TimeMesh.uniform(1.0, m)
        rec = build_reconstruction(timestepper.run(prob, mesh, tm, order, mats=mats), mats)
        err = 0.0
        for j in range(1, m + 1):
            t = sum(tm.interval(j)) / 2
            err = max(err, np.max(np.abs(rec.u_slab(j)(t) - exact(t))))
        errors.append(err)
    assert np.log2(errors[0] / errors[1]) >= order - 0.3
