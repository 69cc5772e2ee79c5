import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from pileup.discrete_energy import RegimeContext, energy_and_gradient, total_energy
from pileup.measures import EmpiricalMeasure, w1_distance
from pileup.optimizer import minimize_discrete, minimize_quantile, project_ordered_box, spg
from pileup.potential import eval_V
from oracles import brute_projection

vectors = arrays(float, st.integers(1, 6), elements=st.floats(-5.0, 5.0, allow_subnormal=False))


def test_projection_examples():
    assert np.array_equal(project_ordered_box([0.5, 2.0], 1.0), [0.5, 1.0])
    x = np.array([0.1, 0.2, 0.7])
    assert np.array_equal(project_ordered_box(x, 1.0), x)
    assert np.allclose(project_ordered_box([3.0, 1.0, 2.0]), [2.0, 2.0, 2.0])


def test_projection_rejects_bad_bound():
    with pytest.raises(ValueError):
        project_ordered_box([1.0], 0.0)


@settings(max_examples=300, deadline=None)
@given(vectors, st.sampled_from([0.5, 1.0, 3.0, math.inf]))
def test_projection_matches_brute_force(y, upper):
    ref = brute_projection(y, upper)
    assert np.max(np.abs(project_ordered_box(y, upper) - ref)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(vectors, st.sampled_from([0.5, 2.0, math.inf]))
def test_projection_idempotent_and_feasible(y, upper):
    x = project_ordered_box(y, upper)
    assert np.all(np.diff(x) >= 0) and x[0] >= 0 and x[-1] <= upper
    assert np.array_equal(project_ordered_box(x, upper), x)


@settings(max_examples=100, deadline=None)
@given(vectors, vectors)
def test_projection_nonexpansive(a, b):
    k = min(a.size, b.size)
    a, b = a[:k], b[:k]
    pa, pb = project_ordered_box(a, 1.0), project_ordered_box(b, 1.0)
    assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


def test_single_wall_minimiser():
    ctx = RegimeContext.finite_domain(2, 2, 1.0, 1.0)
    sol = minimize_discrete(ctx, 1)
    t = brentq(lambda t: math.sinh(t) ** 2 - t, 0.5, 1.0)
    assert sol.converged
    assert sol.minimizer[0] == pytest.approx(t, rel=1e-7)
    assert sol.objective == pytest.approx(eval_V(t) + t, rel=1e-12)


def test_dilute_minimiser_close_to_uniform():
    n = 32
    ctx = RegimeContext.finite_domain(5, 3, 10.0, 0.5)
    sol = minimize_discrete(ctx, n)
    assert sol.converged
    assert w1_distance(EmpiricalMeasure(sol.minimizer), EmpiricalMeasure(np.arange(1, n + 1) / n)) <= 2 / n
    assert sol.objective == pytest.approx(2 * math.exp(-2), rel=0.06)


@pytest.mark.parametrize("p,q", [(1, 0), (2, 1), (3, 2), (4, 3), (5, 2), (5, 1)])
def test_minimiser_independent_of_start(p, q):
    n = 24
    alpha = {1: 0.2 / n**2, 2: 2.0 / n, 3: n**-0.5, 4: 1.0, 5: 3.0}[p]
    if q == 0:
        ctx = RegimeContext(p, 0, alpha)
    elif q == 1:
        ctx = RegimeContext(p, 1, alpha, 2.0)
    else:
        ctx = RegimeContext.finite_domain(p, q, alpha, 1.0 if q == 2 else 0.5)
    a = minimize_discrete(ctx, n)
    rng = np.random.default_rng(p + q)
    b = minimize_discrete(ctx, n, init=np.sort(rng.uniform(0.05, 0.9, n)))
    assert a.converged and b.converged
    assert np.max(np.abs(a.minimizer - b.minimizer)) <= 1e-6


def test_minimiser_beats_perturbations():
    n = 16
    ctx = RegimeContext.finite_domain(3, 2, n**-0.5, 1.0)
    sol = minimize_discrete(ctx, n)
    rng = np.random.default_rng(3)
    for _ in range(50):
        y = project_ordered_box(sol.minimizer + 1e-3 * rng.standard_normal(n), 1.0)
        assert total_energy(ctx, y) >= sol.objective - 1e-12


def test_monotone_history():
    ctx = RegimeContext.finite_domain(3, 2, 64**-0.5, 1.0)
    sol = spg(lambda x: energy_and_gradient(ctx, x, curvature=True), np.linspace(0.01, 0.5, 64), 1.0, record=True)
    h = np.array(sol.history)
    assert np.all(np.diff(h) <= 1e-14 * np.abs(h[:-1]))


def test_iteration_cap_reported():
    ctx = RegimeContext.finite_domain(3, 2, 64**-0.5, 1.0)
    sol = minimize_discrete(ctx, 64, max_iter=3)
    assert not sol.converged and sol.message == "iteration cap reached"


def test_constant_objective_flags_initial_point():
    sol = minimize_quantile(lambda v: (1.0, np.zeros_like(v)), 10)
    assert sol.converged and sol.iterations == 0
    assert "initial point" in sol.message


def test_quadratic_against_projection():
    # min ||x - c||^2 / 2 over the ordered box is the projection of c
    c = np.array([0.9, 0.1, 0.5, 2.0, 1.5])
    sol = spg(lambda x: (0.5 * float(np.sum((x - c) ** 2)), x - c), np.linspace(0.1, 0.5, 5), 1.0, anchored=False)
    assert np.allclose(sol.minimizer, project_ordered_box(c, 1.0), atol=1e-8)


def test_packed_upper_bound():
    ctx = RegimeContext.finite_domain(5, 3, math.log(256), 0.5)
    sol = minimize_discrete(ctx, 256, upper=0.5)
    assert sol.converged and sol.minimizer[-1] <= 0.5
