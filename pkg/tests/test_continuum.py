import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pileup.continuum import (
    LimitConstants,
    QuantileObjective,
    limit_energy,
    log_limit_energy,
    minimize_limit,
    particular_case_energy,
    uniform_quantile,
)
from pileup.exceptions import ParticularCaseError
from pileup.measures import (
    EmpiricalMeasure,
    GridDensity,
    QuantileFn,
    density_from_quantile,
    grid_density_from_cdf,
    midpoints,
    w1_distance,
)

C_V = math.pi**2 / 6
FOUR_PI2_9 = 4 * math.pi**2 / 9
TRIANGLE = LimitConstants(C=2 * math.pi**2 / 3)


def triangle_cdf(x):
    x = np.clip(x, 0.0, 1.0)
    return 1.0 - (1.0 - x) ** 2


def triangle_quantile(m):
    return QuantileFn(1.0 - np.sqrt(1.0 - midpoints(m)))


def test_triangle_energy_density_form():
    errs = []
    for m in (100, 200, 400):
        g = grid_density_from_cdf(triangle_cdf, 1.0, m)
        errs.append(abs(limit_energy(3, 2, TRIANGLE, g) - FOUR_PI2_9))
    assert errs[-1] < 1e-3
    assert errs[2] < errs[1] < errs[0]


def test_triangle_energy_quantile_form():
    errs = [abs(limit_energy(3, 2, TRIANGLE, triangle_quantile(m)) - FOUR_PI2_9) for m in (100, 200, 400)]
    assert errs[-1] < 2e-3
    assert errs[2] < errs[1] < errs[0]


def test_dilute_uniform_with_critical_domain():
    const = LimitConstants(Lambda=1.0, beta=1.0)
    val = limit_energy(5, 2, const, uniform_quantile(100))
    assert val == pytest.approx(2 * math.exp(-2) + 0.5, rel=1e-12)


def test_dilute_infeasible():
    const = LimitConstants(Lambda=0.0, beta=0.0)
    assert limit_energy(5, 3, const, uniform_quantile(100, 0.5)) == math.inf
    assert limit_energy(5, 3, const, uniform_quantile(100, 1.5)) == math.inf
    assert limit_energy(5, 3, const, uniform_quantile(100)) == pytest.approx(2 * math.exp(-2), rel=1e-12)


@pytest.mark.parametrize("b", [0.5, 1.0, 1.7])
def test_log_kernel_uniform(b):
    # E = (1/2)(log(1/b) + 3/2) + b/2 for the uniform measure on [0, b]
    exact = 0.5 * (math.log(1 / b) + 1.5) + b / 2
    const = LimitConstants(Lambda=2.0)
    errs = []
    for m in (100, 200, 400):
        g = GridDensity(b, np.ones(m) / m)
        q = uniform_quantile(m, b)
        eg, eq = limit_energy(1, 1, const, g), limit_energy(1, 1, const, q)
        errs.append(abs(eg - exact))
        assert abs(eq - exact) < 5.0 / m
    assert errs[-1] < 5.0 / 400
    assert errs[2] < errs[1]


def test_empirical_measures_have_infinite_limit_energy():
    assert limit_energy(3, 2, TRIANGLE, EmpiricalMeasure([0.2, 0.5])) == math.inf


def test_barrier_in_limit_energy():
    assert limit_energy(3, 2, TRIANGLE, uniform_quantile(50, 1.5)) == math.inf
    # Lambda_n -> inf for q = 1: no barrier in the limit
    assert math.isfinite(limit_energy(3, 1, LimitConstants(), uniform_quantile(50, 1.5)))
    assert math.isfinite(limit_energy(3, 0, LimitConstants(), uniform_quantile(50, 40.0)))


def test_missing_constants():
    with pytest.raises(ValueError):
        limit_energy(2, 0, LimitConstants(), uniform_quantile(10))
    with pytest.raises(ParticularCaseError):
        limit_energy(5, 2, LimitConstants(Lambda=2.0, beta=math.inf), uniform_quantile(10))
    with pytest.raises(TypeError):
        limit_energy(3, 0, LimitConstants(), [0.1, 0.2])


def test_particular_case_energy():
    assert particular_case_energy(1.0, uniform_quantile(64)) == pytest.approx(0.5, rel=1e-14)
    assert particular_case_energy(1.0, uniform_quantile(64, 0.5)) == math.inf
    assert particular_case_energy(3.0, uniform_quantile(64, 3.0)) == pytest.approx(1.5, rel=1e-14)
    assert particular_case_energy(2.0, uniform_quantile(64, 3.0)) == math.inf


def test_log_limit_energy():
    assert log_limit_energy(GridDensity(0.5, np.ones(10) / 10)) == pytest.approx(0.5, rel=1e-12)
    assert log_limit_energy(GridDensity(1.0, np.ones(10) / 10)) == pytest.approx(0.0, abs=1e-12)
    assert log_limit_energy(GridDensity(1.5, np.ones(15) / 15)) == math.inf


def test_triangle_minimiser():
    sol = minimize_limit(3, 2, TRIANGLE, 400)
    assert sol.converged
    assert abs(sol.objective - FOUR_PI2_9) < 1e-3
    rho = density_from_quantile(QuantileFn(sol.minimizer), 40)
    inner = rho.centers < 0.9
    assert np.max(np.abs(rho.density - 2 * (1 - rho.centers))[inner]) < 0.05
    assert w1_distance(QuantileFn(sol.minimizer), grid_density_from_cdf(triangle_cdf, 1.0, 4000)) < 2e-3


def test_half_line_minimiser():
    # rho = (lam - x) / (2 c_V) on [0, lam], lam = 2 sqrt(c_V); minimum lam^3 / (6 c_V)
    lam = 2 * math.sqrt(C_V)
    exact = lam**3 / (6 * C_V)
    prev = math.inf
    for m in (100, 200, 400):
        sol = minimize_limit(3, 0, LimitConstants(), m)
        err = abs(sol.objective - exact)
        assert err < prev
        prev = err
    assert prev < 1e-4


def test_log_kernel_minimiser():
    # equilibrium density (1/pi) sqrt((2 - x)/x) on [0, 2]
    def cdf(x):
        th = np.arcsin(np.sqrt(np.clip(x / 2, 0, 1)))
        return (2 * th + np.sin(2 * th)) / math.pi

    ref = grid_density_from_cdf(cdf, 2.0, 20000)
    d = [w1_distance(QuantileFn(minimize_limit(1, 1, LimitConstants(Lambda=2.0), m).minimizer), ref) for m in (100, 200)]
    assert d[1] < 0.6 * d[0]
    assert d[1] < 3e-3


def test_critical_aspect_ratio_self_convergence():
    lam = 1.998004768375355
    const = LimitConstants(c_tilde=math.pi, Lambda=lam, C=lam**2)
    vals = [minimize_limit(4, 2, const, m).objective for m in (200, 400, 800, 1600)]
    assert abs(vals[-1] - vals[-2]) < 0.5e-4 * abs(vals[-1])
    assert abs(vals[-1] - vals[-2]) < abs(vals[1] - vals[0])


def test_dilute_minimiser_is_identity():
    sol = minimize_limit(5, 3, LimitConstants(Lambda=0.0, beta=0.0), 64)
    assert np.array_equal(sol.minimizer, midpoints(64))


def test_quantile_objective_gradient():
    rng = np.random.default_rng(0)
    for p, q, const in [
        (1, 1, LimitConstants(Lambda=2.0)),
        (2, 2, LimitConstants(c_tilde=2.0, Lambda=1.0, C=1.0)),
        (3, 2, TRIANGLE),
        (4, 0, LimitConstants(c_tilde=1.0)),
    ]:
        obj = QuantileObjective(p, q, const)
        m = 30
        v = np.cumsum(rng.uniform(0.5, 1.5, m)) / (1.6 * m)
        e, g, _ = obj(v)
        h = 1e-6
        for i in range(0, m, 7):
            d = np.zeros(m)
            d[i] = h
            fd = (obj(v + d)[0] - obj(v - d)[0]) / (2 * h)
            assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 2.0), min_size=20, max_size=20), st.lists(st.floats(0.2, 2.0), min_size=20, max_size=20))
def test_quantile_objective_convex(a, b):
    obj = QuantileObjective(3, 2, TRIANGLE)
    u = np.cumsum(a) / (2.5 * 20)
    v = np.cumsum(b) / (2.5 * 20)
    assert obj.value(0.5 * (u + v)) <= 0.5 * (obj.value(u) + obj.value(v)) + 1e-12


def test_constants_round_trip():
    c = LimitConstants(c_tilde=1.0, Lambda=2.0, beta=None, C=4.0)
    assert LimitConstants.from_dict(c.to_dict()) == c


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0))
def test_force_scales_linearly_with_C(lam):
    xi = triangle_quantile(100)
    base = limit_energy(3, 2, TRIANGLE, xi)
    zero = limit_energy(3, 2, LimitConstants(C=0.0), xi)
    scaled = limit_energy(3, 2, LimitConstants(C=lam * TRIANGLE.C), xi)
    assert scaled - zero == pytest.approx(lam * (base - zero), rel=1e-12)


def test_dilute_limit_infinite_off_uniform():
    rng = np.random.default_rng(5)
    const = LimitConstants(Lambda=1.0, beta=1.0)
    for _ in range(100):
        v = midpoints(50) + 1e-3 * rng.standard_normal(50)
        v = np.clip(np.sort(v), 0, None)
        assert limit_energy(5, 2, const, QuantileFn(v)) == math.inf


def test_density_and_quantile_forms_agree():
    m = 400
    g = grid_density_from_cdf(triangle_cdf, 1.0, m)
    for q, const in ((2, TRIANGLE), (3, LimitConstants())):
        assert limit_energy(3, q, const, g) == pytest.approx(limit_energy(3, q, const, triangle_quantile(m)), abs=5.0 / m)
