import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import approx_fprime

from stringavg.convex_sets import Halfspace
from stringavg.dsap import Problem, Sequential, Simultaneous, SolverConfig, Status, solve
from stringavg.perturbation import (
    DistanceToAnchor,
    FixedVector,
    Geometric,
    Linear,
    PerturbationSchedule,
    PowerLaw,
    SeededRandomUnit,
    SquaredNorm,
    SubgradientObjective,
    Zero,
    partial_sums,
    perturbed_solve,
    resilience_experiment,
    superiorize,
)
from stringavg.problems_io import generate_random

QUADRANT = Problem((Halfspace([1, 0], 0), Halfspace([0, 1], 0)), known_feasible_point=[-1, -1])


def test_zero_schedule_is_bitwise_solve():
    problem = generate_random("mixed", 4, 9, seed=1)
    strategy = Simultaneous(9)
    x0 = np.full(4, 5.0)
    a = solve(problem, strategy, x0=x0)
    b = perturbed_solve(problem, strategy, x0=x0, schedule=PerturbationSchedule(Zero(), SeededRandomUnit(3)))
    assert np.array_equal(a.result, b.result)
    for col in ("proximity", "phi_sum", "step_norm", "fejer_margin"):
        assert np.array_equal(a.trace.column(col), b.trace.column(col))
    assert np.all(b.trace.column("beta_k") == 0)


def test_outward_push_is_reprojected():
    # single halfspace x1 <= 0; v = outward unit normal; each step pushes out then projects back
    p = Problem((Halfspace([1, 0], 0),))
    sched = PerturbationSchedule(Geometric(1.0, 0.5), FixedVector([1.0, 0.0]))
    res = perturbed_solve(p, Sequential(1), SolverConfig(), [3.0, 2.0], sched)
    # hand iteration: (3,2) + 1*(1,0) = (4,2) -> (0,2)
    assert res.status is Status.CONVERGED and len(res.trace) == 1
    np.testing.assert_array_equal(res.result, [0, 2])
    # five further hand steps from the boundary all land back on (0, 2)
    x = res.result
    for k in range(1, 6):
        y = x + 0.5**k * np.array([1.0, 0.0])
        x = np.array([min(y[0], 0.0), y[1]])
        np.testing.assert_array_equal(x, [0, 2])


def test_geometric_total_reported():
    sched = PerturbationSchedule(Geometric(0.5, 0.5), SeededRandomUnit(0))
    assert sched.beta.total == 1.0
    # inconsistent pair (x <= 0, x >= 1): the run never stops early
    p = Problem((Halfspace([1], 0), Halfspace([-1], -1)))
    res = perturbed_solve(p, Simultaneous(2), SolverConfig(max_iterations=60), [5.0], sched)
    assert res.status is Status.MAX_ITERATIONS
    assert res.trace.records[-1].beta_sum == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("rule", [Geometric(2.0, 0.9), Geometric(1, 0.5), PowerLaw(1.0, 1.5), PowerLaw(3.0, 2.0)])
def test_partial_sums_monotone_and_bounded(rule):
    s = partial_sums(rule, 5000)
    assert np.all(np.diff(s) >= 0)
    assert s[-1] <= rule.total + 1e-9


def test_power_law_total():
    assert PowerLaw(1.0, 2.0).total == pytest.approx(np.pi**2 / 6)


def test_invalid_rules():
    with pytest.raises(ValueError):
        PowerLaw(1.0, 1.0)
    with pytest.raises(ValueError):
        Geometric(1.0, 1.0)
    with pytest.raises(ValueError):
        Geometric(-1.0, 0.5)
    with pytest.raises(TypeError):
        PerturbationSchedule(lambda k: 1.0)


def test_subgradient_direction_normalized():
    v = SubgradientObjective(SquaredNorm())(0, np.array([3.0, 4.0]))
    np.testing.assert_allclose(v, [-0.6, -0.8])
    small = SubgradientObjective(SquaredNorm())(0, np.array([0.1, 0.0]))
    np.testing.assert_allclose(small, [-0.2, 0.0])


def test_direction_bound_enforced():
    class Wild:
        bound = 1.0

        def __call__(self, k, x):
            return np.full(x.size, 10.0)

    with pytest.raises(ValueError, match="exceeds bound"):
        perturbed_solve(QUADRANT, Sequential(2), x0=[1.0, 1.0], schedule=PerturbationSchedule(Geometric(1, 0.5), Wild()))


def test_undefined_gradient_errors():
    class Broken:
        def gradient(self, x):
            return np.full(x.size, np.nan)

        def __call__(self, x):
            return 0.0

    with pytest.raises(ValueError, match="iteration 1"):
        superiorize(QUADRANT, Sequential(2), x0=[1.0, 1.0], objective=Broken())


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_gradients_match_finite_differences(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(1, 8))
    x = rng.normal(scale=3, size=n)
    for obj in (SquaredNorm(), Linear(rng.normal(size=n)), DistanceToAnchor(rng.normal(size=n))):
        # central differences by hand
        h = 1e-6
        fd = np.array([(obj(x + h * e) - obj(x - h * e)) / (2 * h) for e in np.eye(n)])
        g = obj.gradient(x)
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-5 * (1 + np.abs(g).max()))
        np.testing.assert_allclose(g, approx_fprime(x, obj, 1e-7), rtol=1e-4, atol=1e-4)


def test_random_directions_bounded_over_run():
    problem = generate_random("mixed", 10, 20, seed=8)
    res = perturbed_solve(problem, Simultaneous(20), x0=np.full(10, 3.0),
                          schedule=PerturbationSchedule(Geometric(1, 0.5), SeededRandomUnit(4)))
    assert np.all(res.trace.column("v_norm") <= 1 + 1e-12)
    assert res.status is Status.CONVERGED


def test_superiorize_min_norm_start():
    # x0 is the min-norm point of C, so the run stops at once and the objective cannot rise
    p = Problem((Halfspace([-1, 0], -1), Halfspace([0, -1], -1)))
    x0 = np.array([1.0, 1.0])
    res = superiorize(p, Sequential(2), x0=x0, objective=SquaredNorm(), beta_rule=Geometric(1, 0.5))
    values = [res.trace.initial_objective, *res.trace.column("objective_value")]
    drift = Geometric(1, 0.5).total * (2 * np.linalg.norm(x0) + Geometric(1, 0.5).total)
    assert all(b <= a + drift for a, b in zip(values, values[1:]))
    assert res.status is Status.CONVERGED


def reference_superiorize(sets, x0, anchor, rule, iterations):
    x = np.array(x0, dtype=float)
    for k in range(iterations):
        if max(np.linalg.norm(x - s.project(x)) for s in sets) <= 1e-6:
            break
        g = 2 * (x - anchor)
        y = x - rule(k) * g / max(1.0, np.linalg.norm(g))
        for s in sets:
            y = s.project(y)
        x = y
    return x


def test_superiorized_limit_beats_unperturbed():
    sets = (Halfspace([1, 0], 0), Halfspace([0, 1], 0))
    p = Problem(sets)
    anchor = np.array([-1.0, -1.0])
    obj = DistanceToAnchor(anchor)
    rule = Geometric(2.0, 0.5)
    base = solve(p, Sequential(2), x0=[1.0, 1.0])
    sup = superiorize(p, Sequential(2), x0=[1.0, 1.0], objective=obj, beta_rule=rule)
    ref_sup = reference_superiorize(sets, [1.0, 1.0], anchor, rule, 100)
    ref_base = reference_superiorize(sets, [1.0, 1.0], anchor, Geometric(1e-300, 0.5), 100)
    np.testing.assert_allclose(sup.result, ref_sup, atol=1e-15)
    np.testing.assert_allclose(base.result, ref_base, atol=1e-15)
    assert obj(sup.result) < obj(base.result)
    assert len(sup.trace.column("objective_value")) == len(sup.trace)


def test_resilience_experiment_reports():
    problem = generate_random("mixed", 5, 8, seed=12)
    x0 = np.full(5, 6.0)
    rep = resilience_experiment(
        problem,
        Simultaneous(8),
        SolverConfig(),
        x0,
        [
            PerturbationSchedule(Zero(), SeededRandomUnit(0)),
            PerturbationSchedule(Geometric(100.0, 0.5), SeededRandomUnit(1)),
        ],
    )
    zero, huge = rep.variants
    assert np.array_equal(zero.limit, rep.baseline.limit) and zero.iterations == rep.baseline.iterations
    assert huge.resilient and huge.beta_total == pytest.approx(200, rel=1e-9)
    assert rep.all_resilient
    assert rep.distances.shape == (3, 3) and rep.distances[0, 1] == 0
    assert "not verified" in rep.note
    assert "unperturbed" in rep.summary()
