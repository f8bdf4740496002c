import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stringavg.convex_sets import Ball, Halfspace
from stringavg.problems_io import generate_random
from stringavg.strings import (
    Amalgamator,
    StarConstraints,
    apply_amalgamator,
    apply_string,
    check_index_vector,
    phi,
    validate_star,
)

QUADRANT = [Halfspace([1, 0], 0), Halfspace([0, 1], 0)]


def test_single_projection_string():
    sets = [Ball([0, 0], 1)]
    end, stages = apply_string(sets, (1,), [3, 4])
    np.testing.assert_allclose(end, [0.6, 0.8])
    assert len(stages) == 1 and np.array_equal(stages[0], end)


def test_two_halfspace_string():
    end, stages = apply_string(QUADRANT, (1, 2), [1, 1])
    np.testing.assert_array_equal(end, [0, 0])
    np.testing.assert_array_equal(stages[0], [0, 1])
    np.testing.assert_array_equal(stages[1], [0, 0])
    # independent recomputation from the closed forms: x -> (min(x1,0), x2) -> (x1, min(x2,0))
    x = np.array([1.0, 1.0])
    s1 = np.array([min(x[0], 0), x[1]])
    s2 = np.array([s1[0], min(s1[1], 0)])
    expected_phi = np.sum((x - s1) ** 2) + np.sum((s2 - s1) ** 2)
    assert expected_phi == 2
    assert phi((1, 2), [1, 1], stages) == expected_phi


def test_feasible_point_is_fixed_by_every_string():
    x = np.array([-1.0, -2.0])
    end, stages = apply_string(QUADRANT, (2, 1, 2), x)
    assert np.array_equal(end, x) and all(np.array_equal(s, x) for s in stages)
    assert phi((2, 1, 2), x, stages) == 0


def test_phi_single_index_is_squared_distance():
    s = Ball([0, 0], 1)
    _, stages = apply_string([s], (1,), [0, 3])
    assert phi((1,), [0, 3], stages) == pytest.approx(4)


def test_phi_stage_count_mismatch():
    with pytest.raises(ValueError):
        phi((1, 2), [0, 0], [np.zeros(2)])


def test_index_out_of_range():
    with pytest.raises(ValueError):
        apply_string(QUADRANT, (1, 3), [0, 0])
    with pytest.raises(ValueError):
        check_index_vector((0,))
    with pytest.raises(ValueError):
        check_index_vector(())


def test_amalgamator_examples():
    x = np.array([1.0, 1.0])
    nxt, _, _ = apply_amalgamator(QUADRANT[:1], Amalgamator([(1,)], [1.0]), x)
    np.testing.assert_array_equal(nxt, [0, 1])

    nxt, results, phi_sum = apply_amalgamator(QUADRANT, Amalgamator([(1,), (2,)], [0.5, 0.5]), x)
    np.testing.assert_array_equal(nxt, [0.5, 0.5])
    assert phi_sum == 2  # unweighted: 1 + 1
    assert len(results) == 2

    y = np.array([-1.0, -0.5])
    nxt, _, phi_sum = apply_amalgamator(QUADRANT, Amalgamator([(1, 2), (2,)], [0.3, 0.7]), y)
    np.testing.assert_allclose(nxt, y, atol=1e-15)
    assert phi_sum == 0


def test_amalgamator_rejects_unfit_before_computing():
    with pytest.raises(ValueError, match="not fit"):
        apply_amalgamator(QUADRANT, Amalgamator([(1,)], [1.0]), [np.nan, 0])


def test_amalgamator_weights():
    a = Amalgamator([(1,), (2,)], [0.5, 0.5 + 5e-10])
    assert abs(a.weights.sum() - 1) <= 1e-15
    with pytest.raises(ValueError):
        Amalgamator([(1,), (2,)], [0.5, 0.6])
    with pytest.raises(ValueError):
        Amalgamator([(1,), (2,)], [1.0, 0.0])
    with pytest.raises(ValueError):
        Amalgamator([(1,)], [0.5, 0.5])


def test_validate_star_examples():
    sc = StarConstraints(2, 0.4, 2)
    assert validate_star(Amalgamator([(1,), (2,)], [0.5, 0.5]), sc).ok

    rep = validate_star(Amalgamator([(1,), (2,)], [0.7, 0.3]), sc)
    assert not rep.ok and rep.violations == ["w((2))=0.3 < Δ=0.4"]

    rep = validate_star(Amalgamator([(1, 2, 1)], [1.0]), sc)
    assert not rep.ok and rep.violations == ["p((1,2,1))=3 > q̄=2"]


def test_validate_star_reports_every_clause_without_raising():
    sc = StarConstraints(3, 0.3, 3)
    rep = validate_star(Amalgamator([(1, 1, 1, 1), (2,)], [0.8, 0.2]), sc)
    assert not rep.ok
    assert len(rep.violations) == 3  # not fit, too long, weight too small
    assert "not fit" in str(rep)


def test_validate_star_warns_on_duplicates():
    sc = StarConstraints(2, 0.2, 2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = validate_star(Amalgamator([(1, 2), (1, 2)], [0.5, 0.5]), sc)
    assert rep.ok and rep.notes
    assert any("duplicate" in str(w.message) for w in caught)


@pytest.mark.parametrize("m,delta,qbar", [(2, 0.5, 2), (2, 0.6, 2), (2, 0.0, 2), (3, 0.1, 2), (2, 0.1, 2.5)])
def test_star_constraints_invalid(m, delta, qbar):
    with pytest.raises(ValueError):
        StarConstraints(m, delta, qbar)


@st.composite
def cases(draw):
    seed = draw(st.integers(0, 10**6))
    rng = np.random.Generator(np.random.PCG64(seed))
    n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    problem = generate_random("mixed", n, m, seed, margin=0.2)
    strings = [tuple(int(i) for i in rng.integers(1, m + 1, size=int(rng.integers(1, 5)))) for _ in range(3)]
    strings.append(tuple(range(1, m + 1)))
    w = rng.dirichlet(np.ones(4)) * 0.5 + 0.125
    return problem, Amalgamator(strings, w), rng.normal(scale=5, size=n), rng.normal(scale=5, size=n)


@settings(max_examples=200, deadline=None)
@given(case=cases())
def test_string_invariants(case):
    problem, amalg, x, y = case
    sets, z = problem.sets, problem.known_feasible_point
    delta = float(amalg.weights.min())
    for t in amalg.strings:
        ex, sx = apply_string(sets, t, x)
        ey, _ = apply_string(sets, t, y)
        assert np.linalg.norm(ex - ey) <= np.linalg.norm(x - y) + 1e-10
        f = phi(t, x, sx)
        assert f >= 0
        base = np.sum((z - x) ** 2)
        assert base >= np.sum((z - ex) ** 2) + f - 1e-9 * (1 + base)
    nx, _, phi_sum = apply_amalgamator(sets, amalg, x)
    ny, _, _ = apply_amalgamator(sets, amalg, y)
    assert np.linalg.norm(nx - ny) <= np.linalg.norm(x - y) + 1e-10
    base = np.sum((z - x) ** 2)
    assert base >= np.sum((z - nx) ** 2) + delta * phi_sum - 1e-9 * (1 + base)
    fixed, _, zero = apply_amalgamator(sets, amalg, z)
    np.testing.assert_allclose(fixed, z, atol=1e-10)
    assert zero <= 1e-20
