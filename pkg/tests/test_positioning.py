import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SHAPES, random_unit
from seqplic import (
    InfeasibleFractions,
    NoConvergence,
    TopologyClass,
    VolumeEvaluation,
    build_bracket_table,
    classify_topology,
    cube_breakpoints,
    cube_explicit_position,
    find_position,
    initial_guess,
    position_sequential,
    position_single,
    primary_volume_fraction,
    truncate_faces,
)
from seqplic.oracle import oracle_truncated_volume
from seqplic.positioning import fractions_admissible

E1, E2, E3 = np.eye(3)


def smoothstep(x):
    return 3 * x * x - 2 * x**3


def test_initial_guess_midpoint_and_limits():
    assert initial_guess(0.5, -1.0, 3.0) == pytest.approx(1.0, abs=1e-15)
    assert initial_guess(1e-12, 0.0, 1.0) == pytest.approx(0.0, abs=1e-5)
    assert initial_guess(1 - 1e-12, 0.0, 1.0) == pytest.approx(1.0, abs=1e-5)


def test_initial_guess_inverts_the_spline():
    x = initial_guess(0.25, 0.0, 1.0)
    assert x == pytest.approx(0.5 - math.cos(math.radians(80.0)), abs=1e-15)
    assert smoothstep(x) == pytest.approx(0.25, abs=1e-15)
    alphas = np.linspace(1e-6, 1 - 1e-6, 1000)
    guesses = [initial_guess(a, 0.0, 1.0) for a in alphas]
    assert np.all(np.diff(guesses) > 0)
    np.testing.assert_allclose(smoothstep(np.array(guesses)), alphas, atol=1e-12)


def _evaluator(P, n):
    return lambda s: primary_volume_fraction(P, n, s)


def test_find_position_linear_direction(cube):
    table = build_bracket_table(cube.relative_vertices, E1)
    s, count = find_position(_evaluator(cube, E1), table, 0.37)
    assert s == pytest.approx(-0.13, abs=1e-15)
    assert count == 1


def test_find_position_at_cube_breakpoints(cube):
    n = np.ones(3) / math.sqrt(3.0)
    table = build_bracket_table(cube.relative_vertices, n)
    for alpha in list(cube_breakpoints(n)[1:-1]) + [0.01, 0.2, 0.5, 0.8, 0.99]:
        s, _ = find_position(_evaluator(cube, n), table, float(alpha))
        assert s == pytest.approx(cube_explicit_position(n, float(alpha), frame="centre"), abs=1e-12)


def test_find_position_rejects_bad_target(cube):
    table = build_bracket_table(cube.relative_vertices, E1)
    with pytest.raises(ValueError):
        find_position(_evaluator(cube, E1), table, 1.0)


def test_find_position_gives_up_on_flat_evaluator(cube):
    table = build_bracket_table(cube.relative_vertices, np.ones(3) / math.sqrt(3.0))
    flat = lambda s: VolumeEvaluation(0.0, 0.0, 0.0, 0.0)  # noqa: E731
    with pytest.raises(NoConvergence):
        find_position(flat, table, 0.5, max_iter=1)


@given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(sorted(SHAPES)), alpha=st.floats(1e-9, 1 - 1e-9))
def test_position_single_hits_target(seed, name, alpha):
    P = SHAPES[name]
    n = random_unit(np.random.default_rng(seed))
    s, count = position_single(P, n, alpha)
    assert abs(primary_volume_fraction(P, n, s).value - alpha) <= 1e-12
    assert 1 <= count <= 10


# sequential positioning -----------------------------------------------------


def test_symmetric_triple(cube):
    r = position_sequential(cube, E1, 0.5, E2, 0.25)
    assert r.s_star == pytest.approx(0.0, abs=1e-15)
    assert r.t_star == pytest.approx(0.0, abs=1e-15)
    assert r.topology is TopologyClass.TRIPLE


def test_parallel_shortcut(cube):
    r = position_sequential(cube, E1, 0.3, E1, 0.4)
    assert r.s_star == pytest.approx(-0.2, abs=1e-15)
    assert r.t_star == pytest.approx(0.2, abs=1e-15)
    assert r.topology is TopologyClass.PARALLEL


def test_antiparallel_shortcut(cube):
    r = position_sequential(cube, E1, 0.3, -E1, 0.3)
    assert r.s_star == pytest.approx(-0.2, abs=1e-15)
    assert r.t_star == pytest.approx(-0.2, abs=1e-15)
    assert r.topology is TopologyClass.ANTIPARALLEL


@pytest.mark.parametrize("pair", [(0.0, 0.5), (0.5, 0.0), (0.6, 0.5), (1e-10, 0.5), (0.5, 1.0)])
def test_infeasible_fractions(cube, pair):
    with pytest.raises(InfeasibleFractions):
        position_sequential(cube, E1, pair[0], E2, pair[1])


def test_admissible_bounds():
    eps = 1e-9
    assert fractions_admissible(eps, eps, eps)
    assert fractions_admissible(0.5, 0.5 - eps, eps)
    assert fractions_admissible(1 - 2 * eps, eps, eps)
    assert not fractions_admissible(1 - 2 * eps, 2 * eps, eps)
    assert not fractions_admissible(1 - eps, eps, eps)
    assert not fractions_admissible(0.5, 0.5, eps)


@given(
    seed=st.integers(0, 2**32 - 1),
    name=st.sampled_from(sorted(SHAPES)),
    a1=st.floats(1e-9, 0.999),
    share=st.floats(1e-6, 0.999),
)
def test_sequential_volumes_against_oracle(seed, name, a1, share):
    P = SHAPES[name]
    rng = np.random.default_rng(seed)
    n1, n2 = random_unit(rng), random_unit(rng)
    a2 = share * (1.0 - 1e-9 - a1)
    if not fractions_admissible(a1, a2):
        return
    r = position_sequential(P, n1, a1, n2, a2)
    assert r.residual_primary <= 1e-12
    assert r.residual_secondary <= 1e-12
    assert r.truncations_secondary >= 1
    first = oracle_truncated_volume(P, [(n1, r.s_star)]) / P.volume
    second = oracle_truncated_volume(P, [(-n1, -r.s_star), (n2, r.t_star)]) / P.volume
    assert first == pytest.approx(a1, abs=1e-12)
    assert second == pytest.approx(a2, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1), a1=st.floats(0.01, 0.9), share=st.floats(0.01, 0.99))
def test_point_reflection_symmetry(seed, a1, share):
    """On the cube, reflecting through the centre negates both normals and keeps the offsets."""
    cube = SHAPES["cube"]
    rng = np.random.default_rng(seed)
    n1, n2 = random_unit(rng), random_unit(rng)
    a2 = share * (1.0 - a1) * 0.99
    r = position_sequential(cube, n1, a1, n2, a2)
    m = position_sequential(cube, -n1, a1, -n2, a2)
    assert m.s_star == pytest.approx(r.s_star, abs=1e-12)
    assert m.t_star == pytest.approx(r.t_star, abs=1e-12)
    # the complementary primary fraction flips the primary offset
    s_c, _ = position_single(cube, -n1, 1.0 - a1)
    assert s_c == pytest.approx(-r.s_star, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1), a1=st.floats(1e-9, 0.9), a2=st.floats(1e-9, 0.09))
def test_degenerate_cases_equal_independent_solves(seed, a1, a2):
    P = SHAPES["dodecahedron"]
    n = random_unit(np.random.default_rng(seed))
    par = position_sequential(P, n, a1, n, a2)
    assert (par.s_star, par.truncations_primary) == position_single(P, n, a1)
    assert (par.t_star, par.truncations_secondary) == position_single(P, n, a1 + a2)
    anti = position_sequential(P, n, a1, -n, a2)
    assert (anti.s_star, anti.truncations_primary) == position_single(P, n, a1)
    assert (anti.t_star, anti.truncations_secondary) == position_single(P, -n, a2)


def test_classify_topology_half_cube(cube):
    T = truncate_faces(cube, E1, 0.0)
    assert classify_topology(T, E2, -0.5) is TopologyClass.NON_WETTED
    assert classify_topology(T, E2, -0.6) is TopologyClass.NON_WETTED
    assert classify_topology(T, E2, 0.5) is TopologyClass.FULLY_WETTED
    assert classify_topology(T, E2, 0.0) is TopologyClass.TRIPLE


def test_classify_topology_uses_the_cut(cube):
    # secondary plane below the cut polygon but still inside the remainder
    n2 = np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0)
    T = truncate_faces(cube, E1, 0.2)
    t_below = (np.array([0.2, 0.0, -0.5]) @ n2) - 1e-3
    assert classify_topology(T, n2, t_below) is TopologyClass.NON_WETTED
    t_above = (np.array([0.2, 0.0, 0.5]) @ n2) + 1e-3
    assert classify_topology(T, n2, t_above) is TopologyClass.FULLY_WETTED
