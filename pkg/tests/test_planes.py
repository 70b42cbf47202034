import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unit
from seqplic import (
    DegeneracyClass,
    DegenerateNormals,
    LineParallelToFace,
    PlaneConfig,
    degeneracy_class,
    intersection_frame,
)
from seqplic.planes import face_origin

E1, E2, E3 = np.eye(3)


def test_plane_config_levelset():
    plane = PlaneConfig(E1, 0.25, (0.5, 0.5, 0.5))
    assert plane.levelset([0.75, 0.1, 0.9]) == pytest.approx(0.25)
    assert plane.in_negative_halfspace([0.6, 0, 0])
    assert not plane.in_negative_halfspace([0.8, 0, 0])
    flipped = plane.flipped()
    assert flipped.signed_distance == -0.25
    with pytest.raises(ValueError):
        PlaneConfig((1.0, 1.0, 0.0), 0.0, (0.0, 0.0, 0.0))


def test_orthogonal_frame():
    f = intersection_frame(E1, E2, 0.0)
    np.testing.assert_allclose(f.y0, 0.0, atol=1e-15)
    np.testing.assert_allclose(f.tau, E2)
    np.testing.assert_allclose(f.mu, E3)
    f = intersection_frame(E1, E2, 0.3)
    np.testing.assert_allclose(f.y0, [0.3, 0, 0])


def test_oblique_frame_identities():
    n2 = (E1 + E2) / np.sqrt(2.0)
    f = intersection_frame(E1, n2, 0.0)
    assert f.tau @ n2 == pytest.approx(1.0, abs=1e-12)
    assert f.tau @ E1 == pytest.approx(0.0, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1), s=st.floats(-2, 2))
def test_frame_invariants(seed, s):
    rng = np.random.default_rng(seed)
    n1, n2 = random_unit(rng), random_unit(rng)
    if abs(n1 @ n2) > 0.999:
        return
    base = rng.normal(size=3)
    f = intersection_frame(n1, n2, s, base=base)
    assert (f.y0 - base) @ n1 == pytest.approx(s, abs=1e-12)
    assert (f.y0 - base) @ n2 == pytest.approx(0.0, abs=1e-12)
    assert f.tau @ n2 == pytest.approx(1.0, abs=1e-12)
    assert f.tau @ n1 == pytest.approx(0.0, abs=1e-12)
    assert f.mu @ n1 == pytest.approx(0.0, abs=1e-12)
    assert f.mu @ n2 == pytest.approx(0.0, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_swapped_normals_give_the_same_line(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = random_unit(rng), random_unit(rng)
    if abs(n1 @ n2) > 0.99:
        return
    # the line {<x,n1> = s, <x,n2> = t} described from both sides
    s, t = rng.uniform(-1, 1, 2)
    a = intersection_frame(n1, n2, s)
    b = intersection_frame(n2, n1, t)
    assert np.dot(a.mu, b.mu) < 0
    direction = a.mu / np.linalg.norm(a.mu)
    for u in rng.uniform(-2, 2, 5):
        p = b.point(s, u)
        q = a.point(t)
        off = (p - q) - ((p - q) @ direction) * direction
        assert np.linalg.norm(off) < 1e-12


def test_degenerate_normals_rejected():
    with pytest.raises(DegenerateNormals):
        intersection_frame(E1, E1, 0.0)
    with pytest.raises(DegenerateNormals):
        intersection_frame(E1, -E1, 0.0)


def test_nearly_parallel_frame_stays_consistent():
    eps = 1e-6
    n2 = np.array([1 - eps, np.sqrt(1 - (1 - eps) ** 2), 0.0])
    f = intersection_frame(E1, n2, 0.1)
    assert (f.y0 @ E1) == pytest.approx(0.1, abs=1e-10)
    assert (f.y0 @ n2) == pytest.approx(0.0, abs=1e-10)
    assert f.tau @ n2 == pytest.approx(1.0, abs=1e-9)


def test_degeneracy_classes():
    assert degeneracy_class(E1, E1) is DegeneracyClass.PARALLEL
    assert degeneracy_class(E1, -E1) is DegeneracyClass.ANTIPARALLEL
    assert degeneracy_class(E1, E2) is DegeneracyClass.GENERAL


def test_face_origin_on_cube_bottom_face():
    f = intersection_frame(E1, E2, 0.5, base=(0.5, 0.5, 0.5))
    x = face_origin(f, 0.2, (0.0, 0.0, 0.0), -E3)
    np.testing.assert_allclose(x, [1.0, 0.7, 0.0], atol=1e-15)


@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(-1, 1), t2=st.floats(-1, 1))
def test_face_origin_constraints_and_affinity(seed, t1, t2):
    rng = np.random.default_rng(seed)
    n1, n2, nf = random_unit(rng), random_unit(rng), random_unit(rng)
    if abs(n1 @ n2) > 0.99:
        return
    base, vertex = rng.normal(size=3), rng.normal(size=3)
    s = rng.uniform(-1, 1)
    f = intersection_frame(n1, n2, s, base=base)
    if abs(f.mu @ nf) < 1e-2:
        return
    x1 = face_origin(f, t1, vertex, nf)
    x2 = face_origin(f, t2, vertex, nf)
    for x, t in ((x1, t1), (x2, t2)):
        assert (x - base) @ n1 == pytest.approx(s, abs=1e-10)
        assert (x - base) @ n2 == pytest.approx(t, abs=1e-10)
        assert (x - vertex) @ nf == pytest.approx(0.0, abs=1e-10)
    step = (x2 - x1) / (t2 - t1) if t1 != t2 else None
    if step is not None and abs(t2 - t1) > 1e-3:
        x3 = face_origin(f, t1 + 1.0, vertex, nf)
        np.testing.assert_allclose(x3 - x1, step, atol=1e-8)


def test_face_parallel_to_line_rejected():
    f = intersection_frame(E1, E2, 0.0)
    # mu = e3, so any face normal orthogonal to e3 contains the line direction
    with pytest.raises(LineParallelToFace):
        face_origin(f, 0.0, (0.0, 0.0, 0.0), (np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)))
