import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import disk_list
from restart_grade.errors import DomainTooSmallError, OutOfTableError
from restart_grade.lattice import (
    Domain,
    LatticeField,
    LatticePoint,
    as_point,
    box_points,
    disk_points,
    neighbors,
    norm,
)

points = st.integers(1, 5).flatmap(lambda d: st.tuples(*[st.integers(-1000, 1000)] * d))


def test_neighbors_examples():
    assert neighbors((3,)) == [(4,), (2,)]
    assert neighbors((0, 0)) == [(1, 0), (-1, 0), (0, 1), (0, -1)]
    nb = neighbors((1, 1, 1))
    assert len(nb) == 6
    assert all(math.isclose(norm(np.subtract(y, (1, 1, 1))), 1.0) for y in nb)


@given(points)
def test_neighbors_properties(x):
    nb = neighbors(x)
    assert len(nb) == 2 * len(x)
    assert len(set(nb)) == len(nb)
    for y in nb:
        assert sum(abs(a - b) for a, b in zip(x, y)) == 1
        assert LatticePoint(x) in neighbors(y)


@given(points)
def test_norm_matches_sqrt(x):
    assert norm(x) == pytest.approx(math.sqrt(sum(c * c for c in x)), rel=1e-15)
    assert (norm(x) == 0) == (not any(x))


def test_norm_examples():
    assert norm((3, 4)) == 5.0
    assert norm((0, 0, 0)) == 0.0
    assert norm((1, 1)) == pytest.approx(math.sqrt(2))


def test_point_validation():
    with pytest.raises(ValueError):
        LatticePoint(())
    with pytest.raises(ValueError):
        LatticePoint((0,) * 9)
    p = as_point(3)
    assert p == (3,) and p.d == 1
    assert LatticePoint((1, 2)) + (1, 1) == (2, 3)
    with pytest.raises(ValueError):
        as_point((1, 2), 3)


def test_disk_examples():
    assert set(map(tuple, disk_points(1))) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    assert len(disk_points(2)) == 13
    assert len(disk_points(1.4)) == 5
    with pytest.raises(DomainTooSmallError):
        disk_points(0.9)


@given(st.floats(1, 12), st.floats(0, 6))
def test_disk_monotone_and_matches_enumeration(R, extra):
    small = set(map(tuple, disk_points(R)))
    big = set(map(tuple, disk_points(R + extra)))
    assert small <= big
    assert small == set(disk_list(R))
    assert (0, 0) in small


def test_domain_box_and_contains():
    D = box_points(2, 3)
    assert len(D) == 125
    assert (2, -2, 0) in D and (3, 0, 0) not in D
    assert Domain(3, "disk", 2.0).contains((1, 1, 1))


def test_lattice_field_lookup():
    f = LatticeField.from_function(lambda x: float(sum(x)), 2, 2)
    assert f[(1, -2)] == -1.0
    assert f.get((5, 5), "miss") == "miss"
    with pytest.raises(OutOfTableError):
        f[(3, 0)]
    assert dict(f.items())[(2, 2)] == 4.0
