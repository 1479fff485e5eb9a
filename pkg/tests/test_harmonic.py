import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import KERNEL_EXACT, kernel_by_diagonal_sum, watson_g0
from restart_grade.cache import TableCache
from restart_grade.harmonic import (
    B_CONST,
    EULER_GAMMA,
    build_profile,
    escape_probability,
    green_constant,
    green_quadrature,
    green_table,
    local_variance,
    mean_value_defect,
    neighbor_sum,
    potential_kernel,
    potential_kernel_quadrature,
    unit_ball_volume,
)


@pytest.fixture(scope="module")
def kernel32():
    return potential_kernel(32)


@pytest.fixture(scope="module")
def green8():
    return green_table(8, 3)


def test_constants():
    assert EULER_GAMMA == 0.5772156649015329
    assert B_CONST == pytest.approx(1.6169364, abs=1e-7)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert green_constant(3) == pytest.approx(3 / (2 * math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        green_constant(2)


def test_kernel_exact_values(kernel32):
    assert kernel32[(0, 0)] == 0.0
    for x, v in KERNEL_EXACT.items():
        assert kernel32[x] == pytest.approx(v, abs=1e-13)
    for n in range(1, 20):
        assert kernel32[(n, n)] == pytest.approx(kernel_by_diagonal_sum(n), rel=1e-13)


@pytest.mark.parametrize("x", [(1, 0), (1, 1), (2, 1), (3, 0), (5, 2)])
def test_kernel_quadrature_cross_check(kernel32, x):
    assert potential_kernel_quadrature(x) == pytest.approx(kernel32[x], abs=1e-10)


def test_kernel_table_invariants(kernel32):
    a = kernel32.values
    assert np.all(a >= 0)
    assert kernel32.accuracy <= 1e-8
    assert kernel32.method == "mccrea-whipple-exact"
    defect = mean_value_defect(kernel32)
    c = (defect.shape[0] - 1) // 2
    assert defect[c, c] == pytest.approx(1.0, abs=1e-12)
    defect[c, c] = 0.0
    assert np.max(np.abs(defect)) < 1e-8


@given(st.integers(-32, 32), st.integers(-32, 32))
def test_kernel_symmetry(kernel32_cached, i, j):
    k = kernel32_cached
    v = k[(i, j)]
    for p in [(j, i), (-i, j), (i, -j), (-j, -i)]:
        assert k[p] == v


@pytest.fixture(scope="module")
def kernel32_cached():
    return potential_kernel(32)


def test_kernel_errors():
    with pytest.raises(ValueError):
        potential_kernel(1)
    with pytest.raises(ValueError):
        potential_kernel(8, d=3)


def test_kernel_d1_is_abs():
    k = potential_kernel(10, d=1)
    assert all(k[(x,)] == abs(x) for x in range(-10, 11))


def test_green_values(green8):
    G0 = green8[(0, 0, 0)]
    assert G0 == pytest.approx(watson_g0(), abs=1e-6)
    assert green8[(1, 0, 0)] == pytest.approx(G0 - 1, abs=1e-10)
    assert 1 / G0 == pytest.approx(0.6594626, abs=1e-6)
    assert green8.accuracy <= 1e-6
    along = [green8[(n, 0, 0)] for n in range(9)]
    assert all(b < a for a, b in zip(along, along[1:])) and along[-1] > 0


def test_green_mean_value(green8):
    defect = mean_value_defect(green8)  # on the box of radius L - 1
    c = green8.L - 1
    # G(0) = 1 + mean over neighbours
    assert defect[c, c, c] == pytest.approx(-1.0, abs=1e-9)
    defect[c, c, c] = 0.0
    assert np.max(np.abs(defect)) < 1e-9


@pytest.mark.parametrize("x", [(0, 0, 0), (1, 0, 0), (2, 1, 0), (3, 2, 1)])
def test_green_bessel_cross_check(green8, x):
    assert green_quadrature(x) == pytest.approx(green8[x], abs=1e-6)


def test_green_bessel_matches_watson():
    assert green_quadrature((0, 0, 0)) == pytest.approx(watson_g0(), rel=1e-10)


@pytest.mark.parametrize("d, known, outer", [(4, 1.2394671218, 3), (5, 1.1563081248, 2)])
def test_green_higher_dimensions(d, known, outer):
    # a 2L solve box is plenty at d = 5, where G decays like |x|^-3
    tab = green_table(4, d, outer=outer)
    assert tab[(0,) * d] == pytest.approx(known, abs=1e-5)


def test_green_errors():
    with pytest.raises(ValueError):
        green_table(3, 3)
    with pytest.raises(ValueError):
        green_table(8, 6)


def test_escape_probability():
    assert escape_probability(3) == pytest.approx(1 / watson_g0(), abs=1e-7)


# -- profiles -------------------------------------------------------------------------


def test_planar_profile(planar_profile):
    P = planar_profile
    assert P[(0, 0)] == 0.0
    assert P[(1, 0)] == pytest.approx(math.pi / 2, rel=1e-15)
    assert np.all(P.h.values >= 0)
    assert abs(P[(50, 0)] - math.log(50) - B_CONST) < 1e-3
    assert P.h_inf is None


def test_planar_second_order_constant_stable():
    def fitted_c(L):
        P = build_profile(potential_kernel(L))
        r = P.h.norms()
        sel = (r >= 10) & (r <= L / 2)
        return float(np.max(np.abs(P.h.values[sel] - np.log(r[sel]) - B_CONST) * r[sel] ** 2))

    c32, c64 = fitted_c(32), fitted_c(64)
    assert c32 < 0.1
    assert c64 == pytest.approx(c32, rel=1e-6)


def test_spatial_profile(spatial_profile, green8):
    P = spatial_profile
    a3 = 3 / (2 * math.pi)
    assert P.h_inf == pytest.approx(green8[(0, 0, 0)] / a3, abs=1e-5)
    assert P.h_inf == pytest.approx(3.1759, abs=1e-4)
    assert np.all(P.h.values >= 0) and np.all(P.h.values < P.h_inf)
    # |x| (h_inf - h(x)) -> 1 with an O(|x|^-2) correction
    scaled = [n * (P.h_inf - P[(n, 0, 0)]) for n in (4, 8, 12)]
    errs = [abs(s - 1) for s in scaled]
    assert errs[-1] < 5e-3 and errs[0] > errs[1] > errs[2]


def test_profile_errors(kernel32):
    with pytest.raises(ValueError):
        build_profile(kernel32, z=(1, 0))


def test_local_variance_examples(planar_profile):
    P1 = build_profile(potential_kernel(8, d=1))
    assert local_variance(P1, (3,)) == 1.0
    n = 30
    V = local_variance(planar_profile, (n, 0))
    assert abs(V - 1 / (2 * n * n)) < 1 / n**3
    assert V == pytest.approx(5.56e-4, abs=1e-6)


def test_local_variance_spatial(spatial_profile):
    n = 12
    V = local_variance(spatial_profile, (n, 0, 0))
    assert V == pytest.approx(n**-4 / 3, rel=0.05)


def test_local_variance_outside_table(planar_profile):
    from restart_grade.errors import OutOfTableError

    with pytest.raises(OutOfTableError):
        local_variance(planar_profile, (64, 0))


def test_neighbor_sum_matches_loop():
    rng = np.random.default_rng(1)
    a = rng.random((5, 5))
    s = neighbor_sum(a)
    assert s[0, 0] == pytest.approx(a[0, 1] + a[2, 1] + a[1, 0] + a[1, 2])


# -- cache ------------------------------------------------------------------------------


def test_cache_hit_is_bit_identical(tmp_path):
    cache = TableCache(tmp_path)
    fresh = potential_kernel(12, cache=cache)
    again = potential_kernel(12, cache=cache)
    assert np.array_equal(fresh.values, again.values)
    g1 = green_table(4, 3, cache=cache)
    g2 = green_table(4, 3, cache=cache)
    assert np.array_equal(g1.values, g2.values)
    assert g2.accuracy == g1.accuracy
    header = next(iter(tmp_path.glob("green*.csv"))).read_text().splitlines()[0]
    assert header == "x1,x2,x3,value"


def test_cache_corruption_triggers_recompute(tmp_path, caplog):
    cache = TableCache(tmp_path)
    fresh = potential_kernel(6, cache=cache)
    path = next(tmp_path.glob("potential-kernel*.csv"))
    text = path.read_text().replace("0.0", "9.0", 1)
    path.write_text(text)
    assert cache.load(2, "potential-kernel", 6, fresh.method) is None
    again = potential_kernel(6, cache=cache)
    assert np.array_equal(fresh.values, again.values)
    assert any("checksum" in r.message for r in caplog.records)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=9, max_size=9))
def test_cache_roundtrip_exact(tmp_path_factory, vals):
    from restart_grade.lattice import LatticeField

    d = tmp_path_factory.mktemp("rt")
    cache = TableCache(d)
    field = LatticeField(np.array(vals).reshape(3, 3), 1)
    cache.store(field, 2, "test", 1, "m", 0.0)
    loaded, meta = cache.load(2, "test", 1, "m")
    assert np.array_equal(loaded.values, field.values)
    assert meta["kind"] == "test" and meta["L"] == 1
