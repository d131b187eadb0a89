import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadmorrey.grid import (
    GridFunction,
    cube_sums,
    indicator,
    load_binary,
    load_csv,
    power_law,
    save_binary,
    save_csv,
    triple_sums,
    zeros,
)
from dyadmorrey.lattice import Box, DyadicCube, LatticeError

UNIT = DyadicCube(0, (0,))


def random_step(seed, n=1, J0=1, j_max=5):
    rng = np.random.default_rng(seed)
    N = 2 ** (J0 + j_max + 1)
    v = rng.exponential(size=(N,) * n) * (rng.random((N,) * n) < 0.4)
    return GridFunction(v, J0, j_max)


def test_shape_and_rectification():
    g = GridFunction([-1.0, 2.0, 0.0, -3.0], 0, 1)
    assert g.N == 4 and g.h == 0.5 and g.n == 1
    assert np.array_equal(g.values, [1.0, 2.0, 0.0, 3.0])
    with pytest.raises(ValueError):
        GridFunction(np.zeros(5), 0, 1)
    with pytest.raises(ValueError):
        GridFunction([np.inf, 0, 0, 0], 0, 1)
    with pytest.raises(AttributeError):
        g.J0 = 3
    with pytest.raises(ValueError):
        g.values[0] = 5.0


def test_indicator_integrals():
    f = indicator(UNIT, 1, 1, 6)
    assert f.integrate() == 1.0
    assert f.integrate(Box(((0, Fraction(1, 4)),))) == 0.25
    assert f.restrict(Box(((0, Fraction(1, 2)),))).integrate() == 0.5
    with pytest.raises(LatticeError):
        indicator(DyadicCube(0, (5,)), 1, 1, 6)
    with pytest.raises(LatticeError):
        indicator(DyadicCube(8, (0,)), 1, 1, 6)
    g = indicator(DyadicCube(0, (0, 0)), 2, 1, 4)
    assert g.integrate() == 1.0


def test_power_law_cells_match_antiderivative():
    f = power_law(2.0, 1, 1, 8)
    h = f.h
    assert f.value_at([h / 2]) == pytest.approx(2 * h**-0.5, rel=1e-13)
    assert f.value_at([1 + h / 2]) == pytest.approx(2 * (math.sqrt(1 + h) - 1) / h, rel=1e-12)
    assert f.integrate(UNIT) == pytest.approx(2.0, rel=1e-13)
    assert np.all(f.values >= 0)
    with pytest.raises(ValueError):
        power_law(0.0, 1, 1, 8)


def test_power_law_2d_mass():
    # int over the unit disc-free square [0,1)^2 of |x|^-1: 2 * int_0^{pi/4} sec(t) dt
    f = power_law(2.0, 2, 1, 5)
    exact = 2 * math.log(1 + math.sqrt(2))
    assert f.integrate(DyadicCube(0, (0, 0))) == pytest.approx(exact, rel=2e-3)


def test_dilation():
    f = indicator(UNIT, 1, 1, 6)
    g = f.dilate_dyadic(1)
    assert g.integrate() == 0.5
    assert np.array_equal(g.values, f.values) and g.j_max == 7 and g.J0 == 0
    assert np.array_equal(g.values, indicator(DyadicCube(1, (0,)), 1, 0, 7).values)
    assert f.dilate_dyadic(0).values is not None and f.dilate_dyadic(0).J0 == f.J0


@given(st.integers(0, 2**31), st.integers(-3, 3))
def test_dilation_round_trip_and_mass(seed, m):
    f = random_step(seed)
    g = f.dilate_dyadic(m)
    assert g.integrate() == pytest.approx(2.0 ** (-m) * f.integrate(), rel=1e-14)
    back = g.dilate_dyadic(-m)
    assert back.same_grid(f) and np.array_equal(back.values, f.values)


def test_translate():
    f = indicator(UNIT, 1, 1, 4)
    g = f.translate_dyadic(1, -1)
    assert np.array_equal(g.values, indicator(Box(((Fraction(-1, 2), Fraction(1, 2)),)), 1, 1, 4).values)
    assert f.translate_dyadic(0, 5).is_zero()


@given(st.integers(0, 2**31))
def test_integration_exact_on_dyadic_cubes(seed):
    f = random_step(seed, n=2, J0=0, j_max=3)
    for j in range(0, 4):
        sums, k0 = cube_sums(f.values, f.J0, f.j_max, j)
        for a in range(sums.shape[0]):
            for b in range(sums.shape[1]):
                Q = DyadicCube(j, (k0 + a, k0 + b))
                assert f.integrate(Q) == pytest.approx(sums[a, b] * f.cell_volume, rel=1e-12, abs=1e-15)
                # additivity over children
                assert f.integrate(Q) == pytest.approx(sum(f.integrate(c) for c in Q.children()),
                                                       rel=1e-12, abs=1e-15)


@given(st.integers(0, 2**31), st.floats(0, 5))
def test_integrate_linear_and_monotone(seed, c):
    f, g = random_step(seed), random_step(seed + 1)
    B_small = Box(((Fraction(-1, 2), Fraction(1, 4)),))
    B_big = Box(((Fraction(-1), Fraction(3, 4)),))
    lhs = f.scale(c).add(g).integrate(B_small)
    assert lhs == pytest.approx(c * f.integrate(B_small) + g.integrate(B_small), rel=1e-12, abs=1e-14)
    assert f.integrate(B_small) <= f.integrate(B_big) + 1e-15


def test_refine_coarsen():
    f = random_step(7)
    r = f.refine(2)
    assert r.j_max == f.j_max + 2
    assert r.integrate() == pytest.approx(f.integrate(), rel=1e-14)
    assert np.allclose(r.coarsen(2).values, f.values)


def test_triple_sums_1d():
    v = np.arange(8.0)
    t = triple_sums(v, 0, 2, 1)  # blocks of 2 cells: sums 1, 5, 9, 13
    assert np.array_equal(t, [6.0, 15.0, 27.0, 22.0])


def test_io_roundtrip(tmp_path):
    f = random_step(3, n=2, J0=0, j_max=2)
    save_csv(f, tmp_path / "f.csv")
    save_binary(f, tmp_path / "f.bin")
    for g in (load_csv(tmp_path / "f.csv"), load_binary(tmp_path / "f.bin")):
        assert g.same_grid(f) and np.array_equal(g.values, f.values)


def test_cell_of_and_zero():
    z = zeros(1, 0, 2)
    assert z.is_zero()
    assert z.cell_of([-1.0]) == (0,)
    with pytest.raises(ValueError):
        z.cell_of([1.0])
