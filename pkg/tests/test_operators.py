import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadmorrey.grid import GridFunction, indicator, zeros
from dyadmorrey.lattice import DyadicCube
from dyadmorrey.norms import MorreyExponents, maximal, morrey_norm
from dyadmorrey.operators import (
    MajorantTruncation,
    averaged_majorant,
    cube_sum_table,
    dyadic_majorant_I,
    dyadic_majorant_J,
    f_jq,
    hedberg_optimal_L,
    hedberg_split,
    i_alpha,
    j_alpha,
    level_slice,
    powered_averaged_majorant,
    u_powered_cube_sum,
)
from dyadmorrey.oracles import (
    i_alpha_step_1d,
    j_alpha_indicator_1d,
    j_alpha_step_1d,
    linf_relative_error,
    refined_at_centers,
)
from dyadmorrey.verifier import solve_params

UNIT = DyadicCube(0, (0,))


def random_step(seed, n=1, J0=1, j_max=5, density=0.4):
    rng = np.random.default_rng(seed)
    N = 2 ** (J0 + j_max + 1)
    v = rng.exponential(size=(N,) * n) * (rng.random((N,) * n) < density)
    return GridFunction(v, J0, j_max)


def test_params_validation():
    with pytest.raises(ValueError):
        j_alpha(zeros(1, 1, 3), zeros(1, 1, 3), 1.0)
    with pytest.raises(ValueError):
        i_alpha(zeros(1, 1, 3), zeros(1, 1, 3), 2.0)
    with pytest.raises(ValueError):
        j_alpha(zeros(1, 1, 3), zeros(1, 1, 4), 0.5)
    with pytest.raises(ValueError):
        i_alpha(zeros(2, 0, 2), zeros(2, 0, 2), 1.0)
    with pytest.raises(ValueError):
        i_alpha(zeros(1, 1, 10), zeros(1, 1, 10), 1.0)
    with pytest.raises(ValueError):
        MajorantTruncation(3, 1).resolve(zeros(1, 1, 3))


def test_j_alpha_closed_form_examples():
    f = indicator(UNIT, 1, 1, 10)
    g = j_alpha(f, f, 0.5)
    x = f.centers()
    i = int(np.argmin(np.abs(x - 0.5)))
    assert g.values[i] == pytest.approx(2 * math.sqrt(2), rel=1e-2)
    assert g.values[i] == pytest.approx(j_alpha_indicator_1d(0, 1, 0.5, x[i]), rel=1e-13)
    assert g.value_at([3.0]) == 0.0 if f.J0 > 1 else True
    assert j_alpha(zeros(1, 1, 10), f, 0.5).is_zero()


def test_j_alpha_far_point_vanishes():
    f = indicator(UNIT, 1, 2, 6)
    assert j_alpha(f, f, 0.5).value_at([3.0]) == 0.0


@given(st.integers(0, 2**31), st.floats(0.05, 0.95))
def test_j_alpha_exact_at_centres_1d(seed, alpha):
    f1, f2 = random_step(seed), random_step(seed + 1)
    g = j_alpha(f1, f2, alpha)
    x = f1.centers()
    for i in range(0, f1.N, 5):
        assert g.values[i] == pytest.approx(j_alpha_step_1d(f1, f2, alpha, x[i]), rel=1e-11, abs=1e-12)


def test_j_alpha_2d_against_refined():
    f = indicator(DyadicCube(0, (0, 0)), 2, 0, 3)
    prod = j_alpha(f, f, 1.0)
    ref = refined_at_centers(j_alpha, f, f, extra=2, P=1.0)
    assert linf_relative_error(prod, ref) < 0.03


@given(st.integers(0, 2**31), st.floats(0.1, 0.9), st.floats(0.1, 5))
def test_j_alpha_bilinear_symmetric(seed, alpha, c):
    f1, f2 = random_step(seed), random_step(seed + 1)
    base = j_alpha(f1, f2, alpha).values
    assert np.allclose(j_alpha(f1.scale(c), f2, alpha).values, c * base, rtol=1e-12, atol=1e-300)
    assert np.allclose(j_alpha(f2, f1, alpha).values, base, rtol=1e-12, atol=1e-14)
    g = random_step(seed + 2)
    assert np.allclose(j_alpha(f1 + g, f2, alpha).values, base + j_alpha(g, f2, alpha).values,
                       rtol=1e-12, atol=1e-13)


@given(st.integers(0, 2**31), st.floats(0.1, 1.9))
def test_i_alpha_exact_at_centres(seed, alpha):
    f1, f2 = random_step(seed, j_max=4), random_step(seed + 1, j_max=4)
    g = i_alpha(f1, f2, alpha)
    x = f1.centers()
    for i in range(0, f1.N, 3):
        assert g.values[i] == pytest.approx(i_alpha_step_1d(f1, f2, alpha, x[i]), rel=1e-10, abs=1e-12)


def test_i_alpha_refined_example():
    f = indicator(UNIT, 1, 1, 6)
    prod = i_alpha(f, f, 1.5)
    ref = refined_at_centers(i_alpha, f, f, extra=2, P=1.5)
    i = int(np.argmin(np.abs(f.centers() - 0.5)))
    assert prod.values[i] == pytest.approx(ref.values[i], rel=1e-2)
    assert i_alpha(zeros(1, 1, 6), f, 1.5).is_zero()


@given(st.integers(0, 2**31))
def test_i_alpha_monotone(seed):
    f1, f2 = random_step(seed, j_max=4), random_step(seed + 1, j_max=4)
    bigger = f1 + random_step(seed + 2, j_max=4)
    assert np.all(i_alpha(f1, f2, 1.2).values <= i_alpha(bigger, f2, 1.2).values * (1 + 1e-12) + 1e-300)


def test_majorant_j_single_subcell_level():
    f = random_step(3)
    T = MajorantTruncation(f.j_max + 3, f.j_max + 3, tails=False)
    j = f.j_max + 3
    got = dyadic_majorant_J(f, f, 0.5, T).values
    expected = 2.0 ** (j * 0.5) * f.values**2 * min(f.h, 2 * 2.0**-j)
    assert np.allclose(got, expected, rtol=1e-13)


def test_majorant_j_monotone_in_truncation_and_tails_exact():
    f1, f2 = random_step(5), random_step(6)
    small = dyadic_majorant_J(f1, f2, 0.5, MajorantTruncation(-1, 4, tails=False)).values
    big = dyadic_majorant_J(f1, f2, 0.5, MajorantTruncation(-3, 7, tails=False)).values
    assert np.all(big >= small)
    # closed-form tails make the window irrelevant
    a = dyadic_majorant_J(f1, f2, 0.5).values
    b = dyadic_majorant_J(f1, f2, 0.5, MajorantTruncation(-6, 12)).values
    assert np.allclose(a, b, rtol=1e-12)


def test_level_slices_sum_to_majorant():
    f1, f2 = random_step(8), random_step(9)
    T = MajorantTruncation(-2, f1.j_max, tails=False)
    total = sum(level_slice(f1, f2, 0.5, j).values for j in range(-2, f1.j_max + 1))
    assert np.allclose(total, dyadic_majorant_J(f1, f2, 0.5, T).values, rtol=1e-12)


def test_f_jq_blocks():
    f1, f2 = random_step(10), random_step(11)
    j = 1
    cubes = [DyadicCube(j, (k,)) for k in range(-4, 4)]
    blocks = [f_jq(f1, f2, 0.5, Q) for Q in cubes]
    for Q, b in zip(cubes, blocks):
        outside = b.values.copy()
        outside[b.cube_slices(Q)] = 0
        assert not outside.any()
    assert np.allclose(sum(b.values for b in blocks), level_slice(f1, f2, 0.5, j).values)


def test_majorant_i_single_level_example():
    f = indicator(UNIT, 1, 1, 5)
    T = MajorantTruncation(0, 0, tails=False)
    g = dyadic_majorant_I(f, f, 1.0, T)
    assert g.value_at([0.5]) == pytest.approx(1.0, rel=1e-14)
    for u in (0.7, 2.0):
        assert u_powered_cube_sum(f, f, 1.0, u, T).value_at([0.5]) == pytest.approx(1.0, rel=1e-14)


@given(st.integers(0, 2**31), st.floats(0.2, 1.8))
def test_u_one_is_majorant_i(seed, alpha):
    f1, f2 = random_step(seed), random_step(seed + 1)
    assert np.array_equal(u_powered_cube_sum(f1, f2, alpha, 1.0).values,
                          dyadic_majorant_I(f1, f2, alpha).values)


def test_cube_sum_tails_match_wide_window():
    f1, f2 = random_step(12), random_step(13)
    a = dyadic_majorant_I(f1, f2, 1.5).values
    b = dyadic_majorant_I(f1, f2, 1.5, MajorantTruncation(-25, 40)).values
    assert np.allclose(a, b, rtol=1e-10)


def test_coarse_tail_diverges_when_exponent_nonpositive():
    f = random_step(1)
    tab = cube_sum_table(f, f, 1.5, u=2.0)  # gamma = 2/2 - 1.5 < 0
    assert np.all(np.isinf(tab.total()))


def test_averaged_majorants():
    f1, f2 = random_step(14, j_max=4), random_step(15, j_max=4)
    assert averaged_majorant(zeros(1, 1, 4), f2, 0.5).is_zero()
    lo = powered_averaged_majorant(f1, f2, 0.5, 1.5).values
    hi = powered_averaged_majorant(f1, f2, 0.5, 3.0).values
    assert np.all(hi >= lo * (1 - 1e-12))
    assert np.all(powered_averaged_majorant(f1, f2, 0.5, 1.5).values
                  >= averaged_majorant(f1, f2, 0.5).values * (1 - 1e-12))
    with pytest.raises(ValueError, match="Minkowski"):
        powered_averaged_majorant(f1, f2, 0.5, 1.0)


def test_averaged_majorant_below_cube_sum():
    # averaging the ball integral over Q only sees points of 3Q, with l(Q)^(n-alpha) |B| <= ...
    f = indicator(UNIT, 1, 1, 8)
    g = random_step(16, j_max=8)
    ratio = averaged_majorant(f, g, 0.5).values / np.maximum(dyadic_majorant_I(f, g, 0.5).values, 1e-300)
    assert ratio.max() <= 1.0


def test_j_alpha_dominated_by_majorant():
    for seed in range(5):
        f1, f2 = random_step(seed, j_max=7), random_step(seed + 50, j_max=7)
        J = j_alpha(f1, f2, 0.5).values
        M = dyadic_majorant_J(f1, f2, 0.5).values
        assert not np.any((J > 0) & (M == 0))
        I = i_alpha(f1, f2, 1.5).values
        MI = dyadic_majorant_I(f1, f2, 1.5).values
        assert not np.any((I > 0) & (MI == 0))


@given(st.integers(0, 2**31), st.floats(-12, 4), st.sampled_from([0.8, 1.5, 2.5]))
def test_hedberg_partition(seed, log_L, u):
    f1, f2 = random_step(seed), random_step(seed + 1)
    L = 2.0**log_L
    tab = cube_sum_table(f1, f2, 0.5, u)
    S1, S2 = tab.split(L)
    tot = tab.total()
    assert np.allclose(S1 + S2, tot, rtol=1e-12, atol=0)
    cell = (int(seed % f1.N),)
    s1, s2 = hedberg_split(f1, f2, 0.5, u, L, cell)
    assert s1 + s2 == pytest.approx(tot[cell], rel=1e-12, abs=1e-300)


def test_hedberg_geometric_oracle():
    # locally constant near x: every small tripled cube sees the constant 1
    f = indicator(UNIT, 1, 1, 10)
    u, alpha = 1.4, 0.5
    cell = f.cell_of([0.5])
    for k in (5, 8, 12):
        L = 2.0**-k
        S1, _ = hedberg_split(f, f, alpha, u, L, cell)
        assert S1 == pytest.approx(3 ** (2 / u) * L**alpha / (1 - 2**-alpha), rel=1e-12)
    S1, _ = hedberg_split(f, f, alpha, u, 2.0**-35, cell)
    assert S1 < 1e-4


def test_hedberg_optimal_L():
    tp = solve_params(1, 3 / 35, 2.5, 1.5, 2.5, 1.5)
    f = indicator(UNIT, 1, 1, 6)
    L = hedberg_optimal_L(f, f, tp, tp.u)
    norms = morrey_norm(f, MorreyExponents(2.5, 1.5)) ** 2
    mm = maximal(f, tp.u).values ** 2
    assert np.allclose(L, (norms / mm) ** tp.p)
    # any nonzero input makes the maximal function positive everywhere
    z = zeros(1, 1, 6)
    assert np.isinf(hedberg_optimal_L(z, f, tp, tp.u, cell=(0,)))
    with pytest.raises(ValueError):
        hedberg_split(f, f, 0.5, 1.4, 0.0, (10,))
