import math
from functools import lru_cache

import numpy as np
import pytest

from nestfrac.dp_value import (
    additive_to_tuple,
    amgm_value,
    crude_a1,
    crude_b1_root,
    crude_bounds,
    dp_sweep,
    make_grid,
    objective,
    objective_additive,
    tuple_to_additive,
)

E = math.e


@lru_cache(maxsize=None)
def table(x_max=1e4, n_max=16, p=1.0, initial="identity", M=20_000):
    return dp_sweep(x_max, n_max, M=M, p=p, initial=initial)


def test_objective_examples():
    assert objective([], 5.0) == 5.0
    assert objective([1.0], 4.0) == 3.0
    assert objective([2.0, 4.0], 8.0, p=0) == pytest.approx(6.0, rel=1e-15)
    assert amgm_value(3, 8.0) == pytest.approx(6.0, rel=1e-15)


def test_objective_rejects_bad_input():
    with pytest.raises(ValueError):
        objective([-1.0], 2.0)
    with pytest.raises(ValueError):
        objective([1.0], 2.0, p=-0.5)
    with pytest.raises(ZeroDivisionError):
        objective([0.0], 2.0, p=0)


def test_additive_form_examples():
    assert additive_to_tuple([0.5, 0.5]) == [1.0]
    assert objective_additive([0.5, 0.5], 3.0) == objective([1.0], 3.0) == 2.5
    u = [0.2, 0.3, 0.5]
    assert objective_additive(u, 2.0) == pytest.approx(objective(additive_to_tuple(u), 2.0), abs=1e-12)


def test_additive_inverse_round_trip():
    u = tuple_to_additive([1.0, 2.0])
    assert u[2] == pytest.approx(1 / 3, rel=1e-15)
    assert sum(u) == pytest.approx(1.0, abs=1e-12)
    assert additive_to_tuple(u) == pytest.approx([1.0, 2.0], abs=1e-12)


def test_additive_map_is_a_bijection():
    rng = np.random.default_rng(3)
    for n in range(2, 9):
        for _ in range(20):
            u = rng.dirichlet(np.ones(n))
            t = additive_to_tuple(u)
            np.testing.assert_allclose(tuple_to_additive(t), u, rtol=1e-10)
            x = float(rng.uniform(0.1, 50))
            assert objective_additive(u, x) == pytest.approx(objective(t, x), rel=1e-12)


def test_simplex_validation():
    with pytest.raises(ValueError):
        additive_to_tuple([0.5, 0.6])
    with pytest.raises(ValueError):
        objective_additive([1.0, 0.0], 1.0)


def test_second_level_closed_form():
    tab = table()
    assert tab.F_n(2, 4.0) == pytest.approx(3.0, abs=2e-4)
    assert tab.F_n(2, 0.5) == pytest.approx(0.5, abs=1e-12)
    xs = np.geomspace(1.5, 1e4, 50)
    np.testing.assert_allclose(tab.F_n(2, xs), 2 * np.sqrt(xs) - 1, atol=2e-4)


def test_first_level_is_identity():
    tab = table()
    np.testing.assert_array_equal(tab.level(1), tab.grid)


def test_levels_decrease_in_n_and_increase_in_x():
    v = table().values
    assert np.all(np.diff(v, axis=0) <= 0)
    assert np.all(np.diff(v, axis=1) >= 0)


def test_value_at_ten_stabilizes():
    tab = table()
    vals = [tab.F_n(n, 10.0) for n in range(10, tab.n_max + 1)]
    assert max(vals) - min(vals) < 1e-6


def test_crude_bounds_at_one_hundred():
    F = table().F(100.0)
    assert E * math.log(101) - 1.79 <= F <= E * math.log(101) - 1.58 + 1.58 / 101


def test_crude_bounds_bracket_the_table():
    tab = table()
    xs = np.geomspace(1.0, 1e4, 200)
    lo, hi = crude_bounds(xs)
    F = tab.F(xs)
    assert np.all(lo <= F)
    assert np.all(F <= hi)


def test_crude_constants():
    b1 = crude_b1_root()
    assert b1 == pytest.approx(1.77, abs=0.01)
    assert 2 * math.log((b1 + 1) / 2) - b1 / E == pytest.approx(0.0, abs=1e-12)
    assert crude_a1(b1) == pytest.approx(1.78, abs=0.01)


def test_minimizer_is_zero_tuple_below_one():
    tab = table()
    for i in np.nonzero(tab.grid <= 1.0)[0][::500]:
        for n in (2, 5, 10):
            assert tab.minimizer_chain(n, int(i)) == [0] * (n - 1)


def test_minimizer_chain_has_only_a_zero_prefix():
    tab = table()
    for i in range(0, tab.grid.size, 997):
        for n in (3, 8, 16):
            chain = tab.minimizer_chain(n, i)
            zeros = [k == 0 for k in chain]
            first_positive = zeros.index(False) if False in zeros else len(zeros)
            assert not any(zeros[first_positive:])


def test_minimizer_chain_reproduces_the_value():
    tab = table()
    for x in (3.0, 50.0, 2000.0):
        i = int(np.argmin(np.abs(tab.grid - x)))
        for n in (3, 8):
            chain = [tab.grid[k] for k in tab.minimizer_chain(n, i)]
            assert objective(chain, tab.grid[i]) == pytest.approx(tab.level(n)[i], abs=1e-4)


def test_minimizer_respects_x_minus_one():
    tab = table()
    for k in range(1, tab.n_max):
        x, y = tab.grid, tab.argmin_y[k]
        big = x > 1.0
        assert np.all(y[big] <= x[big] - 1.0 + 1e-9 * x[big])


@pytest.mark.parametrize("p", [1.5, 2.0, E])
@pytest.mark.parametrize("x", [10.0, 100.0])
def test_large_shift_rescales(p, x):
    base = table(1e3, 20)
    shifted = table(1e3 * p, 20, p)
    assert shifted.F(x) == pytest.approx(base.F(x / p), abs=1e-4)


def test_shift_free_sum_dominates():
    tab = table()
    g = tab.grid[1:]
    for n in range(1, tab.n_max + 1):
        assert np.all(amgm_value(n, g) >= tab.level(n)[1:] - 1e-12)


def test_value_decreases_with_the_shift():
    tab = table()
    small = table(1e4, 16, 0.5)
    for n in range(1, 17):
        lo, mid = tab.level(n)[1:], small.level(n)[1:]
        assert np.all(lo <= mid + 1e-12)
        assert np.all(mid <= amgm_value(n, tab.grid[1:]) + 1e-12)


def test_clamped_start_gives_the_same_envelope():
    full = table(1e4, 30)
    clamped = table(1e4, 30, initial="clamped")
    for x in (0.5, 10.0, 100.0, 1000.0):
        assert clamped.F(x) == pytest.approx(full.F(x), abs=1e-6)


def test_grid_contains_zero_and_one():
    g = make_grid(100.0, 1000)
    assert g[0] == 0.0
    assert 1.0 in g
    assert np.all(np.diff(g) > 0)


def test_sweep_validation():
    with pytest.raises(ValueError):
        dp_sweep(0.5, 3)
    with pytest.raises(ValueError):
        dp_sweep(10.0, 3, M=10)
    with pytest.raises(ValueError):
        dp_sweep(10.0, 3, p=0.0)
    with pytest.raises(ValueError):
        dp_sweep(10.0, 0)
    with pytest.raises(ValueError):
        dp_sweep(10.0, 3, initial="other")
    with pytest.raises(ValueError):
        table().level(99)


def test_csv_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    dp_sweep(100.0, 4, M=1000).to_csv(a)
    dp_sweep(100.0, 4, M=1000).to_csv(b)
    raw = a.read_bytes()
    assert raw == b.read_bytes()
    assert raw.startswith(b"n,x,F_n,argmin_y\n")
    assert b"\r" not in raw
    assert len(raw.splitlines()) == 1 + 4 * 1001
