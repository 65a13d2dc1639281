# tests/unit/test_lp.py

import numpy as np
import pytest

from pricex.errors import ModelError, UnknownLabel
from pricex.lp import LinearProgram, LPBuilder, LPStatus, format_lp, sensitivity, solve, write_lp


def balance_lp(demand):
    b = LPBuilder()
    g = b.add_variable("g", cost=50)
    s = b.add_variable("s", cost=3000)
    b.add_eq("balance", {g: 1, s: 1}, demand)
    b.add_ub("capacity", {g: 1}, 100)
    return b.build()


def test_scalar_equality_dual_is_one():
    lp = LinearProgram.from_dense([1.0], A_eq=[[1.0]], b_eq=[5.0], eq_labels=["x=5"])
    sol = solve(lp)
    assert sol.status is LPStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(5.0)
    assert sol.objective_value == pytest.approx(5.0)
    assert sensitivity(lp, sol, "x=5") == pytest.approx(1.0)


def test_generation_is_marginal_below_capacity():
    lp = balance_lp(60)
    sol = solve(lp)
    assert sol.value(lp, "g") == pytest.approx(60)
    assert sol.value(lp, "s") == pytest.approx(0)
    assert sensitivity(lp, sol, "balance") == pytest.approx(50)
    # inactive capacity row
    assert sensitivity(lp, sol, "capacity") == pytest.approx(0)


def test_shedding_is_marginal_above_capacity():
    lp = balance_lp(150)
    sol = solve(lp)
    assert sol.value(lp, "g") == pytest.approx(100)
    assert sol.value(lp, "s") == pytest.approx(50)
    assert sensitivity(lp, sol, "balance") == pytest.approx(3000)
    assert sensitivity(lp, sol, "capacity") == pytest.approx(-2950)
    assert not sol.degenerate


def test_capacity_dual_matches_resolve():
    base = solve(balance_lp(150)).objective_value
    b = LPBuilder()
    g = b.add_variable("g", cost=50)
    s = b.add_variable("s", cost=3000)
    b.add_eq("balance", {g: 1, s: 1}, 150)
    b.add_ub("capacity", {g: 1}, 101)
    bumped = solve(b.build()).objective_value
    assert bumped - base == pytest.approx(-2950)


def test_unknown_label():
    lp = balance_lp(60)
    sol = solve(lp)
    with pytest.raises(UnknownLabel):
        sensitivity(lp, sol, "nope")
    # UnknownLabel is also a KeyError
    with pytest.raises(KeyError):
        sol.dual("nope")


def test_infeasible_and_unbounded():
    lp = LinearProgram.from_dense(
        [1.0], A_eq=[[1.0]], b_eq=[5.0], bounds=[(0.0, 1.0)]
    )
    assert solve(lp).status is LPStatus.INFEASIBLE

    lp = LinearProgram.from_dense([-1.0], A_ub=[[-1.0]], b_ub=[0.0])
    assert solve(lp).status is LPStatus.UNBOUNDED


def test_empty_rows_are_removed():
    b = LPBuilder()
    x = b.add_variable("x", cost=1)
    b.add_eq("empty", {}, 0.0)
    b.add_eq("fix", {x: 1}, 2.0)
    lp = b.build()
    sol = solve(lp)
    assert sol.is_optimal
    assert sol.duals_eq["empty"] == 0.0
    assert sol.duals_eq["fix"] == pytest.approx(1.0)

    b.add_eq("broken", {}, 1.0)
    assert solve(b.build()).status is LPStatus.INFEASIBLE


def test_builder_rejects_bad_bounds_and_duplicates():
    b = LPBuilder()
    b.add_variable("x")
    with pytest.raises(ModelError):
        b.add_variable("x")
    with pytest.raises(ModelError):
        b.add_variable("y", lower=2, upper=1)
    with pytest.raises(ModelError):
        b.add_eq("row", {5: 1.0}, 0.0)


def random_lp(rng):
    n = int(rng.integers(2, 13))
    m_eq = int(rng.integers(1, min(n, 4) + 1))
    m_ub = int(rng.integers(0, 4))
    x0 = rng.uniform(1, 9, n)
    A_eq = rng.uniform(0.5, 1.5, (m_eq, n))
    A_ub = rng.uniform(-1, 1, (m_ub, n))
    b_ub = A_ub @ x0 + rng.uniform(0.5, 2, m_ub)
    c = rng.uniform(-1, 5, n)
    return dict(
        c=c,
        A_eq=A_eq,
        b_eq=A_eq @ x0,
        A_ub=A_ub if m_ub else None,
        b_ub=b_ub if m_ub else None,
        bounds=[(0.0, 10.0)] * n,
    )


def well_separated(lp, sol, margin=1e-2):
    # every basic quantity is far from its bound, so a tiny rhs move keeps the basis
    x = sol.x
    near = np.minimum(np.abs(x - lp.lower), np.abs(lp.upper - x))
    n_basic = int((near > margin).sum())
    slack = lp.b_ub - lp.A_ub @ x
    n_basic += int((slack > margin).sum())
    n_touching = int(((near > 1e-9) & (near <= margin)).sum()) + int(
        ((slack > 1e-9) & (slack <= margin)).sum()
    )
    return n_touching == 0 and n_basic == lp.n_eq + lp.n_ub


def test_strong_duality_and_dual_as_derivative():
    rng = np.random.default_rng(7)
    delta = 1e-4
    checked = 0
    for _ in range(100):
        data = random_lp(rng)
        lp = LinearProgram.from_dense(**data)
        sol = solve(lp)
        assert sol.is_optimal
        scale = max(1.0, abs(sol.objective_value))
        assert sol.dual_objective(lp) == pytest.approx(sol.objective_value, abs=1e-6 * scale)
        assert np.all(sol.ub_marginals <= 1e-9)

        if sol.degenerate or not well_separated(lp, sol):
            continue
        i = int(rng.integers(lp.n_eq))
        bumped = dict(data)
        bumped["b_eq"] = data["b_eq"].copy()
        bumped["b_eq"][i] += delta
        moved = solve(LinearProgram.from_dense(**bumped))
        assert moved.is_optimal
        change = moved.objective_value - sol.objective_value
        assert change == pytest.approx(sol.eq_marginals[i] * delta, abs=1e-6)
        checked += 1
    assert checked > 0


def test_determinism():
    rng = np.random.default_rng(3)
    lp = LinearProgram.from_dense(**random_lp(rng))
    a, b = solve(lp), solve(lp)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.eq_marginals, b.eq_marginals)


def test_write_lp(tmp_path):
    lp = balance_lp(60)
    path = write_lp(lp, tmp_path / "debug" / "balance.lp")
    text = path.read_text()
    assert text == format_lp(lp)
    assert "Minimize" in text and text.rstrip().endswith("End")
    assert " obj: 50 x0 + 3000 x1" in text
    assert " e0: x0 + x1 = 60" in text
    assert " u0: x0 <= 100" in text
    assert "'balance'" in text
