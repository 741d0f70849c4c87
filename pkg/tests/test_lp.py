import numpy as np
import pytest
from scipy.optimize import linprog

from ivkkt.lp import lp_feasible


def scipy_solve(A, b, senses, bounds, c):
    ge = [i for i, s in enumerate(senses) if s == ">="]
    eq = [i for i, s in enumerate(senses) if s == "="]
    return linprog(
        c,
        A_ub=-A[ge] if ge else None,
        b_ub=-b[ge] if ge else None,
        A_eq=A[eq] if eq else None,
        b_eq=b[eq] if eq else None,
        bounds=[(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi) for lo, hi in bounds],
        method="highs",
    )


def check_solution(A, b, senses, bounds, x, tol=1e-7):
    r = A @ x - b
    for ri, s in zip(r, senses):
        assert ri >= -tol if s == ">=" else abs(ri) <= tol
    for xi, (lo, hi) in zip(x, bounds):
        assert lo - tol <= xi <= hi + tol


@pytest.mark.parametrize("seed", range(60))
def test_agrees_with_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 6), rng.integers(1, 6)
    A = rng.normal(size=(m, n)).round(2)
    b = rng.normal(size=m).round(2)
    senses = [">=" if rng.random() < 0.7 else "=" for _ in range(m)]
    kinds = rng.integers(0, 4, size=n)
    bounds = [
        [(0.0, np.inf), (-1.0, 2.0), (-np.inf, np.inf), (-np.inf, 1.0)][k] for k in kinds
    ]
    c = rng.normal(size=n).round(2)
    ref = scipy_solve(A, b, senses, bounds, c)
    res = lp_feasible(A, b, senses, bounds, c)
    if ref.status == 2:
        assert not res.feasible
        return
    assert res.feasible, res.message
    check_solution(A, b, senses, bounds, res.x)
    if ref.status == 0:
        assert c @ res.x == pytest.approx(ref.fun, abs=1e-7)
    else:
        assert "unbounded" in res.message


def test_simple_feasibility():
    res = lp_feasible([[1.0, 1.0]], [1.0], [">="], [(0, np.inf), (0, np.inf)])
    assert res.feasible and res.x.sum() >= 1 - 1e-9
    res = lp_feasible([[1.0, 1.0]], [3.0], [">="], [(0, 1), (0, 1)])
    assert not res.feasible


def test_degenerate_and_redundant_rows():
    A = np.array([[1.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    b = np.array([1.0, 1.0, 2.0, 0.0])
    res = lp_feasible(A, b, ["=", "=", "=", ">="], [(0, np.inf), (0, np.inf)], c=[0.0, 1.0])
    assert res.feasible
    np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-9)


def test_input_validation():
    with pytest.raises(ValueError):
        lp_feasible([[1.0]], [1.0, 2.0], [">="], [(0, 1)])
    with pytest.raises(ValueError):
        lp_feasible([[1.0]], [1.0], ["<="], [(0, 1)])
    with pytest.raises(ValueError):
        lp_feasible([[np.nan]], [1.0], [">="], [(0, 1)])
    assert not lp_feasible([[1.0]], [0.0], [">="], [(2, 1)]).feasible
