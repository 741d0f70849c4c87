"""Dense two-phase simplex for small linear feasibility problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-8
PIVOT_EPS = 1e-11
COST_EPS = 1e-10


@dataclass
class LPResult:
    feasible: bool
    x: np.ndarray | None
    phase1_objective: float
    iterations: int = 0
    message: str = ""


class _Tableau:
    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int]):
        m, n = a.shape
        self.t = np.zeros((m + 1, n + 1))
        self.t[:m, :n] = a
        self.t[:m, n] = b
        self.basis = list(basis)
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    @property
    def n(self) -> int:
        return self.t.shape[1] - 1

    def set_cost(self, c: np.ndarray) -> None:
        t = self.t
        t[-1, :] = 0.0
        t[-1, : self.n] = c
        for i, j in enumerate(self.basis):
            if c[j] != 0.0:
                t[-1, :] -= c[j] * t[i, :]

    def pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row, :] /= t[row, col]
        colv = t[:, col].copy()
        colv[row] = 0.0
        t -= np.outer(colv, t[row, :])
        self.basis[row] = col
        self.iterations += 1

    def optimize(self, allowed: np.ndarray, max_iter: int) -> bool:
        """Primal simplex, Dantzig pricing with Bland's rule after stalls."""
        t = self.t
        stall = 0
        last = None
        for _ in range(max_iter):
            r = t[-1, : self.n]
            cand = np.where(allowed & (r < -COST_EPS))[0]
            if cand.size == 0:
                return True
            col = int(cand[0]) if stall > 50 else int(cand[np.argmin(r[cand])])
            colv = t[: self.m, col]
            pos = colv > PIVOT_EPS
            if not np.any(pos):
                return False  # unbounded; cannot occur in phase 1
            ratios = np.full(self.m, np.inf)
            ratios[pos] = t[: self.m, -1][pos] / colv[pos]
            best = ratios.min()
            ties = np.where(ratios <= best + 1e-12)[0]
            row = int(min(ties, key=lambda i: self.basis[i]))
            obj = t[-1, -1]
            self.pivot(row, col)
            stall = stall + 1 if last is not None and abs(t[-1, -1] - obj) < 1e-15 else 0
            last = obj
        raise RuntimeError("simplex iteration limit reached")


def lp_feasible(
    A,
    b,
    senses: Sequence[str],
    bounds: Sequence[tuple[float, float]],
    c=None,
    tol: float = FEAS_TOL,
) -> LPResult:
    """Find ``x`` with ``A x (>= or =) b`` row-wise and ``lo <= x <= hi``.

    ``senses`` holds ``">="`` or ``"="`` per row; bounds may be infinite.
    With a cost vector ``c`` the second phase minimizes ``c x`` over the
    feasible set, otherwise it returns the first feasible vertex.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m0, n0 = A.shape if A.size else (len(b), len(bounds))
    if A.size == 0:
        A = np.zeros((m0, n0))
    if len(b) != m0 or len(senses) != m0 or len(bounds) != n0:
        raise ValueError("dimension mismatch between A, b, senses and bounds")
    if any(s not in (">=", "=") for s in senses):
        raise ValueError("row senses must be '>=' or '='")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("LP data must be finite")
    cost = np.zeros(n0) if c is None else np.asarray(c, dtype=float)

    # x = shift + T y with y >= 0
    cols: list[np.ndarray] = []
    col_cost: list[float] = []
    shift = np.zeros(n0)
    back: list[tuple[int, float]] = []  # (original var, sign) per y column
    extra_rows: list[tuple[int, float]] = []  # y_k <= ub rows
    for j, (lo, hi) in enumerate(bounds):
        lo, hi = float(lo), float(hi)
        if lo > hi:
            return LPResult(False, None, np.inf, message=f"empty bounds for variable {j}")
        if np.isfinite(lo):
            shift[j] = lo
            back.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(back) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            back.append((j, -1.0))
        else:
            back.append((j, 1.0))
            back.append((j, -1.0))
    ny = len(back)
    ay = np.zeros((m0, ny))
    cy = np.zeros(ny)
    for k, (j, sgn) in enumerate(back):
        ay[:, k] = sgn * A[:, j]
        cy[k] = sgn * cost[j]
    by = b - A @ shift

    rows = []
    rhs = []
    kinds = []  # "ge", "eq", "le"
    for i in range(m0):
        rows.append(ay[i])
        rhs.append(by[i])
        kinds.append("ge" if senses[i] == ">=" else "eq")
    for k, ub in extra_rows:
        r = np.zeros(ny)
        r[k] = 1.0
        rows.append(r)
        rhs.append(ub)
        kinds.append("le")
    m = len(rows)
    n_slack = sum(1 for k in kinds if k != "eq")
    a_full = np.zeros((m, ny + n_slack))
    b_full = np.array(rhs, dtype=float)
    slack_of: list[int | None] = []
    s = ny
    for i, (r, kind) in enumerate(zip(rows, kinds)):
        a_full[i, :ny] = r
        if kind == "ge":
            a_full[i, s] = -1.0
            slack_of.append(s)
            s += 1
        elif kind == "le":
            a_full[i, s] = 1.0
            slack_of.append(s)
            s += 1
        else:
            slack_of.append(None)
    neg = b_full < 0
    a_full[neg] *= -1.0
    b_full[neg] *= -1.0

    basis: list[int] = []
    art_rows = []
    for i in range(m):
        j = slack_of[i]
        if j is not None and a_full[i, j] == 1.0:
            basis.append(j)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_struct = a_full.shape[1]
    n_art = len(art_rows)
    a_tab = np.hstack([a_full, np.zeros((m, n_art))])
    for k, i in enumerate(art_rows):
        a_tab[i, n_struct + k] = 1.0
        basis[i] = n_struct + k
    tab = _Tableau(a_tab, b_full, basis)
    max_iter = 50 * (m + a_tab.shape[1]) + 100

    phase1 = 0.0
    if n_art:
        c1 = np.zeros(a_tab.shape[1])
        c1[n_struct:] = 1.0
        tab.set_cost(c1)
        tab.optimize(np.ones(a_tab.shape[1], dtype=bool), max_iter)
        phase1 = float(-tab.t[-1, -1])
        if phase1 > tol:
            return LPResult(False, None, phase1, tab.iterations, "phase 1 objective positive: infeasible")
        # drive zero-level artificials out of the basis
        for i in range(m):
            if tab.basis[i] >= n_struct:
                row = tab.t[i, :n_struct]
                nz = np.where(np.abs(row) > 1e-9)[0]
                if nz.size:
                    tab.pivot(i, int(nz[0]))
    allowed = np.zeros(a_tab.shape[1], dtype=bool)
    allowed[:n_struct] = True
    status = "feasible"
    if c is not None:
        c2 = np.zeros(a_tab.shape[1])
        c2[:ny] = cy
        tab.set_cost(c2)
        if not tab.optimize(allowed, max_iter):
            # no pivot was made, so the basis is still a feasible vertex
            status = "feasible; objective unbounded below"

    y = np.zeros(a_tab.shape[1])
    for i, j in enumerate(tab.basis):
        y[j] = tab.t[i, -1]
    y = np.maximum(y[:ny], 0.0)
    x = shift.copy()
    for k, (j, sgn) in enumerate(back):
        x[j] += sgn * y[k]
    x = np.clip(x, [lo for lo, _ in bounds], [hi for _, hi in bounds])

    resid = A @ x - b
    ok = all((r >= -tol) if s_ == ">=" else (abs(r) <= tol) for r, s_ in zip(resid, senses))
    if not ok:
        return LPResult(False, x, phase1, tab.iterations, "vertex failed the feasibility re-check")
    return LPResult(True, x, phase1, tab.iterations, status)
