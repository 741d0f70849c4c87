"""Brute-force grid oracle for the six Pareto-optimality classes.

Grid values are evaluated vectorized as a prefilter; every reported witness
is then re-evaluated on the scalar path and the domination relation is
re-checked exactly, so a refutation never rests on vectorized rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import EvalError, evaluate_array
from .interval import Interval, lt_cw, lt_lu, tuple_leq_cw, tuple_leq_lu, tuple_lt_cw, tuple_lt_lu
from .kkt import (
    CLASSES,
    FEAS_TOL,
    STRONG_I,
    STRONG_II,
    TYPE_I,
    TYPE_II,
    WEAK_I,
    WEAK_II,
    InfeasibleCandidateError,
)
from .manifold import InvalidPointError
from .sampling import Box

MAX_GRID_POINTS = 10**7
PREFILTER_RTOL = 1e-9
SCALARIZATION_TOL = 1e-7
LU_CLASSES = (TYPE_I, STRONG_I, WEAK_I)
CW_CLASSES = (TYPE_II, STRONG_II, WEAK_II)


class GridTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over ``box`` with ``resolution`` nodes per axis.

    ``include`` lists parameter vectors whose coordinates are merged into
    each axis, so a candidate lies exactly on the grid. With ``seed`` the
    interior nodes are jittered by up to a quarter spacing.
    """

    box: Box
    resolution: int = 101
    seed: int | None = None
    include: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("grid resolution must be at least 2")
        object.__setattr__(self, "include", tuple(tuple(float(x) for x in v) for v in self.include))
        if self.size > MAX_GRID_POINTS:
            raise GridTooLargeError(f"grid has {self.size} points, above the {MAX_GRID_POINTS} limit")

    @property
    def size(self) -> int:
        return int(np.prod([len(a) for a in self.axes()]))

    def axes(self) -> list[np.ndarray]:
        rng = np.random.default_rng(self.seed) if self.seed is not None else None
        out = []
        for k, (lo, hi) in enumerate(self.box.ranges):
            ax = np.linspace(lo, hi, self.resolution)
            if rng is not None:
                step = (hi - lo) / (self.resolution - 1)
                ax[1:-1] += rng.uniform(-0.25, 0.25, self.resolution - 2) * step
            extra = [v[k] for v in self.include if lo <= v[k] <= hi]
            out.append(np.union1d(ax, extra))
        return out

    def params(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


def grid_for(prob, resolution: int = 101, box: Box | None = None, seed: int | None = None, pbar=None) -> GridSpec:
    include = () if pbar is None else (tuple(prob.manifold.to_params(pbar)),)
    return GridSpec(box or prob.box, resolution, seed, include)


def _feasible_grid(prob, grid: GridSpec) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    m = prob.manifold
    params = grid.params()
    valid = m.batch_valid(params)
    params = params[valid]
    env = m.batch_features(params)
    n = len(params)
    mask = np.ones(n, dtype=bool)
    for g in prob.constraints:
        v = evaluate_array(g.expr, env, n)
        mask &= np.isfinite(v) & (v <= FEAS_TOL)
    params = params[mask]
    return params, {k: np.asarray(v)[mask] for k, v in env.items()}


def sample_feasible(prob, grid: GridSpec) -> list[np.ndarray]:
    """Grid points satisfying every constraint within ``1e-8``."""
    params, _ = _feasible_grid(prob, grid)
    m = prob.manifold
    out = []
    for x in params:
        try:
            out.append(m.from_params(x))
        except InvalidPointError:
            continue
    return out


@dataclass
class ClassResult:
    holds: bool
    witness: np.ndarray | None = None
    witness_values: tuple[Interval, ...] | None = None

    @property
    def label(self) -> str:
        return "holds-on-grid" if self.holds else "refuted"


@dataclass
class ParetoVerdict:
    results: dict[str, ClassResult]
    candidate_values: tuple[Interval, ...]
    n_grid: int
    n_feasible: int
    resolution: int
    strong_mode: str = "tuple"
    notes: list[str] = field(default_factory=list)

    def holds(self, klass: str) -> bool:
        return self.results[klass].holds

    def table(self, manifold) -> str:
        lines = [
            f"grid {self.resolution}/axis: {self.n_grid} points, {self.n_feasible} feasible",
            "candidate values: " + ", ".join(str(v) for v in self.candidate_values),
        ]
        for k, r in self.results.items():
            row = f"  {k:<10} {r.label}"
            if r.witness is not None:
                row += f"  witness {manifold.format_point(r.witness)} values " + ", ".join(
                    str(v) for v in r.witness_values
                )
            lines.append(row)
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.append("")
        lines.append(f"grid_points={self.n_grid}")
        lines.append(f"feasible_points={self.n_feasible}")
        for k, r in self.results.items():
            lines.append(f"{k}={r.label}")
        return "\n".join(lines)


def _dominates(klass: str, a: Sequence[Interval], b: Sequence[Interval], distinct_points: bool, mode: str) -> bool:
    """Does objective tuple ``a`` (at a feasible point) refute ``klass`` for ``b``?"""
    if klass == TYPE_I:
        return tuple_lt_lu(a, b)
    if klass == TYPE_II:
        return tuple_lt_cw(a, b)
    if klass == WEAK_I:
        return all(lt_lu(x, y) for x, y in zip(a, b))
    if klass == WEAK_II:
        return all(lt_cw(x, y) for x, y in zip(a, b))
    leq = tuple_leq_lu if klass == STRONG_I else tuple_leq_cw
    if not leq(a, b):
        return False
    return distinct_points if mode == "point" else tuple(a) != tuple(b)


def _loose_leq(lo, hi, b: Interval, cw: bool) -> np.ndarray:
    def le(x, y):
        return x <= y + PREFILTER_RTOL * np.maximum(1.0, np.abs(y))

    if cw:
        return le((lo + hi) / 2, b.center) & le((hi - lo) / 2, b.half_width)
    return le(lo, b.lo) & le(hi, b.hi)


def classify(
    prob,
    pbar,
    grid: GridSpec,
    classes: Sequence[str] = ("lu", "cw"),
    strong_mode: str = "tuple",
) -> ParetoVerdict:
    """Search the feasible grid for points refuting each Pareto class at ``pbar``.

    ``strong_mode="tuple"`` reads the strong classes as "no feasible point with
    objective tuple ``<=`` and different"; ``"point"`` as "no other feasible
    point with tuple ``<=``". The lowest-index witness is reported.
    """
    if strong_mode not in ("tuple", "point"):
        raise ValueError("strong_mode must be 'tuple' or 'point'")
    m = prob.manifold
    pbar = m.check_point(pbar)
    try:
        bad = [g.name for g in prob.constraints if g(pbar) > FEAS_TOL]
    except (EvalError, ValueError) as exc:
        raise InfeasibleCandidateError(f"candidate cannot be evaluated: {exc}") from None
    if bad:
        raise InfeasibleCandidateError(f"candidate violates {', '.join(bad)}")
    wanted: list[str] = []
    for c in classes:
        wanted += {"lu": list(LU_CLASSES), "cw": list(CW_CLASSES)}.get(c, [c])
    for c in wanted:
        if c not in CLASSES:
            raise ValueError(f"unknown class {c!r}")
    fbar = prob.objective_values(pbar)
    params, env = _feasible_grid(prob, grid)
    n = len(params)
    lows = [evaluate_array(f.lower.expr, env, n) for f in prob.objectives]
    highs = [evaluate_array(f.upper.expr, env, n) for f in prob.objectives]
    finite = np.ones(n, dtype=bool)
    for a in lows + highs:
        finite &= np.isfinite(a)
    results: dict[str, ClassResult] = {}
    notes = []
    if n == 0:
        notes.append("no feasible grid points")
    for klass in wanted:
        cw = klass in CW_CLASSES
        cand = finite.copy()
        for lo, hi, b in zip(lows, highs, fbar):
            cand &= _loose_leq(lo, hi, b, cw)
        results[klass] = ClassResult(True)
        for i in np.flatnonzero(cand):
            try:
                p = m.from_params(params[i])
                if any(g(p) > FEAS_TOL for g in prob.constraints):
                    continue
                vals = prob.objective_values(p)
            except (EvalError, ValueError):
                continue
            if _dominates(klass, vals, fbar, not m.same_point(p, pbar), strong_mode):
                results[klass] = ClassResult(False, p, vals)
                break
    return ParetoVerdict(results, fbar, grid.size, n, grid.resolution, strong_mode, notes)


def recheck_witness(prob, pbar, klass: str, witness, strong_mode: str = "tuple") -> bool:
    """Recompute feasibility and domination for a reported witness from scratch."""
    m = prob.manifold
    p = m.check_point(witness)
    if any(g(p) > FEAS_TOL for g in prob.constraints):
        return False
    return _dominates(
        klass, prob.objective_values(p), prob.objective_values(pbar), not m.same_point(p, pbar), strong_mode
    )


@dataclass
class ScalarizationResult:
    minimizer: bool
    value_at_candidate: float
    witness: np.ndarray | None = None
    witness_value: float | None = None


def scalarization_check(prob, pbar, lam_lower, lam_upper, grid: GridSpec) -> ScalarizationResult:
    """Is ``pbar`` a grid minimizer of ``sum lamL phi^L + sum lamU phi^U``?

    A witness is the feasible grid point with the smallest weighted value
    among those below the candidate's value by more than ``1e-7``.
    """
    lam_lower = np.asarray(lam_lower, dtype=float)
    lam_upper = np.asarray(lam_upper, dtype=float)
    l = len(prob.objectives)
    if lam_lower.shape != (l,) or lam_upper.shape != (l,):
        raise ValueError(f"weights need {l} entries each")
    if np.any(lam_lower <= 0) or np.any(lam_upper <= 0):
        raise ValueError("weights must be positive")
    m = prob.manifold
    pbar = m.check_point(pbar)

    def weighted(vals) -> float:
        return float(sum(a * v.lo + b * v.hi for a, b, v in zip(lam_lower, lam_upper, vals)))

    vbar = weighted(prob.objective_values(pbar))
    params, env = _feasible_grid(prob, grid)
    n = len(params)
    total = np.zeros(n)
    for a, b, f in zip(lam_lower, lam_upper, prob.objectives):
        total = total + a * evaluate_array(f.lower.expr, env, n) + b * evaluate_array(f.upper.expr, env, n)
    total = np.where(np.isfinite(total), total, np.inf)
    for i in np.argsort(total, kind="stable"):
        if not total[i] < vbar - SCALARIZATION_TOL:
            break
        try:
            p = m.from_params(params[i])
            if any(g(p) > FEAS_TOL for g in prob.constraints):
                continue
            v = weighted(prob.objective_values(p))
        except (EvalError, ValueError):
            continue
        if v < vbar - SCALARIZATION_TOL:
            return ScalarizationResult(False, vbar, p, v)
    return ScalarizationResult(True, vbar)
