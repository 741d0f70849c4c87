"""Directional derivatives along geodesics and sampled convexity probes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .expr import BinOp, Const, EvalError, Expr, compile_scalar, free_vars, to_source
from .interval import Interval
from .manifold import Manifold
from .sampling import PairSample

H0 = 1e-2
MAX_HALVINGS = 20
RTOL = 1e-7
ATOL = 1e-9
CONVEX_TOL = 1e-9
STRICT_NEG = -1e-10


class DerivativeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ScalarFn:
    """A real function on a manifold given by an expression over its features."""

    expr: Expr
    manifold: Manifold
    name: str = "f"

    def __post_init__(self) -> None:
        unknown = free_vars(self.expr) - set(self.manifold.feature_names)
        if unknown:
            raise ValueError(
                f"{self.name}: variables {sorted(unknown)} are not features of {self.manifold} "
                f"(available: {', '.join(self.manifold.feature_names)})"
            )

    @cached_property
    def _compiled(self):
        return compile_scalar(self.expr)

    @property
    def source(self) -> str:
        return to_source(self.expr)

    def at(self, env) -> float:
        """Evaluate at precomputed manifold features."""
        value = self._compiled(env)
        if not math.isfinite(value):
            raise EvalError(f"{self.name} is not finite", self.source)
        return value

    def __call__(self, p) -> float:
        return self.at(self.manifold.features(p))


@dataclass(frozen=True)
class IntervalFn:
    """``p -> [lower(p), upper(p)]``."""

    lower: ScalarFn
    upper: ScalarFn
    name: str = "phi"

    @property
    def manifold(self) -> Manifold:
        return self.lower.manifold

    def __call__(self, p) -> Interval:
        return Interval(self.lower(p), self.upper(p))

    @cached_property
    def center(self) -> ScalarFn:
        e = BinOp("/", BinOp("+", self.lower.expr, self.upper.expr), Const(2.0))
        return ScalarFn(e, self.manifold, f"{self.name}^C")

    @cached_property
    def half_width(self) -> ScalarFn:
        e = BinOp("/", BinOp("-", self.upper.expr, self.lower.expr), Const(2.0))
        return ScalarFn(e, self.manifold, f"{self.name}^W")

    def component(self, which: str) -> ScalarFn:
        return {"L": self.lower, "U": self.upper, "C": self.center, "W": self.half_width}[which]


class GeodesicRay:
    """Feature values along ``alpha -> exp_p(alpha w)`` at the step sizes
    used by :func:`dir_deriv`, shared between functions probed in the same
    direction."""

    def __init__(self, manifold: Manifold, p, w, h0: float = H0):
        self.manifold = manifold
        self.p = p
        self.w = np.asarray(w, dtype=float)
        self.norm = manifold.norm(p, self.w)
        self.h = h0 / max(1.0, self.norm)
        self._base: dict[str, float] | None = None
        self._steps: dict[int, dict[str, float]] = {}

    def base(self) -> dict[str, float]:
        if self._base is None:
            self._base = self.manifold.features(self.p)
        return self._base

    def step(self, k: int) -> dict[str, float]:
        env = self._steps.get(k)
        if env is None:
            q = self.manifold.exp(self.p, (self.h * 2.0**-k) * self.w)
            env = self._steps[k] = self.manifold.features(q)
        return env


def dir_deriv(
    f: ScalarFn,
    p,
    w,
    max_halvings: int = MAX_HALVINGS,
    rtol: float = RTOL,
    atol: float = ATOL,
    ray: GeodesicRay | None = None,
) -> float:
    """One-sided derivative of ``f`` at ``p`` along ``alpha -> exp_p(alpha w)``.

    Forward differences at ``h 2^-k`` (``h = 1e-2`` shrunk by the tangent
    norm when that exceeds one) are extrapolated twice (Richardson); the
    first pair of successive second-level extrapolants that agree within
    ``rtol`` / ``atol`` ends the iteration.
    """
    if ray is None:
        ray = GeodesicRay(f.manifold, p, w)
    if ray.norm == 0.0:
        return 0.0
    try:
        f0 = f.at(ray.base())
        d: list[float] = []
        r1: list[float] = []
        r2: list[float] = []
        for k in range(max_halvings + 1):
            hk = ray.h * 2.0**-k
            d.append((f.at(ray.step(k)) - f0) / hk)
            if k >= 1:
                r1.append(2.0 * d[-1] - d[-2])
            if k >= 2:
                r2.append((4.0 * r1[-1] - r1[-2]) / 3.0)
            if len(r2) >= 2:
                a, b = r2[-2], r2[-1]
                if abs(b - a) <= rtol * max(abs(a), abs(b)) + atol:
                    return b
    except (EvalError, ValueError) as exc:
        raise DerivativeError(f"{f.name}: evaluation failed along the geodesic: {exc}") from exc
    raise DerivativeError(f"{f.name}: difference quotients did not converge after {max_halvings} halvings")


def weak_dir_deriv(F: IntervalFn, p, w, ray: GeodesicRay | None = None) -> tuple[float, float]:
    ray = ray or GeodesicRay(F.manifold, p, w)
    return dir_deriv(F.lower, p, w, ray=ray), dir_deriv(F.upper, p, w, ray=ray)


def gh_from_weak(d_lo: float, d_hi: float) -> Interval:
    return Interval(min(d_lo, d_hi), max(d_lo, d_hi))


def gh_dir_deriv(F: IntervalFn, p, w, ray: GeodesicRay | None = None) -> Interval:
    """gH-directional derivative computed from the weak derivatives."""
    return gh_from_weak(*weak_dir_deriv(F, p, w, ray))


@dataclass
class ProbeReport:
    holds: bool
    name: str = ""
    checked: int = 0
    witness: dict[str, Any] | None = None

    @property
    def verdict(self) -> str:
        return "holds-on-samples" if self.holds else "violated"

    def summary(self) -> str:
        s = f"{self.name}: {self.verdict} ({self.checked} samples)"
        if self.witness:
            s += " witness " + ", ".join(f"{k}={_fmt(v)}" for k, v in self.witness.items())
        return s


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, np.ndarray):
        return "(" + ", ".join(f"{x:.6g}" for x in v.ravel()) + ")"
    return str(v)


def convexity_probe(f: ScalarFn, sample: PairSample, tol: float = CONVEX_TOL) -> ProbeReport:
    """Check ``f(gamma(a)) <= a f(q) + (1 - a) f(p)`` on sampled pairs.

    The first violating pair (by sample index) is the witness; within it the
    alpha with the largest excess is reported.
    """
    checked = 0
    m = f.manifold
    pf = sample.pair_features or tuple((m.features(p), m.features(q)) for p, q in sample.pairs)
    mf = sample.mid_features or tuple(tuple(m.features(g) for g in row) for row in sample.midpoints)
    for i, ((p, q), (ep, eq), envs) in enumerate(zip(sample.pairs, pf, mf)):
        try:
            fp, fq = f.at(ep), f.at(eq)
        except (EvalError, ValueError) as exc:
            return ProbeReport(False, f.name, checked, {"pair": i, "p": p, "q": q, "error": str(exc)})
        worst = None
        for alpha, env in zip(sample.alphas, envs):
            checked += 1
            try:
                lhs = f.at(env)
            except (EvalError, ValueError) as exc:
                return ProbeReport(
                    False, f.name, checked, {"pair": i, "p": p, "q": q, "alpha": alpha, "error": str(exc)}
                )
            rhs = alpha * fq + (1.0 - alpha) * fp
            excess = lhs - rhs
            if excess > tol * max(1.0, abs(lhs), abs(rhs)) and (worst is None or excess > worst[0]):
                worst = (excess, alpha, lhs, rhs)
        if worst is not None:
            excess, alpha, lhs, rhs = worst
            return ProbeReport(
                False,
                f.name,
                checked,
                {"pair": i, "p": p, "q": q, "alpha": alpha, "lhs": lhs, "rhs": rhs, "residual": excess},
            )
    return ProbeReport(True, f.name, checked)


def _pair_probe(F: IntervalFn, sample: PairSample, parts: str, tag: str) -> ProbeReport:
    checked = 0
    for part in parts:
        rep = convexity_probe(F.component(part), sample)
        checked += rep.checked
        if not rep.holds:
            rep.witness = {"component": part, **(rep.witness or {})}
            rep.name = f"{F.name} {tag}"
            rep.checked = checked
            return rep
    return ProbeReport(True, f"{F.name} {tag}", checked)


def lu_convexity_probe(F: IntervalFn, sample: PairSample) -> ProbeReport:
    """LU-convexity on samples: lower and upper functions both convex."""
    return _pair_probe(F, sample, "LU", "LU-convexity")


def cw_convexity_probe(F: IntervalFn, sample: PairSample) -> ProbeReport:
    """CW-convexity on samples: center and half-width both convex."""
    return _pair_probe(F, sample, "CW", "CW-convexity")


def pseudoconvexity_probe(
    f: ScalarFn, pbar, points: Sequence, strict: bool, threshold: float = STRICT_NEG
) -> ProbeReport:
    """Sampled check of (strict) pseudo-convexity of ``f`` at ``pbar``.

    For each sampled ``p != pbar``: if ``f(p) <= f(pbar)`` (strict) or
    ``f(p) < f(pbar)`` (non-strict) then the derivative toward ``p`` must be
    below ``threshold``.
    """
    m = f.manifold
    name = f"{f.name} {'strict ' if strict else ''}pseudo-convexity"
    try:
        fbar = f(pbar)
    except (EvalError, ValueError) as exc:
        return ProbeReport(False, name, 0, {"p": pbar, "error": str(exc)})
    checked = 0
    for i, p in enumerate(points):
        if m.same_point(p, pbar):
            continue
        checked += 1
        try:
            fp = f(p)
            if not (fp <= fbar if strict else fp < fbar):
                continue
            d = dir_deriv(f, pbar, m.log(pbar, p))
        except (EvalError, DerivativeError, ValueError) as exc:
            return ProbeReport(False, name, checked, {"sample": i, "p": p, "error": str(exc)})
        if not d < threshold:
            return ProbeReport(False, name, checked, {"sample": i, "p": p, "f(p)": fp, "f(pbar)": fbar, "deriv": d})
    return ProbeReport(True, name, checked)
