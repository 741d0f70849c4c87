"""KKT certificate verification and LP-based multiplier search.

A certificate names a sufficient-condition theorem by tag and supplies its
multipliers. Verification evaluates each theorem condition on a finite probe
set of directions ``log_pbar(p_k)`` and checks complementary slackness.
Hypotheses (convexity or pseudo-convexity) are probed separately; a failed
hypothesis probe downgrades a certificate rather than rejecting it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .calculus import (
    DerivativeError,
    GeodesicRay,
    IntervalFn,
    ProbeReport,
    ScalarFn,
    convexity_probe,
    cw_convexity_probe,
    dir_deriv,
    lu_convexity_probe,
    pseudoconvexity_probe,
)
from .expr import EvalError
from .interval import Interval, gh_diff, leq_lu, scale
from .lp import lp_feasible
from .sampling import DEFAULT_SEED, Box, sample_pairs, sample_points

FEAS_TOL = 1e-8
ACTIVE_TOL = 1e-8
TOL = 1e-7
EPS_LAMBDA = 1e-6
DEFAULT_PROBES = 500

TYPE_I, TYPE_II = "type-I", "type-II"
STRONG_I, STRONG_II = "strong-I", "strong-II"
WEAK_I, WEAK_II = "weak-I", "weak-II"
CLASSES = (TYPE_I, STRONG_I, WEAK_I, TYPE_II, STRONG_II, WEAK_II)


class ShapeError(ValueError):
    """Multipliers do not match the theorem they are claimed for."""


@dataclass(frozen=True)
class TheoremSpec:
    lam: tuple[str, ...]
    mu: tuple[str, ...]
    single: bool
    klass: str
    family: str  # weighted | split | strong | gh
    bounds: tuple[str, ...] = ()


THEOREMS: dict[str, TheoremSpec] = {
    "T32a": TheoremSpec(("lamL", "lamU"), ("mu",), False, TYPE_I, "weighted"),
    "T32b": TheoremSpec(("lamC", "lamW"), ("mu",), False, TYPE_II, "weighted"),
    "T32c": TheoremSpec(("lamL", "lamU"), ("mu",), False, TYPE_II, "weighted"),
    "T33": TheoremSpec((), ("mu",), False, TYPE_I, "split"),
    "T34a": TheoremSpec(("lamL", "lamU"), ("muL", "muU"), False, TYPE_I, "split"),
    "T34b": TheoremSpec(("lamC", "lamW"), ("muC", "muW"), False, TYPE_II, "split"),
    "T35a": TheoremSpec(("lamL", "lamU"), ("mu",), True, WEAK_I, "weighted"),
    "T35b": TheoremSpec(("lamC", "lamW"), ("mu",), True, WEAK_II, "weighted"),
    "T35c": TheoremSpec(("lamL", "lamU"), ("mu",), True, WEAK_II, "weighted"),
    "T36a": TheoremSpec((), ("muL", "muU"), True, WEAK_I, "split"),
    "T36b": TheoremSpec((), ("muC", "muW"), True, WEAK_II, "split"),
    "T37a": TheoremSpec((), ("mu",), True, STRONG_I, "strong", ("L", "U")),
    "T37b": TheoremSpec((), ("mu",), True, STRONG_II, "strong", ("C", "W")),
    "T38a": TheoremSpec((), ("mu",), True, STRONG_I, "strong", ("L", "U")),
    "T38b": TheoremSpec((), ("mu",), True, STRONG_II, "strong", ("C", "W")),
    "T41": TheoremSpec(("lam",), ("mu",), False, TYPE_I, "gh"),
}

# Fields that must be positive; mu-like fields must be nonnegative.
_ORDERED_LAMBDA = {"T32c", "T35c"}  # additionally lamL < lamU


def theorem_spec(tag: str) -> TheoremSpec:
    try:
        return THEOREMS[tag]
    except KeyError:
        raise ShapeError(f"unknown theorem tag {tag!r} (known: {', '.join(THEOREMS)})") from None


@dataclass(frozen=True)
class Multipliers:
    """Named multiplier vectors plus the optional objective index ``c`` (0-based),
    bound selector and constraint decomposition (0-based blocks)."""

    values: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    c: int | None = None
    bound: str | None = None
    decomposition: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        vals = {k: tuple(float(x) for x in v) for k, v in dict(self.values).items()}
        object.__setattr__(self, "values", vals)
        if self.decomposition is not None:
            object.__setattr__(self, "decomposition", tuple(tuple(int(u) for u in b) for b in self.decomposition))

    def __getitem__(self, name: str) -> np.ndarray:
        return np.asarray(self.values[name], dtype=float)

    def get(self, name: str) -> tuple[float, ...] | None:
        return self.values.get(name)


@dataclass(frozen=True)
class Certificate:
    theorem: str
    multipliers: Multipliers

    @property
    def spec(self) -> TheoremSpec:
        return theorem_spec(self.theorem)

    @property
    def claimed_class(self) -> str:
        return self.spec.klass

    def mu_vectors(self) -> dict[str, np.ndarray]:
        return {k: self.multipliers[k] for k in self.spec.mu if k in self.multipliers.values}

    def format(self) -> str:
        """Serialize as ``theorem=T.. name=v,v ...`` (1-based ``c`` and blocks)."""
        parts = [f"theorem={self.theorem}"]
        for k, v in self.multipliers.values.items():
            parts.append(f"{k}=" + ",".join(_num(x) for x in v))
        m = self.multipliers
        if m.c is not None:
            parts.append(f"c={m.c + 1}")
        if m.bound is not None:
            parts.append(f"bound={m.bound}")
        if m.decomposition is not None:
            parts.append("Q=" + "|".join(",".join(str(u + 1) for u in b) for b in m.decomposition))
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> Certificate:
        """Inverse of :meth:`format`."""
        fields: dict[str, str] = {}
        for tok in text.split():
            if "=" not in tok:
                raise ShapeError(f"certificate field must look like name=value, got {tok!r}")
            k, v = tok.split("=", 1)
            if k in fields:
                raise ShapeError(f"duplicate certificate field {k!r}")
            fields[k] = v
        tag = fields.pop("theorem", None)
        if tag is None:
            raise ShapeError("certificate needs theorem=<tag>")
        theorem_spec(tag)
        c = bound = decomp = None
        if "c" in fields:
            c = int(fields.pop("c")) - 1
        if "bound" in fields:
            bound = fields.pop("bound")
        if "Q" in fields:
            decomp = tuple(
                tuple(int(u) - 1 for u in block.split(",") if u.strip()) for block in fields.pop("Q").split("|")
            )
        values = {}
        for k, v in fields.items():
            try:
                values[k] = tuple(float(x) for x in v.split(",") if x.strip())
            except ValueError:
                raise ShapeError(f"non-numeric multiplier in {k}={v}") from None
        return cls(tag, Multipliers(values, c, bound, decomp))


def _num(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def default_decomposition(t: int, l: int) -> tuple[tuple[int, ...], ...]:
    """Singleton blocks ``{0}, {1}, ...``; the last block takes the remainder."""
    if t < 2 * l:
        raise ShapeError(f"a decomposition into {2 * l} blocks needs at least {2 * l} constraints, got {t}")
    return tuple((u,) for u in range(2 * l - 1)) + (tuple(range(2 * l - 1, t)),)


def check_shape(cert: Certificate, l: int, t: int) -> None:
    """Raise :class:`ShapeError` unless the multipliers fit the theorem."""
    spec = cert.spec
    m = cert.multipliers
    need_lam = 1 if spec.single else l
    expected = set(spec.lam) | set(spec.mu)
    got = set(m.values)
    if got != expected:
        missing, extra = sorted(expected - got), sorted(got - expected)
        msg = []
        if missing:
            msg.append(f"missing {', '.join(missing)}")
        if extra:
            msg.append(f"unexpected {', '.join(extra)}")
        raise ShapeError(f"{cert.theorem}: " + "; ".join(msg))
    for k in spec.lam:
        if len(m.values[k]) != need_lam:
            raise ShapeError(f"{cert.theorem}: {k} needs {need_lam} entries, got {len(m.values[k])}")
        if not all(x > 0 for x in m.values[k]):
            raise ShapeError(f"{cert.theorem}: {k} entries must be > 0")
    for k in spec.mu:
        if len(m.values[k]) != t:
            raise ShapeError(f"{cert.theorem}: {k} needs {t} entries, got {len(m.values[k])}")
        if not all(x >= 0 for x in m.values[k]):
            raise ShapeError(f"{cert.theorem}: {k} entries must be >= 0")
    if cert.theorem in _ORDERED_LAMBDA and not all(a < b for a, b in zip(m.values["lamL"], m.values["lamU"])):
        raise ShapeError(f"{cert.theorem}: requires lamL < lamU componentwise")
    if spec.single:
        if m.c is None:
            raise ShapeError(f"{cert.theorem}: objective index c is required")
        if not 0 <= m.c < l:
            raise ShapeError(f"{cert.theorem}: objective index c={m.c + 1} out of range 1..{l}")
    elif m.c is not None:
        raise ShapeError(f"{cert.theorem}: takes no objective index")
    if spec.bounds:
        if m.bound not in spec.bounds:
            raise ShapeError(f"{cert.theorem}: bound must be one of {', '.join(spec.bounds)}")
    elif m.bound is not None:
        raise ShapeError(f"{cert.theorem}: takes no bound selector")
    if cert.theorem == "T33":
        if t < 2 * l:
            raise ShapeError(f"T33 needs t >= 2l constraints (t={t}, l={l})")
        if m.decomposition is None:
            raise ShapeError("T33 needs a decomposition")
        _check_decomposition(m.decomposition, l, t)
    elif m.decomposition is not None:
        raise ShapeError(f"{cert.theorem}: takes no decomposition")


def _check_decomposition(blocks: Sequence[Sequence[int]], l: int, t: int) -> None:
    if len(blocks) != 2 * l:
        raise ShapeError(f"decomposition needs {2 * l} blocks, got {len(blocks)}")
    seen: set[int] = set()
    for b in blocks:
        if not b:
            raise ShapeError("decomposition blocks must be nonempty")
        for u in b:
            if not 0 <= u < t:
                raise ShapeError(f"decomposition index {u + 1} out of range 1..{t}")
            if u in seen:
                raise ShapeError(f"decomposition blocks overlap at constraint {u + 1}")
            seen.add(u)
    if len(seen) != t:
        raise ShapeError("decomposition blocks must cover every constraint")


# ---------------------------------------------------------------------------
# Problem-level helpers


def _feasible(prob, p, tol: float = FEAS_TOL) -> bool:
    try:
        return all(g(p) <= tol for g in prob.constraints)
    except (EvalError, ValueError):
        return False


def constraint_values(prob, p) -> np.ndarray:
    return np.array([g(p) for g in prob.constraints], dtype=float)


class InfeasibleCandidateError(ValueError):
    pass


def active_set(prob, pbar, tol: float = ACTIVE_TOL) -> frozenset[int]:
    """0-based indices ``u`` with ``|psi_u(pbar)| <= tol``."""
    vals = constraint_values(prob, pbar)
    bad = np.where(vals > tol)[0]
    if bad.size:
        u = int(bad[0])
        raise InfeasibleCandidateError(f"candidate violates constraint {prob.constraints[u].name} = {vals[u]:.6g}")
    return frozenset(int(u) for u in np.where(np.abs(vals) <= tol)[0])


def slackness_residuals(prob, pbar, mus: Mapping[str, Sequence[float]]) -> dict[str, float]:
    vals = constraint_values(prob, pbar)
    return {k: float(np.max(np.abs(np.asarray(v) * vals), initial=0.0)) for k, v in mus.items()}


def check_slackness(prob, pbar, mus, tol: float = TOL) -> bool:
    """``|mu_u psi_u(pbar)| <= tol`` for every supplied mu-like vector.

    ``mus`` is a mapping of named vectors or a plain sequence of vectors.
    """
    if not isinstance(mus, Mapping):
        mus = {f"mu{i}": v for i, v in enumerate(mus)}
    return all(r <= tol for r in slackness_residuals(prob, pbar, mus).values())


# ---------------------------------------------------------------------------
# Probe sets and derivative tables


@dataclass
class ProbeSet:
    """Directions ``log_pbar(p_k)`` with their source points.

    ``scope="domain"`` keeps every sampled point of the box,
    ``scope="feasible"`` only those satisfying all constraints. Sources equal
    to ``pbar`` give a zero direction and are dropped.
    """

    pbar: np.ndarray
    sources: list[np.ndarray]
    directions: list[np.ndarray]
    seed: int = DEFAULT_SEED
    scope: str = "domain"
    requested: int = 0

    def __len__(self) -> int:
        return len(self.directions)

    @classmethod
    def from_points(cls, prob, pbar, points, scope: str = "domain", seed: int = DEFAULT_SEED) -> ProbeSet:
        if scope not in ("domain", "feasible"):
            raise ValueError(f"scope must be 'domain' or 'feasible', got {scope!r}")
        m = prob.manifold
        pbar = m.check_point(pbar)
        sources, dirs = [], []
        pts = list(points)
        for p in pts:
            p = m.check_point(p)
            if m.same_point(p, pbar):
                continue
            if scope == "feasible" and not _feasible(prob, p):
                continue
            sources.append(p)
            dirs.append(m.log(pbar, p))
        return cls(pbar, sources, dirs, seed, scope, len(pts))

    @classmethod
    def sample(
        cls, prob, pbar, n: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED, scope: str = "domain", box: Box | None = None
    ) -> ProbeSet:
        pts = sample_points(prob.manifold, box or prob.box, n, seed)
        return cls.from_points(prob, pbar, pts, scope, seed)

    def label(self) -> str:
        return f"{len(self)} probes ({self.scope}, seed {self.seed})"


_COMPONENTS = ("L", "U", "C", "W")


class DerivTable:
    """Lazily computed directional derivatives at ``pbar`` along every probe.

    Keys are ``("obj", s, comp)`` with ``comp`` in L/U/C/W/min/max and
    ``("con", u)``. All functions share one geodesic ray per direction.
    """

    def __init__(self, prob, probes: ProbeSet):
        self.prob = prob
        self.probes = probes
        m = prob.manifold
        self._rays = [GeodesicRay(m, probes.pbar, w) for w in probes.directions]
        self._cache: dict[tuple, np.ndarray] = {}

    def _fn(self, key) -> ScalarFn:
        if key[0] == "con":
            return self.prob.constraints[key[1]]
        return self.prob.objectives[key[1]].component(key[2])

    def get(self, key) -> np.ndarray:
        out = self._cache.get(key)
        if out is not None:
            return out
        if key[0] == "obj" and key[2] in ("min", "max"):
            lo, hi = self.get(("obj", key[1], "L")), self.get(("obj", key[1], "U"))
            out = np.minimum(lo, hi) if key[2] == "min" else np.maximum(lo, hi)
        else:
            f = self._fn(key)
            out = np.empty(len(self._rays))
            for k, ray in enumerate(self._rays):
                try:
                    out[k] = dir_deriv(f, ray.p, ray.w, ray=ray)
                except DerivativeError as exc:
                    raise DerivativeError(
                        f"{exc} (probe {k}, source {self.prob.manifold.format_point(self.probes.sources[k])})"
                    ) from exc
        self._cache[key] = out
        return out


# ---------------------------------------------------------------------------
# Conditions


@dataclass(frozen=True)
class _Condition:
    """``sum coef * D[key] + sum x[var] * D[key] >= 0`` (or ``> 0`` if strict)."""

    label: str
    const: tuple[tuple[float, tuple], ...]
    terms: tuple[tuple[tuple[str, int], tuple], ...]
    strict: bool = False


def _mu_terms(name: str, t: int, subset=None) -> list:
    us = range(t) if subset is None else subset
    return [((name, u), ("con", u)) for u in us]


def build_conditions(tag: str, l: int, t: int, c=None, bound=None, decomposition=None) -> list[_Condition]:
    spec = theorem_spec(tag)
    objs = [c] if spec.single else list(range(l))
    conds: list[_Condition] = []

    def weighted(comps, lam_names, mu_name, label):
        terms = []
        for i, s in enumerate(objs):
            for comp, lam in zip(comps, lam_names):
                terms.append(((lam, i), ("obj", s, comp)))
        return _Condition(label, (), tuple(terms + _mu_terms(mu_name, t)))

    if tag in ("T32a", "T32c", "T35a", "T35c"):
        conds.append(weighted("LU", ("lamL", "lamU"), "mu", "weighted L/U sum"))
    elif tag in ("T32b", "T35b"):
        conds.append(weighted("CW", ("lamC", "lamW"), "mu", "weighted C/W sum"))
    elif tag == "T33":
        blocks = decomposition
        for s in range(l):
            conds.append(_Condition(f"phi{s + 1}^L block", ((1.0, ("obj", s, "L")),), tuple(_mu_terms("mu", t, blocks[s]))))
            conds.append(
                _Condition(f"phi{s + 1}^U block", ((1.0, ("obj", s, "U")),), tuple(_mu_terms("mu", t, blocks[s + l])))
            )
    elif tag in ("T34a", "T34b"):
        a, b = ("L", "U") if tag == "T34a" else ("C", "W")
        for comp in (a, b):
            terms = [((f"lam{comp}", s), ("obj", s, comp)) for s in range(l)]
            conds.append(_Condition(f"{comp} sum", (), tuple(terms + _mu_terms(f"mu{comp}", t))))
    elif tag in ("T36a", "T36b"):
        for comp in ("L", "U") if tag == "T36a" else ("C", "W"):
            conds.append(_Condition(f"phi_c^{comp}", ((1.0, ("obj", c, comp)),), tuple(_mu_terms(f"mu{comp}", t))))
    elif tag in ("T37a", "T37b"):
        conds.append(_Condition(f"phi_c^{bound}", ((1.0, ("obj", c, bound)),), tuple(_mu_terms("mu", t))))
    elif tag == "T38a":
        other = "U" if bound == "L" else "L"
        conds.append(
            _Condition(
                f"(phi_c^{bound})' < (phi_c^{other})'",
                ((1.0, ("obj", c, other)), (-1.0, ("obj", c, bound))),
                (),
                strict=True,
            )
        )
        conds.append(_Condition(f"phi_c^{bound}", ((1.0, ("obj", c, bound)),), tuple(_mu_terms("mu", t))))
    elif tag == "T38b":
        if bound == "C":
            order = ((1.0, ("obj", c, "U")), (-1.0, ("obj", c, "L")))
            sign = ((1.0, ("obj", c, "L")),)
            labels = ("(phi_c^L)' < (phi_c^U)'", "(phi_c^L)' > 0")
        else:
            order = ((1.0, ("obj", c, "L")), (-1.0, ("obj", c, "U")))
            sign = ((-1.0, ("obj", c, "U")),)
            labels = ("(phi_c^U)' < (phi_c^L)'", "(phi_c^U)' < 0")
        conds.append(_Condition(labels[0], order, (), strict=True))
        conds.append(_Condition(labels[1], sign, (), strict=True))
        conds.append(_Condition(f"phi_c^{bound}", ((1.0, ("obj", c, bound)),), tuple(_mu_terms("mu", t))))
    elif tag == "T41":
        for side in ("min", "max"):
            terms = [(("lam", s), ("obj", s, side)) for s in range(l)]
            conds.append(_Condition(f"endpoint {side}", (), tuple(terms + _mu_terms("mu", t))))
    return conds


def _const_part(cond: _Condition, table: DerivTable) -> np.ndarray:
    out = np.zeros(len(table.probes))
    for coef, key in cond.const:
        out = out + coef * table.get(key)
    return out


def _evaluate(cond: _Condition, table: DerivTable, mults: Multipliers) -> np.ndarray:
    out = _const_part(cond, table)
    for (name, i), key in cond.terms:
        x = mults.values[name][i]
        if x != 0.0:
            out = out + x * table.get(key)
    return out


# ---------------------------------------------------------------------------
# Verdicts


CERTIFIED = "certified"
VIOLATED = "violated"
SHAPE_ERROR = "shape-error"
HYP_UNVERIFIED = "hypotheses-unverified"


@dataclass
class Verdict:
    theorem: str
    status: str
    claimed_class: str = ""
    n_probes: int = 0
    seed: int = DEFAULT_SEED
    scope: str = "domain"
    tol: float = TOL
    min_residual: float | None = None
    worst: dict[str, Any] | None = None
    slackness: dict[str, float] = field(default_factory=dict)
    hypotheses: list[ProbeReport] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    message: str = ""
    gh_intervals: list[Interval] = field(default_factory=list)

    @property
    def conditions_hold(self) -> bool:
        return self.status in (CERTIFIED, HYP_UNVERIFIED)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def key_values(self) -> dict[str, str]:
        kv = {
            "theorem": self.theorem,
            "status": self.status,
            "claimed_class": self.claimed_class,
            "probes": str(self.n_probes),
            "scope": self.scope,
            "seed": str(self.seed),
            "tol": f"{self.tol:g}",
            "min_residual": "nan" if self.min_residual is None else f"{self.min_residual:.3e}",
        }
        for k, v in self.slackness.items():
            kv[f"slackness_{k}"] = f"{v:.3e}"
        kv["hypotheses_checked"] = str(len(self.hypotheses))
        kv["hypotheses_failed"] = str(sum(not h.holds for h in self.hypotheses))
        if self.gh_intervals:
            mag = max(max(abs(iv.lo), abs(iv.hi)) for iv in self.gh_intervals)
            kv["gh_condition_max_abs"] = f"{mag:.3e}"
        if self.worst:
            kv["worst_probe"] = str(self.worst.get("probe"))
            kv["worst_condition"] = str(self.worst.get("condition"))
        kv["warnings"] = str(len(self.warnings))
        return kv

    def report(self) -> str:
        head = f"{self.theorem}: {self.status}"
        if self.status in (CERTIFIED, HYP_UNVERIFIED):
            head += f" on {self.n_probes} probes ({self.scope}, seed {self.seed})"
        lines = [head]
        if self.claimed_class:
            lines.append(f"  claimed class: {self.claimed_class} POS")
        if self.message:
            lines.append(f"  {self.message}")
        if self.min_residual is not None:
            lines.append(f"  min residual: {self.min_residual:.6g} (tol {self.tol:g})")
        if self.worst:
            lines.append("  worst: " + ", ".join(f"{k}={v}" for k, v in self.worst.items()))
        for k, v in self.slackness.items():
            lines.append(f"  slackness max|{k}*psi|: {v:.3e}")
        if self.gh_intervals:
            lo = min(iv.lo for iv in self.gh_intervals)
            hi = max(iv.hi for iv in self.gh_intervals)
            lines.append(f"  gH condition intervals: lo in [{lo:.3e}, ...], hi up to {hi:.3e}")
        for h in self.hypotheses:
            lines.append("  hypothesis " + h.summary())
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        lines.append("")
        lines.extend(f"{k}={v}" for k, v in self.key_values().items())
        return "\n".join(lines)


def _base_verdict(cert: Certificate, probes: ProbeSet, tol: float) -> Verdict:
    return Verdict(
        cert.theorem,
        CERTIFIED,
        THEOREMS[cert.theorem].klass if cert.theorem in THEOREMS else "",
        len(probes),
        probes.seed,
        probes.scope,
        tol,
    )


def _check_conditions(prob, cert, probes, table, tol, verdict: Verdict) -> None:
    m = cert.multipliers
    conds = build_conditions(cert.theorem, len(prob.objectives), len(prob.constraints), m.c, m.bound, m.decomposition)
    worst_val, worst = np.inf, None
    fail = None
    for cond in conds:
        vals = _evaluate(cond, table, m)
        if not vals.size:
            continue
        if cond.strict:
            bad = np.where(~(vals > tol))[0]
            if bad.size and fail is None:
                k = int(bad[0])
                fail = {"probe": k, "condition": cond.label, "value": f"{vals[k]:.6g}", "strict": True}
            continue
        k = int(np.argmin(vals))
        if vals[k] < worst_val:
            worst_val, worst = float(vals[k]), {"probe": k, "condition": cond.label, "residual": f"{vals[k]:.6g}"}
    if np.isfinite(worst_val):
        verdict.min_residual = worst_val
    for w in (fail, worst):
        if w is not None:
            w["source"] = prob.manifold.format_point(probes.sources[w["probe"]])
    if fail is not None:
        verdict.status, verdict.worst = VIOLATED, fail
        verdict.message = f"strict condition {fail['condition']} fails at probe {fail['probe']}"
    elif worst is not None and worst_val < -tol:
        verdict.status, verdict.worst = VIOLATED, worst
        verdict.message = f"condition {worst['condition']} has residual {worst_val:.6g} < -{tol:g}"
    elif worst is not None:
        verdict.worst = worst


def _check_slack(prob, pbar, cert, tol, verdict: Verdict) -> None:
    verdict.slackness = slackness_residuals(prob, pbar, cert.mu_vectors())
    bad = [k for k, v in verdict.slackness.items() if v > tol]
    if bad and verdict.status == CERTIFIED:
        verdict.status = VIOLATED
        verdict.message = f"complementary slackness fails for {', '.join(bad)}"


def _verify(prob, pbar, cert, probes, tol, families, hypotheses, table=None, **hyp_kw) -> Verdict:
    verdict = _base_verdict(cert, probes, tol)
    try:
        spec = cert.spec
        if spec.family not in families:
            raise ShapeError(f"{cert.theorem} is not handled here (expected one of {', '.join(families)} theorems)")
        check_shape(cert, len(prob.objectives), len(prob.constraints))
    except ShapeError as exc:
        verdict.status, verdict.message = SHAPE_ERROR, str(exc)
        return verdict
    pbar = prob.manifold.check_point(pbar)
    try:
        act = active_set(prob, pbar)
    except InfeasibleCandidateError as exc:
        verdict.status, verdict.message = VIOLATED, str(exc)
        return verdict
    table = table or DerivTable(prob, probes)
    if spec.family == "gh":
        _check_gh(prob, cert, probes, table, tol, verdict)
    else:
        _check_conditions(prob, cert, probes, table, tol, verdict)
    _check_slack(prob, pbar, cert, tol, verdict)
    if spec.family in ("split", "strong") and cert.theorem != "T33":
        for k, v in cert.mu_vectors().items():
            if act and all(v[u] == 0.0 for u in act):
                verdict.warnings.append(f"{k} is zero on the whole active set")
    if hypotheses and verdict.status == CERTIFIED:
        verdict.hypotheses = check_hypotheses(prob, pbar, cert, probes, act, **hyp_kw)
        if not all(h.holds for h in verdict.hypotheses):
            verdict.status = HYP_UNVERIFIED
    return verdict


def verify_weighted_kkt(prob, pbar, cert, probes, tol: float = TOL, hypotheses: bool = True, **kw) -> Verdict:
    """Weighted-sum certificates (tags T32a/b/c, T35a/b/c)."""
    return _verify(prob, pbar, cert, probes, tol, ("weighted",), hypotheses, **kw)


def verify_split_kkt(prob, pbar, cert, probes, tol: float = TOL, hypotheses: bool = True, **kw) -> Verdict:
    """Per-bound certificates (tags T33, T34a/b, T36a/b)."""
    return _verify(prob, pbar, cert, probes, tol, ("split",), hypotheses, **kw)


def verify_strong_kkt(prob, pbar, cert, probes, tol: float = TOL, hypotheses: bool = True, **kw) -> Verdict:
    """Single-bound certificates for strong optimality (tags T37a/b, T38a/b)."""
    return _verify(prob, pbar, cert, probes, tol, ("strong",), hypotheses, **kw)


def verify_gh_kkt(prob, pbar, cert, probes, tol: float = TOL, hypotheses: bool = True, **kw) -> Verdict:
    """gH-difference certificate (tag T41).

    Per probe: ``A = sum lam_s phi_s'`` (interval), ``c = sum mu_u psi_u'``;
    the condition interval ``(-A) gh- [c, c]`` must be ``<=_LU [tol, tol]``.
    The endpoint form ``A.lo + c >= -tol and A.hi + c >= -tol`` is evaluated
    independently and must give the same answer on every probe.
    """
    return _verify(prob, pbar, cert, probes, tol, ("gh",), hypotheses, **kw)


def verify(prob, pbar, cert, probes, tol: float = TOL, hypotheses: bool = True, **kw) -> Verdict:
    """Dispatch on the certificate's theorem tag."""
    return _verify(prob, pbar, cert, probes, tol, ("weighted", "split", "strong", "gh"), hypotheses, **kw)


class FormulationMismatch(AssertionError):
    pass


def _check_gh(prob, cert, probes, table, tol, verdict: Verdict) -> None:
    lam = cert.multipliers["lam"]
    mu = cert.multipliers["mu"]
    l, t = len(prob.objectives), len(prob.constraints)
    dL = [table.get(("obj", s, "L")) for s in range(l)]
    dU = [table.get(("obj", s, "U")) for s in range(l)]
    dpsi = [table.get(("con", u)) for u in range(t)]
    bound = Interval(tol, tol)
    worst_val, worst = np.inf, None
    for k in range(len(probes)):
        A = Interval(0.0, 0.0)
        lo_sum = hi_sum = 0.0
        for s in range(l):
            a, b = float(dL[s][k]), float(dU[s][k])
            A = A + scale(float(lam[s]), Interval(min(a, b), max(a, b)))
            lo_sum = lo_sum + float(lam[s]) * min(a, b)
            hi_sum = hi_sum + float(lam[s]) * max(a, b)
        c = 0.0
        for u in range(t):
            c = c + float(mu[u]) * float(dpsi[u][k])
        cond = gh_diff(scale(-1.0, A), Interval(c, c))
        gh_ok = leq_lu(cond, bound)
        ep_ok = lo_sum + c >= -tol and hi_sum + c >= -tol
        if gh_ok != ep_ok:
            raise FormulationMismatch(f"gH and endpoint forms disagree at probe {k}: {cond} vs {lo_sum + c}, {hi_sum + c}")
        verdict.gh_intervals.append(cond)
        val = -cond.hi  # equals min(lo_sum, hi_sum) + c
        if val < worst_val:
            worst_val = val
            worst = {"probe": k, "condition": "gH interval", "interval": str(cond)}
    if worst is not None:
        verdict.min_residual = worst_val
        worst["source"] = prob.manifold.format_point(probes.sources[worst["probe"]])
        verdict.worst = worst
        if worst_val < -tol:
            verdict.status = VIOLATED
            verdict.message = f"gH condition interval {worst['interval']} is not <=_LU [0,0] within {tol:g}"


# ---------------------------------------------------------------------------
# Hypothesis probes


def _objective_set(prob, cert) -> list[int]:
    return [cert.multipliers.c] if cert.spec.single else list(range(len(prob.objectives)))


def check_hypotheses(
    prob, pbar, cert: Certificate, probes: ProbeSet, act=None, n_pairs: int = 200, n_alphas: int = 9
) -> list[ProbeReport]:
    """Sampled checks of the convexity assumptions behind ``cert.theorem``."""
    tag = cert.theorem
    m = prob.manifold
    pbar = m.check_point(pbar)
    act = active_set(prob, pbar) if act is None else act
    objs = _objective_set(prob, cert)
    seed = probes.seed
    reports: list[ProbeReport] = []
    convex_family = tag[:3] in ("T32", "T35") or tag in ("T33", "T41")
    anchored = None

    def anchored_pairs():
        nonlocal anchored
        if anchored is None:
            anchored = sample_pairs(m, prob.box, n_pairs, n_alphas, seed, anchor=pbar, extra=prob.pairs)
        return anchored

    points = probes.sources

    def pc(f: ScalarFn, strict: bool) -> ProbeReport:
        return pseudoconvexity_probe(f, pbar, points, strict)

    if convex_family:
        pairs = sample_pairs(m, prob.box, n_pairs, n_alphas, seed, extra=prob.pairs) if tag == "T33" else anchored_pairs()
        reports += [convexity_probe(g, pairs) for g in prob.constraints]
    else:
        reports += [pc(prob.constraints[u], True) for u in sorted(act)]

    F = [prob.objectives[s] for s in objs]
    if tag in ("T32a", "T33", "T35a", "T41"):
        reports += [lu_convexity_probe(f, anchored_pairs()) for f in F]
    elif tag in ("T32b", "T32c", "T35b", "T35c"):
        reports += [cw_convexity_probe(f, anchored_pairs()) for f in F]
    elif tag in ("T34a", "T34b"):
        comps = "LU" if tag == "T34a" else "CW"
        reports += [pc(f.component(k), True) for f in F for k in comps]
    elif tag in ("T36a", "T36b"):
        comps = "LU" if tag == "T36a" else "CW"
        reports += [pc(f.component(k), False) for f in F for k in comps]
    elif tag in ("T37a", "T37b"):
        reports += [pc(f.component(cert.multipliers.bound), True) for f in F]
    elif tag in ("T38a", "T38b"):
        b = cert.multipliers.bound
        need = {"L": "U", "U": "L", "C": "C", "W": "W"}[b]
        reports += [convexity_probe(f.component(need), anchored_pairs()) for f in F]
    return reports


def feasible_direction_probe(prob, pbar, probes: ProbeSet, tol: float = 1e-10) -> ProbeReport:
    """Derivatives of active constraints toward strictly feasible sources must be ``< -tol``."""
    m = prob.manifold
    pbar = m.check_point(pbar)
    act = sorted(active_set(prob, pbar))
    checked = 0
    for k, (p, w) in enumerate(zip(probes.sources, probes.directions)):
        try:
            if not all(g(p) < 0.0 for g in prob.constraints):
                continue
        except (EvalError, ValueError):
            continue
        ray = GeodesicRay(m, pbar, w)
        for u in act:
            checked += 1
            d = dir_deriv(prob.constraints[u], pbar, w, ray=ray)
            if not d < -tol:
                return ProbeReport(
                    False,
                    "feasible directions",
                    checked,
                    {"probe": k, "p": p, "constraint": prob.constraints[u].name, "deriv": d},
                )
    return ProbeReport(True, "feasible directions", checked)


# ---------------------------------------------------------------------------
# Multiplier search


@dataclass
class SearchResult:
    certificate: Certificate | None
    message: str
    tried: list[str] = field(default_factory=list)
    verdict: Verdict | None = None

    @property
    def feasible(self) -> bool:
        return self.certificate is not None


def _search_one(prob, pbar, tag, table, act, eps_lambda, tol, c, bound, decomposition) -> tuple[Certificate | None, str]:
    spec = THEOREMS[tag]
    l, t = len(prob.objectives), len(prob.constraints)
    n_lam = 1 if spec.single else l
    conds = build_conditions(tag, l, t, c, bound, decomposition)
    for cond in conds:
        if cond.strict:
            vals = _const_part(cond, table)
            bad = np.where(~(vals > tol))[0]
            if bad.size:
                return None, f"strict condition {cond.label} fails at probe {int(bad[0])}"
    var_index: dict[tuple[str, int], int] = {}
    bounds: list[tuple[float, float]] = []
    psi_bar = constraint_values(prob, table.probes.pbar)
    for name in spec.lam:
        for i in range(n_lam):
            var_index[(name, i)] = len(bounds)
            bounds.append((eps_lambda, np.inf))
    for name in spec.mu:
        for u in range(t):
            var_index[(name, u)] = len(bounds)
            if u not in act:
                bounds.append((0.0, 0.0))
            elif psi_bar[u] != 0.0:
                # keeps |mu psi(pbar)| within tol exactly
                bounds.append((0.0, 0.5 * tol / abs(psi_bar[u])))
            else:
                bounds.append((0.0, np.inf))
    nv = len(bounds)
    rows, rhs, senses = [], [], []
    margin = 0.5 * tol
    for cond in conds:
        if cond.strict:
            continue
        const = _const_part(cond, table)
        coef = np.zeros((len(table.probes), nv))
        for var, key in cond.terms:
            coef[:, var_index[var]] += table.get(key)
        rows.append(coef)
        rhs.append(-const - margin)
        senses += [">="] * len(const)
    # normalization of each positively homogeneous group
    groups: list[list[str]] = []
    if tag in ("T34a", "T34b"):
        groups = [[n] for n in spec.lam]
    elif spec.lam:
        groups = [list(spec.lam)]
    for g in groups:
        r = np.zeros(nv)
        for name in g:
            for i in range(n_lam):
                r[var_index[(name, i)]] = 1.0
        rows.append(r[None, :])
        rhs.append(np.array([1.0]))
        senses.append("=")
    cost = None
    if groups:
        # maximize tau <= every lambda so no objective is weighted near zero
        tau = nv
        nv += 1
        bounds.append((0.0, 1.0))
        rows = [np.hstack([r, np.zeros((r.shape[0], 1))]) for r in rows]
        for name in spec.lam:
            for i in range(n_lam):
                r = np.zeros(nv)
                r[var_index[(name, i)]] = 1.0
                r[tau] = -1.0
                rows.append(r[None, :])
                rhs.append(np.array([0.0]))
                senses.append(">=")
        cost = np.zeros(nv)
        cost[tau] = -1.0
    if tag in _ORDERED_LAMBDA:
        for i in range(n_lam):
            r = np.zeros(nv)
            r[var_index[("lamU", i)]] = 1.0
            r[var_index[("lamL", i)]] = -1.0
            rows.append(r[None, :])
            rhs.append(np.array([eps_lambda]))
            senses.append(">=")
    if rows:
        A = np.vstack(rows)
        b = np.concatenate(rhs)
    else:
        A = np.zeros((0, nv))
        b = np.zeros(0)
    if nv == 0:
        ok = all(bb <= 0 for bb in b)
        x = np.zeros(0)
        if not ok:
            return None, "no multipliers to choose and the conditions fail"
    else:
        if A.shape[0] == 0:
            A, b, senses = np.zeros((1, nv)), np.zeros(1), [">="]
        res = lp_feasible(A, b, senses, bounds, cost)
        if not res.feasible:
            return None, res.message
        x = res.x
    values: dict[str, tuple[float, ...]] = {}
    for name in spec.lam:
        values[name] = tuple(float(x[var_index[(name, i)]]) for i in range(n_lam))
    for name in spec.mu:
        values[name] = tuple(float(x[var_index[(name, u)]]) for u in range(t))
    return Certificate(tag, Multipliers(values, c, bound, decomposition)), "feasible"


def search_multipliers(
    prob,
    pbar,
    tag: str,
    probes: ProbeSet,
    eps_lambda: float = EPS_LAMBDA,
    tol: float = TOL,
    c: int | None = None,
    bound: str | None = None,
    decomposition=None,
) -> SearchResult:
    """Find multipliers satisfying ``tag``'s conditions on ``probes`` by LP.

    Complementary slackness is imposed by fixing ``mu_u = 0`` off the active
    set. Each theorem condition is required to hold with margin ``tol / 2``
    so the result passes verification at ``tol``. For single-index theorems
    every ``c`` (and bound selector) is tried unless given.
    """
    spec = theorem_spec(tag)
    m = prob.manifold
    pbar = m.check_point(pbar)
    l, t = len(prob.objectives), len(prob.constraints)
    try:
        act = active_set(prob, pbar)
    except InfeasibleCandidateError as exc:
        return SearchResult(None, str(exc))
    if tag == "T33":
        try:
            decomposition = decomposition or default_decomposition(t, l)
            _check_decomposition(decomposition, l, t)
        except ShapeError as exc:
            return SearchResult(None, str(exc))
    table = DerivTable(prob, probes)
    cs = [c] if c is not None or not spec.single else list(range(l))
    if not spec.single:
        cs = [None]
    bs = [bound] if bound is not None or not spec.bounds else list(spec.bounds)
    tried = []
    last = ""
    for ci in cs:
        for bi in bs:
            label = tag + (f" c={ci + 1}" if ci is not None else "") + (f" bound={bi}" if bi else "")
            cert, msg = _search_one(prob, pbar, tag, table, act, eps_lambda, tol, ci, bi, decomposition)
            tried.append(f"{label}: {msg}")
            if cert is not None:
                verdict = verify(prob, pbar, cert, probes, tol, hypotheses=False, table=table)
                if not verdict.conditions_hold:
                    raise RuntimeError(f"search produced a certificate that fails verification: {verdict.message}")
                return SearchResult(cert, "feasible", tried, verdict)
            last = msg
    return SearchResult(None, f"no multipliers satisfy {tag} on {len(probes)} probes ({last})", tried)
