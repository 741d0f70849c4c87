"""Problem files and the built-in registry.

A problem file is a sequence of lines; ``#`` starts a comment::

    manifold   <euclidean|logorthant|spd> <n>
    box        lo:hi, lo:hi, ...
    objective  <name> lower=<expr> upper=<expr>
    constraint <name> <expr>
    candidate  <point>
    certificate theorem=<tag> <field>=<v,v,...> ...
    pair       <point> <point>

Points are ``(a, b, ...)`` or ``sym[a11, a12, ..., ann]``; entries may be
constant expressions such as ``exp(2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calculus import IntervalFn, ScalarFn
from .expr import EvalError, ExprSyntaxError, constant_value, parse
from .kkt import Certificate, ShapeError, check_shape
from .manifold import InvalidPointError, Manifold, make_manifold, parse_point
from .sampling import Box, check_box, sample_points

LOAD_CHECK_POINTS = 64


class ProblemFileError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<problem>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        loc = f"{source}:{line}:{column}" if line else source
        super().__init__(f"{loc}: {message}")


@dataclass
class ProblemSpec:
    name: str
    manifold: Manifold
    objectives: list[IntervalFn]
    constraints: list[ScalarFn]
    box: Box
    candidate: np.ndarray | None = None
    certificates: list[Certificate] = field(default_factory=list)
    pairs: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.objectives:
            raise ValueError("a problem needs at least one objective")
        check_box(self.manifold, self.box)

    def objective_values(self, p):
        return tuple(f(p) for f in self.objectives)

    def certificate(self, tag: str | None = None) -> Certificate | None:
        for c in self.certificates:
            if tag is None or c.theorem == tag:
                return c
        return None

    def without_constraints(self, names, name: str | None = None) -> ProblemSpec:
        drop = set(names)
        return ProblemSpec(
            name or self.name,
            self.manifold,
            list(self.objectives),
            [g for g in self.constraints if g.name not in drop],
            self.box,
            self.candidate,
            [],
            list(self.pairs),
        )

    def summary(self) -> str:
        return (
            f"{self.name}: {self.manifold}, {len(self.objectives)} objectives, "
            f"{len(self.constraints)} constraints, box {self.box}"
        )


_LINE_RE = re.compile(r"^(\s*)(\w+)\s*(.*)$")
_OBJ_RE = re.compile(r"^(\w+)\s+lower\s*=\s*(.+?)\s+upper\s*=\s*(.+)$")
_CON_RE = re.compile(r"^(\w+)\s+(.+)$")


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _point(m: Manifold, text: str, line: int, col: int, src: str) -> np.ndarray:
    try:
        return parse_point(m, text, evaluate=constant_value)
    except (InvalidPointError, ExprSyntaxError, EvalError, ValueError) as exc:
        raise ProblemFileError(f"bad point {text!r}: {exc}", line, col, src) from None


def _split_two_points(text: str) -> tuple[str, str]:
    depth = 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth == 0:
                return text[: i + 1], text[i + 1 :].strip()
    return text, ""


def parse_problem(text: str, name: str = "problem", source: str = "<problem>") -> ProblemSpec:
    """Parse a problem file; errors carry 1-based line and column."""
    manifold: Manifold | None = None
    box: Box | None = None
    objectives: list[IntervalFn] = []
    constraints: list[ScalarFn] = []
    candidate = None
    cert_lines: list[tuple[str, int, int]] = []
    pair_lines: list[tuple[str, int, int]] = []
    names: set[str] = set()
    objective_lines: list[int] = []

    def expr_fn(src_text: str, fname: str, line: int, col: int) -> ScalarFn:
        try:
            e = parse(src_text)
        except ExprSyntaxError as exc:
            raise ProblemFileError(exc.message, line, col + exc.offset, source) from None
        try:
            return ScalarFn(e, manifold, fname)
        except ValueError as exc:
            raise ProblemFileError(str(exc), line, col, source) from None

    def need_manifold(line: int, col: int) -> None:
        if manifold is None:
            raise ProblemFileError("'manifold' must be declared before this line", line, col, source)

    def unique(n: str, line: int, col: int) -> None:
        if n in names:
            raise ProblemFileError(f"duplicate function name {n!r}", line, col, source)
        names.add(n)

    for lineno, raw in enumerate(text.splitlines(), 1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        m = _LINE_RE.match(body)
        indent, key, rest = m.group(1), m.group(2), m.group(3).rstrip()
        col0 = len(indent) + 1
        rest_col = body.index(rest, len(indent) + len(key)) + 1 if rest else len(body) + 1
        if key == "manifold":
            if manifold is not None:
                raise ProblemFileError("duplicate 'manifold' line", lineno, col0, source)
            bits = rest.split()
            if len(bits) != 2:
                raise ProblemFileError("expected 'manifold <kind> <n>'", lineno, rest_col, source)
            try:
                manifold = make_manifold(bits[0], int(bits[1]))
            except ValueError as exc:
                raise ProblemFileError(str(exc), lineno, rest_col, source) from None
        elif key == "box":
            try:
                box = Box.parse(rest)
            except ValueError as exc:
                raise ProblemFileError(str(exc), lineno, rest_col, source) from None
        elif key == "objective":
            need_manifold(lineno, col0)
            om = _OBJ_RE.match(rest)
            if not om:
                raise ProblemFileError("expected 'objective <name> lower=<expr> upper=<expr>'", lineno, rest_col, source)
            oname = om.group(1)
            unique(oname, lineno, rest_col)
            lo = expr_fn(om.group(2), f"{oname}^L", lineno, rest_col + om.start(2))
            hi = expr_fn(om.group(3), f"{oname}^U", lineno, rest_col + om.start(3))
            objectives.append(IntervalFn(lo, hi, oname))
            objective_lines.append(lineno)
        elif key == "constraint":
            need_manifold(lineno, col0)
            cm = _CON_RE.match(rest)
            if not cm:
                raise ProblemFileError("expected 'constraint <name> <expr>'", lineno, rest_col, source)
            unique(cm.group(1), lineno, rest_col)
            constraints.append(expr_fn(cm.group(2), cm.group(1), lineno, rest_col + cm.start(2)))
        elif key == "candidate":
            need_manifold(lineno, col0)
            candidate = _point(manifold, rest, lineno, rest_col, source)
        elif key == "certificate":
            cert_lines.append((rest, lineno, rest_col))
        elif key == "pair":
            need_manifold(lineno, col0)
            pair_lines.append((rest, lineno, rest_col))
        else:
            raise ProblemFileError(f"unknown block {key!r}", lineno, col0, source)

    if manifold is None:
        raise ProblemFileError("missing 'manifold' line", 1, 1, source)
    if box is None:
        raise ProblemFileError("missing 'box' line", 1, 1, source)
    if not objectives:
        raise ProblemFileError("at least one 'objective' line is required", 1, 1, source)
    pairs = []
    for rest, lineno, col in pair_lines:
        a, b = _split_two_points(rest)
        if not b:
            raise ProblemFileError("expected 'pair <point> <point>'", lineno, col, source)
        pairs.append((_point(manifold, a, lineno, col, source), _point(manifold, b, lineno, col, source)))
    try:
        check_box(manifold, box)
    except ValueError as exc:
        raise ProblemFileError(str(exc), 1, 1, source) from None
    certificates = []
    for rest, lineno, col in cert_lines:
        try:
            cert = Certificate.parse(rest)
            check_shape(cert, len(objectives), len(constraints))
        except (ShapeError, ValueError) as exc:
            raise ProblemFileError(str(exc), lineno, col, source) from None
        certificates.append(cert)
    prob = ProblemSpec(name, manifold, objectives, constraints, box, candidate, certificates, pairs)
    _check_bounds_order(prob, source, objective_lines)
    return prob


def _check_bounds_order(prob: ProblemSpec, source: str, lines: list[int]) -> None:
    """Reject objectives whose lower expression exceeds the upper one on samples."""
    pts = sample_points(prob.manifold, prob.box, LOAD_CHECK_POINTS, seed=0)
    if prob.candidate is not None:
        pts.append(prob.candidate)
    for f, lineno in zip(prob.objectives, lines):
        for p in pts:
            try:
                lo, hi = f.lower(p), f.upper(p)
            except (EvalError, ValueError):
                continue
            if lo > hi:
                raise ProblemFileError(
                    f"objective {f.name}: lower {lo:.6g} > upper {hi:.6g} at {prob.manifold.format_point(p)}",
                    lineno,
                    1,
                    source,
                )


REGISTRY: dict[str, str] = {
    "mivop3": """\
# two interval objectives, five constraints on the log-orthant
manifold logorthant 2
box 0.5:2, 0.5:2
objective phi1 lower=ln(p1) + 3 upper=ln(p1) + 5
objective phi2 lower=p1^2 + p2^2 + 2 upper=p1^2 + p2^2 + 7
constraint psi1 ln(p1) + sqrt(p2) - 1
constraint psi2 -ln(p1)
constraint psi3 p1 + p2 - 2
constraint psi4 p1^2*p2 - 7
constraint psi5 -ln(p2)
candidate (1, 1)
certificate theorem=T32a lamL=1,1 lamU=1,1 mu=1,7,0,0,4.5
""",
    "mivop4": """\
# pseudo-convex objectives; phi1 is not LU-convex
manifold logorthant 2
box 0.5:2, 0.5:2
objective phi1 lower=(ln(p1)^2 + ln(p2)^2)/(1 + ln(p1)^2 + ln(p2)^2) upper=(ln(p1)^2 + ln(p2)^2)/(1 + ln(p1)^2 + ln(p2)^2) + 1
objective phi2 lower=ln(p1)^2 + p2 upper=ln(p1)^2 + p2 + 1
constraint psi1 ln(p1)^2 + ln(p2)^2 - 1
constraint psi2 p1*ln(p2)^2 + p2*ln(p1)^2 - 3
constraint psi3 1/p1 + ln(p2)^2 - 1
constraint psi4 p1^2 + p2^2 - 2
constraint psi5 ln(p1)^2 + 1/p2 - 1
candidate (1, 1)
certificate theorem=T34a lamL=1,1 lamU=1,1 muL=0,0,2,1,3 muU=0,0,2,1,3
pair (1, 1) (exp(2), exp(2))
""",
    "mivop5": """\
# 2x2 SPD cone; every function factors through ln det
manifold spd 2
box 0.8:1.6, 0.8:1.6, -0.2:0.2
objective phi1 lower=ldet upper=ldet + 1
objective phi2 lower=ldet^2 upper=ldet^2 + 1
constraint psi1 1/(1 + ldet)^2 - 1
constraint psi2 -ldet - 3
constraint psi3 sqrt(3 + ldet^2) - sqrt(3)
candidate sym[1, 0, 1]
certificate theorem=T41 lam=2,1 mu=1,0,1
""",
    "hderiv_counterexample": """\
# (1 - p^3) * [-1, 4]: gH-differentiable at 0 with derivative [0, 0]
manifold euclidean 1
box -1.5:1.5
objective phi lower=(3*(1 - p1^3) - 5*abs(1 - p1^3))/2 upper=(3*(1 - p1^3) + 5*abs(1 - p1^3))/2
candidate (0)
""",
    "relaxed_mivop3": """\
# mivop3 without psi2 and psi5: (1, 1) is no longer Pareto optimal
manifold logorthant 2
box 0.5:2, 0.5:2
objective phi1 lower=ln(p1) + 3 upper=ln(p1) + 5
objective phi2 lower=p1^2 + p2^2 + 2 upper=p1^2 + p2^2 + 7
constraint psi1 ln(p1) + sqrt(p2) - 1
constraint psi3 p1 + p2 - 2
constraint psi4 p1^2*p2 - 7
candidate (1, 1)
certificate theorem=T32a lamL=1,1 lamU=1,1 mu=1,0,0
""",
}


def registry_names() -> list[str]:
    return sorted(REGISTRY)


def load_problem(name_or_path: str) -> ProblemSpec:
    """Load a registry problem by name or a problem file by path."""
    if name_or_path in REGISTRY:
        return parse_problem(REGISTRY[name_or_path], name_or_path, f"<registry:{name_or_path}>")
    path = Path(name_or_path)
    if not path.is_file():
        raise ProblemFileError(
            f"no such problem file or registry name (known: {', '.join(registry_names())})", source=name_or_path
        )
    return parse_problem(path.read_text(), path.stem, str(path))
