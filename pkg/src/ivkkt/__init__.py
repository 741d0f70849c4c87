"""KKT certificates for multi-objective interval-valued optimization on Hadamard manifolds."""

from .calculus import IntervalFn, ScalarFn, dir_deriv, gh_dir_deriv, weak_dir_deriv
from .interval import Interval, gh_diff, hausdorff, leq_cw, leq_lu, lt_cw, lt_lu
from .kkt import Certificate, Multipliers, ProbeSet, Verdict, search_multipliers, verify
from .manifold import Euclidean, LogOrthant, SpdCone, make_manifold
from .oracle import GridSpec, classify
from .problem import ProblemSpec, load_problem

__all__ = [
    "Certificate",
    "Euclidean",
    "GridSpec",
    "Interval",
    "IntervalFn",
    "LogOrthant",
    "Multipliers",
    "ProbeSet",
    "ProblemSpec",
    "ScalarFn",
    "SpdCone",
    "Verdict",
    "classify",
    "dir_deriv",
    "gh_diff",
    "gh_dir_deriv",
    "hausdorff",
    "leq_cw",
    "leq_lu",
    "load_problem",
    "lt_cw",
    "lt_lu",
    "make_manifold",
    "search_multipliers",
    "verify",
    "weak_dir_deriv",
]
