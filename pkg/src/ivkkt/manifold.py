"""Geometry of the three Hadamard manifolds used by the library.

* ``Euclidean(n)``: flat R^n.
* ``LogOrthant(n)``: the positive orthant with metric ``g_ij = delta_ij / (p_i p_j)``.
* ``SpdCone(n)``: symmetric positive definite matrices with the affine-invariant
  metric ``g_P(X, Y) = tr(P^-1 X P^-1 Y)``.

Points and tangents are numpy arrays: 1-D vectors for the first two manifolds,
symmetric ``n x n`` matrices for the cone. Points returned by this module are
read-only arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import NotPositiveDefiniteError, mat_fn, sym_eig

ORTHANT_MARGIN = 1e-12
PD_RATIO = 1e-10
SPD_MAX_ORDER = 8


class InvalidPointError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Manifold:
    n: int

    kind = "abstract"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("manifold dimension must be >= 1")

    # subclasses implement the geometry
    def check_point(self, p) -> np.ndarray:
        raise NotImplementedError

    def check_tangent(self, w) -> np.ndarray:
        raise NotImplementedError

    def exp(self, p, w) -> np.ndarray:
        raise NotImplementedError

    def log(self, p, q) -> np.ndarray:
        raise NotImplementedError

    def inner(self, p, u, v) -> float:
        raise NotImplementedError

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def features(self, p) -> dict[str, float]:
        raise NotImplementedError

    @property
    def feature_names(self) -> tuple[str, ...]:
        raise NotImplementedError

    @property
    def param_dim(self) -> int:
        """Number of box coordinates that parameterize a point."""
        return self.n

    def from_params(self, x) -> np.ndarray:
        return self.check_point(x)

    def to_params(self, p) -> np.ndarray:
        return np.asarray(p, dtype=float).ravel()

    def geodesic(self, p, q, t: float) -> np.ndarray:
        return self.exp(p, t * self.log(p, q))

    def norm(self, p, w) -> float:
        return math.sqrt(max(self.inner(p, w, w), 0.0))

    def zero_tangent(self, p) -> np.ndarray:
        return np.zeros_like(np.asarray(p, dtype=float))

    def same_point(self, p, q) -> bool:
        return bool(np.array_equal(np.asarray(p), np.asarray(q)))

    def format_point(self, p) -> str:
        return "(" + ", ".join(f"{x:.10g}" for x in np.asarray(p, dtype=float)) + ")"

    def __str__(self) -> str:
        return f"{self.kind} {self.n}"


class _VectorManifold(Manifold):
    def check_tangent(self, w) -> np.ndarray:
        a = np.asarray(w, dtype=float)
        if a.shape != (self.n,):
            raise ValueError(f"tangent must have shape ({self.n},), got {a.shape}")
        return a

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"p{i + 1}" for i in range(self.n))

    def features(self, p) -> dict[str, float]:
        return {f"p{i + 1}": float(x) for i, x in enumerate(p)}

    def batch_features(self, params: np.ndarray) -> dict[str, np.ndarray]:
        return {f"p{i + 1}": params[:, i] for i in range(self.n)}


@dataclass(frozen=True)
class Euclidean(_VectorManifold):
    kind = "euclidean"

    def check_point(self, p) -> np.ndarray:
        a = np.asarray(p, dtype=float)
        if a.shape != (self.n,):
            raise InvalidPointError(f"point must have shape ({self.n},), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidPointError("point coordinates must be finite")
        return _frozen(a)

    def exp(self, p, w) -> np.ndarray:
        return _frozen(self.check_point(p) + self.check_tangent(w))

    def log(self, p, q) -> np.ndarray:
        return self.check_point(q) - self.check_point(p)

    def inner(self, p, u, v) -> float:
        return float(np.dot(self.check_tangent(u), self.check_tangent(v)))

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(self.log(p, q)))

    def batch_valid(self, params: np.ndarray) -> np.ndarray:
        return np.all(np.isfinite(params), axis=1)


@dataclass(frozen=True)
class LogOrthant(_VectorManifold):
    kind = "logorthant"

    def check_point(self, p) -> np.ndarray:
        a = np.asarray(p, dtype=float)
        if a.shape != (self.n,):
            raise InvalidPointError(f"point must have shape ({self.n},), got {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a <= ORTHANT_MARGIN):
            raise InvalidPointError(f"log-orthant coordinates must exceed {ORTHANT_MARGIN:g}: {a}")
        return _frozen(a)

    def exp(self, p, w) -> np.ndarray:
        p = self.check_point(p)
        w = self.check_tangent(w)
        return self.check_point(p * np.exp(w / p))

    def log(self, p, q) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        return p * np.log(q / p)

    def inner(self, p, u, v) -> float:
        p = self.check_point(p)
        return float(np.sum(self.check_tangent(u) * self.check_tangent(v) / (p * p)))

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(np.log(self.check_point(p) / self.check_point(q))))

    def geodesic(self, p, q, t: float) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        return self.check_point(p * np.exp(t * np.log(q / p)))

    def batch_valid(self, params: np.ndarray) -> np.ndarray:
        return np.all(np.isfinite(params) & (params > ORTHANT_MARGIN), axis=1)


@lru_cache(maxsize=256)
def _spd_roots(key: bytes, n: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.frombuffer(key, dtype=float).reshape(n, n)
    return mat_fn(p, "sqrt"), mat_fn(p, "inv_sqrt")


@dataclass(frozen=True)
class SpdCone(Manifold):
    kind = "spd"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.n > SPD_MAX_ORDER:
            raise ValueError(f"SPD cone limited to order <= {SPD_MAX_ORDER}")

    def check_point(self, p) -> np.ndarray:
        a = np.asarray(p, dtype=float)
        if a.shape != (self.n, self.n):
            raise InvalidPointError(f"SPD point must have shape ({self.n}, {self.n}), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidPointError("SPD point entries must be finite")
        if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
            raise InvalidPointError("SPD point is not symmetric")
        a = 0.5 * (a + a.T)
        w, _ = sym_eig(a)
        if w[-1] <= PD_RATIO * w[0] or w[0] <= 0.0:
            raise InvalidPointError(f"matrix is not positive definite (eigenvalues {w})")
        return _frozen(a)

    def check_tangent(self, w) -> np.ndarray:
        a = np.asarray(w, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"SPD tangent must have shape ({self.n}, {self.n}), got {a.shape}")
        if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
            raise ValueError("SPD tangent must be symmetric")
        return 0.5 * (a + a.T)

    def _roots(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _spd_roots(np.ascontiguousarray(p).tobytes(), self.n)

    def exp(self, p, w) -> np.ndarray:
        p = self.check_point(p)
        w = self.check_tangent(w)
        s, si = self._roots(p)
        out = s @ mat_fn(si @ w @ si, "exp") @ s
        return self.check_point(0.5 * (out + out.T))

    def log(self, p, q) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        s, si = self._roots(p)
        out = s @ mat_fn(si @ q @ si, "log") @ s
        return 0.5 * (out + out.T)

    def geodesic(self, p, q, t: float) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        s, si = self._roots(p)
        out = s @ mat_fn(si @ q @ si, "pow", t) @ s
        return self.check_point(0.5 * (out + out.T))

    def inner(self, p, u, v) -> float:
        p = self.check_point(p)
        pinv = np.linalg.inv(p)
        return float(np.trace(pinv @ self.check_tangent(u) @ pinv @ self.check_tangent(v)))

    def distance(self, p, q) -> float:
        p = self.check_point(p)
        q = self.check_point(q)
        _, si = self._roots(p)
        return float(np.linalg.norm(mat_fn(si @ q @ si, "log"), "fro"))

    @property
    def feature_names(self) -> tuple[str, ...]:
        return ("ldet", "tr")

    def features(self, p) -> dict[str, float]:
        w, _ = sym_eig(p)
        if np.any(w <= 0.0):
            raise NotPositiveDefiniteError("features need a PD matrix")
        return {"ldet": float(np.sum(np.log(w))), "tr": float(np.trace(p))}

    @property
    def param_dim(self) -> int:
        return self.n * (self.n + 1) // 2

    def _param_index(self) -> list[tuple[int, int]]:
        # diagonal first, then the strict upper triangle row by row
        idx = [(i, i) for i in range(self.n)]
        idx += [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        return idx

    def params_to_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.param_dim,):
            raise InvalidPointError(f"SPD parameters must have length {self.param_dim}")
        m = np.zeros((self.n, self.n))
        for k, (i, j) in enumerate(self._param_index()):
            m[i, j] = m[j, i] = x[k]
        return m

    def from_params(self, x) -> np.ndarray:
        return self.check_point(self.params_to_matrix(x))

    def to_params(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.array([p[i, j] for i, j in self._param_index()])

    def batch_matrices(self, params: np.ndarray) -> np.ndarray:
        m = np.zeros((params.shape[0], self.n, self.n))
        for k, (i, j) in enumerate(self._param_index()):
            m[:, i, j] = params[:, k]
            m[:, j, i] = params[:, k]
        return m

    def batch_valid(self, params: np.ndarray) -> np.ndarray:
        w = np.linalg.eigvalsh(self.batch_matrices(params))
        return (w[:, 0] > 0.0) & (w[:, 0] > PD_RATIO * w[:, -1])

    def batch_features(self, params: np.ndarray) -> dict[str, np.ndarray]:
        m = self.batch_matrices(params)
        sign, logdet = np.linalg.slogdet(m)
        logdet = np.where(sign > 0, logdet, np.nan)
        return {"ldet": logdet, "tr": np.trace(m, axis1=1, axis2=2)}

    def format_point(self, p) -> str:
        p = np.asarray(p, dtype=float)
        upper = [p[i, j] for i in range(self.n) for j in range(i, self.n)]
        return "sym[" + ", ".join(f"{x:.10g}" for x in upper) + "]"


def make_manifold(kind: str, n: int) -> Manifold:
    table = {"euclidean": Euclidean, "logorthant": LogOrthant, "spd": SpdCone}
    try:
        cls = table[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown manifold kind {kind!r}; expected one of {sorted(table)}") from None
    return cls(n)


def exp_map(m: Manifold, p, w) -> np.ndarray:
    return m.exp(p, w)


def log_map(m: Manifold, p, q) -> np.ndarray:
    return m.log(p, q)


def geodesic(m: Manifold, p, q, t: float) -> np.ndarray:
    return m.geodesic(p, q, t)


def distance(m: Manifold, p, q) -> float:
    return m.distance(p, q)


def inner(m: Manifold, p, u, v) -> float:
    return m.inner(p, u, v)


def parse_point(m: Manifold, text: str, evaluate=float) -> np.ndarray:
    """Parse ``(a, b, ...)`` or ``sym[a11, a12, a22, ...]`` for manifold ``m``.

    ``evaluate`` converts each entry; callers may pass an expression evaluator
    to allow constants such as ``exp(2)``.
    """
    s = text.strip()
    if s.startswith("sym[") and s.endswith("]"):
        if not isinstance(m, SpdCone):
            raise InvalidPointError("sym[...] literals are only valid on the SPD cone")
        vals = [evaluate(x) for x in _split_top(s[4:-1])]
        need = m.n * (m.n + 1) // 2
        if len(vals) != need:
            raise InvalidPointError(f"sym[...] needs {need} upper-triangle entries, got {len(vals)}")
        a = np.zeros((m.n, m.n))
        k = 0
        for i in range(m.n):
            for j in range(i, m.n):
                a[i, j] = a[j, i] = vals[k]
                k += 1
        return m.check_point(a)
    if s.startswith("(") and s.endswith(")"):
        if isinstance(m, SpdCone):
            raise InvalidPointError("SPD points are written as sym[...]")
        return m.check_point([evaluate(x) for x in _split_top(s[1:-1])])
    raise InvalidPointError(f"cannot parse point literal {text!r}")


def _split_top(body: str) -> list[str]:
    """Split on commas that are not nested inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]
