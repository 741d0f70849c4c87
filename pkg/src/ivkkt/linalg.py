"""Small dense symmetric eigen-solver and spectral matrix functions."""

from __future__ import annotations

import math

import numpy as np

MAX_SWEEPS = 50
OFF_TOL = 1e-12
SYM_TOL = 1e-12


class NotSymmetricError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


def _check_symmetric(s: np.ndarray) -> np.ndarray:
    a = np.asarray(s, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if np.max(np.abs(a - a.T), initial=0.0) > SYM_TOL * scale:
        raise NotSymmetricError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def _rotation_tangent(theta: float) -> float:
    """Smaller root of ``t^2 + 2 theta t - 1 = 0``; avoids overflow for huge ``theta``."""
    if abs(theta) > 1e150:
        return 0.5 / theta
    return math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))


def sym_eig(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` in descending order and
    orthonormal eigenvectors in the columns of ``V``, so ``S = V diag(w) V^T``.
    """
    a = _check_symmetric(s).copy()
    n = a.shape[0]
    if n == 2:
        return _eig2(a)
    v = np.eye(n)
    norm = math.sqrt(float(np.sum(a * a))) or 1.0
    for _ in range(MAX_SWEEPS):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)) * 2.0)
        if off < OFF_TOL * max(1.0, norm):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = _rotation_tangent(theta)
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - sn * rq
                a[q, :] = sn * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _eig2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One Jacobi rotation diagonalizes a 2x2 matrix exactly."""
    a00, a01, a11 = float(a[0, 0]), float(a[0, 1]), float(a[1, 1])
    if a01 == 0.0:
        w0, w1, c, sn = a00, a11, 1.0, 0.0
    else:
        theta = (a11 - a00) / (2.0 * a01)
        t = _rotation_tangent(theta)
        c = 1.0 / math.sqrt(t * t + 1.0)
        sn = t * c
        w0, w1 = a00 - t * a01, a11 + t * a01
    if w0 >= w1:
        return np.array([w0, w1]), np.array([[c, sn], [-sn, c]])
    return np.array([w1, w0]), np.array([[sn, c], [c, -sn]])


def _apply(v: np.ndarray, fw: np.ndarray) -> np.ndarray:
    out = (v * fw) @ v.T
    return 0.5 * (out + out.T)


def mat_fn(s: np.ndarray, f: str, t: float | None = None) -> np.ndarray:
    """Spectral function ``V diag(f(w)) V^T`` of a symmetric matrix.

    ``f`` is one of ``"log"``, ``"exp"``, ``"sqrt"``, ``"inv_sqrt"`` or
    ``"pow"`` (with exponent ``t``). All but ``exp`` need a positive spectrum.
    """
    w, v = sym_eig(s)
    if f == "exp":
        return _apply(v, np.exp(w))
    if np.any(w <= 0.0):
        raise NotPositiveDefiniteError(f"mat_fn({f}) needs positive eigenvalues, got min {w.min():.3g}")
    if f == "log":
        return _apply(v, np.log(w))
    if f == "sqrt":
        return _apply(v, np.sqrt(w))
    if f == "inv_sqrt":
        return _apply(v, 1.0 / np.sqrt(w))
    if f == "pow":
        if t is None:
            raise ValueError("mat_fn('pow') needs an exponent")
        return _apply(v, w ** float(t))
    raise ValueError(f"unknown matrix function {f!r}")


def ldet(q: np.ndarray) -> float:
    """``ln det Q`` as the sum of log-eigenvalues of a PD matrix."""
    w, _ = sym_eig(q)
    if np.any(w <= 0.0):
        raise NotPositiveDefiniteError("ldet needs a positive definite matrix")
    return float(np.sum(np.log(w)))
