"""Seeded low-discrepancy sampling of manifold points inside a coordinate box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import qmc

from .manifold import InvalidPointError, Manifold

DEFAULT_SEED = 42


@dataclass(frozen=True)
class Box:
    """Per-coordinate ranges ``[(lo1, hi1), ...]`` in manifold parameters."""

    ranges: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        for lo, hi in ranges:
            if not lo < hi:
                raise ValueError(f"box range needs lo < hi, got {lo}:{hi}")
        object.__setattr__(self, "ranges", ranges)

    @property
    def dim(self) -> int:
        return len(self.ranges)

    @property
    def lo(self) -> np.ndarray:
        return np.array([r[0] for r in self.ranges])

    @property
    def hi(self) -> np.ndarray:
        return np.array([r[1] for r in self.ranges])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def __str__(self) -> str:
        return ",".join(f"{lo:g}:{hi:g}" for lo, hi in self.ranges)

    @classmethod
    def parse(cls, text: str) -> Box:
        """Parse ``lo1:hi1,lo2:hi2,...``."""
        ranges = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            bits = part.split(":")
            if len(bits) != 2:
                raise ValueError(f"box range must look like lo:hi, got {part!r}")
            ranges.append((float(bits[0]), float(bits[1])))
        if not ranges:
            raise ValueError("empty box")
        return cls(tuple(ranges))


def check_box(manifold: Manifold, box: Box) -> None:
    if box.dim != manifold.param_dim:
        raise ValueError(f"box has {box.dim} ranges but {manifold} needs {manifold.param_dim}")


def sample_points(manifold: Manifold, box: Box, n: int, seed: int = DEFAULT_SEED) -> list[np.ndarray]:
    """``n`` valid manifold points from a scrambled Halton sequence over ``box``.

    Parameter vectors that do not give a valid point (e.g. an indefinite
    matrix) are skipped; the draw continues until ``n`` points are found or a
    budget of ``50 n`` candidates is spent.
    """
    check_box(manifold, box)
    if n <= 0:
        return []
    sampler = qmc.Halton(d=box.dim, scramble=True, seed=seed)
    out: list[np.ndarray] = []
    budget = 50 * n
    drawn = 0
    while len(out) < n and drawn < budget:
        batch = qmc.scale(sampler.random(max(n, 16)), box.lo, box.hi)
        drawn += len(batch)
        for x in batch:
            try:
                out.append(manifold.from_params(x))
            except InvalidPointError:
                continue
            if len(out) == n:
                break
    return out


def alpha_grid(n_alphas: int) -> np.ndarray:
    """Interior interpolation weights ``k / (n + 1)``, ``k = 1..n``."""
    return np.arange(1, n_alphas + 1) / (n_alphas + 1)


@dataclass(frozen=True)
class PairSample:
    """Point pairs with the geodesic points ``gamma(alpha)`` between them."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    alphas: tuple[float, ...]
    midpoints: tuple[tuple[np.ndarray, ...], ...]
    pair_features: tuple[tuple[dict, dict], ...] | None = None
    mid_features: tuple[tuple[dict, ...], ...] | None = None


def sample_pairs(
    manifold: Manifold,
    box: Box,
    n_pairs: int = 200,
    n_alphas: int = 9,
    seed: int = DEFAULT_SEED,
    anchor=None,
    extra: Iterable[tuple[object, object]] = (),
) -> PairSample:
    """Pairs ``(p, q)`` for convexity probes.

    Explicit ``extra`` pairs come first. With ``anchor`` every sampled pair
    starts at the anchor; otherwise both ends are sampled.
    """
    alphas = tuple(float(a) for a in alpha_grid(n_alphas))
    pairs: list[tuple[np.ndarray, np.ndarray]] = [
        (manifold.check_point(p), manifold.check_point(q)) for p, q in extra
    ]
    if anchor is not None:
        a = manifold.check_point(anchor)
        pairs += [(a, q) for q in sample_points(manifold, box, n_pairs, seed)]
    else:
        pts = sample_points(manifold, box, 2 * n_pairs, seed)
        pairs += list(zip(pts[0::2], pts[1::2]))
    mids = tuple(tuple(manifold.geodesic(p, q, t) for t in alphas) for p, q in pairs)
    feats = manifold.features
    return PairSample(
        tuple(pairs),
        alphas,
        mids,
        tuple((feats(p), feats(q)) for p, q in pairs),
        tuple(tuple(feats(g) for g in row) for row in mids),
    )
