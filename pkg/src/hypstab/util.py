"""Deterministic sampling helpers shared across modules: low-discrepancy
direction sets on spheres and geometric ladders."""
from __future__ import annotations

import numpy as np

__all__ = ["unit_directions", "geometric_ladder"]

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def unit_directions(count: int, dim: int) -> np.ndarray:
    """Deterministic, roughly uniform set of unit vectors in R^dim.

    dim 1 alternates signs, dim 2 walks the circle, dim 3 uses a Fibonacci
    sphere; higher dimensions use a seeded generator (still deterministic).
    """
    if count < 1:
        raise ValueError("count must be positive")
    if dim == 1:
        return np.array([[1.0] if i % 2 == 0 else [-1.0] for i in range(count)])
    if dim == 2:
        # offset avoids the axes, which are often degenerate directions
        angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    if dim == 3:
        i = np.arange(count)
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = 2.0 * np.pi * i / _GOLDEN
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(714025 + 31 * dim + count)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def geometric_ladder(top: float, bottom: float, per_decade: int = 2) -> np.ndarray:
    """Geometric sequence from ``top`` down to ``bottom`` (inclusive ends)."""
    if not (top > bottom > 0):
        raise ValueError("need top > bottom > 0")
    decades = np.log10(top / bottom)
    n = max(2, int(np.ceil(decades * per_decade)) + 1)
    return np.geomspace(top, bottom, n)
