"""Adaptive 1D quadrature.

Composite 16-point Gauss-Legendre with interval bisection, the default
integrator for all smooth profile integrals (relative tolerance 1e-9).
Integrands with known kinks (truncation radii, cutoff edges) should be split
by the caller via `breakpoints`; adaptivity then mops up the rest.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_legendre

_GL_NODES, _GL_WEIGHTS = roots_legendre(16)

DEFAULT_REL_TOL = 1e-9


def _gl16(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _GL_NODES
    return half * float(np.dot(_GL_WEIGHTS, f(x)))


def adaptive_quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    breakpoints: Sequence[float] = (),
    max_depth: int = 40,
) -> float:
    """Integrate a vectorized callable on [a, b] to the requested tolerance."""
    if a == b:
        return 0.0
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    total = 0.0
    scale = max(abs(_gl16(f, a, b)), 1e-300)
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += _adaptive_panel(f, lo, hi, rel_tol, scale, max_depth)
    return total


def _adaptive_panel(f, a, b, rel_tol, scale, depth) -> float:
    whole = _gl16(f, a, b)
    mid = 0.5 * (a + b)
    left = _gl16(f, a, mid)
    right = _gl16(f, mid, b)
    refined = left + right
    if depth <= 0 or abs(refined - whole) <= rel_tol * max(abs(refined), scale):
        return refined
    return _adaptive_panel(f, a, mid, rel_tol, scale, depth - 1) + _adaptive_panel(
        f, mid, b, rel_tol, scale, depth - 1
    )


def fixed_time_grid(panels: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic composite GL16 nodes/weights on [0, 1].

    Used for time integrals inside the bound engine where every route must
    see the same nodes (so that derived identities hold to round-off, not
    just to quadrature tolerance).
    """
    nodes = []
    weights = []
    for p in range(panels):
        lo = p / panels
        hi = (p + 1) / panels
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        nodes.append(mid + half * _GL_NODES)
        weights.append(half * _GL_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)
