"""Deterministic numerical integration on boxes.

Composite tensor-product Gauss-Legendre quadrature, grid L^p norms and
nested central finite differences. Every other module builds on these
three primitives.

Conventions
-----------
Multivariate fields are callables ``f(pts)`` where ``pts`` has shape
``(npoints, dim)`` and the return value has shape ``(npoints,)``.
Univariate helpers (``integrate_1d`` and friends) take plain 1-d arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Box",
    "QuadRule",
    "integrate",
    "integrate_1d",
    "lp_norm",
    "lp_norm_1d",
    "partial_fd",
    "partial_fd_field",
]

# Evaluation batches are chunked so dense tensor grids never materialize
# more than this many points' worth of work arrays at once.
_CHUNK = 1 << 19

MAX_FD_ORDER = 6


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower_1, upper_1] x ... x [lower_d, upper_d]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise ValueError("lower and upper must have the same length")
        if len(lo) < 1:
            raise ValueError("box dimension must be >= 1")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not a < b:
                raise ValueError(f"box axis {i}: lower={a} must be < upper={b}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def intersect(self, other: "Box") -> "Box | None":
        """Intersection with another box, or None if it has empty interior."""
        lo = np.maximum(self.lower, other.lower)
        hi = np.minimum(self.upper, other.upper)
        if np.any(lo >= hi):
            return None
        return Box(tuple(lo), tuple(hi))


@dataclass(frozen=True)
class QuadRule:
    """Composite Gauss-Legendre rule: per-axis panel counts, shared node count.

    ``nodes_per_panel`` Gauss-Legendre nodes are placed inside each of
    ``panels_per_axis[i]`` equal-width panels along axis ``i``.  The rule is
    exact on polynomials of per-axis degree ``<= 2*nodes_per_panel - 1``.
    """

    nodes_per_panel: int = 8
    panels_per_axis: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be >= 2")
        panels = tuple(int(p) for p in self.panels_per_axis)
        object.__setattr__(self, "panels_per_axis", panels)
        if any(p < 1 for p in panels):
            raise ValueError("panel counts must be positive")
        total = self.nodes_per_panel ** len(panels)
        for p in panels:
            total *= p
        if total > 1 << 27:
            raise ValueError(f"rule would generate {total} nodes; refusing")

    @staticmethod
    def for_box(box: Box, feature_scale: float, nodes_per_panel: int = 8) -> "QuadRule":
        """Rule whose panel width is at most half the caller's feature scale."""
        if feature_scale <= 0:
            raise ValueError("feature_scale must be positive")
        widths = box.widths()
        panels = tuple(int(np.ceil(w / (0.5 * feature_scale))) for w in widths)
        return QuadRule(nodes_per_panel, panels)


@lru_cache(maxsize=64)
def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _axis_nodes(lo: float, hi: float, panels: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL nodes and weights on [lo, hi]."""
    x, w = _gauss_nodes(nodes)
    width = (hi - lo) / panels
    edges = lo + width * np.arange(panels)
    pts = (edges[:, None] + 0.5 * width * (x[None, :] + 1.0)).ravel()
    wts = np.tile(0.5 * width * w, panels)
    return pts, wts


def grid_nodes(box: Box, rule: QuadRule) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-axis composite GL node and weight vectors for a box."""
    panels = rule.panels_per_axis
    if len(panels) == 1 and box.dim > 1:
        panels = panels * box.dim
    if len(panels) != box.dim:
        raise ValueError(
            f"rule has {len(panels)} axes but box has {box.dim}"
        )
    nodes, weights = [], []
    for lo, hi, p in zip(box.lower, box.upper, panels):
        x, w = _axis_nodes(lo, hi, p, rule.nodes_per_panel)
        nodes.append(x)
        weights.append(w)
    return nodes, weights


def _check_finite(vals: np.ndarray, pts: np.ndarray) -> None:
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise FloatingPointError(
            f"integrand returned non-finite value {vals[idx]} at node {pts[idx].tolist()}"
        )


def integrate(f: Callable, box: Box, rule: QuadRule) -> float:
    """Composite tensor Gauss-Legendre integral of ``f`` over ``box``.

    Raises ``FloatingPointError`` naming the offending node if ``f``
    returns a non-finite value anywhere.
    """
    nodes, weights = grid_nodes(box, rule)
    return _tensor_reduce(f, nodes, weights, power=None)


def lp_norm(f: Callable, box: Box, p: float, rule: QuadRule) -> float:
    """``(integral of |f|^p over box)^(1/p)``."""
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    nodes, weights = grid_nodes(box, rule)
    val = _tensor_reduce(f, nodes, weights, power=p)
    return float(val ** (1.0 / p))


def _tensor_reduce(f, nodes: Sequence[np.ndarray], weights: Sequence[np.ndarray],
                   power: float | None) -> float:
    """Sum ``w * f`` (or ``w * |f|^p``) over the tensor grid, in chunks."""
    mesh = np.meshgrid(*nodes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = weights[0]
    for w in weights[1:]:
        wmesh = np.multiply.outer(wmesh, w)
    wflat = wmesh.ravel()
    total = 0.0
    for start in range(0, pts.shape[0], _CHUNK):
        chunk = pts[start:start + _CHUNK]
        vals = np.asarray(f(chunk), dtype=float)
        if vals.shape != (chunk.shape[0],):
            raise ValueError(
                f"field returned shape {vals.shape}, expected ({chunk.shape[0]},)"
            )
        _check_finite(vals, chunk)
        if power is not None:
            vals = np.abs(vals) ** power
        total += float(wflat[start:start + _CHUNK] @ vals)
    return total


def integrate_1d(f: Callable, lo: float, hi: float, panels: int = 32,
                 nodes: int = 8) -> float:
    """Composite GL integral of a univariate function (1-d array in, out)."""
    x, w = _axis_nodes(lo, hi, panels, nodes)
    vals = np.asarray(f(x), dtype=float)
    _check_finite(vals, x[:, None])
    return float(w @ vals)


def lp_norm_1d(f: Callable, lo: float, hi: float, p: float, panels: int = 32,
               nodes: int = 8) -> float:
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    x, w = _axis_nodes(lo, hi, panels, nodes)
    vals = np.abs(np.asarray(f(x), dtype=float)) ** p
    return float(w @ vals) ** (1.0 / p)


def _axis_stencil(order: int, h: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Offsets, integer coefficients and scale of the nested central difference.

    Nesting the two-point central difference ``order`` times along one axis
    expands to the binomial stencil below; the expansion is the nested
    operator written out, not a wider one-shot stencil.  Coefficients stay
    exact integers (so constants cancel exactly) and the ``(2h)^order``
    scale is divided out once at the end.
    """
    j = np.arange(order + 1)
    offsets = (order - 2 * j) * h
    coeffs = ((-1.0) ** j) * np.array([comb(order, int(k)) for k in j])
    return offsets, coeffs, (2.0 * h) ** order


def _fd_stencil(alpha: Sequence[int], steps: Sequence[float]):
    offsets = np.zeros((1, len(alpha)))
    coeffs = np.ones(1)
    scale = 1.0
    for axis, order in enumerate(alpha):
        if order == 0:
            continue
        off, cf, sc = _axis_stencil(order, steps[axis])
        new_offsets = np.repeat(offsets, len(off), axis=0)
        new_offsets[:, axis] += np.tile(off, offsets.shape[0])
        coeffs = (coeffs[:, None] * cf[None, :]).ravel()
        offsets = new_offsets
        scale *= sc
    return offsets, coeffs, scale


def _fd_apply(f: Callable, pts: np.ndarray, alpha: Sequence[int],
              steps: np.ndarray) -> np.ndarray:
    offsets, coeffs, scale = _fd_stencil(alpha, steps)
    acc = np.zeros(pts.shape[0])
    for off, cf in zip(offsets, coeffs):
        acc += cf * np.asarray(f(pts + off[None, :]), dtype=float)
    return acc / scale


def _default_steps(point: np.ndarray, step: float | None) -> np.ndarray:
    if step is not None:
        if step <= 0:
            raise ValueError("step must be positive")
        return np.full(point.shape, float(step))
    return 1e-3 * np.maximum(1.0, np.abs(point))


def partial_fd(f: Callable, point: Sequence[float], alpha: Sequence[int],
               step: float | None = None) -> float:
    """Nested central-difference partial derivative of ``f`` at ``point``.

    Axes are differenced one at a time in increasing index order; the
    default step is ``1e-3 * max(1, |coordinate|)`` per axis.
    """
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be non-negative")
    if sum(alpha) > MAX_FD_ORDER:
        raise ValueError(
            f"finite differences unsupported for |alpha|={sum(alpha)} > {MAX_FD_ORDER}"
        )
    point = np.asarray(point, dtype=float)
    steps = _default_steps(point, step)
    return float(_fd_apply(f, point[None, :], alpha, steps)[0])


def partial_fd_field(f: Callable, alpha: Sequence[int],
                     step: float | None = None) -> Callable:
    """Field computing ``partial_fd`` at every row of a batch.

    With an explicit ``step`` the stencil is shared by all rows and the
    evaluation is batched; with the coordinate-scaled default each row
    gets its own step, so rows are evaluated one at a time.
    """
    alpha = tuple(int(a) for a in alpha)
    if sum(alpha) > MAX_FD_ORDER:
        raise ValueError(
            f"finite differences unsupported for |alpha|={sum(alpha)} > {MAX_FD_ORDER}"
        )

    if step is None:
        def rowwise(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, dtype=float)
            out = np.empty(pts.shape[0])
            for i, row in enumerate(pts):
                out[i] = partial_fd(f, row, alpha, step=None)
            return out

        return rowwise

    def batched(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        steps = np.full(pts.shape[1], float(step))
        return _fd_apply(f, pts, alpha, steps)

    return batched
