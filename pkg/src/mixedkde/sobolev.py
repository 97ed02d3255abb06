"""Numerical Sobolev norms in three index-set variants.

The three norms differ only in which multi-indices enter the sum of
``L^p`` norms of partial derivatives:

* ``mixed``      : ``|alpha_1| <= s1`` and ``|alpha_2| <= s2``
* ``classical``  : ``|alpha| <= s1`` over all ``d1 + d2`` axes
* ``aniso``      : ``|alpha_1|/s1 + |alpha_2|/s2 <= 1``

The index-set enumeration is exposed separately so tests can pin the set
contents; the norms just sum ``lp_norm`` over it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import Box, QuadRule, lp_norm, partial_fd_field, MAX_FD_ORDER

__all__ = [
    "SmoothnessSpec",
    "DifferentiableField",
    "index_set",
    "mixed_norm",
    "classical_norm",
    "aniso_norm",
    "sobolev_norm",
    "ball_membership",
]

_VARIANTS = ("mixed", "classical", "aniso")


@dataclass(frozen=True)
class SmoothnessSpec:
    s1: int
    s2: int
    d1: int
    d2: int
    p: float
    variant: str = "mixed"

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}, got {self.variant!r}")
        if min(self.s1, self.s2, self.d1, self.d2) < 1:
            raise ValueError("s1, s2, d1, d2 must all be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")

    @property
    def dim(self) -> int:
        return self.d1 + self.d2


@dataclass(frozen=True)
class DifferentiableField:
    """Scalar field with its support box and (optionally) analytic partials.

    ``partial_factory(alpha)`` must return the field of the derivative for a
    full multi-index ``alpha`` over all ``d1 + d2`` axes.  Without it, nested
    central differences are used, which caps usable orders at six.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    support: Box
    partial_factory: Callable[[tuple[int, ...]], Callable] | None = None

    def partial_field(self, alpha: tuple[int, ...]) -> Callable:
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) == 0:
            return self.eval
        if self.partial_factory is not None:
            return self.partial_factory(alpha)
        if sum(alpha) > MAX_FD_ORDER:
            raise ValueError(
                f"no analytic partials and |alpha|={sum(alpha)} exceeds the "
                f"finite-difference limit {MAX_FD_ORDER}"
            )
        return partial_fd_field(self.eval, alpha, step=1e-3)


def _block_indices(dim: int, cap: int):
    return [a for a in itertools.product(range(cap + 1), repeat=dim)
            if sum(a) <= cap]


def index_set(spec: SmoothnessSpec) -> list[tuple[int, ...]]:
    """Full multi-indices (over all d1+d2 axes) entering the chosen norm."""
    if spec.variant == "classical":
        return _block_indices(spec.dim, spec.s1)
    out = []
    for a1 in _block_indices(spec.d1, spec.s1):
        for a2 in _block_indices(spec.d2, spec.s2):
            if spec.variant == "aniso":
                if sum(a1) / spec.s1 + sum(a2) / spec.s2 > 1.0 + 1e-12:
                    continue
            out.append(a1 + a2)
    return out


def sobolev_norm(f: DifferentiableField, spec: SmoothnessSpec, rule: QuadRule) -> float:
    """Sum of ``L^p`` norms of partials over the spec's index set."""
    if f.support.dim != spec.dim:
        raise ValueError(
            f"field support has dimension {f.support.dim}, spec wants {spec.dim}"
        )
    total = 0.0
    for alpha in index_set(spec):
        field = f.partial_field(alpha)
        total += lp_norm(field, f.support, spec.p, rule)
    return total


def mixed_norm(f: DifferentiableField, spec: SmoothnessSpec, rule: QuadRule) -> float:
    if spec.variant != "mixed":
        raise ValueError("mixed_norm requires variant='mixed'")
    return sobolev_norm(f, spec, rule)


def classical_norm(f: DifferentiableField, spec: SmoothnessSpec, rule: QuadRule) -> float:
    if spec.variant != "classical":
        raise ValueError("classical_norm requires variant='classical'")
    return sobolev_norm(f, spec, rule)


def aniso_norm(f: DifferentiableField, spec: SmoothnessSpec, rule: QuadRule) -> float:
    if spec.variant != "aniso":
        raise ValueError("aniso_norm requires variant='aniso'")
    return sobolev_norm(f, spec, rule)


def ball_membership(f: DifferentiableField, spec: SmoothnessSpec, r: float,
                    rule: QuadRule) -> dict:
    if r <= 0:
        raise ValueError("ball radius must be positive")
    norm = sobolev_norm(f, spec, rule)
    return {"member": bool(norm <= r), "norm": norm}
