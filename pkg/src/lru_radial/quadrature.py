"""Quadrature for exponentially weighted integrals on the half line.

The integrands met here are mixtures of exponentials whose decay rates
spread from the weight rate ``rate`` up to some ``fastest`` rate.  A single
scaled Gauss-Laguerre rule loses accuracy once ``fastest / rate`` exceeds
about ten, so the half line is cut into geometrically growing panels
(Gauss-Legendre on each) and only the far tail, where the fast components
are gone, uses Gauss-Laguerre against ``exp(-rate t)``.  The panel order is
doubled until two successive estimates agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ModelError, QuadratureNotConverged

#: the Laguerre tail starts where exp(-rate t) has fallen to exp(-TAIL_START)
TAIL_START = 24.0
TAIL_ORDER = 48


@dataclass(frozen=True)
class QuadratureConfig:
    t_order: int = 32
    y_order: int = 32
    refine_limit: int = 6
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.t_order < 16 or self.y_order < 16:
            raise ModelError("quadrature orders must be at least 16", "quad")
        if self.refine_limit < 1:
            raise ModelError("refine_limit must be at least 1", "quad")
        if not self.tolerance > 0:
            raise ModelError("tolerance must be positive", "quad")


@lru_cache(maxsize=64)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


@lru_cache(maxsize=8)
def _laguerre(order: int):
    return np.polynomial.laguerre.laggauss(order)


def unit_interval_rule(order: int):
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = _legendre(order)
    return 0.5 * (x + 1.0), 0.5 * w


def half_line_rule(rate: float, fastest: float, order: int):
    """Nodes ``t`` and weights ``w`` with ``sum w f(t) ~ int_0^inf exp(-rate t) f(t) dt``."""
    if not 0 < rate <= fastest:
        raise ValueError(f"need 0 < rate <= fastest, got {rate!r}, {fastest!r}")
    end = TAIL_START / rate
    edges = [0.0]
    width = min(1.0 / fastest, end)
    while edges[-1] < end:
        edges.append(edges[-1] + width)
        width = edges[-1]
    x, w = _legendre(order)
    lo = np.asarray(edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    t = lo + half * (x + 1.0)
    wt = half * w * np.exp(-rate * t)
    xl, wl = _laguerre(TAIL_ORDER)
    tail = edges[-1]
    t_tail = tail + xl / rate
    w_tail = wl * math.exp(-rate * tail) / rate
    return np.concatenate([t.ravel(), t_tail]), np.concatenate([wt.ravel(), w_tail])


def integrate_half_line(f: Callable[[np.ndarray], np.ndarray], rate: float, fastest: float,
                        cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """``int_0^inf exp(-rate t) f(t) dt`` with order doubling until converged.

    ``f`` receives a 1-D array of nodes and must return values of the same
    shape.  Convergence means two successive estimates differ by at most
    ``cfg.tolerance`` relative to the newer one.
    """
    order = cfg.t_order
    t, w = half_line_rule(rate, fastest, order)
    prev = float(np.dot(w, f(t)))
    for _ in range(cfg.refine_limit):
        order *= 2
        t, w = half_line_rule(rate, fastest, order)
        cur = float(np.dot(w, f(t)))
        if abs(cur - prev) <= cfg.tolerance * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"estimates still differ by {abs(cur - prev):.3e} at order {order}"
    )
