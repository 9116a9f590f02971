"""Domain types: popularity vectors, model parameters and rays from uniform."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import (
    BadCapacity,
    BadExponent,
    BadLength,
    CapacityFull,
    MOutOfRange,
    NonPositiveEntry,
    SumOutOfTolerance,
    ThetaOutOfRange,
)

#: accepted deviation of the raw sum from one before renormalization
SUM_TOLERANCE = 1e-6


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PopularityVector:
    """A point of the open probability simplex (all entries > 0, sum 1).

    Build instances with :func:`validate_popularity` or :meth:`uniform`;
    the constructor itself does not check anything.
    """

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs))

    @classmethod
    def uniform(cls, n: int) -> "PopularityVector":
        if n < 2:
            raise BadLength(f"need at least 2 items, got {n}")
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return len(self.probs)

    def is_uniform(self, tol: float = 0.0) -> bool:
        return float(np.ptp(self.probs)) <= tol

    def __len__(self):
        return len(self.probs)

    def __eq__(self, other):
        if not isinstance(other, PopularityVector):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"PopularityVector({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True)
class ModelParams:
    """Item count ``n_items`` (N) and cache capacity ``capacity`` (C)."""

    n_items: int
    capacity: int

    def __post_init__(self):
        if self.n_items < 1:
            raise BadLength(f"n_items must be positive, got {self.n_items}", "n_items")
        if not 1 <= self.capacity <= self.n_items:
            raise BadCapacity(
                f"capacity must lie in [1, {self.n_items}], got {self.capacity}"
            )

    @property
    def residual_order(self) -> int:
        """Smallest residual-subset size L = N - C + 1."""
        return self.n_items - self.capacity + 1

    @property
    def is_full(self) -> bool:
        return self.capacity == self.n_items

    def require_partial(self) -> None:
        if self.is_full:
            raise CapacityFull(
                f"formula requires capacity < n_items (got C = N = {self.n_items})"
            )


@dataclass(frozen=True)
class RayPath:
    """Segment ``theta -> u + theta (q - u)`` from the uniform vector to ``q``."""

    endpoint: PopularityVector

    def point(self, theta: float) -> PopularityVector:
        return ray_point(self.endpoint, theta)

    def velocity(self) -> np.ndarray:
        """Constant derivative ``q - u`` of the path."""
        q = self.endpoint.probs
        return q - 1.0 / len(q)


def validate_popularity(raw: Sequence[float]) -> PopularityVector:
    """Check that ``raw`` is an interior point of the simplex.

    The entries are renormalized by their sum once the sum is known to be
    within ``SUM_TOLERANCE`` of one.
    """
    arr = np.asarray(raw, dtype=float).ravel()
    if arr.size < 2:
        raise BadLength(f"need at least 2 probabilities, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonPositiveEntry("probabilities must be finite")
    bad = np.flatnonzero(arr <= 0)
    if bad.size:
        raise NonPositiveEntry(
            f"entry {int(bad[0])} is {arr[bad[0]]!r}; the simplex boundary is not supported"
        )
    total = float(np.sum(arr))
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumOutOfTolerance(f"probabilities sum to {total!r}, not 1")
    return PopularityVector(arr / total)


def as_popularity(p) -> PopularityVector:
    """Pass a :class:`PopularityVector` through; validate anything else."""
    if isinstance(p, PopularityVector):
        return p
    return validate_popularity(p)


def uniform(n: int) -> PopularityVector:
    return PopularityVector.uniform(n)


def ray_point(q: PopularityVector, theta: float) -> PopularityVector:
    """Return ``u + theta (q - u)``; exact uniform at 0 and ``q`` itself at 1."""
    if not 0.0 <= theta <= 1.0:
        raise ThetaOutOfRange(f"theta must lie in [0, 1], got {theta!r}")
    if theta == 0.0:
        return PopularityVector.uniform(q.n)
    if theta == 1.0:
        return q
    u = 1.0 / q.n
    return validate_popularity(u + theta * (q.probs - u))


def residual_coefficient(m: int, params: ModelParams) -> int:
    """Signed residual coefficient ``(-1)**(m-L) * comb(m-2, m-L)``."""
    params.require_partial()
    L = params.residual_order
    if not L <= m <= params.n_items:
        raise MOutOfRange(f"m must lie in [{L}, {params.n_items}], got {m}")
    sign = -1 if (m - L) % 2 else 1
    return sign * comb(m - 2, m - L)


def residual_coefficients(params: ModelParams) -> np.ndarray:
    """Coefficient table indexed by subset size; zero below L."""
    out = np.zeros(params.n_items + 1, dtype=np.int64)
    for m in range(params.residual_order, params.n_items + 1):
        out[m] = residual_coefficient(m, params)
    return out


def zipf_vector(n: int, exponent: float) -> PopularityVector:
    """Zipf-like popularity ``p_i ~ i**(-exponent)`` for ``i = 1..n``."""
    if n < 2:
        raise BadLength(f"need at least 2 items, got {n}", "n")
    if exponent < 0:
        raise BadExponent(f"exponent must be nonnegative, got {exponent!r}")
    if exponent == 0:
        return PopularityVector.uniform(n)
    w = np.arange(1, n + 1, dtype=float) ** (-float(exponent))
    return PopularityVector(w / w.sum())
