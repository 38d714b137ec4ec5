"""Length-truncated sums over rectangular lattices with certified tails.

Every lattice here has points t_k = (k_1 s_1, ..., k_D s_D), k in Z^D, and
the sums run over 0 < |t_k| <= R.  Points are visited one octant at a time
(k_i >= 0, weighted by 2**(number of nonzero k_i)), looping over the axis
with the fewest points and vectorising over the rest.  The visiting order is
fixed, so results are bit-reproducible.

Two tail estimators are provided:

* ``radial_tail`` for f = |t|**-p.  Uses the exact Stieltjes identity
  sum_{|t|>R} f = -f(R) N(R) + int_R^inf N(r) (-f'(r)) dr together with the
  cell-covering bounds V(r - delta) <= (N(r) + 1) Vc <= V(r + delta), where
  Vc is the cell volume and delta the cell half-diagonal.
* ``cell_tail`` for smooth homogeneous f that are not radial.  Compares the
  sum with the continuum integral cell by cell: the boundary layer
  R - delta < |t| < R + delta and a second-order Taylor term per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    bound: float


@dataclass(frozen=True)
class LatticeSum:
    """Truncated sum plus integral-test tail; ``bound`` certifies |exact - value|."""

    value: float
    bound: float
    explicit: float
    tail: float
    count: int
    radius: float


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


def unit_sphere_area(dim: int) -> float:
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def cell_volume(spacings: Sequence[float]) -> float:
    return float(np.prod(spacings))


def half_diagonal(spacings: Sequence[float]) -> float:
    return 0.5 * math.sqrt(sum(s * s for s in spacings))


def iter_octant(spacings: Sequence[float], radius: float) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(sq, mult)`` chunks covering 0 < |t| <= radius.

    ``sq`` has shape (D, n) and holds squared components in the caller's axis
    order; ``mult`` is the number of sign images of each octant point.
    """
    spacings = [float(s) for s in spacings]
    dim = len(spacings)
    if dim == 0:
        return
    r2 = radius * radius
    counts = [int(math.floor(radius / s)) for s in spacings]
    loop_axis = int(np.argmin(counts))
    others = [i for i in range(dim) if i != loop_axis]

    if others:
        axes = [np.arange(counts[i] + 1, dtype=float) for i in others]
        grids = np.meshgrid(*axes, indexing="ij")
        other_sq = np.stack([(g * spacings[i]) ** 2 for g, i in zip(grids, others)]).reshape(len(others), -1)
        other_mult = np.ones(other_sq.shape[1])
        for g in grids:
            other_mult *= np.where(g.ravel() > 0, 2.0, 1.0)
        other_t2 = other_sq.sum(axis=0)
    else:
        other_sq = np.zeros((0, 1))
        other_mult = np.ones(1)
        other_t2 = np.zeros(1)

    for k in range(counts[loop_axis] + 1):
        z2 = (k * spacings[loop_axis]) ** 2
        rem = r2 - z2
        if rem < 0:
            break
        mask = other_t2 <= rem
        if k == 0:
            mask &= other_t2 > 0
        if not mask.any():
            continue
        n = int(mask.sum())
        sq = np.empty((dim, n))
        sq[loop_axis] = z2
        for row, i in enumerate(others):
            sq[i] = other_sq[row, mask]
        mult = other_mult[mask] * (2.0 if k > 0 else 1.0)
        yield sq, mult


def lattice_reduce(
    spacings: Sequence[float],
    radius: float,
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> tuple[float, int]:
    """Sum ``func(sq, t2)`` over 0 < |t| <= radius; returns (sum, point count)."""
    parts = []
    count = 0
    for sq, mult in iter_octant(spacings, radius):
        t2 = sq.sum(axis=0)
        parts.append(float(np.sum(mult * func(sq, t2))))
        count += int(mult.sum())
    return math.fsum(parts), count


def _power_moments(dim: int, shift: float, p: float, start: float) -> float:
    """int_start^inf (r + shift)**dim * p * r**(-p-1) dr, for start > 0."""
    total = 0.0
    for j in range(dim + 1):
        total += math.comb(dim, j) * shift**j * p * start ** (dim - j - p) / (p - dim + j)
    return total


def radial_tail(spacings: Sequence[float], p: float, radius: float, count: int) -> TailEstimate:
    """Certified tail of sum |t|**-p beyond ``radius`` given the exact inner count."""
    dim = len(spacings)
    if p <= dim:
        raise ValueError(f"lattice sum of |t|^-{p} diverges in {dim} dimensions")
    delta = half_diagonal(spacings)
    if radius <= delta:
        raise ValueError(f"truncation radius {radius} must exceed the cell half-diagonal {delta}")
    vc = cell_volume(spacings)
    omega = unit_ball_volume(dim)
    head = -(count + 1) * radius ** (-p)
    hi = head + omega / vc * _power_moments(dim, delta, p, radius)
    lo = head + omega / vc * _power_moments(dim, -delta, p, radius)
    lo = max(lo, 0.0)
    return TailEstimate(0.5 * (hi + lo), 0.5 * (hi - lo))


def radial_lattice_sum(spacings: Sequence[float], p: float, radius: float) -> LatticeSum:
    """sum over t != 0 of |t|**-p with a certified integral-test tail."""
    explicit, count = lattice_reduce(spacings, radius, lambda sq, t2: t2 ** (-0.5 * p))
    tail = radial_tail(spacings, p, radius, count)
    return LatticeSum(explicit + tail.estimate, tail.bound, explicit, tail.estimate, count, radius)


def cell_tail(
    spacings: Sequence[float],
    radius: float,
    p: float,
    continuum: float,
    fmax: float,
    hess: float,
) -> TailEstimate:
    """Tail of a non-radial sum from its continuum integral.

    ``continuum`` is int_{|t|>R} f d^Dt.  ``fmax`` and ``hess`` bound
    |f(t)| <= fmax |t|^-p and ||Hess f(t)|| <= hess |t|^-(p+2).
    """
    dim = len(spacings)
    delta = half_diagonal(spacings)
    if radius <= 2 * delta:
        raise ValueError(f"truncation radius {radius} must exceed twice the cell half-diagonal {delta}")
    vc = cell_volume(spacings)
    area = unit_sphere_area(dim)
    lo, hi = radius - delta, radius + delta
    if abs(dim - p) < 1e-12:
        layer = math.log(hi / lo)
    else:
        layer = (hi ** (dim - p) - lo ** (dim - p)) / (dim - p)
    boundary = fmax * area * layer / vc
    # sum_{|t_k|>R} (|t_k| - delta)^-(p+2) <= int_{R-delta}^inf N_hi d(-u^-(p+2)), u = r - delta
    q = p + 2
    u0 = radius - delta
    moments = 0.0
    for j in range(dim + 1):
        moments += math.comb(dim, j) * (2 * delta) ** j * q * u0 ** (dim - j - q) / (q - dim + j)
    interior = 0.5 * hess * (delta * delta / 3.0) * unit_ball_volume(dim) / vc * moments
    return TailEstimate(continuum / vc, boundary + interior)
