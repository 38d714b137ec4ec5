"""Closed optical paths in a rectangular box and the cutoff-independent energy.

Geometry and bookkeeping
------------------------
The box has edges ``dims = (a, b, c)``; axis 0 (length ``a``) is vertical
(the piston moves along it), axes 1 and 2 span the cross section.

A closed path in the coincidence limit joins a point x to one of its images
under the reflection group of the box.  Along each axis the image is either
a translate ``x_i + 2 k_i d_i`` (even number of reflections on that axis) or
a mirror image ``-x_i + 2 k_i d_i`` (odd number).  A path family is labelled
by the set M of mirror axes (q = |M|) and the integers k_i on the remaining
"translation" axes.  On a mirror axis the images for all k_i tile the real
line as x_i runs over [0, d_i], so those indices are integrated out:

    int_box dx sum_{k_M} 1 / l(x)^4
        = prod_{i not in M} d_i * 2^-q * int_{R^q} du / (|t|^2 + |u|^2)^2

with t = (2 k_i d_i)_{i not in M}.  This gives the closed-form family energy

    E_family = eta^q 2^-q (prod_{i not in M} d_i) C_q |t|^-(4 - q),
    C_0 = -1/(2 pi^2),  C_1 = -1/(4 pi),  C_2 = -1/(2 pi).

Families with t = 0 are the one-reflection surface terms (q = 1) and their
edge and corner analogues (q = 2, 3).  They diverge like the cutoff and are
independent of the box's shape beyond S, L; they are left out.  q = 3 has no
t != 0 family, so corner paths carry no finite energy in a rectangular box.

Class of a family: periodic (q = 0), side (q = 1), edge (q = 2), corner
(q = 3), overridden to horizontal when the vertical axis is a translation
axis with k_0 = 0 (the path never leaves a horizontal plane).

Reflection counts of the shortest representative: each translation axis
contributes 2|k_i| face reflections and each mirror axis one, so
n_s = sum 2|k_i| + q for q <= 2, and the phase is eta^(n_s + n_c) = eta^q.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._lattice import (
    cell_tail,
    half_diagonal,
    iter_octant,
    radial_lattice_sum,
    radial_tail,
    unit_sphere_area,
)
from .fields import Field
from .spectrum import BoxDims

_C = {0: -1.0 / (2 * math.pi**2), 1: -1.0 / (4 * math.pi), 2: -1.0 / (2 * math.pi)}
VERTICAL = 0
MAX_FAMILIES = 2_000_000


@dataclass(frozen=True, order=True)
class PathFamily:
    length: float
    image_vector: tuple[int, int, int]  # k_i on translation axes, 0 on mirror axes
    reflecting_axes: tuple[int, ...]
    kind: str = field(compare=False)  # periodic | side | edge | corner | horizontal
    n_s: int = field(compare=False)
    n_c: int = field(compare=False)
    phase: int = field(compare=False)
    energy: float = field(compare=False)

    @property
    def reflections(self) -> int:
        return self.n_s + self.n_c


@dataclass(frozen=True)
class PathEnergy:
    value: float
    truncation_bound: float
    max_path_length: float
    families_included: int


def _phase_factor(field_: Field, q: int) -> float:
    """eta^q, or the D + N combination eta^q summed over both phases for EM."""
    if field_ is Field.EM:
        return 2.0 if q % 2 == 0 else 0.0
    return float(field_.eta**q)


def _classify(mirror: tuple[int, ...], k: Sequence[int]) -> str:
    q = len(mirror)
    if VERTICAL not in mirror and k[VERTICAL] == 0:
        return "horizontal"
    return ("periodic", "side", "edge", "corner")[q]


def _mirror_sets(max_q: int = 2):
    for q in range(max_q + 1):
        yield from itertools.combinations(range(3), q)


def enumerate_path_families(
    dims: BoxDims | Sequence[float],
    eta: Field | str | int,
    max_path_length: float,
    max_families: int = MAX_FAMILIES,
) -> list[PathFamily]:
    """All families with t != 0 and minimal length |t| <= max_path_length.

    Sorted by length, then image vector, then mirror set.  Raises ValueError
    if more than ``max_families`` would be produced.
    """
    dims = BoxDims.of(dims)
    field_ = Field.parse(eta)
    if field_ is Field.EM:
        raise ValueError("path families carry a scalar phase; pass eta = -1 or +1")
    if not max_path_length > 0:
        raise ValueError("max_path_length must be positive")
    d = dims.as_tuple()
    radius = float(max_path_length)
    out: list[PathFamily] = []
    for mirror in _mirror_sets():
        q = len(mirror)
        free = [i for i in range(3) if i not in mirror]
        spacing = [2 * d[i] for i in free]
        estimate = math.prod(2 * radius / s + 1 for s in spacing)
        if len(out) + estimate > 4 * max_families:
            raise ValueError(f"max_path_length={radius} would produce more than max_families={max_families} families")
        ranges = [np.arange(-int(radius // s) - 1, int(radius // s) + 2) for s in spacing]
        grid = np.stack([g.ravel() for g in np.meshgrid(*ranges, indexing="ij")], axis=1)
        lengths = np.sqrt(((grid * np.asarray(spacing)) ** 2).sum(axis=1))
        keep = (lengths > 0) & (lengths <= radius)
        if len(out) + int(keep.sum()) > max_families:
            raise ValueError(f"max_path_length={radius} would produce more than max_families={max_families} families")
        base = 2.0**-q * math.prod(d[i] for i in free) * _C[q]
        phase = field_.eta**q
        for row, length in zip(grid[keep], lengths[keep]):
            k = [0, 0, 0]
            for i, kk in zip(free, row):
                k[i] = int(kk)
            n_s = 2 * sum(abs(x) for x in k) + q
            out.append(
                PathFamily(
                    length=float(length),
                    image_vector=tuple(k),
                    reflecting_axes=mirror,
                    kind=_classify(mirror, k),
                    n_s=n_s,
                    n_c=0,
                    phase=phase,
                    energy=phase * base * float(length) ** (q - 4),
                )
            )
    out.sort()
    return out


def _scalar_box_sums(dims: BoxDims, radius: float) -> dict[tuple[int, ...], tuple[float, float, int]]:
    """Per mirror set: (value, bound, count) of prod(d) C_q 2^-q sum |t|^-(4-q)."""
    d = dims.as_tuple()
    out = {}
    for mirror in _mirror_sets():
        q = len(mirror)
        free = [i for i in range(3) if i not in mirror]
        spacing = [2 * d[i] for i in free]
        weight = 2.0**-q * math.prod(d[i] for i in free) * _C[q]
        lat = radial_lattice_sum(spacing, 4 - q, radius)
        out[mirror] = (weight * lat.value, abs(weight) * lat.bound, lat.count)
    return out


def _minimum_radius(dims: BoxDims) -> float:
    d = dims.as_tuple()
    return 2.0 * half_diagonal([2 * x for x in d]) + 1e-12


def path_energy(
    dims: BoxDims | Sequence[float],
    eta: Field | str | int,
    max_path_length: float,
) -> PathEnergy:
    """Finite (cutoff-independent) energy of the closed box from its path families.

    Families up to ``max_path_length`` are summed explicitly; the rest are
    replaced by the integral-test tail whose half-width is ``truncation_bound``.
    For the EM field the result is D + N + pi/24 sum_i 1/d_i, the last term
    removing the finite parts of the three 1-D towers.
    """
    dims = BoxDims.of(dims)
    field_ = Field.parse(eta)
    radius = float(max_path_length)
    if radius < _minimum_radius(dims):
        raise ValueError(
            f"max_path_length={radius} must exceed {_minimum_radius(dims):.6g} so that every two-reflection family is included"
        )
    sums = _scalar_box_sums(dims, radius)
    parts, bound, count = [], 0.0, 0
    for mirror, (value, bd, n) in sums.items():
        factor = _phase_factor(field_, len(mirror))
        if factor == 0.0:
            continue
        parts.append(factor * value)
        bound += abs(factor) * bd
        count += n
    if field_ is Field.EM:
        parts.extend(math.pi / (24 * x) for x in dims.as_tuple())
    return PathEnergy(math.fsum(parts), bound, radius, count)


def horizontal_path_energy_density(
    dims: BoxDims | Sequence[float],
    eta: Field | str | int,
    rtol: float = 1e-10,
) -> PathEnergy:
    """Energy per unit height of the purely horizontal families.

    Only the cross section (dims.b, dims.c) matters.  These families are
    extensive in the height of a region, so a tall region contributes
    (height) * density and the piston feels +density from the region above it.
    """
    dims = BoxDims.of(dims)
    field_ = Field.parse(eta)
    horizontal = (dims.b, dims.c)
    parts, bound, count = [], 0.0, 0
    radius_used = 0.0
    for q in (0, 1):
        factor = _phase_factor(field_, q)
        if factor == 0.0:
            continue
        for mirror in itertools.combinations(range(2), q):
            free = [i for i in range(2) if i not in mirror]
            spacing = [2 * horizontal[i] for i in free]
            weight = factor * 2.0**-q * math.prod(horizontal[i] for i in free) * _C[q]
            lat = _converged_radial(spacing, 4 - q, rtol)
            parts.append(weight * lat.value)
            bound += abs(weight) * lat.bound
            count += lat.count
            radius_used = max(radius_used, lat.radius)
    return PathEnergy(math.fsum(parts), bound, radius_used, count)


def _converged_radial(spacing, p, rtol):
    radius = 8 * max(spacing)
    while True:
        lat = radial_lattice_sum(spacing, p, radius)
        if lat.bound <= rtol * abs(lat.value):
            return lat
        radius *= 2.0


# -- piston force -------------------------------------------------------------


@dataclass(frozen=True)
class PathForce:
    """Force on the piston (h -> infinity) from the optical-path energies.

    ``terms`` splits the total by family class: periodic, side and edge
    families along the vertical axis, oblique families (both horizontal and
    vertical displacement), the horizontal families of region I and those of
    region II above the piston, and for EM the 1-D tower correction.
    """

    total: float
    bound: float
    terms: dict[str, float]
    max_path_length: float
    families_included: int
    method: str
    derivative_error: float = 0.0


def _f_hessian_bound(p: float) -> float:
    # ||Hess f|| <= hess |t|^-(p+2) for f = |t|^-p (1 - p t_z^2 / |t|^2)
    return p * (p + 1) + p * ((p + 2) ** 2 + 7 * (p + 2) + 2)


def _full_lattice_tail(spacing: list[float], radius: float, p: int):
    """Tail over |t| > R of f(t) = |t|^-p (1 - p t_z^2/|t|^2); z is the last axis."""
    dim = len(spacing)
    if dim == 1:
        lat = radial_tail(spacing, p, radius, _count_1d(spacing[0], radius))
        return (1 - p) * lat.estimate, (p - 1) * lat.bound
    continuum = unit_sphere_area(dim) * radius ** (dim - p) / (p - dim) * (1 - p / dim)
    tail = cell_tail(spacing, radius, p, continuum, fmax=p - 1, hess=_f_hessian_bound(p))
    return tail.estimate, tail.bound


def _count_1d(spacing: float, radius: float) -> int:
    return 2 * int(math.floor(radius / spacing))


def _plane_tail(spacing_h: list[float], radius: float, p: int, count: int):
    if not spacing_h:
        return 0.0, 0.0
    tail = radial_tail(spacing_h, p, radius, count)
    return tail.estimate, tail.bound


def _vertical_split(spacing_h, spacing_v, p, radius):
    """Explicit sums of f over 0 < |t| <= R split into t_perp = 0, oblique and plane parts."""
    spacing = list(spacing_h) + [spacing_v]
    zi = len(spacing) - 1
    column, oblique, plane = [], [], []
    n_column = n_oblique = n_plane = 0
    for sq, mult in iter_octant(spacing, radius):
        t2 = sq.sum(axis=0)
        tz2 = sq[zi]
        perp2 = t2 - tz2
        f = t2 ** (-0.5 * p) * (1.0 - p * tz2 / t2)
        is_col = perp2 == 0
        is_plane = tz2 == 0
        is_obl = ~(is_col | is_plane)
        column.append(float(np.sum(mult[is_col] * f[is_col])))
        plane.append(float(np.sum(mult[is_plane] * f[is_plane])))
        oblique.append(float(np.sum(mult[is_obl] * f[is_obl])))
        n_column += int(mult[is_col].sum())
        n_plane += int(mult[is_plane].sum())
        n_oblique += int(mult[is_obl].sum())
    return (math.fsum(column), math.fsum(oblique), math.fsum(plane)), (n_column, n_oblique, n_plane)


def _fixed_set_energy_derivative(spacing_h, spacing_v, p, radius, rel_step):
    """d/da of sum a |t(a)|^-p over the index set fixed at the nominal a.

    Central differences at steps h and h/2 in a, combined by Richardson
    extrapolation.  Returned in units where the nominal vertical scale is 1,
    i.e. d/ds [s sum (t_perp^2 + s^2 t_z^2)^(-p/2)] at s = 1; also returns
    the extrapolation error estimate.
    """
    spacing = list(spacing_h) + [spacing_v]
    zi = len(spacing) - 1
    scales = np.array([1 - rel_step, 1 + rel_step, 1 - 0.5 * rel_step, 1 + 0.5 * rel_step])
    parts = [[] for _ in scales]
    for sq, mult in iter_octant(spacing, radius):
        tz2 = sq[zi]
        perp2 = sq.sum(axis=0) - tz2
        for j, s in enumerate(scales):
            parts[j].append(float(np.sum(mult * s * (perp2 + s * s * tz2) ** (-0.5 * p))))
    e = [math.fsum(x) for x in parts]
    d_h = (e[1] - e[0]) / (2 * rel_step)
    d_h2 = (e[3] - e[2]) / rel_step
    richardson = (4 * d_h2 - d_h) / 3
    return richardson, abs(richardson - d_h2)


def default_max_path_length(a: float, b: float, c: float) -> float:
    return 200.0 * max(b, c)


def piston_path_force(
    a: float,
    b: float,
    c: float | None = None,
    eta: Field | str | int = Field.DIRICHLET,
    max_path_length: float | None = None,
    method: str = "analytic",
    rel_step: float = 1e-3,
) -> PathForce:
    """Force on a piston at height a in an infinitely tall b x c shaft.

    F = -d/da [E_I(a) + E_II(h - a)] with both energies from the path sum.
    Region II enters only through its horizontal families, giving +density.

    ``method="analytic"`` differentiates each family in closed form (the
    h -> 0 limit of the difference quotient).  ``method="finite-difference"``
    differentiates the region-I energy numerically: the family set is fixed
    at the nominal a, the energy of that set is evaluated at a(1 +- h) and
    a(1 +- h/2), and the two central differences are Richardson-combined.
    Families beyond the length bound are accounted for by the same
    integral-test tail in both methods.
    """
    c = b if c is None else c
    if not (a > 0 and b > 0 and c > 0):
        raise ValueError("piston dimensions must satisfy a > 0, b > 0, c > 0")
    if method not in ("analytic", "finite-difference"):
        raise ValueError(f"unknown method {method!r}")
    field_ = Field.parse(eta)
    radius = float(max_path_length) if max_path_length is not None else default_max_path_length(a, b, c)
    horizontal = (b, c)
    minimum = 2 * half_diagonal([2 * b, 2 * c, 2 * a]) + 1e-12
    if radius <= minimum:
        raise ValueError(f"max_path_length={radius} must exceed {minimum:.6g}")

    terms = {"periodic": 0.0, "side": 0.0, "edge": 0.0, "oblique": 0.0, "horizontal_I": 0.0, "horizontal_II": 0.0}
    bound = 0.0
    fd_error = 0.0
    count = 0
    for q in (0, 1, 2):
        factor = _phase_factor(field_, q)
        if factor == 0.0:
            continue
        for mirror in itertools.combinations(range(2), q):
            free = [i for i in range(2) if i not in mirror]
            spacing_h = [2 * horizontal[i] for i in free]
            k_m = factor * 2.0**-q * math.prod(horizontal[i] for i in free) * _C[q]
            p = 4 - q
            full_tail, full_bound = _full_lattice_tail(spacing_h + [2 * a], radius, p)
            (col, obl, plane), (n_col, n_obl, n_plane) = _vertical_split(spacing_h, 2 * a, p, radius)
            plane_tail, plane_bound = _plane_tail(spacing_h, radius, p, n_plane)
            count += n_col + n_obl + n_plane
            name = ("periodic", "side", "edge")[q]
            # region II: +K H with H the complete plane sum
            terms["horizontal_II"] += k_m * (plane + plane_tail)
            terms["horizontal_I"] += -k_m * (plane + plane_tail)
            if method == "analytic":
                terms[name] += -k_m * col
                terms["oblique"] += -k_m * (obl + full_tail - plane_tail)
                bound += abs(k_m) * (full_bound + plane_bound)
            else:
                deriv, err = _fixed_set_energy_derivative(spacing_h, 2 * a, p, radius, rel_step)
                # E = K a sum(...), so -dE/da = -K (d/ds at s = 1) for the fixed set
                region_one = -k_m * (deriv + full_tail)
                # class split as in the closed form; the difference quotient fixes the oblique part
                terms[name] += -k_m * col
                terms["oblique"] += region_one + k_m * col + k_m * (plane + plane_tail)
                bound += abs(k_m) * (full_bound + plane_bound)
                fd_error += abs(k_m) * err
    if field_ is Field.EM:
        terms["tower"] = math.pi / (24 * a * a)
    total = math.fsum(terms.values())
    return PathForce(
        total=total,
        bound=bound + fd_error,
        terms=terms,
        max_path_length=radius,
        families_included=count,
        method=method,
        derivative_error=fd_error,
    )

