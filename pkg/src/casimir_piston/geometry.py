"""Piston cross sections: corners, circular arcs, area, perimeter and chi.

A boundary is a closed chain of sharp corners (interior angles) and smooth
pieces.  Smooth pieces are circular arcs of constant curvature; a straight
side is an arc with zero curvature, and a general smooth curve is
approximated by a chain of tangent-continuous arcs.  Because chi only needs
the integrated curvature of each smooth piece, a circular arc contributes
``curvature * length`` exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

CLOSURE_RTOL = 1e-9


class GeometryError(ValueError):
    """A cross section violates one of its invariants."""


@dataclass(frozen=True)
class Arc:
    length: float
    curvature: float = 0.0

    @property
    def turning(self) -> float:
        return self.length * self.curvature


@dataclass(frozen=True)
class CrossSection:
    """Validated cross section; angles in radians, lengths in any unit."""

    corners: tuple[float, ...]
    arcs: tuple[Arc, ...]
    area: float
    perimeter: float
    name: str = ""
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        for alpha in self.corners:
            if not (0.0 < alpha < 2 * math.pi):
                if alpha <= 0.0:
                    raise GeometryError(f"cusp: interior angle {alpha} must satisfy 0 < alpha")
                raise GeometryError(f"interior angle {alpha} must satisfy alpha < 2*pi")
            if math.isclose(alpha, math.pi, rel_tol=0.0, abs_tol=1e-12):
                raise GeometryError("interior angle alpha = pi is not a corner; describe it as smooth boundary")
        for arc in self.arcs:
            if not arc.length > 0:
                raise GeometryError(f"arc length must be positive, got {arc.length}")
        if not self.area > 0:
            raise GeometryError(f"area A > 0 required, got {self.area}")
        if not self.perimeter > 0:
            raise GeometryError(f"perimeter P > 0 required, got {self.perimeter}")
        turning = self.total_turning
        if abs(turning - 2 * math.pi) > CLOSURE_RTOL * 2 * math.pi:
            raise GeometryError(
                f"closure consistency violated: total turning {turning!r} != 2*pi "
                "(sum(pi - alpha_i) + sum(kappa_j * L_j) must equal 2*pi)"
            )
        flags = list(self.flags)
        if any(alpha > math.pi for alpha in self.corners) and "reentrant-corner" not in flags:
            flags.append("reentrant-corner")
        object.__setattr__(self, "flags", tuple(flags))

    @property
    def total_turning(self) -> float:
        return math.fsum([math.pi - a for a in self.corners] + [arc.turning for arc in self.arcs])

    @property
    def is_smooth(self) -> bool:
        return not self.corners

    def scaled(self, factor: float) -> "CrossSection":
        if not factor > 0:
            raise GeometryError("scale factor must be positive")
        return CrossSection(
            corners=self.corners,
            arcs=tuple(Arc(arc.length * factor, arc.curvature / factor) for arc in self.arcs),
            area=self.area * factor * factor,
            perimeter=self.perimeter * factor,
            name=self.name,
            flags=self.flags,
        )


@dataclass(frozen=True)
class ChiValue:
    chi: float
    corner_contribution: float
    curvature_contribution: float
    flags: tuple[str, ...] = ()


def corner_term(alpha: float) -> float:
    """(pi/alpha - alpha/pi) / 24 for a single corner."""
    if not alpha > 0:
        raise GeometryError("cusp: interior angle must be positive")
    return (math.pi / alpha - alpha / math.pi) / 24.0


def chi(cs: CrossSection) -> ChiValue:
    corners = math.fsum(corner_term(a) for a in cs.corners)
    curvature = math.fsum(arc.turning for arc in cs.arcs) / (12 * math.pi)
    return ChiValue(corners + curvature, corners, curvature, cs.flags)


# -- constructors -----------------------------------------------------------


def rectangle(b: float, c: float | None = None) -> CrossSection:
    c = b if c is None else c
    return CrossSection(
        corners=(math.pi / 2,) * 4,
        arcs=(Arc(b), Arc(c), Arc(b), Arc(c)),
        area=b * c,
        perimeter=2 * (b + c),
        name="rectangle",
    )


def square(b: float) -> CrossSection:
    return rectangle(b, b)


def circle(radius: float) -> CrossSection:
    return CrossSection(
        corners=(),
        arcs=(Arc(2 * math.pi * radius, 1.0 / radius),),
        area=math.pi * radius**2,
        perimeter=2 * math.pi * radius,
        name="circle",
    )


def stadium(radius: float, straight: float) -> CrossSection:
    half = Arc(math.pi * radius, 1.0 / radius)
    side = Arc(straight, 0.0)
    return CrossSection(
        corners=(),
        arcs=(half, side, half, side),
        area=math.pi * radius**2 + 2 * radius * straight,
        perimeter=2 * math.pi * radius + 2 * straight,
        name="stadium",
    )


def oval(r_small: float, r_large: float, half_angle: float) -> CrossSection:
    """Four-arc oval, a tangent-continuous arc chain approximating an ellipse.

    Two arcs of radius ``r_small`` subtend 2*half_angle each; two arcs of
    radius ``r_large`` subtend pi - 2*half_angle each.
    """
    if not 0 < half_angle < math.pi / 2:
        raise GeometryError("half_angle must lie in (0, pi/2)")
    small = Arc(2 * half_angle * r_small, 1.0 / r_small)
    large = Arc((math.pi - 2 * half_angle) * r_large, 1.0 / r_large)
    # the centres sit on the axes at distances d_s, d_l from the middle
    d = r_large - r_small
    d_s = d * math.sin(half_angle)
    d_l = d * math.cos(half_angle)
    area = (
        2 * half_angle * r_small**2
        + (math.pi - 2 * half_angle) * r_large**2
        - 2 * d_s * d_l
    )
    return CrossSection(
        corners=(),
        arcs=(small, large, small, large),
        area=area,
        perimeter=2 * (small.length + large.length),
        name="oval",
    )


def regular_polygon(sides: int, side_length: float = 1.0) -> CrossSection:
    vertices = [
        (math.cos(2 * math.pi * k / sides), math.sin(2 * math.pi * k / sides)) for k in range(sides)
    ]
    scale = side_length / math.dist(vertices[0], vertices[1])
    return polygon([(x * scale, y * scale) for x, y in vertices], name=f"regular-{sides}-gon")


def polygon(vertices: Sequence[Sequence[float]], name: str = "polygon") -> CrossSection:
    """Simple polygon from its vertex list (either orientation).

    Area via the shoelace formula; collinear vertices are merged into the
    adjacent straight side.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise GeometryError("polygon needs at least three (x, y) vertices")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    x, y = pts[:, 0], pts[:, 1]
    signed = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if signed == 0.0:
        raise GeometryError("area A > 0 required: degenerate polygon")
    orient = 1.0 if signed > 0 else -1.0
    edges = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths == 0):
        raise GeometryError("repeated vertex: polygon sides must have positive length")
    corners = []
    for i in range(len(pts)):
        e_in, e_out = edges[i - 1], edges[i]
        cross = e_in[0] * e_out[1] - e_in[1] * e_out[0]
        dot = float(e_in @ e_out)
        turn = orient * math.atan2(cross, dot)  # exterior turning angle, left-positive
        if abs(turn) < 1e-14:
            continue
        corners.append(math.pi - turn)
    return CrossSection(
        corners=tuple(corners),
        arcs=tuple(Arc(float(length)) for length in lengths),
        area=abs(signed),
        perimeter=float(lengths.sum()),
        name=name,
    )


# -- file format ------------------------------------------------------------


def parse_cross_section(document: str | Mapping[str, Any]) -> CrossSection:
    """Build a CrossSection from a JSON document or an already-decoded mapping.

    Two layouts are accepted::

        {"vertices": [[x, y], ...]}
        {"corners": [{"interior_angle": rad}, ...],
         "arcs": [{"length": L, "curvature": k}, ...],
         "area": A, "perimeter": P}

    In the second layout ``perimeter`` may be omitted when the arcs list the
    whole boundary (straight sides as zero-curvature arcs).
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GeometryError(f"malformed cross-section document: {exc}") from exc
    else:
        data = document
    if not isinstance(data, Mapping):
        raise GeometryError("malformed cross-section document: top level must be an object")
    name = str(data.get("name", ""))

    if "vertices" in data:
        return polygon(data["vertices"], name=name or "polygon")

    unknown = set(data) - {"corners", "arcs", "area", "perimeter", "name"}
    if unknown:
        raise GeometryError(f"malformed cross-section document: unknown keys {sorted(unknown)}")
    try:
        corners = tuple(float(c["interior_angle"]) for c in data.get("corners", []))
        arcs = tuple(Arc(float(a["length"]), float(a.get("curvature", 0.0))) for a in data.get("arcs", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed cross-section document: {exc!r}") from exc
    if "area" not in data:
        raise GeometryError("malformed cross-section document: 'area' is required")
    perimeter = data.get("perimeter")
    if perimeter is None:
        if not arcs:
            raise GeometryError("malformed cross-section document: 'perimeter' is required without arcs")
        perimeter = math.fsum(a.length for a in arcs)
    return CrossSection(corners, arcs, float(data["area"]), float(perimeter), name=name)


def load_cross_section(path: str | Path) -> CrossSection:
    return parse_cross_section(Path(path).read_text())


def to_document(cs: CrossSection) -> dict[str, Any]:
    return {
        "name": cs.name,
        "corners": [{"interior_angle": a} for a in cs.corners],
        "arcs": [{"length": a.length, "curvature": a.curvature} for a in cs.arcs],
        "area": cs.area,
        "perimeter": cs.perimeter,
    }
