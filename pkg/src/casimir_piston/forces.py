"""Casimir force on a piston in an infinitely tall shaft.

Sign convention: a negative force pulls the piston toward the base (a shrinks).

Two exact representations of the square-section EM force are available:

* ``lattice``: parallel-plate, a^-2 and constant terms plus the sum
  (pi^2 A / 16 a^4) sum' coth(f) / (f sinh^2 f),  f = pi |(m, n)| b / a.
  Converges fast for a/b <~ 1.
* ``waveguide``: the same force as a sum over the transverse modes of the
  shaft, F = -(1/pi) sum_mu g_mu mu^2 sum_{j>=1} [K0(2 j mu a) + K1(2 j mu a)/(2 j mu a)].
  Every term is negative, so truncation can only make |F| smaller; this
  certifies the sign at large a/b where the lattice form cancels to nothing.

``auto`` picks the lattice form for a/b <= 1 and the waveguide form above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import k0e, k1e

from . import geometry
from .fields import Field
from .special_functions import j_constants, riemann_zeta

ZETA2 = math.pi**2 / 6
ZETA3 = riemann_zeta(3)
ZETA4 = math.pi**4 / 90
EPS = np.finfo(float).eps
# relative accuracy of the J constants (Epstein sum tolerance)
J_RTOL = 1e-10
SHELL_STOP = 1e-14
# beyond this ratio the waveguide scale e^(-2 pi a/b) underflows doubles
MAX_WAVEGUIDE_EXPONENT = 700.0
SCALAR_WAVEGUIDE_MIN_RATIO = 0.1


class ForceDomainError(ValueError):
    """Inputs outside the domain of a force formula."""


@dataclass(frozen=True)
class PistonConfig:
    """Piston at height ``a`` in a shaft of cross section ``b`` (square) or ``cross_section``."""

    a: float
    b: Optional[float] = None
    field: Field = Field.EM
    cross_section: Optional[geometry.CrossSection] = None
    h: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "field", Field.parse(self.field))
        if not self.a > 0:
            raise ForceDomainError(f"separation must satisfy a > 0, got a={self.a}")
        if self.b is not None and not self.b > 0:
            raise ForceDomainError(f"square side must satisfy b > 0, got b={self.b}")
        if self.b is None and self.cross_section is None:
            raise ForceDomainError("give either a square side b or a cross section")
        if self.h != math.inf:
            raise ForceDomainError("only an infinitely tall shaft (h = inf) is supported")

    @property
    def section(self) -> geometry.CrossSection:
        return self.cross_section if self.cross_section is not None else geometry.square(self.b)

    @property
    def square_side(self) -> Optional[float]:
        if self.b is not None:
            return self.b
        cs = self.cross_section
        sides = {arc.length for arc in cs.arcs}
        if len(cs.corners) == 4 and all(abs(x - math.pi / 2) < 1e-12 for x in cs.corners) and len(sides) == 1:
            return sides.pop()
        return None

    def require_square(self) -> float:
        side = self.square_side
        if side is None:
            raise ForceDomainError("this force formula needs a square cross section (b = c)")
        return side

    @property
    def area(self) -> float:
        return self.section.area

    @property
    def perimeter(self) -> float:
        return self.section.perimeter


@dataclass(frozen=True)
class ForceResult:
    """Force with its breakdown.

    ``term_const`` is None when the a-independent term is not known.
    ``bound`` certifies |exact - total| for exact methods; for asymptotic
    methods it is the size of the neglected remainder (an order estimate,
    see ``flags``), or inf when a whole term is unknown.
    """

    total: float
    term_a4: float
    term_a3: float
    term_a2: float
    term_const: Optional[float]
    exp_remainder: float
    exp_bound: float
    bound: float
    f_parallel: float
    method: str
    field: Field
    a: float
    area: float
    flags: tuple[str, ...] = ()
    sign_certified: bool = False
    shells: int = 0
    log_abs_total: float = field(default=math.nan)

    @property
    def normalized(self) -> float:
        return self.total / self.f_parallel

    @property
    def normalized_bound(self) -> float:
        return self.bound / abs(self.f_parallel)

    @property
    def per_area(self) -> float:
        return self.total / self.area


def f_parallel(area: float, a: float, field_: Field | str = Field.EM) -> float:
    """Parallel-plate force; the EM value is twice the scalar one."""
    field_ = Field.parse(field_)
    value = -3 * ZETA4 * area / (8 * math.pi**2 * a**4)
    return value if field_ is Field.EM else 0.5 * value


# -- EM, square section ---------------------------------------------------------


def _em_terms(a: float, b: float) -> tuple[float, float, float]:
    area = b * b
    return (
        -3 * ZETA4 * area / (8 * math.pi**2 * a**4),
        ZETA2 / (8 * math.pi * a * a),
        -j_constants().j_em / (32 * math.pi**2 * area),
    )


def _g(f: np.ndarray) -> np.ndarray:
    """coth(f) / (f sinh(f)^2) written with u = exp(-2f) to avoid overflow."""
    u = np.exp(-2 * f)
    one_minus = -np.expm1(-2 * f)
    return 4 * u * (1 + u) / (f * one_minus**3)


def _shell_counts(limit: int) -> np.ndarray:
    """r_2(s) = #{(m, n) in Z^2 : m^2 + n^2 = s} for s < limit."""
    m = np.arange(-int(math.isqrt(limit)) - 1, int(math.isqrt(limit)) + 2)
    s = (m[:, None] ** 2 + m[None, :] ** 2).ravel()
    return np.bincount(s[s < limit], minlength=limit)


def _lattice_exp_sum(ratio: float) -> tuple[float, float, int]:
    """sum' g(pi |k| / ratio) by shells of m^2 + n^2, with a certified tail bound.

    Returns (value, bound, shells visited).  Shells are added in increasing
    order; summation stops once three consecutive non-empty shells each add
    less than SHELL_STOP of the running total.
    """
    c = math.pi / ratio
    limit = 64
    while True:
        counts = _shell_counts(limit)
        s = np.nonzero(counts)[0]
        s = s[s > 0]
        terms = counts[s] * _g(c * np.sqrt(s))
        acc = 0.0
        quiet = 0
        stop_index = None
        running = []
        for i, term in enumerate(terms):
            acc += term
            running.append(term)
            quiet = quiet + 1 if term <= SHELL_STOP * acc else 0
            if quiet == 3:
                stop_index = i
                break
        if stop_index is not None:
            break
        limit *= 4
    value = math.fsum(running)
    rho = math.sqrt(s[stop_index])
    bound = _lattice_tail_bound(c, rho) + 4 * EPS * value * len(running)
    return value, bound, stop_index + 1


def _lattice_tail_bound(c: float, rho: float) -> float:
    """Bound on sum_{|k| > rho} g(c |k|).

    For f >= f0: g(f) <= 4 e^(-2f) (1 + u0) / (f0 (1 - u0)^3), u0 = e^(-2 f0).
    Lattice points with s <= |k| < s + 1 number at most pi (2s + 1)(1 + sqrt 2).
    """
    f0 = c * rho
    u0 = math.exp(-2 * f0)
    pref = 4 * (1 + u0) / (f0 * (-math.expm1(-2 * f0)) ** 3) * math.pi * (1 + math.sqrt(2))
    x = math.exp(-2 * c)
    s0 = math.floor(rho)
    # sum_{s >= s0} (2s + 1) x^s, each shell bounded at its inner radius (the
    # first shell only contains points beyond rho, where e^(-2 c |k|) <= e^(-2 f0))
    first = (2 * s0 + 1) * math.exp(-2 * f0)
    rest = x ** (s0 + 1) * ((2 * s0 + 3) / (1 - x) + 2 * x / (1 - x) ** 2) if x < 1 else math.inf
    return pref * (first + rest)


def _waveguide_masses(b: float, ratio: float, field_: Field, span: float):
    """Transverse masses mu (units 1/b) with degeneracies, for 2 mu a <= 2 mu_1 a + span."""
    if field_ is Field.DIRICHLET:
        lo = 1
    else:
        lo = 0
    mu1 = math.pi * (math.sqrt(2) if field_ is Field.DIRICHLET else 1.0) / b
    x1 = 2 * mu1 * ratio * b
    rho_max = (x1 + span) / (2 * math.pi * ratio)
    n = int(math.ceil(rho_max)) + 1
    m = np.arange(lo, n + 1)
    mm, nn = np.meshgrid(m, m, indexing="ij")
    mm, nn = mm.ravel(), nn.ravel()
    keep = (mm * mm + nn * nn > 0) & (np.sqrt(mm * mm + nn * nn) <= rho_max)
    mm, nn = mm[keep], nn[keep]
    if field_ is Field.EM:
        deg = np.where((mm > 0) & (nn > 0), 2, 1)
    else:
        deg = np.ones_like(mm)
    mu = math.pi * np.sqrt(mm * mm + nn * nn) / b
    return mu, deg, x1, rho_max


def _waveguide_force(a: float, b: float, field_: Field, span: float = 45.0):
    """-(1/pi) sum g mu^2 sum_j h(2 j mu a) in units of e^(-x1), x1 = 2 mu_1 a.

    Returns (scaled_sum, scaled_bound, x1).  The force is
    -(scaled_sum) * exp(-x1) / pi, plus -pi/(24 a^2) for Neumann.
    """
    ratio = a / b
    mu, deg, x1, rho_max = _waveguide_masses(b, ratio, field_, span)
    xmax = x1 + span
    parts = []
    for m_val, g in zip(mu, deg):
        jmax = int(math.floor(xmax / (2 * m_val * a)))
        if jmax < 1:
            continue
        x = 2 * m_val * a * np.arange(1, jmax + 1)
        h_scaled = (k0e(x) + k1e(x) / x) * np.exp(x1 - x)
        parts.append(float(g * m_val**2 * np.sum(h_scaled)))
    scaled = math.fsum(parts)
    # tail: h(x) e^x <= (1 + 1/x1) k1e(x1) for x >= x1; j-tails and mode-tails bounded geometrically
    big_b = (1 + 1 / x1) * float(k1e(x1))
    geo = 1.0 / (-math.expm1(-x1))
    inner = float(np.sum(deg * mu**2)) * math.exp(-span) * geo
    kappa = 2 * math.pi * ratio
    outer = _mode_tail(kappa, rho_max, x1) * 2 * (math.pi / b) ** 2 * geo
    bound = big_b * (inner + outer) + 4 * EPS * scaled * max(len(parts), 1)
    return scaled, bound, x1


def _mode_tail(kappa: float, rho: float, x1: float) -> float:
    """Bound on sum over lattice points |k| > rho of (|k| + 1)^2 e^(x1 - kappa |k|).

    Shell s <= |k| < s + 1 holds at most pi (2s + 1)(1 + sqrt 2) points; the
    first shell is cut at rho, the others are bounded at their inner radius.
    """
    s = math.floor(rho)
    shell = math.pi * (1 + math.sqrt(2))
    total = shell * (2 * s + 1) * (s + 2) ** 2 * math.exp(x1 - kappa * rho)
    s += 1
    while True:
        term = shell * (2 * s + 1) * (s + 1) ** 2 * math.exp(x1 - kappa * s)
        total += term
        ratio = (2 * s + 3) * (s + 2) ** 2 / ((2 * s + 1) * (s + 1) ** 2) * math.exp(-kappa)
        if ratio < 0.9 and term < 1e-30 * max(total, 1e-300):
            return total + term * ratio / (1 - ratio)
        s += 1
        if s > 10**7:
            return math.inf


def _assemble(total, a4, a3, a2, const, bound, exp_bound, method, cfg, flags=(), **extra) -> ForceResult:
    """Build a ForceResult; ``exp_remainder`` is whatever the listed terms leave over.

    ``bound`` is for ``total``.  ``exp_bound`` is widened by the J-constant
    accuracy and rounding in the listed terms, which affect the breakdown but
    not necessarily the total.
    """
    known = [a4, a3, a2] + ([const] if const is not None else [])
    remainder = total - math.fsum(known)
    const_bound = abs(const) * J_RTOL if const is not None else 0.0
    rounding = 4 * EPS * math.fsum(abs(x) for x in known + [total])
    return ForceResult(
        total=total,
        term_a4=a4,
        term_a3=a3,
        term_a2=a2,
        term_const=const,
        exp_remainder=remainder,
        exp_bound=exp_bound + const_bound + rounding,
        bound=bound,
        f_parallel=f_parallel(cfg.area, cfg.a, cfg.field),
        method=method,
        field=cfg.field,
        a=cfg.a,
        area=cfg.area,
        flags=tuple(flags),
        **extra,
    )


def _sum_bound(parts, extra: float) -> float:
    return extra + 4 * EPS * math.fsum(abs(x) for x in parts)


def force_em_exact(cfg: PistonConfig, method: str = "auto") -> ForceResult:
    """Exact EM force for a square section, with a certified error bound."""
    b = cfg.require_square()
    cfg = replace(cfg, field=Field.EM)
    a = cfg.a
    ratio = a / b
    if method == "auto":
        method = "lattice" if ratio <= 1.0 else "waveguide"
    a4, a2, const = _em_terms(a, b)
    if method == "lattice":
        value, tail, shells = _lattice_exp_sum(ratio)
        pref = math.pi**2 * b * b / (16 * a**4)
        parts = [a4, a2, const, pref * value]
        total = math.fsum(parts)
        bound = _sum_bound(parts, pref * tail + abs(const) * J_RTOL)
        result = _assemble(total, a4, 0.0, a2, const, bound, pref * tail, "lattice", cfg, shells=shells)
        certified = total + result.bound < 0
        return replace(result, sign_certified=certified, log_abs_total=math.log(abs(total)) if total else -math.inf)
    if method == "waveguide":
        scaled, scaled_bound, x1 = _waveguide_force(a, b, Field.EM)
        log_abs = math.log(scaled / math.pi) - x1
        flags = []
        if x1 > MAX_WAVEGUIDE_EXPONENT:
            flags.append("underflow: total below double range, see log_abs_total")
        total = -scaled * math.exp(-x1) / math.pi
        bound = scaled_bound * math.exp(-x1) / math.pi
        result = _assemble(total, a4, 0.0, a2, const, bound, bound, "waveguide", cfg, flags)
        # every summand is negative, so the truncated sum already bounds F from above
        return replace(result, sign_certified=scaled > 0, log_abs_total=log_abs)
    raise ValueError(f"unknown method {method!r}")


def force_box(cfg: PistonConfig) -> ForceResult:
    """EM force of a single closed box: the exact piston force minus the region-II constant.

    An isolated box lacks the region above the piston, so the -J_C/(32 pi^2 A)
    term is absent.  The result is an artifact of ignoring that region and
    turns repulsive for a/b above about 0.785.
    """
    exact = force_em_exact(cfg)
    const = exact.term_const
    total = exact.total - const
    return replace(
        exact,
        total=total,
        term_const=0.0,
        bound=exact.bound + abs(const) * J_RTOL + 4 * EPS * (abs(exact.total) + abs(const)),
        flags=exact.flags + ("single-box artifact: region-II constant removed",),
        sign_certified=abs(total) > exact.bound,
        log_abs_total=math.log(abs(total)) if total else -math.inf,
        method=exact.method + "-box",
    )


def box_sign_change(b: float = 1.0, bracket: tuple[float, float] = (0.6, 1.0), xtol: float = 1e-12) -> tuple[float, tuple[float, float]]:
    """a/b where the single-box force changes sign; returns (root, bracket used)."""

    def fb(ratio: float) -> float:
        return force_box(PistonConfig(a=ratio * b, b=b)).total

    lo, hi = bracket
    if fb(lo) * fb(hi) > 0:
        raise ValueError(f"single-box force has the same sign at a/b={lo} and a/b={hi}")
    root = brentq(fb, lo, hi, xtol=xtol, rtol=4 * EPS)
    return root, bracket


# -- scalar ---------------------------------------------------------------------


def _remainder_estimate(a: float, b: float) -> float:
    """Order-of-magnitude size P e^(-2 pi b/a) / a^3 of the neglected exponential terms."""
    return 4 * b * math.exp(-2 * math.pi * b / a) / a**3


def force_scalar_asymptotic(cfg: PistonConfig) -> ForceResult:
    """Scalar force as powers of 1/a plus a constant; exponential terms only estimated."""
    b = cfg.require_square()
    if not cfg.field.is_scalar:
        raise ForceDomainError("force_scalar_asymptotic needs field scalar-d or scalar-n")
    eta = cfg.field.eta
    a = cfg.a
    area, perimeter = b * b, 4 * b
    j = j_constants().j_dirichlet if eta < 0 else j_constants().j_neumann
    a4 = -3 * ZETA4 * area / (16 * math.pi**2 * a**4)
    a3 = -eta * ZETA3 * perimeter / (32 * math.pi * a**3)
    a2 = -ZETA2 / (16 * math.pi * a * a)
    const = -j / (32 * math.pi**2 * area)
    parts = [a4, a3, a2, const]
    total = math.fsum(parts)
    estimate = _remainder_estimate(a, b)
    flags = ["remainder is an order estimate"]
    if a / b > 0.7:
        flags.append("non-rigorous: exponential remainder not small for a/b > 0.7")
    bound = _sum_bound(parts, estimate + abs(const) * J_RTOL)
    result = _assemble(total, a4, a3, a2, const, bound, estimate, "asymptotic", cfg, flags)
    return replace(result, exp_remainder=0.0)


def force_scalar_exact(cfg: PistonConfig) -> ForceResult:
    """Exact scalar force for a square section from the waveguide mode sum.

    Neumann includes the massless transverse mode, which gives -pi/(24 a^2).
    The breakdown reuses the asymptotic terms and puts the rest into
    ``exp_remainder``.
    """
    b = cfg.require_square()
    asym = force_scalar_asymptotic(cfg)
    a = cfg.a
    scaled, scaled_bound, x1 = _waveguide_force(a, b, cfg.field)
    massive = -scaled * math.exp(-x1) / math.pi
    parts = [massive]
    if cfg.field is Field.NEUMANN:
        parts.append(-math.pi / (24 * a * a))
    total = math.fsum(parts)
    bound = scaled_bound * math.exp(-x1) / math.pi
    bound = _sum_bound(parts, bound)
    result = _assemble(total, asym.term_a4, asym.term_a3, asym.term_a2, asym.term_const, bound, bound, "waveguide", cfg)
    return replace(result, sign_certified=total + result.bound < 0, log_abs_total=math.log(abs(total)))


# -- arbitrary section ------------------------------------------------------------


def force_arbitrary_section(cfg: PistonConfig) -> ForceResult:
    """Power-law terms for any cross section from A, P and chi; the constant is unknown."""
    cs = cfg.section
    chi = geometry.chi(cs).chi
    a = cfg.a
    area, perimeter = cs.area, cs.perimeter
    if cfg.field is Field.EM:
        a4 = -3 * ZETA4 * area / (8 * math.pi**2 * a**4)
        a3 = 0.0
        a2 = ZETA2 * (1 - 2 * chi) / (4 * math.pi * a * a)
    else:
        a4 = -3 * ZETA4 * area / (16 * math.pi**2 * a**4)
        a3 = -cfg.field.eta * ZETA3 * perimeter / (32 * math.pi * a**3)
        a2 = -ZETA2 * chi / (4 * math.pi * a * a)
    total = math.fsum([a4, a3, a2])
    flags = ("constant term unknown for a general cross section",) + cs.flags
    result = _assemble(total, a4, a3, a2, None, math.inf, math.inf, "asymptotic-section", cfg, flags)
    return replace(result, exp_remainder=0.0, exp_bound=math.inf, bound=math.inf)


def force(cfg: PistonConfig, kind: str = "auto") -> ForceResult:
    """Dispatch: exact where available (square section), asymptotic otherwise."""
    if kind == "auto":
        if cfg.square_side is None:
            kind = "section"
        else:
            kind = "exact"
    if kind == "exact":
        if cfg.field is Field.EM:
            return force_em_exact(cfg)
        if cfg.a / cfg.require_square() < SCALAR_WAVEGUIDE_MIN_RATIO:
            # mode sum costs ~ (b/a)^3 here while the exponential terms are below 1e-20 relative
            return force_scalar_asymptotic(cfg)
        return force_scalar_exact(cfg)
    if kind == "asymptotic":
        if cfg.field is Field.EM:
            b = cfg.require_square()
            a4, a2, const = _em_terms(cfg.a, b)
            parts = [a4, a2, const]
            total = math.fsum(parts)
            exact = force_em_exact(cfg)
            # the omitted terms are known here: their size is the distance to the exact force
            omitted = abs(exact.total - total) + exact.bound
            return _assemble(total, a4, 0.0, a2, const, omitted, omitted, "asymptotic", cfg, ("exponential terms omitted",))
        return force_scalar_asymptotic(cfg)
    if kind == "section":
        return force_arbitrary_section(cfg)
    if kind == "box":
        return force_box(cfg)
    raise ValueError(f"unknown force kind {kind!r}")


# -- normalized curves ------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    ratio: float
    exact: float
    corr1: float
    corr2: float
    box: float
    exact_bound: float


def normalized_curves(ratio: float, b: float = 1.0) -> CurvePoint:
    """EM force and its truncated expansions at a/b = ratio, all divided by F_par."""
    exact = force_em_exact(PistonConfig(a=ratio * b, b=b))
    fpar = exact.f_parallel
    corr1 = (exact.term_a4 + exact.term_a2) / fpar
    corr2 = (exact.term_a4 + exact.term_a2 + exact.term_const) / fpar
    box = (exact.total - exact.term_const) / fpar
    return CurvePoint(ratio, exact.normalized, corr1, corr2, box, exact.normalized_bound)
