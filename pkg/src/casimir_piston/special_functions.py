"""Zeta-type constants: Riemann zeta, Dirichlet beta, 2-D Epstein zeta, J constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ._lattice import LatticeSum, lattice_reduce, radial_lattice_sum

# B_{2j} / (2j)!  for j = 1..8
_BERNOULLI_OVER_FACTORIAL = (
    1 / 12,
    -1 / 720,
    1 / 30240,
    -1 / 1209600,
    1 / 47900160,
    -691 / 1307674368000,
    1 / 74724249600,
    -3617 / 10670622842880000,
)


def hurwitz_zeta(s: float, q: float, terms: int = 40) -> float:
    """Hurwitz zeta sum_{k>=0} (k + q)^-s for real s > 1, q > 0 (Euler-Maclaurin)."""
    if s <= 1:
        raise ValueError(f"Hurwitz zeta series diverges for s={s} <= 1")
    if q <= 0:
        raise ValueError("q must be positive")
    head = math.fsum((k + q) ** -s for k in range(terms))
    x = terms + q
    tail = x ** (1 - s) / (s - 1) + 0.5 * x**-s
    rising = s  # s (s+1) ... (s + 2j - 2)
    power = x ** (-s - 1)
    for j, coef in enumerate(_BERNOULLI_OVER_FACTORIAL, start=1):
        tail += coef * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= x * x
    return head + tail


def riemann_zeta(s: int) -> float:
    """Riemann zeta at an integer s >= 2.

    Even arguments use the Bernoulli closed form; odd ones the direct series
    with an Euler-Maclaurin tail.
    """
    if int(s) != s:
        raise ValueError("riemann_zeta is defined here for integer arguments only")
    s = int(s)
    if s <= 1:
        raise ValueError(f"zeta({s}) is outside the convergent domain s >= 2")
    if s % 2 == 0:
        n = s // 2
        bern = _bernoulli(s)
        return (-1) ** (n + 1) * bern * (2 * math.pi) ** s / (2 * math.factorial(s))
    return hurwitz_zeta(float(s), 1.0)


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> float:
    from fractions import Fraction

    b = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        b[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            b[j - 1] = j * (b[j - 1] - b[j])
    return float(b[0])


def dirichlet_beta(s: float) -> float:
    """Dirichlet beta sum_{k>=0} (-1)^k (2k+1)^-s for s > 1."""
    return 4.0**-s * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75))


def catalan() -> float:
    return dirichlet_beta(2.0)


MAX_EPSTEIN_POINTS = 2e8


@dataclass(frozen=True)
class LatticeSumSpec:
    """Weights and exponent of Z_2(x1, x2; n) = sum' (x1 m^2 + x2 n^2)^(-n/2)."""

    x1: float
    x2: float
    n: float
    eps: float = 1e-10

    def __post_init__(self) -> None:
        if not (self.x1 > 0 and self.x2 > 0):
            raise ValueError("Epstein weights must be positive")
        if not self.n > 2:
            raise ValueError(f"Epstein zeta Z_2(.;{self.n}) diverges: exponent must exceed 2")
        if not self.eps > 0:
            raise ValueError("tolerance must be positive")

    @property
    def spacings(self) -> tuple[float, float]:
        return (math.sqrt(self.x1), math.sqrt(self.x2))


def _epstein_radius(spec: LatticeSumSpec, target: float) -> float:
    # leading half-width of the radial tail: 2*pi*delta*n/(Vc (n-1)) R^(1-n)
    s1, s2 = spec.spacings
    delta = 0.5 * math.hypot(s1, s2)
    coef = 2 * math.pi * delta * spec.n / (s1 * s2 * (spec.n - 1))
    radius = (coef / target) ** (1.0 / (spec.n - 1))
    return max(radius, 4 * delta, 4 * max(s1, s2))


def epstein_sum(spec: LatticeSumSpec) -> LatticeSum:
    """Shell-truncated Z_2 with a certified tail; the returned ``bound`` <= eps * value."""
    # Z_2 >= 2 * min(x)^(-n/2) * zeta(n) > 2 * min(x)^(-n/2): a safe scale for the target
    scale = 2 * min(spec.x1, spec.x2) ** (-0.5 * spec.n)
    radius = _epstein_radius(spec, 0.5 * spec.eps * scale)
    points = math.pi * radius**2 / math.prod(spec.spacings)
    if points > MAX_EPSTEIN_POINTS:
        raise ValueError(
            f"Z_2(.;{spec.n}) to eps={spec.eps:g} needs ~{points:.2g} lattice points "
            f"(limit {MAX_EPSTEIN_POINTS:.0e}); loosen eps or raise n"
        )
    while True:
        result = radial_lattice_sum(spec.spacings, spec.n, radius)
        if result.bound <= spec.eps * result.value:
            return result
        radius *= 1.5


def epstein_zeta_2(spec: LatticeSumSpec) -> float:
    """Z_2(x1, x2; n) to relative accuracy ``spec.eps``."""
    return epstein_sum(spec).value


def epstein_partial_sums(spec: LatticeSumSpec, radii) -> list[float]:
    """Explicit (tail-free) shell sums for each truncation radius."""
    out = []
    for radius in radii:
        value, _ = lattice_reduce(spec.spacings, float(radius), lambda sq, t2: t2 ** (-0.5 * spec.n))
        out.append(value)
    return out


@dataclass(frozen=True)
class JConstants:
    j_dirichlet: float
    j_neumann: float
    j_em: float
    epstein: float


@lru_cache(maxsize=1)
def j_constants() -> JConstants:
    """J_eta = Z_2(1,1;4) + 2 pi eta zeta(3) and J_C = J_-1 + J_+1."""
    z = epstein_zeta_2(LatticeSumSpec(1.0, 1.0, 4.0, eps=1e-10))
    edge = 2 * math.pi * riemann_zeta(3)
    jd = z - edge
    jn = z + edge
    return JConstants(j_dirichlet=jd, j_neumann=jn, j_em=jd + jn, epstein=z)


def j_eta(eta: int) -> float:
    """J for phase eta = -1 (Dirichlet) or +1 (Neumann)."""
    if eta not in (-1, 1):
        raise ValueError(f"eta must be -1 or +1, got {eta!r}")
    j = j_constants()
    return j.j_dirichlet if eta < 0 else j.j_neumann
