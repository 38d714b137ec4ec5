"""Exact spectra of the rectangular cavity and exponentially regulated sums.

Frequencies are omega = pi * sqrt((n/a)^2 + (m/b)^2 + (l/c)^2).

* Dirichlet: n, m, l >= 1, one mode each.
* Neumann:   n, m, l >= 0 except (0, 0, 0), one mode each.  The constant
  mode has omega = 0 and carries no energy, so it is left out.
* EM:        two polarisations if no index vanishes, one if exactly one
  vanishes, none otherwise.

Regulated energies use E(Lambda) = 1/2 sum deg * omega * exp(-omega/Lambda).
Sums are accumulated row by row in index order with compensated addition,
so results are reproducible to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .fields import Field

# Visiting more lattice points than this raises ResourceBoundError.
MAX_LATTICE_POINTS = 3_000_000_000
# Materialised mode lists are capped separately (8 bytes x 5 arrays per mode).
MAX_LISTED_MODES = 20_000_000

_ROW = {Field.DIRICHLET: 0, Field.NEUMANN: 1, Field.EM: 2}


class ResourceBoundError(RuntimeError):
    """The requested cutoff needs more modes than the configured bound."""


class FitConditionError(RuntimeError):
    """The Weyl fit design matrix is too ill-conditioned to trust."""


@dataclass(frozen=True)
class BoxDims:
    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not all(0 < x < math.inf for x in self.as_tuple()):
            raise ValueError(f"box edges must be finite with a, b, c > 0, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def volume(self) -> float:
        return self.a * self.b * self.c

    @property
    def surface(self) -> float:
        return 2 * (self.a * self.b + self.b * self.c + self.a * self.c)

    @property
    def edge_length(self) -> float:
        return 4 * (self.a + self.b + self.c)

    @classmethod
    def of(cls, dims: "BoxDims | Sequence[float]") -> "BoxDims":
        return dims if isinstance(dims, BoxDims) else cls(*map(float, dims))


@dataclass(frozen=True)
class ModeList:
    omega: np.ndarray
    degeneracy: np.ndarray
    indices: np.ndarray  # shape (n_modes, 3)

    def __len__(self) -> int:
        return len(self.omega)

    @property
    def total_degeneracy(self) -> int:
        return int(self.degeneracy.sum())


@dataclass(frozen=True)
class RegulatedSpectrum:
    dims: BoxDims
    field: Field
    cutoff: float
    regulated_energy: float
    mode_count_used: int
    truncation_bound: float
    omega_max: float


def em_degeneracy(n: int, m: int, l: int) -> int:
    zeros = (n == 0) + (m == 0) + (l == 0)
    return 2 if zeros == 0 else 1 if zeros == 1 else 0


def _lattice_point_bound(dims: BoxDims, omega: float) -> float:
    """Upper bound on #{(n,m,l) >= 0 : omega_nml <= omega}."""
    a, b, c = dims.as_tuple()
    return (omega * a / math.pi + 1) * (omega * b / math.pi + 1) * (omega * c / math.pi + 1)


def enumerate_modes(dims: BoxDims | Sequence[float], field: Field | str, omega_max: float) -> ModeList:
    """All modes with omega <= omega_max, sorted by frequency then index."""
    dims = BoxDims.of(dims)
    field = Field.parse(field)
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    if _lattice_point_bound(dims, omega_max) > MAX_LISTED_MODES:
        raise ResourceBoundError(
            f"omega_max={omega_max} exceeds the listing bound MAX_LISTED_MODES={MAX_LISTED_MODES}"
        )
    a, b, c = dims.as_tuple()
    lim = [int(math.floor(omega_max * d / math.pi)) for d in (a, b, c)]
    n, m, l = np.meshgrid(*(np.arange(k + 1) for k in lim), indexing="ij")
    n, m, l = n.ravel(), m.ravel(), l.ravel()
    omega = math.pi * np.sqrt((n / a) ** 2 + (m / b) ** 2 + (l / c) ** 2)
    zeros = (n == 0).astype(int) + (m == 0) + (l == 0)
    if field is Field.DIRICHLET:
        deg = np.where(zeros == 0, 1, 0)
    elif field is Field.NEUMANN:
        deg = np.where(zeros < 3, 1, 0)
    else:
        deg = np.select([zeros == 0, zeros == 1], [2, 1], 0)
    keep = (deg > 0) & (omega <= omega_max)
    order = np.lexsort((l[keep], m[keep], n[keep], omega[keep]))
    idx = np.stack([n[keep], m[keep], l[keep]], axis=1)[order]
    return ModeList(omega[keep][order], deg[keep][order], idx)


def tower_modes(length: float, omega_max: float) -> np.ndarray:
    """Frequencies k*pi/length, k >= 1, of a 1-D interval."""
    kmax = int(math.floor(omega_max * length / math.pi))
    return math.pi * np.arange(1, kmax + 1) / length


@njit(cache=True)
def _mode_sums(a, b, c, omega_max, inv_cutoffs):
    """Compensated sums of deg * omega * exp(-omega * inv_cutoff).

    One pass serves all three fields: row 0 Dirichlet, 1 Neumann, 2 EM.
    Also returns the mode counts (with degeneracy) per field.
    """
    nl = inv_cutoffs.shape[0]
    total = np.zeros((3, nl))
    comp = np.zeros((3, nl))
    row = np.zeros((3, nl))
    counts = np.zeros(3, dtype=np.int64)
    pi = np.pi
    w2max = (omega_max / pi) ** 2
    nmax = int(np.floor(omega_max * a / pi))
    for n in range(0, nmax + 1):
        qn = (n / a) ** 2
        rem_n = w2max - qn
        if rem_n < 0:
            break
        mmax = int(np.floor(np.sqrt(rem_n) * b))
        for m in range(0, mmax + 1):
            qm = qn + (m / b) ** 2
            rem = w2max - qm
            if rem < 0:
                break
            lmax = int(np.floor(np.sqrt(rem) * c))
            row[:, :] = 0.0
            zeros_nm = (n == 0) + (m == 0)
            for l in range(0, lmax + 1):
                zeros = zeros_nm + (l == 0)
                if zeros == 3:
                    continue
                w = pi * np.sqrt(qm + (l / c) ** 2)
                if w > omega_max:
                    continue
                deg_em = 2 if zeros == 0 else (1 if zeros == 1 else 0)
                counts[1] += 1
                counts[2] += deg_em
                if zeros == 0:
                    counts[0] += 1
                for j in range(nl):
                    e = w * np.exp(-w * inv_cutoffs[j])
                    row[1, j] += e
                    if deg_em:
                        row[2, j] += deg_em * e
                    if zeros == 0:
                        row[0, j] += e
            for k in range(3):
                for j in range(nl):
                    # Neumaier compensated accumulation of the row total
                    t = total[k, j] + row[k, j]
                    if abs(total[k, j]) >= abs(row[k, j]):
                        comp[k, j] += (total[k, j] - t) + row[k, j]
                    else:
                        comp[k, j] += (row[k, j] - t) + total[k, j]
                    total[k, j] = t
    return 0.5 * (total + comp), counts


def _tail_bound(dims: BoxDims, field: Field, cutoff: float, omega_max: float) -> float:
    """Certified bound on 1/2 sum_{omega > omega_max} deg * omega * exp(-omega/cutoff).

    With N(w) <= g * prod_i (w d_i/pi + 1) and f(w) = w exp(-w/cutoff)
    decreasing for w > cutoff, the tail is at most int_W^inf N_hi(w) (-f'(w)) dw.
    """
    if omega_max <= cutoff:
        return math.inf
    g = 2.0 if field is Field.EM else 1.0
    a, b, c = (d / math.pi for d in dims.as_tuple())
    # polynomial coefficients of (a w + 1)(b w + 1)(c w + 1)
    poly = [1.0, a + b + c, a * b + b * c + a * c, a * b * c]
    x = omega_max / cutoff

    def upper_gamma(k: int) -> float:
        # int_W^inf w^k exp(-w/L) dw = L^(k+1) k! exp(-x) sum_{i<=k} x^i / i!
        return cutoff ** (k + 1) * math.factorial(k) * math.exp(-x) * sum(x**i / math.factorial(i) for i in range(k + 1))

    total = 0.0
    for k, coef in enumerate(poly):
        total += coef * (upper_gamma(k + 1) / cutoff - upper_gamma(k))
    return 0.5 * g * total


def _weyl_estimate(dims: BoxDims, field: Field, cutoff: float) -> float:
    factor = 2.0 if field is Field.EM else 1.0
    return factor * 3 * dims.volume * cutoff**4 / (2 * math.pi**2)


def regulated_spectra(
    dims: BoxDims | Sequence[float],
    cutoffs: Sequence[float],
    rtol: float = 1e-10,
    max_points: float = MAX_LATTICE_POINTS,
) -> dict[Field, list[RegulatedSpectrum]]:
    """Regulated energies of all three fields for several cutoffs in one lattice pass.

    The enumeration stops at omega_max = x * max(cutoffs) with x grown until
    the certified tail is below ``rtol`` times the computed sum for every
    field and cutoff.
    """
    dims = BoxDims.of(dims)
    cutoffs = np.asarray(cutoffs, dtype=float)
    if cutoffs.ndim != 1 or len(cutoffs) == 0 or not np.all(cutoffs > 0):
        raise ValueError("cutoffs must be a non-empty list of positive numbers")
    top = float(cutoffs.max())
    x = 8.0
    while _tail_bound(dims, Field.EM, top, x * top) > 0.25 * rtol * _weyl_estimate(dims, Field.DIRICHLET, top) and x < 200:
        x += 1.0
    while True:
        omega_max = x * top
        points = _lattice_point_bound(dims, omega_max)
        if points > max_points:
            raise ResourceBoundError(
                f"cutoff {top} needs ~{points:.3g} lattice points, above the bound max_points={max_points:.3g}"
            )
        sums, counts = _mode_sums(*dims.as_tuple(), omega_max, 1.0 / cutoffs)
        bounds = {f: [_tail_bound(dims, f, lam, omega_max) for lam in cutoffs] for f in Field}
        # a vanishing sum (tiny cutoff) only needs an absolute bound below rtol
        if all(
            bd <= rtol * max(s, 1.0) for f in Field for bd, s in zip(bounds[f], sums[_ROW[f]])
        ):
            break
        x += 4.0
    return {
        f: [
            RegulatedSpectrum(dims, f, float(lam), float(s), int(counts[_ROW[f]]), float(bd), omega_max)
            for lam, s, bd in zip(cutoffs, sums[_ROW[f]], bounds[f])
        ]
        for f in Field
    }


def regulated_energies(
    dims: BoxDims | Sequence[float],
    field: Field | str,
    cutoffs: Sequence[float],
    rtol: float = 1e-10,
    max_points: float = MAX_LATTICE_POINTS,
) -> list[RegulatedSpectrum]:
    """Regulated energies of one field for several cutoffs."""
    return regulated_spectra(dims, cutoffs, rtol=rtol, max_points=max_points)[Field.parse(field)]


def regulated_energy(
    dims: BoxDims | Sequence[float],
    field: Field | str,
    cutoff: float,
    rtol: float = 1e-10,
    max_points: float = MAX_LATTICE_POINTS,
) -> RegulatedSpectrum:
    """1/2 sum deg * omega * exp(-omega/cutoff) with a certified truncation bound.

    Cost grows like V * (32 * cutoff)^3 / (6 pi^2) lattice points; requests
    above ``max_points`` raise ResourceBoundError.
    """
    return regulated_energies(dims, field, [cutoff], rtol=rtol, max_points=max_points)[0]


def tower_energy(length: float, cutoffs: Sequence[float] | float, rtol: float = 1e-12) -> np.ndarray:
    """Regulated 1-D energy 1/2 sum_k omega_k exp(-omega_k/Lambda) by direct summation."""
    lams = np.atleast_1d(np.asarray(cutoffs, dtype=float))
    omega_max = max(40.0, -math.log(rtol) + 10) * lams.max() + math.pi / length
    w = tower_modes(length, omega_max)
    return np.array([0.5 * math.fsum(w * np.exp(-w / lam)) for lam in lams])


def tower_energy_closed(length: float, cutoff: float) -> float:
    """Closed form (pi/2d) q/(1-q)^2, q = exp(-pi/(d Lambda))."""
    t = math.pi / (length * cutoff)
    return math.pi / (2 * length) / (4 * math.sinh(0.5 * t) ** 2)


@dataclass(frozen=True)
class DecompositionCheck:
    cutoff: float
    em: float
    dirichlet: float
    neumann: float
    towers: tuple[float, float, float]
    residual: float
    relative: float
    bound: float


def decomposition_residual(dims: BoxDims | Sequence[float], cutoff: float, rtol: float = 1e-10) -> DecompositionCheck:
    """E_EM - (E_D + E_N - sum_i E_1(d_i)) for the regulated spectra."""
    dims = BoxDims.of(dims)
    spectra = regulated_spectra(dims, [cutoff], rtol)
    em, d, n = (spectra[f][0] for f in (Field.EM, Field.DIRICHLET, Field.NEUMANN))
    towers = tuple(float(tower_energy(length, cutoff)[0]) for length in dims.as_tuple())
    rhs = math.fsum([d.regulated_energy, n.regulated_energy, *(-t for t in towers)])
    residual = em.regulated_energy - rhs
    return DecompositionCheck(
        cutoff=cutoff,
        em=em.regulated_energy,
        dirichlet=d.regulated_energy,
        neumann=n.regulated_energy,
        towers=towers,
        residual=residual,
        relative=abs(residual) / abs(em.regulated_energy),
        bound=em.truncation_bound + d.truncation_bound + n.truncation_bound,
    )


def count_modes(dims: BoxDims | Sequence[float], field: Field | str, omega: float) -> int:
    """Number of modes (with degeneracy) at or below omega."""
    dims = BoxDims.of(dims)
    field = Field.parse(field)
    _, counts = _mode_sums(*dims.as_tuple(), float(omega), np.zeros(1))
    return int(counts[_ROW[field]])


def weyl_count(dims: BoxDims | Sequence[float], field: Field | str, omega: float) -> float:
    """Leading Weyl term V omega^3 / (6 pi^2) per polarisation."""
    dims = BoxDims.of(dims)
    pol = 2 if Field.parse(field) is Field.EM else 1
    return pol * dims.volume * omega**3 / (6 * math.pi**2)


# -- Weyl coefficient fit ---------------------------------------------------


@dataclass(frozen=True)
class WeylFit:
    dims: BoxDims
    field: Field
    powers: tuple[int, ...]
    coefficients: dict[int, float]
    stderr: dict[int, float]
    residual: float  # max |E - fit| over the grid
    rms_residual: float
    condition: float
    cutoffs: tuple[float, ...]
    energies: tuple[float, ...]

    @property
    def volume_coeff(self) -> float:
        return self.coefficients.get(4, 0.0)

    @property
    def surface_coeff(self) -> float:
        return self.coefficients.get(3, 0.0)

    @property
    def edge_coeff(self) -> float:
        return self.coefficients.get(2, 0.0)

    @property
    def constant(self) -> float:
        return self.coefficients.get(0, 0.0)


def weyl_prediction(dims: BoxDims | Sequence[float], field: Field | str) -> dict[int, float]:
    """Lambda^4, Lambda^3, Lambda^2 coefficients implied by the boundary geometry.

    For the exponential regulator the heat-kernel terms of the box map to
    3V/(2 pi^2) Lambda^4 + eta S/(8 pi) Lambda^3 + L/(32 pi) Lambda^2 for a
    scalar.  EM = D + N - three 1-D towers, each tower adding -d Lambda^2/(2 pi).
    """
    dims = BoxDims.of(dims)
    field = Field.parse(field)
    vol = 3 * dims.volume / (2 * math.pi**2)
    edge = dims.edge_length / (32 * math.pi)
    if field is Field.EM:
        return {4: 2 * vol, 3: 0.0, 2: 2 * edge - (dims.a + dims.b + dims.c) / (2 * math.pi)}
    return {4: vol, 3: field.eta * dims.surface / (8 * math.pi), 2: edge}


def fit_weyl_coefficients(
    dims: BoxDims | Sequence[float],
    field: Field | str,
    cutoffs: Sequence[float],
    powers: Sequence[int] = (4, 3, 2, 1, 0),
    max_condition: float = 1e12,
    rtol: float = 1e-12,
) -> WeylFit:
    """Least-squares fit of E(Lambda) to sum_k c_k Lambda^k over the given grid.

    ``powers`` defaults to 4..0; negative powers may be appended to absorb the
    O(Lambda^-2) corrections when the constant term itself is wanted.
    """
    dims = BoxDims.of(dims)
    field = Field.parse(field)
    lams = np.sort(np.asarray(cutoffs, dtype=float))
    powers = tuple(int(p) for p in powers)
    if len(lams) < 8:
        raise ValueError("Weyl fit needs at least 8 cutoffs")
    if lams[-1] < 4 * lams[0]:
        raise ValueError("Weyl fit cutoffs must span at least a factor of 4")
    if len(lams) <= len(powers):
        raise ValueError("Weyl fit needs more cutoffs than fitted powers")
    spectra = regulated_energies(dims, field, lams, rtol=rtol)
    energy = np.array([s.regulated_energy for s in spectra])
    scale = lams[-1]
    design = np.stack([(lams / scale) ** p for p in powers], axis=1)
    col_norm = np.linalg.norm(design, axis=0)
    scaled = design / col_norm
    condition = float(np.linalg.cond(scaled))
    if condition > max_condition:
        raise FitConditionError(f"Weyl fit design matrix condition number {condition:.3g} exceeds {max_condition:.3g}")
    coef_scaled, *_ = np.linalg.lstsq(scaled, energy, rcond=None)
    fitted = scaled @ coef_scaled
    resid = energy - fitted
    dof = max(len(lams) - len(powers), 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(scaled.T @ scaled)
    coefficients = {}
    stderr = {}
    for i, p in enumerate(powers):
        unit = col_norm[i] * scale**p
        coefficients[p] = float(coef_scaled[i] / unit)
        stderr[p] = float(math.sqrt(max(cov[i, i], 0.0)) / unit)
    return WeylFit(
        dims=dims,
        field=field,
        powers=powers,
        coefficients=coefficients,
        stderr=stderr,
        residual=float(np.max(np.abs(resid))),
        rms_residual=float(math.sqrt(float(resid @ resid) / len(lams))),
        condition=condition,
        cutoffs=tuple(float(x) for x in lams),
        energies=tuple(float(e) for e in energy),
    )


def finite_part(
    dims: BoxDims | Sequence[float],
    field: Field | str,
    cutoffs: Sequence[float],
    inverse_powers: int = 3,
) -> WeylFit:
    """Fit including Lambda^-2 ... Lambda^-2k corrections; ``.constant`` is the finite energy."""
    powers = (4, 3, 2, 1, 0) + tuple(-2 * k for k in range(1, inverse_powers + 1))
    return fit_weyl_coefficients(dims, field, cutoffs, powers=powers)
