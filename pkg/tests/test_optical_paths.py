import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_piston import forces, optical_paths, spectrum
from casimir_piston.fields import Field
from casimir_piston.forces import PistonConfig
from casimir_piston.special_functions import j_eta


def brute_families(dims, radius):
    """(mirror set, k) pairs with 0 < |t| <= radius by plain loops."""
    out = set()
    for q in range(3):
        for mirror in itertools.combinations(range(3), q):
            free = [i for i in range(3) if i not in mirror]
            ranges = [range(-int(radius / (2 * dims[i])) - 1, int(radius / (2 * dims[i])) + 2) for i in free]
            for ks in itertools.product(*ranges):
                t2 = sum((2 * k * dims[i]) ** 2 for k, i in zip(ks, free))
                if 0 < t2 <= radius**2:
                    k = [0, 0, 0]
                    for i, kk in zip(free, ks):
                        k[i] = kk
                    out.add((mirror, tuple(k)))
    return out


@pytest.mark.parametrize("dims, radius", [((1, 1, 1), 6.5), ((1, 2, 3), 9.0), ((0.4, 1.1, 0.9), 4.1)])
def test_enumeration_is_complete(dims, radius):
    fams = optical_paths.enumerate_path_families(dims, -1, radius)
    got = [(f.reflecting_axes, f.image_vector) for f in fams]
    assert len(got) == len(set(got))
    assert set(got) == brute_families(dims, radius)
    assert [f.length for f in fams] == sorted(f.length for f in fams)


def test_shortest_families_bounce_along_the_shortest_edge():
    fams = optical_paths.enumerate_path_families((1, 2, 3), -1, 2.5)
    assert all(f.length == 2.0 and abs(f.image_vector[0]) == 1 for f in fams)
    by_mirror = {(f.reflecting_axes, f.image_vector[0]): f for f in fams}
    periodic = by_mirror[(), 1]
    assert (periodic.kind, periodic.n_s, periodic.n_c, periodic.phase) == ("periodic", 2, 0, 1)
    side = by_mirror[(1,), 1]
    assert (side.kind, side.n_s, side.phase) == ("side", 3, -1)
    edge = by_mirror[(1, 2), 1]
    assert (edge.kind, edge.n_s, edge.phase) == ("edge", 4, 1)
    assert Counter(f.kind for f in fams) == {"periodic": 2, "side": 4, "edge": 2}


def test_no_divergent_or_corner_families():
    fams = optical_paths.enumerate_path_families((1, 1.5, 2), 1, 12.0)
    assert all(f.length > 0 for f in fams)
    assert all(len(f.reflecting_axes) <= 2 for f in fams)
    assert "corner" not in {f.kind for f in fams}


def test_horizontal_classification():
    for f in optical_paths.enumerate_path_families((1, 1, 1), -1, 5.0):
        horizontal = 0 not in f.reflecting_axes and f.image_vector[0] == 0
        assert (f.kind == "horizontal") == horizontal


@settings(max_examples=25, deadline=None)
@given(
    dims=st.tuples(st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(0.5, 2.0)),
    radius=st.floats(3.0, 8.0),
)
def test_phase_rule(dims, radius):
    d = optical_paths.enumerate_path_families(dims, -1, radius)
    n = optical_paths.enumerate_path_families(dims, 1, radius)
    for fd, fn in zip(d, n):
        q = len(fd.reflecting_axes)
        assert fd.phase == (-1) ** (fd.n_s + fd.n_c) == (-1) ** q
        assert fn.phase == 1
        # the phase multiplies a field-independent weight
        assert fd.energy == pytest.approx(fd.phase * fn.energy, rel=1e-15)
        assert fd.n_s == 2 * sum(abs(k) for k in fd.image_vector) + q


def test_family_budget():
    with pytest.raises(ValueError, match="max_families"):
        optical_paths.enumerate_path_families((1, 1, 1), -1, 60.0, max_families=1000)
    with pytest.raises(ValueError, match="eta"):
        optical_paths.enumerate_path_families((1, 1, 1), "em", 5.0)


@pytest.mark.parametrize("eta", [-1, 1])
def test_truncated_energy_converges_within_bounds(eta):
    dims = (1.0, 1.3, 1.7)
    results = [optical_paths.path_energy(dims, eta, r) for r in (10.0, 20.0, 40.0, 80.0)]
    bounds = [r.truncation_bound for r in results]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    for r1, r2 in zip(results, results[1:]):
        assert abs(r1.value - r2.value) <= r1.truncation_bound + r2.truncation_bound


def test_family_sum_matches_energy():
    dims = (1.0, 1.3, 1.7)
    total = optical_paths.path_energy(dims, -1, 200.0)
    errors = []
    for radius in (10.0, 20.0, 40.0):
        fams = optical_paths.enumerate_path_families(dims, -1, radius)
        errors.append(abs(total.value - math.fsum(f.energy for f in fams)))
    # the periodic families dominate the tail, which falls off like 1/R
    for e1, e2 in zip(errors, errors[1:]):
        assert 0.3 < e2 / e1 < 0.7
    assert errors[-1] < 0.05 * abs(total.value)


def test_radius_must_cover_short_families():
    with pytest.raises(ValueError, match="max_path_length"):
        optical_paths.path_energy((1, 2, 3), -1, 3.0)


@pytest.mark.parametrize("eta", [-1, 1])
def test_horizontal_density_gives_the_constant_force_term(eta):
    for b in (1.0, 2.5):
        h = optical_paths.horizontal_path_energy_density((7.0, b, b), eta)
        expected = -j_eta(eta) / (32 * math.pi**2 * b * b)
        assert h.value == pytest.approx(expected, rel=1e-9)
        assert h.truncation_bound <= 1e-9 * abs(h.value)


def test_em_box_energy_is_scalar_sum_plus_towers():
    dims, r = (1.0, 1.2, 1.5), 60.0
    d = optical_paths.path_energy(dims, "scalar-d", r)
    n = optical_paths.path_energy(dims, "scalar-n", r)
    em = optical_paths.path_energy(dims, "em", r)
    assert em.value == pytest.approx(d.value + n.value + sum(math.pi / (24 * x) for x in dims), rel=1e-13)


def test_path_energy_agrees_with_spectral_finite_part():
    """Shape dependence of the finite energy: path sum against the fitted spectral constant."""
    grid_factor = np.geomspace(2.0, 20.0, 24)
    boxes = [(1.0, 1.0, 1.0), (1.0, 1.0, 1.5)]
    for f in Field:
        spec = [spectrum.finite_part(d, f, grid_factor / min(d), inverse_powers=4).constant for d in boxes]
        path = [optical_paths.path_energy(d, f, 300.0) for d in boxes]
        diff_spec = spec[1] - spec[0]
        diff_path = path[1].value - path[0].value
        assert abs(diff_path - diff_spec) <= 1e-4 * abs(diff_spec)


@pytest.mark.parametrize("eta", [-1, 1])
@pytest.mark.parametrize("ratio", [0.2, 0.5])
def test_finite_difference_matches_closed_form(eta, ratio):
    analytic = optical_paths.piston_path_force(ratio, 1.0, eta=eta)
    fd = optical_paths.piston_path_force(ratio, 1.0, eta=eta, method="finite-difference")
    assert abs(fd.total - analytic.total) <= fd.derivative_error + 1e-10 * abs(analytic.total)
    assert fd.derivative_error < 1e-4 * abs(analytic.total)


@pytest.mark.parametrize("eta", [-1, 1])
def test_path_force_matches_exact_scalar_force(eta):
    # at a/b = 0.9 the exponential terms matter; the path sum keeps them
    ratio = 0.9
    path = optical_paths.piston_path_force(ratio, 1.0, eta=eta)
    exact = forces.force_scalar_exact(PistonConfig(a=ratio, b=1.0, field=Field.parse(eta)))
    assert abs(path.total - exact.total) <= path.bound + exact.bound
    asym = forces.force_scalar_asymptotic(PistonConfig(a=ratio, b=1.0, field=Field.parse(eta)))
    assert abs(path.total - asym.total) > path.bound


def test_region_two_terms_cancel_the_horizontal_part():
    pf = optical_paths.piston_path_force(0.4, 1.0, eta=1)
    assert pf.terms["horizontal_I"] == -pf.terms["horizontal_II"]
    h = optical_paths.horizontal_path_energy_density((0.4, 1.0, 1.0), 1)
    assert pf.terms["horizontal_II"] == pytest.approx(h.value, rel=1e-7)


def test_em_path_force_matches_exact():
    for ratio in (0.3, 0.8):
        pf = optical_paths.piston_path_force(ratio, 1.0, eta="em")
        exact = forces.force_em_exact(PistonConfig(a=ratio, b=1.0))
        assert abs(pf.total - exact.total) <= pf.bound + exact.bound
        assert pf.terms["tower"] == pytest.approx(math.pi / (24 * ratio**2))


def test_path_force_validation():
    with pytest.raises(ValueError, match="a > 0"):
        optical_paths.piston_path_force(-0.1, 1.0)
    with pytest.raises(ValueError, match="method"):
        optical_paths.piston_path_force(0.1, 1.0, method="spline")
    with pytest.raises(ValueError, match="max_path_length"):
        optical_paths.piston_path_force(0.5, 1.0, max_path_length=2.0)


@pytest.mark.parametrize("eta", [-1, 1])
def test_class_sums_reproduce_the_power_law_terms(eta):
    ratio = 0.1
    pf = optical_paths.piston_path_force(ratio, 1.0, eta=eta)
    asym = forces.force_scalar_asymptotic(PistonConfig(a=ratio, b=1.0, field=Field.parse(eta)))
    # periodic families: the parallel-plate force; side families: the perimeter term.
    # Families beyond the length cut are booked in the oblique tail, so each class
    # falls short by at most the truncation bound.
    assert abs(pf.terms["periodic"] - asym.term_a4) <= pf.bound
    assert abs(pf.terms["side"] - asym.term_a3) <= pf.bound
    assert pf.terms["periodic"] == pytest.approx(asym.term_a4, rel=1e-8)
    assert pf.terms["side"] == pytest.approx(asym.term_a3, rel=1e-5)


@pytest.mark.parametrize("eta", [-1, 1])
def test_path_force_at_moderate_ratio(eta):
    ratio = 0.2
    path = optical_paths.piston_path_force(ratio, 1.0, eta=eta, method="finite-difference")
    asym = forces.force_scalar_asymptotic(PistonConfig(a=ratio, b=1.0, field=Field.parse(eta)))
    assert abs(path.total - asym.total) <= path.bound + asym.bound


@pytest.mark.parametrize("eta", [-1, 1])
def test_horizontal_terms_cancel_for_a_tall_region(eta):
    # for a >> b the a-independent pieces of the two regions cancel, leaving a tiny attraction
    ratio = 2.0
    pf = optical_paths.piston_path_force(ratio, 1.0, eta=eta, max_path_length=60.0)
    exact = forces.force_scalar_exact(PistonConfig(a=ratio, b=1.0, field=Field.parse(eta)))
    assert abs(pf.total - exact.total) <= pf.bound + exact.bound
    # Neumann keeps a massless transverse mode and with it a 1-D force -pi/(24 a^2)
    massless = -math.pi / (24 * ratio**2) if eta == 1 else 0.0
    remainder = exact.total - massless
    assert remainder < 0 and abs(remainder) < 1e-2 * abs(pf.terms["horizontal_II"])
