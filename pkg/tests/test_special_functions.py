import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_piston.special_functions import (
    LatticeSumSpec,
    catalan,
    dirichlet_beta,
    epstein_partial_sums,
    epstein_sum,
    epstein_zeta_2,
    hurwitz_zeta,
    j_constants,
    j_eta,
    riemann_zeta,
)

# mpmath at 40 digits, frozen
Z2_11_4 = 6.0268120396919401
Z2_11_6 = 4.6589136156038434  # 4 zeta(3) beta(3)
Z2_11_8 = 4.2814306608057806  # 4 zeta(4) beta(4)
J_DIRICHLET = -1.5259342326342177
J_NEUMANN = 13.579558312018098


@pytest.mark.parametrize("s", range(2, 13))
def test_riemann_zeta_matches_mpmath(s):
    assert riemann_zeta(s) == pytest.approx(float(mp.zeta(s)), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(1.5, 8.0), q=st.floats(0.1, 5.0))
def test_hurwitz_zeta_matches_mpmath(s, q):
    assert hurwitz_zeta(s, q) == pytest.approx(float(mp.zeta(s, q)), rel=1e-13)


def test_catalan_and_beta():
    assert catalan() == pytest.approx(float(mp.catalan), rel=1e-15)
    assert dirichlet_beta(2) == pytest.approx(float(mp.catalan), rel=1e-15)
    assert dirichlet_beta(3) == pytest.approx(math.pi**3 / 32, rel=1e-14)


@pytest.mark.parametrize("n, expected", [(4, Z2_11_4), (6, Z2_11_6), (8, Z2_11_8)])
def test_square_lattice_closed_forms(n, expected):
    result = epstein_sum(LatticeSumSpec(1.0, 1.0, n))
    assert abs(result.value - expected) <= result.bound + 4e-15 * expected
    assert result.bound <= 1e-10 * result.value


def test_square_lattice_factorisation():
    assert epstein_zeta_2(LatticeSumSpec(1, 1, 4)) == pytest.approx(4 * riemann_zeta(2) * catalan(), rel=1e-10)


@settings(max_examples=10, deadline=None)
@given(x1=st.floats(0.3, 3.0), x2=st.floats(0.3, 3.0))
def test_epstein_symmetric_in_weights(x1, x2):
    z12 = epstein_zeta_2(LatticeSumSpec(x1, x2, 4))
    z21 = epstein_zeta_2(LatticeSumSpec(x2, x1, 4))
    assert z12 == pytest.approx(z21, rel=3e-10)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.2, 5.0), n=st.sampled_from([4.0, 5.5, 7.0]))
def test_epstein_homogeneity(lam, n):
    base = epstein_zeta_2(LatticeSumSpec(1.0, 2.0, n))
    scaled = epstein_zeta_2(LatticeSumSpec(lam, 2 * lam, n))
    assert scaled == pytest.approx(lam ** (-n / 2) * base, rel=3e-10)


def test_slow_convergence_is_refused():
    with pytest.raises(ValueError, match="lattice points"):
        epstein_sum(LatticeSumSpec(1.0, 1.0, 3.0, eps=1e-12))
    # a looser tolerance is affordable
    assert epstein_sum(LatticeSumSpec(1.0, 1.0, 3.0, eps=1e-4)).bound > 0


def test_partial_sums_increase_to_the_limit():
    spec = LatticeSumSpec(1.0, 1.0, 4)
    sums = epstein_partial_sums(spec, [2, 4, 8, 16, 32, 64])
    assert all(b > a for a, b in zip(sums, sums[1:]))
    assert sums[-1] < Z2_11_4
    # the gap closes like 1/R^2
    assert Z2_11_4 - sums[-1] < 2 * math.pi / 64**2 * 1.5


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(x1=1, x2=1, n=2), "diverges"),
        (dict(x1=1, x2=1, n=1.5), "diverges"),
        (dict(x1=-1, x2=1, n=4), "positive"),
        (dict(x1=1, x2=0, n=4), "positive"),
        (dict(x1=1, x2=1, n=4, eps=0), "tolerance"),
    ],
)
def test_lattice_spec_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        LatticeSumSpec(**kwargs)


def test_j_constants_against_mpmath():
    jc = j_constants()
    assert jc.epstein == pytest.approx(Z2_11_4, rel=1e-10)
    assert jc.j_dirichlet == pytest.approx(J_DIRICHLET, rel=1e-9)
    assert jc.j_neumann == pytest.approx(J_NEUMANN, rel=1e-10)
    assert jc.j_em == pytest.approx(J_DIRICHLET + J_NEUMANN, rel=1e-10)
    assert j_eta(-1) == jc.j_dirichlet and j_eta(1) == jc.j_neumann
    with pytest.raises(ValueError):
        j_eta(0)
