import cmath
import math

import numpy as np
import pytest

from quadrho import (
    large_time_limits,
    mean_excitation,
    pn_hermite,
    pn_laguerre,
    pn_laguerre_sequence,
    pn_poisson,
    resonant_poisson,
    zeta_sinusoidal,
)
from quadrho.closedform import _hermite_terms_large_arg, _hermite_terms_small_arg
from quadrho.errors import ResonantDrive


def test_laguerre_law_thermal_point():
    res = pn_laguerre(0.0, 1.0, 0)
    assert res.p == pytest.approx(0.5)
    assert res.branch == "laguerre"


def test_laguerre_law_matches_thermal_geometric():
    eta = 0.7
    for n in range(6):
        want = (eta / (1 + eta)) ** n / (1 + eta)
        assert pn_laguerre(0.0, eta, n).p == pytest.approx(want, rel=1e-12)


def test_poisson_limit_branch():
    z = cmath.sqrt(2.0)
    res = pn_laguerre(z, 1e-10, 3)
    assert res.branch == "poisson_limit"
    assert res.p == pytest.approx(pn_poisson(z, 3).p, abs=1e-9)


def test_laguerre_to_poisson_identity_small_occupation():
    """Genuine recurrence evaluation just above the branch switch."""
    for z2 in (0.5, 1.0, 3.0, 5.0):
        z = math.sqrt(z2)
        for n in range(21):
            lag = pn_laguerre(z, 1e-6, n)
            assert lag.branch == "laguerre"
            assert abs(lag.p - pn_poisson(z, n).p) < 1e-4 * max(pn_poisson(z, n).p, 1e-6)
    # and the spec's switch point itself
    for n in range(21):
        assert abs(pn_laguerre(2.0, 1e-10, n).p - pn_poisson(2.0, n).p) < 1e-6


def test_laguerre_normalization_tail():
    for z2 in (0.0, 0.5, 1.0, 3.0, 5.0):
        for eta in (0.0, 0.3, 1.0, 3.0):
            seq = pn_laguerre_sequence(math.sqrt(z2), eta, 400)
            assert seq.sum() == pytest.approx(1.0, abs=1e-8)
            assert np.all(seq >= 0)


def test_laguerre_mean_matches_formula():
    for z2 in (0.0, 0.5, 1.0, 3.849):
        for eta in (0.0, 0.5, 2.0):
            seq = pn_laguerre_sequence(math.sqrt(z2), eta, 300)
            mean = float(np.sum(np.arange(301) * seq))
            assert mean == pytest.approx(mean_excitation(math.sqrt(z2), eta), abs=1e-8)


def test_argmax_at_displaced_mean():
    z2, _ = large_time_limits(0.2, 0.99, 1.0, 0.1)
    assert z2 == pytest.approx(3.8487, abs=2e-4)
    seq = pn_laguerre_sequence(math.sqrt(z2), 0.0, 20)
    assert int(np.argmax(seq)) == 3


def test_poisson_values():
    assert pn_poisson(0.0, 0).p == 1.0
    assert pn_poisson(0.0, 4).p == 0.0
    assert pn_poisson(1.0, 1).p == pytest.approx(math.exp(-1.0))


def test_large_time_limits_trivia():
    z2, eta_inf = large_time_limits(0.0, 0.99, 1.0, 0.1, [(1.0, 0.1)], beta=1.0)
    assert z2 == 0.0
    z2, eta_inf = large_time_limits(0.02, 0.99, 1.0, 0.1, [(1.0, 0.1)], beta=math.inf)
    assert eta_inf == 0.0
    # frozen from an independent evaluation of the printed expression
    assert z2 == pytest.approx(0.038486774417728825, rel=1e-12)


def test_large_time_eta_peaks_at_resonance():
    vals = [
        large_time_limits(0.0, 0.99, 1.0, 0.1, [(w, 0.1)], beta=1.0)[1]
        for w in (0.5, 0.9, 1.0, 1.1, 1.6)
    ]
    assert np.argmax(vals) == 2


def test_resonant_poisson_normalization():
    assert resonant_poisson(0.0, 0).p == 1.0
    assert resonant_poisson(0.0, 3).p == 0.0
    zeta = 1.3 - 0.4j
    total = sum(resonant_poisson(zeta, n).p for n in range(101))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_hermite_vacuum_limits():
    # no drive: P0 -> 1 as the squeezing weight -> 0
    assert pn_hermite(1.0, 1e-6, 0.1, 0.0, 0).p == pytest.approx(1.0, abs=1e-6)
    # alpha2 = 0 exactly: resonant Poisson branch
    res = pn_hermite(1.0, 0.0, 0.1, 1.0 + 0.5j, 2)
    assert res.branch == "resonant_poisson"
    assert res.p == pytest.approx(resonant_poisson(1.0 + 0.5j, 2).p)


def test_hermite_reduces_to_poisson_at_tiny_phi():
    zeta = 1.2
    for n in range(6):
        res = pn_hermite(1.0, 0.7, 1e-7, zeta, n)
        assert res.branch == "hermite_series"
        assert res.p == pytest.approx(pn_poisson(zeta, n).p, abs=1e-5)


def test_hermite_square_root_branch_irrelevant():
    """|H|^2 terms are insensitive to the sign of the argument."""
    w = 0.8 - 1.7j
    a = _hermite_terms_small_arg(2, 30, w, 0.05)
    b = _hermite_terms_small_arg(2, 30, -w, 0.05)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    w_large = 25.0 + 3j
    c = _hermite_terms_large_arg(1, 30, w_large, 4.0)
    d = _hermite_terms_large_arg(1, 30, -w_large, 4.0)
    np.testing.assert_allclose(c, d, rtol=1e-12)


def test_hermite_scaling_windows_agree():
    """Both Hermite scalings produce the same probability where their
    validity windows overlap."""
    alpha1 = cmath.exp(-0.9j)
    phi_i, zeta = 0.1, 0.9 + 0.2j
    for alpha2 in (2e-4, 5e-4):  # |w|^2 crosses the window threshold nearby
        a = complex(alpha2) * phi_i * alpha1
        w = -zeta / (2 * cmath.sqrt(a))
        assert abs(w) ** 2 > 300.0  # sits in the large-argument window
        large = _hermite_terms_large_arg(1, 60, w, abs(zeta) ** 2)
        small = _hermite_terms_small_arg(1, 60, w, abs(a))
        np.testing.assert_allclose(large, small, rtol=1e-8)


def test_hermite_negative_alpha2_stays_probability():
    for tau in (3.5, 4.2, 5.9):  # sin < 0 here
        alpha2 = math.sin(tau)
        z = zeta_sinusoidal(1.0, 0.9, 1.0, 0.1, tau)[2]
        for n in range(5):
            p = pn_hermite(cmath.exp(-1j * tau), alpha2, 0.1, z, n).p
            assert p > -1e-4  # nonnegative up to the documented approximation dip
            assert p < 1.0 + 1e-6


def test_zeta_sinusoidal_zeros_and_identity():
    assert zeta_sinusoidal(1.0, 0.9, 1.0, 0.1, 0.0) == (0.0, 0.0, 0.0)
    z1, z2, z = zeta_sinusoidal(0.0, 0.9, 1.0, 0.1, 2.3)
    assert z1 == 0 and z2 == 0 and z == 0
    rng = np.random.default_rng(5)
    for _ in range(20):
        k0 = rng.uniform(0.1, 2.0)
        nu = rng.uniform(0.3, 1.8)
        if abs(nu - 1.0) < 1e-3:
            continue
        phi_i = rng.uniform(-0.2, 0.2)
        t = rng.uniform(0, 20)
        z1, z2, z = zeta_sinusoidal(k0, nu, 1.0, phi_i, t)
        assert abs(z - (z1 - 2 * phi_i * z2)) < 1e-12 * max(1.0, abs(z))


def test_zeta_sinusoidal_resonant_guard():
    with pytest.raises(ResonantDrive):
        zeta_sinusoidal(1.0, 1.0, 1.0, 0.1, 2.0)
