import math

import numpy as np
import pytest
from scipy.integrate import quad

from quadrho import (
    BathSpec,
    DriveSpec,
    SystemSpec,
    drive_eval,
    response_function,
    susceptibility_laplace,
    validate_spec,
)
from quadrho.errors import (
    NonzeroPhiReal,
    OutOfRange,
    PoleHit,
    SpecValidationError,
    UnstableTwoPhoton,
)


def test_identity_scenario_valid():
    spec = validate_spec(SystemSpec(omega0=1.0, phi=0j, beta=math.inf))
    assert spec.omega0 == 1.0
    assert spec.phi == 0j


def test_unstable_two_photon_rejected():
    with pytest.raises(SpecValidationError) as err:
        validate_spec(SystemSpec(omega0=1.0, phi=0.6j))
    assert any(isinstance(v, UnstableTwoPhoton) for v in err.value.violations)


def test_nonzero_phi_real_rejected():
    with pytest.raises(SpecValidationError) as err:
        validate_spec(SystemSpec(omega0=1.0, phi=0.1 + 0.1j))
    assert any(isinstance(v, NonzeroPhiReal) for v in err.value.violations)


def test_multiple_violations_collected():
    with pytest.raises(SpecValidationError) as err:
        validate_spec(SystemSpec(omega0=-1.0, phi=0.1 + 0.1j))
    assert len(err.value.violations) >= 2


def test_validate_idempotent():
    spec = SystemSpec(omega0=2.0, phi=0.3j, beta=4.0)
    once = validate_spec(spec)
    twice = validate_spec(once)
    assert once == twice


def test_drive_eval_sinusoidal():
    d = DriveSpec.sinusoidal(1.0, 2.0)
    assert drive_eval(d, 0.0) == 0
    assert drive_eval(DriveSpec.sinusoidal(1.0, math.pi), 0.5) == pytest.approx(1.0)
    assert drive_eval(DriveSpec.zero(), 17.3) == 0


def test_drive_eval_tabulated():
    d = DriveSpec.tabulated([0.0, 1.0, 2.0], [0.0, 1.0 + 1j, 2.0])
    assert drive_eval(d, 0.5) == pytest.approx(0.5 + 0.5j)
    with pytest.raises(OutOfRange):
        drive_eval(d, 2.5)


def test_tabulated_grid_must_start_at_zero():
    with pytest.raises(SpecValidationError):
        validate_spec(
            SystemSpec(drive=DriveSpec.tabulated([0.5, 1.0], [0.0, 1.0]))
        )


def test_susceptibility_variants():
    assert susceptibility_laplace(BathSpec.none(), 1.0) == 0
    one = susceptibility_laplace(BathSpec.discrete([(1.0, 1.0)]), 1.0)
    assert one == pytest.approx(1.0 / (1.0 + 1j))
    # boundary half-weight of the delta response
    assert susceptibility_laplace(BathSpec.memoryless(0.1), 3.7 + 2j) == pytest.approx(0.05)
    with pytest.raises(PoleHit):
        susceptibility_laplace(BathSpec.discrete([(2.0, 1.0)]), -2j)


def test_susceptibility_matches_laplace_quadrature():
    """Discrete-bath transform equals the numerical Laplace integral of the
    response kernel, across a few s with Re(s) >= 0.1."""
    bath = BathSpec.discrete([(0.7, 0.2), (1.3, 0.1 + 0.05j), (2.1, 0.15)])
    for s in (0.1, 0.5 + 0.8j, 1.0 - 0.4j, 2.0):
        t_max = 40.0 / s.real if isinstance(s, complex) else 40.0 / s
        t_max = min(t_max, 400.0)

        def integrand_re(t, s=s):
            return (response_function(bath, t) * np.exp(-s * t)).real

        def integrand_im(t, s=s):
            return (response_function(bath, t) * np.exp(-s * t)).imag

        re = quad(integrand_re, 0, t_max, limit=2000)[0]
        im = quad(integrand_im, 0, t_max, limit=2000)[0]
        expected = susceptibility_laplace(bath, s)
        assert abs(complex(re, im) - expected) <= 1e-8 * max(1.0, abs(expected))
