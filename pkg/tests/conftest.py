import numpy as np
import pytest

from quadrho import BathSpec, DriveSpec, SystemSpec, validate_spec


@pytest.fixture
def free_spec():
    """Undriven, undamped mode."""
    return validate_spec(SystemSpec(omega0=1.0, phi=0j))


@pytest.fixture
def master_spec():
    """Weakly squeezed, driven mode with one thermal bath mode."""
    return validate_spec(
        SystemSpec(
            omega0=1.0,
            phi=0.05j,
            drive=DriveSpec.sinusoidal(0.05, 0.95),
            bath=BathSpec.discrete([(1.1, 0.1)]),
            beta=1.0,
        )
    )


@pytest.fixture
def master_spec_phi0(master_spec):
    """Same bath and drive, no two-photon term."""
    from dataclasses import replace

    return replace(master_spec, phi=0j)


def grid_to(t_end, n):
    return np.linspace(0.0, t_end, n + 1)
