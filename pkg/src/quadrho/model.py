"""Physical scenario definition and validation.

Units convention (shared by every module): hbar = 1, frequencies in units
of the reference mode frequency (default omega0 = 1), times dimensionless
tau = omega0 * t, temperature enters only through the dimensionless
inverse temperature beta = hbar * omega0 / (kB T), with beta = +inf for
T = 0.

The two-photon parameter phi must be purely imaginary: a real part
renormalizes mass and frequency, which is a modelling step performed
before building a scenario, not an algorithm this package applies.
Validated specs are immutable and safe to share across threads.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadGrid,
    NonPositiveFrequency,
    NonzeroPhiReal,
    OutOfRange,
    PoleHit,
    SpecValidationError,
    UnstableTwoPhoton,
    UnsupportedBath,
)

_PHI_REAL_TOL = 0.0  # reject any nonzero real part outright


@dataclass(frozen=True)
class DriveSpec:
    """External classical drive k(t).

    kind is one of 'zero', 'sinusoidal' (k(t) = k0 sin(nu t)) or
    'tabulated' (complex samples on a strictly increasing grid from 0,
    linearly interpolated).
    """

    kind: str = "zero"
    k0: float = 0.0
    nu: float = 0.0
    times: tuple = ()
    values: tuple = ()

    @staticmethod
    def zero():
        return DriveSpec(kind="zero")

    @staticmethod
    def sinusoidal(k0, nu):
        return DriveSpec(kind="sinusoidal", k0=float(k0), nu=float(nu))

    @staticmethod
    def tabulated(times, values):
        return DriveSpec(
            kind="tabulated",
            times=tuple(float(t) for t in times),
            values=tuple(complex(v) for v in values),
        )


@dataclass(frozen=True)
class BathSpec:
    """Bosonic environment.

    kind is 'none', 'discrete' (finite mode list (omega_j, f_j)) or
    'memoryless' (delta-correlated response with damping rate chi0).
    """

    kind: str = "none"
    omegas: tuple = ()
    couplings: tuple = ()
    chi0: float = 0.0

    @staticmethod
    def none():
        return BathSpec(kind="none")

    @staticmethod
    def discrete(modes):
        omegas = tuple(float(w) for w, _ in modes)
        couplings = tuple(complex(f) for _, f in modes)
        return BathSpec(kind="discrete", omegas=omegas, couplings=couplings)

    @staticmethod
    def memoryless(chi0):
        return BathSpec(kind="memoryless", chi0=float(chi0))

    @property
    def n_modes(self):
        return len(self.omegas)


@dataclass(frozen=True)
class SystemSpec:
    """Complete scenario: mode, two-photon parameter, drive, bath, temperature."""

    omega0: float = 1.0
    phi: complex = 0j
    drive: DriveSpec = field(default_factory=DriveSpec.zero)
    bath: BathSpec = field(default_factory=BathSpec.none)
    beta: float = math.inf


def _collect_violations(spec):
    out = []
    if not spec.omega0 > 0:
        out.append(NonPositiveFrequency("system.omega0", "must be > 0"))
    phi = complex(spec.phi)
    if abs(phi.real) > _PHI_REAL_TOL:
        out.append(
            NonzeroPhiReal(
                "system.phi",
                "real part must be zero (absorb it into renormalized "
                "mass/frequency before building the scenario)",
            )
        )
    if spec.omega0 > 0 and abs(phi) >= spec.omega0 / 2:
        out.append(
            UnstableTwoPhoton(
                "system.phi", f"|phi| = {abs(phi):g} >= omega0/2 = {spec.omega0 / 2:g}"
            )
        )
    if not (spec.beta > 0):  # also rejects NaN
        out.append(BadGrid("system.beta", "inverse temperature must be > 0 (inf allowed)"))

    d = spec.drive
    if d.kind == "sinusoidal":
        if d.k0 < 0:
            out.append(BadGrid("drive.k0", "amplitude must be >= 0"))
        if not d.nu > 0:
            out.append(BadGrid("drive.nu", "frequency must be > 0"))
    elif d.kind == "tabulated":
        t = np.asarray(d.times, dtype=float)
        if t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            out.append(BadGrid("drive.times", "grid must increase strictly from 0"))
        if len(d.values) != t.size:
            out.append(BadGrid("drive.values", "must match the time grid length"))
    elif d.kind != "zero":
        out.append(BadGrid("drive.kind", f"unknown variant {d.kind!r}"))

    b = spec.bath
    if b.kind == "discrete":
        if any(w <= 0 for w in b.omegas):
            out.append(NonPositiveFrequency("bath.omegas", "all mode frequencies must be > 0"))
        if len(b.couplings) != len(b.omegas):
            out.append(BadGrid("bath.couplings", "must match the mode list length"))
    elif b.kind == "memoryless":
        if b.chi0 < 0:
            out.append(BadGrid("bath.chi0", "damping rate must be >= 0"))
    elif b.kind != "none":
        out.append(BadGrid("bath.kind", f"unknown variant {b.kind!r}"))
    return out


def validate_spec(spec: SystemSpec) -> SystemSpec:
    """Validate and normalize a scenario.

    Returns the normalized spec (phi coerced to exactly i * Im(phi),
    beta to float) or raises SpecValidationError listing every violated
    invariant.  Idempotent.
    """
    violations = _collect_violations(spec)
    if violations:
        raise SpecValidationError(violations)
    return replace(spec, phi=complex(0.0, complex(spec.phi).imag), beta=float(spec.beta))


def drive_eval(drive: DriveSpec, t) -> complex:
    """Drive amplitude k(t) at time t >= 0."""
    if drive.kind == "zero":
        return 0j
    if drive.kind == "sinusoidal":
        return complex(drive.k0 * math.sin(drive.nu * t))
    if drive.kind == "tabulated":
        if t < drive.times[0] or t > drive.times[-1]:
            raise OutOfRange(f"t = {t:g} outside tabulated drive grid")
        return complex(np.interp(t, drive.times, np.asarray(drive.values)))
    raise UnsupportedBath(f"unknown drive variant {drive.kind!r}")


def susceptibility_laplace(bath: BathSpec, s) -> complex:
    """Laplace transform of the bath response kernel at s.

    Discrete baths give sum_j |f_j|^2 / (s + i omega_j); the memoryless
    (delta-response) bath contributes the boundary half-weight chi0/2,
    a convention cross-validated against the large-time displacement
    closed form (acceptance A3).
    """
    if bath.kind == "none":
        return 0j
    if bath.kind == "memoryless":
        return complex(bath.chi0 / 2.0)
    if bath.kind == "discrete":
        s = complex(s)
        out = 0j
        for w, f in zip(bath.omegas, bath.couplings):
            den = s + 1j * w
            if den == 0:
                raise PoleHit(f"s = {s} sits on the bath pole -i*{w:g}")
            out += abs(f) ** 2 / den
        return out
    raise UnsupportedBath(f"unknown bath variant {bath.kind!r}")
