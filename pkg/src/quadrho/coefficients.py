"""Time-dependent coefficients of the Heisenberg-picture solutions.

The ladder operators of the driven quadratic mode coupled linearly to a
discrete bosonic bath obey a closed linear system

    d/dt (a, a^dag, b_1, b_1^dag, ..., b_N, b_N^dag)^T = A v + d(t),

with constant generator A and drive injection d(t) = (-i k(t), +i kbar(t),
0, ...).  Everything this module produces is read off the fundamental
solution of that system (and small auxiliary linear systems), which makes
the phase conventions unambiguous:

    a(t) = alpha1 a(0) - 2 i phi alpha2 a^dag(0) - i sum_j M_j b_j(0)
           + 2 phi sum_j N_j b_j^dag(0) - i zeta1 + 2 phi zeta2,

and a^dag(t) is its literal adjoint.  The homogeneous flow is advanced by
the exact matrix exponential of A per grid interval, so the canonical
commutator [a(t), a^dag(t)] = 1 is preserved to roundoff; only the drive
response needs numerical quadrature (two-node Gauss of the
variation-of-constants integral, with step-halving control).

alpha2 and the N_j vanish from the fundamental matrix at phi = 0 (they
enter multiplied by phi), so they are obtained from an auxiliary linear
system valid for every phi:

    alpha1' = -i w0 alpha1 + 4|phi|^2 alpha2 - sum_j |f_j|^2 p_j
    alpha2' = alpha1 + i w0 alpha2 - sum_j |f_j|^2 q_j
    p_j'    = alpha1 - i w_j p_j          (M_j = f_j p_j)
    q_j'    = alpha2 + i w_j q_j          (N_j = fbar_j q_j)

with alpha1(0) = 1 and all else zero.  A memoryless bath replaces the
mode ladder by the effective complex frequency w0 - i chi0/2 in the 2x2
(a, a^dag) block; it has no discrete modes, so M, N and the thermal sums
are empty for it.

Coefficient sets are immutable after construction and safe to share.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import BadGrid, StepSizeTooCoarse, UnsupportedBath
from .model import BathSpec, SystemSpec, drive_eval, validate_spec

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0  # two-node Gauss-Legendre on [0, 1]


# ---------------------------------------------------------------------------
# data containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSet:
    """Coefficient functions sampled on a time grid (t[0] = 0).

    m_coef[j, i] and n_coef[j, i] hold M_j(t_i), N_j(t_i); `fundamental`
    and `inhom` keep the raw fundamental matrix S(t_i) and the c-number
    response of the physical system for diagnostics and the bath-side
    coefficients.
    """

    grid: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray
    m_coef: np.ndarray
    n_coef: np.ndarray
    spec: SystemSpec
    fundamental: np.ndarray
    inhom: np.ndarray

    @property
    def n_times(self):
        return self.grid.size

    def index_of(self, t, tol=1e-12):
        hits = np.flatnonzero(np.abs(self.grid - t) <= tol * max(1.0, abs(t)))
        if hits.size == 0:
            raise ValueError(f"t = {t:g} is not a grid point")
        return int(hits[0])


@dataclass(frozen=True)
class BathCoefficientSet:
    """Coefficients of the environment ladder operators.

    b_j(t) = sum_k lambda_[j,k] b_k(0) + sum_k lambda_prime[j,k] b_k^dag(0)
             + gamma[j] a(0) + gamma_prime[j] a^dag(0) + omega[j].

    All arrays carry the grid index last.
    """

    grid: np.ndarray
    lambda_: np.ndarray        # (N, N, n_t)
    lambda_prime: np.ndarray   # (N, N, n_t)
    gamma: np.ndarray          # (N, n_t)
    gamma_prime: np.ndarray    # (N, n_t)
    omega: np.ndarray          # (N, n_t)


@dataclass(frozen=True)
class ThermalQuadratic:
    """Quadratic form the thermal bath contributes to the generating exponent.

    The exponent term is  -a_mixed * l*lbar + b_lam2 * l^2 + c_lambar2 * lbar^2.
    a_mixed >= 0; at phi = 0 it reduces to the thermal occupation sum and
    b_lam2 = c_lambar2 = 0.
    """

    a_mixed: float
    b_lam2: complex
    c_lambar2: complex
    beta: float
    t: float


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def response_function(bath: BathSpec, dt) -> complex:
    """Bath memory kernel sum_j |f_j|^2 exp(-i omega_j dt) at lag dt >= 0."""
    if bath.kind != "discrete":
        raise UnsupportedBath(
            "response function has a pointwise value only for discrete baths"
        )
    f2 = np.abs(np.asarray(bath.couplings)) ** 2
    w = np.asarray(bath.omegas)
    return complex(np.sum(f2 * np.exp(-1j * w * dt)))


def assemble_generator(spec: SystemSpec):
    """Constant generator A and drive injection d(t) of the closed system.

    Basis ordering (a, a^dag, b_1, b_1^dag, ...); dimension 2(N+1).
    Memoryless baths have no mode block, use the internal 2x2 effective
    generator through `propagate` instead.
    """
    if spec.bath.kind == "memoryless":
        raise UnsupportedBath("memoryless bath has no finite mode list to assemble")
    w0, phi = spec.omega0, complex(spec.phi)
    n = spec.bath.n_modes
    dim = 2 * (n + 1)
    a = np.zeros((dim, dim), dtype=complex)
    a[0, 0] = -1j * w0
    a[0, 1] = -2j * phi
    a[1, 0] = 2j * np.conj(phi)
    a[1, 1] = 1j * w0
    for j in range(n):
        wj = spec.bath.omegas[j]
        fj = complex(spec.bath.couplings[j])
        r, rd = 2 + 2 * j, 3 + 2 * j
        a[0, r] = -1j * fj
        a[1, rd] = 1j * np.conj(fj)
        a[r, r] = -1j * wj
        a[rd, rd] = 1j * wj
        a[r, 0] = -1j * np.conj(fj)
        a[rd, 1] = 1j * fj

    def drive_vec(t):
        k = drive_eval(spec.drive, t)
        d = np.zeros(dim, dtype=complex)
        d[0] = -1j * k
        d[1] = 1j * np.conj(k)
        return d

    return a, drive_vec


def _physical_generator(spec):
    """A for propagation; memoryless collapses to the damped 2x2 block."""
    if spec.bath.kind == "memoryless":
        w0, phi, chi0 = spec.omega0, complex(spec.phi), spec.bath.chi0
        a = np.array(
            [
                [-1j * w0 - chi0 / 2.0, -2j * phi],
                [2j * np.conj(phi), 1j * w0 - chi0 / 2.0],
            ],
            dtype=complex,
        )
        return a
    return assemble_generator(spec)[0]


def _alpha_generator(spec):
    """Generator of the (alpha1, alpha2, p_j, q_j) auxiliary system."""
    w0, phi = spec.omega0, complex(spec.phi)
    damp = spec.bath.chi0 / 2.0 if spec.bath.kind == "memoryless" else 0.0
    n = spec.bath.n_modes if spec.bath.kind == "discrete" else 0
    dim = 2 + 2 * n
    a = np.zeros((dim, dim), dtype=complex)
    a[0, 0] = -1j * w0 - damp
    a[0, 1] = 4.0 * abs(phi) ** 2
    a[1, 0] = 1.0
    a[1, 1] = 1j * w0 - damp
    for j in range(n):
        wj = spec.bath.omegas[j]
        f2 = abs(spec.bath.couplings[j]) ** 2
        a[0, 2 + j] = -f2
        a[1, 2 + n + j] = -f2
        a[2 + j, 0] = 1.0
        a[2 + j, 2 + j] = -1j * wj
        a[2 + n + j, 1] = 1.0
        a[2 + n + j, 2 + n + j] = 1j * wj
    return a


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

class _DriveStepper:
    """Advances w' = A w + forcing(t) with cached exact-exponential stages.

    Per substep h the update is
        w <- expm(A h) w + (h/2) [expm(A (h - t1)) f(t + t1)
                                  + expm(A (h - t2)) f(t + t2)]
    with t1, t2 the two Gauss nodes; the three matrices depend only on h
    and are cached, so refining the step count reuses machinery.
    """

    def __init__(self, a, forcing):
        self.a = a
        self.forcing = forcing  # t -> vector (or matrix of stacked columns)
        self._cache = {}

    def _stages(self, h):
        key = h
        if key not in self._cache:
            e = expm(self.a * h)
            g1 = 0.5 * h * expm(self.a * (h * (0.5 + _GAUSS_OFFSET)))
            g2 = 0.5 * h * expm(self.a * (h * (0.5 - _GAUSS_OFFSET)))
            self._cache[key] = (e, g1, g2)
        return self._cache[key]

    def run(self, w0, t0, t1, n_sub):
        h = (t1 - t0) / n_sub
        e, g1, g2 = self._stages(h)
        tau1 = h * (0.5 - _GAUSS_OFFSET)
        tau2 = h * (0.5 + _GAUSS_OFFSET)
        w = w0
        for i in range(n_sub):
            t = t0 + i * h
            w = e @ w + g1 @ self.forcing(t + tau1) + g2 @ self.forcing(t + tau2)
        return w

    def step_adaptive(self, w0, t0, t1, atol, n_start=4, max_doublings=16):
        n = n_start
        coarse = self.run(w0, t0, t1, n)
        for _ in range(max_doublings):
            n *= 2
            fine = self.run(w0, t0, t1, n)
            err = float(np.max(np.abs(fine - coarse)))
            if err <= atol * max(1.0, float(np.max(np.abs(fine)))):
                return fine
            coarse = fine
        raise StepSizeTooCoarse(
            f"drive response did not converge on [{t0:g}, {t1:g}] "
            f"within {n} substeps (last error {err:.3e})"
        )


def propagate(
    spec: SystemSpec,
    grid,
    *,
    defect_tol=1e-9,
    drive_atol=1e-12,
) -> CoefficientSet:
    """Propagate the coefficient functions over a caller-supplied grid.

    The grid must start at 0 and increase strictly.  Homogeneous flow is
    exact (matrix exponential of the constant generator per interval);
    the drive response is integrated adaptively to `drive_atol`.  Raises
    StepSizeTooCoarse if the commutator defect exceeds `defect_tol` at
    any grid point (checked for non-dissipative variants, where unity is
    exact), or if drive refinement hits its cap.
    """
    spec = validate_spec(spec)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise BadGrid("grid", "time grid must increase strictly from 0")

    a_phys = _physical_generator(spec)
    a_aux = _alpha_generator(spec)
    dim_p = a_phys.shape[0]
    dim_a = a_aux.shape[0]
    n_modes = spec.bath.n_modes if spec.bath.kind == "discrete" else 0
    n_t = grid.size

    has_drive = spec.drive.kind != "zero"

    # forcing enters the auxiliary system only through the alpha1 row and
    # the physical system through the (a, a^dag) rows
    def aux_forcing(t):
        k = drive_eval(spec.drive, t)
        out = np.zeros((dim_a, 2), dtype=complex)
        out[0, 0] = k                 # column 0: response to k  -> zeta1 chain
        out[0, 1] = np.conj(k)        # column 1: response to kbar -> zeta2 chain
        return out

    def phys_forcing(t):
        k = drive_eval(spec.drive, t)
        out = np.zeros(dim_p, dtype=complex)
        out[0] = -1j * k
        out[1] = 1j * np.conj(k)
        return out

    aux_stepper = _DriveStepper(a_aux, aux_forcing)
    phys_stepper = _DriveStepper(a_phys, phys_forcing)
    expm_cache = {}

    fundamental = np.empty((n_t, dim_p, dim_p), dtype=complex)
    inhom = np.zeros((n_t, dim_p), dtype=complex)
    aux = np.empty((n_t, dim_a), dtype=complex)
    aux_drive = np.zeros((n_t, dim_a, 2), dtype=complex)

    s = np.eye(dim_p, dtype=complex)
    u = np.zeros(dim_a, dtype=complex)
    u[0] = 1.0
    wx = np.zeros((dim_a, 2), dtype=complex)
    wp = np.zeros(dim_p, dtype=complex)

    fundamental[0] = s
    aux[0] = u

    for i in range(1, n_t):
        t0, t1 = grid[i - 1], grid[i]
        h = t1 - t0
        if h not in expm_cache:
            expm_cache[h] = (expm(a_phys * h), expm(a_aux * h))
        e_phys, e_aux = expm_cache[h]
        s = e_phys @ s
        u = e_aux @ u
        if has_drive:
            wx = aux_stepper.step_adaptive(wx, t0, t1, drive_atol)
            wp = phys_stepper.step_adaptive(wp, t0, t1, drive_atol)
        fundamental[i] = s
        aux[i] = u
        aux_drive[i] = wx
        inhom[i] = wp

    alpha1 = aux[:, 0].copy()
    alpha2 = aux[:, 1].copy()
    zeta1 = aux_drive[:, 0, 0].copy()
    zeta2 = aux_drive[:, 1, 1].copy()
    if n_modes:
        f = np.asarray(spec.bath.couplings, dtype=complex)
        m_coef = (f[:, None] * aux[:, 2 : 2 + n_modes].T).copy()
        n_coef = (np.conj(f)[:, None] * aux[:, 2 + n_modes :].T).copy()
    else:
        m_coef = np.zeros((0, n_t), dtype=complex)
        n_coef = np.zeros((0, n_t), dtype=complex)

    cs = CoefficientSet(
        grid=grid,
        alpha1=alpha1,
        alpha2=alpha2,
        zeta1=zeta1,
        zeta2=zeta2,
        m_coef=m_coef,
        n_coef=n_coef,
        spec=spec,
        fundamental=fundamental,
        inhom=inhom,
    )
    if spec.bath.kind != "memoryless":
        worst = max(commutator_defect(cs, i) for i in range(n_t))
        if worst > defect_tol:
            raise StepSizeTooCoarse(
                f"commutator defect {worst:.3e} exceeds {defect_tol:g}"
            )
    return cs


def bath_coefficients(spec: SystemSpec, grid, coeffs=None) -> BathCoefficientSet:
    """Environment-side coefficient functions on the same grid."""
    spec = validate_spec(spec)
    if spec.bath.kind != "discrete":
        raise UnsupportedBath("bath coefficients require a discrete bath")
    cs = coeffs if coeffs is not None else propagate(spec, grid)
    s = cs.fundamental
    n = spec.bath.n_modes
    rows = 2 + 2 * np.arange(n)
    lam = np.transpose(s[:, rows[:, None], rows[None, :]], (1, 2, 0)).copy()
    lamp = np.transpose(s[:, rows[:, None], rows[None, :] + 1], (1, 2, 0)).copy()
    gam = np.transpose(s[:, rows, 0], (1, 0)).copy()
    gamp = np.transpose(s[:, rows, 1], (1, 0)).copy()
    om = np.transpose(cs.inhom[:, rows], (1, 0)).copy()
    return BathCoefficientSet(
        grid=cs.grid, lambda_=lam, lambda_prime=lamp, gamma=gam, gamma_prime=gamp, omega=om
    )


def closed_form_alpha(spec: SystemSpec, t):
    """(alpha1, alpha2) closed forms for bathless or memoryless scenarios.

    Valid to first order in Im(phi): the 4|phi|^2 shift of the oscillation
    frequency is dropped, matching the strong-drive closed forms these
    feed.  Discrete baths have no closed form here; use `propagate`.
    """
    w0 = spec.omega0
    if spec.bath.kind == "none":
        return np.exp(-1j * w0 * t), math.sin(w0 * t) / w0
    if spec.bath.kind == "memoryless":
        damp = np.exp(-spec.bath.chi0 * t / 2.0)
        return damp * np.exp(-1j * w0 * t), damp * math.sin(w0 * t) / w0
    raise UnsupportedBath("closed-form alpha exists only without a discrete bath")


# ---------------------------------------------------------------------------
# derived scalars
# ---------------------------------------------------------------------------

def commutator_defect(cs: CoefficientSet, t_index) -> float:
    """| [a(t), a^dag(t)] - 1 | evaluated from the coefficient functions."""
    i = t_index
    phi2 = 4.0 * abs(cs.spec.phi) ** 2
    val = abs(cs.alpha1[i]) ** 2 - phi2 * abs(cs.alpha2[i]) ** 2
    if cs.m_coef.size:
        val += float(np.sum(np.abs(cs.m_coef[:, i]) ** 2))
        val -= phi2 * float(np.sum(np.abs(cs.n_coef[:, i]) ** 2))
    return abs(val - 1.0)


def symplectic_defect(cs: CoefficientSet, t_index) -> float:
    """max-norm of S J S^dag - J for the full fundamental matrix."""
    s = cs.fundamental[t_index]
    j = np.diag([1.0 if k % 2 == 0 else -1.0 for k in range(s.shape[0])])
    return float(np.max(np.abs(s @ j @ s.conj().T - j)))


def _mode_occupations(cs, beta):
    if cs.spec.bath.kind != "discrete" or not math.isfinite(beta):
        return np.zeros(cs.m_coef.shape[0])
    w = np.asarray(cs.spec.bath.omegas)
    return 1.0 / np.expm1(beta * w)


def thermal_occupation(cs: CoefficientSet, t_index, beta) -> float:
    """Bose-weighted bath sum sum_k |M_k(t)|^2 / (e^{beta w_k} - 1).

    Zero for an empty mode list (no bath, memoryless) and at beta = inf.
    """
    if cs.m_coef.size == 0:
        return 0.0
    nbar = _mode_occupations(cs, beta)
    return float(np.sum(nbar * np.abs(cs.m_coef[:, t_index]) ** 2))


def thermal_quadratic(cs: CoefficientSet, t_index, beta) -> ThermalQuadratic:
    """Thermal-bath quadratic form entering the generating exponent.

    Derived by normal-ordering the bath displacement operators against the
    thermal state:

        a_mixed   = sum_k [ (|M_k|^2 + 4|phi|^2 |N_k|^2) nbar_k
                            + 4|phi|^2 |N_k|^2 ]
        b_lam2    = sum_k  i conj(phi) conj(M_k) conj(N_k) (2 nbar_k + 1)
        c_lambar2 = -sum_k i phi M_k N_k (2 nbar_k + 1)

    so c_lambar2 = conj(b_lam2) and the resulting density matrix is
    exactly Hermitian.
    """
    i = t_index
    t = float(cs.grid[i])
    if cs.m_coef.size == 0:
        return ThermalQuadratic(0.0, 0j, 0j, beta, t)
    phi = complex(cs.spec.phi)
    m = cs.m_coef[:, i]
    n = cs.n_coef[:, i]
    nbar = _mode_occupations(cs, beta)
    a_mixed = float(
        np.sum((np.abs(m) ** 2 + 4 * abs(phi) ** 2 * np.abs(n) ** 2) * nbar)
        + 4 * abs(phi) ** 2 * np.sum(np.abs(n) ** 2)
    )
    b = 1j * np.conj(phi) * np.sum(np.conj(m) * np.conj(n) * (2 * nbar + 1))
    c = -1j * phi * np.sum(m * n * (2 * nbar + 1))
    return ThermalQuadratic(a_mixed, complex(b), complex(c), beta, t)


def coherent_displacement(cs: CoefficientSet, t_index, gamma) -> complex:
    """Effective displacement -i zeta1 + gamma alpha1 (phi = 0 branch)."""
    return complex(-1j * cs.zeta1[t_index] + gamma * cs.alpha1[t_index])


def zeta_combined(cs: CoefficientSet, t_index, phi=None) -> complex:
    """Drive response zeta1 + 2 i phi zeta2 (reduces to zeta1 at phi = 0)."""
    if phi is None:
        phi = cs.spec.phi
    return complex(cs.zeta1[t_index] + 2j * complex(phi) * cs.zeta2[t_index])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def coefficients_csv_header(n_modes):
    cols = ["t"]
    for name in ("alpha1", "alpha2", "zeta1", "zeta2"):
        cols += [f"{name}_re", f"{name}_im"]
    for j in range(1, n_modes + 1):
        cols += [f"M{j}_re", f"M{j}_im", f"N{j}_re", f"N{j}_im"]
    return cols


def write_coefficients_csv(cs: CoefficientSet, path):
    """CSV with 17-significant-digit columns t, alpha/zeta, per-mode M, N."""
    n_modes = cs.m_coef.shape[0]
    fmt = "%.16e"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(coefficients_csv_header(n_modes)) + "\n")
        for i in range(cs.n_times):
            row = [fmt % cs.grid[i]]
            for arr in (cs.alpha1, cs.alpha2, cs.zeta1, cs.zeta2):
                row += [fmt % arr[i].real, fmt % arr[i].imag]
            for j in range(n_modes):
                row += [
                    fmt % cs.m_coef[j, i].real,
                    fmt % cs.m_coef[j, i].imag,
                    fmt % cs.n_coef[j, i].real,
                    fmt % cs.n_coef[j, i].imag,
                ]
            fh.write(",".join(row) + "\n")
