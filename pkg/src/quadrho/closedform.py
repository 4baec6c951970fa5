"""Closed-form excitation distributions and limiting cases.

Covers the zero-two-photon (phi = 0) displaced-thermal law (Laguerre
form), its zero-temperature Poisson limit, the mean-excitation identity,
the strong-drive no-dissipation Hermite series, the sinusoidal-drive
response closed forms, and the memoryless large-time limits.

Numerical notes
---------------
* The Laguerre recurrence runs with the geometric prefactor folded in
  multiplicatively per step (T_n = (eta/(1+eta))^n L_n), all terms
  positive for the negative argument in scope, so intermediates stay at
  the scale of the probabilities themselves.
* The Hermite series uses one of two normalized recurrences picked by
  the magnitude of the argument, so near-resonant times (alpha2 -> 0,
  argument -> inf) evaluate without overflow; probabilities stay exact
  through the removable singularity.  Accuracy degrades once the drive
  mean |zeta|^2 grows past ~15 (alternating-series cancellation).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResonantDrive, SeriesNotConverged
from .specfun import log_factorial

_POISSON_SWITCH = 1e-8     # occupation below which the Laguerre law uses its limit
_RESONANT_SWITCH = 1e-10   # |alpha2 * phi_I| below which the Hermite law is resonant
_LARGE_ARG2 = 300.0        # |w|^2 threshold between the two Hermite scalings


@dataclass(frozen=True)
class PnResult:
    """Excitation probability with the formula branch that produced it."""

    n: int
    p: float
    branch: str


def mean_excitation(z, eta) -> float:
    """Mean excitation number |Z|^2 + eta of the displaced thermal state."""
    return float(abs(z) ** 2 + eta)


def pn_poisson(z, n) -> PnResult:
    """Poisson probability with mean |z|^2, evaluated in log space."""
    mu = abs(z) ** 2
    if mu == 0.0:
        return PnResult(n, 1.0 if n == 0 else 0.0, "poisson_limit")
    p = math.exp(n * math.log(mu) - mu - log_factorial(n))
    return PnResult(n, p, "poisson_limit")


def _laguerre_weighted_seq(z2, eta, n_max):
    """T_n = (eta/(1+eta))^n L_n(-z2 / (eta (1+eta))) for n = 0..n_max."""
    r = eta / (1.0 + eta)
    x = -z2 / (eta * (1.0 + eta))
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = r * (1.0 - x)
    for k in range(1, n_max):
        out[k + 1] = (r * (2 * k + 1 - x) * out[k] - k * r * r * out[k - 1]) / (k + 1)
    return out


def pn_laguerre(z, eta, n) -> PnResult:
    """Displaced-thermal excitation probability (phi = 0 closed form).

    P_n = e^{-|z|^2/(1+eta)} / (1+eta) * (eta/(1+eta))^n
          * L_n(-|z|^2 / (eta (1+eta)));
    below eta = 1e-8 the Poisson limit branch is returned (the two agree
    to ~1e-6 at the switch point).
    """
    if eta < 0:
        raise ValueError("occupation must be >= 0")
    if eta < _POISSON_SWITCH:
        return pn_poisson(z, n)
    z2 = abs(z) ** 2
    pref = math.exp(-z2 / (1.0 + eta)) / (1.0 + eta)
    p = pref * _laguerre_weighted_seq(z2, eta, n)[n]
    return PnResult(n, float(p), "laguerre")


def pn_laguerre_sequence(z, eta, n_max):
    """P_0..P_n_max of the displaced-thermal law, as a numpy array."""
    if eta < _POISSON_SWITCH:
        return np.array([pn_poisson(z, k).p for k in range(n_max + 1)])
    z2 = abs(z) ** 2
    pref = math.exp(-z2 / (1.0 + eta)) / (1.0 + eta)
    return pref * _laguerre_weighted_seq(z2, eta, n_max)


def resonant_poisson(zeta_at, n) -> PnResult:
    """Poisson law with mean |zeta|^2, the removable-singularity limit of
    the strong-drive series at alpha2 = 0 (omega0 t = m pi)."""
    mu = abs(zeta_at) ** 2
    if mu == 0.0:
        return PnResult(n, 1.0 if n == 0 else 0.0, "resonant_poisson")
    p = math.exp(n * math.log(mu) - mu - log_factorial(n))
    return PnResult(n, p, "resonant_poisson")


# The alternating sum below cancels from ~e^{+|zeta|^2} down to
# ~e^{-|zeta|^2}, so the terms are built in the widest native float the
# platform has (80-bit on x86); that carries the law to drive means ~20
# instead of ~12.
_LD = np.longdouble
_CLD = np.clongdouble


def _hermite_terms_large_arg(n, s_max, w, zeta_mod2):
    """|H_{n+s}(w)|^2-weighted magnitudes via the H/(2w)^k scaling.

    Valid while |w|^2 >= k/2 over the needed orders; term magnitudes come
    out as |zeta|^{2(n+s)} / (n! s!) * |H_{n+s}/(2w)^{n+s}|^2.
    """
    kmax = n + s_max
    hs = np.empty(kmax + 1, dtype=_CLD)
    hs[0] = 1.0
    if kmax:
        hs[1] = 1.0
        inv2w2 = 1.0 / (2.0 * _CLD(w) * _CLD(w))
        for k in range(1, kmax):
            hs[k + 1] = hs[k] - k * inv2w2 * hs[k - 1]
    mu = _LD(zeta_mod2)
    base = _LD(1.0)
    for k in range(1, n + 1):  # |zeta|^{2n} / n!
        base *= mu / k
    mags = np.empty(s_max + 1, dtype=_LD)
    for s in range(s_max + 1):
        mags[s] = base * np.abs(hs[n + s]) ** 2
        base *= mu / (s + 1)
    return mags


def _hermite_terms_small_arg(n, s_max, w, x):
    """Term magnitudes via the H/(2^{k/2} sqrt(k!)) scaling (moderate |w|).

    Terms are (2x)^{n+s} C(n+s, s) |h_{n+s}|^2 with h the normalized
    recurrence h_{k+1} = sqrt(2/(k+1)) w h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    kmax = n + s_max
    h = np.empty(kmax + 1, dtype=_CLD)
    h[0] = 1.0
    if kmax:
        h[1] = np.sqrt(_LD(2.0)) * _CLD(w)
        for k in range(1, kmax):
            h[k + 1] = (
                np.sqrt(_LD(2.0) / (k + 1)) * _CLD(w) * h[k]
                - np.sqrt(_LD(k) / (k + 1)) * h[k - 1]
            )
    mags = np.empty(s_max + 1, dtype=_LD)
    comb = (2 * _LD(x)) ** n  # (2x)^{n+s} C(n+s, s), updated multiplicatively
    for s in range(s_max + 1):
        mags[s] = comb * np.abs(h[n + s]) ** 2
        comb *= 2 * _LD(x) * (n + s + 1) / (s + 1)
    return mags


def pn_hermite(alpha1, alpha2, phi_i, zeta, n, s_max=300) -> PnResult:
    """Strong-drive, no-dissipation excitation probability.

    Evaluates the alternating Hermite series with complex argument
    w = -zeta / (2 sqrt(alpha2 phi_i alpha1)) and prefactor
    |alpha2 phi_i alpha1|^n (the modulus keeps the series sign-correct
    for alpha2 < 0; |H|^2 is insensitive to the square-root branch, so
    the principal branch is used).  Within |alpha2 phi_i| < 1e-10 of a
    zero of alpha2 the removable singularity is replaced by the resonant
    Poisson limit with mean |zeta|^2.

    This law drops the mixed phi_i^2 alpha2^2 exponent term, so wherever
    the true probability is smaller than that term (vacuum-adjacent
    elements at small drive response) the result can undershoot zero by
    O(phi_i^2 alpha2^2); that is the approximation itself, not a series
    failure, and it vanishes against the full generating-series route.
    """
    a = complex(alpha2) * phi_i * complex(alpha1)
    x = abs(a)
    if x < _RESONANT_SWITCH:
        return resonant_poisson(zeta, n)
    if zeta == 0:
        w = 0j
        mags = _hermite_terms_small_arg(n, s_max, w, x)
    else:
        w = -complex(zeta) / (2.0 * cmath.sqrt(a))
        if abs(w) ** 2 >= _LARGE_ARG2:
            mags = _hermite_terms_large_arg(n, s_max, w, abs(zeta) ** 2)
        else:
            mags = _hermite_terms_small_arg(n, s_max, w, x)
    signs = np.where(np.arange(s_max + 1) % 2 == 0, 1.0, -1.0)
    terms = signs * mags
    total = float(terms.sum())
    scale = max(abs(total), 1e-300)
    if mags[-1] > 1e-10 * scale and mags[-1] > 1e-300:
        raise SeriesNotConverged(
            f"strong-drive series tail {mags[-1]:.3e} at s_max = {s_max} "
            f"(partial sum {total:.3e})"
        )
    return PnResult(n, total, "hermite_series")


def zeta_sinusoidal(k0, nu, omega0, phi_i, t):
    """Closed-form drive responses (zeta1, zeta2, zeta) for k(t) = k0 sin(nu t).

    Off-resonant only: |nu - omega0| < 1e-9 raises ResonantDrive (the
    closed form is singular there and resonant driving is out of scope).
    """
    if abs(nu - omega0) < 1e-9:
        raise ResonantDrive(f"nu = {nu:g} coincides with omega0 = {omega0:g}")
    den = nu * nu - omega0 * omega0
    z1 = k0 * (
        nu * cmath.exp(-1j * omega0 * t) - nu * math.cos(nu * t)
        + 1j * omega0 * math.sin(nu * t)
    ) / den
    z2 = k0 * (omega0 * math.sin(nu * t) - nu * math.sin(omega0 * t)) / (-omega0 * den)
    z = k0 * (
        nu * omega0 * cmath.exp(-1j * omega0 * t)
        - nu * omega0 * math.cos(nu * t)
        + (2.0 * phi_i + 1j * omega0) * omega0 * math.sin(nu * t)
        - 2.0 * nu * phi_i * math.sin(omega0 * t)
    ) / (omega0 * den)
    return z1, z2, z


def large_time_limits(k0, nu, omega0, chi0, bath_modes=(), beta=math.inf):
    """Memoryless-bath steady values (|Z|^2 beat average, thermal sum).

    z2 is the time-averaged |zeta1|^2 of the driven, damped mode (the
    steady state keeps a 2*nu beat whose average this is); eta_inf sums
    the Bose-weighted mode responses 4|f_k|^2 / (chi0^2 + 4(omega0 -
    omega_k)^2), peaked at resonance, zero at beta = inf.
    """
    z2 = (
        k0 * k0 * (8.0 * nu * nu + 2.0 * (chi0 * chi0 + 4.0 * omega0 * omega0))
        / (
            (4.0 * nu * nu + chi0 * chi0 - 4.0 * omega0 * omega0) ** 2
            + 16.0 * chi0 * chi0 * omega0 * omega0
        )
    )
    eta_inf = 0.0
    if math.isfinite(beta):
        for wk, fk in bath_modes:
            eta_inf += (
                4.0 * abs(fk) ** 2
                / (chi0 * chi0 + 4.0 * (omega0 - wk) ** 2)
                / math.expm1(beta * wk)
            )
    return float(z2), float(eta_inf)
