"""Brute-force truncated-Fock oracle.

Builds the full Hamiltonian of mode + discrete bath on a dense truncated
Fock lattice, prepares coherent (x) thermal initial states, propagates
the total density matrix unitarily (midpoint matrix exponential per
step, so the drive is sampled at the step center) and partial-traces to
the reduced mode state.  Everything is dense and deterministic: mixed
thermal states are evolved directly as density matrices, no sampling.

Basis ordering is system index slowest: |n_sys, n_b1, n_b2, ...> maps to
linear index n_sys * prod(bath dims) + ...
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    CutoffTooSmallForTemperature,
    DimensionCeiling,
    NoConvergenceInStepHalving,
    UnsupportedBath,
)
from .genfunc import ReducedDensityMatrix
from .model import SystemSpec, drive_eval, validate_spec

DEFAULT_DIM_CEILING = 4096


@dataclass(frozen=True)
class CutoffPlan:
    """Truncation and stepping plan for one oracle run."""

    n_sys: int
    n_bath: tuple
    dt: float
    dim_ceiling: int = DEFAULT_DIM_CEILING

    def __post_init__(self):
        object.__setattr__(self, "n_bath", tuple(int(n) for n in np.atleast_1d(self.n_bath)))
        if self.n_sys < 1:
            raise ValueError("system cutoff must be >= 1")
        if self.total_dim > self.dim_ceiling:
            raise DimensionCeiling(
                f"total dimension {self.total_dim} exceeds ceiling {self.dim_ceiling}"
            )

    @property
    def dims(self):
        return (self.n_sys + 1,) + tuple(n + 1 for n in self.n_bath)

    @property
    def total_dim(self):
        return int(np.prod([self.n_sys + 1] + [n + 1 for n in self.n_bath]))


@dataclass(frozen=True)
class FullState:
    """Dense total density matrix over the truncated product basis."""

    rho: np.ndarray
    dims: tuple
    t: float = 0.0

    def trace(self):
        return complex(np.trace(self.rho))

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2).min())


def _destroy(d):
    return np.diag(np.sqrt(np.arange(1.0, d)), 1).astype(complex)


def _embed(op, dims, which):
    """Lift a single-site operator into the product space."""
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[which] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


class _Operators:
    """Cached product-space operators for one (spec, plan) pair."""

    def __init__(self, spec, plan):
        if spec.bath.kind == "memoryless":
            raise UnsupportedBath("the oracle needs a finite mode list (discrete or none)")
        n_modes = spec.bath.n_modes
        if len(plan.n_bath) != n_modes:
            raise ValueError("plan has wrong number of bath cutoffs")
        self.spec = spec
        self.plan = plan
        dims = plan.dims
        a = _embed(_destroy(dims[0]), dims, 0)
        self.a = a
        self.ad = a.conj().T
        self.h_static = (
            spec.omega0 * (self.ad @ a + 0.5 * np.eye(plan.total_dim))
            + np.conj(spec.phi) * (a @ a)
            + spec.phi * (self.ad @ self.ad)
        )
        for j in range(n_modes):
            b = _embed(_destroy(dims[1 + j]), dims, 1 + j)
            wj = spec.bath.omegas[j]
            fj = complex(spec.bath.couplings[j])
            self.h_static += wj * (b.conj().T @ b)
            self.h_static += fj * (self.ad @ b) + np.conj(fj) * (b.conj().T @ a)

    def hamiltonian(self, t):
        k = drive_eval(self.spec.drive, t)
        if k == 0:
            return self.h_static
        return self.h_static + k * self.ad + np.conj(k) * self.a


def build_hamiltonian(spec: SystemSpec, plan: CutoffPlan, t=0.0):
    """Dense Hamiltonian at time t on the truncated product basis."""
    return _Operators(validate_spec(spec), plan).hamiltonian(t)


def thermal_bath_state(spec: SystemSpec, plan: CutoffPlan, tail_tol=1e-10):
    """Thermal bath factor, normalized on the truncated ladders.

    Raises CutoffTooSmallForTemperature when the weight the untruncated
    Bose distribution puts beyond any mode cutoff exceeds tail_tol.
    """
    beta = spec.beta
    out = np.ones((1, 1), dtype=complex)
    for j, nb in enumerate(plan.n_bath):
        d = nb + 1
        if math.isinf(beta):
            pops = np.zeros(d)
            pops[0] = 1.0
        else:
            w = spec.bath.omegas[j]
            q = math.exp(-beta * w)
            if q**d > tail_tol:
                raise CutoffTooSmallForTemperature(
                    f"mode {j}: tail {q ** d:.3e} beyond cutoff {nb} exceeds {tail_tol:g}"
                )
            pops = q ** np.arange(d)
            pops /= pops.sum()
        out = np.kron(out, np.diag(pops.astype(complex)))
    return out


def coherent_state_vector(gamma, d):
    """Truncated, renormalized coherent-state ket."""
    gamma = complex(gamma)
    vec = np.zeros(d, dtype=complex)
    if gamma == 0:
        vec[0] = 1.0
        return vec
    n = np.arange(d)
    lg = np.array([math.lgamma(k + 1) for k in range(d)])
    vec = np.exp(n * math.log(abs(gamma)) - 0.5 * lg) * np.exp(1j * n * np.angle(gamma))
    return vec / np.linalg.norm(vec)


def initial_state(spec: SystemSpec, plan: CutoffPlan, gamma, tail_tol=1e-10) -> FullState:
    """Coherent system state (x) thermal bath as one dense matrix."""
    vec = coherent_state_vector(complex(gamma), plan.dims[0])
    rho_sys = np.outer(vec, vec.conj())
    rho = np.kron(rho_sys, thermal_bath_state(spec, plan, tail_tol))
    return FullState(rho=rho, dims=plan.dims, t=0.0)


def evolve(spec: SystemSpec, plan: CutoffPlan, state: FullState, t_end) -> FullState:
    """Unitary propagation to t_end with fixed step from the plan."""
    return _evolve_ops(_Operators(validate_spec(spec), plan), state, t_end)


def _evolve_ops(ops, state, t_end):
    t = state.t
    if t_end < t:
        raise ValueError("cannot evolve backwards")
    if t_end == t:
        return state
    n_steps = max(1, math.ceil((t_end - t) / ops.plan.dt))
    h = (t_end - t) / n_steps
    rho = state.rho
    for i in range(n_steps):
        u = expm(-1j * h * ops.hamiltonian(t + (i + 0.5) * h))
        rho = u @ rho @ u.conj().T
    return FullState(rho=rho, dims=state.dims, t=t_end)


def partial_trace(state: FullState) -> np.ndarray:
    """Reduced system matrix: trace over every bath factor."""
    dims = state.dims
    d_sys = dims[0]
    d_env = int(np.prod(dims[1:])) if len(dims) > 1 else 1
    r = state.rho.reshape(d_sys, d_env, d_sys, d_env)
    return np.einsum("ibjb->ij", r)


def reduce_state(state: FullState, plan: CutoffPlan) -> ReducedDensityMatrix:
    """Partial trace packaged with diagnostics."""
    rho_s = partial_trace(state)
    return ReducedDensityMatrix(
        t=state.t,
        n_cut=plan.n_sys,
        rho=rho_s,
        trace_deficit=float(1.0 - np.trace(rho_s).real),
        truncation_order=0,
    )


def compare(analytic: ReducedDensityMatrix, oracle: ReducedDensityMatrix, n_max) -> float:
    """Largest element deviation over the shared block n, m <= n_max."""
    if analytic.n_cut < n_max or oracle.n_cut < n_max:
        raise ValueError("both matrices must cover the comparison block")
    da = analytic.rho[: n_max + 1, : n_max + 1]
    do = oracle.rho[: n_max + 1, : n_max + 1]
    return float(np.max(np.abs(da - do)))


def reduced_at_times(spec, plan, gamma, times, tail_tol=1e-10):
    """Single pass to max(times), collecting reduced matrices at each time."""
    spec = validate_spec(spec)
    times = sorted(float(t) for t in times)
    ops = _Operators(spec, plan)
    state = initial_state(spec, plan, gamma, tail_tol)
    out = []
    for t in times:
        state = _evolve_ops(ops, state, t)
        out.append(reduce_state(state, plan))
    return out


def converged_reduced(
    spec,
    plan,
    gamma,
    times,
    observable_tol=1e-8,
    max_halvings=6,
    tail_tol=1e-10,
    n_max=None,
):
    """Step-halving wrapper: refine dt until collected elements settle.

    Returns (reduced matrices, dt used, last change).  The change metric
    is the max deviation over all requested times of the n, m <= n_max
    block (full block by default).
    """
    n_max = plan.n_sys if n_max is None else n_max
    dt = plan.dt
    prev = reduced_at_times(spec, plan, gamma, times, tail_tol)
    for _ in range(max_halvings):
        dt /= 2.0
        fine_plan = CutoffPlan(plan.n_sys, plan.n_bath, dt, plan.dim_ceiling)
        cur = reduced_at_times(spec, fine_plan, gamma, times, tail_tol)
        change = max(compare(a, b, n_max) for a, b in zip(prev, cur))
        if change < observable_tol:
            return cur, dt, change
        prev = cur
    raise NoConvergenceInStepHalving(
        f"observables still change by {change:.3e} at dt = {dt:g}"
    )
