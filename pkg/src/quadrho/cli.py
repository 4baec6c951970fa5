"""Scenario runner.

Verbs
-----
coeffs          write the propagated coefficient functions as CSV
pn              excitation probabilities (closed-form branches) as CSV
rho             reduced density matrices as JSON, one file per time
oracle-compare  analytic vs brute-force deviation report as JSON
fig1 fig2 fig3  preset parameter sweeps as CSV (captioned figure data)

Config file format (INI)
------------------------
[system]   omega0, phi_imag, beta          (beta may be 'inf')
[drive]    variant = zero | sinusoidal | tabulated
           sinusoidal: k0, nu;  tabulated: times, values (comma lists)
[bath]     variant = none | discrete | memoryless
           discrete: omega_j, f_j (comma lists);  memoryless: chi0
[initial]  gamma                            (complex, e.g. 0.5 or 0.3+0.1j)
[run]      t_grid (comma list) or t_end + steps
           n_cut, s_max, pn_max             (optional truncations)
           oracle_n_sys, oracle_n_bath, oracle_dt, oracle_tail_tol,
           compare_bound                    (oracle-compare only)
           outputs                          (optional comma list; informational)

Exit codes: 0 success, 1 comparison failure, 2 config error,
3 numerical non-convergence.  Identical configs produce byte-identical
output files (fixed float format, fixed iteration order).
"""

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .closedform import large_time_limits, pn_hermite, pn_laguerre_sequence, zeta_sinusoidal
from .coefficients import (
    coherent_displacement,
    propagate,
    thermal_occupation,
    write_coefficients_csv,
    zeta_combined,
)
from .errors import (
    CutoffTooSmallForTemperature,
    NoConvergenceInStepHalving,
    QuadrhoError,
    SeriesNotConverged,
    SpecValidationError,
    StepSizeTooCoarse,
    TruncationNotConverged,
)
from .genfunc import rho_matrix
from .model import BathSpec, DriveSpec, SystemSpec, validate_spec
from .oracle import CutoffPlan, compare, converged_reduced

FLOAT_FMT = "%.16e"

_NONCONVERGENCE = (
    TruncationNotConverged,
    StepSizeTooCoarse,
    SeriesNotConverged,
    NoConvergenceInStepHalving,
    CutoffTooSmallForTemperature,
)


class ConfigError(QuadrhoError):
    """Malformed or inconsistent scenario configuration."""


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_complex(text, where):
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"{where}: not a complex number: {text!r}") from exc


def _parse_float(text, where):
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{where}: not a number: {text!r}") from exc


def _parse_list(text):
    return [tok for tok in (t.strip() for t in text.split(",")) if tok]


@dataclass
class RunConfig:
    spec: SystemSpec
    gamma: complex
    t_grid: np.ndarray
    n_cut: int | None
    s_max: int | None
    pn_max: int
    outputs: tuple
    oracle_n_sys: int
    oracle_n_bath: tuple
    oracle_dt: float
    oracle_tail_tol: float
    oracle_observable_tol: float | None
    compare_bound: float
    raw: dict


def _build_spec(cp):
    sysec = cp["system"] if cp.has_section("system") else {}
    omega0 = _parse_float(sysec.get("omega0", "1.0"), "system.omega0")
    phi_imag = _parse_float(sysec.get("phi_imag", "0.0"), "system.phi_imag")
    phi_real = _parse_float(sysec.get("phi_real", "0.0"), "system.phi_real")
    beta_text = sysec.get("beta", "inf").strip().lower()
    beta = math.inf if beta_text in ("inf", "+inf", "infinity") else _parse_float(
        beta_text, "system.beta"
    )

    dsec = cp["drive"] if cp.has_section("drive") else {}
    variant = dsec.get("variant", "zero").strip()
    if variant == "zero":
        drive = DriveSpec.zero()
    elif variant == "sinusoidal":
        drive = DriveSpec.sinusoidal(
            _parse_float(dsec.get("k0", "0.0"), "drive.k0"),
            _parse_float(dsec.get("nu", "1.0"), "drive.nu"),
        )
    elif variant == "tabulated":
        if "times" not in dsec or "values" not in dsec:
            raise ConfigError("drive.times / drive.values: required for tabulated drive")
        times = [_parse_float(t, "drive.times") for t in _parse_list(dsec["times"])]
        values = [_parse_complex(v, "drive.values") for v in _parse_list(dsec["values"])]
        drive = DriveSpec.tabulated(times, values)
    else:
        raise ConfigError(f"drive.variant: unknown variant {variant!r}")

    bsec = cp["bath"] if cp.has_section("bath") else {}
    variant = bsec.get("variant", "none").strip()
    if variant == "none":
        bath = BathSpec.none()
    elif variant == "discrete":
        omegas = [_parse_float(t, "bath.omega_j") for t in _parse_list(bsec.get("omega_j", ""))]
        fs = [_parse_complex(t, "bath.f_j") for t in _parse_list(bsec.get("f_j", ""))]
        if len(omegas) != len(fs) or not omegas:
            raise ConfigError("bath.omega_j / bath.f_j: need equal-length nonempty lists")
        bath = BathSpec.discrete(list(zip(omegas, fs)))
    elif variant == "memoryless":
        bath = BathSpec.memoryless(_parse_float(bsec.get("chi0", "0.0"), "bath.chi0"))
    else:
        raise ConfigError(f"bath.variant: unknown variant {variant!r}")

    return SystemSpec(
        omega0=omega0, phi=complex(phi_real, phi_imag), drive=drive, bath=bath, beta=beta
    )


def load_config(path, overrides=()):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        where, value = item.split("=", 1)
        section, key = where.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section.strip(), key.strip(), value.strip())

    try:
        spec = validate_spec(_build_spec(cp))
    except SpecValidationError as exc:
        raise ConfigError(str(exc)) from exc

    isec = cp["initial"] if cp.has_section("initial") else {}
    gamma = _parse_complex(isec.get("gamma", "0"), "initial.gamma")

    rsec = cp["run"] if cp.has_section("run") else {}
    if "t_grid" in rsec:
        grid = np.array([_parse_float(t, "run.t_grid") for t in _parse_list(rsec["t_grid"])])
    else:
        t_end = _parse_float(rsec.get("t_end", "10.0"), "run.t_end")
        steps = int(_parse_float(rsec.get("steps", "100"), "run.steps"))
        if steps < 1 or t_end <= 0:
            raise ConfigError("run.t_end / run.steps: need t_end > 0 and steps >= 1")
        grid = np.linspace(0.0, t_end, steps + 1)
    if grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("run.t_grid: must increase strictly from 0")

    outputs = tuple(_parse_list(rsec.get("outputs", ""))) or None
    if outputs is not None and len(outputs) == 0:
        raise ConfigError("run.outputs: at least one output must be requested")

    n_bath_list = [
        int(_parse_float(t, "run.oracle_n_bath"))
        for t in _parse_list(rsec.get("oracle_n_bath", "10"))
    ]
    return RunConfig(
        spec=spec,
        gamma=gamma,
        t_grid=grid,
        n_cut=int(rsec["n_cut"]) if "n_cut" in rsec else None,
        s_max=int(rsec["s_max"]) if "s_max" in rsec else None,
        pn_max=int(rsec.get("pn_max", "4")),
        outputs=outputs or (),
        oracle_n_sys=int(_parse_float(rsec.get("oracle_n_sys", "14"), "run.oracle_n_sys")),
        oracle_n_bath=tuple(n_bath_list),
        oracle_dt=_parse_float(rsec.get("oracle_dt", "0.01"), "run.oracle_dt"),
        oracle_tail_tol=_parse_float(rsec.get("oracle_tail_tol", "1e-10"), "run.oracle_tail_tol"),
        oracle_observable_tol=(
            _parse_float(rsec["oracle_observable_tol"], "run.oracle_observable_tol")
            if "oracle_observable_tol" in rsec
            else None
        ),
        compare_bound=_parse_float(rsec.get("compare_bound", "1e-4"), "run.compare_bound"),
        raw={s: dict(cp[s]) for s in cp.sections()},
    )


# ---------------------------------------------------------------------------
# deterministic writers
# ---------------------------------------------------------------------------

def _fmt(x):
    return FLOAT_FMT % float(x)


def _json_value(obj):
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f'{_json_value(str(k))}: {_json_value(v)}' for k, v in obj.items()) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _write_json(path, obj):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(_json_value(obj) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _rdm_json_dict(rdm):
    return {
        "t": float(rdm.t),
        "n_cut": int(rdm.n_cut),
        "trace_deficit": float(rdm.trace_deficit),
        "rho": [[float(z.real), float(z.imag)] for z in rdm.rho.ravel()],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_coeffs(config, out_dir):
    cs = propagate(config.spec, config.t_grid)
    path = os.path.join(out_dir, "coeffs.csv")
    write_coefficients_csv(cs, path)
    return [path]


def cmd_pn(config, out_dir):
    spec = config.spec
    n_max = config.pn_max
    header = ["t"] + [f"P{n}" for n in range(n_max + 1)] + ["branch"]
    rows = []
    if spec.phi == 0:
        cs = propagate(spec, config.t_grid)
        for i, t in enumerate(config.t_grid):
            z = coherent_displacement(cs, i, config.gamma)
            occ = thermal_occupation(cs, i, spec.beta)
            ps = pn_laguerre_sequence(z, occ, n_max)
            branch = "laguerre" if occ >= 1e-8 else "poisson_limit"
            rows.append([_fmt(t)] + [_fmt(p) for p in ps] + [branch])
    elif spec.bath.kind == "none" and config.gamma == 0:
        phi_i = spec.phi.imag
        w0 = spec.omega0
        cs = None
        if spec.drive.kind != "sinusoidal" and spec.drive.kind != "zero":
            cs = propagate(spec, config.t_grid)
        for i, t in enumerate(config.t_grid):
            alpha1 = np.exp(-1j * w0 * t)
            alpha2 = math.sin(w0 * t) / w0
            if spec.drive.kind == "sinusoidal":
                z = zeta_sinusoidal(spec.drive.k0, spec.drive.nu, w0, phi_i, t)[2]
            elif spec.drive.kind == "zero":
                z = 0j
            else:
                z = zeta_combined(cs, i)
            res = [pn_hermite(alpha1, alpha2, phi_i, z, n) for n in range(n_max + 1)]
            rows.append([_fmt(t)] + [_fmt(r.p) for r in res] + [res[0].branch])
    else:
        raise ConfigError(
            "pn needs phi = 0 (thermal closed form) or a bathless gamma = 0 "
            "strong-drive scenario; use the rho command otherwise"
        )
    path = os.path.join(out_dir, "pn.csv")
    _write_csv(path, header, rows)
    return [path]


def cmd_rho(config, out_dir):
    spec = config.spec
    cs = propagate(spec, config.t_grid)
    paths = []
    for i, t in enumerate(config.t_grid):
        rdm = rho_matrix(
            spec, config.gamma, t,
            n_cut=config.n_cut, s_max=config.s_max, coeffs=cs, t_index=i,
        )
        path = os.path.join(out_dir, f"rho_{i:03d}.json")
        _write_json(path, _rdm_json_dict(rdm))
        paths.append(path)
    return paths


def cmd_oracle_compare(config, out_dir):
    spec = config.spec
    if spec.bath.kind == "memoryless":
        raise ConfigError("oracle-compare needs a discrete bath or none")
    n_cut = config.n_cut if config.n_cut is not None else 8
    times = [t for t in config.t_grid]
    cs = propagate(spec, config.t_grid)
    analytic = [
        rho_matrix(spec, config.gamma, t, n_cut=n_cut, s_max=config.s_max,
                   coeffs=cs, t_index=i)
        for i, t in enumerate(times)
    ]
    n_bath = config.oracle_n_bath
    if spec.bath.kind == "none":
        n_bath = ()
    plan = CutoffPlan(config.oracle_n_sys, n_bath, config.oracle_dt)
    obs_tol = config.oracle_observable_tol
    if obs_tol is None:
        obs_tol = max(config.compare_bound / 10.0, 1e-8)
    oracle_rdms, dt_used, dt_change = converged_reduced(
        spec, plan, config.gamma, times,
        observable_tol=obs_tol,
        tail_tol=config.oracle_tail_tol, n_max=n_cut,
    )
    per_time = []
    worst = 0.0
    for rdm, orc in zip(analytic, oracle_rdms):
        dev = compare(rdm, orc, n_cut)
        worst = max(worst, dev)
        block = np.abs(rdm.rho[: n_cut + 1, : n_cut + 1] - orc.rho[: n_cut + 1, : n_cut + 1])
        per_time.append(
            {
                "t": float(rdm.t),
                "max_deviation": dev,
                "deviations": [float(x) for x in block.ravel()],
            }
        )
    report = {
        "scenario": config.raw,
        "n_max": n_cut,
        "oracle_dt": dt_used,
        "oracle_dt_change": dt_change,
        "bound": config.compare_bound,
        "max_deviation": worst,
        "pass": bool(worst <= config.compare_bound),
        "per_time": per_time,
    }
    path = os.path.join(out_dir, "oracle_compare.json")
    _write_json(path, report)
    return [path], worst <= config.compare_bound


_FIG_ETA = np.round(np.arange(0, 301) * 0.01, 10)
_FIG_TAU = np.round(np.arange(0, int(3 * math.pi / 0.01) + 1) * 0.01, 10)


def _fig_eta_sweep(out_dir, name, k0, n_max):
    z2, _ = large_time_limits(k0, 0.99, 1.0, 0.1)
    z = math.sqrt(z2)
    header = ["eta"] + [f"P{n}" for n in range(n_max + 1)]
    rows = []
    for occ in _FIG_ETA:
        ps = pn_laguerre_sequence(z, float(occ), n_max)
        rows.append([_fmt(occ)] + [_fmt(p) for p in ps])
    path = os.path.join(out_dir, f"{name}.csv")
    _write_csv(path, header, rows)
    return [path]


def cmd_fig1(config, out_dir):
    return _fig_eta_sweep(out_dir, "fig1", 0.02, 3)


def cmd_fig2(config, out_dir):
    return _fig_eta_sweep(out_dir, "fig2", 0.2, 4)


def cmd_fig3(config, out_dir):
    k0, phi_i, nu, w0 = 1.0, 0.1, 0.9, 1.0
    header = ["tau"] + [f"P{n}" for n in range(5)]
    rows = []
    for tau in _FIG_TAU:
        alpha1 = np.exp(-1j * w0 * tau)
        alpha2 = math.sin(w0 * tau) / w0
        z = zeta_sinusoidal(k0, nu, w0, phi_i, float(tau))[2]
        ps = [pn_hermite(alpha1, alpha2, phi_i, z, n).p for n in range(5)]
        rows.append([_fmt(tau)] + [_fmt(p) for p in ps])
    path = os.path.join(out_dir, "fig3.csv")
    _write_csv(path, header, rows)
    return [path]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "coeffs": cmd_coeffs,
    "pn": cmd_pn,
    "rho": cmd_rho,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
}

_NO_CONFIG_NEEDED = {"fig1", "fig2", "fig3"}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="quadrho",
        description="Reduced-density-matrix scenarios for a driven quadratic mode.",
    )
    parser.add_argument(
        "verb",
        choices=sorted(list(_COMMANDS) + ["oracle-compare"]),
        help="what to compute",
    )
    parser.add_argument("--config", help="scenario file (INI format)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    args = parser.parse_args(argv)

    try:
        if args.config is None:
            if args.verb not in _NO_CONFIG_NEEDED:
                raise ConfigError(f"--config is required for {args.verb!r}")
            config = None
        else:
            config = load_config(args.config, args.override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    try:
        if args.verb == "oracle-compare":
            paths, passed = cmd_oracle_compare(config, args.out)
            for p in paths:
                print(p)
            if not passed:
                print("comparison failure: deviation exceeds bound", file=sys.stderr)
                return 1
            return 0
        paths = _COMMANDS[args.verb](config, args.out)
        for p in paths:
            print(p)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NONCONVERGENCE as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return 3
    except SpecValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
