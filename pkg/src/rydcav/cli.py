"""Command-line entry point: scenarios in, CSV/JSON artifacts out."""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from time import perf_counter

import numpy as np

from . import cpwfield, metrics, protocol, qops
from .constants import TWO_PI
from .evolve import (NumericalFailureError, build_liouvillian, propagator)
from .model import PhysicalParams, SegmentConfig, collapse_ops, hamiltonian
from .qops import DensityMatrix, HilbertSpace

ENV_OUTPUT_DIR = "RYDCAV_OUTPUT_DIR"

SCENARIOS = ("bell", "truth-table", "rabi", "sweep-gq", "sweep-temp",
             "field", "validate")

# config keys accepted in [params]; frequencies are given as value/2pi in Hz
_PARAM_KEYS = {
    "g_over_2pi": ("g", TWO_PI),
    "omega_c_over_2pi": ("omega_c", TWO_PI),
    "omega_rr_over_2pi": ("omega_rr", TWO_PI),
    "omega_rabi_over_2pi": ("omega_rabi", TWO_PI),
    "g_sc_over_2pi": ("g_sc", TWO_PI),
    "q_factor": ("q_factor", 1.0),
    "gamma_r": ("gamma_r", 1.0),
    "gamma_rp": ("gamma_rp", 1.0),
    "gamma_sc": ("gamma_sc", 1.0),
    "gamma_phi": ("gamma_phi", 1.0),
    "temp_k": ("temp", 1.0),
    "dipole_rr": ("dipole_rr", 1.0),
}

_GEOMETRY_KEYS = {
    "s_m": "s", "w_m": "w", "eps_r": "eps_r", "half_width_m": "half_width",
    "height_m": "height", "depth_m": "depth", "spacing_m": "spacing",
    "length_m": "length",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str
    params: PhysicalParams = field(default_factory=PhysicalParams)
    geometry: cpwfield.CpwGeometry = field(default_factory=cpwfield.CpwGeometry)
    axes: dict = field(default_factory=dict)
    outdir: Path = None
    workers: int = None
    ideal_pulses: bool = True
    seed: int = 0
    nmax: int = None


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def parse_axis(raw: str, key: str) -> np.ndarray:
    """Axis spec: 'log:lo:hi:n', 'lin:lo:hi:n', or a comma list of values."""
    raw = raw.strip()
    if raw.startswith(("log:", "lin:")):
        kind, *rest = raw.split(":")
        if len(rest) != 3:
            raise ConfigError(f"{key}: expected {kind}:lo:hi:n, got {raw!r}")
        lo = _parse_float(rest[0], key)
        hi = _parse_float(rest[1], key)
        try:
            n = int(rest[2])
        except ValueError:
            raise ConfigError(f"{key}: point count must be an integer") from None
        if n < 1:
            raise ConfigError(f"{key}: point count must be >= 1")
        space = np.geomspace if kind == "log" else np.linspace
        return space(lo, hi, n)
    return np.array([_parse_float(v, key) for v in raw.split(",")])


def _collect(cp: configparser.ConfigParser, overrides) -> dict:
    """Flatten config sections plus --set overrides into {section.key: raw}."""
    flat = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            flat[f"{section}.{key}"] = raw
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        if "." not in key:
            key = f"params.{key}"
        flat[key] = raw
    return flat


def build_config(scenario: str, args) -> RunConfig:
    cp = configparser.ConfigParser()
    if args.config:
        if not Path(args.config).is_file():
            raise ConfigError(f"config file not found: {args.config}")
        cp.read(args.config)
    flat = _collect(cp, args.set)

    cfg = RunConfig(scenario=scenario)
    params_kw = {}
    geo_kw = {}
    for key, raw in flat.items():
        section, name = key.split(".", 1)
        if section == "params":
            if name not in _PARAM_KEYS:
                raise ConfigError(f"unknown key params.{name}")
            attr, scale = _PARAM_KEYS[name]
            params_kw[attr] = scale * _parse_float(raw, key)
        elif section == "geometry":
            if name not in _GEOMETRY_KEYS:
                raise ConfigError(f"unknown key geometry.{name}")
            geo_kw[_GEOMETRY_KEYS[name]] = _parse_float(raw, key)
        elif section == "axes":
            if name not in ("g_over_2pi", "q_factor", "temp_k"):
                raise ConfigError(f"unknown key axes.{name}")
            cfg.axes[name] = parse_axis(raw, key)
        elif section == "run":
            if name == "ideal_pulses":
                cfg.ideal_pulses = _parse_bool(raw, key)
            elif name == "lossless":
                if _parse_bool(raw, key):
                    params_kw["__lossless__"] = True
            elif name == "workers":
                cfg.workers = int(_parse_float(raw, key))
            elif name == "seed":
                cfg.seed = int(_parse_float(raw, key))
            elif name == "nmax":
                cfg.nmax = int(_parse_float(raw, key))
            else:
                raise ConfigError(f"unknown key run.{name}")
        else:
            raise ConfigError(f"unknown section {section!r} (in {key})")

    lossless = params_kw.pop("__lossless__", False) or args.lossless
    try:
        cfg.params = PhysicalParams(**params_kw)
        cfg.geometry = cpwfield.CpwGeometry(**geo_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if lossless:
        cfg.params = cfg.params.lossless()
    if args.workers is not None:
        cfg.workers = args.workers
    outdir = args.out or os.environ.get(ENV_OUTPUT_DIR) or "."
    cfg.outdir = Path(outdir)
    return cfg


def _write_json(path: Path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _summary(scenario: str, detail: str, wall: float):
    print(f"{scenario}: {detail} wall={wall:.2f}s")


def run_bell(cfg: RunConfig) -> int:
    t0 = perf_counter()
    res = protocol.bell_prep(cfg.params, ideal_pulses=cfg.ideal_pulses,
                             nmax=cfg.nmax)
    f_analytic = metrics.analytic_fidelity(cfg.params) if cfg.params.g > 0 else math.nan
    p = cfg.params
    header = "g_over_2pi_hz,q_factor,temp_k,f_bell,f_analytic,f_gamma"
    row = ",".join(format(v, ".12g") for v in
                   (p.g / TWO_PI, p.q_factor, p.temp, res.fidelity,
                    f_analytic, res.cavity_prep_fidelity))
    with open(cfg.outdir / "bell.csv", "w", newline="") as fh:
        fh.write(header + "\n" + row + "\n")
    _write_json(cfg.outdir / "bell.json", {
        "scenario": "bell",
        "params": asdict(p),
        "ideal_pulses": cfg.ideal_pulses,
        "fidelity": res.fidelity,
        "f_analytic": f_analytic,
        "f_gamma": res.cavity_prep_fidelity,
        "timings_s": list(res.timings),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })
    _summary("bell", f"F={res.fidelity:.6f} F_gamma={res.cavity_prep_fidelity:.6f}",
             perf_counter() - t0)
    return 0


def run_truth_table(cfg: RunConfig) -> int:
    t0 = perf_counter()
    phases = protocol.cz_truth_table(cfg.params, ideal_pulses=cfg.ideal_pulses,
                                     nmax=cfg.nmax)
    lines = ["basis,phase_re,phase_im"]
    for label, ph in zip(("00", "01", "10", "11"), phases):
        lines.append(f"{label},{ph.real:.12g},{ph.imag:.12g}")
    with open(cfg.outdir / "truth_table.csv", "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_json(cfg.outdir / "truth_table.json", {
        "scenario": "truth-table",
        "params": asdict(cfg.params),
        "ideal_pulses": cfg.ideal_pulses,
        "phases": [[ph.real, ph.imag] for ph in phases],
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })
    pretty = ", ".join(f"{ph.real:+.6f}{ph.imag:+.6f}j" for ph in phases)
    _summary("truth-table", f"phases=({pretty})", perf_counter() - t0)
    return 0


def rabi_series(p: PhysicalParams, n_points: int = 201, nmax: int = None):
    """Excited-population time series over one vacuum Rabi period.

    Starts from |r, 1> at zero detuning and returns (times, populations of
    |r', 0>); lossless this follows sin^2(g t) exactly.
    """
    if nmax is None:
        nmax = qops.auto_nmax(p.nbar)
    space = HilbertSpace.atom_cavity(nmax)
    rho = DensityMatrix.from_ket(space, qops.basis_ket(space, atom="r", cavity=1))
    liou = build_liouvillian(hamiltonian(p, SegmentConfig(), space),
                             collapse_ops(p, space))
    period = math.pi / p.g
    times = np.linspace(0.0, period, n_points)
    step = propagator(liou, times[1] - times[0])
    target = space.index(atom="rp", cavity=0)
    d = space.dim
    v = rho.data.reshape(-1, order="F")
    pops = np.empty(n_points)
    for k in range(n_points):
        if k:
            v = step @ v
        pops[k] = v.reshape((d, d), order="F")[target, target].real
    return times, pops


def run_rabi(cfg: RunConfig) -> int:
    t0 = perf_counter()
    times, pops = rabi_series(cfg.params, nmax=cfg.nmax)
    expected = np.sin(cfg.params.g * times) ** 2
    lines = ["t_s,p_excited,sin2_gt"]
    for t, pe, ex in zip(times, pops, expected):
        lines.append(f"{t:.12g},{pe:.12g},{ex:.12g}")
    with open(cfg.outdir / "rabi.csv", "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_json(cfg.outdir / "rabi.json", {
        "scenario": "rabi",
        "params": asdict(cfg.params),
        "max_abs_deviation": float(np.abs(pops - expected).max()),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })
    _summary("rabi", f"max|P - sin^2(gt)|={np.abs(pops - expected).max():.3e}",
             perf_counter() - t0)
    return 0


def run_sweep_gq(cfg: RunConfig) -> int:
    t0 = perf_counter()
    res = metrics.sweep_gq(cfg.params,
                           g_axis=cfg.axes.get("g_over_2pi"),
                           q_axis=cfg.axes.get("q_factor"),
                           ideal_pulses=cfg.ideal_pulses,
                           workers=cfg.workers)
    res.metadata["seed"] = cfg.seed
    res.to_csv(cfg.outdir / "sweep_gq.csv")
    res.to_json(cfg.outdir / "sweep_gq.json")
    best = np.nanmax(res.values["f_bell"])
    _summary("sweep-gq", f"{res.values['f_bell'].size} cells best F={best:.6f}",
             perf_counter() - t0)
    return 0


def run_sweep_temp(cfg: RunConfig) -> int:
    t0 = perf_counter()
    res = metrics.sweep_temperature(cfg.params,
                                    t_axis=cfg.axes.get("temp_k"),
                                    ideal_pulses=cfg.ideal_pulses,
                                    workers=cfg.workers)
    res.metadata["seed"] = cfg.seed
    res.to_csv(cfg.outdir / "sweep_temp.csv")
    res.to_json(cfg.outdir / "sweep_temp.json")
    f = res.values["f_bell"]
    _summary("sweep-temp", f"{f.size} points F(0)={f[0]:.6f} F(max T)={f[-1]:.6f}",
             perf_counter() - t0)
    return 0


def run_field(cfg: RunConfig) -> int:
    t0 = perf_counter()
    grid = cpwfield.solve_potential(cfg.geometry)
    grid = cpwfield.normalize_zero_point(grid)
    gmap = cpwfield.coupling_map(grid, cfg.params.dipole_rr)
    cpwfield.write_field_csv(grid, gmap, cfg.outdir / "field.csv")
    cpwfield.write_field_json(grid, gmap, cfg.outdir / "field.json")
    _summary("field", f"peak g/2pi={gmap.max() / TWO_PI / 1e6:.3f} MHz "
             f"residual={grid.residual:.2e} sweeps={grid.iterations}",
             perf_counter() - t0)
    return 0


def run_validate(cfg: RunConfig) -> int:
    p = cfg.params
    nmax = cfg.nmax if cfg.nmax is not None else qops.auto_nmax(p.nbar)
    rows = [
        ("kappa/2pi (Hz)", p.kappa / TWO_PI),
        ("nbar_th", p.nbar),
        ("fock cutoff nmax", nmax),
        ("tau_pi = pi/Omega (s)", math.pi / p.omega_rabi if p.omega_rabi else math.inf),
        ("tau_window = pi/g (s)", math.pi / p.g if p.g else math.inf),
        ("tau_total (s)", metrics.gate_duration(p.omega_rabi, p.g)
         if p.omega_rabi and p.g else math.inf),
        ("cavity load time (s)", math.pi / (2 * p.g_sc) if p.g_sc else math.inf),
        ("analytic fidelity", metrics.analytic_fidelity(p) if p.g else math.nan),
        ("pi-pulse error P_r", metrics.pi_pulse_error(p.omega_rabi, p.gamma_r)
         if p.omega_rabi else math.nan),
    ]
    for name, value in rows:
        print(f"{name:24s} {value:.10g}" if isinstance(value, float)
              else f"{name:24s} {value}")
    return 0


_RUNNERS = {
    "bell": run_bell,
    "truth-table": run_truth_table,
    "rabi": run_rabi,
    "sweep-gq": run_sweep_gq,
    "sweep-temp": run_sweep_temp,
    "field": run_field,
    "validate": run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcav",
        description="Atom-photon gate simulations on a CPW resonator",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} or .)")
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable)")
        sp.add_argument("--lossless", action="store_true",
                        help="switch off every decoherence channel")
        sp.add_argument("--finite-pulses", action="store_true",
                        help="drive the pi-pulses instead of ideal unitaries")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args.scenario, args)
        if args.finite_pulses:
            cfg.ideal_pulses = False
        cfg.outdir.mkdir(parents=True, exist_ok=True)
        return _RUNNERS[args.scenario](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, cpwfield.SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
