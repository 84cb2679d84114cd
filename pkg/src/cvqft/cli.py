"""Command-line entry point: ``python -m cvqft <command> [--config run.json] ...``.

Exit codes: 0 success, 1 acceptance failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import fock, scattering, verify
from .errors import ConfigError, CVQFTError
from .lattice import LatticeSpec, build_coupling_matrix, dispersion, momentum_labels
from .renorm import DM_SIGNS, bare_mass, c_d_constant, sigma_continuum, sigma_discrete
from .synthesis import synthesis_residual, target_bogoliubov


# ---------------------------------------------------------------- config


@dataclass
class LatticeConfig:
    N: int = 2
    m: float = 1.0
    lam: float = 0.0
    d: int = 1
    zero_mode_shift: float | None = None
    drop_lattice_term: bool = False


@dataclass
class ScheduleConfig:
    T: float = 1.0
    T1: float = 0.5
    dt: float = 0.1
    dm_sign: str = "appendix"


@dataclass
class RunConfig:
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    in_modes: list = field(default_factory=list)
    out_modes: list | None = None
    cutoff: int = 8
    pad: int = fock.DEFAULT_PAD
    trotter_order: int = 1
    subtract_vacuum_energy: bool = False
    exponent_sign: int = 1
    min_probability: float = 0.0
    output: str | None = None
    format: str = "json"
    verbosity: int = 0
    seed: int | None = None  # reserved; nothing on the main path is random


_NESTED = {"lattice": LatticeConfig, "schedule": ScheduleConfig}
_FLOATS = {"m", "lam", "zero_mode_shift", "T", "T1", "dt", "min_probability"}
_INTS = {"N", "d", "cutoff", "pad", "trotter_order", "exponent_sign", "verbosity", "seed"}
_BOOLS = {"drop_lattice_term", "subtract_vacuum_energy"}
_CHOICES = {"dm_sign": set(DM_SIGNS), "format": {"json", "csv"}, "trotter_order": {1, 2},
            "exponent_sign": {1, -1}, "d": {1, 2, 3}}


def _coerce(path: str, key: str, value):
    if value is None:
        if key in ("zero_mode_shift", "out_modes", "output", "seed"):
            return None
        raise ConfigError(f"{path}: may not be null")
    if key in _BOOLS:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
    elif key in _INTS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
    elif key in _FLOATS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        value = float(value)
    elif key in ("in_modes", "out_modes"):
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in value):
            raise ConfigError(f"{path}: expected a list of integers, got {value!r}")
    elif key in ("dm_sign", "format", "output") and not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(f"{path}: {value!r} not in {sorted(_CHOICES[key], key=str)}")
    return value


def _build(cls, data, prefix: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or '<root>'}: expected an object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{prefix}{key}: unknown key")
    kwargs = {}
    for key, value in data.items():
        path = prefix + key
        if key in _NESTED:
            kwargs[key] = _build(_NESTED[key], value, path + ".")
        else:
            kwargs[key] = _coerce(path, key, value)
    return cls(**kwargs)


def load_config(data: dict) -> RunConfig:
    """Strict validation: unknown keys and bad values raise ConfigError with the field path."""
    cfg = _build(RunConfig, data)
    try:
        lattice_spec(cfg)
    except CVQFTError as e:
        raise ConfigError(f"lattice: {e}") from e
    for key in ("cutoff", "pad"):
        if getattr(cfg, key) < (1 if key == "cutoff" else 0):
            raise ConfigError(f"{key}: out of range ({getattr(cfg, key)})")
    if cfg.min_probability < 0:
        raise ConfigError("min_probability: must be >= 0")
    return cfg


def lattice_spec(cfg: RunConfig) -> LatticeSpec:
    L = cfg.lattice
    return LatticeSpec(L.N, L.m, L.lam, L.d, L.zero_mode_shift, L.drop_lattice_term)


def scattering_spec(cfg: RunConfig) -> scattering.ScatteringSpec:
    S = cfg.schedule
    try:
        return scattering.make_spec(lattice_spec(cfg), S.T, S.T1, S.dt, cfg.in_modes, cfg.out_modes,
                                    cutoff=cfg.cutoff, dm_sign=S.dm_sign, trotter_order=cfg.trotter_order,
                                    subtract_vacuum_energy=cfg.subtract_vacuum_energy,
                                    exponent_sign=cfg.exponent_sign, pad=cfg.pad)
    except CVQFTError as e:
        raise ConfigError(f"schedule/modes: {e}") from e


# ---------------------------------------------------------------- output


def _emit(cfg: RunConfig, payload: dict, rows: list[dict] | None = None) -> None:
    if cfg.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(verify._clean(payload), sort_keys=True, indent=1) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(cfg: RunConfig, msg: str) -> None:
    print(msg, file=sys.stderr)


# -------------------------------------------------------------- commands


def cmd_dispersion(cfg: RunConfig, args) -> int:
    spec = lattice_spec(cfg)
    disp = dispersion(spec)
    labels = momentum_labels(spec)
    resid = None
    if spec.M <= 4096:
        ev = np.sort(np.linalg.eigvalsh(build_coupling_matrix(spec)))
        resid = float(np.abs(ev - np.sort(disp.omegas**2)).max())
    rows = [{"k": k, "label": " ".join(map(str, labels[k])), "omega": float(w), "omega2": float(w * w)}
            for k, w in enumerate(disp.omegas)]
    notes = []
    if spec.mass_shifted:
        notes.append(f"m=0: zero mode regularized with mass {spec.m_eff!r}")
        _note(cfg, notes[-1])
    _emit(cfg, {"modes": rows, "eigen_residual": resid, "notes": notes}, rows)
    return 0


def cmd_synthesize(cfg: RunConfig, args) -> int:
    disp = dispersion(lattice_spec(cfg))
    circ = scattering.ground_circuit(disp.spec)
    res = synthesis_residual(disp, circ)
    counts = {k: len(circ.stage(k)) for k in ("rot", "swap", "phase", "squeeze", "pairmix")}
    _note(cfg, f"gates: {len(circ)} {counts}; residual {res:.3e}")
    text = circ.to_json()
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_ground_state(cfg: RunConfig, args) -> int:
    spec = lattice_spec(cfg)
    disp = dispersion(spec)
    D, M = cfg.cutoff, spec.M
    fock.check_memory(M, D)
    tb = target_bogoliubov(disp)
    circ = scattering.ground_circuit(spec)
    omega = fock.apply_circuit(fock.vacuum(M, D), circ, dagger=True, pad=cfg.pad)
    occ = fock.bogoliubov_numbers(omega, tb.alpha, tb.beta)
    e0 = fock.energy_expectation(omega, spec)
    rows = []
    for k in range(M):
        ex = fock.apply_circuit(fock.create_single_photon(fock.vacuum(M, D), k), circ, dagger=True, pad=cfg.pad)
        gap = fock.energy_expectation(ex, spec) - e0
        rows.append({"k": k, "omega": float(disp.omegas[k]), "occupation": float(occ[k]),
                     "energy_gap": float(gap), "gap_error": float(gap - disp.omegas[k])})
    payload = {"cutoff": D, "energy": e0, "exact_energy": float(0.5 * disp.omegas.sum()),
               "leakage": omega.leakage, "modes": rows}
    _emit(cfg, payload, rows)
    return 0


def cmd_renorm(cfg: RunConfig, args) -> int:
    spec = lattice_spec(cfg)
    payload = {"sigma_discrete": sigma_discrete(spec), "bare_mass_squared": bare_mass(spec),
               "m_eff": spec.m_eff}
    if spec.d == 1:
        payload["sigma_continuum"] = sigma_continuum(spec.m_eff, spec.lam, 1)
    else:
        payload["C_d"] = c_d_constant(spec.d)
        payload["sigma_continuum"] = payload["C_d"] * spec.lam
    sched = scattering_spec(cfg).schedule
    rows = [{"t": t, "lambda": lam, "delta_m": dm} for t, lam, dm in sched.samples]
    payload["schedule"] = rows
    _emit(cfg, payload, rows)
    return 0


def cmd_scatter(cfg: RunConfig, args) -> int:
    spec = scattering_spec(cfg)
    fock.check_memory(spec.lattice.M, spec.cutoff)
    result = scattering.scattering_amplitude(spec)
    payload = result.to_dict(cfg.min_probability)
    if args.oracle:
        ex = scattering.exact_amplitude_oracle(spec)
        half = scattering.with_dt(spec, spec.schedule.dt / 2)
        err = abs(result.amplitude - ex.amplitude)
        err_half = abs(scattering.scattering_amplitude(half).amplitude
                       - scattering.exact_amplitude_oracle(half).amplitude)
        payload["oracle"] = {"amplitude": {"re": ex.amplitude.real, "im": ex.amplitude.imag},
                             "error": err, "error_half_dt": err_half,
                             "ratio": err / err_half if err_half > 0 else None}
    rows = [{"occ": " ".join(map(str, d["occ"])), "p": d["p"]} for d in payload["distribution"]]
    _emit(cfg, payload, rows)
    return 0


def cmd_dump_state(cfg: RunConfig, args) -> int:
    spec = scattering_spec(cfg)
    fock.check_memory(spec.lattice.M, spec.cutoff)
    state = scattering.prepare_in_state(spec)
    if args.stage in ("evolved", "final"):
        state = scattering.trotter_evolve(state, spec)
    if args.stage == "final":
        state = fock.apply_circuit(state, scattering.ground_circuit(spec.lattice), pad=spec.pad)
    idx = np.argwhere(np.abs(state.amplitudes) ** 2 > cfg.min_probability)
    rows = []
    for occ in idx:
        a = state.amplitudes[tuple(occ)]
        rows.append({"occ": " ".join(map(str, occ)), "re": float(a.real), "im": float(a.imag)})
    _emit(cfg, {"stage": args.stage, "cutoff": spec.cutoff, "leakage": state.leakage,
                "amplitudes": rows}, rows)
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    results = verify.run_checks(args.filter, cfg.schedule.dm_sign)
    if not results:
        raise ConfigError(f"filter: no check matches {args.filter}")
    for r in results:
        print(r.line(), file=sys.stderr)
    text = verify.summary_json(results)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "group", "passed", "detail"])
        for r in results:
            w.writerow([r.name, r.group, r.passed, r.detail])
        text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"dispersion": cmd_dispersion, "synthesize": cmd_synthesize, "ground-state": cmd_ground_state,
            "renorm": cmd_renorm, "scatter": cmd_scatter, "dump-state": cmd_dump_state, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvqft", description="CV simulation of lattice phi^4 scattering")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--out", help="output path (default stdout)")
        s.add_argument("--format", choices=("json", "csv"))
        s.add_argument("--trotter-order", type=int, choices=(1, 2))
        s.add_argument("--subtract-vacuum-energy", action="store_true", default=None)
        s.add_argument("--dm-sign", choices=sorted(DM_SIGNS))
        if name == "scatter":
            s.add_argument("--oracle", action="store_true", help="compare with the exact slice oracle")
        if name == "dump-state":
            s.add_argument("--stage", choices=("in", "evolved", "final"), default="in")
        if name == "verify":
            s.add_argument("--filter", action="append", help="check name or group (repeatable)")
    return p


def _resolve(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError(f"--config: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"--config: invalid JSON ({e})") from e
    cfg = load_config(data)
    if args.out:
        cfg.output = args.out
    if args.format:
        cfg.format = args.format
    if args.trotter_order:
        cfg.trotter_order = args.trotter_order
    if args.subtract_vacuum_energy:
        cfg.subtract_vacuum_energy = True
    if args.dm_sign:
        cfg.schedule.dm_sign = args.dm_sign
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except CVQFTError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
