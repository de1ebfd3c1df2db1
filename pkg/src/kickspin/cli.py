"""Command-line front end.

Subcommands ``spectrum``, ``cycle``, ``connection``, ``protocol`` and ``mobile``
each write CSV and/or JSON into ``--out``. Exit codes: 0 success, 2 invalid
configuration, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import BOOL_FIELDS, COMMANDS, FIELD_NAMES, load_config, parse_value, resolve
from .connection import (
    GaugeSingular,
    connection_analytic,
    connection_fd,
    rank1_diagonal_check,
    wilson_loop,
)
from .core_linalg import canonical_phase
from .errors import InvalidArgument, KickspinError
from .kicked_spin import DEFAULT_MODEL, random_rank1_model, refined_path, track_branches
from .mobile_spin import GridSpec, build_moving_frame_floquet, compare_frames, eigenphases
from .phase_protocol import (
    KickProtocol,
    choose_num_kicks,
    coherence_table,
    dynamical_phase_difference,
    simulate_cycle,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
MIN_STEPS_PER_CYCLE = 64


class IOFailure(Exception):
    pass


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


class Writer:
    def __init__(self, cfg):
        self.cfg = cfg
        self.written = []

    def _write(self, name, text):
        path = os.path.join(self.cfg.out, name)
        try:
            os.makedirs(self.cfg.out, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOFailure(f"cannot write {path}: {exc}") from exc
        self.written.append(path)

    def csv(self, name, header, rows):
        if self.cfg.format not in ("csv", "both"):
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
        self._write(name, buf.getvalue())

    def json(self, name, report):
        if self.cfg.format not in ("json", "both"):
            return
        doc = {"version": __version__, "config": self.cfg.as_dict()}
        doc.update(report)
        self._write(name, json.dumps(_jsonable(doc), indent=2) + "\n")

    def plot(self, name, xs, ys):
        if not self.cfg.plotdata:
            return
        lines = [f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys)]
        self._write(name, "\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg, out: Writer) -> dict:
    """Continued quasienergy branches over a parameter range."""
    if cfg.lambda_start == cfg.lambda_end:
        lambdas = np.array([cfg.lambda_start])
    else:
        lambdas = np.linspace(cfg.lambda_start, cfg.lambda_end, cfg.steps + 1)
    path, idx = refined_path(lambdas, 2 * np.pi / 256)
    cont = track_branches(DEFAULT_MODEL, path)
    e0 = cont.branches[0].energies[idx]
    e1 = cont.branches[1].energies[idx]
    rows = [
        (float(l), float(a), float(b), float(canonical_phase(a)), float(canonical_phase(b)))
        for l, a, b in zip(lambdas, e0, e1)
    ]
    out.csv("spectrum.csv", ["lambda", "E0_unwrapped", "E1_unwrapped", "E0_mod", "E1_mod"], rows)
    out.plot("spectrum_E0.dat", lambdas, e0)
    out.plot("spectrum_E1.dat", lambdas, e1)
    gap = e1 - e0
    report = {
        "rows": len(rows),
        "gap_min": float(gap.min()),
        "gap_max": float(gap.max()),
        "permutation": list(cont.permutation.mapping),
    }
    out.json("spectrum.json", report)
    return report


def cmd_cycle(cfg, out: Writer) -> dict:
    """Branch permutation and holonomy signs after ``cycles`` parameter cycles."""
    if cfg.cycles < 1:
        raise InvalidArgument("cycles must be at least 1")
    if cfg.cycle_steps < MIN_STEPS_PER_CYCLE * cfg.cycles:
        raise InvalidArgument(f"need at least {MIN_STEPS_PER_CYCLE} steps per cycle")
    end = 2 * np.pi * cfg.cycles
    lambdas = np.linspace(0.0, end, cfg.cycle_steps + 1)
    cont = track_branches(DEFAULT_MODEL, lambdas)
    perm = cont.permutation
    out.csv(
        "cycle.csv",
        ["lambda", "E0_unwrapped", "E1_unwrapped"],
        zip(lambdas.tolist(), cont.branches[0].energies.tolist(), cont.branches[1].energies.tolist()),
    )
    out.plot("cycle_E0.dat", lambdas, cont.branches[0].energies)
    out.plot("cycle_E1.dat", lambdas, cont.branches[1].energies)
    report = {
        "cycles": cfg.cycles,
        "steps": cfg.cycle_steps,
        "permutation": list(perm.mapping),
        "is_swap": perm.is_swap,
        "branch_signs": list(perm.branch_signs),
        "final_overlaps": list(perm.overlaps),
        "max_overlap_defect": cont.max_overlap_defect,
        "final_energies": [float(b.energies[-1]) for b in cont.branches],
    }
    out.json("cycle.json", report)
    return report


def _matrix_row(a):
    return [a[0, 0].real, a[0, 0].imag, a[0, 1].real, a[0, 1].imag, a[1, 0].real, a[1, 0].imag, a[1, 1].real, a[1, 1].imag]


def cmd_connection(cfg, out: Writer) -> dict:
    """Connection samples per gauge, optional Wilson loop and random rank-1 diagonal checks."""
    if cfg.r is not None:
        rs = [cfg.r]
    else:
        rs = np.linspace(cfg.r_start, cfg.r_end, cfg.r_samples).tolist()
    rows, worst_residual, worst_error = [], 0.0, 0.0
    analytic = connection_analytic(0.0).a
    for r in rs:
        for gauge in cfg.gauges:
            try:
                s = connection_fd(DEFAULT_MODEL, r, cfg.h, gauge)
            except GaugeSingular:
                rows.append([r, gauge] + [float("nan")] * 10)
                continue
            err = float(np.max(np.abs(s.a - analytic))) if gauge != "kick_component_real" else float("nan")
            worst_residual = max(worst_residual, s.antihermitian_residual)
            if gauge != "kick_component_real":
                worst_error = max(worst_error, err)
            rows.append([r, gauge] + _matrix_row(s.a) + [s.antihermitian_residual, err])
    out.csv(
        "connection.csv",
        ["r", "gauge", "A00_re", "A00_im", "A01_re", "A01_im", "A10_re", "A10_im", "A11_re", "A11_im",
         "antihermitian_residual", "analytic_error"],
        [[float(x) if isinstance(x, (int, float)) else x for x in row] for row in rows],
    )
    out.plot("connection_abs_A01.dat", [row[0] for row in rows if row[1] == cfg.gauges[0]],
             [math.hypot(row[4], row[5]) for row in rows if row[1] == cfg.gauges[0]])
    report = {
        "analytic": {"A00": analytic[0, 0], "A01": analytic[0, 1], "A10": analytic[1, 0], "A11": analytic[1, 1]},
        "samples": len(rs),
        "max_antihermitian_residual": worst_residual,
        "max_error_vs_analytic": worst_error,
    }
    if cfg.wilson:
        w = wilson_loop(DEFAULT_MODEL, 0.0, cfg.wilson_end, cfg.wilson_steps, cfg.h)
        report["wilson"] = {
            "r_start": 0.0,
            "r_end": cfg.wilson_end,
            "steps": cfg.wilson_steps,
            "w": w.w,
            "distance_to_minus_identity": float(np.max(np.abs(w.w + np.eye(2)))),
        }
    if cfg.random_models:
        rng = cfg.rng()
        samples = np.linspace(0.0, 2 * np.pi, 16, endpoint=False)
        checks = []
        for k in range(cfg.random_models):
            model = random_rank1_model(rng)
            entry = {"model": k}
            for gauge in cfg.gauges:
                rep = rank1_diagonal_check(model, samples, gauge, cfg.h)
                entry[gauge] = {
                    "max_abs_diagonal": rep.max_abs_diagonal,
                    "singular_samples": rep.singular_samples,
                }
            checks.append(entry)
        report["random_rank1"] = checks
    out.json("connection.json", report)
    return report


def cmd_protocol(cfg, out: Writer) -> dict:
    """Dynamical phase, kick-count choice and simulated coherence of a superposition."""
    initial = np.array(cfg.initial, dtype=complex)
    norm = np.linalg.norm(initial)
    if abs(norm - 1.0) > 1e-6:
        raise InvalidArgument("initial amplitudes must be normalised")
    initial = initial / norm
    protocol = KickProtocol.uniform(cfg.num_kicks, cfg.period, cfg.cycles)
    phase = dynamical_phase_difference(protocol, DEFAULT_MODEL)
    res = simulate_cycle(DEFAULT_MODEL, protocol, initial)
    table = coherence_table(DEFAULT_MODEL, cfg.fidelity_kicks, cfg.period, initial)
    out.csv(
        "protocol.csv",
        ["M", "relative_phase", "fidelity", "infidelity", "norm_defect"],
        [[r["M"], r["relative_phase"], r["fidelity"], r["infidelity"], r["norm_defect"]] for r in table],
    )
    out.plot("protocol_infidelity.dat", [r["M"] for r in table], [r["infidelity"] for r in table])
    report = {
        "phase_difference": phase,
        "phase_difference_over_pi": phase / np.pi,
        "multiple_of_2pi": bool(abs(canonical_phase(phase)) < 1e-9),
        "chosen_num_kicks": choose_num_kicks(DEFAULT_MODEL, cfg.period, cfg.m_min),
        "simulation": {
            "final_amplitudes": res.final_amplitudes,
            "fidelity_vs_adiabatic": res.fidelity_vs_adiabatic,
            "infidelity": res.infidelity,
            "relative_phase": res.relative_phase,
            "norm_defect": res.norm_defect,
        },
        "fidelity_table": table,
    }
    out.json("protocol.json", report)
    return report


def cmd_mobile(cfg, out: Writer) -> dict:
    """Lab versus moving-frame spectra of the mobile kicked spin."""
    grid = GridSpec(cfg.n_points, mass=cfg.mass)
    modes = ("spectral", "conjugated") if cfg.mode == "both" else (cfg.mode,)
    report = {"n_points": grid.n_points, "period": grid.period, "mass": grid.mass, "comparisons": {}}
    if cfg.compare:
        for mode in modes:
            cmp = compare_frames(grid, mode)
            report["comparisons"][mode] = {"matching_distance": cmp.matching_distance, "flagged": cmp.flagged}
            out.csv(
                f"mobile_{mode}.csv",
                ["index", "lab_phase", "moving_phase"],
                [[k, float(a), float(b)] for k, (a, b) in enumerate(zip(cmp.lab_phases, cmp.moving_phases))],
            )
            out.plot(f"mobile_{mode}.dat", range(len(cmp.moving_phases)), cmp.moving_phases)
        if cfg.misaligned_demo:
            cmp = compare_frames(grid, "spectral", "misaligned")
            report["comparisons"]["misaligned"] = {"matching_distance": cmp.matching_distance, "flagged": cmp.flagged}
    else:
        for mode in modes:
            phases = eigenphases(build_moving_frame_floquet(grid, mode))
            out.csv(f"mobile_{mode}.csv", ["index", "moving_phase"], [[k, float(p)] for k, p in enumerate(phases)])
    out.json("mobile.json", report)
    return report


COMMAND_FUNCS = {
    "spectrum": cmd_spectrum,
    "cycle": cmd_cycle,
    "connection": cmd_connection,
    "protocol": cmd_protocol,
    "mobile": cmd_mobile,
}


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=COMMAND_FUNCS[name].__doc__.splitlines()[0])
        p.add_argument("--config", help="key = value configuration file")
        for field in FIELD_NAMES:
            if field == "command":
                continue
            flag = "--" + field.replace("_", "-")
            if field in BOOL_FIELDS:
                p.add_argument(flag, dest=field, nargs="?", const="true", default=argparse.SUPPRESS)
            else:
                p.add_argument(flag, dest=field, default=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    raw = vars(args)
    command = raw.pop("command")
    config_path = raw.pop("config", None)
    try:
        file_values = load_config(config_path) if config_path else {}
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        overrides = {k: parse_value(k, v) for k, v in raw.items()}
        cfg = resolve(command, file_values, overrides)
        writer = Writer(cfg)
        report = COMMAND_FUNCS[command](cfg, writer)
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KickspinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for path in writer.written:
        print(path)
    if not writer.written:
        print(json.dumps(_jsonable(report)))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
