"""Writers for run artifacts: diagnostics, snapshots, metadata and rates."""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from dataclasses import asdict
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import SolverError
from .scenarios import REFERENCE_RATES, Scenario, build_initial_state, manufactured_error, measure_rate
from .integrators import run
from .diagnostics import compute_record
from .vlasov import reconstruct_grid, thread_count

DIAGNOSTICS_HEADER = ("time", "species", "N", "P", "E_kin", "E_pot", "E_tot",
                      "dN_dt", "dP_dt", "dE_dt", "amp1", "enstrophy")

NAN = float("nan")


def _fmt(x):
    if isinstance(x, str):
        return x
    return "%.17g" % x


class DiagnosticsWriter:
    """Streams records to ``diagnostics.csv``, flushing after each one.

    Each record yields one row per dynamic species (amp1 is the magnitude of
    that species' density harmonic) and a ``total`` row (amp1 is |E_1|).
    Fields that only exist globally are ``nan`` on species rows.
    """

    def __init__(self, path, species_names):
        self.path = Path(path)
        self.names = list(species_names)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(DIAGNOSTICS_HEADER)
        self._fh.flush()

    def __call__(self, rec):
        for i, name in enumerate(self.names):
            h = rec.density_harmonic[i] if rec.density_harmonic else NAN
            row = (rec.time, name, rec.particle_number[i], rec.momentum[i], rec.kinetic_energy[i],
                   NAN, NAN, rec.dN_dt[i], NAN, NAN, abs(h), rec.enstrophy[i])
            self._writer.writerow([_fmt(v) for v in row])
        row = (rec.time, "total", sum(rec.particle_number), rec.total_momentum, rec.total_kinetic,
               rec.potential_energy, rec.total_energy, sum(rec.dN_dt), rec.dP_dt, rec.dE_dt,
               rec.field_amplitude, sum(rec.enstrophy))
        self._writer.writerow([_fmt(v) for v in row])
        self._fh.flush()

    def close(self):
        self._fh.close()


def read_diagnostics(path):
    """Load ``diagnostics.csv`` as ``{species: {column: array}}``."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            d = out.setdefault(row["species"], {k: [] for k in DIAGNOSTICS_HEADER if k != "species"})
            for k in d:
                d[k].append(float(row[k]))
    return {s: {k: np.array(v) for k, v in cols.items()} for s, cols in out.items()}


def species_groups(beams):
    """Dynamic beams grouped by (charge, mass): beams of one physical species.

    Returns ``[(label, [dynamic indices])]`` in first-appearance order.
    """
    groups = {}
    dynamic = [b for b in beams if not b.static]
    for i, b in enumerate(dynamic):
        groups.setdefault((b.charge, b.mass), []).append(i)
    out = []
    for idx in groups.values():
        names = [dynamic[i].name for i in idx]
        label = names[0] if len(names) == 1 else "_".join(names)
        out.append((label, idx))
    return out


def snapshot_velocity_grid(species, indices, n_samples):
    """``n_samples`` points spanning u +/- 5 alpha of every beam in ``indices``."""
    lo = min(species[i].u - 5 * species[i].alpha for i in indices)
    hi = max(species[i].u + 5 * species[i].alpha for i in indices)
    return np.linspace(lo, hi, n_samples)


def _time_tag(t):
    return ("%.10g" % t).replace("-", "m")


def write_snapshots(out_dir, state, t, cfg, system):
    """Write f(x, v) at time ``t``; returns the written paths.

    Rows are x, columns v: the first row holds the v samples (leading cell
    empty) and the first column the x nodes. Beams of one species are summed.
    With several species groups the file name carries the group label.
    """
    out_dir = Path(out_dir)
    dyn = system.dynamic
    groups = species_groups(cfg.beams)
    paths = []
    x = system.grid.x
    for label, idx in groups:
        v = snapshot_velocity_grid(dyn, idx, cfg.snapshot_nv)
        f = sum(reconstruct_grid(state, system.species, i, v) for i in idx)
        suffix = "" if len(groups) == 1 else f"_{label}"
        path = out_dir / f"snapshot_t{_time_tag(t)}{suffix}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([""] + [_fmt(float(vv)) for vv in v])
            for j in range(x.size):
                w.writerow([_fmt(float(x[j]))] + [_fmt(float(val)) for val in f[j]])
        paths.append(path)
    return paths


def read_snapshot(path):
    """Load a snapshot file as ``(x, v, f)``."""
    raw = np.genfromtxt(path, delimiter=",")
    return raw[1:, 0], raw[0, 1:], raw[1:, 1:]


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def config_echo(cfg):
    return _jsonable(asdict(cfg))


def write_rates(path, cfg, records):
    """``rates.csv`` with the fitted and reference value; returns the row."""
    quantity, ref = REFERENCE_RATES[Scenario(cfg.name)]
    fitted = measure_rate(cfg, records)[1]
    rel = abs(fitted - ref) / abs(ref)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("quantity", "fitted", "reference", "relative_error"))
        w.writerow((quantity, _fmt(fitted), _fmt(ref), _fmt(rel)))
    return {"quantity": quantity, "fitted": fitted, "reference": ref, "relative_error": rel}


def run_and_emit(cfg, out_dir, config_path=None):
    """Run ``cfg`` and write every artifact into ``out_dir``.

    Returns ``(status, meta)``; status is 0 on success and 1 when the time
    loop failed, in which case the outputs written so far are kept and the
    failure is described in ``run_meta.json``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state, _, _ = build_initial_state(cfg)
    system = cfg.system()
    names = [b.name for b in cfg.beams if not b.static]
    writer = DiagnosticsWriter(out_dir / "diagnostics.csv", names)
    snaps = tuple(cfg.snapshot_times) or (cfg.t_final,)
    meta = {
        "config_path": str(config_path) if config_path is not None else None,
        "config": config_echo(cfg),
        "threads": thread_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    start = time.perf_counter()
    status = 0
    traj = None
    try:
        traj = run(system, state, 0.0, cfg.t_final, cfg.stepper(), cadence=cfg.cadence,
                   snapshot_times=snaps, diagnostics=lambda st, t: compute_record(system, st, t),
                   on_record=writer)
        meta["status"] = "ok"
    except SolverError as exc:
        status = 1
        traj = exc.trajectory
        meta["status"] = "failed"
        meta["error"] = str(exc)
        meta["residual_norm"] = exc.residual_norm
        meta["error_context"] = _jsonable(exc.context)
    finally:
        writer.close()
    meta["wall_time_s"] = time.perf_counter() - start

    if traj is not None:
        meta["solver_stats"] = asdict(traj.stats)
        meta["final_time"] = traj.final_time
        files = []
        for t_snap, st in sorted(traj.snapshots.items()):
            files += [p.name for p in write_snapshots(out_dir, st, t_snap, cfg, system)]
        if status and traj.final_state is not None:
            files += [p.name for p in write_snapshots(out_dir, traj.final_state, traj.final_time, cfg, system)]
        meta["snapshots"] = files
        if status == 0 and Scenario(cfg.name) is Scenario.MANUFACTURED:
            meta["manufactured_l2_error"] = manufactured_error(traj.final_state, system, traj.final_time)
        if status == 0 and Scenario(cfg.name) in REFERENCE_RATES:
            try:
                meta["rates"] = write_rates(out_dir / "rates.csv", cfg, traj.records)
            except (ValueError, ArithmeticError) as exc:
                meta["rates_error"] = str(exc)
    with open(out_dir / "run_meta.json", "w") as fh:
        json.dump(_jsonable(meta), fh, indent=2)
    return status, meta
