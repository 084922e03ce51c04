"""CSV/JSON artifact writers.

All floating-point values are written with 17 significant digits so the
artifacts round-trip binary64 exactly and repeated runs produce byte-identical
files. Every writer takes an open directory path and returns the file name it
wrote, so manifests can list their artifacts.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, List, Optional

import numpy as np

from .model import SystemParams, total_energy, BifurcationGrid
from .integrate import IntegratorConfig, Trajectory
from .poincare import PoincareResult
from .surface import DividingSurface
from .transport import GapTimeRecord, FluxCurveRow, ManifoldTube
from .upo import PeriodicOrbit

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "params_dict",
    "cfg_dict",
    "trajectory_csv",
    "orbit_csv",
    "orbit_meta",
    "poincare_csv",
    "poincare_meta",
    "ds_csv",
    "ds_meta",
    "gap_csv",
    "flux_csv",
    "tube_csv",
    "grid_csv",
    "contours_csv",
    "error_report",
]


def fmt(v) -> str:
    """One value as a CSV cell; floats get 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: str, header: List[str], rows: Iterable) -> str:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return os.path.basename(path)


def write_json(path: str, obj) -> str:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return os.path.basename(path)


def params_dict(p: SystemParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "omega": p.omega,
            "epsilon": p.epsilon, "m_s": p.m_s, "m_b": p.m_b}


def cfg_dict(cfg: IntegratorConfig) -> dict:
    return {"scheme": cfg.scheme.value, "dt": cfg.dt,
            "event_tol": cfg.event_tol, "max_steps": cfg.max_steps,
            "escape_radius": cfg.escape_radius}


def trajectory_csv(path: str, traj: Trajectory, p: SystemParams) -> str:
    hs = np.asarray(total_energy(traj.states, p))
    rows = ((traj.times[k], traj.states[k, 0], traj.states[k, 1],
             traj.states[k, 2], traj.states[k, 3], hs[k])
            for k in range(len(traj.times)))
    return write_csv(path, ["t", "x", "y", "p_x", "p_y", "H"], rows)


def orbit_csv(path: str, orbit: PeriodicOrbit) -> str:
    hs = np.asarray(total_energy(orbit.samples, orbit.params))
    rows = ((orbit.times[k], orbit.samples[k, 0], orbit.samples[k, 1],
             orbit.samples[k, 2], orbit.samples[k, 3], hs[k])
            for k in range(len(orbit.times)))
    return write_csv(path, ["t", "x", "y", "p_x", "p_y", "H"], rows)


def orbit_meta(orbit: PeriodicOrbit) -> dict:
    meta = {
        "energy": orbit.energy,
        "excess_energy": orbit.excess_energy,
        "period": orbit.period,
        "residual": orbit.residual,
        "iterations": orbit.iterations,
        "n_samples": orbit.n_samples,
        "method": orbit.method,
        "scheme": orbit.scheme.value,
        "saddle_state": [float(v) for v in orbit.saddle_state],
        "params": params_dict(orbit.params),
    }
    if orbit.multipliers is not None:
        meta["multipliers"] = [[m.real, m.imag] for m in orbit.multipliers]
    return meta


def poincare_csv(path: str, res: PoincareResult) -> str:
    rows = ((int(res.ic_index[k]), int(res.hit_index[k]),
             res.points[k, 0], res.points[k, 1])
            for k in range(len(res.ic_index)))
    return write_csv(path, ["ic_index", "hit_index", "x", "p_x"], rows)


def poincare_meta(res: PoincareResult, p: SystemParams, e: float,
                  seed: Optional[int], dt: float, t_max: float,
                  delta_E: Optional[float] = None) -> dict:
    return {
        "params": params_dict(p),
        "e": e,
        "delta_E": delta_E,
        "seed": seed,
        "dt": dt,
        "t_max": t_max,
        "n_hits_requested": res.n_hits_requested,
        "n_trajectories": len(res.status),
        "status_counts": {s: res.status.count(s) for s in set(res.status)},
    }


def ds_csv(path: str, ds: DividingSurface) -> str:
    hs = np.asarray(total_energy(ds.states, ds.params))
    rows = ((ds.states[k, 0], ds.states[k, 1], ds.states[k, 2],
             ds.states[k, 3], hs[k]) for k in range(ds.n))
    return write_csv(path, ["x", "y", "p_x", "p_y", "H"], rows)


def ds_meta(ds: DividingSurface) -> dict:
    return {
        "seed": ds.seed,
        "n": ds.n,
        "orientation": ds.orientation.value,
        "energy": ds.energy,
        "excess_energy": ds.excess_energy,
        "orbit": {"period": ds.orbit_period, "method": ds.orbit_method},
        "params": params_dict(ds.params),
    }


def gap_csv(path: str, records: List[GapTimeRecord]) -> str:
    rows = ((r.ic_index, "" if r.gap_time is None else fmt(r.gap_time),
             r.exit.value) for r in records)
    return write_csv(path, ["ic_index", "gap_time", "exit"], rows)


def flux_csv(path: str, rows_in: List[FluxCurveRow]) -> str:
    rows = ((r.delta_E, r.epsilon,
             float("nan") if r.Q is None else r.Q, r.method)
            for r in rows_in)
    return write_csv(path, ["delta_E", "epsilon", "Q", "method"], rows)


def tube_csv(path: str, tube: ManifoldTube) -> str:
    def rows():
        n_fib, n_rec, _ = tube.states.shape
        for k in range(n_fib):
            for j in range(n_rec):
                s = tube.states[k, j]
                yield (tube.branch.value, k, tube.times[j],
                       s[0], s[1], s[2], s[3])
    return write_csv(path, ["branch", "fiber_index", "t", "x", "y",
                            "p_x", "p_y"], rows())


def grid_csv(path: str, grid: BifurcationGrid) -> str:
    def rows():
        for i, a in enumerate(grid.alphas):
            for j, b in enumerate(grid.betas):
                yield (a, b, grid.cases[i, j].value)
    return write_csv(path, ["alpha", "beta", "case"], rows())


def contours_csv(path: str, polylines) -> str:
    def rows():
        for pid, line in enumerate(polylines):
            for k in range(line.shape[0]):
                yield (pid, line[k, 0], line[k, 1])
    return write_csv(path, ["polyline_id", "x", "y"], rows())


def error_report(exc: Exception, command: str) -> dict:
    ctx = {}
    for attr in ("last_state", "last_time", "marker"):
        v = getattr(exc, attr, None)
        if v is not None:
            ctx[attr] = str(v)
    return {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "command": command,
            "context": ctx,
        }
    }
