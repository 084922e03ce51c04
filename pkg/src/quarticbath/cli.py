"""Command-line driver.

Option precedence is flags > config file > built-in defaults; every artifact
lands inside --output, and the data files (CSV/JSON) are byte-identical
across reruns with the same effective configuration. The manifest echoes the
merged configuration plus wall time (the one field that varies run to run).

Exit codes: 0 success, 2 configuration problem, 3 numerical failure (with a
machine-readable error.json in the output directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import yaml

from . import __version__
from .model import (
    SystemParams,
    DegenerateParameters,
    NoSuchEquilibrium,
    EmptyContour,
    classify,
    find_equilibria,
    critical_alpha,
    bifurcation_grid,
    equipotential_contour,
)
from .integrate import IntegratorConfig, Scheme, NonFiniteState
from .upo import (
    WrongRegime,
    LostEnergy,
    NoConvergence,
    NotASaddle,
    find_brake_orbit,
)
from .poincare import SectionSpec, EmptyAdmissibleRegion, seed_ensemble, section_map, PoincareResult
from .surface import Orientation, EnergeticallyForbidden, sample_ds
from .transport import gap_times, flux_curve, Branch, globalize_manifolds
from . import serialize as ser

NUMERIC_ERRORS = (
    NoConvergence,
    LostEnergy,
    WrongRegime,
    NotASaddle,
    NonFiniteState,
    EmptyAdmissibleRegion,
    EnergeticallyForbidden,
    DegenerateParameters,
    NoSuchEquilibrium,
    EmptyContour,
)


class ConfigError(Exception):
    pass


_COMMON_DEFAULTS = {
    "alpha": 1.0,
    "beta": 1.0,
    "omega": 1.0,
    "epsilon": 0.0,
    "m_s": 1.0,
    "m_b": 1.0,
    "dt": 1e-3,
    "event_tol": 1e-12,
    "scheme": None,  # per-command default applies when unset
    "seed": 0,
    "workers": 1,
    "output": None,  # filled with out_<command>
}

_DEFAULTS = {
    "classify": {},
    "bifurcation-grid": {
        "alpha_min": -1.0, "alpha_max": 1.0, "beta_min": -1.0,
        "beta_max": 1.0, "n_alpha": 41, "n_beta": 41,
    },
    "contours": {
        "level": 0.0, "window": "-2,2,-2,2", "resolution": 256,
    },
    "poincare": {
        "energy": 0.1, "n": 100, "n_hits": 100, "t_max": 500.0,
        "region": "-1.5,1.5,-0.8,0.8", "scheme": "leapfrog2",
    },
    "upo": {
        "delta_e": 0.01, "saddle": "origin", "n_samples": 512,
        "scheme": "composed4", "event_tol": 1e-15,
    },
    "ds-sample": {
        "delta_e": 0.01, "saddle": "origin", "n": 5000,
        "orientation": "both", "n_samples": 512,
        "scheme": "composed4", "event_tol": 1e-15,
    },
    "gaptime": {
        "delta_e": 0.01, "saddle": "origin", "n": 5000,
        "orientation": "backward", "cutoff": 100.0, "n_samples": 512,
        "exit_boundary": -1.0,
        "scheme": "leapfrog2",
    },
    "flux": {
        "delta_e_list": "0.01,0.02,0.05,0.1", "epsilon_list": "0.0,0.2,0.5",
        "saddle": "origin", "n_samples": 512,
        "scheme": "composed4", "event_tol": 1e-15,
    },
    "manifolds": {
        "delta_e": 0.01, "saddle": "origin", "branch": "unstable-plus",
        "delta": 1e-6, "t_prop": 30.0, "record_every": 100, "n_samples": 512,
        "scheme": "composed4", "event_tol": 1e-15,
    },
}


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="quarticbath",
        description="Saddle-crossing dynamics of a quartic mode coupled to "
                    "a harmonic bath",
    )
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML file with option defaults")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--output")
        for name in ("alpha", "beta", "omega", "epsilon", "m-s", "m-b",
                     "dt", "event-tol"):
            sp.add_argument(f"--{name}", type=float)
        sp.add_argument("--scheme", choices=["leapfrog2", "composed4"])

    sp = sub.add_parser("classify", help="equilibria and bifurcation case")
    common(sp)

    sp = sub.add_parser("bifurcation-grid", help="case map over (alpha, beta)")
    common(sp)
    for name in ("alpha-min", "alpha-max", "beta-min", "beta-max"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--n-alpha", type=int)
    sp.add_argument("--n-beta", type=int)

    sp = sub.add_parser("contours", help="equipotential polylines")
    common(sp)
    sp.add_argument("--level", type=float)
    sp.add_argument("--window", help="xmin,xmax,ymin,ymax")
    sp.add_argument("--resolution", type=int)

    sp = sub.add_parser("poincare", help="section map ensemble")
    common(sp)
    sp.add_argument("--energy", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--n-hits", type=int)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--region", help="xmin,xmax,pxmin,pxmax")

    sp = sub.add_parser("upo", help="correct a brake orbit")
    common(sp)
    sp.add_argument("--delta-e", type=float)
    sp.add_argument("--saddle", choices=["origin", "plus", "minus"])
    sp.add_argument("--n-samples", type=int)

    sp = sub.add_parser("ds-sample", help="sample the dividing surface")
    common(sp)
    sp.add_argument("--delta-e", type=float)
    sp.add_argument("--saddle", choices=["origin", "plus", "minus"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--n-samples", type=int)
    sp.add_argument("--orientation", choices=["forward", "backward", "both"])

    sp = sub.add_parser("gaptime", help="first-exit statistics from the surface")
    common(sp)
    sp.add_argument("--delta-e", type=float)
    sp.add_argument("--saddle", choices=["origin", "plus", "minus"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--n-samples", type=int)
    sp.add_argument("--orientation", choices=["forward", "backward", "both"])
    sp.add_argument("--cutoff", type=float)
    sp.add_argument("--exit-boundary", type=float,
                    help="x plane whose crossing away from the saddle "
                         "ends a trajectory")

    sp = sub.add_parser("flux", help="flux versus excess energy and coupling")
    common(sp)
    sp.add_argument("--delta-e-list")
    sp.add_argument("--epsilon-list")
    sp.add_argument("--saddle", choices=["origin", "plus", "minus"])
    sp.add_argument("--n-samples", type=int)

    sp = sub.add_parser("manifolds", help="globalize one manifold branch")
    common(sp)
    sp.add_argument("--delta-e", type=float)
    sp.add_argument("--saddle", choices=["origin", "plus", "minus"])
    sp.add_argument("--branch", choices=[b.value for b in Branch])
    sp.add_argument("--delta", type=float)
    sp.add_argument("--t-prop", type=float)
    sp.add_argument("--record-every", type=int)
    sp.add_argument("--n-samples", type=int)

    return top


def merge_config(args: argparse.Namespace) -> dict:
    cmd = args.command
    merged = dict(_COMMON_DEFAULTS)
    merged.update(_DEFAULTS[cmd])
    known = set(merged)

    if args.config is not None:
        try:
            with open(args.config) as fh:
                loaded = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file is not valid YAML: {exc}")
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config file must be a mapping of options")
        for key, val in loaded.items():
            k = str(key).replace("-", "_")
            if k not in known:
                raise ConfigError(f"unknown config key: {key}")
            merged[k] = val

    for k, v in vars(args).items():
        if k in ("command", "config"):
            continue
        if v is not None:
            merged[k] = v

    if merged["output"] is None:
        merged["output"] = f"out_{cmd}"
    _validate(merged, cmd)
    return merged


def _validate(m: dict, cmd: str):
    try:
        m["seed"] = int(m["seed"]) & ((1 << 64) - 1)
    except (TypeError, ValueError):
        raise ConfigError("seed must be an integer")
    try:
        m["workers"] = int(m["workers"])
    except (TypeError, ValueError):
        raise ConfigError("workers must be an integer")
    if m["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    for key in ("alpha", "beta", "omega", "epsilon", "m_s", "m_b",
                "dt", "event_tol"):
        try:
            m[key] = float(m[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number")
    try:
        SystemParams(m["alpha"], m["beta"], m["omega"], m["epsilon"],
                     m["m_s"], m["m_b"])
    except ValueError as exc:
        raise ConfigError(str(exc))
    if m.get("scheme") is not None and m["scheme"] not in ("leapfrog2",
                                                           "composed4"):
        raise ConfigError("scheme must be leapfrog2 or composed4")


def _params(m: dict) -> SystemParams:
    return SystemParams(m["alpha"], m["beta"], m["omega"], m["epsilon"],
                        m["m_s"], m["m_b"])


def _cfg(m: dict) -> IntegratorConfig:
    scheme = Scheme(m.get("scheme") or "leapfrog2")
    return IntegratorConfig(scheme=scheme, dt=m["dt"],
                            event_tol=m["event_tol"])


def _floats(text: str, expect: int, label: str):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"{label} must be comma-separated numbers")
    if expect and len(vals) != expect:
        raise ConfigError(f"{label} needs exactly {expect} numbers")
    return vals

def _float_list(text: str, label: str):
    return _floats(text, 0, label)


def _chunks(n: int, workers: int):
    w = max(1, min(workers, n))
    bounds = [(i * n) // w for i in range(w + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(w)
            if bounds[i + 1] > bounds[i]]


def _cmd_classify(m, out):
    p = _params(m)
    case = classify(p)
    report = {"case": case.value, "critical_alpha": critical_alpha(p),
              "params": ser.params_dict(p)}
    lines = [case.value]
    try:
        eqs = find_equilibria(p)
        report["equilibria"] = [
            {
                "x": eq.state.x, "y": eq.state.y,
                "stability": eq.stability.value, "energy": eq.energy,
                "eigenvalues": [[v.real, v.imag] for v in eq.eigenvalues],
            }
            for eq in eqs
        ]
        for eq in eqs:
            lines.append(f"  ({eq.state.x:.12g}, {eq.state.y:.12g})"
                         f"  {eq.stability.value}  H = {eq.energy:.12g}")
    except DegenerateParameters as exc:
        report["equilibria"] = "degenerate-line"
        report["note"] = str(exc)
        lines.append(f"  {exc}")
    print("\n".join(lines))
    return [ser.write_json(os.path.join(out, "classify.json"), report)], {}


def _cmd_grid(m, out):
    p = _params(m)
    grid = bifurcation_grid(
        (float(m["alpha_min"]), float(m["alpha_max"])),
        (float(m["beta_min"]), float(m["beta_max"])),
        int(m["n_alpha"]), int(m["n_beta"]), p)
    name = ser.grid_csv(os.path.join(out, "grid.csv"), grid)
    return [name], {"critical_alpha": grid.critical_alpha}


def _cmd_contours(m, out):
    p = _params(m)
    w = _floats(m["window"], 4, "window")
    lines = equipotential_contour(float(m["level"]),
                                  ((w[0], w[1]), (w[2], w[3])),
                                  int(m["resolution"]), p)
    name = ser.contours_csv(os.path.join(out, "contours.csv"), lines)
    return [name], {"n_polylines": len(lines)}


def _cmd_poincare(m, out):
    p = _params(m)
    cfg = _cfg(m)
    r = _floats(m["region"], 4, "region")
    e = float(m["energy"])
    ics = seed_ensemble(e, int(m["n"]), ((r[0], r[1]), (r[2], r[3])),
                        m["seed"], p)
    spec = SectionSpec()
    n_hits, t_max = int(m["n_hits"]), float(m["t_max"])

    parts = _chunks(ics.shape[0], m["workers"])
    if len(parts) == 1:
        res = section_map(ics, spec, n_hits, t_max, p, cfg)
    else:
        def work(rng_):
            lo, hi = rng_
            return section_map(ics[lo:hi], spec, n_hits, t_max, p, cfg)
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            pieces = list(ex.map(work, parts))
        res = _merge_poincare(pieces, parts, n_hits)

    # excess energy relative to the transport barrier: the saddle-centre
    # equilibrium when one exists, else the origin level
    try:
        saddles = [eq for eq in find_equilibria(p)
                   if eq.stability.value == "saddle-centre"]
        de = e - saddles[0].energy if saddles else e
    except DegenerateParameters:
        de = e
    a1 = ser.poincare_csv(os.path.join(out, "poincare.csv"), res)
    a2 = ser.write_json(os.path.join(out, "poincare.json"),
                        ser.poincare_meta(res, p, e, m["seed"], cfg.dt, t_max,
                                          delta_E=de))
    return [a1, a2], {}


def _merge_poincare(pieces, parts, n_hits) -> PoincareResult:
    ic, hit, times, states, status = [], [], [], [], []
    for (lo, _hi), piece in zip(parts, pieces):
        ic.append(piece.ic_index + lo)
        hit.append(piece.hit_index)
        times.append(piece.times)
        states.append(piece.states)
        status.extend(piece.status)
    states_all = (np.vstack([s for s in states if len(s)])
                  if any(len(s) for s in states) else np.empty((0, 4)))
    pts = states_all[:, [0, 2]] if len(states_all) else np.empty((0, 2))
    return PoincareResult(
        ic_index=np.concatenate(ic).astype(int),
        hit_index=np.concatenate(hit).astype(int),
        points=pts,
        times=np.concatenate(times),
        states=states_all,
        status=status,
        n_hits_requested=n_hits,
    )


def _make_orbit(m, with_monodromy: bool):
    p = _params(m)
    cfg = _cfg(m)
    orbit = find_brake_orbit(p, float(m["delta_e"]), saddle=m["saddle"],
                             cfg=cfg, n_samples=int(m["n_samples"]),
                             with_monodromy=with_monodromy)
    return p, cfg, orbit


def _cmd_upo(m, out):
    _, _, orbit = _make_orbit(m, with_monodromy=True)
    a1 = ser.orbit_csv(os.path.join(out, "upo.csv"), orbit)
    a2 = ser.write_json(os.path.join(out, "upo.json"), ser.orbit_meta(orbit))
    return [a1, a2], {}


def _cmd_ds(m, out):
    p, _, orbit = _make_orbit(m, with_monodromy=False)
    ds = sample_ds(orbit, int(m["n"]), m["seed"],
                   orientation=Orientation(m["orientation"]), p=p)
    a1 = ser.ds_csv(os.path.join(out, "ds.csv"), ds)
    a2 = ser.write_json(os.path.join(out, "ds.json"), ser.ds_meta(ds))
    return [a1, a2], {}


def _cmd_gaptime(m, out):
    p, _, orbit = _make_orbit(m, with_monodromy=False)
    ds = sample_ds(orbit, int(m["n"]), m["seed"],
                   orientation=Orientation(m["orientation"]), p=p)
    cfg = _cfg(m)
    boundary = float(m["exit_boundary"])
    cutoff = float(m["cutoff"])

    parts = _chunks(ds.n, m["workers"])
    if len(parts) == 1:
        records = gap_times(ds, boundary, cutoff=cutoff, p=p, cfg=cfg)
    else:
        def work(rng_):
            lo, hi = rng_
            sub = replace(ds, states=ds.states[lo:hi])
            recs = gap_times(sub, boundary, cutoff=cutoff, p=p, cfg=cfg)
            return [replace(rec, ic_index=rec.ic_index + lo) for rec in recs]
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            pieces = list(ex.map(work, parts))
        records = [rec for piece in pieces for rec in piece]

    a1 = ser.gap_csv(os.path.join(out, "gap.csv"), records)
    counts = {}
    for rec in records:
        counts[rec.exit.value] = counts.get(rec.exit.value, 0) + 1
    a2 = ser.write_json(os.path.join(out, "gaptime.json"), {
        "cutoff": cutoff, "n": ds.n, "exit_boundary": boundary,
        "exit_counts": counts,
        "orientation": ds.orientation.value, "seed": m["seed"],
        "params": ser.params_dict(p),
    })
    return [a1, a2], {}


def _cmd_flux(m, out):
    p = _params(m)
    cfg = _cfg(m)
    ladder = _float_list(m["delta_e_list"], "delta_e_list")
    eps = _float_list(m["epsilon_list"], "epsilon_list")
    rows = flux_curve(ladder, eps, p, cfg=cfg, saddle=m["saddle"],
                      n_samples=int(m["n_samples"]))
    a1 = ser.flux_csv(os.path.join(out, "flux.csv"), rows)
    failures = [{"delta_E": r.delta_E, "epsilon": r.epsilon}
                for r in rows if not r.converged]
    return [a1], {"n_rows": len(rows), "failures": failures}


def _cmd_manifolds(m, out):
    p, cfg, orbit = _make_orbit(m, with_monodromy=True)
    tube = globalize_manifolds(orbit, Branch(m["branch"]),
                               delta=float(m["delta"]),
                               t_prop=float(m["t_prop"]), p=p, cfg=cfg,
                               record_every=int(m["record_every"]))
    a1 = ser.tube_csv(os.path.join(out, "tube.csv"), tube)
    a2 = ser.write_json(os.path.join(out, "tube.json"), {
        "branch": tube.branch.value, "delta": tube.delta,
        "orbit_energy": tube.orbit_energy,
        "n_fibers": int(tube.states.shape[0]),
        "n_escaped": int(np.sum(tube.escaped)),
        "params": ser.params_dict(p),
    })
    return [a1, a2], {}


_COMMANDS = {
    "classify": _cmd_classify,
    "bifurcation-grid": _cmd_grid,
    "contours": _cmd_contours,
    "poincare": _cmd_poincare,
    "upo": _cmd_upo,
    "ds-sample": _cmd_ds,
    "gaptime": _cmd_gaptime,
    "flux": _cmd_flux,
    "manifolds": _cmd_manifolds,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        merged = merge_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    out = merged["output"]
    os.makedirs(out, exist_ok=True)
    # the effective configuration is replayable: passing this file back via
    # --config reproduces every data artifact byte for byte
    cfg_copy = os.path.join(out, "config.yaml")
    with open(cfg_copy, "w", newline="\n") as fh:
        yaml.safe_dump({k: v for k, v in sorted(merged.items())}, fh,
                       default_flow_style=False, sort_keys=True)
    t0 = time.perf_counter()
    try:
        artifacts, extra = _COMMANDS[args.command](merged, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        report = ser.error_report(exc, args.command)
        try:
            ser.write_json(os.path.join(out, "error.json"), report)
        except OSError:
            pass
        print(json.dumps(report), file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0

    manifest = {
        "command": args.command,
        "version": __version__,
        "config": {k: v for k, v in sorted(merged.items())},
        "artifacts": sorted(artifacts + ["config.yaml"]),
        "wall_time_s": wall,
    }
    manifest.update(extra)
    ser.write_json(os.path.join(out, "manifest.json"), manifest)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
