"""Transport diagnostics: gap-time statistics, directional flux, manifold tubes.

Gap times are collected by propagating a dividing-surface ensemble to an exit
event; the flux through a dividing surface over a periodic orbit is the orbit
action, evaluated by periodic trapezoid quadrature with grid doubling; the
stable/unstable manifold tubes are globalized from the orbit's linear
directions, with backward time realized through the momentum-reversal
conjugacy so the two tube families mirror each other exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .model import BifurcationCase, SystemParams, classify
from .integrate import (
    IntegratorConfig,
    Scheme,
    EventSpec,
    Direction,
    advance,
    crossed,
    plane_event,
    refine_crossing_arrays,
)
from .upo import (
    PeriodicOrbit,
    NoConvergence,
    continue_in_energy,
    find_brake_orbit,
    resample,
    reverse_momenta,
)
from .surface import DividingSurface

__all__ = [
    "ExitClass",
    "GapTimeRecord",
    "GapTimeHistogram",
    "gap_times",
    "gap_time_histogram",
    "FluxMethod",
    "FluxResult",
    "FluxCurveRow",
    "flux_analytic_uncoupled",
    "flux_quadrature",
    "flux_curve",
    "Branch",
    "ManifoldTube",
    "globalize_manifolds",
]


class ExitClass(enum.Enum):
    SAME_DS = "same-ds"
    OTHER_DS = "other-ds"
    BOUNDARY = "boundary"
    CENSORED = "censored"


@dataclass(frozen=True)
class GapTimeRecord:
    """One trajectory's fate: gap_time is None exactly when exit is BOUNDARY
    or CENSORED."""

    ic_index: int
    gap_time: Optional[float]
    exit: ExitClass


def _default_cfg() -> IntegratorConfig:
    return IntegratorConfig(scheme=Scheme.LEAPFROG2, dt=1e-3)


def gap_times(ds: DividingSurface, exit_boundary,
              cutoff: float = 100.0,
              p: Optional[SystemParams] = None,
              cfg: Optional[IntegratorConfig] = None,
              exit_class: Optional[ExitClass] = None,
              recross: Optional[EventSpec] = None) -> List[GapTimeRecord]:
    """Propagate every surface point until the exit event or the cutoff.

    exit_boundary is an x value: the exit is the plane x = exit_boundary,
    crossed away from the surface's saddle (Rising when the boundary lies to
    the right of it, Falling when to the left). In the double-saddle regime
    clearing that plane means the trajectory left through the other barrier,
    so those crossings are labelled OTHER_DS and a monitor on the starting
    saddle's plane records first returns as SAME_DS without stopping the
    propagation; in the single-saddle regimes the boundary proxies the second
    crossing of the one surface and is labelled SAME_DS. Passing an EventSpec
    instead keeps the geometry fully explicit (exit_class then defaults to
    SAME_DS and no monitor is added). Escaping or numerically lost
    trajectories are BOUNDARY, everything else is CENSORED; the ensemble
    always completes.
    """
    if not (cutoff > 0.0):
        raise ValueError("cutoff must be positive")
    p = ds.params if p is None else p
    if cfg is None:
        cfg = _default_cfg()

    if isinstance(exit_boundary, EventSpec):
        exit_event = exit_boundary
        if exit_class is None:
            exit_class = ExitClass.SAME_DS
    else:
        b = float(exit_boundary)
        away = Direction.RISING if b > ds.saddle_x else Direction.FALLING
        exit_event = plane_event(0, b, away)
        if classify(p) is BifurcationCase.III:
            if exit_class is None:
                exit_class = ExitClass.OTHER_DS
            if recross is None:
                back = (Direction.FALLING if away is Direction.RISING
                        else Direction.RISING)
                recross = plane_event(0, ds.saddle_x, back)
        elif exit_class is None:
            exit_class = ExitClass.SAME_DS

    states = np.asarray(ds.states, dtype=float)
    n = states.shape[0]
    x = states[:, 0].copy()
    y = states[:, 1].copy()
    px = states[:, 2].copy()
    py = states[:, 3].copy()
    idx = np.arange(n)

    exit_time = np.full(n, np.nan)
    recross_time = np.full(n, np.nan)
    boundary = np.zeros(n, dtype=bool)

    h = cfg.dt
    r = cfg.escape_radius
    n_steps = int(round(cutoff / h))
    if n_steps * h < cutoff:
        n_steps += 1
    if n_steps > cfg.max_steps:
        raise ValueError("cutoff exceeds cfg.max_steps at this dt")

    g_exit = np.asarray(exit_event.g(x, y, px, py), dtype=float)
    g_rec = (np.asarray(recross.g(x, y, px, py), dtype=float)
             if recross is not None else None)

    for k in range(1, n_steps + 1):
        if idx.size == 0:
            break
        xp, yp, pxp, pyp = x, y, px, py
        x, y, px, py = advance(x, y, px, py, h, p, cfg.scheme)
        t_prev = (k - 1) * h

        finite = (np.isfinite(x) & np.isfinite(y)
                  & np.isfinite(px) & np.isfinite(py))
        gx_new = np.asarray(exit_event.g(x, y, px, py), dtype=float)

        if t_prev >= exit_event.min_time:
            hit = crossed(g_exit, gx_new, exit_event.direction) & finite
            if np.any(hit):
                rising = np.where(
                    np.full(hit.shape,
                            exit_event.direction is Direction.EITHER),
                    g_exit < 0.0,
                    exit_event.direction is Direction.RISING)
                sel = np.nonzero(hit)[0]
                theta, _ = refine_crossing_arrays(
                    xp[sel], yp[sel], pxp[sel], pyp[sel], h, exit_event,
                    p, cfg, rising[sel])
                t_hit = t_prev + theta * h
                ok = t_hit <= cutoff
                exit_time[idx[sel[ok]]] = t_hit[ok]

        if recross is not None:
            gr_new = np.asarray(recross.g(x, y, px, py), dtype=float)
            if t_prev >= recross.min_time:
                rhit = crossed(g_rec, gr_new, recross.direction) & finite
                fresh = rhit & np.isnan(recross_time[idx])
                if np.any(fresh):
                    rising = np.where(
                        np.full(fresh.shape,
                                recross.direction is Direction.EITHER),
                        g_rec < 0.0,
                        recross.direction is Direction.RISING)
                    sel = np.nonzero(fresh)[0]
                    theta, _ = refine_crossing_arrays(
                        xp[sel], yp[sel], pxp[sel], pyp[sel], h, recross,
                        p, cfg, rising[sel])
                    t_hit = t_prev + theta * h
                    ok = t_hit <= cutoff
                    recross_time[idx[sel[ok]]] = t_hit[ok]
            g_rec = gr_new

        esc = (np.abs(x) > r) | (np.abs(y) > r) | ~finite
        boundary[idx[esc & np.isnan(exit_time[idx])]] = True

        retire = esc | ~np.isnan(exit_time[idx])
        if np.any(retire):
            keep = ~retire
            x, y, px, py = x[keep], y[keep], px[keep], py[keep]
            gx_new = gx_new[keep]
            if recross is not None:
                g_rec = g_rec[keep]
            idx = idx[keep]
        g_exit = gx_new

    records = []
    for i in range(n):
        if not math.isnan(exit_time[i]):
            records.append(GapTimeRecord(i, float(exit_time[i]), exit_class))
        elif not math.isnan(recross_time[i]):
            records.append(GapTimeRecord(i, float(recross_time[i]),
                                         ExitClass.SAME_DS))
        elif boundary[i]:
            records.append(GapTimeRecord(i, None, ExitClass.BOUNDARY))
        else:
            records.append(GapTimeRecord(i, None, ExitClass.CENSORED))
    return records


@dataclass
class GapTimeHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_total: int
    n_binned: int
    n_censored: int
    n_boundary: int


def gap_time_histogram(records: List[GapTimeRecord], bins: int = 200,
                       range_: Optional[tuple] = None) -> GapTimeHistogram:
    """Histogram of the finite gap times; censored and boundary outcomes are
    excluded from the bins but reported in the counts metadata."""
    gaps = [r.gap_time for r in records if r.gap_time is not None]
    n_cens = sum(1 for r in records if r.exit is ExitClass.CENSORED)
    n_bound = sum(1 for r in records if r.exit is ExitClass.BOUNDARY)
    if range_ is None:
        hi = max(gaps) if gaps else 1.0
        range_ = (0.0, hi)
    counts, edges = np.histogram(gaps, bins=bins, range=range_)
    return GapTimeHistogram(edges=edges, counts=counts,
                            n_total=len(records), n_binned=len(gaps),
                            n_censored=n_cens, n_boundary=n_bound)


class FluxMethod(enum.Enum):
    ANALYTIC_UNCOUPLED = "analytic-uncoupled"
    QUADRATURE_ON_UPO = "quadrature-on-upo"


@dataclass(frozen=True)
class FluxResult:
    Q: float
    method: FluxMethod
    delta_E: float
    orbit_ref: Optional[dict] = None


def flux_analytic_uncoupled(delta_E: float, omega: float) -> FluxResult:
    """Directional flux through the uncoupled dividing surface: the action of
    the harmonic orbit, 2 pi dE / sqrt(omega)."""
    if delta_E < 0.0:
        raise ValueError("delta_E must be nonnegative")
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    q = 2.0 * math.pi * delta_E / math.sqrt(omega)
    return FluxResult(Q=q, method=FluxMethod.ANALYTIC_UNCOUPLED,
                      delta_E=delta_E)


def _orbit_ref(orbit: PeriodicOrbit) -> dict:
    return {
        "method": orbit.method,
        "energy": orbit.energy,
        "excess_energy": orbit.excess_energy,
        "period": orbit.period,
        "saddle_x": float(orbit.saddle_state[0]),
        "n_samples": orbit.n_samples,
    }


def _action_trapezoid(orbit: PeriodicOrbit, p: SystemParams) -> float:
    # closed-loop action of p dq = integral of 2K dt; periodic trapezoid on
    # the uniform grid, endpoint excluded since samples[-1] repeats samples[0]
    s = orbit.samples[:-1]
    f = s[:, 2] ** 2 / p.m_s + s[:, 3] ** 2 / p.m_b
    return orbit.period * float(np.mean(f))


def flux_quadrature(orbit: PeriodicOrbit, p: Optional[SystemParams] = None,
                    rtol: float = 1e-8, max_doublings: int = 6) -> FluxResult:
    """Flux through the dividing surface attached to a periodic orbit.

    Equal to the orbit action; integrated with the periodic trapezoid rule,
    doubling the sample grid until two consecutive grids agree to rtol. On
    smooth periodic data the rule converges faster than any power of the
    spacing, so a handful of doublings always suffices.
    """
    p = orbit.params if p is None else p
    if orbit.excess_energy == 0.0:
        return FluxResult(Q=0.0, method=FluxMethod.QUADRATURE_ON_UPO,
                          delta_E=0.0, orbit_ref=_orbit_ref(orbit))
    cur = orbit
    q_prev = _action_trapezoid(cur, p)
    for _ in range(max_doublings):
        cur = resample(cur, 2 * cur.n_samples)
        q_new = _action_trapezoid(cur, p)
        if abs(q_new - q_prev) <= rtol * max(abs(q_new), 1e-15):
            return FluxResult(Q=q_new, method=FluxMethod.QUADRATURE_ON_UPO,
                              delta_E=orbit.excess_energy,
                              orbit_ref=_orbit_ref(orbit))
        q_prev = q_new
    raise NoConvergence(
        f"flux quadrature did not settle to {rtol} within "
        f"{max_doublings} grid doublings")


@dataclass(frozen=True)
class FluxCurveRow:
    delta_E: float
    epsilon: float
    Q: Optional[float]
    method: str
    converged: bool


def flux_curve(delta_E_ladder, epsilon_list, p: SystemParams,
               cfg: Optional[IntegratorConfig] = None,
               saddle: str = "origin", **kwargs) -> List[FluxCurveRow]:
    """Flux versus excess energy for each coupling strength.

    Each epsilon gets one chain of orbits continued through the ladder: the
    first cell is corrected from the linear guess and every later cell is
    seeded by the previous orbit, which keeps the chain on the same family.
    Cells whose orbit fails to converge become flagged gaps (Q None) instead
    of aborting the sweep; the chain restarts fresh after a gap.
    """
    rows = []
    for eps in epsilon_list:
        q = SystemParams(p.alpha, p.beta, p.omega, float(eps), p.m_s, p.m_b)
        prev = None
        for de in delta_E_ladder:
            orbit = None
            try:
                if prev is None or prev.excess_energy == 0.0:
                    orbit = find_brake_orbit(q, float(de), saddle=saddle,
                                             cfg=cfg, with_monodromy=False,
                                             **kwargs)
                else:
                    e_target = (prev.energy - prev.excess_energy) + float(de)
                    chain = continue_in_energy(prev, e_target, 1, p=q,
                                               cfg=cfg, with_monodromy=False,
                                               **kwargs)
                    if not chain.orbits:
                        raise NoConvergence("continuation step failed")
                    orbit = chain.orbits[0]
                res = flux_quadrature(orbit, q)
                rows.append(FluxCurveRow(float(de), float(eps), res.Q,
                                         res.method.value, True))
                prev = orbit
            except NoConvergence:
                rows.append(FluxCurveRow(float(de), float(eps), None,
                                         FluxMethod.QUADRATURE_ON_UPO.value,
                                         False))
                prev = None
    return rows


class Branch(enum.Enum):
    UNSTABLE_PLUS = "unstable-plus"
    UNSTABLE_MINUS = "unstable-minus"
    STABLE_PLUS = "stable-plus"
    STABLE_MINUS = "stable-minus"


@dataclass
class ManifoldTube:
    """Globalized manifold branch: fiber k starts at orbit sample k displaced
    by delta along the branch direction.

    states[k, j] is fiber k at times[j]; times are signed (negative for
    stable branches, which grow backward in time). Escaped fibers are frozen
    at their escape state from escape_time[k] on, so the arrays stay
    rectangular.
    """

    branch: Branch
    delta: float
    seeds: np.ndarray        # (n_fib, 4)
    times: np.ndarray        # (n_rec,)
    states: np.ndarray       # (n_fib, n_rec, 4)
    escaped: np.ndarray      # (n_fib,) bool
    escape_time: np.ndarray  # (n_fib,) nan where not escaped
    orbit_energy: float


def globalize_manifolds(orbit: PeriodicOrbit, branch: Branch,
                        delta: float = 1e-6, t_prop: float = 30.0,
                        p: Optional[SystemParams] = None,
                        cfg: Optional[IntegratorConfig] = None,
                        record_every: int = 100) -> ManifoldTube:
    """Propagate one manifold branch from every orbit sample point.

    Unstable branches integrate forward from z_k + delta * v_u[k] (PLUS) or
    z_k - delta * v_u[k] (MINUS); stable branches integrate backward from the
    corresponding v_s seeds. Backward time is realized exactly through the
    reversal conjugacy (reverse momenta, integrate forward, reverse back), so
    the stable tube is the momentum-reversed unstable tube fiber for fiber.
    Escape freezes a fiber where it left the box; it never aborts the tube.
    """
    if orbit.v_u is None or orbit.v_s is None:
        raise ValueError("orbit carries no direction fields; "
                         "build it with the tangent pass enabled")
    if not (delta > 0.0):
        raise ValueError("delta must be positive")
    if not (t_prop > 0.0):
        raise ValueError("t_prop must be positive")
    p = orbit.params if p is None else p
    if cfg is None:
        cfg = IntegratorConfig(scheme=orbit.scheme, dt=1e-3, event_tol=1e-15)

    n_fib = orbit.n_samples
    base = orbit.samples[:n_fib]
    stable = branch in (Branch.STABLE_PLUS, Branch.STABLE_MINUS)
    sign = 1.0 if branch in (Branch.UNSTABLE_PLUS, Branch.STABLE_PLUS) else -1.0
    vecs = (orbit.v_s if stable else orbit.v_u)[:n_fib]
    seeds = base + sign * delta * vecs

    work = reverse_momenta(seeds) if stable else seeds.copy()

    h = cfg.dt
    n_steps = int(round(t_prop / h))
    if n_steps * h < t_prop:
        n_steps += 1
    if n_steps > cfg.max_steps:
        raise ValueError("t_prop exceeds cfg.max_steps at this dt")

    x = work[:, 0].copy()
    y = work[:, 1].copy()
    px = work[:, 2].copy()
    py = work[:, 3].copy()
    alive = np.ones(n_fib, dtype=bool)
    escape_time = np.full(n_fib, np.nan)
    r = cfg.escape_radius

    rec_times = [0.0]
    rec = [np.stack([x, y, px, py], axis=1)]
    for k in range(1, n_steps + 1):
        # frozen fibers advance by h = 0, which leaves them bitwise unchanged
        hk = np.where(alive, h, 0.0)
        x, y, px, py = advance(x, y, px, py, hk, p, cfg.scheme)
        bad = ~(np.isfinite(x) & np.isfinite(y)
                & np.isfinite(px) & np.isfinite(py))
        if np.any(bad):
            # roll the lost fibers back to their last recorded state
            last = rec[-1]
            sel = np.nonzero(bad)[0]
            x[sel] = last[sel, 0]
            y[sel] = last[sel, 1]
            px[sel] = last[sel, 2]
            py[sel] = last[sel, 3]
        esc = bad | (np.abs(x) > r) | (np.abs(y) > r)
        fresh = esc & alive
        escape_time[fresh] = k * h
        alive &= ~esc
        if k % record_every == 0 or k == n_steps:
            rec_times.append(k * h)
            rec.append(np.stack([x, y, px, py], axis=1))

    states = np.stack(rec, axis=1)  # (n_fib, n_rec, 4)
    times = np.array(rec_times)
    if stable:
        states = reverse_momenta(states)
        times = -times
        escape_time = -escape_time
    return ManifoldTube(branch=branch, delta=delta, seeds=seeds, times=times,
                        states=states, escaped=~alive,
                        escape_time=escape_time,
                        orbit_energy=orbit.energy)
