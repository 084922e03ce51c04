"""Poincare sections: ensemble seeding on a section and the return map.

The default section is y = 0 crossed with p_y > 0, recorded in the (x, p_x)
plane. All ensemble propagation is vectorized elementwise, so results are
independent of how members are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .model import SystemParams, potential_energy
from .integrate import (
    IntegratorConfig,
    EventSpec,
    Direction,
    plane_event,
    advance,
    crossed,
    refine_crossing_arrays,
)
from .sampling import substream

__all__ = [
    "SectionSpec",
    "PoincareResult",
    "EmptyAdmissibleRegion",
    "seed_ensemble",
    "section_map",
]

# probe stream index for emptiness checks; far outside any ensemble index
_PROBE_INDEX = (1 << 63) + 17


class EmptyAdmissibleRegion(Exception):
    """No point of the requested section window is energetically reachable."""


def _default_surface() -> EventSpec:
    return plane_event(coord=1, value=0.0, direction=Direction.RISING)


@dataclass(frozen=True)
class SectionSpec:
    """Section surface plus what to record at each hit.

    surface fires on the chosen crossing direction; record_plane gives the
    two state components stored per hit (default x and p_x). gdot, when set,
    is the time derivative of the surface function along the flow and is used
    to drop grazing hits with |gdot| <= transversality_tol; the default
    y-section uses p_y / m_b.
    """

    surface: EventSpec = field(default_factory=_default_surface)
    record_plane: tuple = (0, 2)
    transversality_tol: float = 1e-10
    gdot: Optional[Callable] = None


def _default_gdot(x, y, px, py, p: SystemParams):
    return py / p.m_b


def _admissible(x, px, e, p: SystemParams):
    """Energy headroom e - H(x, 0, px, py=0) on the section; >= 0 means the
    point is reachable with real p_y."""
    return e - (px * px / (2.0 * p.m_s) + potential_energy((x, 0.0 * x), p))


def seed_ensemble(e: float, n: int, region, seed: int,
                  p: SystemParams) -> np.ndarray:
    """n initial conditions on the section y = 0 with p_y > 0 at energy e.

    (x, p_x) pairs are drawn uniformly over the rectangle
    region = ((xmin, xmax), (pxmin, pxmax)) and rejected while outside the
    energy shell; p_y closes the energy exactly. Each member uses its own
    (seed, index) substream, so the ensemble is reproducible under any
    worker partitioning. Raises EmptyAdmissibleRegion when the rectangle
    misses the shell entirely.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    (xmin, xmax), (pxmin, pxmax) = region
    if not (xmax > xmin and pxmax > pxmin):
        raise ValueError("region must have positive extent")

    # cheap emptiness check: a coarse grid, then a random probe so thin
    # slivers that slip between grid nodes still count as nonempty
    gx = np.linspace(xmin, xmax, 128)
    gp = np.linspace(pxmin, pxmax, 128)
    xx, pp = np.meshgrid(gx, gp, indexing="ij")
    if not np.any(_admissible(xx, pp, e, p) >= 0.0):
        rng = substream(seed, _PROBE_INDEX)
        u = rng.uniform(size=(65536, 2))
        px_ = xmin + u[:, 0] * (xmax - xmin)
        pp_ = pxmin + u[:, 1] * (pxmax - pxmin)
        if not np.any(_admissible(px_, pp_, e, p) >= 0.0):
            raise EmptyAdmissibleRegion(
                f"energy {e} is unreachable inside the requested window")

    out = np.empty((n, 4))
    for i in range(n):
        rng = substream(seed, i)
        for _ in range(1_000_000):
            u, v = rng.uniform(size=2)
            x = xmin + u * (xmax - xmin)
            px = pxmin + v * (pxmax - pxmin)
            avail = _admissible(x, px, e, p)
            if avail >= 0.0:
                break
        else:
            raise EmptyAdmissibleRegion(
                "rejection sampling failed; admissible area is vanishingly small")
        py = math.sqrt(2.0 * p.m_b * avail)
        out[i] = (x, 0.0, px, py)
    return out


@dataclass
class PoincareResult:
    """Flat hit list ordered by (ic_index, hit_index).

    status[i] is "done" (collected n_hits), "escaped", or "t_max" for each
    input trajectory.
    """

    ic_index: np.ndarray   # (m,) int
    hit_index: np.ndarray  # (m,) int
    points: np.ndarray     # (m, 2) the record_plane components
    times: np.ndarray      # (m,)
    states: np.ndarray     # (m, 4) full state at each hit
    status: List[str]
    n_hits_requested: int
    energy: Optional[float] = None


def section_map(ics, spec: SectionSpec, n_hits: int, t_max: float,
                p: SystemParams, cfg: IntegratorConfig) -> PoincareResult:
    """Collect up to n_hits section crossings for every initial condition.

    Propagation is lockstep and elementwise over the whole ensemble with
    retirement on completion or escape; crossings are bisected to
    cfg.event_tol and grazing hits (|gdot| below the transversality
    tolerance) are discarded but do not stop the trajectory.
    """
    ics = np.atleast_2d(np.asarray(ics, dtype=float))
    n = ics.shape[0]
    if n_hits < 1:
        raise ValueError("n_hits must be at least 1")
    if not (t_max > 0.0):
        raise ValueError("t_max must be positive")
    ev = spec.surface
    gdot = spec.gdot if spec.gdot is not None else _default_gdot

    x = ics[:, 0].copy()
    y = ics[:, 1].copy()
    px = ics[:, 2].copy()
    py = ics[:, 3].copy()
    idx = np.arange(n)           # original index of each active member
    counts = np.zeros(n, dtype=int)
    status = ["t_max"] * n
    hits_by_ic: List[list] = [[] for _ in range(n)]

    h = cfg.dt
    r = cfg.escape_radius
    n_steps = min(int(math.ceil(t_max / h - 1e-12)), cfg.max_steps)
    g_prev = np.asarray(ev.g(x, y, px, py), dtype=float)

    for k in range(1, n_steps + 1):
        if idx.size == 0:
            break
        xp, yp, pxp, pyp = x, y, px, py
        x, y, px, py = advance(x, y, px, py, h, p, cfg.scheme)
        t_prev = (k - 1) * h

        finite = (np.isfinite(x) & np.isfinite(y)
                  & np.isfinite(px) & np.isfinite(py))
        g_new = np.asarray(ev.g(x, y, px, py), dtype=float)

        if t_prev >= ev.min_time:
            hit = crossed(g_prev, g_new, ev.direction) & finite
            if np.any(hit):
                rising = np.where(
                    np.full(hit.shape, ev.direction is Direction.EITHER),
                    g_prev < 0.0, ev.direction is Direction.RISING)
                sel = np.nonzero(hit)[0]
                theta, s = refine_crossing_arrays(
                    xp[sel], yp[sel], pxp[sel], pyp[sel], h, ev, p, cfg,
                    rising[sel])
                gd = np.asarray(gdot(s[0], s[1], s[2], s[3], p), dtype=float)
                ok = np.abs(gd) > spec.transversality_tol
                t_hit = t_prev + theta * h
                for j_local, j in enumerate(sel):
                    if not ok[j_local]:
                        continue
                    gi = idx[j]
                    hits_by_ic[gi].append(
                        (counts[gi], t_hit[j_local],
                         (s[0][j_local], s[1][j_local],
                          s[2][j_local], s[3][j_local])))
                    counts[gi] += 1
                    if counts[gi] >= n_hits:
                        status[gi] = "done"

        esc = (np.abs(x) > r) | (np.abs(y) > r) | ~finite
        for j in np.nonzero(esc)[0]:
            if status[idx[j]] == "t_max":
                status[idx[j]] = "escaped"

        done = np.array([status[g] != "t_max" for g in idx], dtype=bool)
        retire = done | esc
        if np.any(retire):
            keep = ~retire
            x, y, px, py = x[keep], y[keep], px[keep], py[keep]
            g_new = g_new[keep]
            idx = idx[keep]
        g_prev = g_new

    rows_ic, rows_hit, rows_t, rows_state = [], [], [], []
    for gi in range(n):
        for hidx, t_hit, s in hits_by_ic[gi]:
            rows_ic.append(gi)
            rows_hit.append(hidx)
            rows_t.append(t_hit)
            rows_state.append(s)
    states = np.array(rows_state) if rows_state else np.empty((0, 4))
    pts = states[:, list(spec.record_plane)] if len(states) else np.empty((0, 2))
    return PoincareResult(
        ic_index=np.array(rows_ic, dtype=int),
        hit_index=np.array(rows_hit, dtype=int),
        points=pts,
        times=np.array(rows_t),
        states=states,
        status=status,
        n_hits_requested=n_hits,
    )
