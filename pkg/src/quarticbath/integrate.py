"""Fixed-step symplectic integration with event location.

Two schemes share one drift-kick-drift kernel: a second-order position-Verlet
step, and its fourth-order triple-jump composition. Both are time reversible
in exact arithmetic and, because the substep coefficient sequences are
palindromes, the floating-point maps satisfy phi_{-h} = R o phi_h o R
operation for operation, where R negates the momenta. Several consumers rely
on that identity being bitwise, so the kernel must stay a plain palindromic
sequence of drifts and kicks; do not reorder or algebraically "simplify" it.

The kernel is written against the scalar/ndarray common subset, so the same
code path advances a single state held in Python floats (fast enough for long
single-orbit loops) or a whole ensemble held in component arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import SystemParams, PhaseState, total_energy

__all__ = [
    "Scheme",
    "Direction",
    "IntegratorConfig",
    "EventSpec",
    "plane_event",
    "Trajectory",
    "EventResult",
    "NonFiniteState",
    "advance",
    "advance_tangent",
    "step",
    "integrate",
    "integrate_steps",
    "integrate_with_stm",
    "stm_steps",
    "integrate_until_event",
    "crossed",
    "refine_crossing",
    "refine_crossing_arrays",
]


class Scheme(enum.Enum):
    LEAPFROG2 = "leapfrog2"
    COMPOSED4 = "composed4"


# triple-jump weights 1/(2 - 2^(1/3)) and -2^(1/3)/(2 - 2^(1/3))
_W1 = 1.3512071919596578
_W0 = -1.7024143839193153

# per scheme: (drift coefficients, kick coefficients); the step is
# D(dc[0] h) K(kc[0] h) D(dc[1] h) K(kc[1] h) ... D(dc[-1] h)
_B = 0.5 * (_W1 + _W0)
_COEFFS = {
    Scheme.LEAPFROG2: ((0.5, 0.5), (1.0,)),
    Scheme.COMPOSED4: ((0.5 * _W1, _B, _B, 0.5 * _W1), (_W1, _W0, _W1)),
}


class Direction(enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    EITHER = "either"


class NonFiniteState(Exception):
    """Integration produced a non-finite coordinate.

    Carries the last finite state and its time so the caller can restart or
    report where things went wrong.
    """

    def __init__(self, message, last_state=None, last_time=None):
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.LEAPFROG2
    dt: float = 1e-3
    event_tol: float = 1e-12  # width, in time, to which crossings are bisected
    max_steps: int = 10_000_000
    escape_radius: float = 1e3

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.event_tol > 0.0):
            raise ValueError("event_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not (self.escape_radius > 0.0):
            raise ValueError("escape_radius must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Zero crossing of a scalar function g along the flow.

    g takes the four phase-space components (scalars or arrays of equal
    shape) and must be continuous along trajectories. A RISING event fires on
    g_prev < 0 and g_new >= 0, FALLING on the mirror image, EITHER on both;
    crossings whose bracketing step starts before min_time are ignored, which
    is how "strictly after t = 0" starts on the section itself are handled.
    """

    g: Callable
    direction: Direction = Direction.EITHER
    min_time: float = 0.0
    coord: Optional[int] = None  # set when g is a coordinate plane


def plane_event(coord: int, value: float = 0.0,
                direction: Direction = Direction.EITHER,
                min_time: float = 0.0) -> EventSpec:
    """Event on the coordinate plane state[coord] = value; coord indexes
    (x, y, p_x, p_y). The plane form vectorizes trivially, so every ensemble
    driver in the package uses these."""
    if coord not in (0, 1, 2, 3):
        raise ValueError("coord must index one of (x, y, p_x, p_y)")

    def g(x, y, px, py, _c=coord, _v=value):
        return (x, y, px, py)[_c] - _v

    return EventSpec(g=g, direction=direction, min_time=min_time, coord=coord)


@dataclass
class Trajectory:
    times: np.ndarray   # (k,)
    states: np.ndarray  # (k, 4)
    energy0: float = 0.0
    escaped: bool = False
    escape_time: Optional[float] = None

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class EventResult:
    hit: bool
    time: Optional[float]
    state: Optional[np.ndarray]
    reason: str  # "event" | "t_max" | "escaped"
    trajectory: Optional[Trajectory] = None


def advance(x, y, px, py, h, p: SystemParams, scheme: Scheme):
    """One step of size h. Accepts Python floats or ndarrays componentwise;
    h may be an array to step ensemble members by different amounts."""
    dc, kc = _COEFFS[scheme]
    al, be, om, ep = p.alpha, p.beta, p.omega, p.epsilon
    ims, imb = 1.0 / p.m_s, 1.0 / p.m_b
    for i in range(len(kc)):
        hd = dc[i] * h
        x = x + hd * px * ims
        y = y + hd * py * imb
        hk = kc[i] * h
        px = px + hk * (al * x - be * x ** 3 + ep * (y - x))
        py = py + hk * (-om * y + ep * (x - y))
    hd = dc[-1] * h
    x = x + hd * px * ims
    y = y + hd * py * imb
    return x, y, px, py


def advance_tangent(x, y, px, py, m, h, p: SystemParams, scheme: Scheme):
    """One step of size h carrying the exact tangent map of the step.

    m is the (4, 4) state-transition matrix, updated by the derivative of
    each drift and kick, so the returned matrix is symplectic to roundoff
    regardless of step size.
    """
    dc, kc = _COEFFS[scheme]
    al, be, om, ep = p.alpha, p.beta, p.omega, p.epsilon
    ims, imb = 1.0 / p.m_s, 1.0 / p.m_b
    a12 = ep
    a22 = -om - ep
    for i in range(len(kc)):
        hd = dc[i] * h
        x = x + hd * px * ims
        y = y + hd * py * imb
        m[0] += (hd * ims) * m[2]
        m[1] += (hd * imb) * m[3]
        hk = kc[i] * h
        px = px + hk * (al * x - be * x ** 3 + ep * (y - x))
        py = py + hk * (-om * y + ep * (x - y))
        a11 = al - ep - 3.0 * be * x * x
        m[2] += hk * (a11 * m[0] + a12 * m[1])
        m[3] += hk * (a12 * m[0] + a22 * m[1])
    hd = dc[-1] * h
    x = x + hd * px * ims
    y = y + hd * py * imb
    m[0] += (hd * ims) * m[2]
    m[1] += (hd * imb) * m[3]
    return x, y, px, py, m


def _unpack(state):
    if isinstance(state, PhaseState):
        return state.x, state.y, state.p_x, state.p_y
    a = np.asarray(state, dtype=float)
    return float(a[0]), float(a[1]), float(a[2]), float(a[3])


def step(state, p: SystemParams, cfg: IntegratorConfig):
    """One step of cfg.dt from a PhaseState or 4-array, as a 4-array."""
    x, y, px, py = _unpack(state)
    try:
        out = advance(x, y, px, py, cfg.dt, p, cfg.scheme)
    except OverflowError:
        out = (math.inf, math.inf, math.inf, math.inf)
    if not all(math.isfinite(v) for v in out):
        raise NonFiniteState("state lost finiteness in one step",
                             last_state=np.array((x, y, px, py)), last_time=0.0)
    return np.array(out)


def integrate_steps(state, n_steps: int, p: SystemParams, cfg: IntegratorConfig,
                    record_every: int = 1) -> Trajectory:
    """Advance exactly n_steps fixed steps, recording every record_every-th
    state (the final state is always recorded). Stops early with escaped=True
    the first time |x| or |y| exceeds cfg.escape_radius; raises NonFiniteState
    (carrying the last finite sample) if a coordinate stops being finite.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    x, y, px, py = _unpack(state)
    h = cfg.dt
    r = cfg.escape_radius
    e0 = float(total_energy((x, y, px, py), p))
    times = [0.0]
    rows = [(x, y, px, py)]
    for k in range(1, n_steps + 1):
        xp, yp, pxp, pyp = x, y, px, py
        try:
            x, y, px, py = advance(x, y, px, py, h, p, cfg.scheme)
        except OverflowError:
            # python-float cubes overflow loudly where numpy would give inf
            x = y = px = py = math.inf
        if not (math.isfinite(x) and math.isfinite(y)
                and math.isfinite(px) and math.isfinite(py)):
            raise NonFiniteState(
                f"state lost finiteness during step {k}",
                last_state=np.array([xp, yp, pxp, pyp]),
                last_time=(k - 1) * h,
            )
        if abs(x) > r or abs(y) > r:
            times.append(k * h)
            rows.append((x, y, px, py))
            return Trajectory(np.array(times), np.array(rows), e0,
                              escaped=True, escape_time=k * h)
        if k % record_every == 0:
            times.append(k * h)
            rows.append((x, y, px, py))
    if times[-1] != n_steps * h:
        times.append(n_steps * h)
        rows.append((x, y, px, py))
    return Trajectory(np.array(times), np.array(rows), e0)


def _step_plan(t_final: float, cfg: IntegratorConfig):
    """Number of full dt steps plus the trailing partial step to land exactly
    on t_final."""
    if not (t_final > 0.0):
        raise ValueError("t_final must be positive")
    n = int(math.floor(t_final / cfg.dt + 1e-12))
    rem = t_final - n * cfg.dt
    if rem <= 1e-12 * cfg.dt:
        rem = 0.0
    if n + (1 if rem else 0) > cfg.max_steps:
        raise ValueError("t_final exceeds cfg.max_steps at this dt")
    return n, rem


def integrate(state, t_final: float, p: SystemParams, cfg: IntegratorConfig,
              record_every: int = 1) -> Trajectory:
    """Propagate to exactly t_final (a trailing partial step covers any
    non-multiple of dt). Escape and finiteness handling as integrate_steps."""
    n, rem = _step_plan(t_final, cfg)
    traj = integrate_steps(state, n, p, cfg, record_every=record_every)
    if rem == 0.0 or traj.escaped:
        return traj
    x, y, px, py = traj.states[-1]
    try:
        x, y, px, py = advance(x, y, px, py, rem, p, cfg.scheme)
    except OverflowError:
        x = y = px = py = math.inf
    if not all(math.isfinite(v) for v in (x, y, px, py)):
        raise NonFiniteState("state lost finiteness in the final partial step",
                             last_state=traj.states[-1], last_time=traj.times[-1])
    times = np.append(traj.times, t_final)
    states = np.vstack([traj.states, [(x, y, px, py)]])
    return Trajectory(times, states, traj.energy0)


def stm_steps(state, n_steps: int, p: SystemParams, cfg: IntegratorConfig,
              record_every: int = 1, h: Optional[float] = None):
    """Fixed-count tangent integration. Returns (times, states, stms) with
    stms[k] the tangent map from t = 0 to times[k]. h overrides cfg.dt when
    the caller needs a period-commensurate step. No escape handling; callers
    integrate near bounded orbits."""
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    x, y, px, py = _unpack(state)
    hh = cfg.dt if h is None else float(h)
    m = np.eye(4)
    times = [0.0]
    rows = [(x, y, px, py)]
    stms = [m.copy()]
    for k in range(1, n_steps + 1):
        try:
            x, y, px, py, m = advance_tangent(x, y, px, py, m, hh, p,
                                              cfg.scheme)
        except OverflowError:
            raise NonFiniteState(
                f"state lost finiteness during tangent step {k}",
                last_state=np.array(rows[-1]), last_time=times[-1])
        if k % record_every == 0 or k == n_steps:
            times.append(k * hh)
            rows.append((x, y, px, py))
            stms.append(m.copy())
    if rows and not all(math.isfinite(v) for v in rows[-1]):
        raise NonFiniteState("state lost finiteness during tangent integration")
    return np.array(times), np.array(rows), np.array(stms)


def integrate_with_stm(state, t_final: float, p: SystemParams,
                       cfg: IntegratorConfig, record_every: int = 1):
    """Trajectory plus the state-transition matrix M(t_final), both advanced
    on the same grid (trailing partial step included)."""
    n, rem = _step_plan(t_final, cfg)
    times, rows, stms = stm_steps(state, n, p, cfg, record_every=record_every)
    m = stms[-1]
    if rem:
        x, y, px, py = rows[-1]
        x, y, px, py, m = advance_tangent(x, y, px, py, m.copy(), rem, p,
                                          cfg.scheme)
        times = np.append(times, t_final)
        rows = np.vstack([rows, [(x, y, px, py)]])
    e0 = float(total_energy(rows[0], p))
    return Trajectory(times, rows, e0), m


def crossed(g_prev, g_new, direction: Direction):
    """Crossing predicate on consecutive event-function values; works on
    scalars or arrays. Rising means g_prev < 0 <= g_new."""
    rising = (g_prev < 0.0) & (g_new >= 0.0)
    falling = (g_prev > 0.0) & (g_new <= 0.0)
    if direction is Direction.RISING:
        return rising
    if direction is Direction.FALLING:
        return falling
    return rising | falling


def _bisect_iters(h: float, tol: float) -> int:
    # enough halvings that the time bracket is below tol, plus safety
    return max(8, int(math.ceil(math.log2(max(h, tol) / tol))) + 2)


def refine_crossing(prev, h: float, event: EventSpec, p: SystemParams,
                    cfg: IntegratorConfig, rising: bool):
    """Bisect the substep fraction within one step that brackets a crossing.

    prev is the (x, y, px, py) tuple at the step start. Returns
    (theta, state_tuple) where the state is the step-start state advanced by
    theta*h and lies on the crossed side of the section.
    """
    lo, hi = 0.0, 1.0
    iters = _bisect_iters(h, cfg.event_tol)
    for _ in range(iters):
        if (hi - lo) * h <= cfg.event_tol:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        s = advance(prev[0], prev[1], prev[2], prev[3], mid * h, p, cfg.scheme)
        g = event.g(*s)
        after = (g >= 0.0) if rising else (g <= 0.0)
        if after:
            hi = mid
        else:
            lo = mid
    s = advance(prev[0], prev[1], prev[2], prev[3], hi * h, p, cfg.scheme)
    return hi, s


def refine_crossing_arrays(xp, yp, pxp, pyp, h: float, event: EventSpec,
                           p: SystemParams, cfg: IntegratorConfig, rising):
    """Vectorized crossing bisection for ensemble members that crossed in the
    same step. All inputs are (m,) arrays of step-start components; rising is
    a boolean (m,) array. The iteration count is fixed by h and event_tol, and
    every operation is elementwise, so results do not depend on how the
    ensemble was partitioned into batches.
    """
    lo = np.zeros_like(xp)
    hi = np.ones_like(xp)
    iters = _bisect_iters(h, cfg.event_tol)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        s = advance(xp, yp, pxp, pyp, mid * h, p, cfg.scheme)
        g = event.g(*s)
        after = np.where(rising, g >= 0.0, g <= 0.0)
        hi = np.where(after, mid, hi)
        lo = np.where(after, lo, mid)
    theta = hi
    s = advance(xp, yp, pxp, pyp, theta * h, p, cfg.scheme)
    return theta, s


def integrate_until_event(state, event: EventSpec, t_max: float,
                          p: SystemParams, cfg: IntegratorConfig,
                          record: bool = False) -> EventResult:
    """Step until the event fires, the time budget runs out, or the orbit
    escapes. The crossing is located to cfg.event_tol in time and the returned
    state sits on the crossed side of the surface."""
    if not (t_max > 0.0):
        raise ValueError("t_max must be positive")
    x, y, px, py = _unpack(state)
    h = cfg.dt
    r = cfg.escape_radius
    n_max = min(int(math.ceil(t_max / h - 1e-12)), cfg.max_steps)
    g_prev = float(event.g(x, y, px, py))
    times = [0.0]
    rows = [(x, y, px, py)]
    for k in range(1, n_max + 1):
        prev = (x, y, px, py)
        t_prev = (k - 1) * h
        try:
            x, y, px, py = advance(x, y, px, py, h, p, cfg.scheme)
        except OverflowError:
            x = y = px = py = math.inf
        if not (math.isfinite(x) and math.isfinite(y)
                and math.isfinite(px) and math.isfinite(py)):
            raise NonFiniteState(
                f"state lost finiteness during step {k}",
                last_state=np.array(prev), last_time=t_prev,
            )
        g_new = float(event.g(x, y, px, py))
        if t_prev >= event.min_time and crossed(g_prev, g_new, event.direction):
            rising = g_prev < 0.0 if event.direction is Direction.EITHER \
                else event.direction is Direction.RISING
            theta, s = refine_crossing(prev, h, event, p, cfg, rising)
            t_ev = t_prev + theta * h
            traj = None
            if record:
                times.append(t_ev)
                rows.append(s)
                traj = Trajectory(np.array(times), np.array(rows),
                                  float(total_energy(rows[0], p)))
            return EventResult(True, t_ev, np.array(s), "event", traj)
        if abs(x) > r or abs(y) > r:
            traj = None
            if record:
                times.append(k * h)
                rows.append((x, y, px, py))
                traj = Trajectory(np.array(times), np.array(rows),
                                  float(total_energy(rows[0], p)),
                                  escaped=True, escape_time=k * h)
            return EventResult(False, None, np.array((x, y, px, py)),
                               "escaped", traj)
        g_prev = g_new
        if record:
            times.append(k * h)
            rows.append((x, y, px, py))
    traj = None
    if record:
        traj = Trajectory(np.array(times), np.array(rows),
                          float(total_energy(rows[0], p)))
    return EventResult(False, None, np.array((x, y, px, py)), "t_max", traj)
