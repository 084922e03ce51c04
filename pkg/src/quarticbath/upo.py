"""Unstable periodic orbits over the index-1 saddle points.

The orbits computed here are brake orbits: at an energy excess dE above a
saddle-centre equilibrium they touch the zero-velocity curve V(x, y) = e with
both momenta exactly zero, and retrace themselves under the momentum reversal
R. Differential correction therefore only has to slide one point along the
zero-velocity curve until the first p_y = 0 crossing also has p_x = 0; the
half period doubles into the full one.

Sample storage exploits the same symmetry: only the first half period is
integrated, the second half is stored as the R-image of the first,
samples[N - k] = R samples[k] bitwise, and the stable direction field is the
reflected unstable one. Invariant-manifold code relies on that pairing, so
the layout here is contractual, not cosmetic. The closed-form uncoupled orbit
instead follows the y = A sin(Omega t) phase convention and is R-symmetric
about its quarter period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from .model import (
    SystemParams,
    PhaseState,
    Stability,
    EquilibriumPoint,
    potential_energy,
    total_energy,
    find_equilibria,
)
from .integrate import (
    IntegratorConfig,
    Scheme,
    advance,
    advance_tangent,
    crossed,
    Direction,
)

__all__ = [
    "PeriodicOrbit",
    "ContinuationResult",
    "WrongRegime",
    "LostEnergy",
    "NoConvergence",
    "NotASaddle",
    "initial_guess",
    "differential_correction",
    "find_brake_orbit",
    "continue_in_energy",
    "analytic_upo_uncoupled",
    "mirror_orbit",
    "resample",
    "reverse_momenta",
]

MONO_REFINE = 8  # substep refinement for the monodromy/tangent pass
DEFAULT_SAMPLES = 512


class WrongRegime(Exception):
    """The requested orbit does not exist at these parameters (missing or
    mis-typed saddle, or energy below the saddle)."""


class NotASaddle(Exception):
    """The supplied equilibrium is not a saddle-centre."""


class LostEnergy(Exception):
    """An iterate left the target energy surface, or projection back onto the
    zero-velocity curve failed or wandered too far."""


class NoConvergence(Exception):
    """Differential correction or a downstream refinement did not converge."""


@dataclass
class PeriodicOrbit:
    """A brake orbit with its linearization.

    samples has shape (n_samples + 1, 4) on the uniform grid
    times[k] = k * period / n_samples with samples[0] == samples[-1]; v_u and
    v_s are unit tangent fields of the unstable/stable directions on that
    grid. monodromy, multipliers, v_u, v_s are None when the orbit was built
    without the tangent pass. method is one of "corrected", "analytic",
    "degenerate".
    """

    params: SystemParams
    saddle_state: np.ndarray
    energy: float
    excess_energy: float
    period: float
    times: np.ndarray
    samples: np.ndarray
    sample_step: float
    substeps: int
    residual: float
    iterations: int
    scheme: Scheme
    method: str = "corrected"
    monodromy: Optional[np.ndarray] = None
    multipliers: Optional[tuple] = None
    v_u: Optional[np.ndarray] = None
    v_s: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def initial_state(self) -> np.ndarray:
        return self.samples[0]


@dataclass
class ContinuationResult:
    """Orbit chain from natural-parameter continuation; failure_index is the
    ladder position that failed to converge (None when the chain completed)."""

    orbits: List[PeriodicOrbit]
    failure_index: Optional[int] = None
    energies: Optional[np.ndarray] = None


def reverse_momenta(state: np.ndarray) -> np.ndarray:
    """R(x, y, p_x, p_y) = (x, y, -p_x, -p_y) on the trailing axis."""
    out = np.array(state, dtype=float, copy=True)
    out[..., 2] = -out[..., 2]
    out[..., 3] = -out[..., 3]
    return out


def _default_cfg() -> IntegratorConfig:
    return IntegratorConfig(scheme=Scheme.COMPOSED4, dt=1e-3, event_tol=1e-15)


def _pick_saddle(p: SystemParams, saddle: str) -> EquilibriumPoint:
    eqs = find_equilibria(p)
    by_name = {"origin": eqs[0]}
    if len(eqs) == 3:
        by_name["plus"] = eqs[1]
        by_name["minus"] = eqs[2]
    if saddle not in by_name:
        raise WrongRegime(f"no '{saddle}' equilibrium at these parameters")
    eq = by_name[saddle]
    if eq.stability is not Stability.SADDLE_CENTRE:
        raise WrongRegime(
            f"'{saddle}' equilibrium is {eq.stability.value}, not saddle-centre"
        )
    return eq


def _nearest_saddle(p: SystemParams, q) -> EquilibriumPoint:
    saddles = [eq for eq in find_equilibria(p)
               if eq.stability is Stability.SADDLE_CENTRE]
    if not saddles:
        raise WrongRegime("no saddle-centre equilibrium at these parameters")
    d = [math.hypot(eq.state.x - q[0], eq.state.y - q[1]) for eq in saddles]
    return saddles[int(np.argmin(d))]


def _config_modes(p: SystemParams, x_s: float):
    """Mass-weighted normal modes of the potential Hessian on the x-axis
    symmetry line: K W[:, i] = lam[i] * diag(m_s, m_b) W[:, i], lam ascending."""
    k11 = -p.alpha + 3.0 * p.beta * x_s * x_s + p.epsilon
    k12 = -p.epsilon
    k22 = p.omega + p.epsilon
    kmat = np.array([[k11, k12], [k12, k22]])
    dm = np.array([p.m_s, p.m_b])
    b = kmat / np.sqrt(np.outer(dm, dm))
    lam, u = np.linalg.eigh(b)
    w = u / np.sqrt(dm)[:, None]
    return lam, w, kmat


def _grad_v(qx: float, qy: float, p: SystemParams):
    gx = -p.alpha * qx + p.beta * qx ** 3 + p.epsilon * (qx - qy)
    gy = p.omega * qy - p.epsilon * (qx - qy)
    return gx, gy


def _project_to_zvc(qx: float, qy: float, level: float, p: SystemParams):
    """Move (qx, qy) along the local gradient direction until V = level.

    Newton on the 1-d restriction; LostEnergy if the correction stalls or the
    point has to move more than a quarter of its own scale.
    """
    gx, gy = _grad_v(qx, qy, p)
    gn = math.hypot(gx, gy)
    if gn < 1e-14:
        raise LostEnergy("zero potential gradient at the projection point")
    ux, uy = gx / gn, gy / gn
    s_max = 0.25 * (1.0 + math.hypot(qx, qy))
    tol = 1e-13 * max(1.0, abs(level))
    s = 0.0
    for _ in range(60):
        px_, py_ = qx + s * ux, qy + s * uy
        err = float(potential_energy((px_, py_), p)) - level
        if abs(err) <= tol:
            return px_, py_
        gx, gy = _grad_v(px_, py_, p)
        dv = gx * ux + gy * uy
        if dv == 0.0:
            raise LostEnergy("flat potential along the projection direction")
        s -= err / dv
        if abs(s) > s_max:
            raise LostEnergy("projection onto the energy level moved too far")
    raise LostEnergy("projection onto the energy level did not converge")


def initial_guess(e: float, saddle: EquilibriumPoint, p: SystemParams) -> PhaseState:
    """Seed state for differential correction at total energy e.

    Displaces the saddle along its oscillatory normal mode with the amplitude
    at which the quadratic model stores the whole energy excess, zeroes the
    momenta (turning-point ansatz), and projects the configuration onto the
    zero-velocity curve so the seed carries exactly the requested energy.
    """
    if saddle.stability is not Stability.SADDLE_CENTRE:
        raise NotASaddle(f"equilibrium is {saddle.stability.value}")
    excess = e - saddle.energy
    if not math.isfinite(excess) or excess < 0.0:
        raise WrongRegime("energy must not be below the saddle energy")
    x_s, y_s = saddle.state.x, saddle.state.y
    if excess == 0.0:
        return PhaseState(x_s, y_s, 0.0, 0.0)
    lam, wmat, kmat = _config_modes(p, x_s)
    if not (lam[0] < 0.0 < lam[1]):
        raise NotASaddle("potential Hessian at the point is not index 1")
    w = wmat[:, 1]
    if w[1] < 0.0:
        w = -w
    amp = math.sqrt(2.0 * excess / float(w @ kmat @ w))
    qx, qy = _project_to_zvc(x_s + amp * w[0], y_s + amp * w[1], e, p)
    return PhaseState(qx, qy, 0.0, 0.0)


def _field_at(s, p: SystemParams):
    x, y, px, py = s
    return (px / p.m_s, py / p.m_b,
            p.alpha * x - p.beta * x ** 3 + p.epsilon * (y - x),
            -p.omega * y + p.epsilon * (x - y))


def _stm_to_py_crossing(z0, p: SystemParams, cfg: IntegratorConfig,
                        guard_time: float, t_max: float):
    """Integrate with the tangent map from z0 (plain 4-tuple) to the first
    p_y = 0 crossing after guard_time. Returns (t, state_tuple, stm)."""
    x, y, px, py = z0
    m = np.eye(4)
    h = cfg.dt
    n_max = int(math.ceil(t_max / h))
    g_prev = py
    for k in range(1, n_max + 1):
        prev = (x, y, px, py)
        m_prev = m.copy()
        t_prev = (k - 1) * h
        x, y, px, py, m = advance_tangent(x, y, px, py, m, h, p, cfg.scheme)
        if t_prev >= guard_time and crossed(g_prev, py, Direction.EITHER):
            rising = g_prev < 0.0
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > cfg.event_tol:
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                sx, sy, spx, spy, _ = advance_tangent(
                    prev[0], prev[1], prev[2], prev[3], m_prev.copy(),
                    mid * h, p, cfg.scheme)
                after = (spy >= 0.0) if rising else (spy <= 0.0)
                if after:
                    hi = mid
                else:
                    lo = mid
            sx, sy, spx, spy, sm = advance_tangent(
                prev[0], prev[1], prev[2], prev[3], m_prev.copy(),
                hi * h, p, cfg.scheme)
            return t_prev + hi * h, (sx, sy, spx, spy), sm
        g_prev = py
    raise NoConvergence(f"no p_y = 0 crossing within t = {t_max}")


def differential_correction(guess: PhaseState, e: float, p: SystemParams,
                            cfg: Optional[IntegratorConfig] = None,
                            saddle: Optional[EquilibriumPoint] = None,
                            n_samples: int = DEFAULT_SAMPLES,
                            with_monodromy: bool = True,
                            mono_refine: int = MONO_REFINE,
                            max_iter: int = 25,
                            residual_tol: float = 1e-11,
                            t_max_half: float = 200.0) -> PeriodicOrbit:
    """Newton-correct a brake orbit at total energy e from a nearby guess.

    The guess configuration is projected onto the zero-velocity curve (the
    momenta are discarded; the orbit ansatz starts from rest). Each iteration
    integrates with the tangent map to the first p_y = 0 crossing and moves
    the start point along the curve to cancel p_x there, with step halving on
    residual increase. Converges at |p_x| <= residual_tol; the full orbit is
    the half trajectory plus its momentum-reversed image.
    """
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be even and at least 2")
    if cfg is None:
        cfg = _default_cfg()
    if isinstance(guess, PhaseState):
        gq = (guess.x, guess.y)
    else:
        a = np.asarray(guess, dtype=float)
        gq = (float(a[0]), float(a[1]))
    if saddle is None:
        saddle = _nearest_saddle(p, gq)
    excess = e - saddle.energy
    if not math.isfinite(excess) or excess < -1e-12:
        raise WrongRegime("energy below the saddle energy")
    excess = max(excess, 0.0)
    x_s, y_s = saddle.state.x, saddle.state.y
    guard = 10.0 * cfg.dt

    if excess == 0.0:
        lam, _, _ = _config_modes(p, x_s)
        if not (lam[0] < 0.0 < lam[1]):
            raise NotASaddle("potential Hessian at the point is not index 1")
        z0 = (x_s, y_s, 0.0, 0.0)
        t_half = math.pi / math.sqrt(lam[1])
        residual = 0.0
        iters = 0
        method = "degenerate"
    else:
        qx, qy = _project_to_zvc(gq[0], gq[1], e, p)
        z0 = (qx, qy, 0.0, 0.0)
        t_half = None
        residual = None
        iters = 0
        method = "corrected"
        delta = 0.0
        tau = (0.0, 0.0)
        z_prev = z0
        for iters in range(1, max_iter + 1):
            if abs(float(total_energy(np.array(z0), p)) - e) > 1e-10:
                raise LostEnergy("iterate left the energy surface")
            t_c, s_c, m_c = _stm_to_py_crossing(z0, p, cfg, guard, t_max_half)
            r = s_c[2]
            if residual is not None and abs(r) > abs(residual):
                # overshoot: retreat along the curve from the previous point
                accepted = False
                for _ in range(8):
                    delta *= 0.5
                    qx, qy = _project_to_zvc(
                        z_prev[0] + delta * tau[0], z_prev[1] + delta * tau[1],
                        e, p)
                    z0 = (qx, qy, 0.0, 0.0)
                    t_c, s_c, m_c = _stm_to_py_crossing(z0, p, cfg, guard,
                                                        t_max_half)
                    r = s_c[2]
                    if abs(r) <= abs(residual):
                        accepted = True
                        break
                if not accepted:
                    raise NoConvergence(
                        "correction step could not reduce the crossing residual")
            residual = r
            t_half = t_c
            if abs(r) <= residual_tol:
                break
            gx, gy = _grad_v(z0[0], z0[1], p)
            gn = math.hypot(gx, gy)
            if gn < 1e-14:
                raise LostEnergy("zero potential gradient on the orbit start")
            tau = (-gy / gn, gx / gn)
            f_c = _field_at(s_c, p)
            if f_c[3] == 0.0:
                raise NoConvergence("tangential p_y = 0 crossing, cannot correct")
            dz = m_c @ np.array([tau[0], tau[1], 0.0, 0.0])
            dr = dz[2] - f_c[2] * dz[3] / f_c[3]
            if dr == 0.0:
                raise NoConvergence("singular correction derivative")
            delta = -r / dr
            z_prev = z0
            qx, qy = _project_to_zvc(
                z0[0] + delta * tau[0], z0[1] + delta * tau[1], e, p)
            z0 = (qx, qy, 0.0, 0.0)
        if abs(residual) > residual_tol:
            raise NoConvergence(
                f"residual {residual:.3e} after {max_iter} iterations")

    period = 2.0 * t_half
    samples, times, dt_samp, substeps = _half_and_reflect(
        z0, period, n_samples, p, cfg)
    orbit = PeriodicOrbit(
        params=p, saddle_state=saddle.state.as_array(), energy=e,
        excess_energy=excess, period=period, times=times, samples=samples,
        sample_step=dt_samp, substeps=substeps, residual=float(residual),
        iterations=iters, scheme=cfg.scheme, method=method,
    )
    if with_monodromy:
        _attach_tangent_data(orbit, cfg, mono_refine)
    return orbit


def _half_and_reflect(z0, period: float, n_samples: int, p: SystemParams,
                      cfg: IntegratorConfig):
    """Integrate the first half period on a uniform N-sample grid and store
    the second half as the bitwise momentum reversal of the first."""
    half = n_samples // 2
    dt_samp = period / n_samples
    substeps = max(1, int(round(dt_samp / cfg.dt)))
    h = dt_samp / substeps
    samples = np.empty((n_samples + 1, 4))
    samples[0] = z0
    x, y, px, py = z0
    for k in range(1, half + 1):
        for _ in range(substeps):
            x, y, px, py = advance(x, y, px, py, h, p, cfg.scheme)
        samples[k] = (x, y, px, py)
    # the half-period point is the second brake point: its true momenta
    # vanish, the integrated leftovers are pure error, and zeroing them makes
    # R samples[k] == samples[N - k] hold at every index including the
    # self-paired midpoint (manifold code depends on that)
    samples[half, 2] = 0.0
    samples[half, 3] = 0.0
    for k in range(half + 1, n_samples + 1):
        samples[k] = reverse_momenta(samples[n_samples - k])
    times = np.arange(n_samples + 1) * dt_samp
    return samples, times, dt_samp, substeps


def _attach_tangent_data(orbit: PeriodicOrbit, cfg: IntegratorConfig,
                         mono_refine: int):
    """Tangent pass along the full period at refined substeps; fills
    monodromy, multipliers and the unit direction fields, with the stable
    field stored as the bitwise reflection of the unstable one."""
    p = orbit.params
    n = orbit.n_samples
    half = n // 2
    sub = orbit.substeps * max(1, int(mono_refine))
    h = orbit.sample_step / sub
    x, y, px, py = orbit.samples[0]
    m = np.eye(4)
    stms = [m.copy()]
    for _ in range(n):
        for _ in range(sub):
            x, y, px, py, m = advance_tangent(x, y, px, py, m, h, p, cfg.scheme)
        stms.append(m.copy())
    mono = stms[-1]

    vals, vecs = np.linalg.eig(mono)
    k_u = int(np.argmax(np.abs(vals)))
    lam_u = vals[k_u]
    if abs(lam_u.imag) > 1e-9 * abs(lam_u) or lam_u.real <= 1.0:
        raise NoConvergence("monodromy has no real expanding multiplier")
    v_u0 = np.real(vecs[:, k_u])
    v_u0 = v_u0 / np.linalg.norm(v_u0)
    lead = int(np.argmax(np.abs(v_u0) > 1e-12))
    if v_u0[lead] < 0.0:
        v_u0 = -v_u0
    v_s0 = reverse_momenta(v_u0)

    vu_half = np.empty((half + 1, 4))
    vs_half = np.empty((half + 1, 4))
    for k in range(half + 1):
        a = stms[k] @ v_u0
        vu_half[k] = a / np.linalg.norm(a)
        b = stms[k] @ v_s0
        vs_half[k] = b / np.linalg.norm(b)

    v_u = np.empty((n + 1, 4))
    v_s = np.empty((n + 1, 4))
    v_u[: half + 1] = vu_half
    v_s[: half + 1] = vs_half
    v_s[half] = reverse_momenta(vu_half[half])
    for k in range(half + 1, n + 1):
        v_u[k] = reverse_momenta(vs_half[n - k])
        v_s[k] = reverse_momenta(vu_half[n - k])

    order = np.argsort(-np.abs(vals))
    orbit.monodromy = mono
    orbit.multipliers = tuple(complex(v) for v in vals[order])
    orbit.v_u = v_u
    orbit.v_s = v_s


def find_brake_orbit(p: SystemParams, excess_energy: float,
                     saddle: str = "origin", **kwargs) -> PeriodicOrbit:
    """Convenience wrapper: pick the named saddle ("origin", "plus",
    "minus"), seed with initial_guess, and differentially correct at
    e = saddle energy + excess_energy."""
    if not math.isfinite(excess_energy) or excess_energy < 0.0:
        raise WrongRegime("excess energy must be nonnegative")
    eq = _pick_saddle(p, saddle)
    e = eq.energy + excess_energy
    guess = initial_guess(e, eq, p)
    return differential_correction(guess, e, p, saddle=eq, **kwargs)


def continue_in_energy(orbit: PeriodicOrbit, e_target: float, n_steps: int,
                       p: Optional[SystemParams] = None,
                       cfg: Optional[IntegratorConfig] = None,
                       **kwargs) -> ContinuationResult:
    """Natural-parameter continuation of a corrected orbit in total energy.

    The ladder is the uniform grid from the orbit's energy to e_target with
    n_steps new points (endpoint included); each converged orbit seeds the
    next. On failure the partial chain is returned with the failing ladder
    index in failure_index.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    p = orbit.params if p is None else p
    energies = np.linspace(orbit.energy, e_target, n_steps + 1)[1:]
    saddle = _nearest_saddle(p, orbit.saddle_state[:2])
    chain: List[PeriodicOrbit] = []
    prev = orbit
    for idx, e in enumerate(energies):
        guess = PhaseState(float(prev.samples[0][0]), float(prev.samples[0][1]),
                           0.0, 0.0)
        try:
            nxt = differential_correction(guess, float(e), p, cfg=cfg,
                                          saddle=saddle, **kwargs)
        except (NoConvergence, LostEnergy):
            return ContinuationResult(chain, failure_index=idx,
                                      energies=energies)
        chain.append(nxt)
        prev = nxt
    return ContinuationResult(chain, failure_index=None, energies=energies)


def analytic_upo_uncoupled(e: float, saddle: str, p: SystemParams,
                           n_samples: int = DEFAULT_SAMPLES) -> PeriodicOrbit:
    """Closed-form brake orbit for epsilon = 0, where the bath decouples.

    x is pinned at the saddle, y(t) = A sin(Omega t) with A = sqrt(2 dE /
    omega) and Omega = sqrt(omega / m_b), p_y = m_b A Omega cos(Omega t); the
    period is 2 pi / Omega and the monodromy is the hyperbolic x block over
    one period times the identity in (y, p_y). Serves as the independent
    check of the corrected orbits.
    """
    if p.epsilon != 0.0:
        raise WrongRegime("closed-form orbit requires epsilon = 0")
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be even and at least 2")
    eq = _pick_saddle(p, saddle)
    excess = e - eq.energy
    if not (excess >= 0.0):
        raise WrongRegime("closed-form orbit requires energy at or above "
                          "the saddle")
    x_s = eq.state.x
    c = p.alpha - 3.0 * p.beta * x_s * x_s  # -V_xx at the saddle, positive
    if c <= 0.0:
        raise WrongRegime("x direction is not hyperbolic at this point")
    nu = math.sqrt(c / p.m_s)
    omega_b = math.sqrt(p.omega / p.m_b)
    period = 2.0 * math.pi / omega_b
    amp = math.sqrt(2.0 * excess / p.omega)

    times = np.arange(n_samples + 1) * (period / n_samples)
    phase = omega_b * times
    samples = np.zeros((n_samples + 1, 4))
    samples[:, 0] = x_s
    samples[:, 1] = amp * np.sin(phase)
    samples[:, 3] = p.m_b * omega_b * amp * np.cos(phase)

    ch, sh = math.cosh(nu * period), math.sinh(nu * period)
    mono = np.eye(4)
    mono[0, 0] = ch
    mono[0, 2] = sh / (p.m_s * nu)
    mono[2, 0] = p.m_s * nu * sh
    mono[2, 2] = ch
    mults = (complex(math.exp(nu * period)), 1.0 + 0.0j, 1.0 + 0.0j,
             complex(math.exp(-nu * period)))

    # constant eigendirections of the autonomous x block
    vu = np.array([1.0, 0.0, p.m_s * nu, 0.0])
    vu /= np.linalg.norm(vu)
    vs = reverse_momenta(vu)
    v_u = np.tile(vu, (n_samples + 1, 1))
    v_s = np.tile(vs, (n_samples + 1, 1))

    return PeriodicOrbit(
        params=p, saddle_state=eq.state.as_array(), energy=e,
        excess_energy=excess, period=period, times=times, samples=samples,
        sample_step=period / n_samples, substeps=1, residual=0.0,
        iterations=0, scheme=Scheme.COMPOSED4,
        method="analytic" if excess > 0.0 else "degenerate",
        monodromy=mono, multipliers=mults, v_u=v_u, v_s=v_s,
    )


def _saddle_name(orbit: PeriodicOrbit) -> str:
    x_s = orbit.saddle_state[0]
    if x_s == 0.0:
        return "origin"
    return "plus" if x_s > 0.0 else "minus"


def resample(orbit: PeriodicOrbit, n_samples: int,
             cfg: Optional[IntegratorConfig] = None) -> PeriodicOrbit:
    """Same orbit on a finer (or coarser) uniform sample grid.

    Corrected orbits are re-integrated from their start point over the fixed
    period; analytic and degenerate orbits are rebuilt exactly. Direction
    fields are dropped (they live on the old grid); monodromy and multipliers
    carry over unchanged.
    """
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be even and at least 2")
    if orbit.method == "analytic":
        return analytic_upo_uncoupled(orbit.energy, _saddle_name(orbit),
                                      orbit.params, n_samples=n_samples)
    if cfg is None:
        cfg = IntegratorConfig(scheme=orbit.scheme, dt=1e-3, event_tol=1e-15)
    z0 = tuple(float(v) for v in orbit.samples[0])
    samples, times, dt_samp, substeps = _half_and_reflect(
        z0, orbit.period, n_samples, orbit.params, cfg)
    return replace(orbit, times=times, samples=samples, sample_step=dt_samp,
                   substeps=substeps, v_u=None, v_s=None)


def mirror_orbit(orbit: PeriodicOrbit) -> PeriodicOrbit:
    """The parity image of an orbit: every phase-space component negated.

    The potential is even, so the image is again a periodic orbit with the
    same period, energy, monodromy and multipliers; applying this twice
    returns the original arrays bitwise.
    """
    return PeriodicOrbit(
        params=orbit.params,
        saddle_state=-orbit.saddle_state,
        energy=orbit.energy,
        excess_energy=orbit.excess_energy,
        period=orbit.period,
        times=orbit.times.copy(),
        samples=-orbit.samples,
        sample_step=orbit.sample_step,
        substeps=orbit.substeps,
        residual=orbit.residual,
        iterations=orbit.iterations,
        scheme=orbit.scheme,
        method=orbit.method,
        monodromy=None if orbit.monodromy is None else orbit.monodromy.copy(),
        multipliers=orbit.multipliers,
        v_u=None if orbit.v_u is None else -orbit.v_u,
        v_s=None if orbit.v_s is None else -orbit.v_s,
    )
