"""Dividing-surface sampling on the energy shell over a periodic orbit.

The surface is built over the configuration-space projection of an orbit:
pick one of its sample configurations, then close the energy with momenta.
p_x is uniform over the energetically allowed interval and the p_y sign is a
fair coin, which is the standard microcanonical parametrization of the two
hemispheres; forward crossings are p_x < 0, backward crossings p_x > 0.

Each surface point consumes a fixed block of four uniforms from its own
(seed, index) substream: orbit sample index, |p_x| magnitude, p_x sign,
p_y sign. A requested orientation overrides the p_x sign draw instead of
consuming different randomness, so the Forward and Backward ensembles at a
given seed partition the Both ensemble point for point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import SystemParams, potential_energy
from .upo import PeriodicOrbit, WrongRegime, analytic_upo_uncoupled, _pick_saddle
from .sampling import substream

__all__ = [
    "Orientation",
    "DividingSurface",
    "EnergeticallyForbidden",
    "sample_ds",
    "analytic_ds_uncoupled",
]

# |p_x| below this is redrawn: the surface is parametrized by crossing
# direction, so points lying in the section p_x = 0 are excluded
_PX_FLOOR = 1e-14

# slack for "configuration below the energy level" checks
_ENERGY_RTOL = 1e-10


class EnergeticallyForbidden(Exception):
    """Some orbit configuration lies above the requested energy level."""


class Orientation(enum.Enum):
    FORWARD = "forward"    # p_x < 0
    BACKWARD = "backward"  # p_x > 0
    BOTH = "both"


@dataclass
class DividingSurface:
    """Sampled surface points plus the provenance needed to reuse them.

    states has shape (n, 4); every row satisfies H = energy to roundoff.
    saddle_x anchors exit-boundary geometry downstream (which saddle the
    surface sits over).
    """

    states: np.ndarray
    energy: float
    excess_energy: float
    orientation: Orientation
    seed: int
    params: SystemParams
    orbit_period: float
    orbit_method: str
    saddle_x: float = 0.0

    @property
    def n(self) -> int:
        return self.states.shape[0]


def sample_ds(orbit: PeriodicOrbit, n: int, seed: int,
              orientation: Orientation = Orientation.BOTH,
              p: Optional[SystemParams] = None) -> DividingSurface:
    """Draw n points of the dividing surface attached to a periodic orbit.

    For each index an orbit sample configuration (x, y) is chosen uniformly,
    p_x is uniform on the allowed interval [-p_max, p_max] with
    p_max = sqrt(2 m_s (e - V)), and p_y = +-sqrt(2 m_b (e - V) - (m_b/m_s)
    p_x^2) with a fair sign coin, so H = e holds by construction. At zero
    excess energy the surface degenerates to n copies of the brake point.
    Raises EnergeticallyForbidden if any orbit configuration sits above e.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = orbit.params if p is None else p
    e = orbit.energy

    if math.sqrt(2.0 * p.m_s * max(orbit.excess_energy, 0.0)) < 1e-13:
        states = np.tile(orbit.samples[0], (n, 1))
        states[:, 2] = 0.0
        states[:, 3] = 0.0
        return DividingSurface(states, e, orbit.excess_energy, orientation,
                               seed, p, orbit.period, orbit.method,
                               saddle_x=float(orbit.saddle_state[0]))

    n_conf = orbit.n_samples  # samples[n_conf] duplicates samples[0]
    confs = orbit.samples[:n_conf, :2]
    avail = e - np.asarray(potential_energy((confs[:, 0], confs[:, 1]), p))
    if np.any(avail < -_ENERGY_RTOL * max(1.0, abs(e))):
        raise EnergeticallyForbidden(
            "orbit configurations reach above the requested energy level")
    avail = np.maximum(avail, 0.0)
    px_max = np.sqrt(2.0 * p.m_s * avail)

    # brake points touch the zero-velocity curve, so their momentum interval
    # is empty to roundoff; draw the configuration among the usable samples
    usable = np.nonzero(px_max > 2.0 * _PX_FLOOR)[0]
    if usable.size == 0:
        raise EnergeticallyForbidden(
            "no orbit configuration leaves room for a momentum draw")

    states = np.empty((n, 4))
    for i in range(n):
        rng = substream(seed, i)
        u = rng.uniform(size=4)
        j = int(usable[min(int(u[0] * usable.size), usable.size - 1)])
        pm = px_max[j]
        mag = u[1] * pm
        for _ in range(64):
            if mag > _PX_FLOOR:
                break
            mag = rng.uniform() * pm
        else:
            raise EnergeticallyForbidden(
                "allowed momentum interval is numerically empty on the orbit")
        if orientation is Orientation.FORWARD:
            px = -mag
        elif orientation is Orientation.BACKWARD:
            px = mag
        else:
            px = -mag if u[2] < 0.5 else mag
        rest = max(avail[j] - px * px / (2.0 * p.m_s), 0.0)
        py = math.sqrt(2.0 * p.m_b * rest)
        if u[3] < 0.5:
            py = -py
        states[i] = (confs[j, 0], confs[j, 1], px, py)
    return DividingSurface(states, e, orbit.excess_energy, orientation,
                           seed, p, orbit.period, orbit.method,
                           saddle_x=float(orbit.saddle_state[0]))


def analytic_ds_uncoupled(e: float, saddle: str, n: int, seed: int,
                          orientation: Orientation = Orientation.BOTH,
                          p: Optional[SystemParams] = None,
                          n_samples: int = 512) -> DividingSurface:
    """Dividing surface over the closed-form uncoupled orbit.

    Requires epsilon = 0 and e at or above the saddle energy (WrongRegime
    otherwise); exactly at the saddle energy the surface is n copies of the
    saddle point.
    """
    if p is None:
        raise ValueError("p is required")
    if p.epsilon != 0.0:
        raise WrongRegime("closed-form surface requires epsilon = 0")
    eq = _pick_saddle(p, saddle)
    excess = e - eq.energy
    if excess < 0.0:
        raise WrongRegime("energy below the saddle energy")
    if excess == 0.0:
        states = np.tile(eq.state.as_array(), (n, 1))
        return DividingSurface(states, e, 0.0, orientation, seed, p,
                               2.0 * math.pi * math.sqrt(p.m_b / p.omega),
                               "analytic", saddle_x=float(eq.state.x))
    orbit = analytic_upo_uncoupled(e, saddle, p, n_samples=n_samples)
    return sample_ds(orbit, n, seed, orientation=orientation, p=p)
