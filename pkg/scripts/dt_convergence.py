#!/usr/bin/env python3
"""Step-size study for the two splitting schemes.

For a dividing-surface trajectory at moderate coupling, measures the energy
drift over t = 50 and the one-period return error of the corrected orbit as
dt halves. Expected orders: drift bounded and return error ~ dt^2 for the
two-stage scheme, ~ dt^4 for the composed one.
"""

import math

import numpy as np

from quarticbath.model import SystemParams, total_energy
from quarticbath.integrate import IntegratorConfig, Scheme, integrate
from quarticbath.upo import find_brake_orbit

P = SystemParams(1.0, 1.0, 1.0, 0.5)
DTS = (4e-3, 2e-3, 1e-3, 5e-4)


def drift(state, dt, scheme):
    cfg = IntegratorConfig(dt=dt, scheme=scheme)
    traj = integrate(np.asarray(state, dtype=float), 50.0, P, cfg,
                     record_every=50)
    hs = np.asarray(total_energy(traj.states, P))
    return float(np.max(np.abs(hs - hs[0])))


def return_error(orbit, dt, scheme):
    cfg = IntegratorConfig(dt=dt, scheme=scheme)
    end = integrate(orbit.samples[0], orbit.period, P, cfg).states[-1]
    return float(np.max(np.abs(end - orbit.samples[0])))


def main():
    orbit = find_brake_orbit(P, 0.05, with_monodromy=False)
    z0 = orbit.samples[orbit.n_samples // 4]

    print(f"{'dt':>8s}  {'drift lf2':>12s} {'drift c4':>12s}"
          f"  {'return lf2':>12s} {'return c4':>12s}")
    prev = None
    rows = []
    for dt in DTS:
        row = (drift(z0, dt, Scheme.LEAPFROG2),
               drift(z0, dt, Scheme.COMPOSED4),
               return_error(orbit, dt, Scheme.LEAPFROG2),
               return_error(orbit, dt, Scheme.COMPOSED4))
        rows.append(row)
        line = f"{dt:8.0e}  " + " ".join(f"{v:12.3e}" for v in row)
        if prev is not None:
            orders = [math.log2(a / b) if b > 0 else float("nan")
                      for a, b in zip(prev, row)]
            line += "   orders: " + " ".join(f"{o:4.1f}" for o in orders)
        print(line)
        prev = row


if __name__ == "__main__":
    main()
