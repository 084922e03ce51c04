"""Model definition: a quartic bistable mode bilinearly coupled to one harmonic bath mode.

The Hamiltonian is

    H = p_x^2/(2 m_s) + p_y^2/(2 m_b)
        - (alpha/2) x^2 + (beta/4) x^4 + (omega/2) y^2 + (epsilon/2) (x - y)^2

with x the reactive coordinate and y the bath coordinate. Everything in this
module is closed-form: potential/energy evaluation, the vector field and its
Jacobian, equilibria, linear stability, the bifurcation case map, and
equipotential contour extraction.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "PhaseState",
    "Stability",
    "BifurcationCase",
    "EquilibriumPoint",
    "BifurcationGrid",
    "DegenerateParameters",
    "NoSuchEquilibrium",
    "EmptyContour",
    "potential_energy",
    "total_energy",
    "kinetic_energy",
    "vector_field",
    "jacobian",
    "critical_alpha",
    "origin_eigenvalue_formula",
    "well_eigenvalue_formula",
    "eigenvalues_at_origin",
    "eigenvalues_at_wells",
    "find_equilibria",
    "classify",
    "bifurcation_grid",
    "equipotential_contour",
]


class DegenerateParameters(Exception):
    """alpha sits on the critical line with beta = 0: a line of equilibria.

    Carries a `marker` EquilibriumPoint for the origin, tagged
    LINE_OF_EQUILIBRIA, so callers that prefer a value over an exception can
    recover one.
    """

    def __init__(self, message, marker=None):
        super().__init__(message)
        self.marker = marker


class NoSuchEquilibrium(Exception):
    """The off-centre equilibria do not exist at these parameters."""


class EmptyContour(Exception):
    """An equipotential level does not intersect the requested window."""


@dataclass(frozen=True)
class SystemParams:
    """Model constants. omega is the bath stiffness (frequency^2 at unit mass)."""

    alpha: float
    beta: float
    omega: float
    epsilon: float
    m_s: float = 1.0
    m_b: float = 1.0

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.omega, self.epsilon, self.m_s, self.m_b)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise ValueError("all parameters must be finite numbers")
        if self.m_s <= 0.0 or self.m_b <= 0.0:
            raise ValueError("masses must be positive")
        if self.omega <= 0.0:
            raise ValueError("bath stiffness omega must be positive")
        if self.epsilon < 0.0:
            raise ValueError("coupling epsilon must be nonnegative")


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    p_x: float
    p_y: float

    def __post_init__(self):
        for v in (self.x, self.y, self.p_x, self.p_y):
            if not math.isfinite(v):
                raise ValueError("phase-space coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.p_x, self.p_y], dtype=float)

    @classmethod
    def from_array(cls, a) -> "PhaseState":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


class Stability(enum.Enum):
    CENTRE_CENTRE = "centre-centre"
    SADDLE_CENTRE = "saddle-centre"
    NON_HYPERBOLIC = "non-hyperbolic"
    LINE_OF_EQUILIBRIA = "line-of-equilibria"


class BifurcationCase(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    DEGENERATE_LINE = "degenerate-line"
    DEGENERATE_NON_HYPERBOLIC = "degenerate-non-hyperbolic"


@dataclass(frozen=True)
class EquilibriumPoint:
    state: PhaseState
    eigenvalues: tuple
    stability: Stability
    energy: float


def _split_state(state):
    if isinstance(state, PhaseState):
        return state.x, state.y, state.p_x, state.p_y
    a = np.asarray(state, dtype=float)
    return a[..., 0], a[..., 1], a[..., 2], a[..., 3]


def potential_energy(q, p: SystemParams):
    """V(x, y); q is an (x, y) pair of scalars or broadcastable arrays."""
    x, y = q
    return (
        -0.5 * p.alpha * x * x
        + 0.25 * p.beta * x ** 4
        + 0.5 * p.omega * y * y
        + 0.5 * p.epsilon * (x - y) ** 2
    )


def kinetic_energy(state, p: SystemParams):
    _, _, px, py = _split_state(state)
    return px * px / (2.0 * p.m_s) + py * py / (2.0 * p.m_b)


def total_energy(state, p: SystemParams):
    """H at a PhaseState or an array whose trailing axis is (x, y, p_x, p_y)."""
    x, y, px, py = _split_state(state)
    return (
        px * px / (2.0 * p.m_s)
        + py * py / (2.0 * p.m_b)
        + potential_energy((x, y), p)
    )


def vector_field(state, p: SystemParams):
    """Hamiltonian vector field (xdot, ydot, pxdot, pydot), same shape as the input."""
    x, y, px, py = _split_state(state)
    fx = p.alpha * x - p.beta * x ** 3 + p.epsilon * (y - x)
    fy = -p.omega * y + p.epsilon * (x - y)
    return np.stack(np.broadcast_arrays(px / p.m_s, py / p.m_b, fx, fy), axis=-1)


def jacobian(state, p: SystemParams) -> np.ndarray:
    """4x4 derivative of the vector field at a state (depends on x only)."""
    x, _, _, _ = _split_state(state)
    x = float(x)
    return np.array(
        [
            [0.0, 0.0, 1.0 / p.m_s, 0.0],
            [0.0, 0.0, 0.0, 1.0 / p.m_b],
            [p.alpha - p.epsilon - 3.0 * p.beta * x * x, p.epsilon, 0.0, 0.0],
            [p.epsilon, -p.omega - p.epsilon, 0.0, 0.0],
        ]
    )


def critical_alpha(p: SystemParams) -> float:
    """Coupling-shifted pitchfork threshold omega*eps/(omega + eps)."""
    return p.omega * p.epsilon / (p.omega + p.epsilon)


def _zero_scale(p: SystemParams) -> float:
    # shared "is this eigenvalue zero" threshold
    return 1e-9 * (1.0 + abs(p.alpha) + p.omega + p.epsilon)


def origin_eigenvalue_formula(alpha: float, omega: float, epsilon: float):
    """(lambda1, lambda2) at the origin, unit masses; lambda1 is the plus root."""
    s = alpha - omega - 2.0 * epsilon
    r = math.sqrt((omega + alpha) ** 2 + 4.0 * epsilon ** 2)
    return 0.5 * (s + r), 0.5 * (s - r)


def well_eigenvalue_formula(alpha: float, omega: float, epsilon: float):
    """(lambda3, lambda4) at the off-centre points, unit masses; lambda3 is the plus root.

    The expression is defined for all alpha (not only where the points exist),
    which is what lets the sign change at the critical coupling be localized
    by bisection.
    """
    crit = omega * epsilon / (omega + epsilon)
    s = -2.0 * alpha - omega - 2.0 * epsilon + 3.0 * crit
    r = math.sqrt((2.0 * alpha - (omega + 3.0 * crit)) ** 2 + 4.0 * epsilon ** 2)
    return 0.5 * (s + r), 0.5 * (s - r)


def eigenvalues_at_origin(p: SystemParams):
    """Closed-form (lambda1, lambda2); the Jacobian spectrum at the origin is
    +-sqrt(lambda1), +-i*sqrt(-lambda2) when both masses are 1."""
    return origin_eigenvalue_formula(p.alpha, p.omega, p.epsilon)


def eigenvalues_at_wells(p: SystemParams):
    """Closed-form (lambda3, lambda4) at +-x2e; the unit-mass Jacobian spectrum
    there is +-sqrt(lambda3), +-i*sqrt(-lambda4). Raises NoSuchEquilibrium if
    the off-centre points do not exist."""
    _well_x(p)
    return well_eigenvalue_formula(p.alpha, p.omega, p.epsilon)


def _well_x(p: SystemParams) -> float:
    d = p.alpha - critical_alpha(p)
    if p.beta == 0.0 or d / p.beta <= 0.0:
        raise NoSuchEquilibrium("off-centre equilibria need (alpha - critical)/beta > 0")
    return math.sqrt(d / p.beta)


def _stability_from_spectrum(eigs: np.ndarray, p: SystemParams) -> Stability:
    thr = _zero_scale(p)
    if np.any(np.abs(eigs) < thr):
        return Stability.NON_HYPERBOLIC
    if np.any(eigs.real > thr):
        return Stability.SADDLE_CENTRE
    return Stability.CENTRE_CENTRE


def _sorted_eigs(m: np.ndarray) -> tuple:
    e = np.linalg.eigvals(m)
    order = np.lexsort((e.imag, e.real))
    return tuple(complex(v) for v in e[order])


def find_equilibria(p: SystemParams):
    """All equilibria as [origin, +x2e, -x2e] (the last two only when they exist).

    The off-centre points sit at x2e = sqrt((alpha - crit)/beta),
    y2e = x2e * eps/(omega + eps) and carry energy -(alpha - crit)^2/(4 beta);
    -x2e is the exact negation of +x2e. Eigenvalues are the numerically
    computed Jacobian spectrum (valid for any masses).
    """
    crit = critical_alpha(p)
    d = p.alpha - crit
    thr = _zero_scale(p)
    if abs(d) < thr and p.beta == 0.0:
        origin = PhaseState(0.0, 0.0, 0.0, 0.0)
        eigs = _sorted_eigs(jacobian(origin, p))
        raise DegenerateParameters(
            "alpha equals the critical coupling with beta = 0: a whole line of "
            "equilibria passes through the origin",
            marker=EquilibriumPoint(origin, eigs, Stability.LINE_OF_EQUILIBRIA, 0.0),
        )

    out = []
    origin_state = PhaseState(0.0, 0.0, 0.0, 0.0)
    origin_eigs = np.asarray(_sorted_eigs(jacobian(origin_state, p)))
    out.append(
        EquilibriumPoint(
            state=origin_state,
            eigenvalues=tuple(origin_eigs),
            stability=_stability_from_spectrum(origin_eigs, p),
            energy=0.0,
        )
    )

    if p.beta != 0.0 and d / p.beta > 0.0:
        xe = math.sqrt(d / p.beta)
        ye = xe * p.epsilon / (p.omega + p.epsilon)
        energy = -d * d / (4.0 * p.beta)
        plus = PhaseState(xe, ye, 0.0, 0.0)
        minus = PhaseState(-xe, -ye, 0.0, 0.0)
        eigs = np.asarray(_sorted_eigs(jacobian(plus, p)))
        stab = _stability_from_spectrum(eigs, p)
        out.append(EquilibriumPoint(plus, tuple(eigs), stab, energy))
        out.append(EquilibriumPoint(minus, tuple(eigs), stab, energy))
    return out


def classify(p: SystemParams) -> BifurcationCase:
    """Bifurcation case of the parameter point.

    I: below critical, beta >= 0 (single centre-centre point);
    II: above critical, beta > 0 (saddle between two centres);
    III: below critical, beta < 0 (centre between two saddles);
    IV: above critical, beta <= 0 (single saddle-centre point);
    plus the two degenerate alpha = critical cases.
    """
    d = p.alpha - critical_alpha(p)
    if abs(d) < _zero_scale(p):
        return (
            BifurcationCase.DEGENERATE_LINE
            if p.beta == 0.0
            else BifurcationCase.DEGENERATE_NON_HYPERBOLIC
        )
    if d > 0.0:
        return BifurcationCase.II if p.beta > 0.0 else BifurcationCase.IV
    return BifurcationCase.III if p.beta < 0.0 else BifurcationCase.I


@dataclass(frozen=True)
class BifurcationGrid:
    alphas: np.ndarray
    betas: np.ndarray
    cases: np.ndarray  # object array, shape (n_alpha, n_beta)
    critical_alpha: float


def bifurcation_grid(alpha_range, beta_range, n_alpha: int, n_beta: int, p: SystemParams) -> BifurcationGrid:
    """Classify every point of a rectangular (alpha, beta) grid at fixed omega, eps."""
    if n_alpha < 1 or n_beta < 1:
        raise ValueError("grid needs at least one point per axis")
    alphas = np.linspace(alpha_range[0], alpha_range[1], n_alpha)
    betas = np.linspace(beta_range[0], beta_range[1], n_beta)
    cases = np.empty((n_alpha, n_beta), dtype=object)
    for i, a in enumerate(alphas):
        for j, b in enumerate(betas):
            q = SystemParams(float(a), float(b), p.omega, p.epsilon, p.m_s, p.m_b)
            cases[i, j] = classify(q)
    return BifurcationGrid(alphas, betas, cases, critical_alpha(p))


# ---------------------------------------------------------------------------
# Equipotential contours: marching squares over a dense grid. Vertices are
# found by linear interpolation on cell edges and then polished by bisection
# along the edge so that |V - level| < 1e-3 * max(1, |level|) always holds.

_CONTOUR_RTOL = 1e-3

_SEG_TABLE = {
    # case index from corner signs (bit0 = (i,j), bit1 = (i+1,j),
    # bit2 = (i+1,j+1), bit3 = (i,j+1)), bit set when f > 0; entries are
    # (edge_a, edge_b) pairs with edges 0 bottom, 1 right, 2 top, 3 left
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(0, 2)],
    11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(3, 0)],
}


def equipotential_contour(level: float, window, resolution: int, p: SystemParams):
    """Polylines of V(x, y) = level inside a window ((xmin, xmax), (ymin, ymax)).

    Returns a list of (k, 2) float arrays. A polyline is closed when its first
    and last vertices are identical; open polylines end at the window boundary.
    Raises EmptyContour when the level never crosses inside the window, and
    ValueError for resolution < 16.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    (xmin, xmax), (ymin, ymax) = window
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("window must have positive extent")
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    f = np.asarray(potential_energy((gx, gy), p) - level)
    pos = f > 0.0
    tol = _CONTOUR_RTOL * max(1.0, abs(level))

    # edge ids: ("x", i, j) joins grid nodes (i, j)-(i+1, j);
    #           ("y", i, j) joins (i, j)-(i, j+1)
    def edge_nodes(eid):
        kind, i, j = eid
        return ((i, j), (i + 1, j)) if kind == "x" else ((i, j), (i, j + 1))

    cut_cache = {}

    def cut(eid):
        if eid in cut_cache:
            return cut_cache[eid]
        (ia, ja), (ib, jb) = edge_nodes(eid)
        a = np.array([xs[ia], ys[ja]])
        b = np.array([xs[ib], ys[jb]])
        fa, fb = f[ia, ja], f[ib, jb]
        t = fa / (fa - fb)
        pt = a + t * (b - a)
        val = float(potential_energy((pt[0], pt[1]), p)) - level
        lo, hi, flo = a, b, fa
        for _ in range(80):
            if abs(val) <= 0.25 * tol:
                break
            if (val > 0.0) == (flo > 0.0):
                lo, flo = pt, val
            else:
                hi = pt
            pt = 0.5 * (lo + hi)
            val = float(potential_energy((pt[0], pt[1]), p)) - level
        cut_cache[eid] = pt
        return pt

    def cell_edge_id(i, j, e):
        if e == 0:
            return ("x", i, j)
        if e == 1:
            return ("y", i + 1, j)
        if e == 2:
            return ("x", i, j + 1)
        return ("y", i, j)

    segments = []  # (edge_id_a, edge_id_b)
    for i in range(resolution - 1):
        for j in range(resolution - 1):
            idx = (
                (1 if pos[i, j] else 0)
                | (2 if pos[i + 1, j] else 0)
                | (4 if pos[i + 1, j + 1] else 0)
                | (8 if pos[i, j + 1] else 0)
            )
            if idx in (0, 15):
                continue
            if idx in (5, 10):
                # ambiguous saddle cell: connectivity decided by the midpoint sign
                xm = 0.5 * (xs[i] + xs[i + 1])
                ym = 0.5 * (ys[j] + ys[j + 1])
                mid_pos = (float(potential_energy((xm, ym), p)) - level) > 0.0
                if idx == 5:  # plus at (i,j) and (i+1,j+1)
                    pairs = [(0, 1), (2, 3)] if mid_pos else [(3, 0), (1, 2)]
                else:  # plus at (i+1,j) and (i,j+1)
                    pairs = [(3, 0), (1, 2)] if mid_pos else [(0, 1), (2, 3)]
            else:
                pairs = _SEG_TABLE[idx]
            for ea, eb in pairs:
                segments.append((cell_edge_id(i, j, ea), cell_edge_id(i, j, eb)))

    if not segments:
        raise EmptyContour(f"level {level} does not intersect the window")

    adj = defaultdict(list)
    for k, (ea, eb) in enumerate(segments):
        adj[ea].append(k)
        adj[eb].append(k)

    used = [False] * len(segments)

    def walk(k0, start_edge):
        # follow segments from start_edge through k0 until a dead end or loop
        chain = [start_edge]
        k, edge = k0, start_edge
        while True:
            used[k] = True
            ea, eb = segments[k]
            far = eb if edge == ea else ea
            chain.append(far)
            nxt = [m for m in adj[far] if not used[m]]
            if not nxt:
                return chain
            edge, k = far, nxt[0]

    polylines = []
    # open chains first (their tips touch edges used only once) ...
    for eid, ks in adj.items():
        if len(ks) == 1 and not used[ks[0]]:
            polylines.append(walk(ks[0], eid))
    # ... then whatever remains are closed loops
    for k in range(len(segments)):
        if not used[k]:
            polylines.append(walk(k, segments[k][0]))

    out = []
    for chain in polylines:
        pts = np.array([cut(eid) for eid in chain])
        out.append(pts)
    return out
