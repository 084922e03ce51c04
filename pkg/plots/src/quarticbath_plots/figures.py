"""Figure builders over the documented CSV artifact schemas.

Every builder reads one CSV from the input directory, validates the columns
it needs, and draws one figure. Rendering is read-only and deterministic:
fixed figure geometry, fixed color assignments, a pinned SVG hash salt, and
no timestamps in the output metadata.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "quarticbath"

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

__all__ = ["ArtifactError", "FigureSpec", "FIGURES", "render"]


class ArtifactError(Exception):
    """An input artifact is missing or does not match its schema; the
    message always names the offending path."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_dir: str
    out_path: str
    dpi: int = 150


def _load_columns(path: str, required) -> dict:
    """Column name -> list of raw strings; loud on absence or shape."""
    if not os.path.exists(path):
        raise ArtifactError(f"missing artifact: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ArtifactError(f"empty artifact: {path}")
        missing = [c for c in required if c not in header]
        if missing:
            raise ArtifactError(
                f"artifact {path} lacks required columns {missing}; "
                f"found {header}")
        cols = {name: [] for name in header}
        for k, row in enumerate(reader):
            if len(row) != len(header):
                raise ArtifactError(
                    f"artifact {path} row {k + 2} has {len(row)} cells, "
                    f"expected {len(header)}")
            for name, cell in zip(header, row):
                cols[name].append(cell)
    return cols


def _floats(cols, name, path):
    try:
        return np.array([float(v) for v in cols[name]])
    except ValueError:
        raise ArtifactError(f"artifact {path}: column {name} "
                            "holds non-numeric cells")


_CASE_ORDER = ["I", "II", "III", "IV",
               "degenerate-line", "degenerate-non-hyperbolic"]
_CASE_COLORS = ["#4878cf", "#e9a13c", "#6acc65", "#d65f5f",
                "#956cb4", "#8c8c8c"]


def _fig_bifurcation(input_dir):
    path = os.path.join(input_dir, "grid.csv")
    cols = _load_columns(path, ["alpha", "beta", "case"])
    a = _floats(cols, "alpha", path)
    b = _floats(cols, "beta", path)
    alphas = np.unique(a)
    betas = np.unique(b)
    idx = np.full((len(alphas), len(betas)), -1, dtype=int)
    for av, bv, cv in zip(a, b, cols["case"]):
        if cv not in _CASE_ORDER:
            raise ArtifactError(f"artifact {path}: unknown case label {cv}")
        i = int(np.searchsorted(alphas, av))
        j = int(np.searchsorted(betas, bv))
        idx[i, j] = _CASE_ORDER.index(cv)
    if np.any(idx < 0):
        raise ArtifactError(f"artifact {path} does not cover a full "
                            "(alpha, beta) grid")
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    cmap = ListedColormap(_CASE_COLORS)
    ax.pcolormesh(betas, alphas, idx, cmap=cmap, vmin=-0.5,
                  vmax=len(_CASE_ORDER) - 0.5, shading="nearest")
    present = sorted(set(idx.ravel().tolist()))
    handles = [plt.Rectangle((0, 0), 1, 1, color=_CASE_COLORS[k])
               for k in present]
    ax.legend(handles, [_CASE_ORDER[k] for k in present], loc="upper left",
              fontsize=8, framealpha=0.9)
    ax.set_xlabel("beta")
    ax.set_ylabel("alpha")
    return fig


def _fig_contours(input_dir):
    path = os.path.join(input_dir, "contours.csv")
    cols = _load_columns(path, ["polyline_id", "x", "y"])
    pid = _floats(cols, "polyline_id", path).astype(int)
    x = _floats(cols, "x", path)
    y = _floats(cols, "y", path)
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    for k in np.unique(pid):
        m = pid == k
        ax.plot(x[m], y[m], lw=1.2, color="#2d5f8a")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    return fig


def _fig_poincare(input_dir):
    path = os.path.join(input_dir, "poincare.csv")
    cols = _load_columns(path, ["ic_index", "hit_index", "x", "p_x"])
    ic = _floats(cols, "ic_index", path)
    x = _floats(cols, "x", path)
    px = _floats(cols, "p_x", path)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    ax.scatter(x, px, s=2.0, c=ic, cmap="viridis", lw=0)
    ax.set_xlabel("x")
    ax.set_ylabel("p_x")
    return fig


def _fig_tubes(input_dir):
    path = os.path.join(input_dir, "tube.csv")
    cols = _load_columns(path, ["branch", "fiber_index", "t", "x", "y",
                                "p_x", "p_y"])
    fib = _floats(cols, "fiber_index", path).astype(int)
    x = _floats(cols, "x", path)
    y = _floats(cols, "y", path)
    px = _floats(cols, "p_x", path)
    branches = cols["branch"]
    fig = plt.figure(figsize=(5.6, 4.6))
    ax = fig.add_subplot(projection="3d")
    fibers = np.unique(fib)
    stride = max(1, int(math.ceil(len(fibers) / 64)))
    for k in fibers[::stride]:
        m = fib == k
        color = "#b3443c" if branches[int(np.nonzero(m)[0][0])].startswith(
            "unstable") else "#3c6fb3"
        ax.plot(x[m], y[m], px[m], lw=0.6, alpha=0.6, color=color)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("p_x")
    return fig


def _fig_gaptime(input_dir):
    path = os.path.join(input_dir, "gap.csv")
    cols = _load_columns(path, ["ic_index", "gap_time", "exit"])
    raw = cols["gap_time"]
    gaps = []
    for k, v in enumerate(raw):
        if v == "":
            continue
        try:
            gaps.append(float(v))
        except ValueError:
            raise ArtifactError(f"artifact {path} row {k + 2}: gap_time "
                                f"cell {v!r} is neither empty nor a number")
    gaps = np.array(gaps)
    n_open = sum(1 for v in raw if v == "")
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    hi = float(np.max(gaps)) * 1.02 if len(gaps) else 1.0
    ax.hist(gaps, bins=60, range=(0.0, hi), color="#4878cf")
    ax.set_xlabel("gap time")
    ax.set_ylabel("count")
    ax.text(0.98, 0.95, f"n = {len(raw)}, open = {n_open}",
            transform=ax.transAxes, ha="right", va="top", fontsize=8)
    return fig


def _fig_flux(input_dir):
    path = os.path.join(input_dir, "flux.csv")
    cols = _load_columns(path, ["delta_E", "epsilon", "Q", "method"])
    de = _floats(cols, "delta_E", path)
    eps = _floats(cols, "epsilon", path)
    q = _floats(cols, "Q", path)
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for e in np.unique(eps):
        m = eps == e
        order = np.argsort(de[m])
        ax.plot(de[m][order], q[m][order], marker="o", ms=3.5, lw=1.2,
                label=f"epsilon = {e:g}")
    ax.set_xlabel("ΔE")
    ax.set_ylabel("Q")
    ax.legend(fontsize=8)
    return fig


FIGURES = {
    "bifurcation": ("grid.csv", _fig_bifurcation),
    "contours": ("contours.csv", _fig_contours),
    "poincare": ("poincare.csv", _fig_poincare),
    "tubes": ("tube.csv", _fig_tubes),
    "gaptime": ("gap.csv", _fig_gaptime),
    "flux": ("flux.csv", _fig_flux),
}


def render(spec: FigureSpec) -> str:
    """Draw one figure and write it to spec.out_path; returns the path."""
    if spec.figure_id not in FIGURES:
        raise ArtifactError(f"unknown figure id {spec.figure_id!r}; "
                            f"known: {sorted(FIGURES)}")
    ext = os.path.splitext(spec.out_path)[1].lower()
    if ext not in (".png", ".svg"):
        raise ArtifactError(f"output {spec.out_path} must end in "
                            ".png or .svg")
    _, builder = FIGURES[spec.figure_id]
    fig = builder(spec.input_dir)
    try:
        if ext == ".svg":
            fig.savefig(spec.out_path, format="svg",
                        metadata={"Date": None})
        else:
            fig.savefig(spec.out_path, format="png", dpi=spec.dpi)
    finally:
        plt.close(fig)
    return spec.out_path
