"""Grid-density clustering with annealed stochastic hill climbing in the plane.

The data is projected to 2-D, bucketed into a g-by-g grid of sample counts,
and m oscillator centers climb that density landscape: each round draws
Gaussian probe points around the center and jumps to the densest probed cell
if it is at least as dense as the current one. A round whose best probe is
strictly worse halves the Gaussian spread instead of moving; ties move
freely (plateau walks), but after tie_budget consecutive tie rounds the
spread is halved anyway so total work stays bounded even on flat landscapes.
A center is converged once its spread is below one cell width on both axes.
Converged centers that land in the same cell are merged, so the number of
distinct cells is the discovered cluster count; no target count is supplied
up front.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, DataError, DegenerateProjectionError

EPS_FLAT = 1e-9
DEFAULT_PROBES = 32
DEFAULT_TIE_BUDGET = 64


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    bounds: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax

    def __post_init__(self):
        if self.resolution < 1:
            raise ConfigError(f"grid resolution must be >= 1, got {self.resolution}")
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ConfigError(f"degenerate grid bounds {self.bounds}")

    @property
    def cell_widths(self) -> tuple[float, float]:
        xmin, xmax, ymin, ymax = self.bounds
        return (xmax - xmin) / self.resolution, (ymax - ymin) / self.resolution


@dataclass(frozen=True)
class DensityGrid:
    spec: GridSpec
    counts: np.ndarray  # (g, g) ints, [ix, iy]

    def cell_of(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        g = self.spec.resolution
        xmin, xmax, ymin, ymax = self.spec.bounds
        ix = np.clip(np.floor(g * (np.asarray(x) - xmin) / (xmax - xmin)).astype(np.int64), 0, g - 1)
        iy = np.clip(np.floor(g * (np.asarray(y) - ymin) / (ymax - ymin)).astype(np.int64), 0, g - 1)
        return ix, iy

    def density_at(self, x, y) -> np.ndarray:
        ix, iy = self.cell_of(x, y)
        return self.counts[ix, iy]

    def density_at_point(self, point) -> int:
        return int(self.density_at(point[0], point[1]))


@dataclass
class OscillatorState:
    center: np.ndarray  # (2,)
    sigma: np.ndarray   # (2,) per-axis Gaussian spread
    converged: bool = False


@dataclass(frozen=True)
class ClusterResult:
    centers: np.ndarray     # (count, 2) in the projected plane
    assignment: np.ndarray  # (N,) cluster index per sample
    count: int


def project_2d(ds: Dataset) -> np.ndarray:
    """Map samples to 2-D: pass/pad for d <= 2, top-2 principal components otherwise.

    Component signs are fixed so the first nonzero loading of each component
    is positive, making the projection deterministic.
    """
    X = ds.features
    if ds.d == 1:
        return np.column_stack([X[:, 0], np.zeros(ds.n)])
    if ds.d == 2:
        return X.copy()
    centered = X - X.mean(axis=0)
    if not np.any(centered):
        raise DegenerateProjectionError("all samples identical; no principal directions")
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    for k in range(2):
        for v in components[k]:
            if v != 0.0:
                if v < 0.0:
                    components[k] = -components[k]
                break
    return centered @ components.T


def build_grid(points, g: int) -> DensityGrid:
    """Bucket 2-D points into a g-by-g count grid over their tight bounding box.

    Flat axes are widened by a tiny epsilon; points on the max edge are
    clamped into the last cell.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise DataError(f"expected (n, 2) points, got shape {pts.shape}")
    if g < 1:
        raise ConfigError(f"grid resolution must be >= 1, got {g}")
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    if xmax - xmin <= 0:
        xmin, xmax = xmin - EPS_FLAT, xmax + EPS_FLAT
    if ymax - ymin <= 0:
        ymin, ymax = ymin - EPS_FLAT, ymax + EPS_FLAT
    spec = GridSpec(resolution=g, bounds=(float(xmin), float(xmax), float(ymin), float(ymax)))
    counts = np.zeros((g, g), dtype=np.int64)
    grid = DensityGrid(spec=spec, counts=counts)
    ix, iy = grid.cell_of(pts[:, 0], pts[:, 1])
    np.add.at(counts, (ix, iy), 1)
    counts.flags.writeable = False
    return grid


def gaussian_probe(grid: DensityGrid, state: OscillatorState, probes: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw probe points around the oscillator center and return the densest one.

    probes x-coordinates are drawn first, then probes y-coordinates, each
    clamped to the grid bounds and paired by draw order. Density ties go to
    the probe closest to the current center, then to the earlier draw.
    """
    if probes < 1:
        raise ConfigError(f"probes must be >= 1, got {probes}")
    xmin, xmax, ymin, ymax = grid.spec.bounds
    xs = np.clip(rng.normal(state.center[0], state.sigma[0], probes), xmin, xmax)
    ys = np.clip(rng.normal(state.center[1], state.sigma[1], probes), ymin, ymax)
    dens = grid.density_at(xs, ys)
    d2 = (xs - state.center[0]) ** 2 + (ys - state.center[1]) ** 2
    best = min(range(probes), key=lambda i: (-dens[i], d2[i], i))
    return np.array([xs[best], ys[best]])


def _climb(grid: DensityGrid, start: np.ndarray, probes: int,
           rng: np.random.Generator, descend: bool,
           tie_budget: int) -> tuple[np.ndarray, list[int]]:
    xmin, xmax, ymin, ymax = grid.spec.bounds
    cw = np.array(grid.spec.cell_widths)
    center = start.astype(np.float64).copy()
    sigma = np.array([(xmax - xmin) / 4.0, (ymax - ymin) / 4.0])
    trace = [grid.density_at_point(center)]
    ties = 0
    while sigma[0] >= cw[0] or sigma[1] >= cw[1]:
        state = OscillatorState(center=center, sigma=sigma)
        cand = gaussian_probe(grid, state, probes, rng)
        a0 = grid.density_at_point(center)
        a1 = grid.density_at_point(cand)
        better = a1 < a0 if descend else a1 > a0
        if better:
            center = cand
            trace.append(a1)
            ties = 0
        elif a1 == a0:
            center = cand
            trace.append(a1)
            ties += 1
            if ties >= tie_budget:
                sigma = sigma / 2.0
                ties = 0
        else:
            sigma = sigma / 2.0
            ties = 0
    return center, trace


def qho_cluster(
    ds: Dataset,
    g: Optional[int] = None,
    m: Optional[int] = None,
    probes: int = DEFAULT_PROBES,
    seed: int = 0,
    *,
    tie_budget: int = DEFAULT_TIE_BUDGET,
    descend: bool = False,
    return_trace: bool = False,
):
    """Cluster a dataset by oscillator hill climbing on its 2-D grid density.

    g defaults to max(2, ceil(sqrt(N))) and m to min(20, N). The descend flag
    flips the move test to seek density minima; it exists only for comparing
    against the inverted acceptance rule and is not useful for clustering.

    Returns a ClusterResult; with return_trace=True also returns the list of
    per-oscillator visited-density sequences.
    """
    n = ds.n
    if probes < 1:
        raise ConfigError(f"probes must be >= 1, got {probes}")
    if g is not None and g < 1:
        raise ConfigError(f"grid resolution must be >= 1, got {g}")
    if m is not None and m < 1:
        raise ConfigError(f"oscillator count must be >= 1, got {m}")
    if tie_budget < 1:
        raise ConfigError(f"tie_budget must be >= 1, got {tie_budget}")

    if n == 1:
        if ds.d == 1:
            point = np.array([ds.features[0, 0], 0.0])
        elif ds.d == 2:
            point = ds.features[0].copy()
        else:
            point = np.zeros(2)  # a single sample mean-centers to the origin
        result = ClusterResult(centers=point[None, :], assignment=np.zeros(1, dtype=np.int64),
                               count=1)
        return (result, [[1]]) if return_trace else result

    points = project_2d(ds)
    if g is None:
        g = max(2, math.ceil(math.sqrt(n)))
    if m is None:
        m = min(20, n)
    if m > n:
        warnings.warn(f"oscillator count {m} exceeds sample count {n}; clamping to {n}")
        m = n

    grid = build_grid(points, g)
    ss = np.random.SeedSequence(seed)
    init_rng = np.random.default_rng(ss)
    init_idx = init_rng.choice(n, size=m, replace=False)
    streams = ss.spawn(m)

    finals = []
    traces = []
    for i in range(m):
        rng = np.random.default_rng(streams[i])
        center, trace = _climb(grid, points[init_idx[i]], probes, rng, descend, tie_budget)
        finals.append(center)
        traces.append(trace)

    # Centers sharing a grid cell merge into the mean of that cell's centers.
    groups: dict[tuple[int, int], list[np.ndarray]] = {}
    for center in finals:
        ix, iy = grid.cell_of(center[0], center[1])
        groups.setdefault((int(ix), int(iy)), []).append(center)
    merged = np.array([np.mean(groups[cell], axis=0) for cell in sorted(groups)])

    diffs = points[:, None, :] - merged[None, :, :]
    assignment = np.argmin(np.einsum("nkc,nkc->nk", diffs, diffs), axis=1).astype(np.int64)
    result = ClusterResult(centers=merged, assignment=assignment, count=len(merged))
    return (result, traces) if return_trace else result
