"""Bernoulli convolution densities from prefix counts and from direct sampling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import IncompatibleSupport
from .expansion import DEFAULT_BUDGET, BetaContext, count_prefixes
from .rng import stream

PREFIX_COUNT = "PREFIX_COUNT"
MONTE_CARLO = "MONTE_CARLO"

MC_BATCH = 1 << 16


@dataclass(frozen=True)
class DensityEstimate:
    """Piecewise-constant density on equal cells covering [0, c]."""

    grid: np.ndarray
    values: np.ndarray
    cell_width: float
    method: str
    params: dict = field(default_factory=dict)

    @property
    def support(self) -> tuple[float, float]:
        half = self.cell_width / 2
        return float(self.grid[0] - half), float(self.grid[-1] + half)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_width)

    def asymmetry(self) -> float:
        """sup |h(x) - h(c - x)| over the grid."""
        return float(np.max(np.abs(self.values - self.values[::-1])))

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "params": self.params,
            "cell_width": self.cell_width,
            "grid": [float(v) for v in self.grid],
            "values": [float(v) for v in self.values],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, v in zip(self.grid, self.values):
            writer.writerow([format(float(x), ".17g"), format(float(v), ".17g")])
        return buf.getvalue()


def _normalized(values: np.ndarray, width: float) -> np.ndarray:
    total = float(np.sum(values)) * width
    if total <= 0:
        raise ValueError("cannot normalize an all-zero density")
    return values / total


def cell_centers(c: float, cells: int) -> np.ndarray:
    width = c / cells
    return (np.arange(cells) + 0.5) * width


def estimate_density_prefix(ctx: BetaContext, n: int, grid_points: int = 201,
                            budget: int = DEFAULT_BUDGET) -> DensityEstimate:
    """(beta/2)^n |Sigma_{beta,n}(x)| on cell centers, normalized to integrate to 1."""
    if grid_points < 10:
        raise ValueError("grid_points must be >= 10")
    c = float(ctx.c)
    width = c / grid_points
    raw = np.empty(grid_points)
    for i in range(grid_points):
        with ctx.local():
            x = ctx.c * (2 * i + 1) / (2 * grid_points)
        raw[i] = count_prefixes(x, n, ctx, budget)
    raw *= (float(ctx.beta) / 2) ** n
    return DensityEstimate(cell_centers(c, grid_points), _normalized(raw, width), width,
                           PREFIX_COUNT, {"n": n})


def default_series_depth(ctx: BetaContext, bins: int) -> int:
    """Smallest d with c * beta^-d < cell_width / 10."""
    beta = float(ctx.beta)
    return max(1, math.floor(math.log(10 * bins) / math.log(beta)) + 1)


def estimate_density_mc(ctx: BetaContext, samples: int, bins: int = 100, seed: int = 0,
                        series_depth: Optional[int] = None) -> DensityEstimate:
    """Histogram of sum_{i<=depth} e_i beta^-i over fair random bits."""
    if samples < 1 or bins < 1:
        raise ValueError("samples and bins must be positive")
    depth = series_depth or default_series_depth(ctx, bins)
    c = float(ctx.c)
    weights = float(ctx.beta) ** -np.arange(1, depth + 1, dtype=float)
    counts = np.zeros(bins, dtype=np.int64)
    for batch, start in enumerate(range(0, samples, MC_BATCH)):
        size = min(MC_BATCH, samples - start)
        bits = stream(seed, batch).integers(0, 2, size=(size, depth), dtype=np.uint8)
        points = bits @ weights
        counts += np.histogram(points, bins=bins, range=(0.0, c))[0]
    width = c / bins
    values = counts / (samples * width)
    return DensityEstimate(cell_centers(c, bins), values, width, MONTE_CARLO,
                           {"samples": samples, "seed": seed, "series_depth": depth})


def _edges(d: DensityEstimate) -> np.ndarray:
    lo, _ = d.support
    return lo + d.cell_width * np.arange(len(d.grid) + 1)


def _resample(d: DensityEstimate, edges: np.ndarray) -> np.ndarray:
    """Cell averages of the step function d over the cells given by edges."""
    src = _edges(d)
    # Antiderivative of the step function at the source edges, then interpolate.
    cum = np.concatenate([[0.0], np.cumsum(d.values * d.cell_width)])
    at = np.interp(edges, src, cum)
    return np.diff(at) / np.diff(edges)


@dataclass(frozen=True)
class Comparison:
    l1: float
    sup: float

    def to_json(self) -> dict:
        return {"l1": self.l1, "sup": self.sup}


def compare_densities(a: DensityEstimate, b: DensityEstimate) -> Comparison:
    """L1 and sup distance after normalizing and averaging onto the coarser grid."""
    sa, sb = a.support, b.support
    span = max(sa[1] - sa[0], sb[1] - sb[0])
    if abs(sa[0] - sb[0]) > 1e-9 * span or abs(sa[1] - sb[1]) > 1e-9 * span:
        raise IncompatibleSupport(f"supports {sa} and {sb} differ")
    coarse = a if a.cell_width >= b.cell_width else b
    edges = _edges(coarse)
    va = _resample(a, edges) / a.integral()
    vb = _resample(b, edges) / b.integral()
    diff = np.abs(va - vb)
    return Comparison(float(np.sum(diff) * coarse.cell_width), float(np.max(diff)))


@dataclass(frozen=True)
class GrowthDiagnostic:
    x: float
    ratios: tuple[tuple[int, float], ...]
    spread: float

    def to_json(self) -> dict:
        return {"x": self.x, "ratios": [list(r) for r in self.ratios], "spread": self.spread}


def growth_diagnostic(x, ctx: BetaContext, depths: Sequence[int],
                      budget: int = DEFAULT_BUDGET) -> GrowthDiagnostic:
    """(beta/2)^n |Sigma_{beta,n}(x)| at each depth and the max/min spread."""
    beta = float(ctx.beta)
    ratios = tuple((n, (beta / 2) ** n * count_prefixes(x, n, ctx, budget)) for n in depths)
    values = [r for _, r in ratios]
    return GrowthDiagnostic(float(ctx.real(x)), ratios, max(values) / min(values))
