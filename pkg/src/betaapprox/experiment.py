"""Seeded Monte Carlo estimates of how much of [0, c] hits Psi in a window of levels."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from .approx import ONE_SIDED, PsiSpec, level_report
from .expansion import DEFAULT_BUDGET, BetaContext
from .rng import uniform_sample


@dataclass(frozen=True)
class CoverageReport:
    beta_label: str
    psi: PsiSpec
    n_range: tuple[int, int]
    samples: int
    seed: int
    hit_fraction: float
    per_level_hit_rate: tuple[tuple[int, float], ...]
    mean_hits_per_sample: float
    mode: str = ONE_SIDED

    def to_json(self) -> dict:
        return {
            "beta_label": self.beta_label,
            "psi": self.psi.to_json(),
            "n_range": list(self.n_range),
            "samples": self.samples,
            "seed": self.seed,
            "mode": self.mode,
            "hit_fraction": self.hit_fraction,
            "per_level_hit_rate": [[n, r] for n, r in self.per_level_hit_rate],
            "mean_hits_per_sample": self.mean_hits_per_sample,
        }

    def to_csv(self) -> str:
        """Per-level hit rates, one row per level."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "hit_rate"])
        for n, r in self.per_level_hit_rate:
            writer.writerow([n, repr(r)])
        return buf.getvalue()


def sample_points(ctx: BetaContext, samples: int, seed: int) -> list[float]:
    """Sample i is drawn from the stream keyed by (seed, i)."""
    c = float(ctx.c)
    return [uniform_sample(seed, i, c) for i in range(samples)]


def coverage_experiment(ctx: BetaContext, psi: PsiSpec, n_range: Sequence[int], samples: int,
                        seed: int = 0, mode: str = ONE_SIDED, budget: int = DEFAULT_BUDGET,
                        beta_label: str | None = None) -> CoverageReport:
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if samples < 1:
        raise ValueError("samples must be positive")
    levels = n_hi - n_lo + 1
    per_level = [0] * levels
    covered = 0
    total_hits = 0
    for x in sample_points(ctx, samples, seed):
        hits = [r.hit for r in level_report(x, psi, (n_lo, n_hi), mode, ctx, budget=budget)]
        for k, h in enumerate(hits):
            per_level[k] += h
        covered += any(hits)
        total_hits += sum(hits)
    return CoverageReport(
        beta_label=beta_label or ctx.label,
        psi=psi,
        n_range=(n_lo, n_hi),
        samples=samples,
        seed=seed,
        hit_fraction=covered / samples,
        per_level_hit_rate=tuple((n_lo + k, per_level[k] / samples) for k in range(levels)),
        mean_hits_per_sample=total_hits / samples,
        mode=mode.upper(),
    )


SUMMARY_FIELDS = ("beta_label", "psi", "n_range", "hit_fraction", "mean_hits_per_sample")


def contrast_summary(reports: Sequence[CoverageReport]) -> list[dict]:
    """One row per report, highest hit fraction first, ties by beta label."""
    if not reports:
        raise ValueError("need at least one report")
    rows = [
        {
            "beta_label": r.beta_label,
            "psi": r.psi.label(),
            "n_range": f"[{r.n_range[0]},{r.n_range[1]}]",
            "hit_fraction": r.hit_fraction,
            "mean_hits_per_sample": r.mean_hits_per_sample,
        }
        for r in reports
    ]
    rows.sort(key=lambda row: (-row["hit_fraction"], row["beta_label"]))
    return rows


def summary_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
