"""Approximation functions Psi, per-level hit detection and the chained construction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import gmpy2
from gmpy2 import mpfr

from ._mp import to_decimal, to_mpfr, workprec
from .errors import BudgetExhaustedNoMilestone, DomainError, ZeroPsiError
from .expansion import (
    DEFAULT_BUDGET,
    DEFAULT_PRECISION,
    GREEDY,
    BetaContext,
    Digits,
    digits_str,
    extremal_expansion,
    is_prefix,
    min_gap,
    orbit,
)
from .levelsearch import LevelSearch

GEOMETRIC = "GEOMETRIC"
SCALED_GEOMETRIC = "SCALED_GEOMETRIC"
COROLLARY = "COROLLARY"
CONSTANT = "CONSTANT"
FAMILIES = (GEOMETRIC, SCALED_GEOMETRIC, COROLLARY, CONSTANT)

CAP = "cap"
SCALE = "scale"

ONE_SIDED = "ONE_SIDED"
TWO_SIDED = "TWO_SIDED"

DIVERGENT_LOOKING = "DIVERGENT_LOOKING"
CONVERGENT_LOOKING = "CONVERGENT_LOOKING"


@dataclass(frozen=True)
class PsiSpec:
    """One of the supported Psi families plus ordered CAP/SCALE transforms.

    Numeric parameters are kept as decimal strings so a spec round-trips
    through JSON unchanged.
    """

    family: str
    ratio: Optional[str] = None
    a: Optional[str] = None
    transforms: tuple[tuple[str, Union[str, int]], ...] = ()

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ValueError(f"unknown Psi family {self.family!r}")
        if fam in (GEOMETRIC, SCALED_GEOMETRIC):
            if self.ratio is None or not mpfr(self.ratio, 128) > 1:
                raise ValueError("ratio must be > 1")
        if fam == SCALED_GEOMETRIC and (self.a is None or not mpfr(self.a, 128) > 0):
            raise ValueError("a must be > 0")
        if fam == CONSTANT and (self.a is None or mpfr(self.a, 128) < 0):
            raise ValueError("a must be >= 0")
        for kind, value in self.transforms:
            if kind == CAP:
                if not mpfr(value, 128) > 0:
                    raise ValueError("cap constant must be > 0")
            elif kind == SCALE:
                if isinstance(value, bool) or int(value) != value or int(value) < 1:
                    raise ValueError("scale must be a positive integer")
            else:
                raise ValueError(f"unknown transform {kind!r}")

    @classmethod
    def geometric(cls, ratio) -> "PsiSpec":
        return cls(GEOMETRIC, ratio=str(ratio))

    @classmethod
    def scaled_geometric(cls, a, ratio) -> "PsiSpec":
        return cls(SCALED_GEOMETRIC, ratio=str(ratio), a=str(a))

    @classmethod
    def corollary(cls) -> "PsiSpec":
        return cls(COROLLARY)

    @classmethod
    def constant(cls, a) -> "PsiSpec":
        return cls(CONSTANT, a=str(a))

    def cap(self, k2) -> "PsiSpec":
        """Psi~(n) = min(Psi(n), k2 * 2^-n)."""
        if isinstance(k2, mpfr):
            k2 = to_decimal(k2, k2.precision)
        elif not isinstance(k2, str):
            k2 = repr(float(k2))
        return replace(self, transforms=self.transforms + ((CAP, k2),))

    def scale(self, k: int) -> "PsiSpec":
        """Psi_k(n) = Psi(n) / k."""
        return replace(self, transforms=self.transforms + ((SCALE, int(k)),))

    def __call__(self, n: int, precision_bits: int = DEFAULT_PRECISION) -> mpfr:
        return psi_eval(self, n, precision_bits)

    def label(self) -> str:
        if self.family == GEOMETRIC:
            base = f"GEOMETRIC({self.ratio})"
        elif self.family == SCALED_GEOMETRIC:
            base = f"SCALED_GEOMETRIC({self.a},{self.ratio})"
        elif self.family == CONSTANT:
            base = f"CONSTANT({self.a})"
        else:
            base = "COROLLARY"
        for kind, value in self.transforms:
            base += f"|{kind}({value})"
        return base

    def to_json(self) -> dict:
        out: dict = {"family": self.family}
        if self.ratio is not None:
            out["ratio"] = self.ratio
        if self.a is not None:
            out["a"] = self.a
        out["transforms"] = [{kind: value} for kind, value in self.transforms]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PsiSpec":
        transforms = []
        for t in obj.get("transforms", []):
            (kind, value), = t.items()
            transforms.append((kind, int(value) if kind == SCALE else str(value)))
        return cls(obj["family"], ratio=obj.get("ratio"), a=obj.get("a"), transforms=tuple(transforms))


def psi_eval(psi: PsiSpec, n: int, precision_bits: int = DEFAULT_PRECISION) -> mpfr:
    """Psi(n) with transforms applied in order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with workprec(precision_bits):
        fam = psi.family
        if fam == GEOMETRIC:
            v = to_mpfr(psi.ratio, precision_bits) ** (-n)
        elif fam == SCALED_GEOMETRIC:
            v = to_mpfr(psi.a, precision_bits) * to_mpfr(psi.ratio, precision_bits) ** (-n)
        elif fam == CONSTANT:
            v = to_mpfr(psi.a, precision_bits)
        else:
            # log 1 = 0, so n = 1 uses 1/(2 ln 2).
            v = 1 / (2 * gmpy2.log(mpfr(2))) if n == 1 else 1 / (n * mpfr(2) ** n * gmpy2.log(mpfr(n)))
        for kind, value in psi.transforms:
            if kind == CAP:
                v = min(v, to_mpfr(value, precision_bits) * mpfr(2) ** (-n))
            else:
                v = v / int(value)
        return v


def _shape_only(psi: PsiSpec) -> PsiSpec:
    """Drop trailing SCALE transforms, which cancel in ratios Psi(n+m)/Psi(n)."""
    transforms = list(psi.transforms)
    while transforms and transforms[-1][0] == SCALE:
        transforms.pop()
    return replace(psi, transforms=tuple(transforms))


def decay_constant(psi: PsiSpec, m: int, n_max: int = 64) -> int:
    """Integer C_m with Psi(n+m) >= Psi(n)/C_m for every n <= n_max.

    Psi(n) = 2^-n returns 2^m directly. Otherwise the smallest valid
    integer on the scanned range is found and doubled as a safety margin.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    shape = _shape_only(psi)
    if shape.family == GEOMETRIC and not shape.transforms and mpfr(shape.ratio, 128) == 2:
        return 2 ** m
    bits = DEFAULT_PRECISION
    with workprec(bits):
        values = [psi_eval(shape, n, bits) for n in range(1, n_max + m + 1)]
        if any(v == 0 for v in values):
            raise ZeroPsiError(f"Psi vanishes somewhere in [1, {n_max + m}]")
        worst = max(values[n - 1] / values[n + m - 1] for n in range(1, n_max + 1))
        return 2 * int(gmpy2.ceil(worst))


@dataclass(frozen=True)
class PartialSum:
    value: mpfr
    classification: str

    def to_json(self) -> dict:
        return {"value": to_decimal(self.value, 64), "classification": self.classification}


def divergence_partial_sum(psi: PsiSpec, N: int) -> PartialSum:
    """sum_{n<=N} 2^n Psi(n), plus an advisory divergence flag.

    The flag compares the contribution of the second half of the range to
    the whole: a tail carrying more than 1% looks divergent.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    bits = DEFAULT_PRECISION
    with workprec(bits):
        terms = [mpfr(2) ** n * psi_eval(psi, n, bits) for n in range(1, N + 1)]
        total = sum(terms, mpfr(0))
        tail = sum(terms[N // 2:], mpfr(0))
        if total == 0:
            flag = CONVERGENT_LOOKING
        else:
            flag = DIVERGENT_LOOKING if tail / total > mpfr("0.01") else CONVERGENT_LOOKING
    return PartialSum(total, flag)


@dataclass(frozen=True)
class LevelRecord:
    """Outcome of the level-n test: best gap, its witness and whether it hit."""

    n: int
    gap: mpfr
    digits: Digits
    psi_n: mpfr
    hit: bool
    side: str  # "below" or "above"


@dataclass(frozen=True)
class HitRecord:
    n: int
    gap: mpfr
    digits: Digits
    psi_n: mpfr
    two_sided: bool
    side: str = "below"

    def to_json(self, bits: int = 64) -> dict:
        return {
            "n": self.n,
            "gap": to_decimal(self.gap, bits),
            "digits": digits_str(self.digits),
            "psi_n": to_decimal(self.psi_n, bits),
            "two_sided": self.two_sided,
            "side": self.side,
        }


def _complement(d: Digits) -> Digits:
    return tuple(1 - e for e in d)


def _exact_level(x: mpfr, n: int, ctx: BetaContext, two_sided: bool, budget: int):
    below = min_gap(x, n, ctx, budget)
    above = None
    if two_sided:
        # Digit complement maps level sums s to S_n - s, so the nearest sum
        # above x is S_n minus the nearest sum below S_n - x.
        with ctx.local():
            s_n = ctx.c * (1 - ctx.beta ** (-n))
            mirror = s_n - x
            inside = mirror >= -ctx.tau
            mirror = gmpy2.maxnum(mirror, mpfr(0))
        if inside:
            m = min_gap(mirror, n, ctx, budget)
            above = (m.gap, _complement(m.digits))
    return (below.gap, below.digits), above


def level_report(x, psi: PsiSpec, n_range: Sequence[int], mode: str, ctx: BetaContext,
                 engine: str = "fast", budget: int = DEFAULT_BUDGET) -> list[LevelRecord]:
    """Best gap and hit flag at every level of ``n_range`` (inclusive)."""
    n_lo, n_hi = n_range
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError(f"bad level range {n_range}")
    mode = mode.upper()
    if mode not in (ONE_SIDED, TWO_SIDED):
        raise ValueError(f"mode must be ONE_SIDED or TWO_SIDED, got {mode!r}")
    two = mode == TWO_SIDED
    xv = ctx.real(x)
    if not ctx.contains(xv):
        raise DomainError(f"x = {float(xv):.6g} lies outside [0, c]")
    search = LevelSearch(xv, ctx, two_sided=two, budget=budget) if engine == "fast" else None
    out = []
    for n in range(n_lo, n_hi + 1):
        if search is not None:
            lg = search.level(n)
            below = (lg.below_gap, lg.below_digits)
            above = (lg.above_gap, lg.above_digits) if lg.above_gap is not None else None
        elif engine == "exact":
            below, above = _exact_level(xv, n, ctx, two, budget)
        else:
            raise ValueError(f"unknown engine {engine!r}")
        psi_n = psi_eval(psi, n, ctx.precision_bits)
        gap, digits, side = below[0], below[1], "below"
        if above is not None and above[0] < gap:
            gap, digits, side = above[0], above[1], "above"
        out.append(LevelRecord(n, gap, digits, psi_n, bool(gap <= psi_n), side))
    return out


def hit_depths(x, psi: PsiSpec, n_range: Sequence[int], mode: str, ctx: BetaContext,
               engine: str = "fast", budget: int = DEFAULT_BUDGET) -> list[HitRecord]:
    """Levels n in ``n_range`` where some level-n sum is within Psi(n) of x.

    ONE_SIDED only accepts sums below x (gap = x - sum); TWO_SIDED also
    accepts sums above x.
    """
    two = mode.upper() == TWO_SIDED
    return [
        HitRecord(r.n, r.gap, r.digits, r.psi_n, two, r.side)
        for r in level_report(x, psi, n_range, mode, ctx, engine, budget)
        if r.hit
    ]


def levels_to_csv(records: Sequence[LevelRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "gap", "psi_n", "hit"])
    for r in records:
        writer.writerow([r.n, format(float(r.gap), ".17g"), format(float(r.psi_n), ".17g"), int(r.hit)])
    return buf.getvalue()


@dataclass(frozen=True)
class ExpansionResult:
    digits: Digits
    milestones: tuple[tuple[int, mpfr], ...]
    exhausted: bool
    scaling_constants: tuple[int, ...] = field(default=())

    def to_json(self, bits: int = 64) -> dict:
        return {
            "digits": digits_str(self.digits),
            "milestones": [{"depth": m, "gap": to_decimal(g, bits)} for m, g in self.milestones],
            "exhausted": self.exhausted,
            "scaling_constants": list(self.scaling_constants),
        }


def scaling_constant(psi: PsiSpec, depth: int, window: int, ctx: BetaContext) -> int:
    """Integer C with Psi(n)/(C beta^depth) <= Psi(n + depth) for n = 1..window.

    Seeded from the decay constant C_depth as ceil(C_depth / beta^depth)
    and doubled until the inequality holds on the whole window.
    """
    if depth == 0:
        return 1
    bits = ctx.precision_bits
    with ctx.local():
        lift = ctx.beta ** depth
        c = max(1, int(gmpy2.ceil(decay_constant(psi, depth, n_max=max(window, 1)) / lift)))
        lhs = [psi_eval(psi, n, bits) / lift for n in range(1, window + 1)]
        rhs = [psi_eval(psi, n + depth, bits) for n in range(1, window + 1)]
        slack = 1 + mpfr(2) ** (-(bits - 8))
        while not all(a / c <= b * slack for a, b in zip(lhs, rhs)):
            c *= 2
    return c


FIRST = "first"
BACKTRACK = "backtrack"


def construct_expansion(x, psi: PsiSpec, depth_budget: int, milestones_wanted: int,
                        ctx: BetaContext, budget: int = DEFAULT_BUDGET,
                        strategy: str = BACKTRACK, max_rounds: int = 256) -> ExpansionResult:
    """Build a prefix of x that is Psi-good at a chain of increasing depths.

    Each round rescales Psi by an integer C so that a Psi_C-good
    approximation of the current orbit point, pulled back to x, is
    Psi-good at the combined depth; it takes the shortest level whose
    minimal gap is within Psi_C and moves the orbit forward.

    With ``strategy="first"`` a round that finds nothing ends the chain.
    With ``"backtrack"`` the earlier rounds' later qualifying levels are
    tried in turn (at most ``max_rounds`` searches); when the first
    choices already succeed both strategies return the same chain.

    The digit string is completed greedily to ``depth_budget`` and every
    milestone is re-checked against x directly.
    """
    if depth_budget < 1 or milestones_wanted < 1:
        raise ValueError("depth_budget and milestones_wanted must be >= 1")
    if strategy not in (FIRST, BACKTRACK):
        raise ValueError(f"unknown strategy {strategy!r}")
    bits = ctx.precision_bits
    with ctx.local():
        xv = ctx.real(x)
        if not ctx.contains(xv):
            raise DomainError(f"x = {float(xv):.6g} lies outside [0, c]")
        psi_values = [psi_eval(psi, n, bits) for n in range(1, depth_budget + 1)]
        if any(v == 0 for v in psi_values):
            raise ZeroPsiError("Psi vanishes inside the depth budget")
    constants: dict[int, int] = {}
    best: list[tuple[int, Digits, int, mpfr]] = []
    rounds = 0

    def explore(y, depth, chain) -> bool:
        nonlocal best, rounds
        if len(chain) > len(best):
            best = list(chain)
        if len(chain) == milestones_wanted:
            return True
        if depth >= depth_budget or rounds >= max_rounds:
            return False
        rounds += 1
        if depth not in constants:
            constants[depth] = scaling_constant(psi, depth, depth_budget - depth, ctx)
        c = constants[depth]
        search = LevelSearch(y, ctx, budget=budget)
        for n in range(1, depth_budget - depth + 1):
            lg = search.level(n)
            with ctx.local():
                good = lg.below_gap <= psi_values[n - 1] / c
            if not good:
                continue
            nxt = orbit(y, lg.below_digits, ctx)
            chain.append((depth + n, lg.below_digits, c, nxt))
            if explore(nxt, depth + n, chain):
                return True
            chain.pop()
            if strategy == FIRST:
                return False
        return False

    explore(xv, 0, [])
    if not best:
        raise BudgetExhaustedNoMilestone(
            f"no Psi_C-good prefix of x within depth {depth_budget}"
        )
    digits: list[int] = []
    milestones: list[tuple[int, mpfr]] = []
    for depth, round_digits, _, _ in best:
        digits.extend(round_digits)
        check = is_prefix(xv, digits, ctx)
        with ctx.local():
            gap = max(check.gap, mpfr(0))
            if not check.is_prefix or gap > psi_values[depth - 1]:
                raise AssertionError(f"milestone at depth {depth} failed re-verification")
        milestones.append((depth, gap))
    depth, y = best[-1][0], best[-1][3]
    if depth < depth_budget:
        with ctx.local():
            y = gmpy2.minnum(gmpy2.maxnum(y, mpfr(0)), ctx.c)
        digits.extend(extremal_expansion(y, depth_budget - depth, GREEDY, ctx))
    return ExpansionResult(
        tuple(digits),
        tuple(milestones),
        exhausted=len(best) < milestones_wanted,
        scaling_constants=tuple(c for _, _, c, _ in best),
    )
