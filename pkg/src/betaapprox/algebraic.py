"""Integer polynomials, certified root isolation and Garsia certificates.

Roots are found with Aberth's simultaneous iteration in MPFR complex
arithmetic, seeded by companion-matrix eigenvalues, and then enclosed in
disks of radius ``deg * |W_i|`` where ``W_i`` is the Weierstrass correction.
When those disks are pairwise disjoint each holds exactly one root.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence, Union

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ._mp import to_decimal, workprec
from .errors import BetaError, NotMonicError, ParseError, PrecisionUnreachable

NOT_MONIC = "NOT_MONIC"
BAD_NORM = "BAD_NORM"
REDUCIBLE = "REDUCIBLE"
NO_ROOT_IN_RANGE = "NO_ROOT_IN_RANGE"
SMALL_CONJUGATE = "SMALL_CONJUGATE"

MAX_FACTOR_SEARCH_DEGREE = 20


@dataclass(frozen=True)
class IntPolynomial:
    """Monic integer polynomial, coefficients in ascending degree."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(a) for a in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2:
            raise ParseError("polynomial must have degree >= 1")
        if coeffs[-1] != 1:
            raise NotMonicError(f"leading coefficient is {coeffs[-1]}, not 1")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def constant_term(self) -> int:
        return self.coefficients[0]

    def __call__(self, z):
        acc = 0
        for a in reversed(self.coefficients):
            acc = acc * z + a
        return acc

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            a = self.coefficients[k]
            if a == 0:
                continue
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            if k == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("x" if k == 1 else f"x^{k}")
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


_TERM = re.compile(r"^(\d+)?(?:\*?([a-z])(?:\^(\d+))?)?$")


def _coefficients_from_list(text: str) -> list[int]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed coefficient list: {text!r}") from exc
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"malformed coefficient list: {text!r}")
    for a in raw:
        if isinstance(a, bool) or not isinstance(a, int):
            raise ParseError(f"non-integer coefficient {a!r}")
    return list(raw)


def _coefficients_from_expression(text: str) -> list[int]:
    s = text.replace("**", "^").replace(" ", "").lower()
    if not s:
        raise ParseError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    pieces = re.findall(r"[+-][^+-]*", s)
    if "".join(pieces) != s:
        raise ParseError(f"malformed polynomial: {text!r}")
    terms: dict[int, int] = {}
    variable = None
    for piece in pieces:
        sign = -1 if piece[0] == "-" else 1
        m = _TERM.match(piece[1:])
        if not piece[1:] or m is None:
            raise ParseError(f"malformed term {piece!r} in {text!r}")
        coeff, var, exp = m.groups()
        if coeff is None and var is None:
            raise ParseError(f"malformed term {piece!r} in {text!r}")
        if var is not None:
            if variable is not None and var != variable:
                raise ParseError(f"more than one variable in {text!r}")
            variable = var
            power = int(exp) if exp is not None else 1
        else:
            if exp is not None:
                raise ParseError(f"malformed term {piece!r} in {text!r}")
            power = 0
        value = sign * (int(coeff) if coeff is not None else 1)
        terms[power] = terms.get(power, 0) + value
    coeffs = [0] * (max(terms) + 1)
    for power, value in terms.items():
        coeffs[power] = value
    return coeffs


def parse_polynomial(text: Union[str, Sequence[int], IntPolynomial]) -> IntPolynomial:
    """Parse ``"x^3-2x-2"`` or ``"[-2,-2,0,1]"`` (constant term first).

    Raises ParseError on malformed input and NotMonicError when the
    leading coefficient is not 1.
    """
    if isinstance(text, IntPolynomial):
        return text
    if isinstance(text, str):
        s = text.strip().replace("−", "-")
        coeffs = _coefficients_from_list(s) if s.startswith("[") else _coefficients_from_expression(s)
    else:
        coeffs = list(text)
        for a in coeffs:
            if isinstance(a, bool) or int(a) != a:
                raise ParseError(f"non-integer coefficient {a!r}")
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ParseError("polynomial must have degree >= 1")
    return IntPolynomial(tuple(int(a) for a in coeffs))


@dataclass(frozen=True)
class Root:
    value: mpc
    radius: mpfr

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0

    def to_json(self, bits: int) -> dict:
        return {
            "re": to_decimal(self.value.real, bits),
            "im": to_decimal(self.value.imag, bits),
            "radius": format(float(self.radius), ".3e"),
        }


@dataclass(frozen=True)
class RootSet:
    roots: tuple[Root, ...]
    precision_bits: int

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def to_json(self) -> list[dict]:
        return [r.to_json(self.precision_bits) for r in self.roots]


def _horner(coeffs, z):
    p = mpc(0)
    dp = mpc(0)
    for a in reversed(coeffs):
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _initial_guesses(coeffs: Sequence[int]) -> list[complex]:
    desc = np.array([float(a) for a in reversed(coeffs)])
    guesses = list(np.roots(desc)) if len(desc) > 2 else [complex(-desc[1] / desc[0])]
    # Aberth divides by z_i - z_j; separate coincident seeds deterministically.
    out = []
    for i, g in enumerate(guesses):
        g = complex(g)
        offset = 1e-9 * (1 + abs(g)) * complex(math.cos(0.7 * (i + 1)), math.sin(0.7 * (i + 1)))
        out.append(g + offset)
    return out


def _aberth(coeffs, zs, wp, max_iter=200):
    d = len(zs)
    tol = mpfr(2) ** (-(wp - 8))
    for _ in range(max_iter):
        biggest = mpfr(0)
        for i in range(d):
            p, dp = _horner(coeffs, zs[i])
            if p == 0:
                continue
            if dp == 0:
                zs[i] = zs[i] * (1 + tol) + tol
                biggest = mpfr(1)
                continue
            ratio = p / dp
            s = mpc(0)
            for j in range(d):
                if j != i:
                    s += 1 / (zs[i] - zs[j])
            w = ratio / (1 - ratio * s)
            zs[i] -= w
            step = abs(w) / max(mpfr(1), abs(zs[i]))
            if step > biggest:
                biggest = step
        if biggest <= tol:
            return True
    return False


def _inclusion_radii(coeffs, zs, wp):
    d = len(zs)
    unit = mpfr(2) ** (-wp)
    radii = []
    for i in range(d):
        p, _ = _horner(coeffs, zs[i])
        az = abs(zs[i])
        bound = mpfr(0)
        for a in reversed(coeffs):
            bound = bound * az + abs(a)
        eval_err = 4 * d * unit * bound
        denom = mpc(1)
        for j in range(d):
            if j != i:
                denom *= zs[i] - zs[j]
        if denom == 0:
            return None
        radii.append(d * (abs(p) + eval_err) / abs(denom) * (1 + mpfr(2) ** -20))
    return radii


def _disjoint(zs, radii) -> bool:
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            if abs(zs[i] - zs[j]) <= radii[i] + radii[j]:
                return False
    return True


def _symmetrize(zs, radii):
    """Snap provably real roots onto the axis and pair conjugates exactly."""
    d = len(zs)
    zs = list(zs)
    radii = list(radii)
    for i in range(d):
        if abs(zs[i].imag) > radii[i]:
            continue
        mirror = mpc(zs[i].real, -zs[i].imag)
        lonely = all(
            abs(mirror - zs[j]) > radii[i] + radii[j] for j in range(d) if j != i
        )
        if lonely:
            zs[i] = mpc(zs[i].real, 0)
    paired = set()
    for i in range(d):
        if zs[i].imag <= 0 or i in paired:
            continue
        mirror = mpc(zs[i].real, -zs[i].imag)
        candidates = [j for j in range(d) if zs[j].imag < 0 and j not in paired]
        if not candidates:
            raise PrecisionUnreachable("unpaired complex root")
        j = min(candidates, key=lambda k: abs(zs[k] - mirror))
        zs[j] = mirror
        radii[j] = radii[i]
        paired.update((i, j))
    return zs, radii


def all_roots(p: IntPolynomial, precision_bits: int = 256) -> RootSet:
    """All complex roots of ``p`` with error radii at most 2^(-precision_bits/2)."""
    if p.degree < 1:
        raise ParseError("degree must be >= 1")
    target = mpfr(2) ** (-(precision_bits / 2))
    coeffs = p.coefficients
    seeds = _initial_guesses(coeffs)
    for wp in (precision_bits + 64, 2 * precision_bits + 64):
        with workprec(wp):
            zs = [mpc(complex(g)) for g in seeds]
            _aberth(coeffs, zs, wp)
            radii = _inclusion_radii(coeffs, zs, wp)
            if radii is None or not _disjoint(zs, radii) or max(radii) > target:
                continue
            zs, radii = _symmetrize(zs, radii)
        with workprec(precision_bits):
            roots = [Root(mpc(z), mpfr(r)) for z, r in zip(zs, radii)]
        roots.sort(key=lambda r: (-float(r.value.real), -float(r.value.imag)))
        return RootSet(tuple(roots), precision_bits)
    raise PrecisionUnreachable(
        f"could not separate the roots of {p} at {precision_bits} bits (clustered or repeated roots)"
    )


def _divides(q: Sequence[int], p: Sequence[int]) -> bool:
    """Exact test whether monic integer q divides integer p (ascending coefficients)."""
    rem = list(p)
    dq = len(q) - 1
    for k in range(len(rem) - 1, dq - 1, -1):
        lead = rem[k]
        if lead:
            for i in range(dq + 1):
                rem[k - dq + i] -= lead * q[i]
    return all(a == 0 for a in rem[:dq])


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Monic gcd over the rationals (ascending coefficients)."""
    while any(b):
        while b and b[-1] == 0:
            b = b[:-1]
        rem = list(a)
        for k in range(len(rem) - 1, len(b) - 2, -1):
            q = rem[k] / b[-1]
            for i in range(len(b)):
                rem[k - len(b) + 1 + i] -= q * b[i]
        a, b = b, rem[:len(b) - 1]
    while a and a[-1] == 0:
        a = a[:-1]
    return [v / a[-1] for v in a]


def _exact_factor(p: IntPolynomial) -> tuple[int, ...] | None:
    """Factors visible without root finding: integer roots and repeated roots."""
    coeffs = p.coefficients
    if p.degree == 1:
        return None
    a0 = coeffs[0]
    if a0 == 0:
        return (0, 1)
    for r in range(1, abs(a0) + 1):
        if a0 % r:
            continue
        for cand in (r, -r):
            if p(cand) == 0:
                return (-cand, 1)
    deriv = [Fraction(i * a) for i, a in enumerate(coeffs)][1:]
    g = _poly_gcd([Fraction(a) for a in coeffs], deriv)
    if len(g) > 1:
        # monic factor of a monic integer polynomial: integral by Gauss's lemma
        return tuple(int(v) for v in g)
    return None


def find_factor(p: IntPolynomial, roots: RootSet | None = None) -> tuple[int, ...] | None:
    """Return a proper monic integer factor of ``p`` if one exists, else None.

    Integer and repeated roots are found exactly first; then every subset
    of at most half the numerical roots is multiplied out, rounded to
    integers and accepted only if exact polynomial division succeeds.
    """
    coeffs = p.coefficients
    d = p.degree
    exact = _exact_factor(p)
    if exact is not None or d <= 3:
        return exact
    if d > MAX_FACTOR_SEARCH_DEGREE:
        raise BetaError(f"irreducibility search not supported above degree {MAX_FACTOR_SEARCH_DEGREE}")
    if roots is None:
        roots = all_roots(p)
    bits = roots.precision_bits
    zs = [r.value for r in roots]
    with workprec(bits + 32):
        tol = mpfr(2) ** (-(bits // 4))
        for k in range(2, d // 2 + 1):
            for subset in itertools.combinations(range(d), k):
                prod = [mpc(1)]
                for idx in subset:
                    z = zs[idx]
                    nxt = [mpc(0)] * (len(prod) + 1)
                    for i, a in enumerate(prod):
                        nxt[i + 1] += a
                        nxt[i] -= a * z
                    prod = nxt
                cand = []
                for a in prod:
                    nearest = int(gmpy2.rint(a.real))
                    if abs(a.imag) > tol or abs(a.real - nearest) > tol:
                        break
                    cand.append(nearest)
                else:
                    if _divides(cand, coeffs):
                        return tuple(cand)
    return None


def is_irreducible(p: IntPolynomial, roots: RootSet | None = None) -> bool:
    return find_factor(p, roots) is None


@dataclass(frozen=True)
class RejectionReason:
    code: str
    detail: str

    def to_json(self) -> dict:
        return {"rejected": self.code, "detail": self.detail}


@dataclass(frozen=True)
class GarsiaCertificate:
    polynomial: IntPolynomial
    beta: mpfr
    conjugates: RootSet
    k2: mpfr
    density_bound: mpfr
    precision_bits: int

    def to_json(self) -> dict:
        bits = self.precision_bits
        return {
            "polynomial": str(self.polynomial),
            "beta": to_decimal(self.beta, bits),
            "conjugates": self.conjugates.to_json(),
            "k2": to_decimal(self.k2, bits),
            "density_bound": to_decimal(self.density_bound, bits),
            "precision_bits": bits,
        }


def real_roots_in_open_unit_to_two(roots: RootSet) -> list[Root]:
    """Real roots whose whole enclosure lies strictly inside (1, 2)."""
    return [
        r for r in roots
        if r.is_real and r.value.real - r.radius > 1 and r.value.real + r.radius < 2
    ]


def certify_garsia(
    p: Union[IntPolynomial, str, Sequence[int]], precision_bits: int = 256
) -> Union[GarsiaCertificate, RejectionReason]:
    """Certify a Garsia number in (1, 2) or explain which condition failed.

    Checks run in order: monic, |p(0)| = 2, irreducible, exactly one real
    root in (1, 2), every other root of modulus certifiably above 1.
    """
    try:
        poly = parse_polynomial(p)
    except NotMonicError as exc:
        return RejectionReason(NOT_MONIC, exc.detail)
    if abs(poly.constant_term) != 2:
        return RejectionReason(
            BAD_NORM, f"|constant term| = {abs(poly.constant_term)}, norm must be +-2"
        )
    factor = _exact_factor(poly)
    roots = None
    if factor is None:
        roots = all_roots(poly, precision_bits)
        factor = find_factor(poly, roots)
    if factor is not None:
        return RejectionReason(REDUCIBLE, f"has factor {IntPolynomial(factor)}")
    inside = real_roots_in_open_unit_to_two(roots)
    if len(inside) != 1:
        return RejectionReason(
            NO_ROOT_IN_RANGE, f"{len(inside)} certified real roots in the open interval (1, 2)"
        )
    beta_root = inside[0]
    others = tuple(r for r in roots if r is not beta_root)
    with workprec(precision_bits):
        for r in others:
            if abs(r.value) - r.radius <= 1:
                return RejectionReason(
                    SMALL_CONJUGATE,
                    f"conjugate {complex(r.value):.6g} has modulus {float(abs(r.value)):.6g}, not certifiably > 1",
                )
        k2 = mpfr(1)
        for r in others:
            k2 *= abs(r.value) - 1
        density_bound = 2 / k2
        beta = mpfr(beta_root.value.real)
    return GarsiaCertificate(
        polynomial=poly,
        beta=beta,
        conjugates=RootSet(others, precision_bits),
        k2=k2,
        density_bound=density_bound,
        precision_bits=precision_bits,
    )
