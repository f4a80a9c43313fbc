import gmpy2
import pytest
from gmpy2 import mpfr

from betaapprox.algebraic import (BAD_NORM, NO_ROOT_IN_RANGE, NOT_MONIC, REDUCIBLE, SMALL_CONJUGATE,
                                  GarsiaCertificate, IntPolynomial, RejectionReason, all_roots, certify_garsia,
                                  find_factor, is_irreducible, parse_polynomial)
from betaapprox.errors import NotMonicError, ParseError


@pytest.mark.parametrize("text,coeffs", [
    ("x^3-2x-2", (-2, -2, 0, 1)),
    ("x**2 - 2", (-2, 0, 1)),
    ("[-2, 0, 1]", (-2, 0, 1)),
    ("x^4 − 2", (-2, 0, 0, 0, 1)),
    ("x^2 - x - 1", (-1, -1, 1)),
    ("2 + x^5 - x", (2, -1, 0, 0, 0, 1)),
])
def test_parse(text, coeffs):
    assert parse_polynomial(text).coefficients == coeffs


def test_parse_round_trip():
    p = parse_polynomial("x^3-2x-2")
    assert str(p) == "x^3 - 2x - 2"
    assert parse_polynomial(str(p)) == p


@pytest.mark.parametrize("text", ["", "x^2 + y", "3", "x^^2", "[1, 2"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_polynomial(text)


def test_not_monic():
    with pytest.raises(NotMonicError):
        IntPolynomial((1, 0, 2))
    assert certify_garsia("2x^2 - 2").code == NOT_MONIC


@pytest.mark.parametrize("text", ["x^2-2", "x^3-2x-2", "x^4-2", "x^5 - x^4 - x^3 + 2", "x^7-x-1"])
def test_roots_residual_and_radius(text):
    p = parse_polynomial(text)
    bits = 256
    roots = all_roots(p, bits)
    assert len(roots) == p.degree
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        biggest = max(abs(r.value) for r in roots)
        bound = p.degree * mpfr(2) ** (-bits // 2) * (1 + biggest) ** p.degree
        for r in roots:
            assert abs(p(r.value)) <= bound
            assert r.radius <= mpfr(2) ** (-bits // 2)


def test_roots_conjugate_pairs_exact():
    roots = list(all_roots(parse_polynomial("x^3-2x-2"), 128))
    assert roots[0].is_real
    assert roots[1].value.real == roots[2].value.real
    assert roots[1].value.imag + roots[2].value.imag == 0


@pytest.mark.parametrize("text,irreducible", [
    ("x^2-2", True),
    ("x^3-2x-2", True),
    ("x^2-3x+2", False),
    ("x^4-4", False),          # (x^2-2)(x^2+2)
    ("x^4+4", False),          # Sophie Germain, no rational roots
    ("x^6-2", True),
    ("x^5-x^4-x^3+2", True),
])
def test_irreducibility(text, irreducible):
    p = parse_polynomial(text)
    assert is_irreducible(p) is irreducible
    f = find_factor(p)
    if f is not None:
        assert 1 <= len(f) - 1 < p.degree


def test_certificate_cubic():
    cert = certify_garsia("x^3-2x-2")
    assert isinstance(cert, GarsiaCertificate)
    assert abs(float(cert.beta) - 1.7692923542386314) < 1e-15
    assert len(cert.conjugates) == 2
    assert float(cert.k2) > 0
    with gmpy2.context(gmpy2.get_context(), precision=256):
        assert abs(cert.k2 * cert.density_bound - 2) < mpfr(2) ** -200
    js = cert.to_json()
    assert set(js) == {"polynomial", "beta", "conjugates", "k2", "density_bound", "precision_bits"}


def test_certificate_sqrt2_analytic():
    cert = certify_garsia("x^2-2")
    with gmpy2.context(gmpy2.get_context(), precision=256):
        assert abs(cert.k2 - (gmpy2.sqrt(mpfr(2)) - 1)) < mpfr(2) ** -200
        assert abs(cert.beta - gmpy2.sqrt(mpfr(2))) < mpfr(2) ** -200


@pytest.mark.parametrize("text,code", [
    ("x^2-x-1", BAD_NORM),
    ("x^3-x-1", BAD_NORM),
    ("x^2-3x+2", REDUCIBLE),
    ("x^4-x^2-2x+2", REDUCIBLE),        # double root at 1
    ("x-2", NO_ROOT_IN_RANGE),
    ("x^2+2", NO_ROOT_IN_RANGE),
    ("x^3-2x+2", NO_ROOT_IN_RANGE),
    ("x^3+2x^2-2x-2", SMALL_CONJUGATE),
    ("x^4-2x^2-2x+2", SMALL_CONJUGATE),
])
def test_rejections(text, code):
    result = certify_garsia(text)
    assert isinstance(result, RejectionReason)
    assert result.code == code
    assert result.to_json()["rejected"] == code


@pytest.mark.parametrize("text", ["x^3-x-2", "x^3+x^2-x-2", "x^3-x^2-2", "x^5-x-2"])
def test_more_garsia(text):
    cert = certify_garsia(text)
    assert isinstance(cert, GarsiaCertificate)
    assert 1 < cert.beta < 2
    assert cert.k2 > 0
    assert all(abs(r.value) > 1 for r in cert.conjugates)


def test_repeated_root_factor():
    assert find_factor(parse_polynomial("x^4-4x^2+4")) == (-2, 0, 1)
