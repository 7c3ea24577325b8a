from fractions import Fraction

import mpmath
import pytest

from hankelmoments import Backend, BackendError, bigfloat
from hankelmoments.backends import (
    F64_BACKEND,
    RATIONAL_BACKEND,
    norm_sq,
    scalar_to_json,
    sup_norm,
    to_float,
)


def test_parse_and_tag_round_trip():
    for tag in ("rational", "f64", "bigfloat:256"):
        assert Backend.parse(tag).tag() == tag


@pytest.mark.parametrize("tag", ["bigfloat", "bigfloat:", "bigfloat:abc", "float32", ""])
def test_malformed_tags_rejected(tag):
    with pytest.raises(BackendError):
        Backend.parse(tag)


def test_bigfloat_minimum_precision():
    with pytest.raises(BackendError):
        bigfloat(32)
    assert bigfloat(64).precision == 64


def test_rational_convert_is_exact():
    b = RATIONAL_BACKEND
    assert b.convert("2/3") == Fraction(2, 3)
    assert b.convert(5) == Fraction(5)
    x = b.convert(Fraction(1, 3))
    assert (x + x + x) == 1  # closed under arithmetic, no rounding


def test_rational_refuses_floats():
    with pytest.raises(BackendError):
        RATIONAL_BACKEND.convert(0.1)
    with pytest.raises(BackendError):
        RATIONAL_BACKEND.sqrt(Fraction(2))


def test_bigfloat_conversion_uses_context_precision():
    b = bigfloat(128)
    x = b.convert(Fraction(1, 3))
    with b.context():
        err = abs(x * 3 - 1)
        assert err < mpmath.mpf(2) ** (-120)


def test_f64_convert():
    assert F64_BACKEND.convert("1/4") == 0.25
    assert F64_BACKEND.convert(Fraction(1, 2)) == 0.5


def test_scalar_json_forms():
    assert scalar_to_json(Fraction(1, 3)) == "1/3"
    assert scalar_to_json(Fraction(4)) == "4"
    assert scalar_to_json(0.25) == 0.25
    assert RATIONAL_BACKEND.convert(scalar_to_json(Fraction(-7, 9))) == Fraction(-7, 9)


def test_vector_helpers():
    v = [Fraction(3), Fraction(-4)]
    assert norm_sq(v) == 25
    assert sup_norm(v) == 4
    assert to_float(Fraction(1, 2)) == 0.5
