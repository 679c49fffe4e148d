import pytest
from hypothesis import given
from hypothesis import strategies as st

from connexa.errors import DocumentError
from connexa.scalars import I, ONE, S, Scalar, integer

fractions = st.fractions(
    min_value=-50, max_value=50, max_denominator=12
)
scalars = st.builds(Scalar, fractions, fractions)


@given(scalars, scalars)
def test_commutativity(a, b):
    assert a + b == b + a
    assert a * b == b * a


@given(scalars, scalars, scalars)
def test_distributivity(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(scalars)
def test_text_round_trip(a):
    assert Scalar.parse(str(a)) == a


@given(scalars)
def test_division(a):
    if not a.is_zero():
        assert (ONE / a) * a == ONE


def test_parse_forms():
    assert Scalar.parse("3") == S(3)
    assert Scalar.parse("-1/2") == S("-1/2")
    assert Scalar.parse("i") == I
    assert Scalar.parse("-i") == -I
    assert Scalar.parse("1/2+1/3*i") == S("1/2", "1/3")
    assert Scalar.parse("2-i") == S(2, -1)
    with pytest.raises(DocumentError):
        Scalar.parse("")
    with pytest.raises(DocumentError):
        Scalar.parse("1+2+3")


def test_integrality():
    assert S(3).is_nonneg_integer()
    assert not S(-3).is_nonneg_integer()
    assert S(-3).is_integer()
    assert not S("1/2").is_integer()
    assert not S(1, 1).is_integer()


def test_sqrt_exact():
    assert S(4).sqrt() == S(2)
    assert S(0, 2).sqrt() == S(1, 1)  # (1+i)^2 = 2i
    assert S(-9).sqrt() == S(0, 3)
    assert S(2).sqrt() is None
    assert S("9/4").sqrt() == S("3/2")
    a = S("3/5", "4/5")
    root = (a * a).sqrt()
    assert root is not None and root * root == a * a


@given(scalars)
def test_sqrt_of_square(a):
    root = (a * a).sqrt()
    assert root is not None
    assert root * root == a * a


def test_nth_root():
    assert S(8).nth_root(3) == S(2)
    assert S(16).nth_root(4) in (S(2), S(-2), S(0, 2), S(0, -2))
    assert S(-8).nth_root(3) == S(-2)
    assert S(5).nth_root(3) is None


def test_integer_cache():
    assert integer(7) == S(7)
    assert integer(7) is integer(7)
