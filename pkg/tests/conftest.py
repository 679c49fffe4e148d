import random
from fractions import Fraction

import pytest

from connexa.scalars import Scalar


def rand_scalar(rng: random.Random, span: int = 4, gauss: bool = True) -> Scalar:
    re = Fraction(rng.randint(-span, span), rng.randint(1, 3))
    im = (
        Fraction(rng.randint(-span, span), rng.randint(1, 3))
        if gauss
        else Fraction(0)
    )
    return Scalar(re, im)


def rand_nonzero(rng: random.Random, span: int = 4) -> Scalar:
    while True:
        s = rand_scalar(rng, span)
        if not s.is_zero():
            return s


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
