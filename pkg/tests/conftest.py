from fractions import Fraction

import pytest
from hypothesis import strategies as st

from hankelmoments import DiscreteMeasure


def rational_points_and_weights(max_points=6):
    """Strategy: a rational measure with distinct points inside (-1, 1)."""
    point = st.fractions(
        min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=12
    )
    weight = st.fractions(
        min_value=Fraction(1, 12), max_value=Fraction(3), max_denominator=12
    )
    return (
        st.lists(point, min_size=1, max_size=max_points, unique=True)
        .flatmap(
            lambda pts: st.tuples(
                st.just(sorted(pts)),
                st.lists(weight, min_size=len(pts), max_size=len(pts)),
            )
        )
        .map(lambda pw: DiscreteMeasure(tuple(pw[0]), tuple(pw[1])))
    )


@pytest.fixture
def three_point_measure():
    return DiscreteMeasure(
        (Fraction(-1, 2), Fraction(0), Fraction(1, 2)),
        (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)),
    )
