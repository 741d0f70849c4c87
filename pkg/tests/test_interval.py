import math

import pytest

from ivkkt.interval import (
    Interval,
    gh_diff,
    hausdorff,
    interval_sum,
    leq_cw,
    leq_lu,
    lt_cw,
    lt_lu,
    parse_interval,
    scale,
    tuple_lt_cw,
    tuple_lt_lu,
)


def test_construction_and_views():
    a = Interval(1, 5)
    assert (a.lo, a.hi) == (1.0, 5.0)
    assert a.center == 3.0 and a.half_width == 2.0
    assert Interval.from_center_width(3, 2) == a
    assert Interval.point(2).is_degenerate
    assert str(a) == "[1, 5]"


@pytest.mark.parametrize("lo,hi", [(2, 1), (math.nan, 1), (0, math.inf)])
def test_invalid_bounds_rejected(lo, hi):
    with pytest.raises(ValueError):
        Interval(lo, hi)


def test_negative_half_width_rejected():
    with pytest.raises(ValueError):
        Interval.from_center_width(0, -1)


def test_arithmetic():
    a, b = Interval(1, 2), Interval(-3, 4)
    assert a + b == Interval(-2, 6)
    assert -a == Interval(-2, -1)
    assert 2 * b == Interval(-6, 8)
    assert scale(-2, b) == Interval(-8, 6)
    assert interval_sum([a, b, a]) == Interval(-1, 8)


def test_gh_difference_examples():
    assert gh_diff(Interval(1, 5), Interval(0, 1)) == Interval(1, 4)
    assert gh_diff(Interval(0, 1), Interval(1, 5)) == Interval(-4, -1)
    # defined even when the Hukuhara difference does not exist
    assert gh_diff(Interval(0, 1), Interval(0, 3)) == Interval(-2, 0)


def test_hausdorff():
    assert hausdorff(Interval(0, 1), Interval(0.5, 3)) == 2.0
    assert hausdorff(Interval(1, 2), Interval(1, 2)) == 0.0


def test_lu_and_cw_orders_differ():
    a, b = Interval(0, 4), Interval(1, 3)
    # a is wider but has lower lower bound: LU-incomparable, CW: same center, wider
    assert not leq_lu(a, b) and not leq_lu(b, a)
    assert lt_cw(b, a) and not leq_cw(a, b)
    c = Interval(0, 2)
    assert lt_lu(c, b) and lt_cw(c, b)
    assert not lt_lu(b, b) and leq_lu(b, b)


def test_tuple_strictness_needs_one_strict_component():
    a = (Interval(0, 1), Interval(2, 3))
    b = (Interval(0, 1), Interval(2, 4))
    assert tuple_lt_lu(a, b)
    assert not tuple_lt_lu(a, a)
    assert tuple_lt_cw((Interval(0, 1),), (Interval(0, 2),))
    with pytest.raises(ValueError):
        tuple_lt_lu(a, a[:1])
    with pytest.raises(ValueError):
        tuple_lt_lu((), ())


def test_parse_interval():
    assert parse_interval(" [ -1.5, 2 ] ") == Interval(-1.5, 2)
    for bad in ["1, 2", "[1]", "[1, 2, 3]", "[2, 1]"]:
        with pytest.raises(ValueError):
            parse_interval(bad)
