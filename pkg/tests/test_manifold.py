import math

import numpy as np
import pytest

from ivkkt.expr import constant_value
from ivkkt.manifold import (
    Euclidean,
    InvalidPointError,
    LogOrthant,
    SpdCone,
    make_manifold,
    parse_point,
)


def test_make_manifold():
    assert isinstance(make_manifold("euclidean", 2), Euclidean)
    assert isinstance(make_manifold("logorthant", 2), LogOrthant)
    assert isinstance(make_manifold("spd", 2), SpdCone)
    with pytest.raises(ValueError):
        make_manifold("sphere", 2)


def test_euclidean_is_flat():
    m = Euclidean(2)
    p, q = np.array([1.0, 2.0]), np.array([4.0, -2.0])
    np.testing.assert_array_equal(m.log(p, q), q - p)
    assert m.distance(p, q) == 5.0
    np.testing.assert_allclose(m.geodesic(p, q, 0.5), (p + q) / 2)


def test_log_orthant_geodesic_is_componentwise_power():
    m = LogOrthant(2)
    p, q = np.array([1.0, 1.0]), np.array([math.e**2, 4.0])
    np.testing.assert_allclose(m.log(p, q), [2.0, math.log(4)])
    np.testing.assert_allclose(m.geodesic(p, q, 0.5), [math.e, 2.0])
    assert m.distance(p, q) == pytest.approx(math.hypot(2.0, math.log(4)))
    # metric <u, v>_p = sum u_i v_i / p_i^2
    assert m.inner(np.array([2.0, 1.0]), np.array([2.0, 0.0]), np.array([2.0, 3.0])) == pytest.approx(1.0)
    assert m.norm(p, m.log(p, q)) == pytest.approx(m.distance(p, q))


def test_log_orthant_rejects_non_positive():
    m = LogOrthant(2)
    with pytest.raises(InvalidPointError):
        m.check_point([1.0, 0.0])
    with pytest.raises(InvalidPointError):
        m.check_point([1.0])


def test_spd_geodesic_and_features():
    m = SpdCone(2)
    p = np.eye(2)
    q = np.diag([math.e**2, 1.0])
    np.testing.assert_allclose(m.geodesic(p, q, 0.5), np.diag([math.e, 1.0]), atol=1e-12)
    np.testing.assert_allclose(m.log(p, q), np.diag([2.0, 0.0]), atol=1e-12)
    assert m.distance(p, q) == pytest.approx(2.0)
    f = m.features(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert f["ldet"] == pytest.approx(math.log(3.0))
    assert f["tr"] == 4.0
    assert m.feature_names == ("ldet", "tr")


def test_spd_affine_invariance():
    rng = np.random.default_rng(3)
    m = SpdCone(3)
    a = rng.normal(size=(3, 3))
    p, q = a @ a.T + np.eye(3), np.eye(3) * 2
    g = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    assert m.distance(g @ p @ g.T, g @ q @ g.T) == pytest.approx(m.distance(p, q), rel=1e-9)


def test_spd_parameter_order_is_diagonal_first():
    m = SpdCone(3)
    x = np.array([1.0, 2.0, 3.0, 0.1, 0.2, 0.3])
    p = m.from_params(x)
    assert p[0, 1] == 0.1 and p[0, 2] == 0.2 and p[1, 2] == 0.3
    np.testing.assert_array_equal(m.to_params(p), x)
    batch = m.batch_features(x[None, :])
    assert batch["ldet"][0] == pytest.approx(m.features(p)["ldet"])


def test_spd_rejects_bad_points():
    m = SpdCone(2)
    with pytest.raises(InvalidPointError):
        m.check_point(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(InvalidPointError):
        m.check_point(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(InvalidPointError):
        m.check_point(np.eye(3))
    with pytest.raises(ValueError):
        SpdCone(9)


def test_parse_point():
    lo = LogOrthant(2)
    np.testing.assert_allclose(parse_point(lo, "(exp(2), 1)", constant_value), [math.e**2, 1.0])
    spd = SpdCone(2)
    np.testing.assert_array_equal(parse_point(spd, "sym[2, 1, 3]"), [[2.0, 1.0], [1.0, 3.0]])
    with pytest.raises(InvalidPointError):
        parse_point(spd, "(1, 2)")
    with pytest.raises(InvalidPointError):
        parse_point(lo, "sym[1, 0, 1]")
    with pytest.raises(InvalidPointError):
        parse_point(spd, "sym[1, 0]")
    with pytest.raises(InvalidPointError):
        parse_point(lo, "1, 2")


def test_format_point():
    assert LogOrthant(2).format_point(np.array([1.0, 0.5])) == "(1, 0.5)"
    assert SpdCone(2).format_point(np.eye(2)) == "sym[1, 0, 1]"
