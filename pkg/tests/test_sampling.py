import numpy as np
import pytest

from ivkkt.manifold import LogOrthant, SpdCone
from ivkkt.sampling import Box, alpha_grid, check_box, sample_pairs, sample_points


def test_box_parse():
    b = Box.parse("0.5:2, -1:1")
    assert b.dim == 2 and str(b) == "0.5:2,-1:1"
    assert b.contains([1.0, 0.0]) and not b.contains([3.0, 0.0])
    for bad in ["", "1", "0:1:2", "a:b"]:
        with pytest.raises(ValueError):
            Box.parse(bad)
    with pytest.raises(ValueError):
        check_box(LogOrthant(3), b)


def test_sample_points_deterministic_and_valid():
    m = SpdCone(2)
    box = Box(((0.5, 2.0), (0.5, 2.0), (-1.5, 1.5)))
    a = sample_points(m, box, 50, seed=1)
    b = sample_points(m, box, 50, seed=1)
    c = sample_points(m, box, 50, seed=2)
    assert len(a) == 50
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
    for p in a:
        assert np.all(np.linalg.eigvalsh(p) > 0)
        assert box.contains(m.to_params(p))
    assert sample_points(m, box, 0) == []


def test_pairs():
    assert alpha_grid(3).tolist() == [0.25, 0.5, 0.75]
    m = LogOrthant(2)
    box = Box(((0.5, 2.0), (0.5, 2.0)))
    extra = [(np.array([1.0, 1.0]), np.array([2.0, 2.0]))]
    s = sample_pairs(m, box, 5, 3, extra=extra)
    assert len(s.pairs) == 6 and np.array_equal(s.pairs[0][1], [2.0, 2.0])
    np.testing.assert_allclose(s.midpoints[0][1], [np.sqrt(2), np.sqrt(2)])
    anchored = sample_pairs(m, box, 5, 3, anchor=[1.0, 1.0])
    assert all(np.array_equal(p, [1.0, 1.0]) for p, _ in anchored.pairs)
