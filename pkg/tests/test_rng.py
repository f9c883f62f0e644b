import numpy as np
import pytest

from paulisparse.rng import as_generator, child, stream


def test_named_streams_are_independent_and_reproducible():
    a = stream(1, "alpha").random(4)
    assert np.array_equal(a, stream(1, "alpha").random(4))
    assert not np.array_equal(a, stream(1, "beta").random(4))
    assert not np.array_equal(a, stream(2, "alpha").random(4))
    assert not np.array_equal(stream(1, "alpha", 0).random(4), stream(1, "alpha", 1).random(4))


def test_seed_required():
    with pytest.raises(ValueError):
        stream(None, "x")


def test_helpers():
    g = stream(0, "x")
    assert as_generator(g) is g
    assert np.array_equal(as_generator(5).random(2), stream(5, "default").random(2))
    assert np.array_equal(child(stream(0, "p"), "c").random(2), child(stream(0, "p"), "c").random(2))
