import numpy as np
import pytest

from trulr.exceptions import InvalidParameterError
from trulr.models.streams import RandomStream


def test_same_seed_and_id_reproduce_draws():
    a = RandomStream(42, 7).generator.random(5)
    b = RandomStream(42, 7).generator.random(5)
    assert np.array_equal(a, b)


def test_streams_are_independent_of_each_other():
    a = RandomStream(42, 0).generator.random(5)
    b = RandomStream(42, 1).generator.random(5)
    c = RandomStream(43, 0).generator.random(5)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_does_not_depend_on_creation_order():
    later = [RandomStream(5, i) for i in range(10)][3].generator.random(3)
    alone = RandomStream(5, 3).generator.random(3)
    assert np.array_equal(later, alone)


def test_spawn_is_reproducible_and_distinct():
    parent = RandomStream(11, 2)
    child = parent.spawn(0, 1).generator.random(4)
    again = RandomStream(11, 2).spawn(0, 1).generator.random(4)
    sibling = RandomStream(11, 2).spawn(1, 0).generator.random(4)
    assert np.array_equal(child, again)
    assert not np.array_equal(child, sibling)
    assert parent.spawn(3).spawn_key == (2, 3)


def test_rejects_out_of_range_seed():
    with pytest.raises(InvalidParameterError):
        RandomStream(-1)
    with pytest.raises(InvalidParameterError):
        RandomStream(2**64)
    RandomStream(2**64 - 1, 2**63)
