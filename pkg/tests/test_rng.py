import numpy as np
import pytest

from utils.rng import RngStream


def test_child_streams_depend_only_on_seed_and_path():
    first = RngStream(5).child("augment", "l001", 0).random(4)
    RngStream(5).child("augment", "l002", 0).random(100)
    again = RngStream(5).child("augment", "l001", 0).random(4)
    assert np.array_equal(first, again)


def test_different_keys_give_different_streams():
    a = RngStream(5).child("augment", "l001", 0).random(4)
    b = RngStream(5).child("augment", "l001", 1).random(4)
    c = RngStream(6).child("augment", "l001", 0).random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_clone_replays_the_same_draws():
    stream = RngStream(1).child("x")
    stream.random()
    twin = stream.clone()
    assert stream.uniform(0, 1) == twin.uniform(0, 1)
    assert np.array_equal(stream.normal(1.0, (3,)), twin.normal(1.0, (3,)))


def test_integer_is_inclusive():
    stream = RngStream(0)
    draws = {stream.integer(1, 3) for _ in range(500)}
    assert draws == {1, 2, 3}


def test_sample_without_replacement_is_sorted_and_distinct():
    picks = RngStream(0).sample_without_replacement(50, 20)
    assert len(set(picks.tolist())) == 20
    assert picks.tolist() == sorted(picks.tolist())


def test_seed_must_be_unsigned():
    with pytest.raises(ValueError):
        RngStream(-1)
