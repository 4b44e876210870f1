"""Group models: canonical encodings, group law, word metric, balls, growth."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convinv import (
    GroupError,
    LocallyFiniteModel,
    RadiusCapError,
    ZdModel,
    EnumerationCaps,
    group_from_config,
    growth_report,
)
from oracles import brute_force_word_lengths, heis_inv_matrix, heis_mult_matrix, z2_ball_size


def test_z_multiply_componentwise(z2):
    assert z2.multiply((1, 2), (3, -1)) == (4, 1)


def test_heisenberg_multiply_matches_matrix_oracle(heis):
    assert heis.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = tuple(int(v) for v in rng.integers(-5, 6, size=3))
        y = tuple(int(v) for v in rng.integers(-5, 6, size=3))
        assert heis.multiply(x, y) == heis_mult_matrix(x, y)


def test_locally_finite_multiply_symmetric_difference(lf):
    assert lf.multiply(frozenset({1, 3}), frozenset({3, 5})) == frozenset({1, 5})


def test_inverse_examples(z1, heis, lf):
    assert z1.inverse((5,)) == (-5,)
    assert heis.inverse((1, 1, 1)) == (-1, -1, 0)
    assert lf.inverse(frozenset({2, 7})) == frozenset({2, 7})


def test_heisenberg_inverse_matches_matrix_oracle(heis):
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = tuple(int(v) for v in rng.integers(-6, 7, size=3))
        assert heis.inverse(x) == heis_inv_matrix(x)
        assert heis.multiply(x, heis.inverse(x)) == heis.identity


def test_word_length_examples(z1, heis, lf):
    assert z1.word_length((7,)) == 7
    assert heis.word_length((0, 0, 1)) == 4
    assert z1.word_length(z1.identity) == 0
    assert heis.word_length(heis.identity) == 0
    assert lf.word_length(lf.identity) == 0


@pytest.mark.parametrize("model_name,n_max", [("z2", 4), ("heis", 4)])
def test_bfs_matches_brute_force(model_name, n_max, request):
    model = request.getfixturevalue(model_name)
    oracle = brute_force_word_lengths(
        model.identity, model.generators, model.multiply, n_max
    )
    for x, n in oracle.items():
        assert model.word_length(x) == n
    # and the ball contains exactly the oracle's elements
    assert set(model.ball(n_max)) == set(oracle)


def test_ball_sizes(z1, z2):
    assert set(z1.ball(3)) == {(n,) for n in range(-3, 4)}
    assert len(z2.ball(2)) == 13
    for n in range(7):
        assert len(z2.ball(n)) == z2_ball_size(n)
    assert z2.ball(0) == [z2.identity]


def test_shell_sizes_closed_form_matches_enumeration(z2, heis):
    enum = [len(s) for s in z2.shells(8)]
    assert list(z2.shell_sizes(8)) == enum
    bfs = [len(s) for s in heis.shells(6)]
    assert list(heis.shell_sizes(6)) == bfs


def test_locally_finite_chain(lf):
    sizes = [len(s) for s in lf.shells(5)]
    assert sizes == [1, 1, 2, 4, 8, 16]
    assert sum(sizes) == 2**5
    assert lf.word_length(frozenset({2})) == 3


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=2),
       st.lists(st.integers(-20, 20), min_size=2, max_size=2))
@settings(max_examples=200, deadline=None)
def test_word_length_subadditive_and_symmetric(x, y):
    model = ZdModel(2)
    x, y = tuple(x), tuple(y)
    assert model.word_length(model.multiply(x, y)) <= model.word_length(x) + model.word_length(y)
    assert model.word_length(model.inverse(x)) == model.word_length(x)


def test_heisenberg_word_length_subadditive(heis):
    ball = heis.ball(3)
    for x in ball:
        assert heis.word_length(heis.inverse(x)) == heis.word_length(x)
        for y in ball:
            assert heis.word_length(heis.multiply(x, y)) <= (
                heis.word_length(x) + heis.word_length(y)
            )


def test_ball_nesting_and_shell_sums(heis):
    sizes = [len(heis.ball(n)) for n in range(7)]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    shells = heis.shell_sizes(6)
    assert list(np.cumsum(shells)) == sizes


def test_growth_report_z(z1, z2):
    rep1 = growth_report(z1, 20)
    assert abs(rep1.fitted_exponent - 1.0) <= 0.2
    rep2 = growth_report(z2, 20)
    assert abs(rep2.fitted_exponent - 2.0) <= 0.3


def test_growth_report_validation(z1, lf):
    with pytest.raises(ValueError):
        growth_report(z1, 2)
    with pytest.raises(GroupError):
        growth_report(lf, 8)


def test_radius_cap(z1):
    capped = ZdModel(1, EnumerationCaps(radius=4, elements=100))
    with pytest.raises(RadiusCapError):
        capped.ball(5)


def test_mismatched_encoding_rejected(z2, heis):
    with pytest.raises(GroupError):
        z2.multiply((1, 2, 3), (0, 0))
    with pytest.raises(GroupError):
        heis.validate((1, 2))
    with pytest.raises(GroupError):
        LocallyFiniteModel().validate([-1])


def test_group_from_config_roundtrip():
    m = group_from_config({"family": "Z", "dimension": 2, "caps": {"radius": 8}})
    assert isinstance(m, ZdModel) and m.dimension == 2 and m.caps.radius == 8
    assert group_from_config({"family": "heisenberg"}).family == "heisenberg"
    assert group_from_config({"family": "locally_finite"}).family == "locally_finite"
    with pytest.raises(GroupError):
        group_from_config({"family": "free"})
