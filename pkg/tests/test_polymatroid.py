from fractions import Fraction

import pytest

from lib.errors import CapacityError, InputError
from lib.polymatroid import (
    all_extreme_points,
    base_separation,
    check_submodular,
    extreme_point,
    f_value,
    in_base,
)

F = Fraction


def test_f_on_path(path3):
    g, d = path3
    assert f_value(g, d, {1}) == 1
    assert f_value(g, d, {1, 3}) == 1
    assert f_value(g, d, {2}) == 2
    assert f_value(g, d, {1, 2, 3}) == 3
    assert f_value(g, d, set()) == 0


def test_f_is_submodular_exhaustively(six_node):
    g, d = six_node
    report = check_submodular(g, d, trials=50, seed=3)
    assert report.exhaustive
    assert report.passed
    assert report.pairs_checked == 50 + 2**6 * 2**6


def test_submodularity_on_random_instances(random_instances):
    for g, d in random_instances(10, n_max=9, seed=11):
        assert check_submodular(g, d, trials=20, seed=1).passed


def test_check_submodular_needs_trials(path3):
    g, d = path3
    with pytest.raises(InputError):
        check_submodular(g, d, trials=0, seed=0)


def test_base_membership_on_path(path3):
    g, d = path3
    assert in_base(g, d, {1: F(1, 2), 2: F(2), 3: F(1, 2)})
    assert not in_base(g, d, {1: F(1), 2: F(1), 3: F(1)})
    assert not in_base(g, d, {1: F(1, 2), 2: F(1), 3: F(1, 2)})
    assert not in_base(g, d, {1: F(-1), 2: F(3), 3: F(1)})


def test_in_base_respects_its_cap(path3):
    g, d = path3
    with pytest.raises(CapacityError, match="base_separation"):
        in_base(g, d, {1: F(1, 2), 2: F(2), 3: F(1, 2)}, cap=2)


def test_rates_must_cover_the_nodes(path3):
    g, d = path3
    with pytest.raises(InputError):
        in_base(g, d, {1: F(1), 2: F(2)})


def test_base_separation_reports_most_violated_set(path3):
    g, d = path3
    member, gap, witness = base_separation(g, d, {1: F(1), 2: F(1), 3: F(1)})
    assert not member
    assert gap == -1
    assert witness == {1, 3}


def test_extreme_point_marginals(path3):
    g, d = path3
    assert extreme_point(g, d, [1, 2, 3]) == {1: 1, 2: 2, 3: 0}
    assert extreme_point(g, d, [2, 1, 3]) == {1: 1, 2: 2, 3: 0}
    assert extreme_point(g, d, [1, 3, 2]) == {1: 1, 2: 2, 3: 0}
    with pytest.raises(InputError):
        extreme_point(g, d, [1, 2])


def test_extreme_points_lie_in_the_base(random_instances):
    for g, d in random_instances(8, n_max=5, seed=5):
        for point in all_extreme_points(g, d):
            assert in_base(g, d, point)
            member, gap, _ = base_separation(g, d, point)
            assert member and gap >= 0


def test_oracles_agree_on_perturbed_points(random_instances):
    for g, d in random_instances(8, n_max=6, seed=9):
        point = extreme_point(g, d, list(g.node_ids))
        first, second = g.node_ids[0], g.node_ids[-1]
        moved = dict(point)
        moved[first] += F(1, 3)
        moved[second] -= F(1, 3)
        assert in_base(g, d, moved) == base_separation(g, d, moved)[0]
