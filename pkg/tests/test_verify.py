from fractions import Fraction

import pytest

from lib.errors import CapacityError, InputError
from lib.lexopt import Allocation, LevelDecomposition
from lib.verify import EquilibriumVerifier

F = Fraction


@pytest.fixture
def four_cycle(make_instance):
    return make_instance([(1, 2), (2, 3), (3, 4), (1, 4)], {1: 1, 2: 1, 3: 1, 4: 1})


def test_structure_of_solver_output(solver, verifier, six_node):
    g, d = six_node
    report = verifier.check_structure(g, d, solver.peel_solve(g, d))
    assert report.passed
    assert report.find("middle level").ok
    assert report.find("v1 < 1 < vK").ok


def test_structure_flags_unbalanced_levels(verifier, path3):
    g, d = path3
    wrong = LevelDecomposition.from_ratios({1: F(1, 3), 2: F(3), 3: F(1, 3)}, d)
    report = verifier.check_structure(g, d, wrong)
    assert not report.passed
    assert not report.find("Σ_L1 r").ok
    assert report.find("v1·v2 = 1").ok


def test_structure_flags_a_broken_partition(verifier, path3):
    g, d = path3
    partial = LevelDecomposition((F(1, 2),), (frozenset({1, 3}),), {1: F(1, 2), 3: F(1, 2)}, {})
    report = verifier.check_structure(g, d, partial)
    assert not report.passed
    assert not report.find("level sets partition N").ok


def test_flat_structure(solver, verifier, four_cycle):
    g, d = four_cycle
    dec = solver.peel_solve(g, d)
    report = verifier.check_structure(g, d, dec)
    assert report.passed
    assert report.find("K = 1 gives v1 = 1").ok


def test_extracted_allocation_is_an_equilibrium(solver, verifier, six_node):
    g, d = six_node
    dec = solver.peel_solve(g, d)
    alloc = solver.extract_allocation(g, d, dec)
    assert verifier.check_sharing_equilibrium(g, d, alloc, dec).passed


def test_several_allocations_share_one_equilibrium(solver, verifier, four_cycle):
    g, d = four_cycle
    dec = solver.peel_solve(g, d)
    around = Allocation({(1, 2): F(1), (2, 3): F(1), (3, 4): F(1), (4, 1): F(1)})
    pairs = Allocation({(1, 2): F(1), (2, 1): F(1), (3, 4): F(1), (4, 3): F(1)})
    assert verifier.check_sharing_equilibrium(g, d, around, dec).passed
    assert verifier.check_sharing_equilibrium(g, d, pairs, dec).passed


def test_transfer_to_a_richer_neighbour_is_flagged(solver, verifier, six_node):
    g, d = six_node
    dec = solver.peel_solve(g, d)
    transfers = dict(solver.extract_allocation(g, d, dec).transfers)
    del transfers[(3, 4)]
    transfers[(3, 2)] = F(10)
    report = verifier.check_sharing_equilibrium(g, d, Allocation(transfers), dec)
    assert not report.passed
    assert not report.find("d_3->2 goes to a minimum-ratio neighbour").ok


def test_transfer_off_the_edges_is_flagged(solver, verifier, path3):
    g, d = path3
    dec = solver.peel_solve(g, d)
    alloc = Allocation({(1, 3): F(1), (3, 2): F(1), (2, 1): F(1, 2), (2, 3): F(1, 2)})
    report = verifier.check_sharing_equilibrium(g, d, alloc, dec)
    assert not report.passed
    assert not report.find("d_13 on an edge").ok


def test_no_blocking_coalition_at_the_optimum(solver, verifier, six_node):
    g, d = six_node
    stability = verifier.find_blocking_coalition(g, d, solver.peel_solve(g, d))
    assert stability.passed
    assert stability.checked_coalitions == 2**6 - 1
    assert stability.to_dict()["blocking"] is None


def test_zero_rates_are_blocked(verifier, path3):
    g, d = path3
    zero = LevelDecomposition.from_ratios({1: F(0), 2: F(0), 3: F(0)}, d)
    stability = verifier.find_blocking_coalition(g, d, zero)
    assert not stability.passed
    coalition = stability.blocking.coalition
    rates = stability.blocking.improving_rates
    assert len(coalition) == 2
    assert all(rates[i] >= 0 for i in coalition)
    assert any(rates[i] > 0 for i in coalition)
    assert sum(rates.values()) <= d.total(g.neighborhood(coalition))


def test_weak_search_improves_every_member(verifier, path3):
    g, d = path3
    zero = LevelDecomposition.from_ratios({1: F(0), 2: F(0), 3: F(0)}, d)
    stability = verifier.find_blocking_coalition(g, d, zero, strict_all=True)
    assert stability.blocking.coalition == {1, 2}
    assert stability.blocking.improving_rates == {1: F(1, 2), 2: F(1, 2)}
    assert stability.to_dict()["name"] == "weak-stability"


def test_weak_search_finds_nothing_at_the_optimum(solver, verifier, six_node):
    g, d = six_node
    assert verifier.find_blocking_coalition(g, d, solver.peel_solve(g, d), strict_all=True).passed


def test_sampled_mode(solver, verifier, six_node):
    g, d = six_node
    stability = verifier.find_blocking_coalition(g, d, solver.peel_solve(g, d), mode="sampled", budget=40, seed=7)
    assert stability.passed
    assert stability.mode == "sampled"
    assert stability.checked_coalitions == 40


def test_exhaustive_cap(solver, path3):
    g, d = path3
    capped = EquilibriumVerifier({"verify": {"exhaustive_cap": 2}})
    with pytest.raises(CapacityError):
        capped.find_blocking_coalition(g, d, solver.peel_solve(g, d))


def test_unknown_mode(solver, verifier, path3):
    g, d = path3
    with pytest.raises(InputError):
        verifier.find_blocking_coalition(g, d, solver.peel_solve(g, d), mode="greedy")
