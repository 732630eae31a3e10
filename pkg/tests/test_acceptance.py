"""End-to-end properties of the solver, verifier and simulator on seeded batteries."""

import logging
from fractions import Fraction

import numpy as np
import pytest

from lib.dynamics import SharingSimulator, SimConfig, expected_step, level_sets
from lib.endowments import DistributionSpec, Endowments
from lib.lexopt import LevelDecomposition, LexOptSolver
from lib.network_generator import EndowmentProfile, GenSpec, NetworkGenerator
from lib.polymatroid import f_value, subset_tables

F = Fraction


@pytest.fixture(scope="module")
def battery(random_instances):
    """300 connected graphs with up to 12 nodes and random rational endowments."""
    return random_instances(300, n_max=12, seed=2024)


@pytest.fixture(scope="module")
def solved(battery):
    solver = LexOptSolver()
    return [(g, d, solver.peel_solve(g, d)) for g, d in battery]


def brute_min_ratio(g, d):
    """Exhaustive min f(S)/D(S) over nonempty S and the union of its minimisers."""
    f_table, d_table, _ = subset_tables(g, d, d.means)
    best_f, best_d = int(f_table[1]), int(d_table[1])
    for mask in range(2, 2 ** len(g)):
        if int(f_table[mask]) * best_d < best_f * int(d_table[mask]):
            best_f, best_d = int(f_table[mask]), int(d_table[mask])
    union = 0
    for mask in range(1, 2 ** len(g)):
        if int(f_table[mask]) * best_d == best_f * int(d_table[mask]):
            union |= mask
    members = frozenset(i for k, i in enumerate(g.node_ids) if union >> k & 1)
    return F(best_f, best_d), members


def test_six_node_reproduction(solver, verifier, six_node):
    g, d = six_node
    dec = solver.peel_solve(g, d)
    assert dec.K == 3
    assert dec.levels == (F(1, 2), F(1), F(2))
    assert [dec.received[i] for i in g.node_ids] == [20, 40, 10, 10, 60, 30]
    assert solver.certify_lexopt(g, d, dec).passed
    assert g.is_independent(dec.level_sets[0])


@pytest.mark.slow
def test_complete_graphs_have_at_most_two_levels(solver, random_instances):
    for g, d in random_instances(200, n_max=10, seed=5, complete=True):
        dec = solver.peel_solve(g, d)
        top = max(g.node_ids, key=lambda i: d.means[i])
        dominant = d.means[top] > d.total(set(g.node_ids) - {top})
        assert dec.K <= 2
        assert (dec.K == 2) == dominant
        if dominant:
            assert dec.level_sets[0] == {top}


@pytest.mark.slow
def test_homogeneous_lattice_is_flat(solver):
    g, d = NetworkGenerator().generate(GenSpec("lattice", EndowmentProfile.homogeneous(30), rows=5, cols=6))
    dec = solver.peel_solve(g, d)
    assert dec.levels == (F(1),)
    assert set(dec.ratios.values()) == {1}


@pytest.mark.slow
@pytest.mark.parametrize("p", [0.1, 0.2])
def test_homogeneous_random_graphs_are_certified(solver, p, caplog):
    caplog.set_level(logging.WARNING, logger="lib.lexopt")
    generator = NetworkGenerator()
    split = []
    for seed in range(20):
        g, d = generator.generate(GenSpec("er", EndowmentProfile.homogeneous(30), seed=seed, n=30, p=p))
        dec = solver.peel_solve(g, d)
        assert solver.certify_lexopt(g, d, dec).passed
        if dec.K == 1:
            assert set(dec.ratios.values()) == {1}
        else:
            split.append(seed)
    warned = [r for r in caplog.records if "Homogeneous endowments split" in r.getMessage()]
    assert len(warned) == len(split)


def test_hotspots_and_hubs_create_levels(solver):
    generator = NetworkGenerator()
    hot = EndowmentProfile.hotspots(30, 300, count=2)
    g, d = generator.generate(GenSpec("lattice", hot, seed=6, rows=5, cols=6))
    assert solver.peel_solve(g, d).K > 1
    g, d = generator.generate(GenSpec("ba", EndowmentProfile.homogeneous(30), seed=6, n=30, m=1, power=2.0))
    assert solver.peel_solve(g, d).K > 1


@pytest.mark.slow
def test_solver_output_is_certified(solver, solved):
    for g, d, dec in solved:
        assert solver.certify_lexopt(g, d, dec).passed


@pytest.mark.slow
def test_min_ratio_matches_enumeration(solver, battery):
    for g, d in battery:
        assert solver.min_ratio(g, d, g.node_ids) == brute_min_ratio(g, d)


@pytest.mark.slow
def test_structure_holds_on_every_output(verifier, solved):
    for g, d, dec in solved:
        report = verifier.check_structure(g, d, dec)
        assert report.passed, report.failures


@pytest.mark.slow
def test_structure_and_certificate_agree_on_swapped_ratios(solver, verifier, random_instances):
    rng = np.random.default_rng(17)
    rejected = 0
    for g, d in random_instances(150, n_max=7, seed=17):
        base = solver.peel_solve(g, d)
        for _ in range(20):
            i, j = (int(x) for x in rng.choice(g.node_ids, size=2, replace=False))
            ratios = dict(base.ratios)
            ratios[i], ratios[j] = ratios[j], ratios[i]
            dec = LevelDecomposition.from_ratios(ratios, d)
            structure = verifier.check_structure(g, d, dec).passed
            assert structure == solver.certify_lexopt(g, d, dec).passed
            rejected += not structure
    assert rejected > 0


@pytest.mark.slow
def test_no_blocking_coalition(verifier, solved):
    small = [(g, d, dec) for g, d, dec in solved if len(g) <= 10][:100]
    for g, d, dec in small:
        stability = verifier.find_blocking_coalition(g, d, dec)
        assert stability.passed
        assert stability.checked_coalitions == 2 ** len(g) - 1


@pytest.mark.slow
def test_extracted_allocations_are_equilibria(solver, verifier, solved):
    for g, d, dec in solved:
        alloc = solver.extract_allocation(g, d, dec)
        report = verifier.check_sharing_equilibrium(g, d, alloc, dec)
        assert report.passed, report.failures


@pytest.mark.slow
def test_policy_converges_on_the_homogeneous_lattice():
    g, d = NetworkGenerator().generate(GenSpec("lattice", EndowmentProfile.homogeneous(30), rows=5, cols=6))
    reference = {i: F(30) for i in g.node_ids}
    trace = SharingSimulator(g, d, SimConfig(steps=2000, record_every=10), reference=reference).run()
    by_t = {record.t: record for record in trace.records}
    assert max(abs(x - 1) for x in by_t[100].rho) <= 0.1
    assert max(abs(x - 1) for x in by_t[2000].rho) <= 0.01
    assert by_t[2000].V < by_t[10].V


@pytest.mark.slow
def test_policy_converges_with_random_draws(solver, path3):
    g, _ = path3
    laws = {i: DistributionSpec.uniform(0, 2) for i in g.node_ids}
    d = Endowments.from_means({i: 1 for i in g.node_ids}, dists=laws)
    dec = solver.peel_solve(g, d)
    rho_star = np.array([float(dec.ratios[i]) for i in g.node_ids])
    close = 0
    for seed in range(20):
        cfg = SimConfig(steps=10_000, record_every=10, seed=seed)
        trace = SharingSimulator(g, d, cfg, reference=dec.received).run()
        final = trace.final()
        if np.max(np.abs(np.array(final.rho) - rho_star)) <= 0.05:
            close += 1
        assert final.V < trace.records[0].V
    assert close >= 18


@pytest.mark.slow
def test_expected_step_prefix_sums(solver, random_instances):
    rng = np.random.default_rng(99)
    for g, d in random_instances(100, n_max=12, seed=98):
        rho = {i: F(int(rng.integers(0, 6)), int(rng.integers(1, 4))) for i in g.node_ids}
        j = expected_step(g, d, rho)
        prefix = set()
        for level in level_sets(rho):
            prefix |= level
            assert sum(j[i] for i in prefix) == f_value(g, d, prefix)


@pytest.mark.slow
def test_expected_step_at_the_optimum(solved):
    for g, d, dec in solved:
        j = expected_step(g, d, dec.ratios)
        prefix = set()
        for level in dec.level_sets:
            prefix |= level
            assert sum(j[i] for i in prefix) == sum(dec.received[i] for i in prefix)


@pytest.mark.slow
@pytest.mark.parametrize("c", [F(2), F(1, 3), F(7)])
def test_scaling_endowments(solver, solved, c):
    for g, d, dec in solved[:100]:
        scaled_d = d.scaled(c)
        scaled = solver.peel_solve(g, scaled_d)
        assert scaled.ratios == dec.ratios
        assert scaled.received == {i: c * r for i, r in dec.received.items()}
        base = solver.extract_allocation(g, d, dec).transfers
        assert solver.extract_allocation(g, scaled_d, scaled).transfers == {k: c * v for k, v in base.items()}
