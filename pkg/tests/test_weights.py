from fractions import Fraction

import numpy as np
import pytest

from bigs import (CustomWeights, Multiplicity, Pida, ValidationError,
                  build_graph, constant_weights, ht_share_weights,
                  joint_priority_prob, observe, priority_indicator,
                  priority_prob, resolve_ordering)
from bigs.design import Srswor
from bigs.scenarios import becker_lis, example1
from conftest import random_graph, random_srswor


def test_multiplicity_weights():
    sc = example1()
    table = constant_weights(sc.graph, Multiplicity())
    assert table[("i1", "k1")] == Fraction(1, 2)
    assert table[("i2", "k1")] == Fraction(1, 2)
    assert table[("i2", "k2")] == 1
    assert table[("i3", "k3")] == 1


def test_lis_q_proportional_weights_exact():
    sc = becker_lis()
    smp = sc.observed_sample()
    table = constant_weights(smp, Pida(0), sc.design)
    assert table[("1", "k2")] == Fraction(7, 10)
    assert table[("2", "k2")] == Fraction(3, 10)
    assert table[("1", "k1")] == 1
    assert table[("6", "k4")] == 1


def test_lis_pida_half_weight():
    sc = becker_lis()
    table = constant_weights(sc.graph, Pida("0.5"), sc.design)
    assert abs(float(table[("1", "k2")]) - 0.6226) < 5e-4
    assert table[("1", "k2")] + table[("2", "k2")] == 1


def test_lis_gamma_that_recovers_equal_weights():
    sc = becker_lis()
    table = constant_weights(sc.graph, Pida("1.227"), sc.design)
    assert abs(float(table[("1", "k2")]) - 0.5) < 5e-3


def test_pida_gamma_zero_equals_multiplicity_under_srs():
    rng = np.random.default_rng(8)
    for _ in range(25):
        g = random_graph(rng)
        d = random_srswor(rng, g)
        assert (constant_weights(g, Pida(0), d)
                == constant_weights(g, Multiplicity(), d))


def test_pida_sums_exactly_one_even_for_irrational_gamma():
    rng = np.random.default_rng(9)
    for _ in range(25):
        g = random_graph(rng)
        d = random_srswor(rng, g)
        for gamma in (0, "0.5", 1, 2, "1.7"):
            table = constant_weights(g, Pida(gamma), d)
            for k in g.motifs:
                total = sum(table[(u, k)] for u in g.ancestors(k))
                assert total == 1
                for u in g.ancestors(k):
                    assert table[(u, k)] > 0


def test_custom_weights_validated():
    g = build_graph(["a", "b"], ["k"], [("a", "k"), ("b", "k")])
    good = CustomWeights({("a", "k"): 0.25, ("b", "k"): 0.75})
    table = constant_weights(g, good)
    assert table[("a", "k")] == Fraction(1, 4)
    bad = CustomWeights({("a", "k"): 0.6, ("b", "k"): 0.6})
    with pytest.raises(ValidationError, match="sum to"):
        constant_weights(g, bad)
    incomplete = CustomWeights({("a", "k"): 1.0})
    with pytest.raises(ValidationError, match="no weight"):
        constant_weights(g, incomplete)


def test_pida_needs_design_and_degrees():
    sc = example1()
    with pytest.raises(ValidationError, match="design"):
        constant_weights(sc.graph, Pida(1))


def test_ht_share_weights_example1():
    sc = example1()
    smp = observe(sc.graph, ["i1", "i2"])
    table = ht_share_weights(smp, sc.design)
    assert table[("i1", "k1")] == Fraction(3, 10)
    assert table[("i2", "k1")] == Fraction(3, 10)
    # The share identity: the weights put mass 1/pi_(k) on each motif.
    total = sum(table[(u, "k1")] / sc.design.unit_inclusion_prob(u)
                for u in ("i1", "i2"))
    assert total == 1 / sc.design.motif_inclusion_prob({"i1", "i2"})
    # Singleton intersection: W = pi_i / pi_(k).
    smp2 = observe(sc.graph, ["i1", "i3"])
    table2 = ht_share_weights(smp2, sc.design)
    assert table2[("i1", "k1")] == Fraction(1, 2) / Fraction(5, 6)


def test_ht_share_identity_property():
    rng = np.random.default_rng(10)
    for _ in range(25):
        g = random_graph(rng)
        d = random_srswor(rng, g)
        for s, _ in d.enumerate_sample_space():
            smp = observe(g, s)
            table = ht_share_weights(smp, d)
            for k in smp.sample_motifs:
                hit = smp.ancestry[k] & smp.s
                total = sum(table[(u, k)] / d.unit_inclusion_prob(u) for u in hit)
                assert total == 1 / d.motif_inclusion_prob(smp.ancestry[k])


def test_priority_indicator():
    sc = example1()
    smp = observe(sc.graph, ["i2", "i3"])
    chosen = priority_indicator(smp, sc.graph.units)
    assert chosen == {"k1": "i2", "k2": "i2", "k3": "i3"}
    smp_full = observe(sc.graph, sc.graph.units)
    chosen_full = priority_indicator(smp_full, sc.graph.units)
    assert chosen_full["k1"] == "i1"


def test_priority_prob_values():
    sc = example1()
    d, order = sc.design, sc.graph.units
    assert priority_prob(d, ("i1", "i2"), "i2", order) == Fraction(2, 3)
    assert priority_prob(d, ("i1", "i2"), "i1", order) == 1
    # All four units ahead: combinatorially impossible to be prioritized.
    assert priority_prob(d, ("i1", "i2", "i3", "i4"), "i4", order) == 0


def test_priority_prob_matches_enumeration_exactly():
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = random_graph(rng)
        d = random_srswor(rng, g)
        order = resolve_ordering(g, "random", seed=int(rng.integers(1000)))
        space = d.enumerate_sample_space()
        for k in g.motifs:
            for u in g.ancestors(k):
                num = Fraction(0)
                den = Fraction(0)
                for s, p in space:
                    if u not in s:
                        continue
                    den += p
                    if priority_indicator(observe(g, s), order).get(k) == u:
                        num += p
                assert num / den == priority_prob(d, g.ancestors(k), u, order)


def test_joint_priority_prob_cases():
    sc = example1()
    d, order = sc.design, sc.graph.units
    anc = {k: sc.graph.ancestors(k) for k in sc.graph.motifs}
    # Same motif, same unit reduces to the marginal.
    assert (joint_priority_prob(d, "i2", "k1", "i2", "k1", anc, order)
            == priority_prob(d, anc["k1"], "i2", order))
    # Same motif, different units: only one edge per motif is prioritized.
    assert joint_priority_prob(d, "i1", "k1", "i2", "k1", anc, order) == 0
    # Different motifs through the same unit.
    assert joint_priority_prob(d, "i2", "k1", "i2", "k2", anc, order) == Fraction(2, 3)
    # Blocking: i1 ranks ahead of i2 for k1, so (i2,k1) with (i1,k1)... use
    # a fixture where j is a higher-priority ancestor of kappa.
    g = build_graph(["a", "b"], [("k", 1), ("q", 1)],
                    [("a", "k"), ("b", "k"), ("b", "q")])
    d2 = Srswor(g.units, 2)
    anc2 = {k: g.ancestors(k) for k in g.motifs}
    assert joint_priority_prob(d2, "b", "k", "a", "q", anc2, g.units) == 0


def test_joint_priority_prob_matches_enumeration_exactly():
    rng = np.random.default_rng(12)
    checked = 0
    for _ in range(12):
        g = random_graph(rng, max_units=5, max_motifs=4)
        m = int(rng.integers(2, g.num_units + 1))
        d = Srswor(g.units, m)
        order = resolve_ordering(g, "random", seed=int(rng.integers(1000)))
        anc = {k: g.ancestors(k) for k in g.motifs}
        space = d.enumerate_sample_space()
        prioritized = {s: priority_indicator(observe(g, s), order) for s, _ in space}
        edges = list(g.edges)
        for i, ka in edges:
            for j, kb in edges:
                num = Fraction(0)
                den = Fraction(0)
                for s, p in space:
                    if i not in s or j not in s:
                        continue
                    den += p
                    if prioritized[s].get(ka) == i and prioritized[s].get(kb) == j:
                        num += p
                if den == 0:
                    continue
                assert num / den == joint_priority_prob(d, i, ka, j, kb, anc, order)
                checked += 1
    assert checked > 50


def test_resolve_ordering():
    sc = example1()
    g = sc.graph
    assert resolve_ordering(g, "natural") == g.units
    desc = resolve_ordering(g, "descending")
    assert desc[0] == "i2"  # the only unit with two successors
    asc = resolve_ordering(g, "ascending")
    assert asc[0] == "i4"  # zero successors sorts first
    r1 = resolve_ordering(g, "random", seed=4)
    assert sorted(r1) == sorted(g.units)
    assert r1 == resolve_ordering(g, "random", seed=4)
    assert resolve_ordering(g, ("i4", "i3", "i2", "i1")) == ("i4", "i3", "i2", "i1")
    with pytest.raises(ValidationError):
        resolve_ordering(g, ("i1", "i1", "i2", "i3"))
    with pytest.raises(ValidationError):
        resolve_ordering(g, "sideways")
