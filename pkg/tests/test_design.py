import math
from fractions import Fraction

import numpy as np
import pytest

from bigs import EnumerationCapError, ValidationError
from bigs.design import IidDraws, Srswor, as_fraction, design_from_json

UNITS4 = ("i1", "i2", "i3", "i4")


def test_as_fraction_decimal_floats():
    assert as_fraction(0.2) == Fraction(1, 5)
    assert as_fraction("0.4375") == Fraction(7, 16)
    assert as_fraction(Fraction(3, 7)) == Fraction(3, 7)
    with pytest.raises(ValidationError):
        as_fraction(float("nan"))


class TestSrswor:
    def test_inclusion_probs(self):
        d = Srswor(("a", "b", "c", "d", "e"), 2)
        assert d.unit_inclusion_prob("c") == Fraction(2, 5)
        d4 = Srswor(UNITS4, 2)
        assert d4.joint_unit_inclusion_prob("i1", "i2") == Fraction(1, 6)
        assert d4.joint_unit_inclusion_prob("i1", "i1") == Fraction(1, 2)

    def test_exclusion_and_motif_probs(self):
        d = Srswor(UNITS4, 2)
        assert d.exclusion_prob({"i1", "i2"}) == Fraction(1, 6)
        assert d.exclusion_prob(UNITS4) == 0
        assert d.motif_inclusion_prob({"i1", "i2"}) == Fraction(5, 6)
        assert d.motif_inclusion_prob(UNITS4) == 1

    def test_joint_motif_disjoint_singletons(self):
        d = Srswor(UNITS4, 2)
        # Example-1 motif pair (k1, k3): ancestors {i1, i2} and {i3}.
        pi = d.joint_motif_inclusion_prob({"i1", "i2"}, {"i3"})
        assert pi == Fraction(1, 3)

    def test_validation(self):
        with pytest.raises(ValidationError):
            Srswor(UNITS4, 0)
        with pytest.raises(ValidationError):
            Srswor(UNITS4, 5)
        with pytest.raises(ValidationError):
            Srswor(UNITS4, 2).unit_inclusion_prob("zz")
        with pytest.raises(ValidationError):
            Srswor(UNITS4, 2).exclusion_prob(set())

    def test_enumeration_matches_closed_forms_exactly(self):
        d = Srswor(UNITS4, 2)
        space = d.enumerate_sample_space()
        assert len(space) == 6
        assert sum(p for _, p in space) == 1
        for i in UNITS4:
            assert sum(p for s, p in space if i in s) == d.unit_inclusion_prob(i)
        for B in ({"i1"}, {"i1", "i2"}, {"i2", "i3", "i4"}):
            assert sum(p for s, p in space if not (s & B)) == d.exclusion_prob(B)
        for i in UNITS4:
            for j in UNITS4:
                assert (sum(p for s, p in space if i in s and j in s)
                        == d.joint_unit_inclusion_prob(i, j))

    def test_enumeration_sizes_and_cap(self):
        assert len(Srswor(tuple("abcde"), 2).enumerate_sample_space()) == 10
        with pytest.raises(EnumerationCapError):
            Srswor(tuple(f"u{i}" for i in range(40)), 20).enumerate_sample_space(cap=1000)

    def test_draw_sample_deterministic(self):
        d = Srswor(tuple("abcde"), 2)
        s1 = d.draw_sample(np.random.default_rng(11))
        s2 = d.draw_sample(np.random.default_rng(11))
        assert s1 == s2 and len(s1) == 2 and s1 <= set("abcde")

    def test_draw_sample_empirical_frequencies(self):
        d = Srswor(tuple("abcde"), 2)
        reps = 10 ** 5
        rng = np.random.default_rng(2024)
        counts = {u: 0 for u in d.units}
        for _ in range(reps):
            for u in d.draw_sample(rng):
                counts[u] += 1
        pi = 2 / 5
        bound = 4 * math.sqrt(pi * (1 - pi) / reps)
        for u in d.units:
            assert abs(counts[u] / reps - pi) < bound


class TestIidDraws:
    def lis_like(self):
        return IidDraws(("1", "2"), n=4, p={"1": Fraction(7, 16), "2": Fraction(3, 16)})

    def test_unit_inclusion(self):
        d = self.lis_like()
        assert d.unit_inclusion_prob("1") == 1 - Fraction(9, 16) ** 4
        assert abs(float(d.unit_inclusion_prob("1")) - 0.899887) < 1e-6
        d1 = IidDraws(("a", "b"), n=1, p={"a": 0.3, "b": 0.7})
        assert d1.unit_inclusion_prob("a") == Fraction(3, 10)
        assert d1.joint_unit_inclusion_prob("a", "b") == 0

    def test_exclusion(self):
        d = IidDraws(("a", "b"), n=4, p={"a": 0.2, "b": 0.5})
        assert d.exclusion_prob({"a"}) == Fraction(256, 625)
        assert d.motif_inclusion_prob({"a"}) == Fraction(369, 625)
        with pytest.raises(ValidationError, match="exceeds 1"):
            IidDraws(("a", "b"), n=2, p={"a": 0.6, "b": 0.7}).exclusion_prob({"a", "b"})

    def test_nested_ancestors_joint_equals_smaller(self):
        d = IidDraws(("1", "2"), n=4, p={"1": 0.4375, "2": 0.1875})
        pi_1 = d.motif_inclusion_prob({"1"})
        assert d.joint_motif_inclusion_prob({"1"}, {"1", "2"}) == pi_1

    def test_override_used_and_missing(self):
        d = IidDraws(("a", "b"), n=2, p={"a": 0.6, "b": 0.7},
                     joint_exclusion_override=[("k1", "k2", 0.05)])
        got = d.joint_motif_inclusion_prob({"a"}, {"b"}, pair=("k2", "k1"))
        expected = (1 - Fraction(2, 5) ** 2 - Fraction(3, 10) ** 2
                    + Fraction(1, 20))
        assert got == expected
        with pytest.raises(ValidationError, match="joint_exclusion_override"):
            d.joint_motif_inclusion_prob({"a"}, {"b"}, pair=("k9", "k1"))

    def test_validation(self):
        with pytest.raises(ValidationError):
            IidDraws(("a",), n=0, p={"a": 0.5})
        with pytest.raises(ValidationError):
            IidDraws(("a",), n=2, p={})
        with pytest.raises(ValidationError):
            IidDraws(("a",), n=2, p={"a": 0})
        with pytest.raises(ValidationError):
            IidDraws(("a", "b"), n=1, p={"a": 0.5, "b": 0.5},
                     joint_exclusion_override=[("k1", "k1", 0.5)])

    def test_enumeration_product_measure(self):
        d = IidDraws(("a", "b"), n=2, p={"a": 0.3, "b": 0.7})
        space = d.enumerate_sample_space()
        assert len(space) == 4
        probs = sorted(p for _, p in space)
        assert probs == [Fraction(9, 100), Fraction(21, 100),
                         Fraction(21, 100), Fraction(49, 100)]
        assert sum(p for _, p in space) == 1

    def test_enumeration_with_idle_mass(self):
        d = IidDraws(("a",), n=2, p={"a": 0.25})
        space = d.enumerate_sample_space()
        assert len(space) == 4
        assert sum(p for _, p in space) == 1
        empties = [draws for draws, _ in space if draws == (frozenset(), frozenset())]
        assert len(empties) == 1

    def test_enumeration_requires_proper_mass_and_cap(self):
        heavy = IidDraws(("a", "b"), n=2, p={"a": 0.6, "b": 0.7})
        with pytest.raises(ValidationError, match="recorded draws"):
            heavy.enumerate_sample_space()
        wide = IidDraws(tuple(f"u{i}" for i in range(10)), n=8,
                        p={f"u{i}": Fraction(1, 10) for i in range(10)})
        with pytest.raises(EnumerationCapError):
            wide.enumerate_sample_space(cap=100)

    def test_enumeration_matches_closed_forms_exactly(self):
        d = IidDraws(("a", "b", "c"), n=3, p={"a": 0.2, "b": 0.3, "c": 0.5})
        space = d.enumerate_sample_space()
        assert sum(p for _, p in space) == 1
        for u in d.units:
            got = sum(p for draws, p in space if any(u in dr for dr in draws))
            assert got == d.unit_inclusion_prob(u)
        for i in d.units:
            for j in d.units:
                got = sum(p for draws, p in space
                          if any(i in dr for dr in draws)
                          and any(j in dr for dr in draws))
                assert got == d.joint_unit_inclusion_prob(i, j)
        for B in ({"a"}, {"a", "b"}, {"a", "b", "c"}):
            got = sum(p for draws, p in space
                      if not any(B & dr for dr in draws))
            assert got == d.exclusion_prob(B)

    def test_draw_sample_deterministic_and_frequencies(self):
        d = IidDraws(("a", "b", "c"), n=4,
                     p={"a": 0.2, "b": 0.5, "c": 0.3})
        assert (d.draw_sample(np.random.default_rng(3))
                == d.draw_sample(np.random.default_rng(3)))
        rng = np.random.default_rng(17)
        reps = 5000
        counts = {"a": 0, "b": 0, "c": 0}
        slots = 0
        for _ in range(reps):
            for draw in d.draw_sample(rng):
                slots += 1
                for u in draw:
                    counts[u] += 1
        for u, p in (("a", 0.2), ("b", 0.5), ("c", 0.3)):
            bound = 4 * math.sqrt(p * (1 - p) / slots)
            assert abs(counts[u] / slots - p) < bound


def test_motif_inclusion_monotone_in_ancestor_set():
    rng = np.random.default_rng(5)
    srs = Srswor(tuple(f"u{i}" for i in range(7)), 3)
    iid = IidDraws(tuple(f"u{i}" for i in range(7)), n=3,
                   p={f"u{i}": Fraction(1, 10) for i in range(7)})
    for d in (srs, iid):
        for _ in range(30):
            size_small = int(rng.integers(1, 6))
            small = {f"u{int(i)}" for i in rng.choice(7, size_small, replace=False)}
            extra = {f"u{int(i)}" for i in rng.choice(7, int(rng.integers(0, 3)), replace=False)}
            assert (d.motif_inclusion_prob(small | extra)
                    >= d.motif_inclusion_prob(small))


def test_design_from_json():
    d = design_from_json({"design": {"type": "srswor", "m": 2}}, UNITS4)
    assert isinstance(d, Srswor) and d.m == 2
    d = design_from_json(
        {"type": "iid_draws", "n": 4, "p": {"a": 0.4375, "b": 0.5625},
         "joint_exclusion_override": [["k1", "k4", 0.009067]]},
        ("a", "b"))
    assert isinstance(d, IidDraws)
    assert d.p["a"] == Fraction(7, 16)
    assert d.joint_exclusion_override[frozenset({"k1", "k4"})] == Fraction("0.009067")
    round_trip = design_from_json(d.to_json(), ("a", "b"))
    assert round_trip.p == d.p
    assert round_trip.joint_exclusion_override == d.joint_exclusion_override
    with pytest.raises(ValidationError):
        design_from_json({"type": "poisson"}, UNITS4)
    with pytest.raises(ValidationError):
        design_from_json({"type": "srswor"}, UNITS4)
