"""Initial sampling designs over the frame.

Two designs cover the worked examples and the simulation study:

* :class:`Srswor` -- simple random sampling without replacement of a
  fixed-size subset.
* :class:`IidDraws` -- independent draws, each selecting at most one unit
  according to fixed per-unit selection probabilities.  An optional
  joint-exclusion override table supplies, per motif pair, the probability
  that both ancestor sets are missed, for pairs where joint selection is
  geometry-dependent and the disjointness assumption behind the plain
  formula fails.

All probabilities are computed in exact rational arithmetic.  Floats given
as inputs are interpreted through their decimal representation, so a JSON
``0.2`` becomes exactly 1/5.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EnumerationCapError, ValidationError

DEFAULT_ENUM_CAP = 10 ** 6


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float."""
    if isinstance(x, bool):
        raise ValidationError(f"not a probability: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot interpret {x!r} as a number") from exc
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValidationError(f"not a finite probability: {x!r}")
        return Fraction(str(x))
    raise ValidationError(f"cannot interpret {x!r} as a probability")


class Srswor:
    """Simple random sampling without replacement: uniform m-subsets of the frame."""

    kind = "srswor"

    def __init__(self, units: Sequence[str], m: int):
        self.units = tuple(units)
        if len(set(self.units)) != len(self.units) or not self.units:
            raise ValidationError("frame must be a non-empty sequence of distinct unit ids")
        if not isinstance(m, int) or not 1 <= m <= len(self.units):
            raise ValidationError(f"sample size m={m!r} outside 1..{len(self.units)}")
        self.m = m
        self._pos = {u: i for i, u in enumerate(self.units)}

    @property
    def num_units(self) -> int:
        return len(self.units)

    def _require_known(self, unit: str) -> None:
        if unit not in self._pos:
            raise ValidationError(f"unknown unit {unit!r}")

    def unit_inclusion_prob(self, unit: str) -> Fraction:
        self._require_known(unit)
        return Fraction(self.m, self.num_units)

    def joint_unit_inclusion_prob(self, i: str, j: str) -> Fraction:
        self._require_known(i)
        self._require_known(j)
        if i == j:
            return self.unit_inclusion_prob(i)
        M, m = self.num_units, self.m
        return Fraction(m * (m - 1), M * (M - 1))

    def _subset(self, B: Iterable[str]) -> frozenset[str]:
        B = frozenset(B)
        if not B:
            raise ValidationError("exclusion set must be non-empty")
        for u in B:
            self._require_known(u)
        return B

    def exclusion_prob(self, B: Iterable[str]) -> Fraction:
        """Probability that the sample misses every unit in ``B``."""
        B = self._subset(B)
        M, m = self.num_units, self.m
        if M - len(B) < m:
            return Fraction(0)
        return Fraction(math.comb(M - len(B), m), math.comb(M, m))

    def motif_inclusion_prob(self, ancestors: Iterable[str]) -> Fraction:
        return 1 - self.exclusion_prob(ancestors)

    def joint_motif_inclusion_prob(self, ancestors_k: Iterable[str],
                                   ancestors_l: Iterable[str],
                                   pair: tuple[str, str] | None = None) -> Fraction:
        bk = self._subset(ancestors_k)
        bl = self._subset(ancestors_l)
        bar_k = self.exclusion_prob(bk)
        bar_l = self.exclusion_prob(bl)
        bar_union = self.exclusion_prob(bk | bl)
        return 1 - (bar_k + bar_l - bar_union)

    def sample_space_size(self) -> int:
        return math.comb(self.num_units, self.m)

    def enumerate_sample_space(self, cap: int = DEFAULT_ENUM_CAP
                               ) -> list[tuple[frozenset[str], Fraction]]:
        """All m-subsets with their probabilities; probabilities sum to 1."""
        total = self.sample_space_size()
        if total > cap:
            raise EnumerationCapError(
                f"sample space has {total} outcomes, above cap {cap}")
        prob = Fraction(1, total)
        return [(frozenset(c), prob)
                for c in itertools.combinations(self.units, self.m)]

    def draw_sample(self, rng: np.random.Generator) -> frozenset[str]:
        idx = rng.choice(self.num_units, size=self.m, replace=False)
        return frozenset(self.units[i] for i in idx)

    def to_json(self) -> dict:
        return {"type": "srswor", "m": self.m}

    def __repr__(self) -> str:
        return f"Srswor(M={self.num_units}, m={self.m})"


class IidDraws:
    """Independent draws, each selecting at most one unit with fixed probabilities.

    The per-unit masses need not sum to 1 over the whole frame (projection
    segments of a transect baseline are the canonical case), but any unit
    set whose exclusion probability is requested without an override must
    have total mass at most 1.
    """

    kind = "iid_draws"

    def __init__(self, units: Sequence[str], n: int, p: Mapping[str, object],
                 joint_exclusion_override: Iterable[tuple[str, str, object]]
                 | Mapping[frozenset[str], object] | None = None):
        self.units = tuple(units)
        if len(set(self.units)) != len(self.units) or not self.units:
            raise ValidationError("frame must be a non-empty sequence of distinct unit ids")
        if not isinstance(n, int) or n < 1:
            raise ValidationError(f"number of draws n={n!r} must be a positive integer")
        self.n = n
        self._pos = {u: i for i, u in enumerate(self.units)}
        missing = [u for u in self.units if u not in p]
        if missing:
            raise ValidationError(f"no selection probability for units {missing!r}")
        self.p: dict[str, Fraction] = {}
        for u in self.units:
            q = as_fraction(p[u])
            if not 0 < q <= 1:
                raise ValidationError(f"selection probability of {u!r} must be in (0, 1], got {p[u]!r}")
            self.p[u] = q

        self.joint_exclusion_override: dict[frozenset[str], Fraction] = {}
        if joint_exclusion_override:
            items = (joint_exclusion_override.items()
                     if isinstance(joint_exclusion_override, Mapping)
                     else ((frozenset({a, b}), v) for a, b, v in joint_exclusion_override))
            for key, value in items:
                key = frozenset(key)
                if len(key) != 2:
                    raise ValidationError(f"override key {set(key)!r} is not a motif pair")
                bar = as_fraction(value)
                if not 0 <= bar <= 1:
                    raise ValidationError(f"override for {set(key)!r} is not a probability")
                self.joint_exclusion_override[key] = bar

    @property
    def num_units(self) -> int:
        return len(self.units)

    def _require_known(self, unit: str) -> None:
        if unit not in self._pos:
            raise ValidationError(f"unknown unit {unit!r}")

    def unit_inclusion_prob(self, unit: str) -> Fraction:
        self._require_known(unit)
        return 1 - (1 - self.p[unit]) ** self.n

    def joint_unit_inclusion_prob(self, i: str, j: str) -> Fraction:
        self._require_known(i)
        self._require_known(j)
        if i == j:
            return self.unit_inclusion_prob(i)
        pi, pj = self.p[i], self.p[j]
        if pi + pj > 1:
            raise ValidationError(
                f"combined selection mass of {i!r}, {j!r} exceeds 1; "
                "joint inclusion is geometry-dependent under this design")
        return 1 - (1 - pi) ** self.n - (1 - pj) ** self.n + (1 - pi - pj) ** self.n

    def _subset(self, B: Iterable[str]) -> frozenset[str]:
        B = frozenset(B)
        if not B:
            raise ValidationError("exclusion set must be non-empty")
        for u in B:
            self._require_known(u)
        return B

    def exclusion_prob(self, B: Iterable[str]) -> Fraction:
        B = self._subset(B)
        mass = sum(self.p[u] for u in B)
        if mass > 1:
            raise ValidationError(
                f"combined selection mass of {sorted(B)!r} exceeds 1; "
                "supply a joint_exclusion_override entry for the motif pair")
        return (1 - mass) ** self.n

    def motif_inclusion_prob(self, ancestors: Iterable[str]) -> Fraction:
        return 1 - self.exclusion_prob(ancestors)

    def joint_motif_inclusion_prob(self, ancestors_k: Iterable[str],
                                   ancestors_l: Iterable[str],
                                   pair: tuple[str, str] | None = None) -> Fraction:
        bk = self._subset(ancestors_k)
        bl = self._subset(ancestors_l)
        bar_k = self.exclusion_prob(bk)
        bar_l = self.exclusion_prob(bl)
        if pair is not None and frozenset(pair) in self.joint_exclusion_override:
            bar_union = self.joint_exclusion_override[frozenset(pair)]
        else:
            bar_union = self.exclusion_prob(bk | bl)
        return 1 - (bar_k + bar_l - bar_union)

    def _total_mass(self) -> Fraction:
        return sum(self.p.values())

    def _require_proper(self, what: str) -> Fraction:
        total = self._total_mass()
        if total > 1:
            raise ValidationError(
                f"{what} requires total selection mass <= 1 over the frame, "
                f"got {float(total):.6g}; this design only supports recorded draws")
        return total

    def sample_space_size(self) -> int:
        total = self._total_mass()
        outcomes = self.num_units + (1 if total < 1 else 0)
        return outcomes ** self.n

    def enumerate_sample_space(self, cap: int = DEFAULT_ENUM_CAP
                               ) -> list[tuple[tuple[frozenset[str], ...], Fraction]]:
        """All ordered draw vectors with exact probabilities summing to 1.

        When the per-unit masses sum to less than 1, a draw may select no
        unit, represented by an empty set in the vector.
        """
        total = self._require_proper("enumeration")
        outcomes: list[tuple[frozenset[str], Fraction]] = [
            (frozenset({u}), self.p[u]) for u in self.units]
        if total < 1:
            outcomes.append((frozenset(), 1 - total))
        size = len(outcomes) ** self.n
        if size > cap:
            raise EnumerationCapError(f"sample space has {size} outcomes, above cap {cap}")
        space = []
        for combo in itertools.product(outcomes, repeat=self.n):
            prob = Fraction(1)
            for _, q in combo:
                prob *= q
            space.append((tuple(d for d, _ in combo), prob))
        return space

    def draw_sample(self, rng: np.random.Generator) -> tuple[frozenset[str], ...]:
        total = self._require_proper("sampling")
        probs = [float(self.p[u]) for u in self.units]
        none_prob = max(0.0, 1.0 - math.fsum(probs))
        probs.append(none_prob)
        probs = np.asarray(probs)
        probs /= probs.sum()
        picks = rng.choice(self.num_units + 1, size=self.n, p=probs)
        return tuple(
            frozenset({self.units[i]}) if i < self.num_units else frozenset()
            for i in picks)

    def to_json(self) -> dict:
        out = {
            "type": "iid_draws",
            "n": self.n,
            "p": {u: float(q) for u, q in self.p.items()},
        }
        if self.joint_exclusion_override:
            out["joint_exclusion_override"] = [
                [*sorted(key), float(value)]
                for key, value in sorted(self.joint_exclusion_override.items(),
                                         key=lambda kv: sorted(kv[0]))]
        return out

    def __repr__(self) -> str:
        return f"IidDraws(M={self.num_units}, n={self.n})"


Design = Srswor | IidDraws


def design_from_json(data: Mapping, units: Sequence[str]) -> Design:
    """Bind a design description to a frame.

    Accepts either the bare design object or one wrapped as
    ``{"design": {...}}``.
    """
    if "design" in data and isinstance(data["design"], Mapping):
        data = data["design"]
    kind = data.get("type")
    if kind == "srswor":
        if "m" not in data:
            raise ValidationError("srswor design needs a sample size 'm'")
        return Srswor(units, data["m"])
    if kind == "iid_draws":
        for key in ("n", "p"):
            if key not in data:
                raise ValidationError(f"iid_draws design needs {key!r}")
        return IidDraws(units, data["n"], data["p"],
                        data.get("joint_exclusion_override"))
    raise ValidationError(f"unknown design type {kind!r}")
