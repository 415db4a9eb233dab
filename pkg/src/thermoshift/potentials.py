"""Locally constant potentials: tables over admissible windows, Birkhoff sums,
variation profiles, and the one-sided (homologous) reduction G o sigma^m.

A potential with window (m, r) depends on coordinates -m..r-1 and is stored as
a table over the admissible (m+r)-words. Tables are the primary
representation: every quantity downstream is then exactly computable. A
potential may carry exact positive rational weights exp(G) alongside the
float values; those enable the exact-arithmetic pipelines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .errors import InadmissibleWordError, PotentialTableError, WordLengthError
from .shiftspace import ShiftSpace, Word, WordLike, as_word


@dataclass(frozen=True, eq=False)
class LocallyConstantPotential:
    space: ShiftSpace
    past_window: int
    future_window: int
    table: Mapping[Word, float]
    exact_weights: Optional[Mapping[Word, Fraction]] = None

    @property
    def window(self) -> tuple[int, int]:
        return self.past_window, self.future_window

    @property
    def window_length(self) -> int:
        return self.past_window + self.future_window

    @property
    def one_sided(self) -> bool:
        return self.past_window == 0

    @property
    def has_exact(self) -> bool:
        return self.exact_weights is not None

    @cached_property
    def max_abs(self) -> float:
        return max(abs(v) for v in self.table.values())

    def value(self, window_word: WordLike) -> float:
        w = as_word(window_word)
        try:
            return self.table[w]
        except KeyError:
            raise InadmissibleWordError(
                f"{w} is not an admissible window of length {self.window_length}")

    def weight(self, window_word: WordLike) -> Fraction:
        """Exact exp(G) on a window; only for potentials built from weights."""
        if self.exact_weights is None:
            raise PotentialTableError(
                "potential carries no exact weights; build it from rational weights")
        w = as_word(window_word)
        try:
            return self.exact_weights[w]
        except KeyError:
            raise InadmissibleWordError(
                f"{w} is not an admissible window of length {self.window_length}")


def _required_windows(space: ShiftSpace, length: int) -> set[Word]:
    return set(space.admissible_words(length))


def _format_words(words, limit: int = 8) -> str:
    listed = sorted(words)
    shown = ", ".join("".join(map(str, w)) for w in listed[:limit])
    if len(listed) > limit:
        shown += f", ... ({len(listed)} total)"
    return shown


def from_table(space: ShiftSpace, window: tuple[int, int], entries: Mapping,
               exact_weights: Optional[Mapping] = None) -> LocallyConstantPotential:
    """Build a potential from (window word -> value) entries.

    Entries must cover the admissible windows exactly; missing and superfluous
    windows are named. Values must be finite reals (infinite weights such as
    log 0 are rejected).
    """
    m, r = int(window[0]), int(window[1])
    if m < 0 or r < 1:
        raise ValueError(f"window must satisfy m >= 0, r >= 1, got {(m, r)}")
    table = {as_word(w): float(v) for w, v in entries.items()}
    required = _required_windows(space, m + r)
    missing = required - set(table)
    extra = set(table) - required
    if missing:
        raise PotentialTableError(
            f"table is missing admissible windows: {_format_words(missing)}")
    if extra:
        raise PotentialTableError(
            f"table has entries for inadmissible or wrong-length windows: "
            f"{_format_words(extra)}")
    for w, v in table.items():
        if not math.isfinite(v):
            raise PotentialTableError(
                f"value for window {''.join(map(str, w))} is not finite: {v}")
    exact = None
    if exact_weights is not None:
        exact = {as_word(w): Fraction(x) for w, x in exact_weights.items()}
        if set(exact) != required:
            raise PotentialTableError("exact weights must cover the same windows")
        if any(x <= 0 for x in exact.values()):
            raise PotentialTableError("exact weights must be positive")
    return LocallyConstantPotential(space=space, past_window=m, future_window=r,
                                    table=table, exact_weights=exact)


def from_weights(space: ShiftSpace, window: tuple[int, int],
                 weights: Mapping) -> LocallyConstantPotential:
    """Build a potential from exact positive rational weights exp(G)."""
    exact = {as_word(w): Fraction(x) for w, x in weights.items()}
    values = {w: math.log(x) for w, x in exact.items()}
    return from_table(space, window, values, exact_weights=exact)


def zero_potential(space: ShiftSpace) -> LocallyConstantPotential:
    return from_weights(space, (0, 1), {(s,): Fraction(1) for s in range(space.k)})


def constant_potential(space: ShiftSpace, c: float) -> LocallyConstantPotential:
    return from_table(space, (0, 1), {(s,): float(c) for s in range(space.k)})


def constant_weight_potential(space: ShiftSpace, weight) -> LocallyConstantPotential:
    """Constant potential log(weight) with the weight kept exact."""
    w = Fraction(weight)
    return from_weights(space, (0, 1), {(s,): w for s in range(space.k)})


def bernoulli_potential(space: ShiftSpace, probs: Sequence) -> LocallyConstantPotential:
    """G(x) = log p_{x_0} for a probability vector p; weights stay exact."""
    ps = [Fraction(p) for p in probs]
    if len(ps) != space.k:
        raise ValueError(f"need {space.k} probabilities, got {len(ps)}")
    if any(p <= 0 for p in ps):
        raise ValueError("probabilities must be positive")
    if sum(ps) != 1:
        raise ValueError(f"probabilities must sum to 1, got {sum(ps)}")
    return from_weights(space, (0, 1), {(s,): ps[s] for s in range(space.k)})


def random_potential(space: ShiftSpace, window: tuple[int, int], rng,
                     scale: float = 0.4) -> LocallyConstantPotential:
    """Uniform random values in [-scale, scale] on the admissible windows."""
    m, r = window
    words = sorted(_required_windows(space, m + r))
    values = rng.uniform(-scale, scale, size=len(words))
    return from_table(space, window, dict(zip(words, values)))


def birkhoff_sum(potential: LocallyConstantPotential, word: WordLike, n: int) -> float:
    """S_n G on the cylinder of `word`, which starts at coordinate -m.

    The word must pin the whole sum: length >= n + m + r - 1. A shorter word
    raises WordLengthError carrying the required length instead of being
    extended silently.
    """
    w = potential.space.check_admissible(word)
    if n < 1:
        raise ValueError("Birkhoff sum needs n >= 1")
    m, r = potential.window
    required = n + m + r - 1
    if len(w) < required:
        raise WordLengthError(
            f"word of length {len(w)} cannot pin S_{n}G for window {(m, r)}; "
            f"need length >= {required} (word starts at coordinate {-m})",
            required=required)
    width = m + r
    return sum(potential.table[w[t:t + width]] for t in range(n))


def birkhoff_weight(potential: LocallyConstantPotential, word: WordLike,
                    n: int) -> Fraction:
    """Exact exp(S_n G) on the cylinder of `word` (word starts at -m)."""
    if potential.exact_weights is None:
        raise PotentialTableError(
            "potential carries no exact weights; build it from rational weights")
    w = potential.space.check_admissible(word)
    m, r = potential.window
    required = n + m + r - 1
    if len(w) < required:
        raise WordLengthError(
            f"word of length {len(w)} cannot pin S_{n}G for window {(m, r)}; "
            f"need length >= {required}", required=required)
    width = m + r
    out = Fraction(1)
    for t in range(n):
        out *= potential.exact_weights[w[t:t + width]]
    return out


@dataclass(frozen=True)
class VariationProfile:
    """var_l = sup |G(x) - G(y)| over points agreeing on coordinates -l..l.

    Non-increasing, and identically zero from max(m, r-1) on.
    """

    values: tuple[float, ...]

    def var(self, level: int) -> float:
        if level < 0:
            raise ValueError("variation level must be >= 0")
        if level < len(self.values):
            return self.values[level]
        return 0.0


def variation_profile(potential: LocallyConstantPotential) -> VariationProfile:
    m, r = potential.window
    cut = max(m, r - 1)
    values = []
    for level in range(cut + 1):
        lo = max(-level, -m)
        hi = min(level, r - 1)
        groups: dict[Word, list[float]] = {}
        for w, v in potential.table.items():
            key = w[lo + m:hi + m + 1]
            groups.setdefault(key, []).append(v)
        spread = max((max(vs) - min(vs) for vs in groups.values()), default=0.0)
        values.append(spread)
    return VariationProfile(values=tuple(values))


def shift_reduce(potential: LocallyConstantPotential, extra: int = 0
                 ) -> LocallyConstantPotential:
    """G o sigma^{m+extra}: one-sided, homologous to G, window (0, m+r+extra).

    Pressure and equilibrium cylinder measures are unchanged (the composition
    with the shift is a coboundary away from G). For a one-sided potential
    with extra=0 this is the identity.
    """
    if extra < 0:
        raise ValueError("extra shift must be >= 0")
    m, r = potential.window
    if m == 0 and extra == 0:
        return potential
    width = m + r
    new_len = width + extra
    space = potential.space
    table = {}
    exact = {} if potential.exact_weights is not None else None
    for w in space.admissible_words(new_len):
        key = w[extra:extra + width]
        table[w] = potential.table[key]
        if exact is not None:
            exact[w] = potential.exact_weights[key]
    return LocallyConstantPotential(space=space, past_window=0,
                                    future_window=new_len, table=table,
                                    exact_weights=exact)


def widen(potential: LocallyConstantPotential, future_window: int
          ) -> LocallyConstantPotential:
    """Re-express the same function with a larger future window (no-op values)."""
    m, r = potential.window
    if future_window < r:
        raise ValueError("widen cannot shrink the window")
    if future_window == r:
        return potential
    width = m + r
    space = potential.space
    table = {}
    exact = {} if potential.exact_weights is not None else None
    for w in space.admissible_words(m + future_window):
        key = w[:width]
        table[w] = potential.table[key]
        if exact is not None:
            exact[w] = potential.exact_weights[key]
    return LocallyConstantPotential(space=space, past_window=m,
                                    future_window=future_window, table=table,
                                    exact_weights=exact)
