"""Brute-force oracles: every transform quantity recomputed by enumerating
fiber cylinders instead of contracting matrices.

These are deliberately slow reference paths (O(k^n) instead of O(n k^2)) used
to cross-check the fast code. The numpy variants vectorize over the word
arrays; the _exact variants walk words one by one with rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

from .equilibrium import UnstableFiberMeasure
from .potentials import birkhoff_sum, birkhoff_weight, shift_reduce
from .shiftspace import ShiftSpace, TwoSidedCylinder, Word, as_word, \
    shifted_cylinder_constraints
from .transform import TransformJob, _merge_constraints


def admissible_words_array(space: ShiftSpace, length: int) -> np.ndarray:
    """All admissible words of the given length, lexicographic, as int8 rows."""
    if length < 1:
        raise ValueError("length must be >= 1")
    cur = np.arange(space.k, dtype=np.int8).reshape(-1, 1)
    for _ in range(length - 1):
        succ = space.matrix_bool[cur[:, -1].astype(np.int64)]
        rows, syms = np.nonzero(succ)
        cur = np.concatenate([cur[rows], syms.astype(np.int8).reshape(-1, 1)], axis=1)
    return cur


@dataclass(eq=False)
class FiberTable:
    """All fiber words of a fixed depth with their masses and relative weights.

    The entry (log) masses come from the fiber chain of G1; cum_rel[:, j] is
    log exp(S_j(G2 - G1)) so Z_n and friends are plain masked sums.
    """

    job: TransformJob
    depth: int
    words: np.ndarray
    log_mass: np.ndarray
    cum_rel: np.ndarray

    def constraint_mask(self, constraints: dict[int, int]) -> np.ndarray:
        mask = np.ones(len(self.words), dtype=bool)
        for c, s in constraints.items():
            if c >= self.depth:
                raise ValueError(
                    f"constraint at coordinate {c} exceeds table depth {self.depth}")
            mask &= self.words[:, c] == s
        return mask

    def weighted_sum(self, n: int, constraints: dict[int, int]) -> float:
        if n > self.depth - self.job.block_length:
            raise ValueError("table too shallow for this n")
        mask = self.constraint_mask(constraints)
        if not mask.any():
            return 0.0
        return float(np.exp(self.log_mass[mask] + self.cum_rel[mask, n]).sum())


def fiber_table(job: TransformJob, depth: int) -> FiberTable:
    """Enumerate the fiber to the given depth (depth >= n + block_length)."""
    space = job.space
    nb = job.block_length
    rec = job.state1.recoding
    words = admissible_words_array(space, depth)
    # fiber membership: the first symbol must follow the past
    ok = space.matrix_bool[job.past.symbol(-1)][words[:, 0].astype(np.int64)]
    words = words[ok]
    # block path of each word, with the past block prepended
    prefix = np.array(job.past.suffix(nb), dtype=np.int8)
    ext = np.concatenate([np.tile(prefix, (len(words), 1)), words], axis=1)
    if nb == 1:
        path = ext                      # block index == symbol; keep int8
    else:
        codes = np.zeros((len(words), depth + 1), dtype=np.int64)
        for j in range(depth + 1):
            code = np.zeros(len(words), dtype=np.int64)
            for t in range(nb):
                code = code * space.k + ext[:, j + t].astype(np.int64)
            codes[:, j] = code
        path = rec.flat_lookup[codes]
    q = job.state1.q
    w_rel = np.where(job.state1.form.support,
                     np.exp(job.state2.form.values - job.state1.form.values), 0.0)
    with np.errstate(divide="ignore"):
        log_q = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), -np.inf)
        log_rel = np.where(w_rel > 0, np.log(np.where(w_rel > 0, w_rel, 1.0)), -np.inf)
    log_mass = log_q[path[:, :-1], path[:, 1:]].sum(axis=1)
    # weighted edges are steps nb .. nb+j-1 for S_j
    rel_steps = log_rel[path[:, nb:-1], path[:, nb + 1:]]
    cum = np.concatenate([np.zeros((len(words), 1)), np.cumsum(rel_steps, axis=1)],
                         axis=1)
    return FiberTable(job=job, depth=depth, words=words, log_mass=log_mass,
                      cum_rel=cum)


def _table_for(job: TransformJob, n: int, extra_depth: int = 0,
               table: Optional[FiberTable] = None) -> FiberTable:
    need = n + job.block_length + extra_depth
    if table is not None:
        if table.depth < need:
            raise ValueError(f"supplied table depth {table.depth} < needed {need}")
        return table
    return fiber_table(job, need)


def z_enum(job: TransformJob, n: int, table: Optional[FiberTable] = None) -> float:
    t = _table_for(job, n, table=table)
    num = t.weighted_sum(n, job.pin_constraints)
    if job.pinned:
        num /= fiber_mass_enum(job.fiber, job.pinned)
    if job.normalization == "pressure":
        num *= math.exp(n * job.state1.pressure)
    return num


def k_enum(job: TransformJob, n: int, constraints: dict[int, int],
           table: Optional[FiberTable] = None) -> float:
    cons = _merge_constraints(job, constraints)
    if cons is None:
        return 0.0
    extra = max([c + 1 - (n + job.block_length) for c in cons] + [0])
    t = _table_for(job, n, extra_depth=extra, table=table)
    num = t.weighted_sum(n, cons)
    if job.pinned:
        num /= fiber_mass_enum(job.fiber, job.pinned)
    if job.normalization == "pressure":
        num *= math.exp(n * job.state1.pressure)
    return num


def lambda_enum(job: TransformJob, n: int, word, offset: int = 0,
                table: Optional[FiberTable] = None) -> float:
    cons = {offset + t: s for t, s in enumerate(as_word(word))}
    num = k_enum(job, n, cons, table=table)
    den = z_enum(job, n, table=table)
    return num / den


def pushforward_enum(job: TransformJob, n: int, i: int, cyl: TwoSidedCylinder,
                     table: Optional[FiberTable] = None) -> float:
    fc = shifted_cylinder_constraints(job.space, cyl, job.past, i)
    if fc is None:
        return 0.0
    cons = _merge_constraints(job, fc.coordinates())
    if cons is None:
        return 0.0
    if cons == job.pin_constraints:
        return 1.0
    return k_enum(job, n, fc.coordinates(), table=table) / z_enum(job, n, table=table)


def mu_n_enum(job: TransformJob, n: int, cyl: TwoSidedCylinder,
              table: Optional[FiberTable] = None) -> float:
    total = 0.0
    for i in range(n):
        total += pushforward_enum(job, n, i, cyl, table=table)
    return total / n


def _iter_fiber_words(space: ShiftSpace, first_from: int, length: int) -> Iterator[Word]:
    def extend(prefix: Word) -> Iterator[Word]:
        if len(prefix) == length:
            yield prefix
            return
        for s in space.successors[prefix[-1]]:
            yield from extend(prefix + (s,))

    for first in space.successors[first_from]:
        yield from extend((first,))


def fiber_mass_enum(fiber: UnstableFiberMeasure, word, offset: int = 0) -> float:
    """Fiber cylinder mass by full enumeration of the leading coordinates."""
    cons = {offset + t: s for t, s in enumerate(as_word(word))}
    for t, s in enumerate(fiber.pinned):
        if cons.get(t, s) != s:
            return 0.0
        cons[t] = s
    num = _fiber_sum_enum(fiber, cons)
    if fiber.pinned:
        num /= _fiber_sum_enum(fiber, {t: s for t, s in enumerate(fiber.pinned)})
    return num


def _fiber_sum_enum(fiber: UnstableFiberMeasure, cons: dict[int, int]) -> float:
    state = fiber.state
    rec = state.recoding
    nb = rec.length
    space = state.space
    length = max(cons, default=-1) + 1
    if length == 0:
        return 1.0
    total = 0.0
    prefix = fiber.past.suffix(nb)
    for w in _iter_fiber_words(space, fiber.past.symbol(-1), length):
        if any(w[c] != s for c, s in cons.items()):
            continue
        ext = prefix + w
        mass = 1.0
        for j in range(length):
            a = rec.block_of(ext[j:j + nb])
            b = rec.block_of(ext[j + 1:j + 1 + nb])
            mass *= float(state.q[a, b])
        total += mass
    return total


def _exact_word_value(job: TransformJob, w: Word, n: int) -> Fraction:
    """mass * exp(S_n(G2 - G1)) of one fiber word, all rational."""
    ex1 = job.state1.require_exact()
    rec = job.state1.recoding
    nb = rec.length
    ext = job.past.suffix(nb) + w
    mass = Fraction(1)
    for j in range(len(w)):
        a = rec.block_of(ext[j:j + nb])
        b = rec.block_of(ext[j + 1:j + 1 + nb])
        mass *= ex1.q[a][b]
    rel = (birkhoff_weight(job.g2, w, n) / birkhoff_weight(job.g1, w, n))
    return mass * rel


def k_enum_exact(job: TransformJob, n: int,
                 constraints: dict[int, int]) -> Fraction:
    cons = _merge_constraints(job, constraints)
    if cons is None:
        return Fraction(0)
    length = max(max(cons, default=-1) + 1, n + job.block_length)
    total = Fraction(0)
    for w in _iter_fiber_words(job.space, job.past.symbol(-1), length):
        if any(w[c] != s for c, s in cons.items()):
            continue
        total += _exact_word_value(job, w, n)
    if job.normalization == "pressure":
        total *= job.require_exact().rho1 ** n
    if job.pinned:
        total /= job.fiber._pin_mass_exact
    return total


def z_enum_exact(job: TransformJob, n: int) -> Fraction:
    return k_enum_exact(job, n, {})


def pushforward_enum_exact(job: TransformJob, n: int, i: int,
                           cyl: TwoSidedCylinder) -> Fraction:
    fc = shifted_cylinder_constraints(job.space, cyl, job.past, i)
    if fc is None:
        return Fraction(0)
    cons = _merge_constraints(job, fc.coordinates())
    if cons is None:
        return Fraction(0)
    if cons == job.pin_constraints:
        return Fraction(1)
    return k_enum_exact(job, n, fc.coordinates()) / z_enum_exact(job, n)


def mu_n_enum_exact(job: TransformJob, n: int, cyl: TwoSidedCylinder) -> Fraction:
    total = Fraction(0)
    for i in range(n):
        total += pushforward_enum_exact(job, n, i, cyl)
    return total / n


def bowen_sum_enum(potential, n: int) -> float:
    """(1/n) log sum over (n+r-1)-words of exp(S_n G), by direct enumeration."""
    reduced = shift_reduce(potential)
    length = n + reduced.future_window - 1
    total = 0.0
    for w in reduced.space.admissible_words(length):
        total += math.exp(birkhoff_sum(reduced, w, n))
    return math.log(total) / n
