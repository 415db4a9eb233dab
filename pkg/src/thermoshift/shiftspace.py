"""Subshifts of finite type: transition structure, words, cylinders, pasts, fibers.

Symbols are 0..k-1. Words are plain tuples of ints; public constructors also
accept digit strings like "0110" for readability. All types are immutable
after construction and every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .errors import InadmissibleWordError, NonPrimitiveError
from .linalg import bool_matpow, int_matpow, primitivity_exponent

Word = tuple[int, ...]
WordLike = Union[Sequence[int], str]


def as_word(symbols: WordLike) -> Word:
    """Normalize a word-like value (digit string or int sequence) to a tuple."""
    if isinstance(symbols, str):
        return tuple(int(c) for c in symbols)
    return tuple(int(s) for s in symbols)


@dataclass(frozen=True)
class ShiftSpace:
    """A subshift of finite type over symbols 0..k-1 with 0/1 transition matrix.

    primitivity_exponent is the smallest m with matrix^m entrywise positive,
    or None when the matrix is not primitive (such spaces are representable,
    but every operation that needs topological mixing refuses them).
    metric_base is the base of the cylinder metric and is only used to
    translate ball radii into cylinder depths.
    """

    k: int
    matrix: tuple[tuple[int, ...], ...]
    metric_base: float = 0.5
    primitivity_exponent: Optional[int] = None

    @cached_property
    def matrix_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    @cached_property
    def matrix_bool(self) -> np.ndarray:
        return self.matrix_array > 0

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(j for j in range(self.k) if self.matrix[i][j])
                     for i in range(self.k))

    @property
    def is_primitive(self) -> bool:
        return self.primitivity_exponent is not None

    @property
    def is_full(self) -> bool:
        return all(all(row) for row in self.matrix)

    def require_primitive(self, operation: str) -> None:
        if not self.is_primitive:
            raise NonPrimitiveError(
                f"{operation} requires a primitive (mixing) transition matrix")

    def allows(self, a: int, b: int) -> bool:
        return bool(self.matrix[a][b])

    def first_violation(self, word: Word) -> Optional[tuple[int, int, int]]:
        """(position, a, b) of the first forbidden transition, or None."""
        for pos in range(len(word) - 1):
            if not self.matrix[word[pos]][word[pos + 1]]:
                return pos, word[pos], word[pos + 1]
        return None

    def is_admissible(self, word: WordLike) -> bool:
        w = as_word(word)
        if any(s < 0 or s >= self.k for s in w):
            return False
        return self.first_violation(w) is None

    def check_admissible(self, word: WordLike, what: str = "word") -> Word:
        w = as_word(word)
        for s in w:
            if s < 0 or s >= self.k:
                raise InadmissibleWordError(
                    f"{what} {w} uses symbol {s} outside alphabet 0..{self.k - 1}")
        hit = self.first_violation(w)
        if hit is not None:
            pos, a, b = hit
            raise InadmissibleWordError(
                f"{what} {w} is inadmissible: transition {a}->{b} "
                f"at position {pos} is forbidden")
        return w

    def admissible_words(self, n: int) -> Iterator[Word]:
        """Lazily enumerate admissible words of length n in lexicographic order."""
        if n < 1:
            raise ValueError("word length must be >= 1")

        def extend(prefix: Word) -> Iterator[Word]:
            if len(prefix) == n:
                yield prefix
                return
            for s in self.successors[prefix[-1]]:
                yield from extend(prefix + (s,))

        for first in range(self.k):
            yield from extend((first,))

    def count_words(self, n: int) -> int:
        """Exact number of admissible words of length n (big-integer safe)."""
        if n < 1:
            raise ValueError("word length must be >= 1")
        if n == 1:
            return self.k
        power = int_matpow([list(row) for row in self.matrix], n - 1)
        return sum(sum(row) for row in power)


def build_shift(k: int, matrix, metric_base: float = 0.5) -> ShiftSpace:
    """Validate and build a shift space; primitivity is computed up front.

    Rejects matrices with a zero row or column (stranded symbols). A
    non-primitive matrix is accepted but flagged; operations that need mixing
    refuse it later.
    """
    if k < 1:
        raise ValueError("alphabet size must be >= 1")
    rows = tuple(tuple(int(x) for x in row) for row in matrix)
    if len(rows) != k or any(len(row) != k for row in rows):
        raise ValueError(f"transition matrix must be {k}x{k}")
    for row in rows:
        for x in row:
            if x not in (0, 1):
                raise ValueError("transition matrix entries must be 0 or 1")
    for i, row in enumerate(rows):
        if not any(row):
            raise ValueError(
                f"row {i} of the transition matrix is zero; symbol {i} has no successor")
    for j in range(k):
        if not any(rows[i][j] for i in range(k)):
            raise ValueError(
                f"column {j} of the transition matrix is zero; symbol {j} has no predecessor")
    if not 0.0 < metric_base < 1.0:
        raise ValueError("metric_base must lie in (0, 1)")
    expo = primitivity_exponent(np.array(rows, dtype=bool))
    return ShiftSpace(k=k, matrix=rows, metric_base=metric_base,
                      primitivity_exponent=expo)


def full_shift(k: int, metric_base: float = 0.5) -> ShiftSpace:
    return build_shift(k, [[1] * k] * k, metric_base)


def golden_mean_shift(metric_base: float = 0.5) -> ShiftSpace:
    """Two symbols, 11 forbidden."""
    return build_shift(2, [[1, 1], [1, 0]], metric_base)


@dataclass(frozen=True)
class PastWord:
    """A left-infinite past: the finite word repeats periodically to the left.

    The rightmost symbol sits at coordinate -1. Locally constant data only
    ever reads a bounded suffix, which makes this representation lossless.
    """

    symbols: Word

    def symbol(self, coordinate: int) -> int:
        if coordinate > -1:
            raise ValueError("past coordinates are <= -1")
        return self.symbols[coordinate % len(self.symbols)]

    def suffix(self, length: int) -> Word:
        return tuple(self.symbol(m) for m in range(-length, 0))


def past_word(space: ShiftSpace, symbols: WordLike) -> PastWord:
    """Validate a past word, including the periodic wrap transition."""
    w = space.check_admissible(symbols, what="past word")
    if not w:
        raise ValueError("past word must be nonempty")
    if not space.allows(w[-1], w[0]):
        raise InadmissibleWordError(
            f"past word {w} has an inadmissible periodic extension: "
            f"wrap transition {w[-1]}->{w[0]} is forbidden")
    return PastWord(symbols=w)


@dataclass(frozen=True)
class TwoSidedCylinder:
    """The set of two-sided sequences matching `symbols` from coordinate `start`."""

    start: int
    symbols: Word

    @property
    def end(self) -> int:
        return self.start + len(self.symbols) - 1

    @property
    def span(self) -> int:
        return len(self.symbols)

    def symbol_at(self, coordinate: int) -> int:
        return self.symbols[coordinate - self.start]


def cylinder(space: ShiftSpace, start: int, symbols: WordLike) -> TwoSidedCylinder:
    w = space.check_admissible(symbols, what="cylinder word")
    if not w:
        raise ValueError("cylinder word must be nonempty")
    return TwoSidedCylinder(start=int(start), symbols=w)


@dataclass(frozen=True)
class TwoSidedPoint:
    """A spliced representative: periodic past glued to a finite future word.

    Coordinates < 0 come from the past, coordinates 0..len(future)-1 from the
    future word; other coordinates are not represented.
    """

    past: PastWord
    future: Word

    def symbol(self, coordinate: int) -> int:
        if coordinate <= -1:
            return self.past.symbol(coordinate)
        if coordinate < len(self.future):
            return self.future[coordinate]
        raise ValueError(
            f"coordinate {coordinate} is not represented (future has "
            f"{len(self.future)} symbols)")


def bracket(space: ShiftSpace, past: PastWord, future: WordLike) -> TwoSidedPoint:
    """Splice a past onto a future word; the anchor of an unstable fiber.

    Rejects an inadmissible splice, naming the forbidden transition.
    """
    w = space.check_admissible(future, what="future word")
    if not w:
        raise ValueError("future word must be nonempty")
    if not space.allows(past.symbol(-1), w[0]):
        raise InadmissibleWordError(
            f"bracket splice is inadmissible: transition "
            f"{past.symbol(-1)}->{w[0]} across coordinate 0 is forbidden")
    return TwoSidedPoint(past=past, future=w)


@dataclass(frozen=True)
class FiberConstraint:
    """Constraint y[offset + t] = symbols[t] on a one-sided fiber.

    An empty symbol tuple is the trivial constraint (the whole fiber). The
    empty *set* is represented by None returned from
    shifted_cylinder_constraints, not by this type.
    """

    offset: int
    symbols: Word

    @property
    def is_trivial(self) -> bool:
        return not self.symbols

    @property
    def last(self) -> int:
        return self.offset + len(self.symbols) - 1

    def coordinates(self) -> dict[int, int]:
        return {self.offset + t: s for t, s in enumerate(self.symbols)}


def _fiber_reachable(space: ShiftSpace, source: int, target: int, steps: int) -> bool:
    # walks of exactly `steps` from source to target
    expo = space.primitivity_exponent
    if expo is not None and steps >= expo:
        return True
    return bool(bool_matpow(space.matrix_bool, steps)[source, target])


def shifted_cylinder_constraints(space: ShiftSpace, cyl: TwoSidedCylinder,
                                 past: PastWord, i: int) -> Optional[FiberConstraint]:
    """Intersect the shifted cylinder sigma^{-i}(cyl) with the fiber of `past`.

    The fiber is the set of one-sided futures y with the given past (y0 free).
    Coordinates of the shifted cylinder below 0 are checked against the past;
    a mismatch means the empty set (returned as None). The remaining
    coordinates become a contiguous constraint word on the fiber, and
    emptiness across the past/fiber boundary is detected exactly.
    """
    if i < 0:
        raise ValueError("shift exponent i must be >= 0")
    fiber_symbols: list[int] = []
    offset = max(0, i + cyl.start)
    for t, z in enumerate(cyl.symbols):
        c = i + cyl.start + t
        if c <= -1:
            if past.symbol(c) != z:
                return None
        else:
            fiber_symbols.append(z)
    if not fiber_symbols:
        return FiberConstraint(offset=0, symbols=())
    word = tuple(fiber_symbols)
    # the fiber always continues from past(-1); check the constrained word is
    # reachable in exactly offset+1 steps (offset free symbols in between)
    if not _fiber_reachable(space, past.symbol(-1), word[0], offset + 1):
        return None
    return FiberConstraint(offset=offset, symbols=word)


@dataclass(frozen=True)
class BlockRecoding:
    """Higher-block presentation: symbols of the new shift are admissible N-words.

    Transitions are by overlap, so any window-(0, N+1) potential becomes a
    function of a single transition of the block shift. length == 1 is the
    identity recoding.
    """

    base: ShiftSpace
    length: int
    blocks: tuple[Word, ...]
    block_space: ShiftSpace

    @cached_property
    def index(self) -> dict[Word, int]:
        return {b: i for i, b in enumerate(self.blocks)}

    @cached_property
    def last_symbols(self) -> np.ndarray:
        return np.array([b[-1] for b in self.blocks], dtype=np.int64)

    @cached_property
    def first_symbols(self) -> np.ndarray:
        return np.array([b[0] for b in self.blocks], dtype=np.int64)

    @cached_property
    def flat_lookup(self) -> np.ndarray:
        """Maps flat base-k window codes to block indices (-1 if inadmissible)."""
        size = self.base.k ** self.length
        if size > 1 << 22:
            raise ValueError("flat lookup table too large for this recoding")
        table = np.full(size, -1, dtype=np.int64)
        for idx, b in enumerate(self.blocks):
            code = 0
            for s in b:
                code = code * self.base.k + s
            table[code] = idx
        return table

    def block_of(self, word: WordLike) -> int:
        w = as_word(word)
        try:
            return self.index[w]
        except KeyError:
            raise InadmissibleWordError(f"{w} is not an admissible {self.length}-block")

    def encode(self, word: WordLike) -> Word:
        """Transport a base word of length >= N to a word over block symbols."""
        w = self.base.check_admissible(word)
        n = self.length
        if len(w) < n:
            raise ValueError(
                f"word of length {len(w)} is too short to recode with blocks of {n}")
        return tuple(self.index[w[t:t + n]] for t in range(len(w) - n + 1))

    def decode(self, blockword: Sequence[int]) -> Word:
        """Transport a block word back; inverse of encode on its image."""
        bw = tuple(int(b) for b in blockword)
        if not bw:
            raise ValueError("block word must be nonempty")
        self.block_space.check_admissible(bw, what="block word")
        out = list(self.blocks[bw[0]])
        for b in bw[1:]:
            out.append(self.blocks[b][-1])
        return tuple(out)

    def blocks_with_prefix(self, prefix: Word) -> list[int]:
        return [i for i, b in enumerate(self.blocks) if b[:len(prefix)] == prefix]


def higher_block_recode(space: ShiftSpace, n: int) -> BlockRecoding:
    """Recode onto admissible N-blocks with overlap transitions."""
    if n < 1:
        raise ValueError("block length must be >= 1 (N=0 is rejected)")
    blocks = tuple(space.admissible_words(n))
    size = len(blocks)
    matrix = [[0] * size for _ in range(size)]
    for i, b in enumerate(blocks):
        for j, c in enumerate(blocks):
            if n == 1:
                ok = space.allows(b[0], c[0])
            else:
                ok = b[1:] == c[:-1]
            if ok:
                matrix[i][j] = 1
    block_space = build_shift(size, matrix, space.metric_base)
    return BlockRecoding(base=space, length=n, blocks=blocks, block_space=block_space)
