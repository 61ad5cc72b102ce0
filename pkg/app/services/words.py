"""
Free-group word arithmetic.

Words are immutable tuples of letters; every operation returns a fresh
value, so words can be shared freely between searches.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

logger = logging.getLogger(__name__)

FIBER_NAME = "h"
IDENTITY_TOKEN = "1"


class EmptyWordError(ValueError):
    """Raised when an operation needs a nonempty word."""


class Letter(NamedTuple):
    """A generator or its inverse; ordered by (index, inverted)."""

    index: int
    inverted: bool = False

    def inverse(self) -> Letter:
        return Letter(self.index, not self.inverted)

    @property
    def sign(self) -> int:
        return -1 if self.inverted else 1


@dataclass(frozen=True)
class Alphabet:
    """Named generators of a free group."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("An alphabet needs at least one generator")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"Generator names must be distinct: {self.names}")
        for name in self.names:
            if not (name and name[0].isalpha() and name.isalnum() and name == name.lower()):
                raise ValueError(f"Invalid generator name: {name!r}")
            if name == FIBER_NAME:
                raise ValueError(f"Generator name {FIBER_NAME!r} is reserved for the fiber")

    @classmethod
    def free(cls, rank: int) -> Alphabet:
        if rank < 1:
            raise ValueError(f"Free rank must be positive, got {rank}")
        if rank <= 3:
            return cls(("x", "y", "z")[:rank])
        return cls(tuple(f"x{i}" for i in range(1, rank + 1)))

    @classmethod
    def standard_surface(cls, genus: int) -> Alphabet:
        names: list[str] = []
        for i in range(1, genus + 1):
            names.extend((f"a{i}", f"b{i}"))
        return cls(tuple(names))

    @property
    def rank(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def letter(self, name: str, inverted: bool = False) -> Letter:
        return Letter(self.index(name), inverted)

    def word(self, *names: str) -> Word:
        """Build a word from names; a trailing "^-1" or uppercase marks an inverse."""
        letters = []
        for name in names:
            if name.endswith("^-1"):
                letters.append(self.letter(name[:-3], True))
            elif name != name.lower():
                letters.append(self.letter(name.lower(), True))
            else:
                letters.append(self.letter(name))
        return free_reduce(Word(tuple(letters)))

    def name_of(self, index: int) -> str:
        if index == self.rank:
            return FIBER_NAME
        return self.names[index]


@dataclass(frozen=True)
class Word:
    """A finite sequence of letters; products are freely reduced."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def from_signed(cls, values: Iterable[int]) -> Word:
        """Build from 1-based signed generator numbers (SnapPy-style lists)."""
        letters = []
        for value in values:
            if value == 0:
                raise ValueError("Signed generator numbers are nonzero")
            letters.append(Letter(abs(value) - 1, value < 0))
        return cls(tuple(letters))

    @classmethod
    def generator(cls, index: int, power: int = 1) -> Word:
        letter = Letter(index, power < 0)
        return cls((letter,) * abs(power))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item])
        return self.letters[item]

    def __mul__(self, other: Word) -> Word:
        return free_reduce(Word(self.letters + other.letters))

    def concat(self, other: Word) -> Word:
        """Concatenate without reduction."""
        return Word(self.letters + other.letters)

    def inverse(self) -> Word:
        return Word(tuple(letter.inverse() for letter in reversed(self.letters)))

    def power(self, exponent: int) -> Word:
        base = self if exponent >= 0 else self.inverse()
        return free_reduce(Word(base.letters * abs(exponent)))

    def conjugate(self, by: Word) -> Word:
        """Return by⁻¹ · self · by."""
        return by.inverse() * self * by

    @property
    def is_reduced(self) -> bool:
        return all(a != b.inverse() for a, b in zip(self.letters, self.letters[1:]))

    def exponent_sums(self, rank: int) -> tuple[int, ...]:
        sums = [0] * rank
        for letter in self.letters:
            sums[letter.index] += letter.sign
        return tuple(sums)


def commutator(u: Word, v: Word) -> Word:
    """Return u v u⁻¹ v⁻¹."""
    return free_reduce(u.concat(v).concat(u.inverse()).concat(v.inverse()))


@dataclass(frozen=True)
class CyclicWord:
    """Cyclically reduced word stored in its lexicographically least rotation."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        if not is_cyclically_reduced(self.letters):
            raise ValueError("CyclicWord letters must be cyclically reduced")
        if canonical_rotation(self.letters)[0] != self.letters:
            raise ValueError("CyclicWord letters must be in canonical rotation")

    @classmethod
    def of(cls, letters: Sequence[Letter]) -> CyclicWord:
        rotated, _ = canonical_rotation(tuple(letters))
        return cls(rotated)

    def __len__(self) -> int:
        return len(self.letters)

    def as_word(self) -> Word:
        return Word(self.letters)


def free_reduce(w: Word) -> Word:
    stack: list[Letter] = []
    for letter in w.letters:
        if stack and stack[-1] == letter.inverse():
            stack.pop()
        else:
            stack.append(letter)
    if len(stack) == len(w.letters):
        return w
    return Word(tuple(stack))


def is_cyclically_reduced(letters: Sequence[Letter]) -> bool:
    if any(a == b.inverse() for a, b in zip(letters, letters[1:])):
        return False
    return len(letters) < 2 or letters[0] != letters[-1].inverse()


def canonical_rotation(letters: tuple[Letter, ...]) -> tuple[tuple[Letter, ...], int]:
    """Least rotation and the smallest shift k producing it (letters[k:] + letters[:k])."""
    if not letters:
        return letters, 0
    best, best_shift = letters, 0
    for shift in range(1, len(letters)):
        candidate = letters[shift:] + letters[:shift]
        if candidate < best:
            best, best_shift = candidate, shift
    return best, best_shift


def cyclic_reduce(w: Word) -> tuple[CyclicWord, Word]:
    """Split w as conjugator · core · conjugator⁻¹ with core cyclically reduced."""
    w = free_reduce(w)
    letters = w.letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == letters[j].inverse():
        i += 1
        j -= 1
    core = letters[i:j + 1]
    prefix = Word(letters[:i])
    rotated, shift = canonical_rotation(core)
    conjugator = prefix * Word(core[:shift])
    return CyclicWord(rotated), conjugator


def free_conjugate(u: Word, v: Word) -> Optional[Word]:
    """Return c with c⁻¹ u c = v in the free group, or None if not conjugate."""
    core_u, k_u = cyclic_reduce(u)
    core_v, k_v = cyclic_reduce(v)
    if core_u != core_v:
        return None
    return k_u * k_v.inverse()


def smallest_period(letters: tuple[Letter, ...]) -> int:
    n = len(letters)
    for d in range(1, n + 1):
        if n % d == 0 and letters[:d] * (n // d) == letters:
            return d
    return n


def primitive_root(w: Word) -> tuple[Word, int]:
    """Return (root, k) with w = root^k and root not a proper power."""
    w = free_reduce(w)
    if not w:
        raise EmptyWordError("primitive_root needs a nontrivial word")
    core, conjugator = cyclic_reduce(w)
    period = smallest_period(core.letters)
    root = conjugator * Word(core.letters[:period]) * conjugator.inverse()
    return root, len(core) // period


def all_letters(rank: int) -> list[Letter]:
    return [Letter(i, inverted) for i in range(rank) for inverted in (False, True)]


def random_word(rank: int, length: int, rng: random.Random) -> Word:
    """A freely reduced word of exactly the given length."""
    letters: list[Letter] = []
    choices = all_letters(rank)
    while len(letters) < length:
        letter = rng.choice(choices)
        if letters and letters[-1] == letter.inverse():
            continue
        letters.append(letter)
    return Word(tuple(letters))


def enumerate_reduced_words(rank: int, max_length: int) -> Iterator[Word]:
    """All freely reduced words of length ≤ max_length, shortest first."""
    choices = all_letters(rank)
    layer: list[tuple[Letter, ...]] = [()]
    yield Word()
    for _ in range(max_length):
        next_layer: list[tuple[Letter, ...]] = []
        for letters in layer:
            for letter in choices:
                if letters and letters[-1] == letter.inverse():
                    continue
                extended = letters + (letter,)
                next_layer.append(extended)
                yield Word(extended)
        layer = next_layer


def format_word(w: Word, alphabet: Alphabet) -> str:
    """Render in the input grammar; runs collapse to name^k, index == rank is the fiber."""
    if not w.letters:
        return IDENTITY_TOKEN
    tokens: list[str] = []
    run_index, run_power = w.letters[0].index, 0
    for letter in w.letters:
        if letter.index == run_index and (run_power == 0 or (run_power > 0) != letter.inverted):
            run_power += letter.sign
            continue
        tokens.append(_token(alphabet.name_of(run_index), run_power))
        run_index, run_power = letter.index, letter.sign
    tokens.append(_token(alphabet.name_of(run_index), run_power))
    return " ".join(tokens)


def _token(name: str, power: int) -> str:
    return name if power == 1 else f"{name}^{power}"
