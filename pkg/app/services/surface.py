"""
Word and conjugacy problem in closed orientable surface groups of genus ≥ 2.

The standard presentation ⟨a1, b1, …, ag, bg | [a1, b1]…[ag, bg]⟩ is C'(1/6):
distinct relator rotations share at most one letter, so Dehn's algorithm
solves the word problem and rotations plus short relator-complement moves connect the
cyclically minimal words of a conjugacy class.
"""
from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

from app.config import settings
from app.services.words import (
    Alphabet,
    CyclicWord,
    Letter,
    Word,
    canonical_rotation,
    commutator,
    cyclic_reduce,
    free_reduce,
    random_word,
    smallest_period,
)

logger = logging.getLogger(__name__)


class InvalidGenusError(ValueError):
    """Raised when a surface presentation is requested for genus < 2."""


class NotTrivialError(ValueError):
    """Raised when a relator degree is requested for a nontrivial word."""


class TrivialElementError(ValueError):
    """Raised when a centralizer root is requested for the identity."""


class ClosureLimitError(RuntimeError):
    """Raised when a conjugacy closure grows past the configured limit."""


class RelatorVariant(NamedTuple):
    letters: tuple[Letter, ...]
    sign: int  # +1 for rotations of r, -1 for rotations of r⁻¹


class DehnMove(NamedTuple):
    position: int
    variant: int
    signed_degree: int
    length: int


@dataclass(frozen=True)
class DehnTrace:
    """Replacements performed by dehn_reduce, in order."""

    moves: tuple[DehnMove, ...] = ()

    @property
    def degree(self) -> int:
        return sum(move.signed_degree for move in self.moves)


@dataclass(frozen=True)
class SurfacePresentation:
    genus: int

    def __post_init__(self) -> None:
        if self.genus < 2:
            raise InvalidGenusError(f"Surface presentations need genus >= 2, got {self.genus}")

    @cached_property
    def alphabet(self) -> Alphabet:
        return Alphabet.standard_surface(self.genus)

    @cached_property
    def relator_word(self) -> Word:
        word = Word()
        for i in range(self.genus):
            word = word.concat(commutator(Word.generator(2 * i), Word.generator(2 * i + 1)))
        return word

    @cached_property
    def relator(self) -> CyclicWord:
        return CyclicWord.of(self.relator_word.letters)

    @cached_property
    def relator_variants(self) -> tuple[RelatorVariant, ...]:
        variants = []
        for sign, base in ((1, self.relator_word), (-1, self.relator_word.inverse())):
            letters = base.letters
            for shift in range(len(letters)):
                variants.append(RelatorVariant(letters[shift:] + letters[:shift], sign))
        return tuple(variants)

    @cached_property
    def _variant_index(self) -> dict[tuple[Letter, Letter], int]:
        # Pieces have length 1, so two letters pin down the variant.
        return {variant.letters[:2]: i for i, variant in enumerate(self.relator_variants)}

    @property
    def relator_length(self) -> int:
        return 4 * self.genus

    @property
    def half(self) -> int:
        return 2 * self.genus

    def variant_at(self, letters: Sequence[Letter], position: int) -> Optional[int]:
        if position + 1 >= len(letters):
            return None
        return self._variant_index.get((letters[position], letters[position + 1]))


def _match_length(variant: tuple[Letter, ...], letters: Sequence[Letter], position: int) -> int:
    k = 0
    limit = min(len(variant), len(letters) - position)
    while k < limit and letters[position + k] == variant[k]:
        k += 1
    return k


def _find_long_piece(p: SurfacePresentation, letters: Sequence[Letter]) -> Optional[tuple[int, int, int]]:
    """First (position, variant, length) covering more than half a relator."""
    for position in range(len(letters) - p.half):
        variant = p.variant_at(letters, position)
        if variant is None:
            continue
        k = _match_length(p.relator_variants[variant].letters, letters, position)
        if k > p.half:
            return position, variant, k
    return None


def _replace(p: SurfacePresentation, letters: tuple[Letter, ...], position: int, variant: int, k: int) -> tuple[Letter, ...]:
    remainder = Word(p.relator_variants[variant].letters[k:])
    return letters[:position] + remainder.inverse().letters + letters[position + k:]


def dehn_reduce(p: SurfacePresentation, w: Word) -> tuple[Word, DehnTrace]:
    """Dehn's algorithm; the trace's signed degrees sum to the relator degree when the result is empty."""
    letters = free_reduce(w).letters
    moves: list[DehnMove] = []
    while True:
        found = _find_long_piece(p, letters)
        if found is None:
            break
        position, variant, k = found
        moves.append(DehnMove(position, variant, p.relator_variants[variant].sign, k))
        letters = free_reduce(Word(_replace(p, letters, position, variant, k))).letters
    return Word(letters), DehnTrace(tuple(moves))


def replay_trace(p: SurfacePresentation, w: Word, trace: DehnTrace) -> Word:
    letters = free_reduce(w).letters
    for move in trace.moves:
        variant = p.relator_variants[move.variant].letters
        if letters[move.position:move.position + move.length] != variant[:move.length]:
            raise ValueError(f"Dehn move {move} does not match the word")
        letters = free_reduce(Word(_replace(p, letters, move.position, move.variant, move.length))).letters
    return Word(letters)


def is_trivial(p: SurfacePresentation, w: Word) -> bool:
    reduced, _ = dehn_reduce(p, w)
    return not reduced


def r_degree(p: SurfacePresentation, w: Word) -> int:
    reduced, trace = dehn_reduce(p, w)
    if reduced:
        raise NotTrivialError("r_degree is only defined for words trivial in the surface group")
    return trace.degree


def _has_cyclic_long_piece(p: SurfacePresentation, letters: tuple[Letter, ...]) -> Optional[tuple[int, int, int, int]]:
    """(shift, position, variant, length) of a long piece in some rotation."""
    if len(letters) <= p.half:
        return None
    for shift in range(len(letters)):
        found = _find_long_piece(p, letters[shift:] + letters[:shift])
        if found is not None:
            return (shift, *found)
    return None


def cyclic_dehn_reduce(p: SurfacePresentation, w: Word) -> tuple[Word, Word]:
    """Return (core, c) with c⁻¹ w c = core, core cyclically reduced with no long cyclic piece."""
    current, _ = dehn_reduce(p, w)
    conjugator = Word()
    while True:
        core, k = cyclic_reduce(current)
        conjugator = conjugator * k
        letters = core.letters
        found = _has_cyclic_long_piece(p, letters)
        if found is None:
            return Word(letters), conjugator
        shift, position, variant, length = found
        conjugator = conjugator * Word(letters[:shift])
        rotated = letters[shift:] + letters[:shift]
        current, _ = dehn_reduce(p, Word(_replace(p, rotated, position, variant, length)))


@dataclass(frozen=True)
class ConjugacyClosure:
    """Cyclically minimal words of a conjugacy class, each with c such that c⁻¹ w c is the word."""

    words: dict[tuple[Letter, ...], Word]

    @property
    def length(self) -> int:
        return len(next(iter(self.words))) if self.words else 0


def conjugacy_closure(p: SurfacePresentation, w: Word, limit: Optional[int] = None, slack: Optional[int] = None) -> ConjugacyClosure:
    """
    Close the cyclic Dehn-reduced form of w under rotations and relator-complement moves.

    Intermediate words may be up to `slack` letters longer than the minimal
    length; slack 0 gives exactly the half-relator flips, slack 2 also walks
    one-layer annuli whose side pieces are single letters.
    """
    limit = limit or settings.surface_closure_limit
    slack = settings.surface_closure_slack if slack is None else slack
    core, conjugator = cyclic_dehn_reduce(p, w)
    while True:
        restart = _explore(p, core.letters, conjugator, limit, slack)
        if isinstance(restart, ConjugacyClosure):
            return restart
        core, conjugator = restart
        logger.debug("Closure restarted at shorter length %s", len(core))


def _explore(p: SurfacePresentation, letters: tuple[Letter, ...], conjugator: Word, limit: int, slack: int):
    target = len(letters)
    start, shift = canonical_rotation(letters)
    seen: dict[tuple[Letter, ...], Word] = {start: conjugator * Word(letters[:shift])}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        c = seen[current]
        n = len(current)
        for rotation in range(n):
            rotated = current[rotation:] + current[:rotation]
            c_rotated = c * Word(current[:rotation])
            for variant in p.relator_variants:
                k = _match_length(variant.letters, rotated, 0)
                if k == 0 or n + p.relator_length - 2 * k > target + slack:
                    continue
                replaced = Word(Word(variant.letters[k:]).inverse().letters + rotated[k:])
                core, k_conjugator = cyclic_reduce(replaced)
                c_core = c_rotated * k_conjugator
                if len(core) < target:
                    shorter, extra = cyclic_dehn_reduce(p, core.as_word())
                    return shorter, c_core * extra
                if core.letters in seen:
                    continue
                seen[core.letters] = c_core
                if len(seen) > limit:
                    raise ClosureLimitError(f"Conjugacy closure exceeded {limit} words")
                queue.append(core.letters)
    return ConjugacyClosure({key: c for key, c in seen.items() if len(key) == target})


def are_conjugate_surface(p: SurfacePresentation, u: Word, v: Word) -> Optional[Word]:
    """Return c with c⁻¹ u c = v in the surface group, or None."""
    u_trivial, v_trivial = is_trivial(p, u), is_trivial(p, v)
    if u_trivial or v_trivial:
        return Word() if u_trivial and v_trivial else None
    closure_u = conjugacy_closure(p, u)
    closure_v = conjugacy_closure(p, v)
    if closure_u.length != closure_v.length:
        return None
    for key, c_v in closure_v.words.items():
        c_u = closure_u.words.get(key)
        if c_u is not None:
            witness, _ = dehn_reduce(p, c_u * c_v.inverse())
            return witness
    return None


def root_with_exponent(p: SurfacePresentation, w: Word) -> tuple[Word, int]:
    if is_trivial(p, w):
        raise TrivialElementError("The identity has no centralizer root")
    closure = conjugacy_closure(p, w)
    best_exponent, best_root, best_conjugator = 0, (), Word()
    for key, c in closure.words.items():
        period = smallest_period(key)
        exponent = len(key) // period
        if exponent > best_exponent:
            best_exponent, best_root, best_conjugator = exponent, key[:period], c
    root, _ = dehn_reduce(p, best_conjugator * Word(best_root) * best_conjugator.inverse())
    return root, best_exponent


def centralizer_root_surface(p: SurfacePresentation, w: Word) -> Word:
    """Generator z of the (cyclic) centralizer of w, with w = z^k."""
    root, _ = root_with_exponent(p, w)
    return root


def random_trivial_word(
    p: SurfacePresentation,
    rng: random.Random,
    factors: int = 2,
    conjugator_length: int = 3,
) -> tuple[Word, int]:
    """Product of conjugates of r^{±1}, with its signed relator count."""
    word, degree = Word(), 0
    for _ in range(factors):
        sign = rng.choice((1, -1))
        u = random_word(p.alphabet.rank, rng.randint(0, conjugator_length), rng)
        word = word * u * p.relator_word.power(sign) * u.inverse()
        degree += sign
    return word, degree
