"""
Brute-force reference procedures, independent of the Dehn and lattice machinery.

Each oracle is bounded: a None answer means "undecided within the bound".
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from typing import Optional

from app.config import settings
from app.services.seifert import (
    FiberedElement,
    SeifertPresentation,
    collect,
    conjugate_by,
    equal,
    fiber_value,
    inverse,
    multiply,
)
from app.services.surface import SurfacePresentation
from app.services.words import Letter, Word, enumerate_reduced_words, free_reduce

logger = logging.getLogger(__name__)

# short words of F(x, y) used as handle images in folding maps
_FOLD_IMAGES = ("x", "y", "xy", "xY", "xxy", "yx")


def _f2_word(text: str) -> Word:
    return Word(tuple(Letter(0 if c.lower() == "x" else 1, c.isupper()) for c in text))


def relator_search_trivial(p: SurfacePresentation, w: Word, max_length: Optional[int] = None, max_states: int = 20000) -> bool:
    """Search the van Kampen moves u → c⁻¹ (for relator rotations u·c) for a path to the empty word."""
    start = free_reduce(w).letters
    if not start:
        return True
    max_length = max_length or len(start) + p.relator_length
    seen = {start}
    queue = deque([start])
    while queue and len(seen) < max_states:
        current = queue.popleft()
        for position in range(len(current)):
            for variant in p.relator_variants:
                letters = variant.letters
                k = 0
                while k < len(letters) and position + k < len(current) and current[position + k] == letters[k]:
                    k += 1
                    replacement = Word(letters[k:]).inverse().letters
                    candidate = free_reduce(Word(current[:position] + replacement + current[position + k:])).letters
                    if not candidate:
                        return True
                    if len(candidate) <= max_length and candidate not in seen:
                        seen.add(candidate)
                        queue.append(candidate)
    return False


def folding_images(p: SurfacePresentation) -> list[tuple[Word, ...]]:
    """Maps onto F(x, y) sending handle i to (u, v) or (v, u) so the relator dies."""
    images = []
    for u_text, v_text in itertools.permutations(_FOLD_IMAGES, 2):
        u, v = _f2_word(u_text), _f2_word(v_text)
        handles = []
        for i in range(p.genus):
            handles.extend((u, v) if i % 2 == 0 else (v, u))
        if p.genus % 2:
            # odd genus: close up with a commuting last handle
            handles[-2:] = [u, u]
        images.append(tuple(handles))
    return images


def _apply(images: tuple[Word, ...], w: Word) -> Word:
    result = Word()
    for letter in w:
        image = images[letter.index]
        result = result * (image.inverse() if letter.inverted else image)
    return result


def quotient_nontrivial(p: SurfacePresentation, w: Word) -> bool:
    """True when some abelian or free folding image of w is nontrivial."""
    if any(w.exponent_sums(p.alphabet.rank)):
        return True
    relator = p.relator_word
    for images in folding_images(p):
        if _apply(images, relator):
            continue
        if _apply(images, w):
            return True
    return False


def surface_word_oracle(p: SurfacePresentation, w: Word) -> Optional[bool]:
    """Triviality of w by search (True), a nontrivial image (False), or None."""
    if quotient_nontrivial(p, w):
        return False
    if relator_search_trivial(p, w):
        return True
    return None


def bounded_surface_conjugator(p: SurfacePresentation, u: Word, v: Word, max_length: int, is_trivial) -> Optional[Word]:
    """c with |c| ≤ max_length and c⁻¹ u c v⁻¹ trivial, using the supplied triviality test."""
    for c in enumerate_reduced_words(p.alphabet.rank, max_length):
        if is_trivial(c.inverse() * u * c * v.inverse()):
            return c
    return None


def bounded_conjugator(p: SeifertPresentation, g1: FiberedElement, g2: FiberedElement, max_length: Optional[int] = None) -> Optional[FiberedElement]:
    """Shortest mixed word c (fiber letters included) with c⁻¹ g1 c = g2."""
    max_length = settings.oracle_conjugator_length if max_length is None else max_length
    for word in enumerate_reduced_words(p.rank + 1, max_length):
        c = collect(p, word)
        if equal(p, conjugate_by(p, g1, c), g2):
            return c
    return None


def bounded_fiber_offsets(p: SeifertPresentation, g: FiberedElement, max_length: int, window: int) -> dict[int, FiberedElement]:
    """Offsets n in [-window, window] with c⁻¹ g c = g h^n for some mixed c with |c| ≤ max_length."""
    found: dict[int, FiberedElement] = {}
    cover = p.cover
    g_inverse = inverse(cover, g)
    for word in enumerate_reduced_words(p.rank + 1, max_length):
        c = collect(cover, word)
        n = fiber_value(cover, multiply(cover, g_inverse, conjugate_by(cover, g, c)))
        if n is not None and abs(n) <= window and n not in found:
            found[n] = c
    logger.debug("bounded offsets %s", sorted(found))
    return found
