"""
Finite-quotient witnesses of non-conjugacy.

Stage 1 passes to π₁(M)/⟨h^N⟩ with N chosen so the fiber offset of the pair
leaves the lattice; stage 2 searches homomorphisms of that quotient into
small finite groups until the two images are non-conjugate there.
"""
from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from app.config import settings
from app.models.results import SearchBudget, WitnessCertificate, WitnessOutcome
from app.services.extensions import build_catalog
from app.services.finite_groups import FiniteGroupTable, cyclic
from app.services.nilpotent import MagnusParams, unit_group_table
from app.services.seifert import (
    ConjugacyResult,
    FiberedElement,
    SeifertPresentation,
    are_conjugate,
    collect,
    format_element,
)
from app.services.words import Word
from app.utils.parsing import parse_word

logger = logging.getLogger(__name__)

MAGNUS_TARGETS = (MagnusParams(2, 2, 2, 1), MagnusParams(2, 2, 3, 1))


@dataclass(frozen=True)
class Target:
    table: FiniteGroupTable
    source: str  # "cyclic" | "magnus" | "catalog"


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def choose_stage_one_modulus(p: SeifertPresentation, result: ConjugacyResult) -> int:
    """A modulus N keeping the pair non-conjugate in π₁(M)/⟨h^N⟩."""
    if p.fiber_modulus:
        candidates = _divisors(p.fiber_modulus)
    elif result.lambda_pair is not None and result.lambda_pair.lambda_ > 0:
        candidates = [result.lambda_pair.lambda_] + list(settings.stage_one_sweep)
    else:
        candidates = list(settings.stage_one_sweep)
    if result.stage == "base" or result.lambda_pair is None:
        # base images already differ; any compatible modulus works
        return next((n for n in candidates if n > 1), candidates[0])
    n = result.fiber_offset
    for modulus in candidates:
        if not result.lambda_pair.contains_mod(n, modulus):
            return modulus
    if p.fiber_modulus:
        return p.fiber_modulus
    # λ = 0 here: any modulus above |n| and |n - λ₀| separates
    return abs(n) + abs(n - (result.lambda_pair.lambda0 or 0)) + 1


def candidate_targets(p: SeifertPresentation, max_order: int) -> Iterator[Target]:
    """Cyclic groups, then Magnus unit groups, then catalog groups; each capped by max_order."""
    for q in range(2, min(max_order, 16) + 1):
        yield Target(cyclic(q), "cyclic")
    for params in MAGNUS_TARGETS:
        built = unit_group_table(params, max_order)
        if built is not None:
            yield Target(built[0], "magnus")
    seen: set[str] = set()
    for entry in build_catalog():
        if entry.group.name in seen or entry.group.order > max_order:
            continue
        seen.add(entry.group.name)
        yield Target(entry.group, "catalog")


def relation_descriptions(p: SeifertPresentation, modulus: int) -> list[str]:
    lines = []
    for name, sign in zip(p.alphabet.names, p.epsilon or (1,) * p.rank):
        lines.append(f"{name}^-1 h {name} = h^{sign}")
    if p.relator_word is not None:
        lines.append(f"R = h^{p.euler_degree}")
    lines.append(f"h^{modulus} = 1")
    return lines


def _word_image(table: FiniteGroupTable, images: Sequence[int], w: Word) -> int:
    result = 0
    for letter in w:
        image = images[letter.index]
        result = table.mul(result, table.inv(image) if letter.inverted else image)
    return result


def _element_image(table: FiniteGroupTable, base_images: Sequence[int], h_image: int, g: FiberedElement) -> int:
    return table.mul(_word_image(table, base_images, g.base_word), table.power(h_image, g.fiber_exponent))


def relations_hold(p: SeifertPresentation, modulus: int, table: FiniteGroupTable, base_images: Sequence[int], h_image: int) -> bool:
    if table.power(h_image, modulus) != 0:
        return False
    for i, x in enumerate(base_images):
        sign = p.epsilon[i] if p.epsilon else 1
        if table.conjugate(h_image, x) != table.power(h_image, sign):
            return False
    if p.relator_word is not None:
        if _word_image(table, base_images, p.relator_word) != table.power(h_image, p.euler_degree):
            return False
    return True


def _base_image_candidates(order: int, rank: int, limit: int, rng: random.Random) -> Iterator[tuple[int, ...]]:
    if order ** rank <= limit:
        yield from itertools.product(range(order), repeat=rank)
        return
    for _ in range(limit):
        yield tuple(rng.randrange(order) for _ in range(rank))


def find_witness(
    p: SeifertPresentation,
    g1: FiberedElement,
    g2: FiberedElement,
    budget: Optional[SearchBudget] = None,
) -> WitnessOutcome:
    budget = budget or SearchBudget.from_settings()
    result = are_conjugate(p, g1, g2)
    if result.conjugate:
        return WitnessOutcome(status="conjugate", conjugator=format_element(p, result.witness))

    modulus = choose_stage_one_modulus(p, result)
    logger.info("Stage-1 modulus %s (fiber offset %s)", modulus, result.fiber_offset)
    deadline = time.monotonic() + budget.time_limit_seconds
    tried = 0
    timed_out = False
    targets = list(candidate_targets(p, budget.max_target_order))
    for position, target in enumerate(targets):
        table = target.table
        remaining = budget.max_candidates - tried
        if remaining <= 0:
            break
        if time.monotonic() > deadline:
            timed_out = True
            break
        share = max(1, remaining // (len(targets) - position))
        rng = random.Random(budget.seed * 1000003 + position)
        for base_images in _base_image_candidates(table.order, p.rank, share, rng):
            tried += 1
            for h_image in table.elements():
                if not relations_hold(p, modulus, table, base_images, h_image):
                    continue
                a = _element_image(table, base_images, h_image, g1)
                b = _element_image(table, base_images, h_image, g2)
                if table.are_conjugate(a, b):
                    continue
                names = list(p.alphabet.names) + ["h"]
                certificate = WitnessCertificate(
                    stage1_modulus=modulus,
                    word_g1=format_element(p, g1),
                    word_g2=format_element(p, g2),
                    target=table.to_payload(),
                    generator_images=dict(zip(names, [*base_images, h_image])),
                    image_g1=a,
                    image_g2=b,
                    relations_checked=relation_descriptions(p, modulus),
                    conjugacy_class_g1=sorted(table.conjugacy_class(a)),
                    candidates_tried=tried,
                )
                logger.info("Certificate in %s (%s) after %s candidates", table.name, target.source, tried)
                return WitnessOutcome(status="certificate", certificate=certificate, candidates_tried=tried)
    reason = "time limit reached" if timed_out else "no separating quotient"
    return WitnessOutcome(
        status="budget_exhausted",
        candidates_tried=tried,
        detail=f"{reason} within {tried} candidates (stage-1 modulus {modulus})",
    )


def replay_certificate(p: SeifertPresentation, certificate: WitnessCertificate) -> bool:
    """Re-check a certificate from scratch: table axioms, relations, images, non-conjugacy."""
    table = FiniteGroupTable.from_payload(certificate.target)
    modulus = certificate.stage1_modulus
    if modulus < 1 or (p.fiber_modulus and p.fiber_modulus % modulus):
        return False
    names = list(p.alphabet.names)
    if set(certificate.generator_images) != set(names) | {"h"}:
        return False
    base_images = [certificate.generator_images[name] for name in names]
    h_image = certificate.generator_images["h"]
    if not all(0 <= x < table.order for x in [*base_images, h_image]):
        return False
    if not relations_hold(p, modulus, table, base_images, h_image):
        return False
    g1 = collect(p, parse_word(certificate.word_g1, p.alphabet))
    g2 = collect(p, parse_word(certificate.word_g2, p.alphabet))
    a = _element_image(table, base_images, h_image, g1)
    b = _element_image(table, base_images, h_image, g2)
    if (a, b) != (certificate.image_g1, certificate.image_g2):
        return False
    # brute force over the target: no w with w⁻¹ a w = b
    return all(table.conjugate(a, w) != b for w in table.elements())


def certificate_schema() -> dict:
    return WitnessCertificate.model_json_schema()
