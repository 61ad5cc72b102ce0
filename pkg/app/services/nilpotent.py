"""
Finite p-group quotients of free groups through the truncated Magnus embedding.

x_i ↦ 1 + X_i lands in the units of Z/p^m⟨X_1..X_r⟩ truncated above degree c;
the image of a word with leading term of degree c is central, and its order
is controlled by the p-adic valuation of that leading term.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from sympy import factorint, isprime, multiplicity

from app.config import settings
from app.models.results import OrderWitnessPayload
from app.services.finite_groups import FiniteGroupTable
from app.services.seifert import BaseKind, FiberedElement, SeifertPresentation, fiber_value
from app.services.surface import random_trivial_word
from app.services.words import Alphabet, Word, format_word

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


class TrivialWordError(ValueError):
    """Raised when a nontrivial word is required."""


class ClassLimitError(ValueError):
    """Raised when a word survives past the configured class cap."""


class WitnessVerificationError(RuntimeError):
    """Raised when an order witness fails its numeric checks."""


class SplitPreconditionError(ValueError):
    """Raised when central_split is asked for an unsupported extension."""


@dataclass(frozen=True)
class MagnusParams:
    rank: int
    degree_class: int
    prime: int
    exponent: int

    def __post_init__(self) -> None:
        if self.rank < 1 or self.degree_class < 1 or self.exponent < 1:
            raise ValueError(f"Magnus parameters must be positive: {self}")
        if not isprime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    @property
    def modulus(self) -> int:
        return self.prime ** self.exponent


@dataclass(frozen=True)
class TruncatedPoly:
    """Sparse element of the truncated free algebra; modulus 0 means integer coefficients."""

    coefficients: dict[Monomial, int]
    degree_class: int
    modulus: int = 0

    @classmethod
    def one(cls, degree_class: int, modulus: int = 0) -> TruncatedPoly:
        return cls({(): 1}, degree_class, modulus)

    @classmethod
    def generator_image(cls, index: int, inverted: bool, degree_class: int, modulus: int = 0) -> TruncatedPoly:
        if not inverted:
            return cls._build({(): 1, (index,): 1}, degree_class, modulus)
        # (1 + X)⁻¹ = 1 - X + X² - ...
        terms = {(index,) * d: (-1) ** d for d in range(degree_class + 1)}
        return cls._build(terms, degree_class, modulus)

    @classmethod
    def _build(cls, terms: dict[Monomial, int], degree_class: int, modulus: int) -> TruncatedPoly:
        cleaned = {}
        for monomial, value in terms.items():
            if len(monomial) > degree_class:
                continue
            if modulus:
                value %= modulus
            if value:
                cleaned[monomial] = value
        return cls(cleaned, degree_class, modulus)

    def __mul__(self, other: TruncatedPoly) -> TruncatedPoly:
        product: dict[Monomial, int] = {}
        for left, a in self.coefficients.items():
            room = self.degree_class - len(left)
            for right, b in other.coefficients.items():
                if len(right) > room:
                    continue
                key = left + right
                product[key] = product.get(key, 0) + a * b
        return TruncatedPoly._build(product, self.degree_class, self.modulus)

    def __pow__(self, exponent: int) -> TruncatedPoly:
        if exponent < 0:
            raise ValueError("Negative powers are not supported")
        result = TruncatedPoly.one(self.degree_class, self.modulus)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    @property
    def is_one(self) -> bool:
        return self.coefficients == {(): 1}

    def homogeneous(self, degree: int) -> dict[Monomial, int]:
        return {m: v for m, v in self.coefficients.items() if len(m) == degree}

    def key(self) -> tuple[tuple[Monomial, int], ...]:
        return tuple(sorted(self.coefficients.items()))


def _evaluate(w: Word, degree_class: int, modulus: int) -> TruncatedPoly:
    result = TruncatedPoly.one(degree_class, modulus)
    cache: dict = {}
    for letter in w:
        image = cache.get(letter)
        if image is None:
            image = TruncatedPoly.generator_image(letter.index, letter.inverted, degree_class, modulus)
            cache[letter] = image
        result = result * image
    return result


def magnus_eval(params: MagnusParams, w: Word) -> TruncatedPoly:
    return _evaluate(w, params.degree_class, params.modulus)


def generator_images(params: MagnusParams) -> list[TruncatedPoly]:
    return [TruncatedPoly.generator_image(i, False, params.degree_class, params.modulus) for i in range(params.rank)]


def lcs_class(w: Word, c_max: Optional[int] = None) -> int:
    """Least c with a nonzero degree-c term, over integer coefficients."""
    c_max = c_max or settings.magnus_max_class
    if not w:
        raise TrivialWordError("lcs_class needs a nontrivial word")
    for c in range(1, c_max + 1):
        if _evaluate(w, c, 0).homogeneous(c):
            return c
    raise ClassLimitError(f"Word lies in the class-{c_max} term of the lower central series")


@dataclass(frozen=True)
class OrderWitness:
    word: Word
    params: MagnusParams
    image: TruncatedPoly
    order_exponent: int  # k, the image has order p^k
    valuation: int
    verified_order: int
    centrality_checked: bool

    def to_payload(self, alphabet: Optional[Alphabet] = None) -> OrderWitnessPayload:
        alphabet = alphabet or Alphabet.free(self.params.rank)
        return OrderWitnessPayload(
            word=format_word(self.word, alphabet),
            rank=self.params.rank,
            degree_class=self.params.degree_class,
            prime=self.params.prime,
            exponent=self.params.exponent,
            valuation=self.valuation,
            verified_order=self.verified_order,
            centrality_checked=self.centrality_checked,
            coefficients=[(list(m), v) for m, v in self.image.key()],
        )


def _word_rank(w: Word, rank: Optional[int]) -> int:
    needed = max((letter.index for letter in w), default=0) + 1
    return max(needed, rank or 1)


def _verify(params: MagnusParams, image: TruncatedPoly, k: int) -> None:
    order = params.prime ** k
    if not (image ** order).is_one:
        raise WitnessVerificationError(f"image^{order} is not 1")
    if (image ** (order // params.prime)).is_one:
        raise WitnessVerificationError(f"image has order below {order}")
    for generator in generator_images(params):
        if (image * generator).coefficients != (generator * image).coefficients:
            raise WitnessVerificationError("image is not central")


def _build_witness(g: Word, p: int, k: int, rank: Optional[int]) -> OrderWitness:
    if k < 1:
        raise ValueError(f"order exponent must be >= 1, got {k}")
    c = lcs_class(g)
    leading = _evaluate(g, c, 0).homogeneous(c)
    valuation = min(multiplicity(p, abs(value)) for value in leading.values())
    params = MagnusParams(_word_rank(g, rank), c, p, k + valuation)
    image = magnus_eval(params, g)
    _verify(params, image, k)
    logger.debug("order witness p=%s k=%s class=%s valuation=%s", p, k, c, valuation)
    return OrderWitness(g, params, image, k, valuation, p ** k, True)


def order_witness(g: Word, p: int, k: int, rank: Optional[int] = None) -> OrderWitness:
    """Central image of g of order exactly p^k in a finite p-group quotient."""
    if not g:
        raise TrivialWordError("order_witness needs a nontrivial word")
    return _build_witness(g, p, k, rank)


def reduce_central_order(witness: OrderWitness, target_k: int) -> OrderWitness:
    if target_k <= 0:
        raise ValueError(f"target order exponent must be positive, got {target_k}")
    if target_k > witness.order_exponent:
        raise ValueError("reduce_central_order cannot raise the order")
    if target_k == witness.order_exponent:
        return witness
    return _build_witness(witness.word, witness.params.prime, target_k, witness.params.rank)


@dataclass(frozen=True)
class CrtWitness:
    """Product of prime-power witnesses; the image has order exactly n."""

    word: Word
    components: tuple[OrderWitness, ...]
    order: int

    def images(self, w: Word) -> list[TruncatedPoly]:
        return [magnus_eval(c.params, w) for c in self.components]

    def is_trivial(self, w: Word) -> bool:
        return all(image.is_one for image in self.images(w))


def crt_order_witness(g: Word, n: int, rank: Optional[int] = None) -> CrtWitness:
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    if not g:
        raise TrivialWordError("crt_order_witness needs a nontrivial word")
    components = tuple(order_witness(g, p, k, rank) for p, k in sorted(factorint(n).items()))
    witness = CrtWitness(g, components, n)
    _verify_crt(witness)
    return witness


def _verify_crt(witness: CrtWitness) -> None:
    n = witness.order
    powered = [c.image ** n for c in witness.components]
    if not all(image.is_one for image in powered):
        raise WitnessVerificationError(f"product image^{n} is not 1")
    for q in factorint(n):
        if all((c.image ** (n // q)).is_one for c in witness.components):
            raise WitnessVerificationError(f"product image has order dividing {n // q}")


@dataclass
class SplitCertificate:
    """Finite quotient Q of F with the relator of order n = N / gcd(N, s) and central."""

    presentation: SeifertPresentation
    relator_order: int
    quotient: Optional[CrtWitness] = None
    samples_checked: int = field(default=0)

    def in_kernel(self, w: Word) -> bool:
        return self.quotient is None or self.quotient.is_trivial(w)

    def fiber_is_trivial(self, w: Word) -> Optional[bool]:
        """For w trivial in H and in the kernel: whether its fiber bookkeeping vanishes."""
        t = fiber_value(self.presentation, FiberedElement(w, 0))
        if t is None or not self.in_kernel(w):
            return None
        return t % self.presentation.fiber_modulus == 0

    def validate(self, samples: int, rng: random.Random, factors: int = 3, conjugator_length: int = 3) -> int:
        """Sample products of conjugates of r^±1 and count kernel elements with nontrivial fiber."""
        surface = self.presentation.surface_group
        violations = 0
        for _ in range(samples):
            word, _ = random_trivial_word(surface, rng, rng.randint(1, factors), conjugator_length)
            verdict = self.fiber_is_trivial(word)
            if verdict is None:
                continue
            self.samples_checked += 1
            if not verdict:
                violations += 1
        logger.info("central_split: %s kernel samples, %s violations", self.samples_checked, violations)
        return violations


def central_split(p: SeifertPresentation) -> SplitCertificate:
    if p.kind is not BaseKind.SURFACE:
        raise SplitPreconditionError("central_split needs a surface base")
    if p.fiber_modulus <= 0:
        raise SplitPreconditionError("central_split needs a finite fiber (N > 0)")
    if p.is_twisted:
        raise SplitPreconditionError("central_split needs a central fiber (epsilon = +1)")
    n = p.fiber_modulus // math.gcd(p.fiber_modulus, p.euler_degree)
    quotient = crt_order_witness(p.relator_word, n, p.rank) if n > 1 else None
    return SplitCertificate(p, n, quotient)


def unit_group_elements(params: MagnusParams, max_order: int) -> Optional[list[TruncatedPoly]]:
    """Closure of the generator images, identity first; None past max_order."""
    generators = generator_images(params)
    identity = TruncatedPoly.one(params.degree_class, params.modulus)
    elements = [identity]
    seen = {identity.key()}
    frontier = [identity]
    while frontier:
        next_frontier = []
        for element in frontier:
            for generator in generators:
                product = element * generator
                key = product.key()
                if key in seen:
                    continue
                seen.add(key)
                elements.append(product)
                next_frontier.append(product)
                if len(elements) > max_order:
                    logger.debug("unit group for %s exceeds %s elements", params, max_order)
                    return None
        frontier = next_frontier
    return elements


def unit_group_table(params: MagnusParams, max_order: int) -> Optional[tuple[FiniteGroupTable, list[int]]]:
    """The finite p-group generated by the 1 + X_i, as a multiplication table, with the generator ids."""
    elements = unit_group_elements(params, max_order)
    if elements is None:
        return None
    index = {element.key(): i for i, element in enumerate(elements)}
    rows = [[index[(a * b).key()] for b in elements] for a in elements]
    name = f"magnus(r={params.rank},c={params.degree_class},p^m={params.prime}^{params.exponent})"
    table = FiniteGroupTable.from_rows(rows, name=name)
    generators = [index[g.key()] for g in generator_images(params)]
    return table, generators
