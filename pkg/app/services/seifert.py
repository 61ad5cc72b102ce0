"""
Central and twisted Z-extensions 1 → ⟨h⟩ → π₁(M) → H → 1 over surface-group bases.

Elements are kept as (base word, fiber exponent) with every h swept to the
right through h x = x h^{ε(x)}; the defining relator of the base maps to
h^s, so equality reduces to the base word problem plus relator bookkeeping.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Optional

from app.models.results import LambdaPair
from app.services.surface import (
    SurfacePresentation,
    are_conjugate_surface,
    centralizer_root_surface,
    dehn_reduce,
)
from app.services.words import (
    Alphabet,
    Letter,
    Word,
    commutator,
    format_word,
    free_conjugate,
    free_reduce,
    primitive_root,
    random_word,
)

logger = logging.getLogger(__name__)


class InvalidPresentationError(ValueError):
    """Raised when Seifert extension data is inconsistent or unsupported."""


class FiniteFiberError(ValueError):
    """Raised when an operation needs an infinite cyclic fiber."""


class ConjugacyCheckError(RuntimeError):
    """Raised when a constructed conjugator fails its own verification."""


class BaseKind(str, Enum):
    FREE = "free"
    TORUS = "torus"
    SURFACE = "surface"


@dataclass(frozen=True)
class FiberedElement:
    """The group element (section of base_word) · h^fiber_exponent."""

    base_word: Word = field(default_factory=Word)
    fiber_exponent: int = 0

    @property
    def is_identity_word(self) -> bool:
        return not self.base_word and self.fiber_exponent == 0


IDENTITY = FiberedElement()
FIBER = FiberedElement(Word(), 1)


@dataclass(frozen=True)
class SeifertPresentation:
    kind: BaseKind
    genus: int = 0
    free_rank: int = 0
    euler_degree: int = 0
    epsilon: tuple[int, ...] = ()
    fiber_modulus: int = 0
    cone_points: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.cone_points:
            raise InvalidPresentationError("Bases with cone points are not supported")
        if self.kind is BaseKind.SURFACE and self.genus < 2:
            raise InvalidPresentationError(f"Surface bases need genus >= 2, got {self.genus}")
        if self.kind is BaseKind.FREE:
            if self.free_rank < 1:
                raise InvalidPresentationError(f"Free bases need rank >= 1, got {self.free_rank}")
            if self.euler_degree:
                raise InvalidPresentationError("Free bases carry no Euler degree")
        if self.fiber_modulus < 0:
            raise InvalidPresentationError("fiber_modulus must be >= 0")
        if self.epsilon:
            if len(self.epsilon) != self.rank:
                raise InvalidPresentationError(
                    f"epsilon needs {self.rank} entries, got {len(self.epsilon)}"
                )
            if any(value not in (1, -1) for value in self.epsilon):
                raise InvalidPresentationError("epsilon values must be +1 or -1")
        if self.is_twisted and self.euler_degree:
            raise InvalidPresentationError("A nontrivial orientation character needs euler_degree 0")

    @classmethod
    def free(cls, rank: int, epsilon: tuple[int, ...] = (), fiber_modulus: int = 0) -> SeifertPresentation:
        return cls(BaseKind.FREE, free_rank=rank, epsilon=epsilon, fiber_modulus=fiber_modulus)

    @classmethod
    def torus(cls, euler_degree: int = 0, epsilon: tuple[int, ...] = (), fiber_modulus: int = 0) -> SeifertPresentation:
        return cls(BaseKind.TORUS, euler_degree=euler_degree, epsilon=epsilon, fiber_modulus=fiber_modulus)

    @classmethod
    def surface(cls, genus: int, euler_degree: int = 0, epsilon: tuple[int, ...] = (), fiber_modulus: int = 0) -> SeifertPresentation:
        return cls(BaseKind.SURFACE, genus=genus, euler_degree=euler_degree, epsilon=epsilon, fiber_modulus=fiber_modulus)

    @property
    def rank(self) -> int:
        if self.kind is BaseKind.FREE:
            return self.free_rank
        if self.kind is BaseKind.TORUS:
            return 2
        return 2 * self.genus

    @cached_property
    def alphabet(self) -> Alphabet:
        if self.kind is BaseKind.FREE:
            return Alphabet.free(self.free_rank)
        if self.kind is BaseKind.TORUS:
            return Alphabet(("x", "y"))
        return Alphabet.standard_surface(self.genus)

    @cached_property
    def surface_group(self) -> Optional[SurfacePresentation]:
        return SurfacePresentation(self.genus) if self.kind is BaseKind.SURFACE else None

    @property
    def relator_word(self) -> Optional[Word]:
        if self.kind is BaseKind.SURFACE:
            return self.surface_group.relator_word
        if self.kind is BaseKind.TORUS:
            return commutator(Word.generator(0), Word.generator(1))
        return None

    @property
    def fiber_index(self) -> int:
        return self.rank

    @property
    def is_twisted(self) -> bool:
        return any(value == -1 for value in self.epsilon)

    @property
    def cover(self) -> SeifertPresentation:
        """The infinite-fiber group this presentation is a quotient of."""
        return self if self.fiber_modulus == 0 else replace(self, fiber_modulus=0)

    def quotient(self, modulus: int) -> SeifertPresentation:
        """π₁(M)/⟨h^N⟩."""
        return replace(self, fiber_modulus=modulus)

    def epsilon_of_letter(self, letter: Letter) -> int:
        if letter.index == self.fiber_index or not self.epsilon:
            return 1
        return self.epsilon[letter.index]

    def epsilon_of(self, word: Word) -> int:
        sign = 1
        for letter in word:
            sign *= self.epsilon_of_letter(letter)
        return sign

    def reduce_exponent(self, m: int) -> int:
        return m % self.fiber_modulus if self.fiber_modulus else m

    def element(self, base_word: Word, fiber_exponent: int = 0) -> FiberedElement:
        return FiberedElement(free_reduce(base_word), self.reduce_exponent(fiber_exponent))

    def generator_elements(self) -> list[FiberedElement]:
        return [FiberedElement(Word.generator(i), 0) for i in range(self.rank)]


def collect(p: SeifertPresentation, raw: Word) -> FiberedElement:
    """Sweep h-letters right through h x = x h^{ε(x)}."""
    base: list[Letter] = []
    m = 0
    for letter in raw:
        if letter.index == p.fiber_index:
            m += letter.sign
        else:
            m *= p.epsilon_of_letter(letter)
            base.append(letter)
    return p.element(Word(tuple(base)), m)


def multiply(p: SeifertPresentation, *elements: FiberedElement) -> FiberedElement:
    word, m = Word(), 0
    for g in elements:
        m = p.epsilon_of(g.base_word) * m + g.fiber_exponent
        word = word * g.base_word
    return p.element(word, m)


def inverse(p: SeifertPresentation, g: FiberedElement) -> FiberedElement:
    return p.element(g.base_word.inverse(), -p.epsilon_of(g.base_word) * g.fiber_exponent)


def power(p: SeifertPresentation, g: FiberedElement, k: int) -> FiberedElement:
    base = g if k >= 0 else inverse(p, g)
    result, k = IDENTITY, abs(k)
    while k:
        if k & 1:
            result = multiply(p, result, base)
        base = multiply(p, base, base)
        k >>= 1
    return result


def to_mixed_word(p: SeifertPresentation, g: FiberedElement) -> Word:
    return g.base_word.concat(Word.generator(p.fiber_index, g.fiber_exponent))


def format_element(p: SeifertPresentation, g: FiberedElement) -> str:
    return format_word(to_mixed_word(p, g), p.alphabet)


def torus_relator_degree(w: Word) -> int:
    """Exponent c of [x, y] in the collected form x^a y^b [x, y]^c (Heisenberg collection)."""
    b = c = 0
    for letter in w:
        if letter.index == 0:
            c += b if letter.inverted else -b
        else:
            b += letter.sign
    return c


def fiber_value(p: SeifertPresentation, g: FiberedElement) -> Optional[int]:
    """t with g = h^t when the base of g is trivial in H, else None."""
    w = g.base_word
    if p.kind is BaseKind.FREE:
        if w:
            return None
        degree = 0
    elif p.kind is BaseKind.TORUS:
        if any(w.exponent_sums(2)):
            return None
        degree = torus_relator_degree(w)
    else:
        reduced, trace = dehn_reduce(p.surface_group, w)
        if reduced:
            return None
        degree = trace.degree
    return p.reduce_exponent(g.fiber_exponent + p.euler_degree * degree)


def is_base_trivial(p: SeifertPresentation, w: Word) -> bool:
    return fiber_value(p, FiberedElement(w, 0)) is not None


def equal(p: SeifertPresentation, g1: FiberedElement, g2: FiberedElement) -> bool:
    return fiber_value(p, multiply(p, g1, inverse(p, g2))) == 0


def conjugate_by(p: SeifertPresentation, g: FiberedElement, c: FiberedElement) -> FiberedElement:
    """c⁻¹ g c."""
    return multiply(p, inverse(p, c), g, c)


def base_conjugator(p: SeifertPresentation, u: Word, v: Word) -> Optional[Word]:
    """c with c⁻¹ u c = v in H, or None."""
    if p.kind is BaseKind.SURFACE:
        return are_conjugate_surface(p.surface_group, u, v)
    if p.kind is BaseKind.TORUS:
        return Word() if u.exponent_sums(2) == v.exponent_sums(2) else None
    return free_conjugate(u, v)


def centralizer_generators(p: SeifertPresentation, w: Word) -> list[FiberedElement]:
    """Generators of C, the preimage of the centralizer of w in H (h last)."""
    if is_base_trivial(p, w) or p.kind is BaseKind.TORUS:
        lifts = p.generator_elements()
    elif p.kind is BaseKind.FREE:
        root, _ = primitive_root(w)
        lifts = [FiberedElement(root, 0)]
    else:
        lifts = [FiberedElement(centralizer_root_surface(p.surface_group, w), 0)]
    return lifts + [FIBER]


def delta(p: SeifertPresentation, g: FiberedElement, c: FiberedElement) -> int:
    """n with c⁻¹ g c = g h^n, for c in the centralizer preimage."""
    value = fiber_value(p, multiply(p, inverse(p, g), conjugate_by(p, g, c)))
    if value is None:
        raise ValueError("Conjugator does not centralize the base of g")
    return value


@dataclass(frozen=True)
class LambdaData:
    """λ, λ₀ together with the generators realizing them."""

    pair: LambdaPair
    plus_generators: tuple[tuple[FiberedElement, int], ...]
    twist: Optional[tuple[FiberedElement, int]] = None


def schreier_plus_generators(p: SeifertPresentation, generators: list[FiberedElement]) -> tuple[list[FiberedElement], Optional[FiberedElement]]:
    """Generators of C⁺ = {c ∈ C : ε(c) = +1} and a twist y ∈ C − C⁺ (if any)."""
    twisted = [c for c in generators if p.epsilon_of(c.base_word) == -1]
    if not twisted:
        return list(generators), None
    t = twisted[0]
    plus: list[FiberedElement] = []
    for s in generators:
        for r in (IDENTITY, t):
            rs = multiply(p, r, s)
            rep = IDENTITY if p.epsilon_of(rs.base_word) == 1 else t
            candidate = multiply(p, rs, inverse(p, rep))
            if not candidate.is_identity_word:
                plus.append(candidate)
    return plus, t


def lambda_data(p: SeifertPresentation, g: FiberedElement) -> LambdaData:
    if p.fiber_modulus:
        raise FiniteFiberError("lambda invariants are computed over the infinite fiber (N = 0)")
    generators = centralizer_generators(p, g.base_word)
    plus, twist = schreier_plus_generators(p, generators)
    deltas = tuple((c, delta(p, g, c)) for c in plus)
    lam = 0
    for _, value in deltas:
        lam = math.gcd(lam, value)
    if twist is None:
        return LambdaData(LambdaPair(lambda_=lam), deltas)
    twist_delta = delta(p, g, twist)
    lambda0 = twist_delta % lam if lam else twist_delta
    logger.debug("lambda=%s lambda0=%s from %s C+ generators", lam, lambda0, len(deltas))
    return LambdaData(LambdaPair(lambda_=lam, lambda0=lambda0), deltas, (twist, twist_delta))


def lambda_invariants(p: SeifertPresentation, g: FiberedElement) -> LambdaPair:
    return lambda_data(p, g).pair


def _bezout(values: list[int]) -> tuple[int, list[int]]:
    """gcd of values and coefficients with Σ cᵢ vᵢ = gcd."""
    g, coefficients = 0, []
    for value in values:
        # extended Euclid on (g, value)
        old_r, r, old_s, s, old_t, t = g, value, 1, 0, 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coefficients = [c * old_s for c in coefficients] + [old_t]
        g = old_r
    return g, coefficients


def _realize(p: SeifertPresentation, data: LambdaData, target: int) -> Optional[FiberedElement]:
    """x ∈ C⁺ with δ(x) = target, when target ∈ λZ."""
    if target == 0:
        return IDENTITY
    values = [value for _, value in data.plus_generators]
    lam, coefficients = _bezout(values)
    if lam == 0 or target % lam:
        return None
    scale = target // lam
    x = IDENTITY
    for (c, _), coefficient in zip(data.plus_generators, coefficients):
        if coefficient:
            x = multiply(p, x, power(p, c, coefficient * scale))
    return x


def lattice_witness(p: SeifertPresentation, g: FiberedElement, n: int, data: Optional[LambdaData] = None) -> Optional[FiberedElement]:
    """x with x⁻¹ g x = g h^n (mod N when N > 0), or None when n is outside the lattice."""
    cover = p.cover
    data = data or lambda_data(cover, g)
    lam = data.pair.lambda_
    modulus = p.fiber_modulus
    if modulus:
        steps = [k * lam for k in range(modulus)] if lam else [0]
    else:
        steps = None
    if modulus == 0:
        if data.pair.contains(n) and (n == 0 or (lam and n % lam == 0)):
            return _realize(cover, data, n)
    else:
        for step in steps:
            if (step - n) % modulus == 0:
                return _realize(cover, data, step)
    if data.twist is None:
        return None
    y, twist_delta = data.twist
    # (x y)⁻¹ g (x y) = g h^{δ(y) - δ(x)}
    if modulus == 0:
        target = twist_delta - n
        if target != 0 and (lam == 0 or target % lam):
            return None
        x = _realize(cover, data, target)
    else:
        x = None
        for step in steps:
            if (twist_delta - step - n) % modulus == 0:
                x = _realize(cover, data, step)
                break
    return None if x is None else multiply(cover, x, y)


@dataclass(frozen=True)
class ConjugacyResult:
    conjugate: bool
    witness: Optional[FiberedElement] = None
    fiber_offset: Optional[int] = None
    lambda_pair: Optional[LambdaPair] = None
    stage: str = "fiber"  # "base" when the images in H already differ


def are_conjugate(p: SeifertPresentation, g1: FiberedElement, g2: FiberedElement) -> ConjugacyResult:
    c_base = base_conjugator(p, g1.base_word, g2.base_word)
    if c_base is None:
        logger.debug("Base images are not conjugate in H")
        return ConjugacyResult(False, stage="base")
    cover = p.cover
    c_hat = FiberedElement(c_base, 0)
    aligned = conjugate_by(cover, g1, c_hat)
    n = fiber_value(cover, multiply(cover, inverse(cover, aligned), g2))
    if n is None:
        raise ConjugacyCheckError("Aligned elements do not share a base image")
    data = lambda_data(cover, aligned)
    x = lattice_witness(p, aligned, n, data)
    if x is None:
        return ConjugacyResult(False, fiber_offset=n, lambda_pair=data.pair)
    witness = multiply(p, c_hat, x)
    if not equal(p, conjugate_by(p, g1, witness), g2):
        raise ConjugacyCheckError("Constructed conjugator failed verification")
    return ConjugacyResult(True, witness, n, data.pair)


def random_element(p: SeifertPresentation, rng: random.Random, max_length: int = 4, max_fiber: int = 2) -> FiberedElement:
    word = random_word(p.rank, rng.randint(0, max_length), rng)
    return p.element(word, rng.randint(-max_fiber, max_fiber))
