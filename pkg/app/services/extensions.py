"""
Twisted conjugacy and the cyclic extensions S*_φ = ⟨S, t | tⁿ = x, t⁻¹ g t = gφ⟩.

Finite carriers are checked exhaustively on multiplication tables; free and
surface carriers only support bounded searches.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from app.models.results import CatalogEntryPayload
from app.services.finite_groups import (
    FiniteGroupTable,
    alternating,
    cyclic,
    dihedral,
    direct_product,
    quaternion,
    semidirect,
    symmetric,
)
from app.services.surface import SurfacePresentation, is_trivial
from app.services.words import Alphabet, Word, enumerate_reduced_words, format_word, free_reduce

logger = logging.getLogger(__name__)

STABLE_LETTER = "t"


class InvalidAutomorphismError(ValueError):
    """Raised when images do not define an automorphism."""


class NotNormalError(ValueError):
    """Raised when a subgroup is required to be normal and is not."""


class StructureError(ValueError):
    """Raised when a group and subgroup do not form a cyclic extension G = ⟨S, t⟩."""


class CatalogFormatError(ValueError):
    """Raised when a catalog file cannot be read or decoded."""


# Finite carriers


@dataclass(frozen=True)
class FiniteAutomorphism:
    """Automorphism of a subgroup S of a table group, given elementwise."""

    group: FiniteGroupTable
    carrier: frozenset[int]
    images: dict[int, int]

    def __post_init__(self) -> None:
        if set(self.images) != set(self.carrier) or set(self.images.values()) != set(self.carrier):
            raise InvalidAutomorphismError("Images must permute the carrier")
        g = self.group
        for a in self.carrier:
            for b in self.carrier:
                if self.images[g.mul(a, b)] != g.mul(self.images[a], self.images[b]):
                    raise InvalidAutomorphismError(f"Images are not multiplicative at ({a}, {b})")

    @classmethod
    def identity(cls, group: FiniteGroupTable, carrier: Iterable[int]) -> FiniteAutomorphism:
        carrier = frozenset(carrier)
        return cls(group, carrier, {s: s for s in carrier})

    @classmethod
    def conjugation(cls, group: FiniteGroupTable, carrier: Iterable[int], t: int) -> FiniteAutomorphism:
        """s ↦ t⁻¹ s t."""
        carrier = frozenset(carrier)
        images = {s: group.conjugate(s, t) for s in carrier}
        if not set(images.values()) <= carrier:
            raise NotNormalError("Conjugation by t does not preserve the carrier")
        return cls(group, carrier, images)

    @classmethod
    def from_permutation(cls, group: FiniteGroupTable, permutation: list[int]) -> FiniteAutomorphism:
        """Whole-group automorphism stored as an index permutation (catalog JSON form)."""
        return cls(group, frozenset(group.elements()), dict(enumerate(permutation)))

    def __call__(self, s: int) -> int:
        return self.images[s]

    def power(self, k: int) -> FiniteAutomorphism:
        images = {s: s for s in self.carrier}
        for _ in range(k):
            images = {s: self.images[v] for s, v in images.items()}
        return FiniteAutomorphism(self.group, self.carrier, images)

    def inner_witness(self) -> Optional[int]:
        """x ∈ S with sφ = x⁻¹ s x for all s, if φ is inner."""
        for x in sorted(self.carrier):
            if all(self.group.conjugate(s, x) == self.images[s] for s in self.carrier):
                return x
        return None

    def period(self) -> tuple[int, int]:
        """Least n ≥ 1 with φⁿ inner, and the witness x."""
        current = self
        n = 1
        while True:
            x = current.inner_witness()
            if x is not None:
                return n, x
            current = FiniteAutomorphism(
                self.group, self.carrier, {s: self.images[v] for s, v in current.images.items()}
            )
            n += 1


def twisted_class(phi: FiniteAutomorphism, g: int) -> frozenset[int]:
    """[g]_φ = {(h⁻¹φ) g h : h ∈ S}."""
    group = phi.group
    return frozenset(group.product((group.inv(phi(h)), g, h)) for h in phi.carrier)


def twisted_classes_finite(phi: FiniteAutomorphism) -> list[frozenset[int]]:
    classes: list[frozenset[int]] = []
    seen: set[int] = set()
    for g in sorted(phi.carrier):
        if g in seen:
            continue
        current = twisted_class(phi, g)
        classes.append(current)
        seen |= current
    return classes


def check_extension_structure(group: FiniteGroupTable, subgroup: Iterable[int], t: int) -> frozenset[int]:
    subgroup = frozenset(subgroup)
    if not group.is_normal(subgroup):
        raise NotNormalError(f"{sorted(subgroup)} is not a normal subgroup of {group.name}")
    if group.generate(set(subgroup) | {t}) != frozenset(group.elements()):
        raise StructureError(f"{group.name} is not generated by S and t = {t}")
    return subgroup


@dataclass
class VerificationReport:
    name: str
    results: dict[int, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    @property
    def failures(self) -> list[int]:
        return [g for g, ok in self.results.items() if not ok]


def verify_prop_twisted(group: FiniteGroupTable, subgroup: Iterable[int], t: int) -> VerificationReport:
    """For every g ∈ S: (class of tg) ∩ tS equals t·[g]_φ with φ = conjugation by t."""
    subgroup = check_extension_structure(group, subgroup, t)
    phi = FiniteAutomorphism.conjugation(group, subgroup, t)
    coset = frozenset(group.mul(t, s) for s in subgroup)
    report = VerificationReport(f"twisted:{group.name}")
    for g in sorted(subgroup):
        tg = group.mul(t, g)
        lhs = group.conjugacy_class(tg) & coset
        rhs = frozenset(group.mul(t, x) for x in twisted_class(phi, g))
        report.results[g] = lhs == rhs
    logger.debug("%s: %s of %s elements pass", report.name, sum(report.results.values()), len(report.results))
    return report


@dataclass(frozen=True)
class ConjugacyDecomposition:
    element: int
    representatives: tuple[int, ...]
    pieces: tuple[frozenset[int], ...]
    conjugacy_class: frozenset[int]

    @property
    def holds(self) -> bool:
        return frozenset().union(*self.pieces) == self.conjugacy_class


def conjugacy_decomposition(group: FiniteGroupTable, subgroup: Iterable[int], g: int) -> ConjugacyDecomposition:
    """class(g) = ∪ᵢ gᵢ [1]_{φᵢ} with gᵢ = xᵢ⁻¹ g xᵢ over coset representatives xᵢ."""
    subgroup = frozenset(subgroup)
    if not group.is_normal(subgroup):
        raise NotNormalError(f"{sorted(subgroup)} is not a normal subgroup of {group.name}")
    representatives = group.coset_representatives(subgroup)
    pieces = []
    for x in representatives:
        g_i = group.conjugate(g, x)
        phi_i = FiniteAutomorphism.conjugation(group, subgroup, g_i)
        pieces.append(frozenset(group.mul(g_i, y) for y in twisted_class(phi_i, 0)))
    return ConjugacyDecomposition(g, tuple(representatives), tuple(pieces), group.conjugacy_class(g))


def verify_decomposition(group: FiniteGroupTable, subgroup: Iterable[int]) -> VerificationReport:
    subgroup = frozenset(subgroup)
    report = VerificationReport(f"decomposition:{group.name}")
    for g in group.elements():
        report.results[g] = conjugacy_decomposition(group, subgroup, g).holds
    return report


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    group: FiniteGroupTable
    subgroup: frozenset[int]
    t: int

    @property
    def automorphism(self) -> FiniteAutomorphism:
        """Conjugation by t on the whole group; it restricts to φ on S."""
        return FiniteAutomorphism.conjugation(self.group, self.group.elements(), self.t)

    def to_payload(self) -> CatalogEntryPayload:
        phi = self.automorphism
        return CatalogEntryPayload(
            name=self.name,
            group=self.group.to_payload(),
            subgroup=sorted(self.subgroup),
            t=self.t,
            automorphism=[phi(g) for g in self.group.elements()],
        )

    @classmethod
    def from_payload(cls, payload: CatalogEntryPayload) -> CatalogEntry:
        group = FiniteGroupTable.from_payload(payload.group)
        if not 0 <= payload.t < group.order:
            raise StructureError(f"{payload.name}: t = {payload.t} is not an element id")
        phi = FiniteAutomorphism.from_permutation(group, payload.automorphism)
        if any(phi(g) != group.conjugate(g, payload.t) for g in group.elements()):
            raise InvalidAutomorphismError(f"{payload.name}: automorphism is not conjugation by t")
        return _entry(payload.name, group, payload.subgroup, payload.t)


def elements_of_order(group: FiniteGroupTable, k: int) -> list[int]:
    return [a for a in group.elements() if group.element_order(a) == k]


def _entry(name: str, group: FiniteGroupTable, subgroup: Iterable[int], t: int) -> CatalogEntry:
    return CatalogEntry(name, group, check_extension_structure(group, subgroup, t), t)


def _outside(group: FiniteGroupTable, subgroup: frozenset[int], order: int) -> int:
    return next(a for a in elements_of_order(group, order) if a not in subgroup)


def build_catalog() -> list[CatalogEntry]:
    entries: list[CatalogEntry] = []

    s3 = symmetric(3)
    a3 = s3.generate(elements_of_order(s3, 3))
    entries.append(_entry("S3/A3", s3, a3, _outside(s3, a3, 2)))

    for n in (4, 6, 8):
        d = dihedral(n)
        entries.append(_entry(f"D{2 * n}/Z{n}", d, range(n), n))

    entries.append(_entry("S3xZ2/S3", direct_product(s3, cyclic(2)), range(0, 12, 2), 1))
    entries.append(_entry("Z4xZ2/Z4", direct_product(cyclic(4), cyclic(2)), range(0, 8, 2), 1))
    entries.append(_entry("Z8/Z4", cyclic(8), range(0, 8, 2), 1))
    entries.append(_entry("Z6/Z3", cyclic(6), range(0, 6, 2), 1))
    entries.append(_entry("Z2/1", cyclic(2), [0], 1))

    q8 = quaternion()
    z4 = q8.generate([elements_of_order(q8, 4)[0]])
    entries.append(_entry("Q8/Z4", q8, z4, _outside(q8, z4, 4)))

    entries.append(_entry("Z7:Z3/Z7", semidirect(7, 3, 2), range(7), 7))
    entries.append(_entry("Z5:Z4/Z5", semidirect(5, 4, 2), range(5), 5))

    a4 = alternating(4)
    v4 = frozenset([0, *elements_of_order(a4, 2)])
    entries.append(_entry("A4/V4", a4, v4, elements_of_order(a4, 3)[0]))

    s4 = symmetric(4)
    a4_in_s4 = s4.generate(elements_of_order(s4, 3))
    entries.append(_entry("S4/A4", s4, a4_in_s4, _outside(s4, a4_in_s4, 2)))

    s3s3 = direct_product(s3, s3)
    # S3 x A3, ids i·6 + j
    s3a3 = frozenset(i * 6 + j for i in s3.elements() for j in a3)
    transposition = _outside(s3, a3, 2)
    entries.append(_entry("S3xS3/S3xA3", s3s3, s3a3, transposition))
    return entries


def dump_catalog(entries: Iterable[CatalogEntry], path: Path) -> None:
    data = [entry.to_payload().model_dump() for entry in entries]
    Path(path).write_text(json.dumps(data), encoding="utf-8")


def load_catalog(path: Path) -> list[CatalogEntry]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CatalogFormatError(f"Cannot read {path}: {exc.strerror}") from exc
    if not isinstance(payload, list):
        raise CatalogFormatError("A catalog file holds a JSON list of entries")
    entries = [CatalogEntry.from_payload(CatalogEntryPayload.model_validate(item)) for item in payload]
    logger.info("Loaded %s catalog entries from %s", len(entries), path)
    return entries


# Presentation carriers


@dataclass(frozen=True)
class Carrier:
    """A free group or a closed surface group on named generators."""

    alphabet: Alphabet
    surface: Optional[SurfacePresentation] = None

    @classmethod
    def free(cls, rank: int) -> Carrier:
        return cls(Alphabet.free(rank))

    @classmethod
    def surface_group(cls, genus: int) -> Carrier:
        presentation = SurfacePresentation(genus)
        return cls(presentation.alphabet, presentation)

    @property
    def rank(self) -> int:
        return self.alphabet.rank

    @property
    def relators(self) -> list[Word]:
        return [self.surface.relator_word] if self.surface else []

    def is_trivial(self, w: Word) -> bool:
        if self.surface is None:
            return not free_reduce(w)
        return is_trivial(self.surface, w)

    def equal(self, u: Word, v: Word) -> bool:
        return self.is_trivial(u * v.inverse())


@dataclass(frozen=True)
class PresentationAutomorphism:
    """Virtually inner automorphism of a carrier: generator images, period n, witness x with gφⁿ = x⁻¹ g x."""

    carrier: Carrier
    images: tuple[Word, ...]
    period: int = 1
    inner_witness: Word = field(default_factory=Word)

    def __post_init__(self) -> None:
        if len(self.images) != self.carrier.rank:
            raise InvalidAutomorphismError(f"Need {self.carrier.rank} images, got {len(self.images)}")
        if self.period < 1:
            raise InvalidAutomorphismError("period must be >= 1")
        for relator in self.carrier.relators:
            if not self.carrier.is_trivial(self.apply(relator)):
                raise InvalidAutomorphismError("Images do not respect the relator")
        for i in range(self.carrier.rank):
            g = Word.generator(i)
            if not self.carrier.equal(self.apply_power(g, self.period), g.conjugate(self.inner_witness)):
                raise InvalidAutomorphismError(
                    f"Generator {self.carrier.alphabet.names[i]} fails gφ^{self.period} = x⁻¹ g x"
                )

    def apply(self, w: Word) -> Word:
        result = Word()
        for letter in w:
            image = self.images[letter.index]
            result = result * (image.inverse() if letter.inverted else image)
        return result

    def apply_power(self, w: Word, k: int) -> Word:
        for _ in range(k):
            w = self.apply(w)
        return w


def apply_automorphism(phi: PresentationAutomorphism, w: Word) -> Word:
    return phi.apply(w)


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.generators)

    def lines(self) -> list[str]:
        return [format_word(r, self.alphabet) for r in self.relators]

    def describe(self) -> str:
        return f"< {', '.join(self.generators)} | {', '.join(self.lines())} >"


def star_extension(phi: PresentationAutomorphism) -> GroupPresentation:
    """⟨S, t | relators of S, tⁿ x⁻¹, t⁻¹ xᵢ t (xᵢφ)⁻¹⟩."""
    carrier = phi.carrier
    t = Word.generator(carrier.rank)
    relators = list(carrier.relators)
    relators.append(t.power(phi.period) * phi.inner_witness.inverse())
    for i in range(carrier.rank):
        g = Word.generator(i)
        relators.append(g.conjugate(t) * phi.images[i].inverse())
    return GroupPresentation(carrier.alphabet.names + (STABLE_LETTER,), tuple(relators))


def is_twisted_conjugate(phi: PresentationAutomorphism, g1: Word, g2: Word, h: Word) -> bool:
    """(h⁻¹φ) g1 h = g2."""
    return phi.carrier.equal(phi.apply(h.inverse()) * g1 * h, g2)


def twisted_search(phi: PresentationAutomorphism, g1: Word, g2: Word, bound: int) -> Optional[Word]:
    """h with |h| ≤ bound and (h⁻¹φ) g1 h = g2; None means only "not found within bound"."""
    for h in enumerate_reduced_words(phi.carrier.rank, bound):
        if is_twisted_conjugate(phi, g1, g2, h):
            return h
    logger.debug("No twisted conjugator within length %s", bound)
    return None


def verify_period_minimality(phi: PresentationAutomorphism, bound: int) -> bool:
    """True when no φ^j, j < n, is conjugation by a word of length ≤ bound."""
    rank = phi.carrier.rank
    generators = [Word.generator(i) for i in range(rank)]
    for j in range(1, phi.period):
        images = [phi.apply_power(g, j) for g in generators]
        for x in enumerate_reduced_words(rank, bound):
            if all(phi.carrier.equal(image, g.conjugate(x)) for image, g in zip(images, generators)):
                logger.info("φ^%s is conjugation by a word of length %s", j, len(x))
                return False
    return True
