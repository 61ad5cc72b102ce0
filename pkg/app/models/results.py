from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt


class LambdaPair(BaseModel):
    """Fiber offsets preserving a conjugacy class: λZ, plus λZ + λ₀ when present."""

    lambda_: int = Field(0, alias="lambda", ge=0)
    lambda0: Optional[int] = None

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    def contains(self, n: int) -> bool:
        if self.lambda_ == 0:
            return n == 0 or (self.lambda0 is not None and n == self.lambda0)
        if n % self.lambda_ == 0:
            return True
        return self.lambda0 is not None and (n - self.lambda0) % self.lambda_ == 0

    def image_mod(self, modulus: int) -> set[int]:
        """Residues mod N hit by the lattice; at most N of them."""
        steps = range(modulus) if self.lambda_ else range(1)
        image = {(k * self.lambda_) % modulus for k in steps}
        if self.lambda0 is not None:
            image |= {(k * self.lambda_ + self.lambda0) % modulus for k in steps}
        return image

    def contains_mod(self, n: int, modulus: int) -> bool:
        return n % modulus in self.image_mod(modulus)

    def window(self, low: int, high: int) -> list[int]:
        return [n for n in range(low, high + 1) if self.contains(n)]

    def describe(self) -> str:
        text = f"lambda={self.lambda_}"
        if self.lambda0 is not None:
            text += f" lambda0={self.lambda0}"
        return text


class SearchBudget(BaseModel):
    """Limits for the finite-quotient witness search.

    A fixed seed gives a fixed candidate order. The time limit is checked between
    targets and is the only cutoff that depends on the clock.
    """

    max_target_order: PositiveInt = 256
    max_candidates: PositiveInt = 10000
    time_limit_seconds: PositiveFloat = 60.0
    seed: int = Field(0, ge=0)

    @classmethod
    def from_settings(cls) -> SearchBudget:
        from app.config import settings

        return cls(
            max_target_order=settings.witness_max_target_order,
            max_candidates=settings.witness_max_candidates,
            time_limit_seconds=settings.witness_time_limit_seconds,
            seed=settings.witness_seed,
        )


class OrderWitnessPayload(BaseModel):
    """JSON form of a nilpotent order witness (sparse coefficients)."""

    word: str
    rank: int
    degree_class: int
    prime: int
    exponent: int
    valuation: int
    verified_order: int
    centrality_checked: bool
    coefficients: list[tuple[list[int], int]] = Field(default_factory=list)


class TargetTable(BaseModel):
    """A finite group given by its multiplication table."""

    name: str
    labels: list[str]
    table: list[list[int]]


class WitnessCertificate(BaseModel):
    """Finite quotient in which two elements have non-conjugate images."""

    stage1_modulus: int
    word_g1: str
    word_g2: str
    target: TargetTable
    generator_images: dict[str, int]
    image_g1: int
    image_g2: int
    relations_checked: list[str] = Field(default_factory=list)
    conjugacy_class_g1: list[int] = Field(default_factory=list)
    candidates_tried: int = 0


class WitnessOutcome(BaseModel):
    """Result of find_witness: conjugate, certificate, or budget exhausted."""

    status: str  # "conjugate" | "certificate" | "budget_exhausted"
    certificate: Optional[WitnessCertificate] = None
    conjugator: Optional[str] = None
    candidates_tried: int = 0
    detail: Optional[str] = None


class CatalogEntryPayload(BaseModel):
    """A cyclic extension G = ⟨S, t⟩ in catalog JSON form."""

    name: str
    group: TargetTable
    subgroup: list[int]
    t: int
    automorphism: list[int]  # conjugation by t, as an index permutation of the group
