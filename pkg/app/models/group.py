from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.results import SearchBudget


class BaseDescriptor(BaseModel):
    """Base orbifold of the fibration; cone points are rejected downstream."""

    kind: Literal["surface", "torus", "free"]
    genus: Optional[int] = Field(None, ge=2)
    rank: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_size(self) -> "BaseDescriptor":
        if self.kind == "surface" and self.genus is None:
            raise ValueError("surface bases need a genus")
        if self.kind == "free" and self.rank is None:
            raise ValueError("free bases need a rank")
        return self


class PresentationDescriptor(BaseModel):
    """JSON form of a Seifert presentation."""

    base: BaseDescriptor
    euler_degree: int = 0
    epsilon: dict[str, int] = Field(default_factory=dict)
    fiber_modulus: int = Field(0, ge=0)
    cone_points: list[tuple[int, int]] = Field(default_factory=list)

    @field_validator("epsilon")
    @classmethod
    def check_signs(cls, value: dict[str, int]) -> dict[str, int]:
        for name, sign in value.items():
            if sign not in (1, -1):
                raise ValueError(f"epsilon[{name}] must be +1 or -1")
        return value


class GroupRequest(BaseModel):
    """Body of the /api/groups endpoints."""

    group: PresentationDescriptor
    words: list[str] = Field(default_factory=list)
    budget: Optional[SearchBudget] = None
