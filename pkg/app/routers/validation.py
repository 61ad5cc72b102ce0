from __future__ import annotations

from fastapi import HTTPException

from app.models.group import PresentationDescriptor
from app.services.seifert import FiberedElement, SeifertPresentation, collect
from app.services.surface import ClosureLimitError
from app.utils.parsing import PresentationParseError, WordParseError, parse_word, presentation_from_descriptor


def presentation_or_raise(descriptor: PresentationDescriptor) -> SeifertPresentation:
    try:
        return presentation_from_descriptor(descriptor)
    except (PresentationParseError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def elements_or_raise(p: SeifertPresentation, words: list[str], count: int) -> list[FiberedElement]:
    if len(words) != count:
        raise HTTPException(status_code=400, detail=f"Expected {count} word(s), got {len(words)}")
    try:
        return [collect(p, parse_word(text, p.alphabet)) for text in words]
    except WordParseError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def closure_limit_or_raise(call, *args):
    try:
        return call(*args)
    except ClosureLimitError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
