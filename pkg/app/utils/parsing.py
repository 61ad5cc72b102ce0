"""Text grammar for mixed words and JSON presentation descriptors."""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError
from rapidfuzz import fuzz, process

from app.models.group import PresentationDescriptor
from app.services.seifert import BaseKind, InvalidPresentationError, SeifertPresentation
from app.services.words import FIBER_NAME, IDENTITY_TOKEN, Alphabet, Letter, Word

TOKEN_RE = re.compile(r"^([A-Za-z][A-Za-z0-9]*)(?:\^([+-]?\d+))?$")
SUGGESTION_CUTOFF = 60


class WordParseError(ValueError):
    """Raised when word text does not match the grammar or names an unknown generator."""

    def __init__(self, message: str, line: int, column: int, token: str, suggestion: Optional[str] = None):
        self.line = line
        self.column = column
        self.token = token
        self.suggestion = suggestion
        text = f"{message} at line {line}, column {column}: {token!r}"
        if suggestion:
            text += f" (did you mean {suggestion!r}?)"
        super().__init__(text)


class PresentationParseError(ValueError):
    """Raised when a presentation descriptor is malformed."""


def suggest_name(name: str, candidates: list[str]) -> Optional[str]:
    match = process.extractOne(name, candidates, scorer=fuzz.WRatio, score_cutoff=SUGGESTION_CUTOFF)
    return match[0] if match else None


def parse_word(text: str, alphabet: Alphabet, allow_fiber: bool = True) -> Word:
    """Parse whitespace-separated tokens; the fiber h has index alphabet.rank."""
    known = list(alphabet.names) + ([FIBER_NAME] if allow_fiber else [])
    letters: list[Letter] = []
    for line_number, line in enumerate(text.splitlines() or [""], start=1):
        for match in re.finditer(r"\S+", line):
            token = match.group(0)
            column = match.start() + 1
            if token == IDENTITY_TOKEN:
                continue
            parsed = TOKEN_RE.match(token)
            if parsed is None:
                raise WordParseError("Malformed token", line_number, column, token)
            raw_name, power_text = parsed.groups()
            name = raw_name.lower()
            power = int(power_text) if power_text is not None else 1
            if raw_name != name:
                if raw_name != raw_name.upper():
                    raise WordParseError("Mixed-case generator", line_number, column, token)
                power = -power
            if name not in known:
                raise WordParseError(
                    "Unknown generator", line_number, column, token, suggest_name(name, known)
                )
            index = alphabet.rank if name == FIBER_NAME else alphabet.index(name)
            letters.extend(Word.generator(index, power).letters)
    return Word(tuple(letters))


def presentation_from_descriptor(descriptor: PresentationDescriptor) -> SeifertPresentation:
    base = descriptor.base
    kind = BaseKind(base.kind)
    try:
        if kind is BaseKind.SURFACE:
            alphabet = Alphabet.standard_surface(base.genus)
        elif kind is BaseKind.TORUS:
            alphabet = Alphabet(("x", "y"))
        else:
            alphabet = Alphabet.free(base.rank)
        unknown = set(descriptor.epsilon) - set(alphabet.names)
        if unknown:
            raise PresentationParseError(f"epsilon names unknown generators: {sorted(unknown)}")
        epsilon = tuple(descriptor.epsilon.get(name, 1) for name in alphabet.names)
        if all(value == 1 for value in epsilon):
            epsilon = ()
        return SeifertPresentation(
            kind,
            genus=(base.genus or 0) if kind is BaseKind.SURFACE else 0,
            free_rank=(base.rank or 0) if kind is BaseKind.FREE else 0,
            euler_degree=descriptor.euler_degree,
            epsilon=epsilon,
            fiber_modulus=descriptor.fiber_modulus,
            cone_points=tuple(tuple(point) for point in descriptor.cone_points),
        )
    except InvalidPresentationError as exc:
        raise PresentationParseError(str(exc)) from exc


def parse_presentation(document: Union[str, dict]) -> SeifertPresentation:
    """Build a presentation from descriptor JSON text or an already-decoded dict."""
    try:
        data = json.loads(document) if isinstance(document, str) else document
        descriptor = PresentationDescriptor.model_validate(data)
    except json.JSONDecodeError as exc:
        raise PresentationParseError(f"Invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except ValidationError as exc:
        raise PresentationParseError(f"Invalid presentation descriptor: {exc.errors()[0]['msg']}") from exc
    return presentation_from_descriptor(descriptor)


def load_presentation(path: Path) -> SeifertPresentation:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PresentationParseError(f"Cannot read {path}: {exc.strerror}") from exc
    return parse_presentation(text)


def descriptor_for(p: SeifertPresentation) -> PresentationDescriptor:
    base: dict = {"kind": p.kind.value}
    if p.kind is BaseKind.SURFACE:
        base["genus"] = p.genus
    elif p.kind is BaseKind.FREE:
        base["rank"] = p.free_rank
    epsilon = {name: sign for name, sign in zip(p.alphabet.names, p.epsilon) if sign == -1}
    return PresentationDescriptor.model_validate(
        {"base": base, "euler_degree": p.euler_degree, "epsilon": epsilon, "fiber_modulus": p.fiber_modulus}
    )
