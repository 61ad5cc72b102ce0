import json

import pytest

from app.services.seifert import BaseKind, SeifertPresentation
from app.services.words import Alphabet, Letter, Word
from app.utils.parsing import (
    PresentationParseError,
    WordParseError,
    descriptor_for,
    load_presentation,
    parse_presentation,
    parse_word,
)

GENUS_TWO = Alphabet.standard_surface(2)


def test_parse_word_handles_inverses_powers_and_fiber():
    w = parse_word('a1 B1 h^-2', GENUS_TWO)

    assert w == Word((Letter(0), Letter(1, True), Letter(4, True), Letter(4, True)))


@pytest.mark.parametrize('text', ['1', '', 'a1^0', '  1  1 '])
def test_parse_word_identity_forms(text: str):
    assert parse_word(text, GENUS_TWO) == Word()


def test_parse_word_uppercase_power_flips_sign():
    assert parse_word('A2^-2', GENUS_TWO) == Word((Letter(2), Letter(2)))


def test_parse_word_reports_position_and_suggestion_for_unknown_names():
    with pytest.raises(WordParseError) as exc_info:
        parse_word('a1\nb2  a11', GENUS_TWO)

    error = exc_info.value
    assert (error.line, error.column) == (2, 5)
    assert error.token == 'a11'
    assert error.suggestion == 'a1'
    assert 'did you mean' in str(error)


@pytest.mark.parametrize('text', ['a1^', 'aB1', 'a1^x', '^2'])
def test_parse_word_rejects_malformed_tokens(text: str):
    with pytest.raises(WordParseError):
        parse_word(text, GENUS_TWO)


def test_parse_word_can_forbid_the_fiber():
    with pytest.raises(WordParseError):
        parse_word('x h', Alphabet.free(2), allow_fiber=False)


def test_parse_presentation_from_text_and_dict():
    document = {'base': {'kind': 'free', 'rank': 1}, 'epsilon': {'x': -1}}

    from_dict = parse_presentation(document)
    from_text = parse_presentation(json.dumps(document))

    assert from_dict == from_text
    assert from_dict.kind is BaseKind.FREE
    assert from_dict.epsilon == (-1,)


def test_parse_presentation_drops_all_positive_epsilon():
    p = parse_presentation({'base': {'kind': 'torus'}, 'euler_degree': 1, 'epsilon': {'x': 1}})

    assert p == SeifertPresentation.torus(euler_degree=1)


@pytest.mark.parametrize(
    'document',
    [
        '{"base": ',
        {'base': {'kind': 'surface', 'genus': 1}},
        {'base': {'kind': 'surface'}},
        {'base': {'kind': 'free'}},
        {'base': {'kind': 'sphere'}},
        {'base': {'kind': 'torus'}, 'epsilon': {'z': -1}},
        {'base': {'kind': 'torus'}, 'epsilon': {'x': 2}},
        {'base': {'kind': 'torus'}, 'euler_degree': 1, 'epsilon': {'x': -1}},
        {'base': {'kind': 'free', 'rank': 2}, 'euler_degree': 1},
        {'base': {'kind': 'surface', 'genus': 2}, 'cone_points': [[2, 1]]},
        {'base': {'kind': 'torus'}, 'fiber_modulus': -1},
    ],
)
def test_parse_presentation_rejects_bad_descriptors(document):
    with pytest.raises(PresentationParseError):
        parse_presentation(document)


def test_load_presentation_reads_files(tmp_path):
    path = tmp_path / 'genus2.json'
    path.write_text('{"base": {"kind": "surface", "genus": 2}, "euler_degree": 1, "fiber_modulus": 4}', encoding='utf-8')

    p = load_presentation(path)

    assert p == SeifertPresentation.surface(2, euler_degree=1, fiber_modulus=4)


def test_load_presentation_missing_file(tmp_path):
    with pytest.raises(PresentationParseError):
        load_presentation(tmp_path / 'missing.json')


def test_descriptor_for_rebuilds_the_presentation():
    p = SeifertPresentation.free(2, epsilon=(1, -1), fiber_modulus=3)
    descriptor = descriptor_for(p)

    assert descriptor.epsilon == {'y': -1}
    assert parse_presentation(descriptor.model_dump()) == p
