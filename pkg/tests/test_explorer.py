import itertools
import random

import pytest

from app.models.results import SearchBudget
from app.services import explorer
from app.services.explorer import (
    candidate_targets,
    certificate_schema,
    choose_stage_one_modulus,
    find_witness,
    relation_descriptions,
    relations_hold,
    replay_certificate,
)
from app.services.finite_groups import cyclic
from app.services.seifert import (
    SeifertPresentation,
    are_conjugate,
    collect,
    conjugate_by,
    equal,
    lambda_invariants,
    random_element,
)
from app.utils.parsing import parse_word

KLEIN = SeifertPresentation.free(1, epsilon=(-1,))
HEISENBERG = SeifertPresentation.torus(euler_degree=1)
GENUS_TWO = SeifertPresentation.surface(2, euler_degree=1)
TWISTED_FREE = SeifertPresentation.free(2, epsilon=(1, -1))
SMALL_BUDGET = SearchBudget(max_target_order=32, max_candidates=2000, time_limit_seconds=60.0, seed=0)


def el(p: SeifertPresentation, text: str):
    return collect(p, parse_word(text, p.alphabet))


def test_klein_pair_gets_a_replayable_certificate():
    outcome = find_witness(KLEIN, el(KLEIN, 'x'), el(KLEIN, 'x h'))

    assert outcome.status == 'certificate'
    certificate = outcome.certificate
    assert certificate.stage1_modulus == 2
    assert certificate.generator_images['h'] != 0
    assert certificate.word_g2 == 'x h'
    assert replay_certificate(KLEIN, certificate)


def test_conjugate_pair_reports_the_conjugator():
    outcome = find_witness(KLEIN, el(KLEIN, 'x'), el(KLEIN, 'x h^2'))

    assert outcome.status == 'conjugate'
    assert outcome.certificate is None
    assert outcome.conjugator is not None


def test_heisenberg_base_separation():
    outcome = find_witness(HEISENBERG, el(HEISENBERG, 'x'), el(HEISENBERG, 'y'))

    assert outcome.status == 'certificate'
    assert replay_certificate(HEISENBERG, outcome.certificate)
    assert 'R = h^1' in outcome.certificate.relations_checked


def test_tampered_certificates_fail_replay():
    certificate = find_witness(KLEIN, el(KLEIN, 'x'), el(KLEIN, 'x h')).certificate

    swapped = certificate.model_copy(update={'image_g2': certificate.image_g1})
    wrong_h = certificate.model_copy(update={'generator_images': {**certificate.generator_images, 'h': 0}})
    missing = certificate.model_copy(update={'generator_images': {'x': 0}})

    assert not replay_certificate(KLEIN, swapped)
    assert not replay_certificate(KLEIN, wrong_h)
    assert not replay_certificate(KLEIN, missing)


def test_budget_exhaustion_is_reported():
    budget = SearchBudget(max_target_order=2, max_candidates=5, time_limit_seconds=5.0, seed=1)

    outcome = find_witness(GENUS_TWO, el(GENUS_TWO, 'a1'), el(GENUS_TWO, 'a1 h'), budget)

    assert outcome.status == 'budget_exhausted'
    assert outcome.candidates_tried <= 5
    assert 'stage-1 modulus 2' in outcome.detail


def test_stage_one_modulus_leaves_the_lattice():
    g1, g2 = el(KLEIN, 'x'), el(KLEIN, 'x h^3')
    result = are_conjugate(KLEIN, g1, g2)

    modulus = choose_stage_one_modulus(KLEIN, result)

    assert modulus == 2
    assert not result.lambda_pair.contains_mod(result.fiber_offset, modulus)


def test_stage_one_modulus_for_rigid_fiber_uses_the_sweep():
    result = are_conjugate(GENUS_TWO, el(GENUS_TWO, 'a1'), el(GENUS_TWO, 'a1 h^6'))

    assert choose_stage_one_modulus(GENUS_TWO, result) == 4


def test_stage_one_modulus_respects_finite_fiber():
    p = KLEIN.quotient(6)
    result = are_conjugate(p, el(p, 'x'), el(p, 'x h'))

    modulus = choose_stage_one_modulus(p, result)

    assert 6 % modulus == 0
    assert not result.lambda_pair.contains_mod(result.fiber_offset, modulus)


def test_relations_hold_checks_orientation_action():
    z2 = cyclic(2)

    assert relations_hold(KLEIN, 2, z2, [0], 1)
    assert not relations_hold(KLEIN, 3, cyclic(3), [0], 1)
    assert relation_descriptions(KLEIN, 2) == ['x^-1 h x = h^-1', 'h^2 = 1']


@pytest.mark.parametrize('max_order', [4, 16])
def test_candidate_targets_respect_max_order(max_order: int):
    targets = list(candidate_targets(HEISENBERG, max_order))

    assert targets[0].source == 'cyclic'
    assert all(t.table.order <= max_order for t in targets)


def test_certificate_schema_lists_fields():
    schema = certificate_schema()

    assert 'stage1_modulus' in schema['properties']
    assert 'generator_images' in schema['required']


@pytest.mark.parametrize('p', [KLEIN, HEISENBERG, GENUS_TWO, TWISTED_FREE, HEISENBERG.quotient(4)])
@pytest.mark.parametrize('seed', range(8))
def test_conjugate_pairs_are_never_certified(p, seed: int):
    rng = random.Random(seed)
    g = random_element(p, rng, max_length=4)
    g2 = conjugate_by(p, g, random_element(p, rng, max_length=3))

    outcome = find_witness(p, g, g2, SMALL_BUDGET)

    assert outcome.status == 'conjugate'
    assert equal(p, conjugate_by(p, g, el(p, outcome.conjugator)), g2)


@pytest.mark.parametrize(
    'p, text',
    [
        (KLEIN, 'x'),
        (KLEIN, 'x^2 h'),
        (KLEIN, 'h'),
        (TWISTED_FREE, 'x'),
        (TWISTED_FREE, 'y'),
        (TWISTED_FREE, 'x y'),
        (SeifertPresentation.torus(euler_degree=2), 'x'),
        (SeifertPresentation.torus(euler_degree=2), 'x y'),
    ],
)
def test_pairs_off_the_lattice_are_never_called_conjugate(p, text: str):
    g = el(p, text)
    pair = lambda_invariants(p, g)
    n = next(n for n in range(1, 5) if not pair.contains(n))

    outcome = find_witness(p, g, el(p, f'{text} h^{n}'), SMALL_BUDGET)

    assert outcome.status != 'conjugate'
    if outcome.status == 'certificate':
        assert replay_certificate(p, outcome.certificate)


def test_same_seed_gives_the_same_outcome():
    budget = SearchBudget(max_target_order=16, max_candidates=300, time_limit_seconds=60.0, seed=5)
    g1, g2 = el(GENUS_TWO, 'a1 b1'), el(GENUS_TWO, 'a1 b1 h')

    first = find_witness(GENUS_TWO, g1, g2, budget)
    second = find_witness(GENUS_TWO, g1, g2, budget)

    assert first.model_dump() == second.model_dump()


def test_time_limit_is_checked_between_targets(monkeypatch):
    ticks = itertools.count(step=10)
    monkeypatch.setattr(explorer.time, 'monotonic', lambda: next(ticks))

    outcome = find_witness(KLEIN, el(KLEIN, 'x'), el(KLEIN, 'x h'), SearchBudget(time_limit_seconds=1.0))

    assert outcome.status == 'budget_exhausted'
    assert outcome.candidates_tried == 0
    assert outcome.detail.startswith('time limit reached')
