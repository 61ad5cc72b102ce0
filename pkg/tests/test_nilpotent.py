import random

import pytest

from app.services.nilpotent import (
    ClassLimitError,
    MagnusParams,
    SplitPreconditionError,
    TrivialWordError,
    TruncatedPoly,
    central_split,
    crt_order_witness,
    lcs_class,
    magnus_eval,
    order_witness,
    reduce_central_order,
    unit_group_table,
)
from app.services.seifert import SeifertPresentation
from app.services.words import Alphabet, Word, commutator

F2 = Alphabet.free(2)
X = F2.word('x')
Y = F2.word('y')
XY_COMMUTATOR = commutator(X, Y)


def test_magnus_images_of_generators_and_inverses():
    params = MagnusParams(2, 3, 5, 1)

    assert magnus_eval(params, X).coefficients == {(): 1, (0,): 1}
    assert magnus_eval(params, F2.word('X')).coefficients == {(): 1, (0,): 4, (0, 0): 1, (0, 0, 0): 4}
    assert magnus_eval(params, F2.word('x', 'X')).is_one


def test_commutator_image_starts_in_degree_two():
    image = magnus_eval(MagnusParams(2, 2, 7, 1), XY_COMMUTATOR)

    assert image.homogeneous(1) == {}
    assert image.homogeneous(2) == {(0, 1): 1, (1, 0): 6}


def test_truncated_power_matches_repeated_product():
    g = TruncatedPoly.generator_image(0, False, 3, 0)

    assert (g ** 3).coefficients == {(): 1, (0,): 3, (0, 0): 3, (0, 0, 0): 1}
    with pytest.raises(ValueError):
        g ** -1


@pytest.mark.parametrize(
    'word, expected',
    [
        (X, 1),
        (F2.word('x', 'y', 'x'), 1),
        (XY_COMMUTATOR, 2),
        (commutator(XY_COMMUTATOR, Y), 3),
        (commutator(commutator(XY_COMMUTATOR, Y), X), 4),
    ],
)
def test_lcs_class(word: Word, expected: int):
    assert lcs_class(word) == expected


def test_lcs_class_limits():
    with pytest.raises(TrivialWordError):
        lcs_class(Word())
    with pytest.raises(ClassLimitError):
        lcs_class(XY_COMMUTATOR, c_max=1)


@pytest.mark.parametrize('prime', [2, 3, 5])
@pytest.mark.parametrize('k', [1, 2, 3])
@pytest.mark.parametrize(
    'word',
    [X, Y, X.power(2), XY_COMMUTATOR, commutator(XY_COMMUTATOR, Y), F2.word('x', 'y', 'X', 'Y', 'x')],
)
def test_order_witness_has_exact_central_order(word: Word, prime: int, k: int):
    witness = order_witness(word, prime, k)

    assert witness.verified_order == prime ** k
    assert witness.centrality_checked
    assert witness.params.degree_class == lcs_class(word)
    assert not (witness.image ** (prime ** (k - 1))).is_one
    assert (witness.image ** (prime ** k)).is_one


def test_order_witness_accounts_for_divisible_leading_terms():
    witness = order_witness(X.power(4), 2, 1)

    assert witness.valuation == 2
    assert witness.params.modulus == 8
    assert witness.verified_order == 2
    assert order_witness(X.power(4), 3, 1).valuation == 0


def test_order_witness_rejects_trivial_word_and_bad_parameters():
    with pytest.raises(TrivialWordError):
        order_witness(Word(), 2, 1)
    with pytest.raises(ValueError):
        order_witness(X, 2, 0)
    with pytest.raises(ValueError):
        MagnusParams(2, 2, 4, 1)


def test_reduce_central_order_lowers_the_exponent():
    witness = order_witness(XY_COMMUTATOR, 2, 3)
    reduced = reduce_central_order(witness, 1)

    assert reduced.verified_order == 2
    assert reduce_central_order(witness, 3) is witness
    with pytest.raises(ValueError):
        reduce_central_order(reduced, 2)


def test_payload_uses_alphabet_names():
    payload = order_witness(XY_COMMUTATOR, 3, 2).to_payload(F2)

    assert payload.word == 'x y x^-1 y^-1'
    assert payload.verified_order == 9
    assert payload.prime == 3
    assert payload.exponent == 2


@pytest.mark.parametrize('n', [1, 6, 12, 35])
def test_crt_order_witness_composes_prime_powers(n: int):
    witness = crt_order_witness(XY_COMMUTATOR, n)

    assert witness.order == n
    assert [c.params.prime for c in witness.components] == sorted({c.params.prime for c in witness.components})
    assert witness.is_trivial(XY_COMMUTATOR.power(n))
    assert witness.is_trivial(Word())


def test_crt_order_witness_separates_generator_from_identity():
    witness = crt_order_witness(X, 6)

    assert not witness.is_trivial(X)
    assert not witness.is_trivial(X.power(3))
    assert witness.is_trivial(X.power(6))


@pytest.mark.parametrize(
    'genus, euler_degree, modulus, relator_order',
    [(2, 1, 2, 2), (2, 1, 3, 3), (2, 2, 4, 2), (2, 3, 3, 1), (2, 3, 6, 2), (2, 0, 3, 1)],
)
def test_central_split_has_no_violations(genus, euler_degree, modulus, relator_order):
    p = SeifertPresentation.surface(genus, euler_degree=euler_degree, fiber_modulus=modulus)
    certificate = central_split(p)

    violations = certificate.validate(60, random.Random(3))

    assert certificate.relator_order == relator_order
    assert violations == 0
    assert certificate.samples_checked > 0


def test_central_split_kernel_tracks_relator_parity():
    p = SeifertPresentation.surface(2, euler_degree=1, fiber_modulus=2)
    certificate = central_split(p)
    relator = p.relator_word

    assert not certificate.in_kernel(relator)
    assert certificate.in_kernel(relator.power(2))
    assert certificate.fiber_is_trivial(relator.power(2)) is True
    assert certificate.fiber_is_trivial(relator) is None


@pytest.mark.parametrize(
    'p',
    [
        SeifertPresentation.torus(euler_degree=1, fiber_modulus=2),
        SeifertPresentation.surface(2, euler_degree=1),
        SeifertPresentation.surface(2, epsilon=(-1, 1, 1, 1), fiber_modulus=2),
    ],
)
def test_central_split_preconditions(p):
    with pytest.raises(SplitPreconditionError):
        central_split(p)


def test_unit_group_table_of_abelian_quotient():
    built = unit_group_table(MagnusParams(2, 1, 2, 1), 16)

    assert built is not None
    table, generators = built
    assert table.order == 4
    assert table.is_abelian
    assert generators == [1, 2]
    assert unit_group_table(MagnusParams(2, 1, 2, 1), 3) is None


def test_unit_group_table_of_class_two_is_non_abelian():
    built = unit_group_table(MagnusParams(2, 2, 2, 1), 256)

    assert built is not None
    table, generators = built
    assert not table.is_abelian
    assert all(table.element_order(g) in (2, 4) for g in generators)
