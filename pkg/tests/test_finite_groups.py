import numpy as np
import pytest

from app.services.finite_groups import (
    FiniteGroupTable,
    InvalidTableError,
    alternating,
    cyclic,
    dihedral,
    direct_product,
    quaternion,
    semidirect,
    symmetric,
)


@pytest.mark.parametrize(
    'group, order, class_count, abelian',
    [
        (cyclic(5), 5, 5, True),
        (dihedral(4), 8, 5, False),
        (dihedral(3), 6, 3, False),
        (symmetric(3), 6, 3, False),
        (symmetric(4), 24, 5, False),
        (alternating(4), 12, 4, False),
        (quaternion(), 8, 5, False),
        (semidirect(7, 3, 2), 21, 5, False),
        (direct_product(cyclic(2), cyclic(3)), 6, 6, True),
    ],
)
def test_standard_groups(group: FiniteGroupTable, order: int, class_count: int, abelian: bool):
    assert group.order == order
    assert len(group.conjugacy_classes()) == class_count
    assert group.is_abelian is abelian
    assert all(group.mul(a, group.inv(a)) == 0 for a in group.elements())


def test_conjugacy_class_matches_brute_force():
    group = symmetric(4)
    for g in group.elements():
        expected = {group.mul(group.mul(group.inv(w), g), w) for w in group.elements()}
        assert group.conjugacy_class(g) == frozenset(expected)


def test_quaternion_has_a_single_involution():
    q8 = quaternion()

    assert sorted(q8.element_order(a) for a in q8.elements()) == [1, 2, 4, 4, 4, 4, 4, 4]


def test_dihedral_rotations_come_first():
    d8 = dihedral(4)

    assert d8.element_order(1) == 4
    assert d8.element_order(4) == 2
    assert d8.is_normal(range(4))
    assert d8.coset_representatives(range(4)) == [0, 4]
    assert d8.conjugate(1, 4) == 3


def test_subgroup_checks():
    s3 = symmetric(3)
    involution = next(a for a in s3.elements() if s3.element_order(a) == 2)

    assert s3.is_subgroup({0, involution})
    assert not s3.is_normal({0, involution})
    assert not s3.is_subgroup({involution})
    assert s3.generate([involution]) == frozenset({0, involution})


def test_power_and_product():
    z6 = cyclic(6)

    assert z6.power(5, 3) == 3
    assert z6.power(1, -1) == 5
    assert z6.product([1, 2, 4]) == 1


def test_direct_product_ids():
    group = direct_product(cyclic(2), cyclic(3))

    # (1, 1) * (1, 2) = (0, 0)
    assert group.mul(1 * 3 + 1, 1 * 3 + 2) == 0
    assert group.name == 'Z2xZ3'


@pytest.mark.parametrize(
    'rows',
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 1]],
        [[0, 1, 2], [1, 2, 0]],
        [[0, 1, 5], [1, 0, 2], [2, 1, 0]],
    ],
)
def test_invalid_tables_are_rejected(rows):
    with pytest.raises(InvalidTableError):
        FiniteGroupTable.from_rows(rows)


def test_non_associative_loop_is_rejected():
    # smallest loop that is not a group
    rows = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]

    with pytest.raises(InvalidTableError):
        FiniteGroupTable.from_rows(rows)


def test_semidirect_requires_a_valid_action():
    with pytest.raises(InvalidTableError):
        semidirect(5, 2, 2)


def test_from_closure_builds_cyclic_group():
    group = FiniteGroupTable.from_closure(0, [1], lambda a, b: (a + b) % 4, name='mod4')

    assert group.order == 4
    assert np.array_equal(group.table, cyclic(4).table)


def test_tables_survive_payload_round_trip():
    loaded = [FiniteGroupTable.from_payload(group.to_payload()) for group in (dihedral(3), quaternion())]

    assert [t.name for t in loaded] == ['D6', 'Q8']
    assert np.array_equal(loaded[1].table, quaternion().table)
