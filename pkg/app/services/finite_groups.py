"""Finite groups as explicit multiplication tables with 0-based element ids (identity = 0)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import AlternatingGroup, SymmetricGroup

from app.models.results import TargetTable

logger = logging.getLogger(__name__)


class InvalidTableError(ValueError):
    """Raised when a multiplication table is not a group table."""


@dataclass(frozen=True, eq=False)
class FiniteGroupTable:
    table: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    def __post_init__(self) -> None:
        t = self.table
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidTableError(f"Table must be a nonempty square array, got shape {t.shape}")
        n = t.shape[0]
        if len(self.labels) != n:
            raise InvalidTableError(f"{len(self.labels)} labels for a group of order {n}")
        if t.min() < 0 or t.max() >= n:
            raise InvalidTableError("Table entries out of range")
        ids = np.arange(n)
        if not (np.array_equal(t[0], ids) and np.array_equal(t[:, 0], ids)):
            raise InvalidTableError("Element 0 must be the identity")
        if not all(len(np.unique(row)) == n for row in t):
            raise InvalidTableError("Rows must be permutations (Latin square)")
        for a in range(n):
            # (a b) c == a (b c) for all b, c
            if not np.array_equal(t[t[a]], t[a][t]):
                raise InvalidTableError(f"Table is not associative at element {a}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], labels: Optional[Sequence[str]] = None, name: str = "") -> FiniteGroupTable:
        table = np.asarray(rows, dtype=np.int64)
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(rows)))
        return cls(table, labels, name)

    @classmethod
    def from_closure(
        cls,
        identity: Hashable,
        generators: Iterable[Hashable],
        multiply: Callable[[Hashable, Hashable], Hashable],
        name: str = "",
        label: Callable[[Hashable], str] = str,
        max_order: int = 10000,
    ) -> FiniteGroupTable:
        """Table of the group generated by hashable elements under multiply."""
        generators = list(generators)
        elements = [identity]
        index = {identity: 0}
        frontier = [identity]
        while frontier:
            next_frontier = []
            for element in frontier:
                for generator in generators:
                    product = multiply(element, generator)
                    if product not in index:
                        if len(elements) >= max_order:
                            raise InvalidTableError(f"Closure exceeds {max_order} elements")
                        index[product] = len(elements)
                        elements.append(product)
                        next_frontier.append(product)
            frontier = next_frontier
        rows = [[index[multiply(a, b)] for b in elements] for a in elements]
        return cls.from_rows(rows, [label(e) for e in elements], name)

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @cached_property
    def inverses(self) -> np.ndarray:
        return np.argmin(self.table, axis=1)

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def product(self, elements: Iterable[int]) -> int:
        result = 0
        for element in elements:
            result = int(self.table[result, element])
        return result

    def power(self, a: int, k: int) -> int:
        base = a if k >= 0 else self.inv(a)
        result = 0
        for _ in range(abs(k)):
            result = int(self.table[result, base])
        return result

    def conjugate(self, g: int, w: int) -> int:
        """w⁻¹ g w."""
        return int(self.table[self.table[self.inverses[w], g], w])

    def element_order(self, a: int) -> int:
        k, current = 1, a
        while current != 0:
            current = int(self.table[current, a])
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def conjugacy_class(self, g: int) -> frozenset[int]:
        t = self.table
        # w⁻¹ g w for every w at once
        return frozenset(int(x) for x in t[t[self.inverses, g], np.arange(self.order)])

    def conjugacy_classes(self) -> list[frozenset[int]]:
        classes: list[frozenset[int]] = []
        seen: set[int] = set()
        for g in self.elements():
            if g not in seen:
                cls_ = self.conjugacy_class(g)
                classes.append(cls_)
                seen |= cls_
        return classes

    def are_conjugate(self, a: int, b: int) -> bool:
        return b in self.conjugacy_class(a)

    def generate(self, generators: Iterable[int]) -> frozenset[int]:
        subgroup = {0}
        frontier = [0]
        generators = list(generators)
        while frontier:
            next_frontier = []
            for element in frontier:
                for g in generators:
                    product = int(self.table[element, g])
                    if product not in subgroup:
                        subgroup.add(product)
                        next_frontier.append(product)
            frontier = next_frontier
        return frozenset(subgroup)

    def is_subgroup(self, subset: Iterable[int]) -> bool:
        subset = frozenset(subset)
        if 0 not in subset:
            return False
        return all(self.mul(a, self.inv(b)) in subset for a in subset for b in subset)

    def is_normal(self, subset: Iterable[int]) -> bool:
        subset = frozenset(subset)
        if not self.is_subgroup(subset):
            return False
        return all(self.conjugate(s, w) in subset for s in subset for w in self.elements())

    def coset_representatives(self, subgroup: Iterable[int]) -> list[int]:
        """Representatives x_i of the right cosets S x_i, smallest id first."""
        subgroup = sorted(subgroup)
        covered: set[int] = set()
        representatives = []
        for x in self.elements():
            if x in covered:
                continue
            representatives.append(x)
            covered.update(self.mul(s, x) for s in subgroup)
        return representatives

    def to_payload(self) -> TargetTable:
        return TargetTable(name=self.name, labels=list(self.labels), table=self.table.tolist())

    @classmethod
    def from_payload(cls, payload: TargetTable) -> FiniteGroupTable:
        return cls.from_rows(payload.table, payload.labels, payload.name)


def cyclic(n: int) -> FiniteGroupTable:
    if n < 1:
        raise InvalidTableError(f"Cyclic group order must be positive, got {n}")
    ids = np.arange(n)
    return FiniteGroupTable((ids[:, None] + ids[None, :]) % n, tuple(str(i) for i in range(n)), f"Z{n}")


def direct_product(a: FiniteGroupTable, b: FiniteGroupTable, name: Optional[str] = None) -> FiniteGroupTable:
    """Element (i, j) has id i·|B| + j."""
    nb = b.order
    ta, tb = a.table, b.table
    i = np.arange(a.order * nb)
    first, second = np.divmod(i, nb)
    table = ta[first[:, None], first[None, :]] * nb + tb[second[:, None], second[None, :]]
    labels = tuple(f"({x},{y})" for x in a.labels for y in b.labels)
    return FiniteGroupTable(table, labels, name or f"{a.name}x{b.name}")


def semidirect(m: int, n: int, k: int, name: Optional[str] = None) -> FiniteGroupTable:
    """Z/m ⋊ Z/n with the generator of Z/n acting by x ↦ k·x; (a, b) has id b·m + a."""
    if pow(k, n, m) != 1 % m:
        raise InvalidTableError(f"{k} does not have order dividing {n} mod {m}")

    def multiply(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
        # (a1, b1)(a2, b2) = (a1 + k^{b1} a2, b1 + b2)
        return (x[0] + pow(k, x[1], m) * y[0]) % m, (x[1] + y[1]) % n

    elements = [(a, b) for b in range(n) for a in range(m)]
    index = {e: i for i, e in enumerate(elements)}
    rows = [[index[multiply(x, y)] for y in elements] for x in elements]
    labels = [f"r{a}s{b}" for a, b in elements]
    return FiniteGroupTable.from_rows(rows, labels, name or f"Z{m}:Z{n}({k})")


def dihedral(n: int) -> FiniteGroupTable:
    """Symmetries of the n-gon, order 2n; rotations are ids 0..n-1."""
    return semidirect(n, 2, n - 1, name=f"D{2 * n}")


def from_permutation_group(group: PermutationGroup, name: str = "") -> FiniteGroupTable:
    identity = Permutation(list(range(group.degree)))
    elements = [identity] + [p for p in group.generate_schreier_sims() if p != identity]
    index = {tuple(p.array_form): i for i, p in enumerate(elements)}
    # sympy composes left to right: (p * q)(i) = q(p(i))
    rows = [[index[tuple((p * q).array_form)] for q in elements] for p in elements]
    labels = [str(p.cyclic_form) for p in elements]
    return FiniteGroupTable.from_rows(rows, labels, name)


def symmetric(n: int) -> FiniteGroupTable:
    return from_permutation_group(SymmetricGroup(n), f"S{n}")


def alternating(n: int) -> FiniteGroupTable:
    return from_permutation_group(AlternatingGroup(n), f"A{n}")


def from_matrices(generators: Sequence[np.ndarray], name: str = "", decimals: int = 8) -> FiniteGroupTable:
    """Closure of invertible complex matrices, compared after rounding."""
    size = generators[0].shape[0]

    def key(matrix: np.ndarray) -> tuple:
        rounded = np.round(np.asarray(matrix, dtype=complex), decimals)
        # + 0.0 folds -0.0 into 0.0
        return tuple((rounded.real + 0.0).ravel()) + tuple((rounded.imag + 0.0).ravel())

    matrices = {key(np.eye(size)): np.eye(size, dtype=complex)}
    for g in generators:
        matrices.setdefault(key(g), np.asarray(g, dtype=complex))

    def multiply(a: tuple, b: tuple) -> tuple:
        product = matrices[a] @ matrices[b]
        k = key(product)
        matrices.setdefault(k, product)
        return k

    return FiniteGroupTable.from_closure(
        key(np.eye(size)),
        [key(g) for g in generators],
        multiply,
        name=name,
        label=lambda k: "m" + str(list(matrices).index(k)),
    )


def quaternion() -> FiniteGroupTable:
    i = np.array([[1j, 0], [0, -1j]])
    j = np.array([[0, 1], [-1, 0]], dtype=complex)
    return from_matrices([i, j], name="Q8")
