"""Finite groups by multiplication table and finitely presented groups.

Generators are named by single lowercase letters; words are strings over
generator letters with uppercase meaning the inverse (``"aB"`` is a * b^-1).
Table-backed groups know all their elements and can express each one as a
word in the designated generators; presented groups are handled through
word balls only.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "invert_word",
    "word_letters",
    "TableGroup",
    "PresentedGroup",
    "cyclic_group",
    "dihedral_group",
    "symmetric_group_3",
    "product_group",
    "group_from_permutations",
]


def invert_word(word: str) -> str:
    """Formal inverse of a word: reverse it and swap case."""
    return word[::-1].swapcase()


def word_letters(word: str):
    """Yield (generator_name, is_inverse) pairs for each letter."""
    for ch in word:
        yield ch.lower(), ch.isupper()


@dataclass(frozen=True, eq=False)
class PresentedGroup:
    """Finitely presented group: generators, relator words, generating set K."""

    generators: tuple
    relators: tuple
    k_set: tuple

    def __init__(self, generators, relators, k_set=None):
        gens = tuple(generators)
        for g in gens:
            if len(g) != 1 or not g.islower():
                raise ValueError("generator names must be single lowercase letters")
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate generator names")
        rels = tuple(relators)
        for r in rels:
            if not r:
                raise ValueError("relators must be nonempty words")
            self._check_word_static(gens, r)
        ks = tuple(k_set) if k_set is not None else gens
        for wkw in ks:
            self._check_word_static(gens, wkw)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)
        object.__setattr__(self, "k_set", ks)

    @staticmethod
    def _check_word_static(gens, word: str):
        for name, _ in word_letters(word):
            if name not in gens:
                raise ValueError(f"unknown generator symbol {name!r} in word {word!r}")

    def check_word(self, word: str):
        self._check_word_static(self.generators, word)

    @property
    def generator_names(self):
        return list(self.generators)


@dataclass(frozen=True, eq=False)
class TableGroup:
    """Finite group given by its multiplication table.

    ``table[i, j]`` is the index of the product of elements i and j.
    ``generators`` maps single-letter names to element indices; the named
    generators must generate the whole group.  ``k_set`` is the designated
    finite generating set, as words.
    """

    table: np.ndarray
    identity: int
    generators: dict
    k_set: tuple = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        table = np.asarray(self.table, dtype=int)
        m = table.shape[0]
        if table.shape != (m, m):
            raise ValueError("multiplication table must be square")
        if np.any(table < 0) or np.any(table >= m):
            raise ValueError("table entries out of range")
        e = self.identity
        if not (0 <= e < m):
            raise ValueError("identity index out of range")
        if not (np.array_equal(table[e], np.arange(m)) and np.array_equal(table[:, e], np.arange(m))):
            raise ValueError("identity law fails")
        # associativity: (ij)k == i(jk) for all triples
        left = table[table, :]          # left[i, j, k] = (ij)k
        right = table[:, table]         # right[i, j, k] = i(jk)
        if not np.array_equal(left, right):
            raise ValueError("multiplication table is not associative")
        for name, idx in self.generators.items():
            if len(name) != 1 or not name.islower():
                raise ValueError("generator names must be single lowercase letters")
            if not (0 <= idx < m):
                raise ValueError(f"generator {name!r} index out of range")
        object.__setattr__(self, "table", table)
        ks = tuple(self.k_set) if self.k_set is not None else tuple(sorted(self.generators))
        for wkw in ks:
            self.check_word(wkw)
        object.__setattr__(self, "k_set", ks)
        if len(self.element_words()) != m:
            raise ValueError("designated generators do not generate the group")

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def generator_names(self):
        return sorted(self.generators)

    def mult(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        j = int(np.nonzero(self.table[i] == self.identity)[0][0])
        return j

    def check_word(self, word: str):
        for name, _ in word_letters(word):
            if name not in self.generators:
                raise ValueError(f"unknown generator symbol {name!r} in word {word!r}")

    def word_to_element(self, word: str) -> int:
        g = self.identity
        for name, is_inv in word_letters(word):
            h = self.generators[name]
            if is_inv:
                h = self.inv(h)
            g = self.mult(g, h)
        return g

    def element_words(self) -> dict:
        """Shortest word (BFS over the designated generators) for each reachable element."""
        words = {self.identity: ""}
        queue = deque([self.identity])
        steps = [(name, self.generators[name]) for name in self.generator_names]
        steps += [(name.upper(), self.inv(self.generators[name])) for name in self.generator_names]
        while queue:
            g = queue.popleft()
            for letter, h in steps:
                gh = self.mult(g, h)
                if gh not in words:
                    words[gh] = words[g] + letter
                    queue.append(gh)
        return words

    def subgroup_closure(self, elements) -> list:
        """Closure of the given element set under multiplication and inverse."""
        closure = set(elements)
        closure.add(self.identity)
        frontier = list(closure)
        while frontier:
            g = frontier.pop()
            for h in list(closure):
                for prod in (self.mult(g, h), self.mult(h, g), self.inv(g)):
                    if prod not in closure:
                        closure.add(prod)
                        frontier.append(prod)
        return sorted(closure)

    def is_subgroup(self, elements) -> bool:
        elems = sorted(set(elements))
        return elems == self.subgroup_closure(elems)


def group_from_permutations(perms: dict, k_set=None) -> tuple:
    """Build a TableGroup from generator permutations acting on 0..n-1.

    Returns (group, action) where ``action`` maps each element index to its
    permutation array (composition convention: (pq)(x) = p(q(x))).
    """
    gens = {name: np.asarray(p, dtype=int) for name, p in perms.items()}
    n = len(next(iter(gens.values())))
    ident = tuple(range(n))
    elems = {ident: 0}
    arrays = [np.arange(n)]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for garr in gens.values():
            prod = arrays[i][garr]  # self after generator: p(q(x)) with q = generator
            key = tuple(prod.tolist())
            if key not in elems:
                elems[key] = len(arrays)
                arrays.append(prod)
                queue.append(len(arrays) - 1)
            prod2 = garr[arrays[i]]
            key2 = tuple(prod2.tolist())
            if key2 not in elems:
                elems[key2] = len(arrays)
                arrays.append(prod2)
                queue.append(len(arrays) - 1)
    m = len(arrays)
    table = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(m):
            table[i, j] = elems[tuple(arrays[i][arrays[j]].tolist())]
    gen_idx = {name: elems[tuple(arr.tolist())] for name, arr in gens.items()}
    group = TableGroup(table, 0, gen_idx, k_set=k_set)
    return group, {i: arrays[i] for i in range(m)}


def cyclic_group(n: int, name: str = "a") -> TableGroup:
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return TableGroup(table, 0, {name: 1 % n})


def dihedral_group(n: int) -> TableGroup:
    """Dihedral group of order 2n as permutations of the n-gon vertices: r rotation, s reflection."""
    rot = np.roll(np.arange(n), -1)
    refl = (-np.arange(n)) % n
    group, _ = group_from_permutations({"r": rot, "s": refl})
    return group


def symmetric_group_3() -> TableGroup:
    """S3 as permutations of three letters: t a transposition, c a 3-cycle."""
    group, _ = group_from_permutations({"t": [1, 0, 2], "c": [1, 2, 0]})
    return group


def product_group(g1: TableGroup, g2: TableGroup, rename2: dict | None = None) -> dict:
    """Direct product of two table groups.

    Element (i, j) gets index i * |G2| + j.  Factor-2 generators are renamed
    to avoid clashes (pass ``rename2`` to control the new names, otherwise
    the next free letters are used).  Returns a dict with the product group
    and the factor bookkeeping needed by the splitting/superrigidity ops.
    """
    m1, m2 = g1.order, g2.order
    i1 = np.arange(m1 * m2) // m2
    i2 = np.arange(m1 * m2) % m2
    table = g1.table[np.ix_(i1, i1)] * 0  # allocate
    table = g1.table[i1[:, None], i1[None, :]] * m2 + g2.table[i2[:, None], i2[None, :]]
    identity = g1.identity * m2 + g2.identity

    used = set(g1.generators)
    if rename2 is None:
        rename2 = {}
        alphabet = [c for c in "abcdefghijklmnopqrstuvwxyz" if c not in used]
        for name in sorted(g2.generators):
            rename2[name] = name if name not in used else alphabet.pop(0)
            used.add(rename2[name])
    gens = {}
    gens1 = {}
    gens2 = {}
    for name, idx in g1.generators.items():
        gens[name] = idx * m2 + g2.identity
        gens1[name] = gens[name]
    for name, idx in g2.generators.items():
        new = rename2[name]
        gens[new] = g1.identity * m2 + idx
        gens2[new] = gens[new]
    group = TableGroup(table, identity, gens)
    return {
        "group": group,
        "factor1_generators": sorted(gens1),
        "factor2_generators": sorted(gens2),
        "embed1": lambda i: i * m2 + g2.identity,
        "embed2": lambda j: g1.identity * m2 + j,
        "project": lambda k: (k // m2, k % m2),
    }
