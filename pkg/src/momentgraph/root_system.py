"""Exact realizations of the root systems of types A, B, C, D and G2.

All realizations used here have integer root coordinates:

* ``A_n`` lives in the sum-zero hyperplane of ``Q^{n+1}``;
* ``B_n``, ``C_n``, ``D_n`` live in ``Q^n`` with the usual ``e_i`` basis;
* ``G2`` lives in the sum-zero plane of ``Q^3``: the short roots are the
  ``A_2`` roots ``e_i - e_j`` and the long roots are ``±(2e_i - e_j - e_k)``.

Roots are referred to by integer ids.  Positive roots get ids
``0 .. N-1`` ordered by height and then lexicographically by coordinates;
the negative of root ``i`` has id ``i + N``.

>>> rs = build_root_system("B", 2)
>>> [rs.roots[i] for i in rs.simple_indices]
[(1, -1), (0, 1)]
>>> len(rs.roots), rs.num_positive
(8, 4)
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import sympy

from .errors import InvalidRank

KINDS = ("A", "B", "C", "D", "G2")

Vector = tuple


@dataclass(frozen=True)
class SimpleSubset:
    """A subset of the simple roots, stored as a bitmask.

    Simple roots are labelled ``1 .. rank`` as in the usual Dynkin numbering,
    so bit ``i - 1`` of ``mask`` stands for ``alpha_i``.

    >>> s = SimpleSubset.from_labels(3, [1, 3])
    >>> s.labels, 2 in s, s.mask
    ((1, 3), False, 5)
    """

    rank: int
    mask: int = 0

    @classmethod
    def from_labels(cls, rank: int, labels: Iterable[int]) -> "SimpleSubset":
        mask = 0
        for label in labels:
            if not 1 <= int(label) <= rank:
                raise ValueError(f"simple root label {label} outside 1..{rank}")
            mask |= 1 << (int(label) - 1)
        return cls(rank, mask)

    @classmethod
    def full(cls, rank: int) -> "SimpleSubset":
        return cls(rank, (1 << rank) - 1)

    @classmethod
    def empty(cls, rank: int) -> "SimpleSubset":
        return cls(rank, 0)

    @classmethod
    def all_subsets(cls, rank: int) -> list["SimpleSubset"]:
        return [cls(rank, m) for m in range(1 << rank)]

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.rank) if self.mask >> i & 1)

    def __contains__(self, label: int) -> bool:
        return 1 <= label <= self.rank and bool(self.mask >> (label - 1) & 1)

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.rank) - 1

    def __str__(self) -> str:
        return "{" + ",".join(f"a{i}" for i in self.labels) + "}"


def as_subset(rank: int, value) -> SimpleSubset:
    """Coerce ``value`` (a SimpleSubset, label iterable, ``"all"`` or None) to a subset."""
    if isinstance(value, SimpleSubset):
        if value.rank != rank:
            raise ValueError("subset belongs to a root system of another rank")
        return value
    if value is None:
        return SimpleSubset.empty(rank)
    if isinstance(value, str):
        text = value.strip()
        if text == "all":
            return SimpleSubset.full(rank)
        if text == "":
            return SimpleSubset.empty(rank)
        return SimpleSubset.from_labels(rank, (int(t) for t in text.split(",")))
    return SimpleSubset.from_labels(rank, value)


def _explicit_roots(kind: str, n: int) -> tuple[int, list[Vector], list[Vector]]:
    """Return ambient dimension, all roots and the simple roots for a type."""
    if kind == "A":
        dim = n + 1
        roots = []
        for i, j in itertools.permutations(range(dim), 2):
            v = [0] * dim
            v[i], v[j] = 1, -1
            roots.append(tuple(v))
        simple = []
        for i in range(n):
            v = [0] * dim
            v[i], v[i + 1] = 1, -1
            simple.append(tuple(v))
        return dim, roots, simple
    if kind in ("B", "C", "D"):
        dim = n
        roots = []
        for i, j in itertools.combinations(range(n), 2):
            for si, sj in itertools.product((1, -1), repeat=2):
                v = [0] * n
                v[i], v[j] = si, sj
                roots.append(tuple(v))
        short = 2 if kind == "C" else 1
        if kind != "D":
            for i in range(n):
                for s in (1, -1):
                    v = [0] * n
                    v[i] = s * short
                    roots.append(tuple(v))
        simple = []
        for i in range(n - 1):
            v = [0] * n
            v[i], v[i + 1] = 1, -1
            simple.append(tuple(v))
        last = [0] * n
        if kind == "D":
            last[n - 2], last[n - 1] = 1, 1
        else:
            last[n - 1] = short
        simple.append(tuple(last))
        return dim, roots, simple
    if kind == "G2":
        roots = []
        for i, j in itertools.permutations(range(3), 2):
            v = [0, 0, 0]
            v[i], v[j] = 1, -1
            roots.append(tuple(v))
        for i in range(3):
            v = [-1, -1, -1]
            v[i] = 2
            roots.append(tuple(v))
            roots.append(tuple(-x for x in v))
        return 3, roots, [(1, -1, 0), (-2, 1, 1)]
    raise ValueError(f"unknown root system kind {kind!r}")


def _check_rank(kind: str, rank: int) -> None:
    minimum = {"A": 1, "B": 2, "C": 2, "D": 4}
    if kind == "G2":
        if rank != 2:
            raise InvalidRank("G2 has rank 2")
    elif kind in minimum:
        if rank < minimum[kind]:
            raise InvalidRank(f"type {kind} needs rank >= {minimum[kind]}, got {rank}")
    else:
        raise ValueError(f"unknown root system kind {kind!r}")


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True, eq=False)
class RootSystem:
    """A realized root system with a fixed ordering of its roots.

    ``roots[i]`` is an integer vector, ``simple_coords[i]`` the coefficients
    of root ``i`` in the basis of simple roots, and ``simple_indices[k]`` the
    id of the simple root ``alpha_{k+1}``.
    """

    kind: str
    rank: int
    ambient_dim: int
    roots: tuple[Vector, ...]
    simple_coords: tuple[Vector, ...]
    simple_indices: tuple[int, ...]
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def num_positive(self) -> int:
        return len(self.roots) // 2

    @property
    def positive_ids(self) -> range:
        return range(self.num_positive)

    def is_positive(self, rid: int) -> bool:
        return rid < self.num_positive

    def negate(self, rid: int) -> int:
        n = self.num_positive
        return rid + n if rid < n else rid - n

    def positive_part(self, rid: int) -> int:
        """Id of the positive root among ``±root``."""
        return rid if rid < self.num_positive else rid - self.num_positive

    def height(self, rid: int) -> int:
        return sum(self.simple_coords[rid])

    def root_id(self, vector: Sequence) -> int:
        """Id of the root with the given coordinates (KeyError if none)."""
        return self._index[tuple(int(x) for x in vector)]

    def find_root(self, vector: Sequence) -> int | None:
        key = tuple(vector)
        if any(Fraction(x).denominator != 1 for x in key):
            return None
        return self._index.get(tuple(int(x) for x in key))

    def simple_root(self, label: int) -> Vector:
        return self.roots[self.simple_indices[label - 1]]

    def inner(self, u: Sequence, v: Sequence):
        return dot(u, v)

    def pairing(self, rid: int, sid: int) -> int:
        """The Cartan integer <root rid, coroot of root sid>."""
        a, b = self.roots[rid], self.roots[sid]
        value = Fraction(2 * dot(a, b), dot(b, b))
        assert value.denominator == 1
        return int(value)

    @cached_property
    def cartan_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Entry ``[i][j]`` is ``<alpha_{i+1}, alpha_{j+1}^vee>``."""
        s = self.simple_indices
        return tuple(tuple(self.pairing(a, b) for b in s) for a in s)

    def reflect(self, rid: int, v: Sequence) -> tuple[Fraction, ...]:
        return reflect(self, rid, v)

    @cached_property
    def fundamental_weights(self) -> tuple[tuple[Fraction, ...], ...]:
        """Ambient coordinates of the fundamental weights ``omega_i``."""
        inverse = sympy.Matrix(self.cartan_matrix).inv()
        simple = [self.roots[i] for i in self.simple_indices]
        weights = []
        for i in range(self.rank):
            coeffs = [Fraction(int(x.p), int(x.q)) for x in inverse.row(i)]
            weights.append(
                tuple(sum(c * r[k] for c, r in zip(coeffs, simple)) for k in range(self.ambient_dim))
            )
        return tuple(weights)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "rank": self.rank,
                "roots": [list(r) for r in self.roots],
                "simple_indices": list(self.simple_indices),
            },
            sort_keys=True,
        )

    @property
    def name(self) -> str:
        return "G2" if self.kind == "G2" else f"{self.kind}{self.rank}"

    def __repr__(self) -> str:
        return f"RootSystem({self.name})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RootSystem) and (self.kind, self.rank) == (other.kind, other.rank)

    def __hash__(self) -> int:
        return hash((self.kind, self.rank))


def reflect(rs: RootSystem, rid: int, v: Sequence) -> tuple[Fraction, ...]:
    """Apply the reflection in root ``rid`` to a rational vector.

    >>> rs = build_root_system("B", 2)
    >>> reflect(rs, rs.root_id((1, 1)), (1, 0))
    (Fraction(0, 1), Fraction(-1, 1))
    """
    a = rs.roots[rid]
    c = Fraction(2 * dot(v, a), dot(a, a))
    return tuple(Fraction(x) - c * y for x, y in zip(v, a))


_CACHE: dict[tuple[str, int], RootSystem] = {}


def build_root_system(kind: str, rank: int) -> RootSystem:
    """Build (and cache) the standard realization of a root system."""
    kind = "G2" if kind in ("G", "g", "G2", "g2") else kind.upper()
    _check_rank(kind, rank)
    key = (kind, rank)
    if key in _CACHE:
        return _CACHE[key]
    dim, explicit, simple = _explicit_roots(kind, rank)

    # Generate all roots from the simple ones, tracking simple coordinates.
    coords = {}
    for k, s in enumerate(simple):
        coords[s] = tuple(1 if j == k else 0 for j in range(rank))
    frontier = list(coords)
    while frontier:
        new = []
        for beta in frontier:
            for k, s in enumerate(simple):
                c = Fraction(2 * dot(beta, s), dot(s, s))
                image = tuple(int(x - c * y) for x, y in zip(beta, s))
                if image not in coords:
                    cb = list(coords[beta])
                    cb[k] -= int(c)
                    coords[image] = tuple(cb)
                    new.append(image)
        frontier = new
    if set(coords) != set(explicit) or len(explicit) != len(set(explicit)):
        raise AssertionError(f"root generation mismatch for {kind}{rank}")

    positive = [r for r in coords if all(c >= 0 for c in coords[r])]
    if len(positive) * 2 != len(coords):
        raise AssertionError("roots are not split into positive and negative halves")
    for r in coords:
        if not (all(c >= 0 for c in coords[r]) or all(c <= 0 for c in coords[r])):
            raise AssertionError("root with mixed-sign simple coordinates")
    positive.sort(key=lambda r: (sum(coords[r]), r))
    ordered = positive + [tuple(-x for x in r) for r in positive]
    index = {r: i for i, r in enumerate(ordered)}
    rs = RootSystem(
        kind=kind,
        rank=rank,
        ambient_dim=dim,
        roots=tuple(ordered),
        simple_coords=tuple(coords[r] for r in ordered),
        simple_indices=tuple(index[s] for s in simple),
        _index=index,
    )
    _CACHE[key] = rs
    return rs


def dominant_weight(rs: RootSystem, theta_p) -> tuple[int, ...]:
    """Sum of the fundamental weights outside ``theta_p``, as a primitive integer vector.

    Its stabilizer in the Weyl group is exactly the parabolic subgroup W_P.

    >>> dominant_weight(build_root_system("B", 2), [2])
    (1, 0)
    """
    theta_p = as_subset(rs.rank, theta_p)
    total = [Fraction(0)] * rs.ambient_dim
    for i in range(1, rs.rank + 1):
        if i not in theta_p:
            total = [a + b for a, b in zip(total, rs.fundamental_weights[i - 1])]
    return primitive_vector(total)


def primitive_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the smallest positive multiple with integer entries."""
    from math import gcd, lcm

    fr = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in fr)) if fr else 1
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(0 for _ in ints)
    return tuple(x // g for x in ints)
