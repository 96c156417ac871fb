"""Weyl groups: enumeration, Bruhat order, parabolic and double cosets.

A Weyl group is enumerated once into integer tables.  Each element is
identified by the permutation it induces on the root ids; since the roots
span the space the group acts on, two elements are equal exactly when
their ambient actions are.  Ambient actions are signed permutation
matrices (for G2 the long reflections are realized as ``-1`` times a
transposition, which agrees with the reflection on the root plane).

>>> W = weyl_group(build_root_system("A", 2))
>>> W.size, W.from_word([1, 2, 1]) == W.from_word([2, 1, 2])
(6, True)
>>> W.from_word([2, 1, 2])
s1s2s1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import GroupTooLarge
from .root_system import RootSystem, SimpleSubset, as_subset, build_root_system, dot

DEFAULT_CAP = 100_000


def group_order(rs: RootSystem) -> int:
    n = rs.rank
    return {
        "A": math.factorial(n + 1),
        "B": 2**n * math.factorial(n),
        "C": 2**n * math.factorial(n),
        "D": 2 ** (n - 1) * math.factorial(n),
        "G2": 12,
    }[rs.kind]


def _signed_permutation(rs: RootSystem, rid: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Signed permutation ``(perm, signs)`` acting like the reflection in ``rid`` on roots.

    The matrix sends ``e_k`` to ``signs[k] * e_{perm[k]}``.
    """
    dim = rs.ambient_dim
    alpha = rs.roots[rid]
    norm = dot(alpha, alpha)
    columns = []
    for k in range(dim):
        c = Fraction(2 * alpha[k], norm)
        columns.append([Fraction(int(j == k)) - c * alpha[j] for j in range(dim)])
    ok = True
    perm, signs = [], []
    for col in columns:
        nonzero = [(j, x) for j, x in enumerate(col) if x != 0]
        if len(nonzero) != 1 or abs(nonzero[0][1]) != 1:
            ok = False
            break
        perm.append(nonzero[0][0])
        signs.append(int(nonzero[0][1]))
    if ok:
        return tuple(perm), tuple(signs)
    # Not a signed permutation of the ambient space (G2 long roots): find one
    # that agrees with the reflection on every root.
    import itertools

    images = {r: tuple(int(x) for x in _reflect_int(alpha, r)) for r in rs.roots}
    for p in itertools.permutations(range(dim)):
        for s in itertools.product((1, -1), repeat=dim):
            if all(_apply_signed(p, s, r) == images[r] for r in rs.roots):
                return tuple(p), tuple(s)
    raise AssertionError("no signed permutation realizes the reflection")


def _reflect_int(alpha, v):
    c = Fraction(2 * dot(v, alpha), dot(alpha, alpha))
    return [Fraction(x) - c * y for x, y in zip(v, alpha)]


def _apply_signed(perm, signs, v):
    out = [0] * len(v)
    for k, x in enumerate(v):
        out[perm[k]] = signs[k] * x
    return tuple(out)


class WeylGroup:
    """The Weyl group of a root system, enumerated into integer tables.

    Tables (all indexed by element index ``w``):

    * ``perm[w, r]``   id of the root ``w(root r)``;
    * ``length[w]``    Coxeter length;
    * ``left[i, w]``   index of ``s_{i+1} w``; ``right[i, w]`` index of ``w s_{i+1}``;
    * ``inverse[w]``   index of ``w^{-1}``;
    * ``words[w]``     lexicographically smallest reduced word (1-based letters).
    """

    def __init__(self, rs: RootSystem, cap: int = DEFAULT_CAP):
        order = group_order(rs)
        if order > cap:
            raise GroupTooLarge(f"|W| = {order} exceeds the cap {cap}")
        self.rs = rs
        npos = rs.num_positive
        nroots = len(rs.roots)
        n = rs.rank

        simple_perm = []
        for i in range(n):
            rid = rs.simple_indices[i]
            simple_perm.append(
                np.array([rs.root_id(_reflect_int(rs.roots[rid], r)) for r in rs.roots], dtype=np.int64)
            )
        self.simple_perm = np.array(simple_perm)

        # Breadth-first enumeration by left multiplication.
        identity = np.arange(nroots, dtype=np.int64)
        perms = [identity]
        lengths = [0]
        parent = [(-1, -1)]
        index = {identity.tobytes(): 0}
        frontier = [0]
        while frontier:
            nxt = []
            for w in frontier:
                for i in range(n):
                    p = self.simple_perm[i][perms[w]]
                    key = p.tobytes()
                    if key not in index:
                        index[key] = len(perms)
                        perms.append(p)
                        lengths.append(lengths[w] + 1)
                        parent.append((i, w))
                        nxt.append(index[key])
                        if len(perms) > cap:
                            raise GroupTooLarge(f"|W| exceeds the cap {cap}")
            frontier = nxt
        self._index = index
        self.perm = np.array(perms, dtype=np.int64)
        self.length = np.array(lengths, dtype=np.int64)
        self.size = len(perms)
        if self.size != order:
            raise AssertionError(f"enumerated {self.size} elements, expected {order}")
        inversions = (self.perm[:, :npos] >= npos).sum(axis=1)
        if not np.array_equal(inversions, self.length):
            raise AssertionError("length does not match the inversion count")

        self.left = np.empty((n, self.size), dtype=np.int64)
        self.right = np.empty((n, self.size), dtype=np.int64)
        for i in range(n):
            left_rows = self.simple_perm[i][self.perm]
            right_rows = self.perm[:, self.simple_perm[i]]
            self.left[i] = [index[r.tobytes()] for r in left_rows]
            self.right[i] = [index[r.tobytes()] for r in right_rows]
        inv_rows = np.argsort(self.perm, axis=1)
        self.inverse = np.array([index[r.tobytes()] for r in inv_rows], dtype=np.int64)
        self.parent = parent

        # Lexicographically smallest reduced words, built up by length.
        by_length = np.argsort(self.length, kind="stable")
        words: list[tuple[int, ...]] = [()] * self.size
        for w in by_length[1:]:
            best = None
            for i in range(n):
                v = self.left[i, w]
                if self.length[v] < self.length[w]:
                    cand = (i + 1,) + words[v]
                    if best is None or cand < best:
                        best = cand
            words[w] = best
        self.words = words

        # Simple-root descents: desc_right[w, i] iff w(alpha_i) < 0.
        simple = np.array(rs.simple_indices, dtype=np.int64)
        self.desc_right = self.perm[:, simple] >= npos
        self.desc_left = self.desc_right[self.inverse]

        # Reflection elements s_alpha for positive roots alpha.
        self.reflection = np.empty(npos, dtype=np.int64)
        for rid in range(npos):
            p = np.array([rs.root_id(_reflect_int(rs.roots[rid], r)) for r in rs.roots], dtype=np.int64)
            self.reflection[rid] = index[p.tobytes()]

        # Signed permutations of the ambient coordinates.
        dim = rs.ambient_dim
        gens = [_signed_permutation(rs, rs.simple_indices[i]) for i in range(n)]
        amb_perm = np.empty((self.size, dim), dtype=np.int64)
        amb_sign = np.empty((self.size, dim), dtype=np.int64)
        amb_perm[0], amb_sign[0] = np.arange(dim), 1
        for w in by_length[1:]:
            i, v = parent[w]
            gp, gs = gens[i]
            # (s_i v)(e_k) = s_i(sign_v[k] e_{perm_v[k]})
            amb_perm[w] = np.array(gp)[amb_perm[v]]
            amb_sign[w] = amb_sign[v] * np.array(gs)[amb_perm[v]]
        self.amb_perm = amb_perm
        self.amb_sign = amb_sign
        roots = np.array(rs.roots, dtype=np.int64)
        for w in range(self.size):
            moved = np.zeros_like(roots)
            moved[:, amb_perm[w]] = roots * amb_sign[w]
            if not np.array_equal(moved, roots[self.perm[w]]):
                raise AssertionError("ambient action disagrees with the root permutation")

        self._coset_tables: dict[int, CosetTable] = {}
        self._double_tables: dict[tuple[int, int], DoubleCosetTable] = {}

    # -- elements ------------------------------------------------------------

    def element(self, index: int) -> "WeylElement":
        return WeylElement(self, int(index))

    @property
    def identity(self) -> "WeylElement":
        return self.element(0)

    @property
    def elements(self) -> list["WeylElement"]:
        return [self.element(i) for i in self.sorted_indices(range(self.size))]

    def simple_reflection(self, label: int) -> "WeylElement":
        return self.element(self.left[label - 1, 0])

    def reflection_element(self, rid: int) -> "WeylElement":
        return self.element(self.reflection[self.rs.positive_part(rid)])

    def reflection_left(self, rid: int, w: int) -> int:
        """Index of ``s_alpha w`` for the root with id ``rid``."""
        return int(self.mult[self.reflection[self.rs.positive_part(rid)], w])

    def from_word(self, word: Iterable[int]) -> "WeylElement":
        w = 0
        for letter in reversed(list(word)):
            w = self.left[letter - 1, w]
        return self.element(w)

    def parse(self, text: str) -> "WeylElement":
        """Parse ``"e"`` or ``"s1s2s1"`` into an element."""
        text = text.strip()
        if text in ("e", "", "1"):
            return self.identity
        letters = [int(t) for t in text.split("s") if t]
        return self.from_word(letters)

    def mul(self, a: int, b: int) -> int:
        if self._mult is not None:
            return int(self._mult[a, b])
        return self._index[self.perm[a][self.perm[b]].tobytes()]

    _mult = None

    @cached_property
    def mult(self) -> np.ndarray:
        """Full multiplication table ``mult[a, b] = a*b``."""
        table = np.empty((self.size, self.size), dtype=np.int64)
        table[0] = np.arange(self.size)
        for w in np.argsort(self.length, kind="stable")[1:]:
            i, v = self.parent[w]
            table[w] = self.left[i][table[v]]
        self._mult = table
        return table

    def word_key(self, w: int) -> tuple:
        return (int(self.length[w]), self.words[w])

    def sorted_indices(self, items: Iterable[int]) -> list[int]:
        return sorted((int(x) for x in items), key=self.word_key)

    def act_root(self, w: int, rid: int) -> int:
        return int(self.perm[w, rid])

    def act_vector(self, w: int, v: Sequence) -> tuple:
        out = [0] * self.rs.ambient_dim
        for k, x in enumerate(v):
            out[self.amb_perm[w, k]] = self.amb_sign[w, k] * x
        return tuple(out)

    def parabolic_elements(self, theta) -> list[int]:
        """Indices of the parabolic subgroup generated by the simple roots in ``theta``."""
        theta = as_subset(self.rs.rank, theta)
        return self.sorted_indices(
            w for w in range(self.size) if all(letter in theta for letter in self.words[w])
        )

    # -- Bruhat order ----------------------------------------------------------

    @cached_property
    def bruhat(self) -> np.ndarray:
        """Boolean matrix with ``bruhat[u, v]`` true iff ``u <= v``."""
        succ = self.mult[self.reflection].T.copy()  # succ[w, k] = s_k w
        succ[self.length[succ] <= self.length[:, None]] = -1
        order = np.argsort(-self.length, kind="stable")
        return _kernels.bruhat_closure(order, np.ascontiguousarray(succ))

    def leq(self, u: int, v: int) -> bool:
        return bool(self.bruhat[u, v])

    # -- cosets ----------------------------------------------------------------

    def project_right(self, elements, theta) -> np.ndarray:
        """Minimal representatives of ``w W_theta`` for each element."""
        theta = as_subset(self.rs.rank, theta)
        active = np.array([i + 1 in theta for i in range(self.rs.rank)], dtype=np.bool_)
        return _kernels.reduce_descents(np.asarray(elements, dtype=np.int64), self.desc_right, self.right, active)

    def project_left(self, elements, theta) -> np.ndarray:
        """Minimal representatives of ``W_theta w`` for each element."""
        theta = as_subset(self.rs.rank, theta)
        active = np.array([i + 1 in theta for i in range(self.rs.rank)], dtype=np.bool_)
        return _kernels.reduce_descents(np.asarray(elements, dtype=np.int64), self.desc_left, self.left, active)

    def project_double(self, elements, theta_q, theta_p) -> np.ndarray:
        """Minimal representatives of ``W_Q w W_P``.

        Alternating one-sided reductions terminate at an element that is
        minimal on both sides, which is the minimal double coset element.
        """
        cur = np.asarray(elements, dtype=np.int64)
        while True:
            nxt = self.project_left(self.project_right(cur, theta_p), theta_q)
            if np.array_equal(nxt, cur):
                return cur
            cur = nxt

    def coset_table(self, theta_p) -> "CosetTable":
        theta_p = as_subset(self.rs.rank, theta_p)
        table = self._coset_tables.get(theta_p.mask)
        if table is None:
            proj = self.project_right(np.arange(self.size), theta_p)
            reps = self.sorted_indices(set(proj.tolist()))
            table = CosetTable(self, theta_p, reps, proj)
            self._coset_tables[theta_p.mask] = table
        return table

    def double_coset_table(self, theta_q, theta_p) -> "DoubleCosetTable":
        theta_q = as_subset(self.rs.rank, theta_q)
        theta_p = as_subset(self.rs.rank, theta_p)
        key = (theta_q.mask, theta_p.mask)
        table = self._double_tables.get(key)
        if table is None:
            table = DoubleCosetTable.build(self, theta_q, theta_p)
            self._double_tables[key] = table
        return table


@dataclass(frozen=True, eq=False)
class WeylElement:
    """An element of a Weyl group, referenced by its index in the group tables."""

    group: WeylGroup
    index: int

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylElement) and other.group is self.group and other.index == self.index

    def __hash__(self) -> int:
        return hash(self.index)

    def __lt__(self, other: "WeylElement") -> bool:
        return self.group.word_key(self.index) < other.group.word_key(other.index)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(self.group, self.group.mul(self.index, other.index))

    def inverse(self) -> "WeylElement":
        return WeylElement(self.group, int(self.group.inverse[self.index]))

    @property
    def length(self) -> int:
        return int(self.group.length[self.index])

    @property
    def word(self) -> tuple[int, ...]:
        return self.group.words[self.index]

    @property
    def matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        """The ambient action as an exact matrix (rows indexed by output coordinate)."""
        g = self.group
        dim = g.rs.ambient_dim
        m = [[Fraction(0)] * dim for _ in range(dim)]
        for k in range(dim):
            m[g.amb_perm[self.index, k]][k] = Fraction(int(g.amb_sign[self.index, k]))
        return tuple(tuple(row) for row in m)

    def act_root(self, rid: int) -> int:
        return self.group.act_root(self.index, rid)

    def act_vector(self, v: Sequence) -> tuple:
        return self.group.act_vector(self.index, v)

    def __repr__(self) -> str:
        return word_string(self.word)

    __str__ = __repr__


def word_string(word: Sequence[int]) -> str:
    return "".join(f"s{i}" for i in word) if word else "e"


@dataclass
class CosetTable:
    """Minimal representatives ``W^P`` of the left cosets ``w W_P``.

    ``reps`` is sorted by (length, reduced word) and ``proj[w]`` is the index
    of the representative of ``w W_P``.
    """

    group: WeylGroup
    theta_p: SimpleSubset
    reps: list[int]
    proj: np.ndarray
    position: dict[int, int] = field(init=False)

    def __post_init__(self):
        self.position = {r: k for k, r in enumerate(self.reps)}

    @property
    def elements(self) -> list[WeylElement]:
        return [self.group.element(r) for r in self.reps]


@dataclass
class DoubleCosetTable:
    """Minimal double coset representatives ``^QW^P`` and per-representative data.

    For a representative ``u``: ``theta_u[u]`` is ``Theta_Q ∩ u(Sigma_P^+)``,
    ``w_u[u]`` the parabolic subgroup it generates and ``wq_reps[u]`` the
    minimal representatives ``W_Q^u`` of ``W_Q / W_u``.
    """

    group: WeylGroup
    theta_q: SimpleSubset
    theta_p: SimpleSubset
    reps: list[int]
    proj: np.ndarray
    theta_u: dict[int, SimpleSubset]
    w_u: dict[int, list[int]]
    wq_reps: dict[int, list[int]]
    position: dict[int, int] = field(init=False)

    def __post_init__(self):
        self.position = {r: k for k, r in enumerate(self.reps)}

    @classmethod
    def build(cls, group: WeylGroup, theta_q: SimpleSubset, theta_p: SimpleSubset) -> "DoubleCosetTable":
        rs = group.rs
        proj = group.project_double(np.arange(group.size), theta_q, theta_p)
        reps = group.sorted_indices(set(proj.tolist()))
        wq = group.parabolic_elements(theta_q)
        theta_u, w_u, wq_reps = {}, {}, {}
        for u in reps:
            inv = int(group.inverse[u])
            labels = []
            for i in theta_q:
                image = int(group.perm[inv, rs.simple_indices[i - 1]])
                coords = rs.simple_coords[image]
                if group.rs.is_positive(image) and all(c == 0 or (k + 1) in theta_p for k, c in enumerate(coords)):
                    labels.append(i)
            tu = SimpleSubset.from_labels(rs.rank, labels)
            theta_u[u] = tu
            w_u[u] = group.parabolic_elements(tu)
            wq_reps[u] = [w for w in wq if not any(group.desc_right[w, i - 1] for i in tu)]
        return cls(group, theta_q, theta_p, reps, proj, theta_u, w_u, wq_reps)

    @property
    def elements(self) -> list[WeylElement]:
        return [self.group.element(r) for r in self.reps]


_GROUPS: dict[tuple[str, int], WeylGroup] = {}


def weyl_group(rs: RootSystem, cap: int = DEFAULT_CAP) -> WeylGroup:
    """The (cached) Weyl group of ``rs``."""
    key = (rs.kind, rs.rank)
    group = _GROUPS.get(key)
    if group is None:
        group = WeylGroup(rs, cap)
        _GROUPS[key] = group
    return group


def enumerate_group(rs: RootSystem, cap: int = DEFAULT_CAP) -> list[WeylElement]:
    """All elements, ordered by (length, reduced word)."""
    if group_order(rs) > cap:
        raise GroupTooLarge(f"|W| = {group_order(rs)} exceeds the cap {cap}")
    return weyl_group(rs).elements


def bruhat_leq(u: WeylElement, v: WeylElement) -> bool:
    if u.group is not v.group:
        raise ValueError("elements of different groups")
    return u.group.leq(u.index, v.index)


def min_coset_reps(rs: RootSystem, theta_p) -> CosetTable:
    return weyl_group(rs).coset_table(theta_p)


def double_coset_reps(rs: RootSystem, theta_q, theta_p) -> DoubleCosetTable:
    return weyl_group(rs).double_coset_table(theta_q, theta_p)


def project_min(w: WeylElement, theta_p) -> WeylElement:
    table = w.group.coset_table(theta_p)
    return w.group.element(table.proj[w.index])


def project_min_double(w: WeylElement, theta_q, theta_p) -> WeylElement:
    table = w.group.double_coset_table(theta_q, theta_p)
    return w.group.element(table.proj[w.index])


def double_parabolic_decompose(y: WeylElement, theta_q, theta_p) -> tuple[WeylElement, WeylElement, WeylElement]:
    """Write ``y = w u v`` with ``u`` in ``^QW^P``, ``w`` in ``W_Q^u`` and ``v`` in ``W_P``."""
    ybar = project_min(y, theta_p)
    u = project_min_double(y, theta_q, theta_p)
    w = ybar * u.inverse()
    v = ybar.inverse() * y
    return w, u, v


__all__ = [
    "WeylGroup",
    "WeylElement",
    "CosetTable",
    "DoubleCosetTable",
    "weyl_group",
    "enumerate_group",
    "bruhat_leq",
    "min_coset_reps",
    "double_coset_reps",
    "project_min",
    "project_min_double",
    "double_parabolic_decompose",
    "build_root_system",
    "word_string",
]
