"""Structure sheaves on moment graphs, their sections and the two invariant models.

A section tuple assigns an element of ``S`` to each vertex.  Two models of
the ``W``-invariant cohomology of ``G/Q x G/P`` are implemented:

* ``R`` model: tuples ``(b_v)`` over ``W^P`` satisfying the reflection
  divisibilities and ``W_Q``-equivariance (``membership_rwq_wp``);
* ``A`` model: tuples ``(c_u)`` over ``^QW^P`` with ``c_u`` in ``S^{W_u}``
  satisfying ``c_u - w(c_u') in x_alpha S`` whenever ``u in s_alpha w u' W_P``
  (``membership_qap``).

``psi`` maps the second model onto the first.

>>> from .fga import additive_context
>>> from .root_system import build_root_system
>>> ctx = additive_context(build_root_system("A", 2))
>>> a1, a2 = ctx.x_simple(1), ctx.x_simple(2)
>>> sh = structure_sheaf_double("1", "1", ctx)
>>> t = section_tuple(ctx, "1", "1", [ctx.zero, a2])
>>> is_section(t, sh), membership_qap(t)
(True, True)
>>> [str(x) for x in psi(t).values] == ["0", str(a2), str(a1 + a2)]
True
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import UnsupportedLaw, VertexModuleViolation
from .fga import FormalGroupContext, QElement, SElement, _divide_linear
from .moment_graph import MIN_LABEL, MomentGraph, build_double_graph, build_parabolic_graph
from .root_system import SimpleSubset, as_subset
from .weyl import WeylGroup, word_string

# -- section tuples ---------------------------------------------------------------


@dataclass(frozen=True)
class SectionTuple:
    """Values ``values[k]`` at the representatives ``reps[k]``.

    ``reps`` is ``^QW^P`` for data of the ``A`` model and ``W^P`` for data of
    the ``R`` model (the latter is flagged by ``over_cosets``).
    """

    ctx: FormalGroupContext
    theta_q: SimpleSubset
    theta_p: SimpleSubset
    reps: tuple[int, ...]
    values: tuple[SElement, ...]
    over_cosets: bool = False

    def __post_init__(self):
        if len(self.reps) != len(self.values):
            raise ValueError("one value per representative is required")

    def value(self, rep: int) -> SElement:
        return self.values[self.reps.index(rep)]

    def as_dict(self) -> dict[int, SElement]:
        return dict(zip(self.reps, self.values))

    def _check(self, other: "SectionTuple") -> None:
        if (self.reps, self.theta_q, self.theta_p, self.over_cosets) != (
            other.reps,
            other.theta_q,
            other.theta_p,
            other.over_cosets,
        ):
            raise ValueError("section tuples live on different index sets")

    def __add__(self, other: "SectionTuple") -> "SectionTuple":
        self._check(other)
        return self._replace([a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other: "SectionTuple") -> "SectionTuple":
        self._check(other)
        return self._replace([a - b for a, b in zip(self.values, other.values)])

    def __mul__(self, other) -> "SectionTuple":
        if isinstance(other, SectionTuple):
            self._check(other)
            return self._replace([a * b for a, b in zip(self.values, other.values)])
        return self._replace([a * other for a in self.values])

    __rmul__ = __mul__

    def _replace(self, values) -> "SectionTuple":
        return SectionTuple(self.ctx, self.theta_q, self.theta_p, self.reps, tuple(values), self.over_cosets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SectionTuple):
            return NotImplemented
        return (
            self.reps == other.reps
            and self.over_cosets == other.over_cosets
            and self.theta_q == other.theta_q
            and self.theta_p == other.theta_p
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.reps, self.values))

    @property
    def is_zero(self) -> bool:
        return all(v.is_zero for v in self.values)

    def to_dict(self) -> dict:
        words = self.ctx.group.words
        return {
            "theta_q": list(self.theta_q.labels),
            "theta_p": list(self.theta_p.labels),
            "index": "cosets" if self.over_cosets else "double_cosets",
            "law": self.ctx.law,
            "values": {word_string(words[r]): v.to_monomials() for r, v in zip(self.reps, self.values)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def __repr__(self) -> str:
        words = self.ctx.group.words
        inner = ", ".join(f"{word_string(words[r])}: {v}" for r, v in zip(self.reps, self.values))
        return f"SectionTuple({inner})"


def _reps(ctx: FormalGroupContext, theta_q, theta_p, over_cosets: bool):
    group = ctx.group
    if over_cosets:
        return tuple(group.coset_table(theta_p).reps)
    return tuple(group.double_coset_table(theta_q, theta_p).reps)


def section_tuple(ctx: FormalGroupContext, theta_q, theta_p, values: Sequence, over_cosets: bool = False) -> SectionTuple:
    """Build a tuple from values listed in representative order.

    Integers and fractions are promoted to constants of ``S``.
    """
    n = ctx.rs.rank
    theta_q, theta_p = as_subset(n, theta_q), as_subset(n, theta_p)
    reps = _reps(ctx, theta_q, theta_p, over_cosets)
    vals = tuple(v if isinstance(v, (SElement, QElement)) else ctx.const(v) for v in values)
    return SectionTuple(ctx, theta_q, theta_p, reps, vals, over_cosets)


def section_from_dict(ctx: FormalGroupContext, data: dict) -> SectionTuple:
    """Inverse of ``SectionTuple.to_dict`` (values may also be expression strings)."""
    from .fga import parse_selement

    n = ctx.rs.rank
    theta_q = as_subset(n, data.get("theta_q", []))
    theta_p = as_subset(n, data.get("theta_p", []))
    over_cosets = data.get("index", "double_cosets") == "cosets"
    reps = _reps(ctx, theta_q, theta_p, over_cosets)
    by_word = {word_string(ctx.group.words[r]): r for r in reps}
    raw = data["values"]
    if isinstance(raw, list):
        raw = dict(zip(by_word, raw))
    unknown = set(raw) - set(by_word)
    if unknown:
        raise ValueError(f"not representatives: {sorted(unknown)}")
    values = []
    for word in by_word:
        item = raw.get(word, 0)
        if isinstance(item, str):
            values.append(parse_selement(ctx, item))
        elif isinstance(item, list):
            values.append(ctx.from_monomials(item))
        else:
            values.append(ctx.const(Fraction(item)))
    return SectionTuple(ctx, theta_q, theta_p, reps, tuple(values), over_cosets)


def constant_tuple(ctx, theta_q, theta_p, value=1, over_cosets=False) -> SectionTuple:
    reps = _reps(ctx, as_subset(ctx.rs.rank, theta_q), as_subset(ctx.rs.rank, theta_p), over_cosets)
    return section_tuple(ctx, theta_q, theta_p, [value] * len(reps), over_cosets)


# -- sheaves -------------------------------------------------------------------


@dataclass(frozen=True)
class SheafEdge:
    """Edge data: restriction maps are ``s -> s`` at ``src`` and ``s -> twist(s)`` at ``dst``,
    both followed by the quotient by ``x_label``."""

    src: int
    dst: int
    label: int
    twist: int = 0


@dataclass
class Sheaf:
    """A structure sheaf: vertex modules ``S^{W_u}`` (stored as ``Theta_u``) and edge quotients."""

    ctx: FormalGroupContext
    graph: MomentGraph
    theta_q: SimpleSubset
    theta_p: SimpleSubset
    vertices: tuple[int, ...]
    vertex_theta: dict[int, SimpleSubset]
    edges: tuple[SheafEdge, ...]

    def structure(self):
        return (self.vertices, tuple(sorted((v, t.mask) for v, t in self.vertex_theta.items())), self.edges)


def structure_sheaf_parabolic(theta_p, ctx: FormalGroupContext) -> Sheaf:
    rs = ctx.rs
    theta_p = as_subset(rs.rank, theta_p)
    graph = build_parabolic_graph(rs, theta_p)
    empty = SimpleSubset.empty(rs.rank)
    edges = tuple(SheafEdge(e.src, e.dst, e.label, 0) for e in graph.edges)
    return Sheaf(ctx, graph, empty, theta_p, tuple(graph.vertices), {v: empty for v in graph.vertices}, edges)


def structure_sheaf_double(theta_q, theta_p, ctx: FormalGroupContext, policy: str = MIN_LABEL, graph=None) -> Sheaf:
    """The double structure sheaf; the twist of an edge ``u -> u'`` labelled ``alpha``
    is the ``w`` in the decomposition ``s_alpha u = w u' v``."""
    rs, group = ctx.rs, ctx.group
    theta_q, theta_p = as_subset(rs.rank, theta_q), as_subset(rs.rank, theta_p)
    if graph is None:
        graph = build_double_graph(rs, theta_q, theta_p, policy)
    table = group.double_coset_table(theta_q, theta_p)
    proj = group.coset_table(theta_p).proj
    edges = []
    for e in graph.edges:
        ybar = int(proj[group.reflection_left(e.label, e.src)])
        twist = group.mul(ybar, int(group.inverse[e.dst]))
        edges.append(SheafEdge(e.src, e.dst, e.label, twist))
    return Sheaf(
        ctx, graph, theta_q, theta_p, tuple(graph.vertices), {u: table.theta_u[u] for u in graph.vertices}, tuple(edges)
    )


def in_vertex_module(ctx: FormalGroupContext, value: SElement, theta: SimpleSubset) -> bool:
    return theta.is_empty or ctx.is_invariant(value, theta)


def is_section(t: SectionTuple, sh: Sheaf, subset: Iterable[int] | None = None) -> bool:
    """Whether ``t`` restricted to ``subset`` is a local section of ``sh``."""
    return section_violation(t, sh, subset) is None


def section_violation(t: SectionTuple, sh: Sheaf, subset: Iterable[int] | None = None):
    """The first edge whose compatibility fails, or ``None``.

    Raises ``VertexModuleViolation`` when a value lies outside its vertex module.
    """
    ctx = sh.ctx
    values = t.as_dict()
    keep = set(sh.vertices if subset is None else subset)
    missing = keep - set(values)
    if missing:
        raise ValueError(f"tuple undefined at {sorted(missing)}")
    for v in sorted(keep, key=sh.vertices.index):
        if not in_vertex_module(ctx, values[v], sh.vertex_theta[v]):
            raise VertexModuleViolation(
                f"value at {word_string(ctx.group.words[v])} is not invariant under {sh.vertex_theta[v]}"
            )
    for e in sh.edges:
        if e.src in keep and e.dst in keep:
            diff = values[e.src] - ctx.weyl_act(e.twist, values[e.dst])
            if not ctx.divisible(diff, e.label):
                return e
    return None


# -- the two invariant models -----------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """``c[u] - twist(c[u2])`` must be divisible by ``x_label``."""

    u: int
    u2: int
    twist: int
    label: int


@lru_cache(maxsize=None)
def qap_conditions(group: WeylGroup, theta_q: SimpleSubset, theta_p: SimpleSubset) -> tuple[Condition, ...]:
    """The full sweep of ``A``-model conditions, one per ``(u, u', w mod W_u', alpha)``.

    For ``w`` in ``W_Q^{u'}`` the element ``w u'`` is in ``W^P``, so
    ``u in s_alpha w u' W_P`` reads ``proj(s_alpha w u') = u``.
    """
    table = group.double_coset_table(theta_q, theta_p)
    proj = group.coset_table(theta_p).proj
    reps = set(table.reps)
    out = set()
    for u2 in table.reps:
        for w in table.wq_reps[u2]:
            v = group.mul(w, u2)
            for a in group.rs.positive_ids:
                u = int(proj[group.reflection_left(a, v)])
                if u in reps and not (u == u2 and w == 0):
                    out.add(Condition(u, u2, w, a))
    return tuple(sorted(out, key=lambda c: (c.u, c.u2, c.label, c.twist)))


@lru_cache(maxsize=None)
def rwq_conditions(group: WeylGroup, theta_q: SimpleSubset, theta_p: SimpleSubset):
    """Pairs for the two ``R``-model conditions.

    Returns ``(divisibility, equivariance)``: ``(v, proj(s_beta v), beta)`` for
    every positive ``beta`` moving ``v``, and ``(v, proj(s_alpha v), alpha)``
    for every reflection ``s_alpha`` in ``W_Q``.
    """
    rs = group.rs
    table = group.coset_table(theta_p)
    div = set()
    for v in table.reps:
        for b in rs.positive_ids:
            y = int(table.proj[group.reflection_left(b, v)])
            if y != v:
                div.add((min(v, y), max(v, y), b))
    q_roots = [
        a for a in rs.positive_ids if all(c == 0 or (k + 1) in theta_q for k, c in enumerate(rs.simple_coords[a]))
    ]
    equiv = []
    for v in table.reps:
        for a in q_roots:
            equiv.append((v, int(table.proj[group.reflection_left(a, v)]), a))
    return tuple(sorted(div)), tuple(equiv)


def _vertex_modules_ok(t: SectionTuple) -> bool:
    table = t.ctx.group.double_coset_table(t.theta_q, t.theta_p)
    return all(in_vertex_module(t.ctx, v, table.theta_u[u]) for u, v in zip(t.reps, t.values))


def qap_violation(t: SectionTuple):
    """First failing ``A``-model condition (or ``"vertex"`` for a non-invariant value), else ``None``."""
    if t.over_cosets:
        raise ValueError("the A model is indexed by double coset representatives")
    if not _vertex_modules_ok(t):
        return "vertex"
    ctx = t.ctx
    values = t.as_dict()
    twisted: dict = {}
    for cond in qap_conditions(ctx.group, t.theta_q, t.theta_p):
        key = (cond.u2, cond.twist)
        img = twisted.get(key)
        if img is None:
            img = twisted[key] = ctx.weyl_act(cond.twist, values[cond.u2])
        if not ctx.divisible(values[cond.u] - img, cond.label):
            return cond
    return None


def membership_qap(t: SectionTuple) -> bool:
    return qap_violation(t) is None


def rwq_violation(t: SectionTuple):
    if not t.over_cosets:
        raise ValueError("the R model is indexed by minimal coset representatives")
    ctx = t.ctx
    values = t.as_dict()
    div, equiv = rwq_conditions(ctx.group, t.theta_q, t.theta_p)
    for v, y, a in equiv:
        if values[y] != ctx.weyl_act(ctx.group.reflection[a], values[v]):
            return ("equivariance", v, y, a)
    for v, y, b in div:
        if values[v] != values[y] and not ctx.divisible(values[v] - values[y], b):
            return ("divisibility", v, y, b)
    return None


def membership_rwq_wp(t: SectionTuple) -> bool:
    return rwq_violation(t) is None


def psi(t: SectionTuple) -> SectionTuple:
    """Expand ``(c_u)`` over ``^QW^P`` to ``(w(c_u))_{wu}`` over ``W^P``."""
    ctx, group = t.ctx, t.ctx.group
    table = group.double_coset_table(t.theta_q, t.theta_p)
    out = {}
    for u, c in zip(t.reps, t.values):
        for w in table.wq_reps[u]:
            out[group.mul(w, u)] = ctx.weyl_act(w, c)
    reps = tuple(group.coset_table(t.theta_p).reps)
    if set(out) != set(reps):
        raise AssertionError("the double parabolic decomposition did not cover W^P")
    return SectionTuple(ctx, t.theta_q, t.theta_p, reps, tuple(out[v] for v in reps), True)


def project_hat(t: SectionTuple) -> SectionTuple:
    """Restrict ``(b_v)`` over ``W^P`` to the positions ``v = u`` in ``^QW^P``."""
    reps = _reps(t.ctx, t.theta_q, t.theta_p, False)
    values = t.as_dict()
    return SectionTuple(t.ctx, t.theta_q, t.theta_p, reps, tuple(values[u] for u in reps), False)


# -- sampling ---------------------------------------------------------------------


def invariant_sample(ctx: FormalGroupContext, theta, rng: random.Random, degree: int = 2, terms: int = 2) -> SElement:
    """A random ``W_theta``-invariant element (symmetrization of a random element)."""
    theta = as_subset(ctx.rs.rank, theta)
    s = ctx.random_element(rng, degree=degree, terms=terms)
    if theta.is_empty:
        return s
    return ctx.symmetrize(s, ctx.group.parabolic_elements(theta))


def sample_rwq(ctx: FormalGroupContext, theta_q, theta_p, rng: random.Random, terms: int = 2, degree: int = 2) -> SectionTuple:
    """A random member of the ``R`` model: ``b_v = sum_k s_k v(s'_k)`` with
    ``s_k`` in ``S^{W_Q}`` and ``s'_k`` in ``S^{W_P}``."""
    n = ctx.rs.rank
    theta_q, theta_p = as_subset(n, theta_q), as_subset(n, theta_p)
    reps = tuple(ctx.group.coset_table(theta_p).reps)
    values = [ctx.zero] * len(reps)
    for _ in range(terms):
        s = invariant_sample(ctx, theta_q, rng, degree, 2)
        s2 = invariant_sample(ctx, theta_p, rng, degree, 2)
        for k, v in enumerate(reps):
            values[k] = values[k] + s * ctx.weyl_act(v, s2)
    return SectionTuple(ctx, theta_q, theta_p, reps, tuple(values), True)


def sample_qap(ctx: FormalGroupContext, theta_q, theta_p, rng: random.Random, **kw) -> SectionTuple:
    return project_hat(sample_rwq(ctx, theta_q, theta_p, rng, **kw))


def perturb(t: SectionTuple, rng: random.Random, degree: int = 2) -> SectionTuple:
    """Add a random vertex-module element at one random position (usually leaves the model)."""
    ctx = t.ctx
    k = rng.randrange(len(t.reps))
    if t.over_cosets:
        theta = SimpleSubset.empty(ctx.rs.rank)
    else:
        theta = ctx.group.double_coset_table(t.theta_q, t.theta_p).theta_u[t.reps[k]]
    values = list(t.values)
    values[k] = values[k] + invariant_sample(ctx, theta, rng, degree, 2)
    return t._replace(values)


# -- graded linear algebra (additive law) ----------------------------------------


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    if ncols == 0:
        return []
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    m = DomainMatrix([[QQ(x.numerator, x.denominator) for x in r] for r in rows], (len(rows), ncols), QQ)
    basis = m.nullspace().to_Matrix()
    return [[Fraction(int(x.p), int(x.q)) for x in basis.row(i)] for i in range(basis.rows)]


def _rank(vectors: list[list[Fraction]]) -> int:
    if not vectors:
        return 0
    m = DomainMatrix([[QQ(x.numerator, x.denominator) for x in v] for v in vectors], (len(vectors), len(vectors[0])), QQ)
    return m.rank()


def _require_additive(ctx: FormalGroupContext) -> None:
    if ctx.law != "additive":
        raise UnsupportedLaw("graded bases are computed for the additive law only")


@lru_cache(maxsize=None)
def _monomials(ctx: FormalGroupContext, degree: int) -> tuple[SElement, ...]:
    """Products of simple root classes of the given degree (a basis of ``S_d``)."""
    n = ctx.rs.rank
    out = []
    for combo in combinations_with_replacement(range(1, n + 1), degree):
        m = ctx.one
        for i in combo:
            m = m * ctx.x_simple(i)
        out.append(m)
    return tuple(out)


def _to_rows(elements: list[SElement]) -> tuple[list, list[list[Fraction]]]:
    keys = sorted({k for e in elements for k in e.terms})
    rows = [[Fraction(e.terms.get(k, 0)) for e in elements] for k in keys]
    return keys, rows


def _combine(basis: Sequence[SElement], coeffs: Sequence[Fraction], ctx) -> SElement:
    total = ctx.zero
    for b, c in zip(basis, coeffs):
        if c:
            total = total + b * c
    return total


@lru_cache(maxsize=None)
def invariant_basis(ctx: FormalGroupContext, theta: SimpleSubset, degree: int) -> tuple[SElement, ...]:
    """A basis of the degree-``d`` part of ``S^{W_theta}``."""
    _require_additive(ctx)
    mons = _monomials(ctx, degree)
    if theta.is_empty:
        return mons
    images = []
    rows: list[list[Fraction]] = []
    for i in theta:
        s = ctx.group.left[i - 1, 0]
        images = [ctx.weyl_act(s, m) - m for m in mons]
        rows.extend(_to_rows(images)[1])
    null = _nullspace(rows, len(mons))
    return tuple(_combine(mons, vec, ctx) for vec in null)


def _remainder(ctx: FormalGroupContext, s: SElement, rid: int) -> dict:
    form, _, pivot, _ = ctx._forms[ctx.rs.positive_part(rid)]
    return _divide_linear(s.terms, form, pivot)[1]


def _condition_list(ctx, theta_q, theta_p, model: str, sheaf: Sheaf | None):
    if model == "sheaf":
        sh = sheaf or structure_sheaf_double(theta_q, theta_p, ctx)
        return [Condition(e.src, e.dst, e.twist, e.label) for e in sh.edges], list(sh.vertices), sh.vertex_theta
    if model == "qap":
        table = ctx.group.double_coset_table(theta_q, theta_p)
        return list(qap_conditions(ctx.group, theta_q, theta_p)), list(table.reps), table.theta_u
    raise ValueError(f"unknown model {model!r}")


def graded_component(ctx: FormalGroupContext, theta_q, theta_p, degree: int, model: str = "sheaf", sheaf: Sheaf | None = None):
    """A basis of the degree-``d`` tuples satisfying all conditions of the chosen model.

    ``model`` is ``"sheaf"`` (edge conditions of the double structure sheaf)
    or ``"qap"`` (the full sweep of the ``A`` model).
    """
    _require_additive(ctx)
    n = ctx.rs.rank
    theta_q, theta_p = as_subset(n, theta_q), as_subset(n, theta_p)
    conds, verts, vtheta = _condition_list(ctx, theta_q, theta_p, model, sheaf)
    bases = {u: invariant_basis(ctx, vtheta[u], degree) for u in verts}
    offset, pos = {}, 0
    for u in verts:
        offset[u] = pos
        pos += len(bases[u])
    rows_by_key: dict = {}
    for ci, c in enumerate(conds):
        for k, b in enumerate(bases[c.u]):
            for mono, val in _remainder(ctx, b, c.label).items():
                rows_by_key.setdefault((ci, mono), {})
                rows_by_key[(ci, mono)][offset[c.u] + k] = rows_by_key[(ci, mono)].get(offset[c.u] + k, 0) + val
        for k, b in enumerate(bases[c.u2]):
            for mono, val in _remainder(ctx, ctx.weyl_act(c.twist, b), c.label).items():
                row = rows_by_key.setdefault((ci, mono), {})
                row[offset[c.u2] + k] = row.get(offset[c.u2] + k, 0) - val
    rows = [[Fraction(r.get(j, 0)) for j in range(pos)] for r in rows_by_key.values() if any(r.values())]
    out = []
    for vec in _nullspace(rows, pos):
        values = tuple(_combine(bases[u], vec[offset[u] : offset[u] + len(bases[u])], ctx) for u in verts)
        out.append(SectionTuple(ctx, theta_q, theta_p, tuple(verts), values, False))
    return out


def _echelon(tuples: list[SectionTuple]) -> list[SectionTuple]:
    """Row-reduced spanning tuples, each scaled to integer content 1."""
    if not tuples:
        return []
    ctx = tuples[0].ctx
    keys = sorted({(k, m) for t in tuples for k, v in enumerate(t.values) for m in v.terms})
    rows = [[Fraction(t.values[k].terms.get(m, 0)) for k, m in keys] for t in tuples]
    m = DomainMatrix([[QQ(x.numerator, x.denominator) for x in r] for r in rows], (len(rows), len(keys)), QQ)
    red = m.rref()[0].to_Matrix()
    out = []
    for i in range(red.rows):
        vec = [Fraction(int(x.p), int(x.q)) for x in red.row(i)]
        if not any(vec):
            continue
        scale = 1
        for x in vec:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        values = [dict() for _ in tuples[0].values]
        for (k, mono), x in zip(keys, vec):
            if x:
                values[k][mono] = x * scale
        t0 = tuples[0]
        out.append(SectionTuple(ctx, t0.theta_q, t0.theta_p, t0.reps, tuple(ctx.element(v) for v in values), t0.over_cosets))
    return out


def simple_root_form(ctx: FormalGroupContext, s: SElement) -> str:
    """``s`` written in the simple root classes ``a1..an`` and factored (additive law).

    Falls back to ``ctx.format`` when ``s`` is not a polynomial in the simple roots.
    """
    if ctx.law != "additive" or s.is_zero:
        return ctx.format(s)
    import sympy

    gens = sympy.symbols([f"a{i}" for i in range(1, ctx.rs.rank + 1)])
    expr = sympy.Integer(0)
    for d in sorted({ctx.monomial_degree(k) for k in s.terms}):
        part = s.homogeneous_part(d)
        mons = _monomials(ctx, d)
        keys, rows = _to_rows(list(mons) + [part])
        m = DomainMatrix([[QQ(x.numerator, x.denominator) for x in r] for r in rows], (len(rows), len(mons) + 1), QQ)
        null = m.nullspace().to_Matrix()
        sol = None
        for i in range(null.rows):
            last = null[i, len(mons)]
            if last != 0:
                sol = [-null[i, j] / last for j in range(len(mons))]
                break
        if sol is None:
            return ctx.format(s)
        combos = list(combinations_with_replacement(range(ctx.rs.rank), d))
        for coeff, combo in zip(sol, combos):
            term = sympy.Rational(coeff)
            for j in combo:
                term *= gens[j]
            expr += term
    return str(sympy.factor(expr))


def _flatten(tuples: list[SectionTuple]) -> list[list[Fraction]]:
    keys = sorted({(k, m) for t in tuples for k, v in enumerate(t.values) for m in v.terms})
    return [[Fraction(t.values[k].terms.get(m, 0)) for k, m in keys] for t in tuples]


@dataclass
class GradedBasis:
    """Module generators of a space of sections, degree by degree.

    ``components[d]`` spans all degree-``d`` sections, ``generators[d]`` are
    the new generators in degree ``d`` modulo multiples of lower-degree
    sections by the module ring ``S^{W_Q}``, and ``ranks[d]`` their number.
    """

    max_degree: int
    components: list[list[SectionTuple]]
    generators: list[list[SectionTuple]]
    ranks: list[int] = field(default_factory=list)

    @property
    def dimensions(self) -> list[int]:
        return [len(c) for c in self.components]

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)


def decomposable_part(ctx, theta_q: SimpleSubset, components: list[list[SectionTuple]], degree: int) -> list[SectionTuple]:
    """Spanning set of ``sum_{k >= 1} (S^{W_Q})_k * Gamma_{d-k}``."""
    out = []
    for k in range(1, degree + 1):
        ring = invariant_basis(ctx, theta_q, k)
        for r in ring:
            for t in components[degree - k]:
                out.append(t * r)
    return out


def graded_basis(ctx: FormalGroupContext, theta_q, theta_p, max_deg: int, model: str = "sheaf", sheaf: Sheaf | None = None) -> GradedBasis:
    _require_additive(ctx)
    n = ctx.rs.rank
    theta_q, theta_p = as_subset(n, theta_q), as_subset(n, theta_p)
    components, generators, ranks = [], [], []
    for d in range(max_deg + 1):
        comp = graded_component(ctx, theta_q, theta_p, d, model, sheaf)
        components.append(comp)
        dec = decomposable_part(ctx, theta_q, components, d)
        base_rank = _rank(_flatten(dec)) if dec else 0
        chosen: list[SectionTuple] = []
        current = base_rank
        # echelon rows read from the bottom favour tuples vanishing at early vertices
        for t in reversed(_echelon(comp)):
            trial = _rank(_flatten(dec + chosen + [t]))
            if trial > current:
                chosen.append(t)
                current = trial
        generators.append(chosen)
        ranks.append(len(chosen))
    return GradedBasis(max_deg, components, generators, ranks)


def gamma_basis_graded(sh: Sheaf, max_deg: int) -> GradedBasis:
    """Graded generators of the global sections of a structure sheaf (additive law)."""
    _require_additive(sh.ctx)
    return graded_basis(sh.ctx, sh.theta_q, sh.theta_p, max_deg, "sheaf", sh)


def generates_same(ctx, basis: GradedBasis, candidates: Sequence[SectionTuple], minimal: bool = True) -> bool:
    """Whether homogeneous ``candidates`` generate the same module as ``basis``.

    Each candidate must be a section of its degree and, degree by degree, the
    candidates together with ring multiples of lower components must span the
    component.  With ``minimal`` the count per degree must also match.
    """
    by_degree: dict[int, list[SectionTuple]] = {}
    for t in candidates:
        degs = {v.degree for v in t.values if not v.is_zero}
        if len(degs) != 1:
            return False
        by_degree.setdefault(degs.pop(), []).append(t)
    if any(d > basis.max_degree for d in by_degree):
        return False
    theta_q = candidates[0].theta_q if candidates else None
    for d in range(basis.max_degree + 1):
        comp = basis.components[d]
        mine = by_degree.get(d, [])
        if mine and _rank(_flatten(comp + mine)) != len(comp):
            return False
        span = (decomposable_part(ctx, theta_q, basis.components, d) if theta_q is not None else []) + mine
        if len(comp) and _rank(_flatten(span)) != len(comp):
            return False
        if minimal and len(mine) != basis.ranks[d]:
            return False
    return True


def hilbert_dimensions(ctx, theta_q, theta_p, max_deg: int, model: str = "qap") -> list[int]:
    return [len(graded_component(ctx, theta_q, theta_p, d, model)) for d in range(max_deg + 1)]


def invariant_degrees(kind: str, rank: int) -> tuple[int, ...]:
    """Degrees of the basic invariants of the Weyl group."""
    if kind == "A":
        return tuple(range(2, rank + 2))
    if kind in ("B", "C"):
        return tuple(range(2, 2 * rank + 1, 2))
    if kind == "D":
        return tuple(sorted([*range(2, 2 * rank - 1, 2), rank]))
    if kind == "G2":
        return (2, 6)
    raise ValueError(kind)


def rank_over_invariants(dims: Sequence[int], degrees: Sequence[int]) -> int:
    """``N(1)`` for ``N(t) = H(t) * prod(1 - t^d)``, truncated to the known degrees of ``H``."""
    poly = list(dims)
    for d in degrees:
        nxt = list(poly)
        for k in range(d, len(poly)):
            nxt[k] -= poly[k - d]
        poly = nxt
    return sum(poly)


__all__ = [
    "SectionTuple",
    "Sheaf",
    "SheafEdge",
    "Condition",
    "GradedBasis",
    "section_tuple",
    "section_from_dict",
    "constant_tuple",
    "structure_sheaf_parabolic",
    "structure_sheaf_double",
    "is_section",
    "section_violation",
    "membership_qap",
    "qap_violation",
    "membership_rwq_wp",
    "rwq_violation",
    "qap_conditions",
    "rwq_conditions",
    "psi",
    "project_hat",
    "invariant_sample",
    "sample_rwq",
    "sample_qap",
    "perturb",
    "invariant_basis",
    "graded_component",
    "graded_basis",
    "gamma_basis_graded",
    "generates_same",
    "simple_root_form",
    "hilbert_dimensions",
    "invariant_degrees",
    "rank_over_invariants",
    "separating_section",
]


def separating_section(ctx: FormalGroupContext, theta_q, theta_p, max_deg: int = 3) -> SectionTuple | None:
    """A global section of the double structure sheaf outside the ``A`` model, if one
    exists in degree at most ``max_deg`` (additive law)."""
    _require_additive(ctx)
    for d in range(max_deg + 1):
        for t in graded_component(ctx, theta_q, theta_p, d, "sheaf"):
            if not membership_qap(t):
                return t
    return None
