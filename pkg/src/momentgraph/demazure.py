"""Twisted group algebra, push-pull elements and the actions on cofunctions.

Elements of ``Q_W`` are finite sums ``sum q_w delta_w`` with ``q_w`` in the
localization ``Q``; multiplication obeys ``delta_w q = w(q) delta_w``.
Cofunctions ``sum p_v f_v`` are indexed by minimal coset representatives.

>>> from .fga import additive_context
>>> from .root_system import build_root_system
>>> ctx = additive_context(build_root_system("A", 1))
>>> f = Cofunction.basis(ctx, "", 0) * ctx.x_root(ctx.rs.negate(0))
>>> bullet(push_pull(ctx, 1), f) == Cofunction.from_values(ctx, "", [1, 1])
True
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import IndexMismatch, NotParabolicInvariant
from .fga import FormalGroupContext, QElement, SElement
from .root_system import SimpleSubset, as_subset
from .sections import SectionTuple, rwq_conditions
from .weyl import word_string


def _q(ctx: FormalGroupContext, value) -> QElement:
    if isinstance(value, QElement):
        return value
    if isinstance(value, SElement):
        return QElement.from_s(value)
    return QElement.from_s(ctx.const(value))


def _act(ctx: FormalGroupContext, w: int, value):
    if isinstance(value, QElement):
        return value.act(w)
    return ctx.weyl_act(w, value)


# -- twisted group algebra -------------------------------------------------------


@dataclass(frozen=True)
class TwistedElement:
    """``sum_w coeffs[w] delta_w`` with zero coefficients pruned."""

    ctx: FormalGroupContext
    coeffs: tuple[tuple[int, QElement], ...]

    @classmethod
    def from_dict(cls, ctx: FormalGroupContext, coeffs: dict) -> "TwistedElement":
        items = []
        for w in sorted(coeffs):
            q = _q(ctx, coeffs[w])
            if not q.is_zero:
                items.append((int(w), q))
        return cls(ctx, tuple(items))

    @classmethod
    def delta(cls, ctx: FormalGroupContext, w) -> "TwistedElement":
        return cls.from_dict(ctx, {ctx._index(w): 1})

    @classmethod
    def scalar(cls, ctx: FormalGroupContext, q) -> "TwistedElement":
        return cls.from_dict(ctx, {0: q})

    def as_dict(self) -> dict[int, QElement]:
        return dict(self.coeffs)

    def __add__(self, other: "TwistedElement") -> "TwistedElement":
        out = self.as_dict()
        for w, q in other.coeffs:
            out[w] = out[w] + q if w in out else q
        return TwistedElement.from_dict(self.ctx, out)

    def __sub__(self, other: "TwistedElement") -> "TwistedElement":
        return self + other * (-1)

    def __mul__(self, other) -> "TwistedElement":
        if isinstance(other, TwistedElement):
            return twisted_mul(self, other)
        return TwistedElement.from_dict(self.ctx, {w: q * other for w, q in self.coeffs})

    def __rmul__(self, other) -> "TwistedElement":
        # scalars multiply from the left: q * (p delta_w) = (q p) delta_w
        return TwistedElement.from_dict(self.ctx, {w: _q(self.ctx, other) * q for w, q in self.coeffs})

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwistedElement):
            return NotImplemented
        a, b = self.as_dict(), other.as_dict()
        return set(a) == set(b) and all(a[w] == b[w] for w in a)

    def __hash__(self):
        raise TypeError("TwistedElement is not hashable")

    def __repr__(self) -> str:
        words = self.ctx.group.words
        return " + ".join(f"({q}) d[{word_string(words[w])}]" for w, q in self.coeffs) or "0"


def twisted_mul(a: TwistedElement, b: TwistedElement) -> TwistedElement:
    """``(p delta_w)(q delta_v) = p w(q) delta_{wv}``."""
    group = a.ctx.group
    out: dict[int, QElement] = {}
    for w, p in a.coeffs:
        for v, q in b.coeffs:
            wv = group.mul(w, v)
            term = p * q.act(w)
            out[wv] = out[wv] + term if wv in out else term
    return TwistedElement.from_dict(a.ctx, out)


def push_pull(ctx: FormalGroupContext, i: int) -> TwistedElement:
    """``Y_i = 1/x_{-alpha_i} + (1/x_{alpha_i}) delta_{s_i}``."""
    rs = ctx.rs
    rid = rs.simple_indices[i - 1]
    s = int(ctx.group.left[i - 1, 0])
    return TwistedElement.from_dict(
        ctx, {0: QElement.inverse_chern(ctx, rs.negate(rid)), s: QElement.inverse_chern(ctx, rid)}
    )


def act_on_s(z: TwistedElement, s) -> QElement:
    """The action of ``Q_W`` on ``Q``: ``q delta_w (s) = q w(s)``.

    On ``S`` the push-pull elements act by ``Y_i(s) = s/x_{-alpha} + s_i(s)/x_alpha``.
    """
    ctx = z.ctx
    s = _q(ctx, s)
    total = QElement.from_s(ctx.zero)
    for w, q in z.coeffs:
        total = total + q * s.act(w)
    return total


# -- cofunctions -----------------------------------------------------------------


@dataclass(frozen=True)
class Cofunction:
    """``sum_v values[k] f_{reps[k]}`` over ``W^P`` for the stored ``theta``."""

    ctx: FormalGroupContext
    theta: SimpleSubset
    reps: tuple[int, ...]
    values: tuple[QElement, ...]

    @classmethod
    def from_values(cls, ctx: FormalGroupContext, theta, values: Sequence) -> "Cofunction":
        theta = as_subset(ctx.rs.rank, theta)
        reps = tuple(ctx.group.coset_table(theta).reps)
        if len(values) != len(reps):
            raise IndexMismatch(f"expected {len(reps)} values, got {len(values)}")
        return cls(ctx, theta, reps, tuple(_q(ctx, v) for v in values))

    @classmethod
    def zero(cls, ctx: FormalGroupContext, theta) -> "Cofunction":
        theta = as_subset(ctx.rs.rank, theta)
        return cls.from_values(ctx, theta, [0] * len(ctx.group.coset_table(theta).reps))

    @classmethod
    def basis(cls, ctx: FormalGroupContext, theta, v: int) -> "Cofunction":
        """The dual basis element ``f_v`` (``v`` a representative)."""
        theta = as_subset(ctx.rs.rank, theta)
        reps = ctx.group.coset_table(theta).reps
        if v not in reps:
            raise IndexMismatch(f"{v} is not a minimal coset representative")
        return cls.from_values(ctx, theta, [int(r == v) for r in reps])

    @classmethod
    def from_section(cls, t: SectionTuple) -> "Cofunction":
        if not t.over_cosets:
            raise IndexMismatch("cofunctions are indexed by minimal coset representatives")
        return cls(t.ctx, t.theta_p, t.reps, tuple(_q(t.ctx, v) for v in t.values))

    def to_section(self, theta_q=None) -> SectionTuple:
        """The underlying ``S``-valued tuple (fails if a value has a denominator)."""
        theta_q = SimpleSubset.empty(self.ctx.rs.rank) if theta_q is None else as_subset(self.ctx.rs.rank, theta_q)
        return SectionTuple(self.ctx, theta_q, self.theta, self.reps, tuple(v.to_s() for v in self.values), True)

    def value(self, v: int) -> QElement:
        return self.values[self.reps.index(v)]

    def _check(self, other: "Cofunction") -> None:
        if self.theta != other.theta:
            raise IndexMismatch("cofunctions on different coset spaces")

    def __add__(self, other: "Cofunction") -> "Cofunction":
        self._check(other)
        return Cofunction(self.ctx, self.theta, self.reps, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "Cofunction") -> "Cofunction":
        self._check(other)
        return Cofunction(self.ctx, self.theta, self.reps, tuple(a - b for a, b in zip(self.values, other.values)))

    def __mul__(self, scalar) -> "Cofunction":
        if isinstance(scalar, Cofunction):
            self._check(scalar)
            return Cofunction(self.ctx, self.theta, self.reps, tuple(a * b for a, b in zip(self.values, scalar.values)))
        q = _q(self.ctx, scalar)
        return Cofunction(self.ctx, self.theta, self.reps, tuple(q * a for a in self.values))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cofunction):
            return NotImplemented
        return self.theta == other.theta and all(a == b for a, b in zip(self.values, other.values))

    def __hash__(self):
        raise TypeError("Cofunction is not hashable")

    def lift(self) -> "Cofunction":
        """The same class over the full group: ``f_v -> sum_{w in v W_P} f_w``."""
        if self.theta.is_empty:
            return self
        table = self.ctx.group.coset_table(self.theta)
        by_rep = dict(zip(self.reps, self.values))
        full = SimpleSubset.empty(self.ctx.rs.rank)
        reps = self.ctx.group.coset_table(full).reps
        return Cofunction.from_values(self.ctx, full, [by_rep[int(table.proj[w])] for w in reps])

    def collapse(self, theta) -> "Cofunction | None":
        """Inverse of ``lift``; ``None`` if the values are not constant on cosets."""
        theta = as_subset(self.ctx.rs.rank, theta)
        if not self.theta.is_empty:
            raise ValueError("collapse applies to cofunctions over the full group")
        table = self.ctx.group.coset_table(theta)
        out: dict[int, QElement] = {}
        for w, q in zip(self.reps, self.values):
            r = int(table.proj[w])
            if r in out:
                if not out[r] == q:
                    return None
            else:
                out[r] = q
        return Cofunction.from_values(self.ctx, theta, [out[r] for r in table.reps])

    @property
    def is_polynomial(self) -> bool:
        return all(v.is_polynomial for v in self.values)

    def __repr__(self) -> str:
        words = self.ctx.group.words
        return "Cofunction(" + ", ".join(f"{word_string(words[r])}: {v}" for r, v in zip(self.reps, self.values)) + ")"


def bullet(a: TwistedElement, f: Cofunction) -> Cofunction:
    """The Hecke action ``q delta_w . p f_v = p (v w^{-1})(q) f_{v w^{-1}}``.

    Parabolic cofunctions are lifted to the full group; the result is
    collapsed back when it is constant on cosets and kept over ``W`` otherwise.
    """
    ctx, group = a.ctx, a.ctx.group
    full = f.lift()
    out: dict[int, QElement] = {}
    for w, q in a.coeffs:
        winv = int(group.inverse[w])
        for v, p in zip(full.reps, full.values):
            if p.is_zero:
                continue
            x = group.mul(v, winv)
            term = p * q.act(x)
            out[x] = out[x] + term if x in out else term
    zero = QElement.from_s(ctx.zero)
    result = Cofunction.from_values(ctx, "", [out.get(w, zero) for w in full.reps])
    if f.theta.is_empty:
        return result
    collapsed = result.collapse(f.theta)
    return result if collapsed is None else collapsed


def odot(a: TwistedElement, f: Cofunction) -> Cofunction:
    """The left action ``(p delta_w) . (q f_v) = p w(q) f_{proj(wv)}``."""
    ctx, group = a.ctx, a.ctx.group
    proj = group.coset_table(f.theta).proj
    out: dict[int, QElement] = {}
    for w, p in a.coeffs:
        for v, q in zip(f.reps, f.values):
            if q.is_zero:
                continue
            x = int(proj[group.mul(w, v)])
            term = p * q.act(w)
            out[x] = out[x] + term if x in out else term
    zero = QElement.from_s(ctx.zero)
    return Cofunction.from_values(ctx, f.theta, [out.get(v, zero) for v in f.reps])


def char_map(ctx: FormalGroupContext, q, theta_p="") -> Cofunction:
    """``c(q) = sum_w w(q) f_w``, collapsed to ``W^P`` (needs ``q`` in ``S^{W_P}``)."""
    theta_p = as_subset(ctx.rs.rank, theta_p)
    q = _q(ctx, q)
    if not theta_p.is_empty and not all(q.act(int(ctx.group.left[i - 1, 0])) == q for i in theta_p):
        raise NotParabolicInvariant(f"{q} is not invariant under the parabolic subgroup {theta_p}")
    reps = ctx.group.coset_table(theta_p).reps
    return Cofunction.from_values(ctx, theta_p, [q.act(v) for v in reps])


def borel_pair(ctx: FormalGroupContext, s, s2, theta_p="") -> Cofunction:
    """``rho(s (x) s') = s c(s')``."""
    return char_map(ctx, s2, theta_p) * _q(ctx, s)


def x_q(ctx: FormalGroupContext, theta_q) -> SElement:
    """``prod x_alpha`` over negative roots outside the root subsystem of ``theta_q``."""
    rs = ctx.rs
    theta_q = as_subset(rs.rank, theta_q)
    out = ctx.one
    for rid in rs.positive_ids:
        if any(c and (k + 1) not in theta_q for k, c in enumerate(rs.simple_coords[rid])):
            out = out * ctx.x_root(rs.negate(rid))
    return out


def point_class(ctx: FormalGroupContext, theta_q) -> Cofunction:
    """``[pt_Q] = x_Q f_e`` on ``W/W_Q``."""
    theta_q = as_subset(ctx.rs.rank, theta_q)
    return Cofunction.basis(ctx, theta_q, 0) * x_q(ctx, theta_q)


# -- correspondence product -----------------------------------------------------------


def identity_tuple(ctx: FormalGroupContext, theta_p) -> SectionTuple:
    theta_p = as_subset(ctx.rs.rank, theta_p)
    reps = tuple(ctx.group.coset_table(theta_p).reps)
    return SectionTuple(ctx, theta_p, theta_p, reps, tuple(ctx.const(int(v == 0)) for v in reps), True)


def correspondence_product(c: SectionTuple, b: SectionTuple) -> SectionTuple:
    """``a_w = sum_{proj(vu) = w} b_v v(c_u)`` for ``b`` over ``W^P`` and ``c`` over ``W^H``.

    ``b`` describes a map from the ``Q`` side to the ``P`` side and ``c`` one
    from the ``P`` side to the ``H`` side; the result goes from ``Q`` to ``H``.
    Values may be in ``S`` or in ``Q``.
    """
    if not (b.over_cosets and c.over_cosets):
        raise IndexMismatch("correspondence products take tuples over minimal coset representatives")
    if b.theta_p != c.theta_q or b.ctx is not c.ctx:
        raise IndexMismatch(f"cannot compose: middle subsets {b.theta_p} and {c.theta_q} differ")
    ctx, group = b.ctx, b.ctx.group
    proj = group.coset_table(c.theta_p).proj
    out: dict = {}
    for v, bv in zip(b.reps, b.values):
        if bv.is_zero:
            continue
        for u, cu in zip(c.reps, c.values):
            if cu.is_zero:
                continue
            w = int(proj[group.mul(v, u)])
            term = bv * _act(ctx, v, cu)
            out[w] = out[w] + term if w in out else term
    values = []
    for w in c.reps:
        val = out.get(w, ctx.zero)
        if isinstance(val, QElement) and val.is_polynomial:
            val = val.num
        values.append(val)
    return SectionTuple(ctx, b.theta_q, c.theta_p, c.reps, tuple(values), True)


def hom_membership(b: SectionTuple, theta_q=None, theta_p=None) -> bool:
    """Whether ``(b_v)`` comes from a homomorphism of the ``S``-lattices.

    Requires ``b'_v = x_Q b_v`` in ``S`` and ``x_{v(alpha)} | b'_v - b'_{proj(s_{v(alpha)} v)}``
    for every ``v`` and every root ``alpha`` outside the subsystem of ``Theta_P``.
    """
    ctx, rs, group = b.ctx, b.ctx.rs, b.ctx.group
    theta_q = b.theta_q if theta_q is None else as_subset(rs.rank, theta_q)
    theta_p = b.theta_p if theta_p is None else as_subset(rs.rank, theta_p)
    if not b.over_cosets or theta_p != b.theta_p:
        raise IndexMismatch("hom data is indexed by W^P for the given Theta_P")
    xq = QElement.from_s(x_q(ctx, theta_q))
    scaled = {}
    for v, bv in zip(b.reps, b.values):
        prod = xq * _q(ctx, bv)
        if not prod.is_polynomial:
            return False
        scaled[v] = prod.num
    proj = group.coset_table(theta_p).proj
    outside = [a for a in rs.positive_ids if any(c and (k + 1) not in theta_p for k, c in enumerate(rs.simple_coords[a]))]
    for v in b.reps:
        for a in outside:
            gamma = int(group.perm[v, a])
            y = int(proj[group.reflection_left(gamma, v)])
            diff = scaled[v] - scaled[y]
            if not diff.is_zero and not ctx.divisible(diff, rs.positive_part(gamma)):
                return False
    return True


def is_equivariant(b: SectionTuple) -> bool:
    """Condition ``b_{proj(s_alpha v)} = s_alpha(b_v)`` for reflections in ``W_Q`` (values in ``S`` or ``Q``)."""
    ctx = b.ctx
    values = b.as_dict()
    for v, y, a in rwq_conditions(ctx.group, b.theta_q, b.theta_p)[1]:
        image = _act(ctx, int(ctx.group.reflection[a]), values[v])
        if not _q(ctx, values[y]) == _q(ctx, image):
            return False
    return True


def divide_by_x_q(b: SectionTuple) -> SectionTuple:
    """``b / x_Q`` with values in ``Q`` (sends the ``R`` model into the hom lattice)."""
    ctx = b.ctx
    inv = QElement(ctx.one, [ctx.rs.positive_part(r) for r in _negative_ids(ctx, b.theta_q)], reduce=False)
    unit = ctx.one
    for r in _negative_ids(ctx, b.theta_q):
        unit = unit * ctx.negative_unit(ctx.rs.positive_part(r))[1]
    inv = QElement(unit, inv.den, reduce=False)
    return SectionTuple(ctx, b.theta_q, b.theta_p, b.reps, tuple(inv * _q(ctx, v) for v in b.values), True)


def _negative_ids(ctx: FormalGroupContext, theta_q) -> list[int]:
    rs = ctx.rs
    return [
        rs.negate(rid)
        for rid in rs.positive_ids
        if any(c and (k + 1) not in theta_q for k, c in enumerate(rs.simple_coords[rid]))
    ]


__all__ = [
    "TwistedElement",
    "Cofunction",
    "twisted_mul",
    "push_pull",
    "act_on_s",
    "bullet",
    "odot",
    "char_map",
    "borel_pair",
    "x_q",
    "point_class",
    "identity_tuple",
    "correspondence_product",
    "hom_membership",
    "is_equivariant",
    "divide_by_x_q",
]
