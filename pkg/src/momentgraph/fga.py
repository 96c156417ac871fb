"""The formal group algebra ``S``, its localization ``Q`` and the Weyl action.

Three formal group laws are supported:

* ``additive``: ``x +_F y = x + y``.  ``S`` is the polynomial ring on the
  root span.  Elements are stored as polynomials in the ambient coordinate
  forms ``t_1 .. t_m`` (``x_lambda = sum lambda_k t_k``), where the Weyl
  group acts by signed permutations of the variables.
* ``multiplicative``: ``x +_F y = x + y - beta*x*y``.  ``S`` is the Laurent
  ring ``Q[beta^{±1}][Lambda]`` of the lattice with ``x_lambda =
  beta^{-1}(1 - e^{-lambda})``.  Monomials are keyed by the beta exponent
  followed by lattice coordinates.
* ``truncated``: a law with given rational coefficients ``a_ij``.  ``S`` is
  the power series ring in the classes of a lattice basis, kept modulo total
  degree greater than ``N``; all equalities hold modulo that degree.

>>> rs = build_root_system("A", 2)
>>> ctx = additive_context(rs)
>>> a1, a2 = ctx.x_simple(1), ctx.x_simple(2)
>>> ctx.weyl_act(ctx.group.simple_reflection(1), a2) == a1 + a2
True
>>> ctx.divide_by_chern(a2 * (a1 + a2), ctx.rs.simple_indices[1]) == a1 + a2
True
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product as iproduct
from typing import Iterable, Sequence

import sympy

from .errors import TruncationExceeded, UnsupportedLaw
from .root_system import RootSystem, as_subset, build_root_system, dot
from .weyl import WeylElement, WeylGroup, weyl_group


def _num(c):
    """Collapse integral Fractions to ints so that the common case stays fast."""
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _add_into(acc: dict, key, value) -> None:
    v = acc.get(key, 0) + value
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def _fmt_coeff(c) -> str:
    return str(_num(c))


class SElement:
    """An element of ``S``: a sparse map from monomial keys to rational coefficients."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: "FormalGroupContext", terms: dict):
        self.ctx = ctx
        self.terms = terms
        self._hash = None

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> "SElement":
        if isinstance(other, SElement):
            if other.ctx is not self.ctx:
                raise ValueError("elements from different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(out, k, v)
        return SElement(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return SElement(self.ctx, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(out, k, -v)
        return SElement(self.ctx, out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.ctx.zero
            return SElement(self.ctx, {k: _num(v * other) for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.ctx._mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            # only monomial units (e.g. beta, e^lambda) have inverses in S
            return self.ctx.unit_inverse(self) ** (-k)
        result = self.ctx.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ctx.const(other)
        if not isinstance(other, SElement):
            return NotImplemented
        return self.ctx is other.ctx and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def act(self, w) -> "SElement":
        return self.ctx.weyl_act(w, self)

    @property
    def degree(self) -> int:
        """Largest total degree of a monomial (polynomial laws only)."""
        return max((self.ctx.monomial_degree(k) for k in self.terms), default=-1)

    def homogeneous_part(self, d: int) -> "SElement":
        return SElement(self.ctx, {k: v for k, v in self.terms.items() if self.ctx.monomial_degree(k) == d})

    def to_monomials(self) -> list[list]:
        """Canonical serialization: ``[[coefficient, exponents], ...]`` in graded lex order."""
        keys = sorted(self.terms, key=self.ctx.monomial_sort_key)
        return [[_fmt_coeff(self.terms[k]), list(k)] for k in keys]

    def __repr__(self) -> str:
        return self.ctx.format(self)

    __str__ = __repr__


class FormalGroupContext:
    """Common interface of the formal group algebras of the three laws."""

    law: str = ""

    def __init__(self, rs: RootSystem, lattice: str = "weight"):
        if lattice not in ("weight", "root"):
            raise ValueError("lattice must be 'weight' or 'root'")
        self.rs = rs
        self.lattice = lattice
        self.group: WeylGroup = weyl_group(rs)
        self._root_cache: dict[int, SElement] = {}
        self._product_cache: dict[tuple, SElement] = {}
        self._unit_cache: dict[int, tuple[SElement, SElement]] = {}

    # -- constructors --------------------------------------------------------

    nvars: int = 0

    def element(self, terms: dict) -> SElement:
        out = {}
        for k, v in terms.items():
            v = _num(Fraction(v)) if not isinstance(v, int) else v
            if v:
                out[tuple(k)] = out.get(tuple(k), 0) + v
        return SElement(self, {k: v for k, v in out.items() if v})

    @property
    def zero(self) -> SElement:
        return SElement(self, {})

    def const(self, c) -> SElement:
        c = _num(Fraction(c))
        return SElement(self, {self._unit_key: c} if c else {})

    @property
    def one(self) -> SElement:
        return self.const(1)

    @cached_property
    def _unit_key(self) -> tuple:
        return (0,) * self.nvars

    def from_monomials(self, data: Iterable) -> SElement:
        return self.element({tuple(int(x) for x in e): Fraction(c) for c, e in data})

    def _mul(self, a: SElement, b: SElement) -> SElement:
        out: dict = {}
        for ka, va in a.terms.items():
            for kb, vb in b.terms.items():
                _add_into(out, tuple(x + y for x, y in zip(ka, kb)), va * vb)
        return SElement(self, {k: _num(v) for k, v in out.items()})

    def monomial_degree(self, key) -> int:
        return sum(key)

    def monomial_sort_key(self, key):
        return (self.monomial_degree(key), key)

    # -- lattice bookkeeping -------------------------------------------------

    @cached_property
    def _inverse_transposed_cartan(self):
        m = sympy.Matrix(self.rs.cartan_matrix).T.inv()
        return [[Fraction(int(x.p), int(x.q)) for x in m.row(i)] for i in range(self.rs.rank)]

    def lattice_coords(self, vector: Sequence) -> tuple[int, ...]:
        """Coordinates of an ambient vector in the chosen lattice basis."""
        rs = self.rs
        weight = [
            Fraction(2 * dot(vector, rs.simple_root(i)), dot(rs.simple_root(i), rs.simple_root(i)))
            for i in range(1, rs.rank + 1)
        ]
        if self.lattice == "weight":
            coords = weight
        else:
            inv = self._inverse_transposed_cartan
            coords = [sum(inv[i][k] * weight[k] for k in range(rs.rank)) for i in range(rs.rank)]
        if any(c.denominator != 1 for c in coords):
            raise ValueError(f"{tuple(vector)} is not in the {self.lattice} lattice")
        return tuple(int(c) for c in coords)

    def root_lattice_coords(self, rid: int) -> tuple[int, ...]:
        rs = self.rs
        if self.lattice == "root":
            return tuple(rs.simple_coords[rid])
        cart = rs.cartan_matrix
        c = rs.simple_coords[rid]
        return tuple(sum(c[k] * cart[k][i] for k in range(rs.rank)) for i in range(rs.rank))

    @cached_property
    def lattice_matrices(self) -> list[tuple[tuple[int, ...], ...]]:
        """Integer matrix of every group element acting on lattice coordinates."""
        rs, g = self.rs, self.group
        n = rs.rank
        cart = rs.cartan_matrix
        gens = []
        for i in range(n):
            alpha_i = [1 if k == i else 0 for k in range(n)] if self.lattice == "root" else list(cart[i])
            cols = []
            for j in range(n):
                pair = cart[j][i] if self.lattice == "root" else int(i == j)
                col = [int(k == j) - pair * alpha_i[k] for k in range(n)]
                cols.append(col)
            gens.append([[cols[j][r] for j in range(n)] for r in range(n)])
        mats: list = [None] * g.size
        mats[0] = tuple(tuple(int(r == c) for c in range(n)) for r in range(n))
        for w in sorted(range(1, g.size), key=lambda x: g.length[x]):
            i, v = g.parent[w]
            a, b = gens[i], mats[v]
            mats[w] = tuple(
                tuple(sum(a[r][k] * b[k][c] for k in range(n)) for c in range(n)) for r in range(n)
            )
        return mats

    # -- characteristic classes --------------------------------------------

    def chern_class(self, vector: Sequence) -> SElement:
        """``x_lambda`` for an ambient vector ``lambda`` in the lattice."""
        raise NotImplementedError

    def x_root(self, rid: int) -> SElement:
        x = self._root_cache.get(rid)
        if x is None:
            x = self.chern_class(self.rs.roots[rid])
            self._root_cache[rid] = x
        return x

    def x_simple(self, label: int) -> SElement:
        return self.x_root(self.rs.simple_indices[label - 1])

    def x_weight(self, label: int) -> SElement:
        return self.chern_class(self.rs.fundamental_weights[label - 1])

    def x_product(self, rids: Sequence[int]) -> SElement:
        key = tuple(sorted(rids))
        x = self._product_cache.get(key)
        if x is None:
            x = self.one
            for r in key:
                x = x * self.x_root(r)
            self._product_cache[key] = x
        return x

    def formal_sum(self, x: SElement, y: SElement) -> SElement:
        raise NotImplementedError

    def formal_neg(self, x: SElement) -> SElement:
        raise NotImplementedError

    # -- Weyl action ---------------------------------------------------------

    def _index(self, w) -> int:
        return w.index if isinstance(w, WeylElement) else int(w)

    def weyl_act(self, w, s: SElement) -> SElement:
        raise NotImplementedError

    def is_invariant(self, s: SElement, theta) -> bool:
        theta = as_subset(self.rs.rank, theta)
        return all(self.weyl_act(self.group.left[i - 1, 0], s) == s for i in theta)

    def symmetrize(self, s: SElement, elements: Iterable[int]) -> SElement:
        total = self.zero
        for w in elements:
            total = total + self.weyl_act(w, s)
        return total

    # -- divisibility ------------------------------------------------------

    def divide_by_chern(self, s: SElement, rid: int) -> SElement | None:
        raise NotImplementedError

    def divisible(self, s: SElement, rid: int) -> bool:
        return s.is_zero or self.divide_by_chern(s, rid) is not None

    def negative_unit(self, rid: int) -> tuple[SElement, SElement]:
        """``(u, u^{-1})`` with ``x_{-alpha} = u * x_alpha`` for a positive root ``alpha``."""
        cached = self._unit_cache.get(rid)
        if cached is None:
            u = self.divide_by_chern(self.x_root(self.rs.negate(rid)), rid)
            if u is None:
                raise AssertionError("x_{-alpha} is not a multiple of x_alpha")
            cached = (u, self.unit_inverse(u))
            self._unit_cache[rid] = cached
        return cached

    def unit_inverse(self, u: SElement) -> SElement:
        raise NotImplementedError

    # -- sampling --------------------------------------------------------------

    def generators(self) -> list[SElement]:
        """Chern classes that generate ``S`` (used for random sampling)."""
        gens = [self.x_simple(i) for i in range(1, self.rs.rank + 1)]
        if self.lattice == "weight" and self.law != "additive":
            gens += [self.x_weight(i) for i in range(1, self.rs.rank + 1)]
        return gens

    def random_element(self, rng: random.Random, degree: int = 2, terms: int = 3, coeff: int = 3) -> SElement:
        """A random combination of products of at most ``degree`` generators."""
        gens = self.generators()
        total = self.zero
        for _ in range(terms):
            d = rng.randint(0, degree)
            m = self.const(rng.choice([c for c in range(-coeff, coeff + 1) if c]))
            for _ in range(d):
                m = m * rng.choice(gens)
            total = total + m
        return total

    def format(self, s: SElement) -> str:
        if not s.terms:
            return "0"
        parts = []
        for k in sorted(s.terms, key=self.monomial_sort_key):
            c = s.terms[k]
            mono = self.format_monomial(k)
            if mono == "1":
                parts.append(_fmt_coeff(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{_fmt_coeff(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def format_monomial(self, key) -> str:
        names = self.variable_names
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, key) if e]
        return "*".join(factors) if factors else "1"

    variable_names: tuple[str, ...] = ()

    def describe(self) -> str:
        return f"{self.law} law on {self.rs.name} ({self.lattice} lattice)"


# -- additive law ---------------------------------------------------------------


def _primitive(vector: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in vector:
        g = math.gcd(g, int(x))
    return tuple(int(x) // g for x in vector)


def _divide_linear(terms: dict, form: Sequence, pivot: int) -> tuple[dict, dict]:
    """Divide a polynomial by a linear form by long division in the pivot variable.

    Returns ``(quotient, remainder)``; the remainder is free of the pivot.
    """
    a_k = Fraction(form[pivot])
    others = [(j, Fraction(a)) for j, a in enumerate(form) if a and j != pivot]
    rem = dict(terms)
    quo: dict = {}
    top = max((k[pivot] for k in rem), default=0)
    for d in range(top, 0, -1):
        level = [k for k in rem if k[pivot] == d]
        for key in level:
            c = rem.pop(key, 0)
            if not c:
                continue
            m = list(key)
            m[pivot] -= 1
            m = tuple(m)
            coef = c / a_k
            _add_into(quo, m, coef)
            for j, a_j in others:
                e2 = list(m)
                e2[j] += 1
                _add_into(rem, tuple(e2), -coef * a_j)
    return {k: _num(v) for k, v in quo.items()}, {k: _num(v) for k, v in rem.items()}


class AdditiveContext(FormalGroupContext):
    law = "additive"

    def __init__(self, rs: RootSystem, lattice: str = "weight"):
        super().__init__(rs, lattice)
        self.nvars = rs.ambient_dim
        self.variable_names = tuple(f"t{k + 1}" for k in range(self.nvars))
        self._forms = {}
        for rid in rs.positive_ids:
            form = _primitive(rs.roots[rid])
            scale = Fraction(rs.roots[rid][next(i for i, x in enumerate(form) if x)], next(x for x in form if x))
            support = [j for j, a in enumerate(form) if a]
            pivot = next((j for j in support if abs(form[j]) == 1), support[0])
            self._forms[rid] = (form, scale, pivot, support)
        self._actions = {}

    def chern_class(self, vector: Sequence) -> SElement:
        terms = {}
        for k, x in enumerate(vector):
            if x:
                key = tuple(int(j == k) for j in range(self.nvars))
                terms[key] = _num(Fraction(x))
        return SElement(self, terms)

    def formal_sum(self, x: SElement, y: SElement) -> SElement:
        return x + y

    def formal_neg(self, x: SElement) -> SElement:
        return -x

    def _action(self, w: int):
        act = self._actions.get(w)
        if act is None:
            act = (tuple(int(p) for p in self.group.amb_perm[w]), tuple(int(s) < 0 for s in self.group.amb_sign[w]))
            self._actions[w] = act
        return act

    def weyl_act(self, w, s: SElement) -> SElement:
        w = self._index(w)
        if w == 0:
            return s
        perm, neg = self._action(w)
        dim = self.nvars
        out = {}
        for key, c in s.terms.items():
            new = [0] * dim
            flip = False
            for k, e in enumerate(key):
                if e:
                    new[perm[k]] = e
                    if neg[k] and e & 1:
                        flip = not flip
            out[tuple(new)] = -c if flip else c
        return SElement(self, out)

    def divisible(self, s: SElement, rid: int) -> bool:
        if not s.terms:
            return True
        form, _, pivot, support = self._forms[self.rs.positive_part(rid)]
        if len(support) == 1:
            return all(k[pivot] > 0 for k in s.terms)
        if len(support) == 2 and all(abs(form[j]) == 1 for j in support):
            # restrict to the hyperplane: t_pivot = sigma * t_other
            other = support[0] if support[1] == pivot else support[1]
            sigma = -form[pivot] * form[other]
            acc: dict = {}
            for key, c in s.terms.items():
                e = key[pivot]
                new = list(key)
                new[other] += e
                new[pivot] = 0
                _add_into(acc, tuple(new), -c if (sigma < 0 and e & 1) else c)
            return not acc
        return self.divide_by_chern(s, rid) is not None

    def divide_by_chern(self, s: SElement, rid: int) -> SElement | None:
        positive = self.rs.positive_part(rid)
        form, scale, pivot, _ = self._forms[positive]
        quo, rem = _divide_linear(s.terms, form, pivot)
        if rem:
            return None
        # x_alpha = scale * form, and x_{-alpha} = -x_alpha.
        factor = Fraction(1) / scale
        if positive != rid:
            factor = -factor
        return SElement(self, {k: _num(v * factor) for k, v in quo.items()})

    def unit_inverse(self, u: SElement) -> SElement:
        if len(u.terms) != 1 or self._unit_key not in u.terms:
            raise ValueError("not a unit of the polynomial ring")
        return self.const(Fraction(1) / Fraction(u.terms[self._unit_key]))

    def negative_unit(self, rid: int) -> tuple[SElement, SElement]:
        return self.const(-1), self.const(-1)


# -- multiplicative law -----------------------------------------------------


class MultiplicativeContext(FormalGroupContext):
    """Laurent data: a monomial key is ``(beta exponent, lattice coordinates...)``."""

    law = "multiplicative"

    def __init__(self, rs: RootSystem, lattice: str = "weight"):
        super().__init__(rs, lattice)
        self.nvars = rs.rank + 1
        prefix = "w" if lattice == "weight" else "a"
        self.variable_names = ("beta",) + tuple(f"e{prefix}{k + 1}" for k in range(rs.rank))
        self._classes = {}

    @property
    def beta(self) -> SElement:
        return SElement(self, {(1,) + (0,) * self.rs.rank: 1})

    def exp_lattice(self, coords: Sequence[int]) -> SElement:
        """The group-ring element ``e^lambda`` for lattice coordinates ``lambda``."""
        return SElement(self, {(0,) + tuple(int(c) for c in coords): 1})

    def chern_class(self, vector: Sequence) -> SElement:
        return self.chern_class_coords(self.lattice_coords(vector))

    def chern_class_coords(self, coords: Sequence[int]) -> SElement:
        if not any(coords):
            return self.zero
        zero = (-1,) + (0,) * self.rs.rank
        return SElement(self, {zero: 1,(-1,) + tuple(-int(c) for c in coords): -1})

    def x_root(self, rid: int) -> SElement:
        x = self._root_cache.get(rid)
        if x is None:
            x = self.chern_class_coords(self.root_lattice_coords(rid))
            self._root_cache[rid] = x
        return x

    def formal_sum(self, x: SElement, y: SElement) -> SElement:
        return x + y - self.beta * x * y

    def formal_neg(self, x: SElement) -> SElement:
        u = self.beta * x - 1
        return x * self.unit_inverse(u)

    def unit_inverse(self, u: SElement) -> SElement:
        if len(u.terms) != 1:
            raise ValueError(f"{u} is not a unit of the Laurent ring")
        (key, c), = u.terms.items()
        return SElement(self, {tuple(-x for x in key): _num(Fraction(1) / Fraction(c))})

    def weyl_act(self, w, s: SElement) -> SElement:
        w = self._index(w)
        if w == 0:
            return s
        m = self.lattice_matrices[w]
        n = self.rs.rank
        out = {}
        for key, c in s.terms.items():
            lam = key[1:]
            new = tuple(sum(m[r][k] * lam[k] for k in range(n)) for r in range(n))
            out[(key[0],) + new] = c
        return SElement(self, out)

    def _split(self, rid: int):
        """Direction ``gamma = -alpha`` and a pivot coordinate where it is nonzero."""
        data = self._classes.get(rid)
        if data is None:
            gamma = tuple(-c for c in self.root_lattice_coords(rid))
            pivot = next(i for i, g in enumerate(gamma) if g)
            data = (gamma, pivot)
            self._classes[rid] = data
        return data

    def divide_by_chern(self, s: SElement, rid: int) -> SElement | None:
        positive = self.rs.positive_part(rid)
        if positive != rid:
            q = self.divide_by_chern(s, positive)
            if q is None:
                return None
            return q * self.negative_unit(positive)[1]
        gamma, pivot = self._split(rid)
        # beta*s = (1 - e^gamma) q, solved class by class along the gamma direction.
        classes: dict = {}
        for key, c in s.terms.items():
            lam = key[1:]
            k = lam[pivot] // gamma[pivot]
            base = (key[0] + 1,) + tuple(x - k * g for x, g in zip(lam, gamma))
            classes.setdefault(base, []).append((k, c))
        quo = {}
        for base, items in classes.items():
            items.sort()
            total = 0
            for idx, (k, c) in enumerate(items):
                total += c
                nxt = items[idx + 1][0] if idx + 1 < len(items) else None
                if nxt is None:
                    if total:
                        return None
                    break
                if total:
                    for j in range(k, nxt):
                        quo[(base[0],) + tuple(b + j * g for b, g in zip(base[1:], gamma))] = _num(total)
        return SElement(self, quo)

    def negative_unit(self, rid: int) -> tuple[SElement, SElement]:
        cached = self._unit_cache.get(rid)
        if cached is None:
            alpha = self.root_lattice_coords(rid)
            u = SElement(self, {(0,) + tuple(alpha): -1})
            cached = (u, self.unit_inverse(u))
            self._unit_cache[rid] = cached
        return cached

    def monomial_degree(self, key) -> int:
        return sum(abs(x) for x in key[1:])

    def monomial_sort_key(self, key):
        return (self.monomial_degree(key), key[1:], key[0])

    def format_monomial(self, key) -> str:
        factors = []
        if key[0]:
            factors.append("beta" if key[0] == 1 else f"beta^{key[0]}")
        if any(key[1:]):
            factors.append("e(" + ",".join(str(x) for x in key[1:]) + ")")
        return "*".join(factors) if factors else "1"


# -- truncated custom law -------------------------------------------------------


def _series_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * (n + 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                if y:
                    out[i + j] += x * y
    return out


def _bivariate_law(coeffs: dict, n: int) -> dict:
    law = {(1, 0): Fraction(1), (0, 1): Fraction(1)}
    for (i, j), c in coeffs.items():
        if c and i + j <= n:
            law[(i, j)] = law.get((i, j), 0) + Fraction(c)
    return law


@dataclass(frozen=True)
class CustomLaw:
    """Rational coefficients ``a_ij`` of ``F(x, y) = x + y + sum a_ij x^i y^j``."""

    coefficients: tuple[tuple[tuple[int, int], Fraction], ...]
    truncation: int = 8

    @classmethod
    def from_coefficients(cls, coeffs: dict, truncation: int = 8) -> "CustomLaw":
        items = []
        for (i, j), c in sorted(coeffs.items()):
            if i < 1 or j < 1:
                raise ValueError("a_ij needs i, j >= 1")
            if i + j > truncation:
                raise TruncationExceeded(f"a_{i}{j} has degree above the truncation {truncation}")
            if Fraction(coeffs.get((j, i), 0)) != Fraction(c):
                raise ValueError("a formal group law is symmetric: a_ij must equal a_ji")
            if c:
                items.append(((i, j), Fraction(c)))
        law = cls(tuple(items), truncation)
        law.check_associative()
        return law

    @classmethod
    def from_logarithm(cls, log_coeffs: Sequence, truncation: int = 8) -> "CustomLaw":
        """The law ``exp(log x + log y)`` for ``log t = t + l_2 t^2 + l_3 t^3 + ...``.

        >>> CustomLaw.from_logarithm(["-1/2"]).as_dict()[(1, 1)]
        Fraction(1, 1)
        """
        n = truncation
        log = [Fraction(0), Fraction(1)] + [Fraction(c) for c in log_coeffs[: max(0, n - 1)]]
        log += [Fraction(0)] * (n + 1 - len(log))
        # compositional inverse e(t) with log(e(t)) = t
        exp = [Fraction(0), Fraction(1)] + [Fraction(0)] * (n - 1)
        for d in range(2, n + 1):
            comp = [Fraction(0)] * (n + 1)
            power = [Fraction(1)] + [Fraction(0)] * n
            for k in range(1, n + 1):
                power = _series_mul(power, exp, n)
                if log[k]:
                    comp = [x + log[k] * y for x, y in zip(comp, power)]
            exp[d] -= comp[d]
        # F(x, y) = e(log x + log y) as a bivariate series
        inner = {}
        for k in range(1, n + 1):
            if log[k]:
                inner[(k, 0)] = inner.get((k, 0), 0) + log[k]
                inner[(0, k)] = inner.get((0, k), 0) + log[k]
        total: dict = {}
        power = {(0, 0): Fraction(1)}
        for k in range(1, n + 1):
            power = _bimul(power, inner, n)
            if exp[k]:
                for key, v in power.items():
                    _add_into(total, key, exp[k] * v)
        coeffs = {k: v for k, v in total.items() if k[0] >= 1 and k[1] >= 1}
        return cls.from_coefficients(coeffs, truncation)

    def as_dict(self) -> dict:
        return dict(self.coefficients)

    def law_series(self) -> dict:
        return _bivariate_law(self.as_dict(), self.truncation)

    def check_associative(self) -> None:
        n = self.truncation
        law = self.law_series()
        x, y, z = {(1, 0, 0): Fraction(1)}, {(0, 1, 0): Fraction(1)}, {(0, 0, 1): Fraction(1)}

        def apply(a, b):
            out: dict = {}
            pa = [{(0, 0, 0): Fraction(1)}]
            pb = [{(0, 0, 0): Fraction(1)}]
            for _ in range(n):
                pa.append(_trimul(pa[-1], a, n))
                pb.append(_trimul(pb[-1], b, n))
            for (i, j), c in law.items():
                for key, v in _trimul(pa[i], pb[j], n).items():
                    _add_into(out, key, c * v)
            return out

        if apply(apply(x, y), z) != apply(x, apply(y, z)):
            raise ValueError("the coefficients a_ij do not define an associative law")

    def inverse_series(self) -> list:
        """Coefficients of ``-_F t`` up to the truncation degree."""
        n = self.truncation
        law = self.law_series()
        inv = [Fraction(0), Fraction(-1)] + [Fraction(0)] * (n - 1)
        for _ in range(n):
            powers_t = {i: [Fraction(int(k == i)) for k in range(n + 1)] for i in range(n + 1)}
            powers_inv = [[Fraction(1)] + [Fraction(0)] * n]
            for _ in range(n):
                powers_inv.append(_series_mul(powers_inv[-1], inv, n))
            value = [Fraction(0)] * (n + 1)
            for (i, j), c in law.items():
                term = _series_mul(powers_t[i], powers_inv[j], n)
                value = [v + c * t for v, t in zip(value, term)]
            # F(t, inv) should vanish; correct inv by the linear term of F in y.
            inv = [a - b for a, b in zip(inv, value)]
        return inv


def _bimul(a: dict, b: dict, n: int) -> dict:
    out: dict = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            if i + j + k + l <= n:
                _add_into(out, (i + k, j + l), x * y)
    return out


def _trimul(a: dict, b: dict, n: int) -> dict:
    out: dict = {}
    for ka, x in a.items():
        for kb, y in b.items():
            key = tuple(p + q for p, q in zip(ka, kb))
            if sum(key) <= n:
                _add_into(out, key, x * y)
    return out


class TruncatedContext(FormalGroupContext):
    """Power series in the classes of a lattice basis, modulo degree above ``N``."""

    law = "truncated"

    def __init__(self, rs: RootSystem, law: CustomLaw, lattice: str = "weight"):
        super().__init__(rs, lattice)
        self.custom = law
        self.truncation = law.truncation
        self.nvars = rs.rank
        prefix = "xw" if lattice == "weight" else "xa"
        self.variable_names = tuple(f"{prefix}{k + 1}" for k in range(rs.rank))
        self._law = law.law_series()
        self._inverse = law.inverse_series()
        self._images: dict[int, list[SElement]] = {}

    def _mul(self, a: SElement, b: SElement) -> SElement:
        n = self.truncation
        out: dict = {}
        for ka, va in a.terms.items():
            da = sum(ka)
            for kb, vb in b.terms.items():
                if da + sum(kb) <= n:
                    _add_into(out, tuple(x + y for x, y in zip(ka, kb)), va * vb)
        return SElement(self, {k: _num(v) for k, v in out.items()})

    def element(self, terms: dict) -> SElement:
        s = super().element(terms)
        return SElement(self, {k: v for k, v in s.terms.items() if sum(k) <= self.truncation})

    def _check_augmented(self, *xs: SElement) -> None:
        for x in xs:
            if self._unit_key in x.terms:
                raise TruncationExceeded("formal group law applied to an element with a constant term")

    def formal_sum(self, x: SElement, y: SElement) -> SElement:
        self._check_augmented(x, y)
        n = self.truncation
        px, py = [self.one], [self.one]
        for _ in range(n):
            px.append(px[-1] * x)
            py.append(py[-1] * y)
        total = self.zero
        for (i, j), c in self._law.items():
            total = total + px[i] * py[j] * c
        return total

    def formal_neg(self, x: SElement) -> SElement:
        self._check_augmented(x)
        total, power = self.zero, self.one
        for k in range(1, self.truncation + 1):
            power = power * x
            if self._inverse[k]:
                total = total + power * self._inverse[k]
        return total

    def formal_multiple(self, x: SElement, k: int) -> SElement:
        if k < 0:
            return self.formal_neg(self.formal_multiple(x, -k))
        total = self.zero
        for _ in range(k):
            total = self.formal_sum(total, x)
        return total

    def chern_class(self, vector: Sequence) -> SElement:
        return self.chern_class_coords(self.lattice_coords(vector))

    def chern_class_coords(self, coords: Sequence[int]) -> SElement:
        total = self.zero
        for j, c in enumerate(coords):
            if c:
                var = SElement(self, {tuple(int(k == j) for k in range(self.nvars)): 1})
                total = self.formal_sum(total, self.formal_multiple(var, int(c)))
        return total

    def x_root(self, rid: int) -> SElement:
        x = self._root_cache.get(rid)
        if x is None:
            x = self.chern_class_coords(self.root_lattice_coords(rid))
            self._root_cache[rid] = x
        return x

    def weyl_act(self, w, s: SElement) -> SElement:
        w = self._index(w)
        if w == 0:
            return s
        images = self._images.get(w)
        if images is None:
            m = self.lattice_matrices[w]
            images = [self.chern_class_coords([m[r][j] for r in range(self.nvars)]) for j in range(self.nvars)]
            self._images[w] = images
        total = self.zero
        for key, c in s.terms.items():
            term = self.const(c)
            for j, e in enumerate(key):
                if e:
                    term = term * images[j] ** e
            total = total + term
        return total

    def linear_part(self, s: SElement) -> list[Fraction]:
        return [Fraction(s.terms.get(tuple(int(k == j) for k in range(self.nvars)), 0)) for j in range(self.nvars)]

    def divide_by_chern(self, s: SElement, rid: int) -> SElement | None:
        """Quotient modulo degree ``N - 1`` (the top degree of ``s`` only constrains divisibility)."""
        x = self.x_root(rid)
        form = self.linear_part(x)
        pivot = next(j for j, a in enumerate(form) if a)
        rem = s
        quo = self.zero
        for d in range(0, self.truncation + 1):
            part = rem.homogeneous_part(d)
            if part.is_zero:
                continue
            if d == 0:
                return None
            q, r = _divide_linear(part.terms, form, pivot)
            if r:
                return None
            q = SElement(self, q)
            quo = quo + q
            rem = rem - q * x
        return SElement(self, {k: v for k, v in quo.terms.items() if sum(k) <= self.truncation - 1})

    def unit_inverse(self, u: SElement) -> SElement:
        c0 = Fraction(u.terms.get(self._unit_key, 0))
        if not c0:
            raise ValueError("series without constant term is not invertible")
        h = self.const(1) - u * (1 / c0)
        total, power = self.one, self.one
        for _ in range(self.truncation):
            power = power * h
            total = total + power
        return total * (1 / c0)


def additive_context(rs: RootSystem, lattice: str = "weight") -> AdditiveContext:
    return _cached(AdditiveContext, rs, lattice)


def multiplicative_context(rs: RootSystem, lattice: str = "weight") -> MultiplicativeContext:
    return _cached(MultiplicativeContext, rs, lattice)


def truncated_context(rs: RootSystem, law: CustomLaw, lattice: str = "weight") -> TruncatedContext:
    key = ("truncated", rs.kind, rs.rank, lattice, law)
    ctx = _CONTEXTS.get(key)
    if ctx is None:
        ctx = TruncatedContext(rs, law, lattice)
        _CONTEXTS[key] = ctx
    return ctx


_CONTEXTS: dict = {}


def _cached(cls, rs, lattice):
    key = (cls.law, rs.kind, rs.rank, lattice)
    ctx = _CONTEXTS.get(key)
    if ctx is None:
        ctx = cls(rs, lattice)
        _CONTEXTS[key] = ctx
    return ctx


def make_context(rs: RootSystem, law: str = "additive", lattice: str = "weight", custom: CustomLaw | None = None):
    if law == "additive":
        return additive_context(rs, lattice)
    if law == "multiplicative":
        return multiplicative_context(rs, lattice)
    if law in ("truncated", "custom"):
        if custom is None:
            raise UnsupportedLaw("a truncated law needs its coefficients")
        return truncated_context(rs, custom, lattice)
    raise UnsupportedLaw(f"unknown formal group law {law!r}")


# -- module-level operations ------------------------------------------------------


def chern_class(ctx: FormalGroupContext, vector: Sequence) -> SElement:
    return ctx.chern_class(vector)


def formal_sum(ctx: FormalGroupContext, x: SElement, y: SElement) -> SElement:
    return ctx.formal_sum(x, y)


def formal_neg(ctx: FormalGroupContext, x: SElement) -> SElement:
    return ctx.formal_neg(x)


def weyl_act(ctx: FormalGroupContext, w, s: SElement) -> SElement:
    return ctx.weyl_act(w, s)


def divide_by_chern(ctx: FormalGroupContext, s: SElement, rid: int) -> SElement | None:
    return ctx.divide_by_chern(s, rid)


def is_invariant(ctx: FormalGroupContext, s: SElement, theta) -> bool:
    return ctx.is_invariant(s, theta)


def parse_selement(ctx: FormalGroupContext, text: str) -> SElement:
    """Parse a polynomial expression in ``a1..an`` (simple root classes),
    ``w1..wn`` (fundamental weight classes) and, for the additive law,
    the coordinate forms ``t1..tm``.

    >>> ctx = additive_context(build_root_system("A", 2))
    >>> parse_selement(ctx, "a2*(a1+a2)") == ctx.x_simple(2) * (ctx.x_simple(1) + ctx.x_simple(2))
    True
    """
    rs = ctx.rs
    symbols = {f"a{i}": ctx.x_simple(i) for i in range(1, rs.rank + 1)}
    symbols.update({f"w{i}": ctx.x_weight(i) for i in range(1, rs.rank + 1)})
    if ctx.law == "additive":
        for k in range(ctx.nvars):
            symbols[f"t{k + 1}"] = SElement(ctx, {tuple(int(j == k) for j in range(ctx.nvars)): 1})
    names = sorted(symbols)
    gens = sympy.symbols(names)
    expr = sympy.sympify(text, locals=dict(zip(names, gens)))
    poly = sympy.Poly(sympy.expand(expr), *gens, domain="QQ")
    total = ctx.zero
    for monom, coeff in poly.terms():
        term = ctx.const(Fraction(int(coeff.p), int(coeff.q)))
        for name, e in zip(names, monom):
            if e:
                term = term * symbols[name] ** e
        total = total + term
    return total


# -- localization ------------------------------------------------------------


class QElement:
    """A fraction ``numerator / prod x_alpha`` over positive roots ``alpha``.

    The denominator is a sorted tuple of positive root ids (a multiset).
    Construction cancels every ``x_alpha`` that divides the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: SElement, den: Sequence[int] = (), reduce: bool = True):
        self.num = num
        self.den = tuple(sorted(den))
        if reduce and self.den:
            self._reduce()

    @property
    def ctx(self) -> FormalGroupContext:
        return self.num.ctx

    def _reduce(self) -> None:
        if self.num.is_zero:
            self.den = ()
            return
        ctx = self.ctx
        keep = []
        num = self.num
        for rid in self.den:
            q = ctx.divide_by_chern(num, rid)
            if q is None:
                keep.append(rid)
            else:
                num = q
        self.num = num
        self.den = tuple(keep)

    @classmethod
    def from_s(cls, s: SElement) -> "QElement":
        return cls(s, (), reduce=False)

    @classmethod
    def inverse_chern(cls, ctx: FormalGroupContext, rid: int) -> "QElement":
        """``1 / x_root`` for any root (negative roots absorb a unit)."""
        rs = ctx.rs
        if rs.is_positive(rid):
            return cls(ctx.one, (rid,), reduce=False)
        positive = rs.negate(rid)
        return cls(ctx.negative_unit(positive)[1], (positive,), reduce=False)

    def _coerce(self, other) -> "QElement":
        if isinstance(other, QElement):
            return other
        if isinstance(other, SElement):
            return QElement.from_s(other)
        if isinstance(other, (int, Fraction)):
            return QElement.from_s(self.ctx.const(other))
        return NotImplemented

    def _common(self, other: "QElement"):
        from collections import Counter

        a, b = Counter(self.den), Counter(other.den)
        union = a | b
        extra_a = list((union - a).elements())
        extra_b = list((union - b).elements())
        ctx = self.ctx
        return (
            self.num * ctx.x_product(extra_a) if extra_a else self.num,
            other.num * ctx.x_product(extra_b) if extra_b else other.num,
            tuple(union.elements()),
        )

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.den and not self.den:
            return QElement(self.num + other.num, (), reduce=False)
        if other.num.is_zero:
            return self
        if self.num.is_zero:
            return other
        a, b, den = self._common(other)
        return QElement(a + b, den)

    __radd__ = __add__

    def __neg__(self):
        return QElement(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero or other.num.is_zero:
            return QElement(self.ctx.zero, (), reduce=False)
        return QElement(self.num * other.num, self.den + other.den)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        a, b, _ = self._common(other)
        return a == b

    def __hash__(self):
        raise TypeError("QElement is not hashable")

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return not self.den

    def to_s(self) -> SElement:
        if self.den:
            raise ValueError(f"{self} does not lie in S")
        return self.num

    def act(self, w) -> "QElement":
        ctx = self.ctx
        rs = ctx.rs
        w = ctx._index(w)
        if w == 0:
            return self
        num = ctx.weyl_act(w, self.num)
        den = []
        for rid in self.den:
            image = int(ctx.group.perm[w, rid])
            if rs.is_positive(image):
                den.append(image)
            else:
                positive = rs.negate(image)
                num = num * ctx.negative_unit(positive)[1]
                den.append(positive)
        return QElement(num, den, reduce=False)

    def __repr__(self) -> str:
        if not self.den:
            return repr(self.num)
        rs = self.ctx.rs
        den = "*".join(f"x{list(rs.roots[r])}" for r in self.den)
        return f"({self.num})/({den})"
