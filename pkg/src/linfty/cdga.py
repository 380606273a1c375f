"""Free graded-commutative algebras over polynomial chart rings.

An :class:`Algebra` is generated by named variables with integer degrees.
Degree-0 variables are chart coordinates; odd variables square to zero.
Elements are sparse maps from exponent tuples (in variable order) to
rationals, so graded commutativity holds by construction of the canonical
monomial order.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .graded import InputError, StructureError, as_rational

Mono = Tuple[int, ...]


class Algebra:
    """k[x_1..x_m] tensor Sym(generators), generators carrying degrees."""

    def __init__(self, chart: Sequence[str] = (), generators: Sequence[Tuple[str, int]] = ()):
        names = list(chart) + [g for g, _ in generators]
        degrees = [0] * len(chart) + [int(d) for _, d in generators]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names: {names}")
        self.chart = tuple(chart)
        self.generators = tuple((g, int(d)) for g, d in generators)
        self.names = tuple(names)
        self.degrees = tuple(degrees)
        self.index = {n: i for i, n in enumerate(names)}
        self.odd = tuple(i for i, d in enumerate(degrees) if d % 2)
        self._oddset = frozenset(self.odd)
        self.nvars = len(names)
        self.unit_mono: Mono = (0,) * self.nvars

    def __repr__(self):
        gens = ", ".join(f"{g}:{d}" for g, d in self.generators)
        return f"Algebra(chart={list(self.chart)}, gens=[{gens}])"

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.names == other.names and self.degrees == other.degrees

    def __hash__(self):
        return hash((self.names, self.degrees))

    # constructors
    def zero(self) -> "Elem":
        return Elem(self, {})

    def const(self, c) -> "Elem":
        return Elem(self, {self.unit_mono: as_rational(c)})

    def one(self) -> "Elem":
        return self.const(1)

    def var(self, name: str) -> "Elem":
        if name not in self.index:
            raise InputError(f"unknown variable {name!r}")
        mono = [0] * self.nvars
        mono[self.index[name]] = 1
        return Elem(self, {tuple(mono): Fraction(1)})

    def vars(self, *names):
        return [self.var(n) for n in names]

    def monomial(self, exps: Mapping[str, int], coeff=1) -> "Elem":
        mono = [0] * self.nvars
        for n, e in exps.items():
            mono[self.index[n]] = int(e)
        return Elem(self, {tuple(mono): as_rational(coeff)})

    def mono_degree(self, mono: Mono) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees) if e)

    def mono_mul(self, a: Mono, b: Mono) -> Tuple[int, Optional[Mono]]:
        """Sign and product monomial of a*b (None when an odd square occurs)."""
        sign = 1
        odd = self.odd
        if odd:
            count = 0
            seen_after = 0
            # number of pairs (i in a, j in b) with i > j, both odd
            for i in reversed(odd):
                if b[i]:
                    if a[i]:
                        return 0, None
                    count += seen_after
                if a[i]:
                    seen_after += 1
            # seen_after counted a-odd indices strictly greater than current b index
            if count % 2:
                sign = -1
        return sign, tuple(x + y for x, y in zip(a, b))

    def sub(self, keep: Sequence[str]) -> "Algebra":
        """Subalgebra generated by the named variables (same order)."""
        keep_set = set(keep)
        chart = [n for n in self.chart if n in keep_set]
        gens = [(g, d) for g, d in self.generators if g in keep_set]
        return Algebra(chart, gens)

    def extend(self, chart: Sequence[str] = (), generators: Sequence[Tuple[str, int]] = ()) -> "Algebra":
        return Algebra(list(self.chart) + list(chart), list(self.generators) + list(generators))


class Elem:
    """Element of an :class:`Algebra`; immutable by convention."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms: Mapping[Mono, object]):
        self.alg = alg
        self.terms = {m: c for m, c in terms.items() if c}

    # arithmetic
    def _coerce(self, other) -> "Elem":
        if isinstance(other, Elem):
            if other.alg is not self.alg and other.alg != self.alg:
                raise InputError(f"elements of different algebras: {self.alg} vs {other.alg}")
            return other
        return self.alg.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Elem(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return Elem(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Elem):
            s = as_rational(other)
            return Elem(self.alg, {m: c * s for m, c in self.terms.items()})
        other = self._coerce(other)
        alg = self.alg
        out: Dict[Mono, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                s, m = alg.mono_mul(ma, mb)
                if m is None:
                    continue
                out[m] = out.get(m, 0) + s * ca * cb
        return Elem(alg, out)

    def __rmul__(self, other):
        s = as_rational(other)
        return Elem(self.alg, {m: c * s for m, c in self.terms.items()})

    def __truediv__(self, other):
        return self * (1 / as_rational(other))

    def __pow__(self, n: int):
        out = self.alg.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Elem):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return self.terms == self.alg.const(other).terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return format_elem(self)

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set:
        return {self.alg.mono_degree(m) for m in self.terms}

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise InputError(f"inhomogeneous element {self}")
        return degs.pop() if degs else 0

    def homogeneous(self, deg: int) -> "Elem":
        return Elem(self.alg, {m: c for m, c in self.terms.items() if self.alg.mono_degree(m) == deg})

    def constant_term(self) -> Fraction:
        return self.terms.get(self.alg.unit_mono, Fraction(0))

    def coefficient(self, mono: Mono) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def weight(self, names: Iterable[str]) -> "Dict[int, Elem]":
        """Split by total exponent in the named variables (e.g. arity)."""
        idx = [self.alg.index[n] for n in names]
        parts: Dict[int, Dict[Mono, Fraction]] = {}
        for m, c in self.terms.items():
            w = sum(m[i] for i in idx)
            parts.setdefault(w, {})[m] = c
        return {w: Elem(self.alg, t) for w, t in parts.items()}

    def weight_part(self, names: Iterable[str], w: int) -> "Elem":
        idx = [self.alg.index[n] for n in names]
        return Elem(self.alg, {m: c for m, c in self.terms.items() if sum(m[i] for i in idx) == w})

    def set_zero(self, names: Iterable[str]) -> "Elem":
        idx = [self.alg.index[n] for n in names]
        return Elem(self.alg, {m: c for m, c in self.terms.items() if not any(m[i] for i in idx)})

    def to(self, target: Algebra) -> "Elem":
        """Re-express in ``target`` matching variables by name."""
        if target == self.alg:
            return Elem(target, self.terms)
        pos = []
        for i, n in enumerate(self.alg.names):
            pos.append(target.index.get(n))
        out = {}
        for m, c in self.terms.items():
            new = [0] * target.nvars
            for i, e in enumerate(m):
                if e:
                    j = pos[i]
                    if j is None:
                        raise InputError(f"variable {self.alg.names[i]!r} missing from target algebra")
                    new[j] = e
            out[tuple(new)] = c
        # names may reorder odd variables: rebuild through multiplication for signs
        if _order_preserving(self.alg, target):
            return Elem(target, out)
        res = target.zero()
        for m, c in self.terms.items():
            term = target.const(c)
            for i, e in enumerate(m):
                for _ in range(e):
                    term = term * target.var(self.alg.names[i])
            res = res + term
        return res

    def substitute(self, target: Algebra, images: Mapping[str, "Elem"]) -> "Elem":
        """Algebra morphism sending each variable to an element of ``target``.

        Variables without an image map to the same-named variable of target.
        """
        cache: Dict[Tuple[int, int], Elem] = {}

        def power(i, e):
            key = (i, e)
            if key not in cache:
                name = self.alg.names[i]
                base = images[name] if name in images else target.var(name)
                if isinstance(base, Elem):
                    base = base if base.alg == target else base.to(target)
                else:
                    base = target.const(base)
                cache[key] = base ** e
            return cache[key]

        res: Dict[Mono, Fraction] = {}
        out = target.zero()
        for m, c in self.terms.items():
            term = target.const(c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
                    if not term.terms:
                        break
            out = out + term
        return out

    def evaluate(self, point: Mapping[str, object]) -> "Elem":
        """Substitute rational values for (even) variables."""
        keep = [n for n in self.alg.names if n not in point]
        target = self.alg.sub(keep)
        idx = {self.alg.index[n]: as_rational(v) for n, v in point.items()}
        out: Dict[Mono, Fraction] = {}
        for m, c in self.terms.items():
            val = c
            for i, v in idx.items():
                if m[i]:
                    if self.alg.degrees[i] % 2:
                        raise InputError("cannot evaluate an odd variable at a number")
                    val *= v ** m[i]
            if not val:
                continue
            new = tuple(e for i, e in enumerate(m) if i not in idx)
            out[new] = out.get(new, 0) + val
        return Elem(target, out)

    def diff(self, name: str) -> "Elem":
        """Left partial derivative in the named variable."""
        return partial(self.alg, name).apply(self)


def _order_preserving(src: Algebra, tgt: Algebra) -> bool:
    last = -1
    for i in src.odd:
        j = tgt.index.get(src.names[i])
        if j is None:
            return True
        if j < last:
            return False
        last = j
    return True


def format_elem(x: Elem) -> str:
    if not x.terms:
        return "0"
    parts = []
    for m in sorted(x.terms, key=lambda m: (x.alg.mono_degree(m), m)):
        c = x.terms[m]
        factors = []
        for i, e in enumerate(m):
            if e == 1:
                factors.append(x.alg.names[i])
            elif e > 1:
                factors.append(f"{x.alg.names[i]}^{e}")
        mono = "*".join(factors)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# derivations


class Derivation:
    """Graded derivation determined by its values on every variable.

    D(ab) = D(a) b + (-1)^{|D||a|} a D(b).
    """

    def __init__(self, alg: Algebra, degree: int, values: Mapping[str, object]):
        self.alg = alg
        self.degree = int(degree)
        vals = {}
        for name, v in values.items():
            if name not in alg.index:
                raise InputError(f"unknown variable {name!r}")
            v = v if isinstance(v, Elem) else alg.const(v)
            if v.alg != alg:
                v = v.to(alg)
            for m in v.terms:
                if alg.mono_degree(m) != alg.degrees[alg.index[name]] + self.degree:
                    raise InputError(f"D({name}) has wrong degree for a degree-{self.degree} derivation")
            if v:
                vals[alg.index[name]] = v
        self.values = vals

    def value(self, name: str) -> Elem:
        return self.values.get(self.alg.index[name], self.alg.zero())

    def apply(self, a: Elem) -> Elem:
        if a.alg != self.alg:
            raise InputError("element does not belong to the derivation's algebra")
        alg = self.alg
        out: Dict[Mono, Fraction] = {}
        k_odd = self.degree % 2
        for mono, c in a.terms.items():
            prefix_deg = 0
            for i, e in enumerate(mono):
                if not e:
                    continue
                dv = self.values.get(i)
                if dv is not None:
                    pre = tuple(mono[j] if j < i else 0 for j in range(alg.nvars))
                    post = tuple(mono[j] if j > i else (e - 1 if j == i else 0) for j in range(alg.nvars))
                    sign = -1 if (k_odd and prefix_deg % 2) else 1
                    coef = c * sign * e
                    for mv, cv in dv.terms.items():
                        s1, m1 = alg.mono_mul(pre, mv)
                        if m1 is None:
                            continue
                        s2, m2 = alg.mono_mul(m1, post)
                        if m2 is None:
                            continue
                        out[m2] = out.get(m2, 0) + s1 * s2 * coef * cv
                prefix_deg += e * alg.degrees[i]
        return Elem(alg, out)

    __call__ = apply

    def __add__(self, other: "Derivation") -> "Derivation":
        self._check(other)
        if other.degree != self.degree:
            raise InputError("cannot add derivations of different degrees")
        vals = {n: self.value(n) + other.value(n) for n in self.alg.names}
        return Derivation(self.alg, self.degree, vals)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s) -> "Derivation":
        return Derivation(self.alg, self.degree, {n: self.value(n) * s for n in self.alg.names})

    def left_multiply(self, f: Elem) -> "Derivation":
        """(f D)(a) = f * D(a)."""
        deg = self.degree + f.degree()
        return Derivation(self.alg, deg, {n: f * self.value(n) for n in self.alg.names})

    def _check(self, other):
        if other.alg != self.alg:
            raise InputError("derivations on different algebras")

    def __eq__(self, other):
        return (isinstance(other, Derivation) and other.alg == self.alg
                and all(self.value(n) == other.value(n) for n in self.alg.names))

    def is_zero(self) -> bool:
        return not self.values

    def __repr__(self):
        vals = ", ".join(f"{self.alg.names[i]} -> {v}" for i, v in sorted(self.values.items()))
        return f"Derivation(deg={self.degree}; {vals})"


def compose_bracket(d1: Derivation, d2: Derivation) -> Derivation:
    """Graded commutator [D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1."""
    d1._check(d2)
    sign = -1 if (d1.degree * d2.degree) % 2 else 1
    vals = {}
    for n in d1.alg.names:
        v = d1.apply(d2.value(n)) - d2.apply(d1.value(n)) * sign
        vals[n] = v
    return Derivation(d1.alg, d1.degree + d2.degree, vals)


def apply_derivation(D: Derivation, a: Elem) -> Elem:
    return D.apply(a)


@lru_cache(maxsize=None)
def partial(alg: Algebra, name: str) -> Derivation:
    """Left partial derivative d/d(name), a derivation of degree -|name|."""
    return Derivation(alg, -alg.degrees[alg.index[name]], {name: alg.one()})


def is_homological(Q: Derivation):
    """(True, None) if Q o Q vanishes on every variable, else (False, name)."""
    if Q.degree != 1:
        raise InputError("a homological vector field has degree 1")
    for n in Q.alg.names:
        if Q.apply(Q.value(n)):
            return False, n
    return True, None


def de_rham(chart: Sequence[str], prefix: str = "d") -> Tuple[Algebra, Derivation]:
    """Polynomial de Rham algebra on a chart with its exterior derivative."""
    alg = Algebra(chart, [(prefix + x, 1) for x in chart])
    Q = Derivation(alg, 1, {x: alg.var(prefix + x) for x in chart})
    return alg, Q
