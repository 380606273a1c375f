"""L-infinity[1] algebroid structures on a polynomial chart.

The carrier is stored already shifted: a basis generator of shifted degree
-1 is an element of the unshifted degree-0 part E_0 and may carry an anchor.
All brackets are graded symmetric of degree +1.  Values are kept only on
sorted tuples of basis generators; everything else is derived through
Koszul signs, multilinearity over the chart ring and the anchor Leibniz rule

    {f x, g y} = f g {x, y} + f rho(x)[g] y + (-1)^{|x||y|} g rho(y)[f] x.

Vectors (elements of E over the chart ring) are plain dicts label -> Elem.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .cdga import Algebra, Elem
from .graded import (GradedModule, InputError, Permutation, StructureError, as_rational,
                     koszul_sign, unshuffles)

Vec = Dict[str, Elem]
VectorField = Dict[str, Elem]


# ---------------------------------------------------------------------------
# vector helpers


def vec_add(a: Vec, b: Vec, scale=1) -> Vec:
    out = dict(a)
    for k, v in b.items():
        s = out[k] + v * scale if k in out else v * scale
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def vec_scale(a: Vec, f) -> Vec:
    out = {}
    for k, v in a.items():
        w = v * f
        if w:
            out[k] = w
    return out


def vec_clean(a: Mapping[str, Elem]) -> Vec:
    return {k: v for k, v in a.items() if v}


def vf_apply(X: VectorField, f: Elem) -> Elem:
    """Apply a polynomial vector field sum_i X^i d/dx_i to f."""
    out = f.alg.zero()
    for var, coeff in X.items():
        if coeff:
            out = out + coeff * f.diff(var)
    return out


def vf_bracket(X: VectorField, Y: VectorField, ring: Algebra) -> VectorField:
    out = {}
    for var in ring.names:
        v = vf_apply(X, Y.get(var, ring.zero())) - vf_apply(Y, X.get(var, ring.zero()))
        if v:
            out[var] = v
    return out


# ---------------------------------------------------------------------------


class LInftyStructure:
    """Symmetric degree-1 brackets on a shifted graded carrier over a chart.

    Parameters
    ----------
    chart:
        names of the (even, degree 0) chart coordinates.
    module:
        the shifted carrier; anchored generators live in degree -1.
    brackets:
        ``{n: {tuple_of_labels: {label: coefficient}}}``.  Tuples may be given
        in any order; they are normalized with the Koszul sign.
    anchor:
        ``{label: {chart_var: coefficient}}`` for degree -1 labels.
    """

    def __init__(self, chart: Sequence[str], module: GradedModule,
                 brackets: Mapping[int, Mapping[Tuple[str, ...], Mapping[str, object]]] = None,
                 anchor: Mapping[str, Mapping[str, object]] = None):
        self.chart = tuple(chart)
        self.ring = Algebra(self.chart)
        self.module = module
        self.labels = tuple(module.labels())
        self.order = {lab: i for i, lab in enumerate(self.labels)}
        self.deg = {lab: module.degree(lab) for lab in self.labels}
        self.brackets: Dict[int, Dict[Tuple[str, ...], Vec]] = {}
        for n, table in (brackets or {}).items():
            n = int(n)
            if n < 1:
                raise InputError("bracket arity must be at least 1")
            store = self.brackets.setdefault(n, {})
            for tup, value in table.items():
                tup = tuple(tup)
                if len(tup) != n:
                    raise InputError(f"tuple {tup} listed under arity {n}")
                for lab in tup:
                    if lab not in self.order:
                        raise InputError(f"unknown generator {lab!r}")
                sign, key = self.normalize(tup)
                val = {}
                for lab, c in value.items():
                    if lab not in self.order:
                        raise InputError(f"unknown generator {lab!r}")
                    e = self._coeff(c)
                    if e:
                        if self.deg[lab] != sum(self.deg[t] for t in tup) + 1:
                            raise InputError(f"bracket {tup} -> {lab} violates the degree rule")
                        val[lab] = e
                if not val:
                    continue
                if sign == 0:
                    raise InputError(f"repeated odd generator in {tup}: value must be 0")
                val = vec_scale(val, sign)
                if key in store:
                    raise InputError(f"bracket on {key} given twice")
                store[key] = val
            if not store:
                del self.brackets[n]
        self.anchor: Dict[str, VectorField] = {}
        for lab, field_ in (anchor or {}).items():
            if lab not in self.order:
                raise InputError(f"unknown generator {lab!r}")
            vf = {}
            for var, c in field_.items():
                if var not in self.ring.index:
                    raise InputError(f"unknown chart variable {var!r}")
                e = self._coeff(c)
                if e:
                    vf[var] = e
            if vf:
                if self.deg[lab] != -1:
                    raise InputError(f"anchor on {lab!r} of degree {self.deg[lab]}; only degree -1 is anchored")
                self.anchor[lab] = vf

    # -- construction helpers
    def _coeff(self, c) -> Elem:
        if isinstance(c, Elem):
            return c if c.alg == self.ring else c.to(self.ring)
        return self.ring.const(c)

    @property
    def max_arity(self) -> int:
        return max(self.brackets, default=0)

    def normalize(self, tup: Sequence[str]) -> Tuple[int, Tuple[str, ...]]:
        """(sign, sorted) with {tup} = sign * {sorted}; sign 0 for a repeated odd entry."""
        order = sorted(range(len(tup)), key=lambda i: self.order[tup[i]])
        key = tuple(tup[i] for i in order)
        for a, b in zip(key, key[1:]):
            if a == b and self.deg[a] % 2:
                return 0, key
        perm = Permutation(tuple(i + 1 for i in order))
        return koszul_sign(perm, [self.deg[t] for t in tup]), key

    def basis_vec(self, label: str) -> Vec:
        return {label: self.ring.one()}

    def vec_degree(self, v: Vec) -> Optional[int]:
        degs = {self.deg[k] for k in v}
        if len(degs) > 1:
            raise InputError("inhomogeneous vector")
        return degs.pop() if degs else None

    # -- brackets
    def gen_bracket(self, tup: Sequence[str]) -> Vec:
        sign, key = self.normalize(tup)
        if sign == 0:
            return {}
        val = self.brackets.get(len(tup), {}).get(key)
        if not val:
            return {}
        return vec_scale(val, sign) if sign == -1 else dict(val)

    def anchor_of(self, v: Vec) -> VectorField:
        out: VectorField = {}
        for lab, f in v.items():
            for var, c in self.anchor.get(lab, {}).items():
                w = out[var] + f * c if var in out else f * c
                if w:
                    out[var] = w
                else:
                    out.pop(var)
        return out

    def bracket(self, args: Sequence[Vec]) -> Vec:
        """Graded symmetric n-bracket of homogeneous vectors (n = len(args))."""
        n = len(args)
        for a in args:
            for lab in a:
                if lab not in self.order:
                    raise InputError(f"unknown generator {lab!r}")
        if n == 2:
            return self._bracket2(args[0], args[1])
        out: Vec = {}

        def rec(i, labels, coeff):
            nonlocal out
            if i == n:
                val = self.gen_bracket(labels)
                if val:
                    out = vec_add(out, val, coeff)
                return
            for lab, f in args[i].items():
                rec(i + 1, labels + [lab], coeff * f)

        rec(0, [], self.ring.one())
        return out

    def _bracket2(self, a: Vec, b: Vec) -> Vec:
        out: Vec = {}
        for x, f in a.items():
            for y, g in b.items():
                val = self.gen_bracket((x, y))
                if val:
                    out = vec_add(out, val, f * g)
                rx = self.anchor.get(x)
                if rx:
                    dg = vf_apply(rx, g)
                    if dg:
                        out = vec_add(out, {y: f * dg})
                ry = self.anchor.get(y)
                if ry:
                    df = vf_apply(ry, f)
                    if df:
                        s = -1 if (self.deg[x] * self.deg[y]) % 2 else 1
                        out = vec_add(out, {x: g * df * s})
        return out

    def __eq__(self, other):
        return (isinstance(other, LInftyStructure) and self.chart == other.chart
                and self.module == other.module and self.brackets == other.brackets
                and self.anchor == other.anchor)

    def __repr__(self):
        return (f"LInftyStructure(chart={list(self.chart)}, generators={self.labels}, "
                f"arities={sorted(self.brackets)}, anchored={sorted(self.anchor)})")


def bracket(L: LInftyStructure, args: Sequence[Vec], n: Optional[int] = None) -> Vec:
    if n is not None and n != len(args):
        raise InputError(f"arity {n} does not match {len(args)} arguments")
    return L.bracket(args)


# ---------------------------------------------------------------------------
# Jacobiators


def jacobiator(L: LInftyStructure, n: int, tup: Sequence[str]) -> Vec:
    """sum over i+j=n+1 and (i, n-i) unshuffles of eps * {{x_head}_i, x_tail}_j."""
    if len(tup) != n:
        raise InputError(f"jacobiator of arity {n} needs {n} generators")
    degs = [L.deg[t] for t in tup]
    out: Vec = {}
    live = set(L.brackets) | ({2} if L.anchor else set())
    for i in range(1, n + 1):
        j = n + 1 - i
        if i not in L.brackets or j not in live:
            continue
        for head, tail in unshuffles(n, i):
            inner = L.gen_bracket([tup[k] for k in head])
            if not inner:
                continue
            perm = Permutation(tuple(k + 1 for k in head + tail))
            sign = koszul_sign(perm, degs)
            outer = L.bracket([inner] + [L.basis_vec(tup[k]) for k in tail])
            if outer:
                out = vec_add(out, outer, sign)
    return out


@dataclass
class JacobiatorReport:
    """Outcome of one family of identities at a fixed arity.

    ``kind`` is "jacobi" for the n-th Jacobiator, "anchor-d" for rho o l_1 = 0
    and "anchor-bracket" for rho{x,y} = [rho x, rho y].  ``values`` maps each
    failing tuple to its nonzero residual.
    """

    arity: int
    kind: str = "jacobi"
    checked: int = 0
    values: Dict[Tuple[str, ...], object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.values

    def witness(self):
        return next(iter(sorted(self.values)), None)


def sorted_tuples(L: LInftyStructure, n: int) -> Iterable[Tuple[str, ...]]:
    for tup in combinations_with_replacement(L.labels, n):
        if any(a == b and L.deg[a] % 2 for a, b in zip(tup, tup[1:])):
            continue
        yield tup


def check_linfty(L: LInftyStructure, max_arity: Optional[int] = None) -> List[JacobiatorReport]:
    """Evaluate every Jacobiator up to ``max_arity`` plus the anchor identities."""
    if max_arity is None:
        # J^n can only be nonzero when some i + j = n + 1 uses stored arities
        top = max(L.max_arity, 2 if L.anchor else 1)
        max_arity = 2 * top - 1
    present = set(L.deg.values())
    reports = []
    for n in range(1, max_arity + 1):
        rep = JacobiatorReport(arity=n)
        for tup in sorted_tuples(L, n):
            if sum(L.deg[t] for t in tup) + 2 not in present:
                continue
            rep.checked += 1
            val = jacobiator(L, n, tup)
            if val:
                rep.values[tup] = val
        reports.append(rep)
    reports.extend(check_anchor(L))
    return reports


def check_anchor(L: LInftyStructure) -> List[JacobiatorReport]:
    """rho o l_1 = 0 on degree -2 and rho{x,y} = [rho x, rho y] on degree -1."""
    rep_d = JacobiatorReport(arity=1, kind="anchor-d")
    for lab in L.labels:
        if L.deg[lab] == -2:
            rep_d.checked += 1
            r = L.anchor_of(L.gen_bracket((lab,)))
            if r:
                rep_d.values[(lab,)] = r
    rep_b = JacobiatorReport(arity=2, kind="anchor-bracket")
    ones = [lab for lab in L.labels if L.deg[lab] == -1]
    for a_i, a in enumerate(ones):
        for b in ones[a_i + 1:]:
            rep_b.checked += 1
            lhs = L.anchor_of(L.gen_bracket((a, b)))
            rhs = vf_bracket(L.anchor.get(a, {}), L.anchor.get(b, {}), L.ring)
            diff = {v: lhs.get(v, L.ring.zero()) - rhs.get(v, L.ring.zero()) for v in L.chart}
            diff = {v: e for v, e in diff.items() if e}
            if diff:
                rep_b.values[(a, b)] = diff
    return [rep_d, rep_b]


def is_linfty(L: LInftyStructure, max_arity: Optional[int] = None) -> bool:
    return all(r.passed for r in check_linfty(L, max_arity))


def require_linfty(L: LInftyStructure, max_arity: Optional[int] = None) -> None:
    for rep in check_linfty(L, max_arity):
        if not rep.passed:
            w = rep.witness()
            raise StructureError(f"{rep.kind} identity fails at arity {rep.arity} on {w}: {rep.values[w]}",
                                 witness=(rep.kind, rep.arity, w))


# ---------------------------------------------------------------------------
# shift dictionary


def from_antisymmetric(chart: Sequence[str], unshifted: GradedModule,
                       brackets: Mapping[int, Mapping[Tuple[str, ...], Mapping[str, object]]],
                       anchor: Mapping[str, Mapping[str, object]] = None) -> LInftyStructure:
    """Convert graded antisymmetric brackets on E (degree 2-n) to the shifted picture.

    Using decalage, {s x_1, ..., s x_n} = (-1)^{sum_i (n-i)|x_i|} s[x_1, ..., x_n]
    where |x_i| are unshifted degrees and s lowers degree by one.
    """
    shifted = unshifted.shift(1)
    out: Dict[int, Dict[Tuple[str, ...], Dict[str, object]]] = {}
    for n, table in brackets.items():
        for tup, value in table.items():
            n_ = len(tup)
            e = sum((n_ - 1 - i) * unshifted.degree(t) for i, t in enumerate(tup))
            s = -1 if e % 2 else 1
            out.setdefault(n_, {})[tuple(tup)] = {k: (v * s if isinstance(v, Elem) else as_rational(v) * s)
                                                 for k, v in value.items()}
    return LInftyStructure(chart, shifted, out, anchor)

