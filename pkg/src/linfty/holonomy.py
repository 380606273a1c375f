"""Iterated integrals on product foliations, exactly.

Forms live on a chart R^m whose coordinates split into leaf and transverse
variables; foliated forms only carry leaf differentials.  Everything is
polynomial, so every integral below is a finite sum of iterated integrals
over order simplices, done exactly with sympy.

Conventions
-----------
* Delta^k = {1 >= t_1 >= ... >= t_k >= 0}; vertex i is (1^i, 0^(k-i)) and an
  affine simplex with vertices P_0..P_k is t -> P_0 + sum_i t_i (P_i - P_{i-1}).
* Pushforward along Delta^k moves dt_1..dt_k to the front, then integrates.
* theta_(k) is the cube family of paths in Delta^k from v_k to v_0: on time
  segment j it shrinks coordinate m = k - j + 1 of the point
  (w_1, .., w_{k-1}, 1) to zero and applies t_i = max(x_i, .., x_k).
  Inside a segment the path is reparametrized by the moving coordinate, which
  makes every piece affine; Chen integrals do not see the change.
* The adjoint theta_k lives on I^k with the time coordinate first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .graded import InputError, StructureError

Sym = sp.Symbol


def sym(name: str) -> sp.Symbol:
    return sp.Symbol(name)


def _exact(e):
    """Canonical exact form of a scalar; never rewrites rationals approximately."""
    return sp.expand(sp.sympify(e))


def _sort_sign(seq: Sequence[str]) -> Tuple[Tuple[str, ...], int]:
    """Sorted tuple and the sign of the sorting permutation (0 on repeats)."""
    if len(set(seq)) != len(seq):
        return tuple(), 0
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return tuple(sorted(seq)), -1 if inv % 2 else 1


def _poly_check(expr, variables: Iterable[str]):
    try:
        sp.Poly(expr, *[sym(v) for v in variables]) if variables else None
    except sp.PolynomialError as exc:
        raise InputError(f"non-polynomial coefficient {expr}") from exc


class Form:
    """Differential form sum c_I dI with sympy coefficients; I sorted by name."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Tuple[str, ...], object]] = None):
        out: Dict[Tuple[str, ...], sp.Expr] = {}
        for key, c in (terms or {}).items():
            skey, s = _sort_sign(tuple(key))
            if not s:
                continue
            v = out.get(skey, 0) + s * sp.sympify(c)
            out[skey] = v
        self.terms = {k: e for k, e in ((k, sp.expand(v)) for k, v in out.items()) if e != 0}

    # constructors
    @staticmethod
    def zero() -> "Form":
        return Form()

    @staticmethod
    def scalar(c) -> "Form":
        return Form({(): c})

    @staticmethod
    def d(name: str) -> "Form":
        return Form({(name,): 1})

    @staticmethod
    def parse(text: str) -> "Form":
        """'x*dx + y^2*dx*dy' style input; 'dv' stands for the differential of v."""
        expr = sp.sympify(text.replace("^", "**"))
        dnames = sorted({s.name for s in expr.free_symbols if s.name.startswith("d") and len(s.name) > 1})
        dsyms = [sym(n) for n in dnames]
        poly = sp.Poly(sp.expand(expr), *dsyms) if dsyms else None
        if poly is None:
            return Form.scalar(expr)
        terms: Dict[Tuple[str, ...], sp.Expr] = {}
        for mono, c in poly.terms():
            if any(e > 1 for e in mono):
                continue
            key = tuple(dnames[i][1:] for i, e in enumerate(mono) if e)
            terms[key] = terms.get(key, 0) + c
        return Form(terms)

    # algebra
    def __add__(self, other: "Form") -> "Form":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return Form(t)

    def __neg__(self) -> "Form":
        return Form({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        return Form({k: c * v for k, v in self.terms.items()})

    def wedge(self, other: "Form") -> "Form":
        out: Dict[Tuple[str, ...], sp.Expr] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                skey, s = _sort_sign(k1 + k2)
                if s:
                    out[skey] = out.get(skey, 0) + s * c1 * c2
        return Form(out)

    __mul__ = wedge

    def __eq__(self, other) -> bool:
        return isinstance(other, Form) and (self - other).terms == {}

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})" + "".join(f"*d{n}" for n in k) for k, c in sorted(self.terms.items()))

    def degrees(self) -> List[int]:
        return sorted({len(k) for k in self.terms})

    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise InputError(f"form of mixed degree {ds}")
        return ds[0] if ds else 0

    def part(self, r: int) -> "Form":
        return Form({k: v for k, v in self.terms.items() if len(k) == r})

    def differentials(self) -> set:
        return {n for k in self.terms for n in k}

    def coefficient_symbols(self) -> set:
        out = set()
        for v in self.terms.values():
            out |= {s.name for s in v.free_symbols}
        return out

    def exterior_d(self, variables: Sequence[str]) -> "Form":
        out: Dict[Tuple[str, ...], sp.Expr] = {}
        for k, c in self.terms.items():
            for v in variables:
                dc = sp.diff(c, sym(v))
                if dc != 0:
                    skey, s = _sort_sign((v,) + k)
                    if s:
                        out[skey] = out.get(skey, 0) + s * dc
        return Form(out)

    def pullback(self, mapping: Mapping[str, object], new_vars: Sequence[str]) -> "Form":
        """Substitute coordinates; differentials of mapped names expand in ``new_vars``."""
        subs = {sym(k): sp.sympify(v) for k, v in mapping.items()}
        dimg: Dict[str, Form] = {}
        for name, expr in subs.items():
            dimg[name.name] = Form({(nv,): sp.diff(expr, sym(nv)) for nv in new_vars})
        out = Form()
        for k, c in self.terms.items():
            f = Form.scalar(sp.sympify(c).xreplace(subs))
            for n in k:
                f = f.wedge(dimg[n] if n in dimg else Form.d(n))
            out = out + f
        return out

    def subs(self, values: Mapping[str, object]) -> "Form":
        s = {sym(k): sp.sympify(v) for k, v in values.items()}
        return Form({k: sp.sympify(c).xreplace(s) for k, c in self.terms.items()})

    def top_coefficient(self, order: Sequence[str]) -> sp.Expr:
        """f with self = f d(order[0]) ^ ... ^ d(order[-1]) + (other terms)."""
        skey, s = _sort_sign(tuple(order))
        return s * self.terms.get(skey, 0)


# ---------------------------------------------------------------------------
# matrix-valued forms


@dataclass
class MatForm:
    """Matrix of forms: entry (i, j) maps basis vector j to basis vector i.

    ``row_deg``/``col_deg`` are the degrees of target and source basis
    vectors; the product follows (A x a)(B x b) = (-1)^{|a||B|} AB x (a ^ b).
    """

    entries: List[List[Form]]
    row_deg: Tuple[int, ...]
    col_deg: Tuple[int, ...]

    @staticmethod
    def scalar(f: Form) -> "MatForm":
        return MatForm([[f]], (0,), (0,))

    @staticmethod
    def identity(deg: Sequence[int]) -> "MatForm":
        n = len(deg)
        return MatForm([[Form.scalar(1 if i == j else 0) for j in range(n)] for i in range(n)], tuple(deg), tuple(deg))

    @staticmethod
    def zeros(row_deg, col_deg) -> "MatForm":
        return MatForm([[Form() for _ in col_deg] for _ in row_deg], tuple(row_deg), tuple(col_deg))

    @property
    def shape(self):
        return len(self.row_deg), len(self.col_deg)

    def __add__(self, other: "MatForm") -> "MatForm":
        return MatForm([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                       self.row_deg, self.col_deg)

    def __neg__(self):
        return MatForm([[-a for a in r] for r in self.entries], self.row_deg, self.col_deg)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MatForm":
        return MatForm([[a.scale(c) for a in r] for r in self.entries], self.row_deg, self.col_deg)

    def __matmul__(self, other: "MatForm") -> "MatForm":
        n, m = self.shape
        m2, q = other.shape
        if m != m2:
            raise InputError("shape mismatch in matrix form product")
        out = []
        for i in range(n):
            row = []
            for j in range(q):
                acc = Form()
                for k in range(m):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if not a or not b:
                        continue
                    endb = other.row_deg[k] - other.col_deg[j]
                    for r in a.degrees():
                        part = a.part(r)
                        acc = acc + part.wedge(b).scale(-1 if (r * endb) % 2 else 1)
                row.append(acc)
            out.append(row)
        return MatForm(out, self.row_deg, other.col_deg)

    def map(self, fn: Callable[[Form], Form]) -> "MatForm":
        return MatForm([[fn(a) for a in r] for r in self.entries], self.row_deg, self.col_deg)

    def support(self) -> List[List[bool]]:
        return [[bool(a) for a in r] for r in self.entries]

    def is_zero(self) -> bool:
        return not any(a for r in self.entries for a in r)

    def to_matrix(self) -> sp.Matrix:
        """Constant (0-form, no symbols) entries as a sympy matrix."""
        n, m = self.shape
        M = sp.zeros(n, m)
        for i in range(n):
            for j in range(m):
                e = self.entries[i][j]
                if e.differentials():
                    raise InputError("entry is not a 0-form")
                M[i, j] = e.terms.get((), 0)
        return M

    def __eq__(self, other):
        return (isinstance(other, MatForm) and self.shape == other.shape
                and all(a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2)))


def _as_mat(a) -> MatForm:
    return a if isinstance(a, MatForm) else MatForm.scalar(a)


# ---------------------------------------------------------------------------
# charts and simplices


@dataclass(frozen=True)
class FoliatedChart:
    """R^m = leaf variables x transverse variables; leaves are transverse = const."""

    leaf: Tuple[str, ...]
    transverse: Tuple[str, ...] = ()

    @property
    def coords(self) -> Tuple[str, ...]:
        return self.leaf + self.transverse

    def d(self, a: Form) -> Form:
        """Leafwise exterior derivative."""
        bad = a.differentials() - set(self.leaf)
        if bad:
            raise InputError(f"not a foliated form: differentials {sorted(bad)}")
        return a.exterior_d(self.leaf)

    def check_form(self, a: Form) -> Form:
        bad = a.differentials() - set(self.leaf)
        if bad:
            raise InputError(f"not a foliated form: differentials {sorted(bad)}")
        extra = a.coefficient_symbols() - set(self.coords)
        if extra:
            raise InputError(f"coefficients use unknown symbols {sorted(extra)}")
        for c in a.terms.values():
            _poly_check(c, self.coords)
        return a


@dataclass(frozen=True)
class AffineSimplex:
    """Affine simplex with vertices P_0..P_k lying in one leaf of the chart."""

    chart: FoliatedChart
    vertices: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        m = len(self.chart.coords)
        vs = tuple(tuple(Fraction(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if any(len(v) != m for v in vs):
            raise InputError("vertex dimension does not match the chart")
        nl = len(self.chart.leaf)
        if any(v[nl:] != vs[0][nl:] for v in vs):
            raise InputError("simplex is not foliated: transverse coordinates differ between vertices")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def point(self, t: Sequence) -> Dict[str, sp.Expr]:
        """Ambient coordinates at simplex coordinates t (expressions allowed)."""
        P = self.vertices
        out = {}
        for c, name in enumerate(self.chart.coords):
            val = sp.Rational(P[0][c].numerator, P[0][c].denominator)
            for i in range(1, len(P)):
                diff = P[i][c] - P[i - 1][c]
                if diff:
                    val = val + sp.Rational(diff.numerator, diff.denominator) * sp.sympify(t[i - 1])
            out[name] = val
        return out

    def face(self, i: int) -> "AffineSimplex":
        return AffineSimplex(self.chart, self.vertices[:i] + self.vertices[i + 1:])

    def sub(self, idx: Sequence[int]) -> "AffineSimplex":
        return AffineSimplex(self.chart, tuple(self.vertices[i] for i in idx))

    def pullback(self, a: Form, tnames: Sequence[str]) -> Form:
        return a.pullback(self.point([sym(t) for t in tnames]), tnames)


def tnames(k: int, prefix: str = "t") -> List[str]:
    return [f"{prefix}{i}" for i in range(1, k + 1)]


def integrate_chain(expr, chain: Sequence[str]):
    """Integral of a polynomial over {1 >= z_1 >= ... >= z_n >= 0} (chain top-down)."""
    e = sp.sympify(expr)
    for idx in range(len(chain) - 1, -1, -1):
        z = sym(chain[idx])
        upper = sym(chain[idx - 1]) if idx else sp.Integer(1)
        P = sp.Poly(e, z)
        Q = P.integrate().as_expr()
        e = sp.expand(Q.subs(z, upper) - Q.subs(z, 0))
    return e


def simplex_pushforward(a: Form, k: int, t: Optional[Sequence[str]] = None) -> Form:
    """Integrate the full dt_1..dt_k factor over Delta^k (dt's moved to the front)."""
    t = list(t or tnames(k))
    out: Dict[Tuple[str, ...], sp.Expr] = {}
    tset = set(t)
    for key, c in a.terms.items():
        if not tset <= set(key):
            continue
        rest = tuple(n for n in key if n not in tset)
        _, s = _sort_sign(tuple(t) + rest)
        try:
            val = integrate_chain(c, t)
        except sp.PolynomialError as exc:
            raise InputError(f"non-polynomial coefficient {c}") from exc
        out[rest] = out.get(rest, 0) + s * val
    return Form(out)


def integrate_simplex(a: Form, sigma: AffineSimplex) -> sp.Rational:
    """int_{Delta^k} sigma^* a for a k-form a."""
    k = sigma.dim
    t = tnames(k)
    res = simplex_pushforward(sigma.pullback(a, t), k, t)
    return _exact(res.terms.get((), 0))


def coface(k: int, i: int, t: Sequence) -> List:
    """Coface Delta^(k-1) -> Delta^k in the time coordinates."""
    t = list(t)
    if i == 0:
        return [1] + t
    if i == k:
        return t + [0]
    return t[:i] + [t[i - 1]] + t[i:]


def boundary_pushforward(a: Form, k: int, t: Optional[Sequence[str]] = None) -> Form:
    """sum_i (-1)^i (pushforward over Delta^(k-1)) of the i-th coface pullback."""
    t = list(t or tnames(k))
    s = [f"_s{i}" for i in range(1, k)]
    out = Form()
    for i in range(k + 1):
        img = coface(k, i, [sym(n) for n in s])
        pulled = a.pullback({t[j]: img[j] for j in range(k)}, s)
        pf = simplex_pushforward(pulled, k - 1, s)
        out = out + pf.scale(-1 if i % 2 else 1)
    return out


# ---------------------------------------------------------------------------
# path families and Chen iterated integrals


U = "_u"


@dataclass
class PathFamily:
    """Piecewise-affine family of paths.

    ``segments`` lists, in time order, maps {coordinate: expression} in the
    parameters and the segment variable ``_u`` running 0 -> 1.
    """

    params: Tuple[str, ...]
    segments: List[Dict[str, sp.Expr]]
    coords: Tuple[str, ...]

    def check_leafwise(self, chart: FoliatedChart):
        for seg in self.segments:
            for y in chart.transverse:
                if sp.diff(sp.sympify(seg[y]), sym(U)) != 0:
                    raise InputError("family is not leafwise: transverse coordinates move along a path")

    def point(self, index: int, u, params: Mapping[str, object]) -> Dict[str, sp.Expr]:
        subs = {sym(k): sp.sympify(v) for k, v in params.items()}
        subs[sym(U)] = sp.sympify(u)
        return {c: sp.sympify(e).xreplace(subs) for c, e in self.segments[index].items()}


def straight_path(chart: FoliatedChart, start: Sequence, end: Sequence) -> PathFamily:
    u = sym(U)
    seg = {c: sp.Rational(Fraction(a)) + (sp.Rational(Fraction(b)) - sp.Rational(Fraction(a))) * u
           for c, a, b in zip(chart.coords, start, end)}
    return PathFamily((), [seg], chart.coords)


def spade_sign(word: Sequence) -> int:
    """(-1)^spade with spade = sum_{i<k} (T(a_i) - 1)(k - i), T the total degree."""
    k = len(word)
    tot = 0
    for i, a in enumerate(word, start=1):
        if i < k:
            tot += (_total_degree(a) - 1) * (k - i)
    return -1 if tot % 2 else 1


def _total_degree(a) -> int:
    if isinstance(a, MatForm):
        degs = set()
        for i, r in enumerate(a.entries):
            for j, f in enumerate(r):
                for d in f.degrees():
                    degs.add(d + a.row_deg[i] - a.col_deg[j])
        if len(degs) > 1:
            raise InputError(f"matrix form of mixed total degree {sorted(degs)}")
        return degs.pop() if degs else 1
    return a.degree() if a else 0


def _nonincreasing(p: int, nseg: int):
    def rec(i, cap, cur):
        if i == p:
            yield tuple(cur)
            return
        for g in range(cap, -1, -1):
            cur.append(g)
            yield from rec(i + 1, g, cur)
            cur.pop()
    yield from rec(0, nseg - 1, [])


def chen(word: Sequence, family: PathFamily, chart: Optional[FoliatedChart] = None, sign: bool = True):
    """Chen iterated integral of a word of forms (or matrix forms) over a family.

    Returns a Form (or MatForm) in the family parameters.
    """
    if chart is not None:
        family.check_leafwise(chart)
        for a in word:
            for f in (_as_mat(a).entries if True else []):
                for e in f:
                    chart.check_form(e)
    p = len(word)
    mats = [_as_mat(a) for a in word]
    scalar = not any(isinstance(a, MatForm) for a in word)
    if p == 0:
        return Form.scalar(1)
    us = [f"_u{i}" for i in range(1, p + 1)]
    params = list(family.params)
    total = None
    cache: Dict[Tuple[int, int], MatForm] = {}
    for assign in _nonincreasing(p, len(family.segments)):
        prod = None
        for i, g in enumerate(assign):
            key = (i, g)
            if key not in cache:
                seg = family.segments[g]
                mapping = {c: sp.sympify(e).xreplace({sym(U): sym(us[i])}) for c, e in seg.items()}
                cache[key] = mats[i].map(lambda f: f.pullback(mapping, params + [us[i]]))
            prod = cache[key] if prod is None else prod @ cache[key]
        # integrate over the u-region: same-segment u's decrease with the index
        chain_bounds = []
        for i in range(p):
            upper = us[i - 1] if i and assign[i - 1] == assign[i] else None
            chain_bounds.append(upper)
        pushed = prod.map(lambda f: _push_u(f, us, chain_bounds))
        total = pushed if total is None else total + pushed
    if sign:
        total = total.scale(spade_sign(word))
    return total.entries[0][0] if scalar else total


def _push_u(f: Form, us: Sequence[str], bounds: Sequence[Optional[str]]) -> Form:
    out: Dict[Tuple[str, ...], sp.Expr] = {}
    uset = set(us)
    for key, c in f.terms.items():
        if not uset <= set(key):
            continue
        rest = tuple(n for n in key if n not in uset)
        _, s = _sort_sign(tuple(us) + rest)
        e = sp.sympify(c)
        for i in range(len(us) - 1, -1, -1):
            z = sym(us[i])
            upper = sym(bounds[i]) if bounds[i] else sp.Integer(1)
            Q = sp.Poly(e, z).integrate().as_expr()
            e = sp.expand(Q.subs(z, upper) - Q.subs(z, 0))
        out[rest] = out.get(rest, 0) + s * e
    return Form(out)


# ---------------------------------------------------------------------------
# cubes to simplices


def wnames(k: int) -> List[str]:
    return [f"w{i}" for i in range(1, k)]


def theta_family(k: int, order: Sequence[int], sigma: Optional[AffineSimplex] = None) -> PathFamily:
    """theta_(k) (composed with sigma) on the cell w_{order[0]} > w_{order[1]} > ...

    ``order`` is a permutation of 1..k-1.  Without sigma the family lands in
    the time coordinates of Delta^k.
    """
    if sorted(order) != list(range(1, k)):
        raise InputError("order must be a permutation of 1..k-1")
    rank = {a: r for r, a in enumerate(order)}        # smaller rank = larger value
    w = {a: sym(f"w{a}") for a in range(1, k)}
    u = sym(U)
    segments = []
    for j in range(1, k + 1):
        m = k - j + 1
        hi = None if m == k else m                  # None stands for the value 1
        below = sorted([a for a in range(1, m) if hi is None or rank[a] > rank[hi]], key=lambda a: rank[a])
        stops = [hi] + below + ["zero"]
        for s in range(len(stops) - 1):
            vh, vl = stops[s], stops[s + 1]
            eh = sp.Integer(1) if vh is None else w[vh]
            el = sp.Integer(0) if vl == "zero" else w[vl]
            v = eh + u * (el - eh)
            t = []
            for l in range(1, k + 1):
                if l > m:
                    t.append(sp.Integer(0))
                    continue
                # w's larger than v on this piece: those ranked at or above vh
                cands = [a for a in range(l, m) if vh is not None and (vh == a or rank[a] < rank[vh])]
                if vh is None:
                    cands = []
                if cands:
                    top = min(cands, key=lambda a: rank[a])
                    t.append(w[top])
                else:
                    t.append(v)
            if sigma is None:
                segments.append({f"t{l}": t[l - 1] for l in range(1, k + 1)})
            else:
                segments.append(sigma.point(t))
    coords = tuple(tnames(k)) if sigma is None else sigma.chart.coords
    return PathFamily(tuple(wnames(k)), segments, coords)


def cube_integral(form_in_w, k: int):
    """int_{I^(k-1)} of a callable order -> form in w, summed over order cells."""
    total = None
    for order in permutations(range(1, k)):
        f = form_in_w(order)
        chain = [f"w{a}" for a in order]
        wn = wnames(k)
        if isinstance(f, MatForm):
            val = f.map(lambda e: Form.scalar(integrate_chain(e.top_coefficient(wn), chain)))
        else:
            val = Form.scalar(integrate_chain(f.top_coefficient(wn), chain))
        total = val if total is None else total + val
    return total


def S_of_chen(word: Sequence, sigma: AffineSimplex):
    """S(C(word))(sigma) = int_{I^(k-1)} theta_(k)^* (P sigma)^* C(word)."""
    k = sigma.dim
    if k < 1:
        raise InputError("needs a simplex of dimension >= 1")
    res = cube_integral(lambda order: chen(word, theta_family(k, order, sigma)), k)
    if isinstance(res, MatForm):
        return res.to_matrix()
    return _exact(res.terms.get((), 0))


def theta_adjoint_integral(alpha: Form, k: int):
    """int_{I^k} theta_k^* alpha for a k-form alpha on Delta^k (time coordinate first)."""
    # time-first orientation on I x I^(k-1) is the Chen pushforward followed by the cube integral
    t = tnames(k)
    res = cube_integral(lambda order: chen([alpha], theta_family(k, order), sign=False), k)
    return _exact(res.terms.get((), 0))


# -- theta as an honest piecewise-linear family with uniform time segments


def theta_path(k: int, w: Sequence[Fraction]) -> List[Tuple[Fraction, Tuple[Fraction, ...]]]:
    """Breakpoints (time, point of Delta^k) of the path theta_(k)(w).

    Segment j occupies times [(j-1)/k, j/k] and shrinks coordinate k-j+1
    linearly; the retraction t_i = max(x_i..x_k) adds kinks where the moving
    coordinate crosses a fixed one.
    """
    w = [Fraction(x) for x in w] + [Fraction(1)]
    pts = []
    x = list(w)

    def retract(xs):
        return tuple(max(xs[i:]) for i in range(k))

    for j in range(1, k + 1):
        m = k - j + 1
        t0, t1 = Fraction(j - 1, k), Fraction(j, k)
        start = x[m - 1]
        pts.append((t0, retract(x)))
        # kinks where the moving coordinate meets a fixed one
        for a in range(m - 1):
            if 0 < x[a] < start:
                frac = (start - x[a]) / start
                tt = t0 + frac * (t1 - t0)
                xs = list(x)
                xs[m - 1] = x[a]
                pts.append((tt, retract(xs)))
        x[m - 1] = Fraction(0)
    pts.append((Fraction(1), retract(x)))
    pts.sort(key=lambda p: p[0])
    out = []
    for p in pts:
        if out and out[-1][0] == p[0]:
            continue
        out.append(p)
    return out


def _interp(path, tau: Fraction) -> Tuple[Fraction, ...]:
    tau = Fraction(tau)
    for (a, pa), (b, pb) in zip(path, path[1:]):
        if a <= tau <= b:
            if b == a:
                return pa
            s = (tau - a) / (b - a)
            return tuple(x + s * (y - x) for x, y in zip(pa, pb))
    raise InputError(f"time {tau} outside [0, 1]")


@dataclass
class PLMap:
    """Family of piecewise-linear paths: parameters -> breakpoint list."""

    nparams: int
    dim: int
    path: Callable[[Sequence[Fraction]], List[Tuple[Fraction, Tuple[Fraction, ...]]]]

    def __call__(self, w: Sequence, tau) -> Tuple[Fraction, ...]:
        return _interp(self.path(w), tau)

    def agrees_with(self, other: "PLMap", params: Iterable[Sequence[Fraction]]) -> bool:
        """Equality of paths at the given parameters, compared on all joint breakpoints."""
        for w in params:
            p1, p2 = self.path(w), other.path(w)
            times = sorted({t for t, _ in p1} | {t for t, _ in p2})
            if any(_interp(p1, t) != _interp(p2, t) for t in times):
                return False
        return True


def theta(k: int) -> PLMap:
    return PLMap(k - 1, k, lambda w: theta_path(k, w))


def _compose_path(path, fn) -> List[Tuple[Fraction, Tuple[Fraction, ...]]]:
    return [(t, fn(p)) for t, p in path]


def _reparam(path, pieces) -> List[Tuple[Fraction, Tuple[Fraction, ...]]]:
    """Path tau -> path(g(tau)) for g piecewise affine given by [(tau0, tau1, s0, s1)]."""
    out = []
    for tau0, tau1, s0, s1 in pieces:
        inner = [t for t, _ in path if min(s0, s1) < t < max(s0, s1)]
        pts = [(tau0, _interp(path, s0))]
        for t in inner:
            frac = (t - s0) / (s1 - s0)
            pts.append((tau0 + frac * (tau1 - tau0), _interp(path, t)))
        pts.append((tau1, _interp(path, s1)))
        out.extend(sorted(pts, key=lambda p: p[0]))
    dedup = []
    for p in out:
        if dedup and dedup[-1][0] == p[0]:
            continue
        dedup.append(p)
    return dedup


def coface_point(k: int, i: int, t: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in coface(k, i, list(t)))


def theta_negative_face(k: int, i: int) -> Tuple[PLMap, PLMap]:
    """theta_(k) with 0 inserted at slot i, and P(coface_i) o omega_i o theta_(k-1)."""
    def lhs(w):
        ww = list(w[:i - 1]) + [Fraction(0)] + list(w[i - 1:])
        return theta_path(k, ww)

    j = k - i + 1

    def rhs(w):
        inner = theta_path(k - 1, w)
        a, b = Fraction(j - 1, k), Fraction(j, k)
        c = Fraction(j - 1, k - 1)
        pieces = []
        if a > 0:
            pieces.append((Fraction(0), a, Fraction(0), c))
        pieces.append((a, b, c, c))
        if b < 1:
            pieces.append((b, Fraction(1), c, Fraction(1)))
        rep = _reparam(inner, pieces)
        return _compose_path(rep, lambda p: coface_point(k, i, p))

    return PLMap(k - 2, k, lhs), PLMap(k - 2, k, rhs)


def theta_positive_face(k: int, i: int) -> Tuple[PLMap, PLMap]:
    """theta_(k) with 1 inserted at slot i, and the concatenation mu_i(theta_(i), theta_(k-i))."""
    def lhs(w):
        ww = list(w[:i - 1]) + [Fraction(1)] + list(w[i - 1:])
        return theta_path(k, ww)

    def rhs(w):
        alpha = theta_path(i, w[:i - 1])
        beta = theta_path(k - i, w[i - 1:])
        cut = Fraction(k - i, k)
        first = _reparam(beta, [(Fraction(0), cut, Fraction(0), Fraction(1))])
        first = _compose_path(first, lambda p: (Fraction(1),) * i + tuple(p))
        second = _reparam(alpha, [(cut, Fraction(1), Fraction(0), Fraction(1))])
        second = _compose_path(second, lambda p: tuple(p) + (Fraction(0),) * (k - i))
        out = first + [q for q in second if q[0] != cut or not first]
        return out

    return PLMap(k - 2, k, lhs), PLMap(k - 2, k, rhs)


# ---------------------------------------------------------------------------
# the A-infinity de Rham maps


def phi(word: Sequence[Form], sigma: AffineSimplex) -> sp.Rational:
    """phi_n(a_1[1] .. a_n[1])(sigma) for n = len(word).

    phi_1(a)(sigma) = (-1)^k int_{Delta^k} sigma^* a and phi_n = S o C for
    n >= 2 (zero unless sum(|a_i| - 1) = dim(sigma) - 1).
    """
    k = sigma.dim
    for a in word:
        sigma.chart.check_form(a)
    if len(word) == 1:
        a = word[0]
        if a.degrees() and k not in a.degrees():
            return sp.Integer(0)
        val = integrate_simplex(a.part(k), sigma) if k else sp.sympify(
            a.part(0).subs(sigma.point([])).terms.get((), 0))
        return (-1) ** k * val
    if any(0 in a.degrees() for a in word):
        # a degree-0 entry kills the pushforward
        word = [a - a.part(0) for a in word]
    if k == 0:
        return sp.Integer(0)
    if sum(max(a.degrees(), default=0) - 1 for a in word) < k - 1:
        return sp.Integer(0)
    parts = [_split_degrees(a) for a in word]
    total = sp.Integer(0)
    for combo in _products(parts):
        if sum(a.degree() - 1 for a in combo) != k - 1:
            continue
        total += S_of_chen(list(combo), sigma)
    return _exact(total)


def _split_degrees(a: Form) -> List[Form]:
    return [a.part(r) for r in a.degrees() if r > 0]


def _products(lists):
    if not lists:
        yield ()
        return
    for x in lists[0]:
        for rest in _products(lists[1:]):
            yield (x,) + rest


def cochain_delta(values: Callable[[AffineSimplex], sp.Expr], sigma: AffineSimplex) -> sp.Expr:
    """(delta c)(sigma) = sum_i (-1)^i c(d_i sigma)."""
    return sum(((-1) ** i) * values(sigma.face(i)) for i in range(sigma.dim + 1))


def cochain_cup(c1: Callable, p: int, c2: Callable, sigma: AffineSimplex) -> sp.Expr:
    """Front p-face times back face."""
    k = sigma.dim
    return c1(sigma.sub(range(p + 1))) * c2(sigma.sub(range(p, k + 1)))


# signs of the low A-infinity relations, pinned on the generating corpus
SIGN_TABLE = {
    "chain_map": "phi_1(-d a) = delta phi_1(a)",
    "gugenheim": "delta phi_2(a,b) - phi_2(-da,b) - phi_2(a,-db) + phi_1(a) cup phi_1(b) - phi_1(a^b) = 0",
}


def chain_map_defect(a: Form, sigma: AffineSimplex, chart: FoliatedChart) -> sp.Expr:
    lhs = phi([-chart.d(a)], sigma)
    rhs = cochain_delta(lambda s: phi([a], s), sigma)
    return _exact(lhs - rhs)


def gugenheim_terms(a: Form, b: Form, sigma: AffineSimplex, chart: FoliatedChart) -> Dict[str, sp.Expr]:
    """The five terms of the n = 2 relation for 1-forms a, b on a 2-simplex."""
    return {
        "delta_phi2": cochain_delta(lambda s: phi([a, b], s), sigma),
        "phi2_da_b": phi([-chart.d(a), b], sigma),
        "phi2_a_db": phi([a, -chart.d(b)], sigma),
        "cup": cochain_cup(lambda s: phi([a], s), 1, lambda s: phi([b], s), sigma),
        "phi1_wedge": phi([a.wedge(b)], sigma),
    }


def gugenheim_defect(a: Form, b: Form, sigma: AffineSimplex, chart: FoliatedChart) -> sp.Expr:
    t = gugenheim_terms(a, b, sigma, chart)
    return _exact(t["delta_phi2"] - t["phi2_da_b"] - t["phi2_a_db"] + t["cup"] - t["phi1_wedge"])


# ---------------------------------------------------------------------------
# connections and Riemann-Hilbert holonomy


class ConnectionOnChart:
    """nabla = d - omega on V x (foliated forms), omega = A_0 + A_1 + A_2 + ...

    ``omega`` is a MatForm; entry (i, j) of form degree r must have
    deg_i - deg_j = 1 - r.  Operators act on V x forms by
    (E_ij x a)(e_j x eta) = (-1)^{|a||e_j|} e_i x a eta and
    d(e_j x eta) = (-1)^{|e_j|} e_j x d eta.
    """

    def __init__(self, chart: FoliatedChart, degrees: Sequence[int], omega: MatForm):
        self.chart = chart
        self.degrees = tuple(degrees)
        if omega.row_deg != self.degrees or omega.col_deg != self.degrees:
            raise InputError("omega must be an endomorphism of V")
        for i, r in enumerate(omega.entries):
            for j, f in enumerate(r):
                chart.check_form(f)
                for deg in f.degrees():
                    if self.degrees[i] - self.degrees[j] != 1 - deg:
                        raise InputError(f"entry ({i},{j}) of form degree {deg} has the wrong total degree")
        self.omega = omega

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def component(self, r: int) -> MatForm:
        return self.omega.map(lambda f: f.part(r))

    # operators on vectors: list of Forms indexed by basis
    def _apply_omega(self, M: MatForm, vec: List[Form]) -> List[Form]:
        out = [Form() for _ in self.degrees]
        for i in range(self.rank):
            for j in range(self.rank):
                a = M.entries[i][j]
                if not a or not vec[j]:
                    continue
                for r in a.degrees():
                    s = -1 if (r * self.degrees[j]) % 2 else 1
                    out[i] = out[i] + a.part(r).wedge(vec[j]).scale(s)
        return out

    def _apply_d(self, vec: List[Form]) -> List[Form]:
        return [self.chart.d(f).scale(-1 if self.degrees[j] % 2 else 1) for j, f in enumerate(vec)]

    def nabla(self, vec: List[Form]) -> List[Form]:
        a = self._apply_d(vec)
        b = self._apply_omega(self.omega, vec)
        return [x - y for x, y in zip(a, b)]

    def _from_images(self, images: List[List[Form]]) -> MatForm:
        """Matrix form whose action on e_j x 1 gives images[j]."""
        ent = [[Form() for _ in self.degrees] for _ in self.degrees]
        for j, img in enumerate(images):
            for i, f in enumerate(img):
                acc = Form()
                for r in f.degrees():
                    s = -1 if (r * self.degrees[j]) % 2 else 1
                    acc = acc + f.part(r).scale(s)
                ent[i][j] = acc
        return MatForm(ent, self.degrees, self.degrees)

    def curvature(self) -> MatForm:
        """nabla^2 as a matrix of forms."""
        imgs = []
        for j in range(self.rank):
            e = [Form.scalar(1 if i == j else 0) for i in range(self.rank)]
            imgs.append(self.nabla(self.nabla(e)))
        return self._from_images(imgs)

    def is_flat(self) -> bool:
        return self.curvature().is_zero()

    def gauge(self, g: MatForm, g_inv: MatForm) -> "ConnectionOnChart":
        """g o nabla o g^-1 for a total-degree-0 automorphism g."""
        imgs = []
        for j in range(self.rank):
            e = [Form.scalar(1 if i == j else 0) for i in range(self.rank)]
            x = self._apply_omega(g_inv, e)
            y = self.nabla(x)
            z = self._apply_omega(g, y)
            imgs.append([-f for f in z])        # nabla'(e_j) = -omega'(e_j)
        return ConnectionOnChart(self.chart, self.degrees, self._from_images(imgs))

    def vertex_differential(self, point: Sequence) -> sp.Matrix:
        """The degree-0 part of nabla at a point: -A_0(x)."""
        A0 = self.component(0)
        vals = {c: sp.Rational(Fraction(v)) for c, v in zip(self.chart.coords, point)}
        return -A0.map(lambda f: f.subs(vals)).to_matrix()


def unipotent_inverse(N: MatForm, order: int = 12) -> MatForm:
    """(1 + N)^-1 for nilpotent N, by the finite geometric series."""
    I = MatForm.identity(N.row_deg)
    out = I
    term = I
    for _ in range(order):
        term = (-N) @ term
        if term.is_zero():
            return out
        out = out + term
    raise StructureError("gauge transformation is not unipotent within the bound")


def _bool_nilpotency(support: List[List[bool]], bound: int) -> Optional[int]:
    """Smallest n <= bound with support^n = 0 (boolean), else None."""
    n = len(support)
    cur = [[support[i][j] for j in range(n)] for i in range(n)]
    for p in range(1, bound + 2):
        if not any(any(r) for r in cur):
            return p
        cur = [[any(cur[i][k] and support[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return None


@dataclass
class HolonomyResult:
    matrix: sp.Matrix
    order: int
    exact: bool


def psi_sign(k: int) -> int:
    """Sign of psi_k relative to the cube integral; fixed by the Maurer-Cartan equation."""
    return (-1) ** ((k - 1) * (k - 2) // 2)


def rh_holonomy(conn: ConnectionOnChart, sigma: AffineSimplex, order: int = 4, exact: bool = True) -> HolonomyResult:
    """psi_k(sigma): F(sigma_k) -> F(sigma_0) from iterated integrals of omega.

    Only the positive form-degree parts of omega contribute, and a word
    contributes to psi_k only when its form degrees exceed its length by
    k - 1.  In exact mode the support of those parts must be nilpotent
    within ``order``.
    """
    k = sigma.dim
    if k == 0:
        return HolonomyResult(conn.vertex_differential(sigma.vertices[0]), 0, True)
    parts = {r: conn.component(r) for r in range(1, len(conn.chart.leaf) + 1)}
    parts = {r: P for r, P in parts.items() if not P.is_zero()}
    supp = [[any(P.entries[i][j] for P in parts.values()) for j in range(conn.rank)] for i in range(conn.rank)]
    nil = _bool_nilpotency(supp, order)
    if exact and nil is None:
        raise StructureError(f"connection words are not nilpotent within order {order}")
    top = order if nil is None else min(order, nil - 1)
    n = conn.rank
    total = sp.eye(n) if k == 1 else sp.zeros(n, n)
    for p in range(1, top + 1):
        for combo in _products([sorted(parts)] * p):
            if sum(r - 1 for r in combo) != k - 1:
                continue
            word = [parts[r] for r in combo]
            prod = None
            for P in word:
                sp_ = [[bool(e) for e in row] for row in P.entries]
                prod = sp_ if prod is None else [[any(prod[i][m] and sp_[m][j] for m in range(n))
                                                  for j in range(n)] for i in range(n)]
            if not any(any(r) for r in prod):
                continue
            total += S_of_chen(word, sigma)
    return HolonomyResult(psi_sign(k) * total, top, nil is not None)


def holonomy_local_system(conn: ConnectionOnChart, K, geometry: Mapping, order: int = 4, exact: bool = True):
    """Local system on a simplicial set K whose simplices map to affine simplices.

    ``geometry`` sends each vertex of K to a point of the chart; a simplex is
    sent to the affine simplex on its vertices.
    """
    from .locsys import GradedSpace, InftyLocalSystem, vertex

    spaces = {}
    vals = {}
    # V has basis degrees conn.degrees at every point
    space = GradedSpace(tuple(conn.degrees))
    for v in K.simplices(0):
        spaces[v] = space
        vals[v] = rh_holonomy(conn, AffineSimplex(conn.chart, (tuple(geometry[v]),)), order, exact).matrix
    for n in range(1, K.top + 1):
        for x in K.nondegenerate(n):
            pts = tuple(tuple(geometry[vertex(K, x, i)]) for i in range(n + 1))
            M = rh_holonomy(conn, AffineSimplex(conn.chart, pts), order, exact).matrix
            if not M.is_zero_matrix:
                vals[x] = M
    return InftyLocalSystem(K, spaces, vals)


# ---------------------------------------------------------------------------
# foliated cohomology


def foliated_cohomology(chart: FoliatedChart, bound: int) -> Dict[int, Dict[int, int]]:
    """dim H^i of leafwise polynomial forms, split by weight = polynomial degree + i.

    The leafwise differential preserves the weight, so each weight <= bound
    gives a finite complex.
    """
    from itertools import combinations, combinations_with_replacement

    from .linalg import rank

    coords = chart.coords
    q = len(chart.leaf)
    out: Dict[int, Dict[int, int]] = {}

    def monomials(deg):
        return list(combinations_with_replacement(range(len(coords)), deg))

    for w in range(bound + 1):
        bases = {}
        for i in range(q + 1):
            if w - i < 0:
                bases[i] = []
                continue
            bases[i] = [(m, I) for m in monomials(w - i) for I in combinations(chart.leaf, i)]
        ranks = {}
        for i in range(q):
            src, tgt = bases[i], bases[i + 1]
            index = {b: r for r, b in enumerate(tgt)}
            mat = [[Fraction(0)] * len(src) for _ in tgt]
            for c, (m, I) in enumerate(src):
                expr = sp.Integer(1)
                for v in m:
                    expr *= sym(coords[v])
                img = Form({I: expr}).exterior_d(chart.leaf)
                for key, coeff in img.terms.items():
                    poly = sp.Poly(coeff, *[sym(n) for n in coords])
                    for mono, cc in poly.terms():
                        mm = tuple(sorted(sum(([idx] * e for idx, e in enumerate(mono)), [])))
                        mat[index[(mm, key)]][c] += Fraction(int(cc.p), int(cc.q))
            ranks[i] = rank(mat) if src and tgt else 0
        for i in range(q + 1):
            h = len(bases[i]) - ranks.get(i, 0) - ranks.get(i - 1, 0)
            if h:
                out.setdefault(i, {})[w - i] = h
    return out


# ---------------------------------------------------------------------------
# desk-scale fixtures


def elementary(degrees: Sequence[int], i: int, j: int, f: Form) -> MatForm:
    n = len(degrees)
    ent = [[Form() for _ in range(n)] for _ in range(n)]
    ent[i][j] = f
    return MatForm(ent, tuple(degrees), tuple(degrees))


def _sum(mats: Sequence[MatForm]) -> MatForm:
    out = mats[0]
    for m in mats[1:]:
        out = out + m
    return out


HORIZONTAL = FoliatedChart(("x",), ("y",))
PLANE = FoliatedChart(("x", "y"))
SPACE = FoliatedChart(("x", "y", "z"))


def square_complex(chart: FoliatedChart = HORIZONTAL):
    """Triangulated unit square: (K, vertex -> point).

    With one leaf direction the 2-simplices run along the leaves y = 0, 1/2, 1;
    on the full plane the square is cut into two triangles along its diagonal.
    """
    from .simplicial import ordered_complex

    h = Fraction(1, 2)
    if chart.transverse:
        rows = (Fraction(0), h, Fraction(1))
        pts = {(f"p{a}{b}",): (Fraction(a, 2), rows[b]) for a in range(3) for b in range(3)}
        maximal = [tuple(f"p{a}{b}" for a in range(3)) for b in range(3)]
    else:
        pts = {("a",): (0, 0), ("b",): (1, 0), ("c",): (1, 1), ("d",): (0, 1), ("m",): (h, h)}
        maximal = [("a", "b", "m"), ("b", "c", "m"), ("a", "d", "m"), ("d", "c", "m")]
    K = ordered_complex(maximal, 2, name="unit square")
    return K, pts


def horizontal_fixtures() -> Dict[str, ConnectionOnChart]:
    """Five flat nilpotent connections on R^2 foliated by horizontal lines."""
    x, y = sym("x"), sym("y")
    ch = HORIZONTAL
    out = {}
    d3 = (0, 0, 1)
    out["upper_line"] = ConnectionOnChart(ch, d3, elementary(d3, 0, 1, Form({("x",): x * y + 1})))
    out["upper_with_differential"] = ConnectionOnChart(ch, d3, _sum([
        elementary(d3, 0, 1, Form({("x",): x ** 2})), elementary(d3, 2, 1, Form.scalar(1 + y))]))
    base = ConnectionOnChart(ch, d3, elementary(d3, 2, 1, Form.scalar(1)))
    N = elementary(d3, 1, 0, Form.scalar(x ** 2 * y + x))
    out["gauged_differential"] = base.gauge(MatForm.identity(d3) + N, unipotent_inverse(N))
    d2 = (0, 1)
    out["transverse_differential"] = ConnectionOnChart(ch, d2, elementary(d2, 1, 0, Form.scalar(y + 1)))
    d5 = (0, 1, 1)
    base = ConnectionOnChart(ch, d5, elementary(d5, 1, 0, Form.scalar(1)))
    N = elementary(d5, 2, 1, Form.scalar(x * y - 2 * x))
    out["gauged_pair"] = base.gauge(MatForm.identity(d5) + N, unipotent_inverse(N))
    return out


def plane_fixture() -> ConnectionOnChart:
    """Flat connection on the full plane with nonzero A_0, A_1 and A_2."""
    x, y = sym("x"), sym("y")
    d = (0, 0, 1)
    base = ConnectionOnChart(PLANE, d, elementary(d, 2, 0, Form.scalar(1)))
    N = elementary(d, 1, 0, Form.scalar(x * y + x)) + elementary(d, 1, 2, Form({("x",): y, ("y",): x ** 2}))
    return base.gauge(MatForm.identity(d) + N, unipotent_inverse(N))


def space_fixture() -> ConnectionOnChart:
    """Flat connection on R^3 with a 3-form component, so psi_3 is nonzero."""
    x, y, z = sym("x"), sym("y"), sym("z")
    d = (0, 1, 2)
    base = ConnectionOnChart(SPACE, d, elementary(d, 2, 1, Form.scalar(1)))
    N = elementary(d, 0, 1, Form({("x",): y, ("z",): x})) + elementary(d, 0, 2, Form({("x", "y"): z, ("y", "z"): x * x}))
    return base.gauge(MatForm.identity(d) + N, unipotent_inverse(N))


def inject_curvature(conn: ConnectionOnChart) -> ConnectionOnChart:
    """Add x * E_ij to the first degree-one slot; the result is never flat."""
    degs = conn.degrees
    x = sym(conn.chart.leaf[0])
    for i in range(conn.rank):
        for j in range(conn.rank):
            if degs[i] - degs[j] == 1:
                bumped = ConnectionOnChart(conn.chart, degs, conn.omega + elementary(degs, i, j, Form.scalar(x)))
                if not bumped.is_flat():
                    return bumped
    raise InputError("no degree-one slot produces curvature")
