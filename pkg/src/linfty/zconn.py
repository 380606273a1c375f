"""Z-connections and cohesive modules over a free cdga.

Conventions.  A graded free module E has basis e_i of degree a_i.  An
element of Hom(E1, E2) tensor A is stored as a matrix Phi with entries in A,
meaning sum_ij E_ij tensor Phi_ij, where E_ij sends e_j to e_i.  It acts on
E1 tensor A by

    (E_ij x X)(e_j x eta) = (-1)^{|X| a_j} e_i x X eta,

products pick up (-1)^{|X|(a_l - a_j)} when E_il x X meets E_lj x Y, and
the base differential acts on E tensor A as e x eta -> (-1)^{a_e} e x d eta.
A Z-connection is E = d + M with M of total degree 1; its curvature is
R = [d, M] + M^2 + c for a curved base with central c.  The supertrace is
Str(Phi) = sum_i (-1)^{a_i} Phi_ii, which kills supercommutators and
satisfies d Str = Str [d, -].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .cdga import Algebra, Derivation, Elem
from .graded import GradedModule, InputError, StructureError, as_rational

Entry = Tuple[str, str]


def _parity_sign(x: Elem, a: int) -> Elem:
    """Multiply each homogeneous part of x of degree p by (-1)^{p a}."""
    if a % 2 == 0:
        return x
    alg = x.alg
    return Elem(alg, {m: (-c if alg.mono_degree(m) % 2 else c) for m, c in x.terms.items()})


def _degree_twist(x: Elem, f) -> Elem:
    """Multiply each monomial of x by f(its degree)."""
    alg = x.alg
    return Elem(alg, {m: c * f(alg.mono_degree(m)) for m, c in x.terms.items()})


class MorphismElement:
    """Element of Hom(source, target) tensor A, stored as a sparse matrix."""

    __slots__ = ("source", "target", "alg", "entries")

    def __init__(self, source: GradedModule, target: GradedModule, alg: Algebra,
                 entries: Mapping[Entry, Elem] = ()):
        self.source = source
        self.target = target
        self.alg = alg
        clean = {}
        for (i, j), x in dict(entries).items():
            if i not in target or j not in source:
                raise InputError(f"entry {(i, j)} outside Hom(source, target)")
            if not isinstance(x, Elem):
                x = alg.const(x)
            elif x.alg != alg:
                x = x.to(alg)
            if x:
                clean[(i, j)] = clean[(i, j)] + x if (i, j) in clean else x
        self.entries = {k: v for k, v in clean.items() if v}

    # -- structure
    def entry_degree(self, i: str, j: str, x: Elem) -> set:
        shift = self.target.degree(i) - self.source.degree(j)
        return {shift + d for d in x.degrees()}

    def degrees(self) -> set:
        out = set()
        for (i, j), x in self.entries.items():
            out |= self.entry_degree(i, j, x)
        return out

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise InputError(f"inhomogeneous morphism (degrees {sorted(degs)})")
        return degs.pop() if degs else 0

    def form_part(self, p: int) -> "MorphismElement":
        """Component with coefficients of degree p in A."""
        return MorphismElement(self.source, self.target, self.alg,
                               {k: v.homogeneous(p) for k, v in self.entries.items()})

    def is_zero(self) -> bool:
        return not self.entries

    def __bool__(self):
        return bool(self.entries)

    def _same(self, other: "MorphismElement"):
        if other.source != self.source or other.target != self.target:
            raise InputError("morphisms between different modules")

    def __add__(self, other: "MorphismElement") -> "MorphismElement":
        self._same(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return MorphismElement(self.source, self.target, self.alg, out)

    def __neg__(self):
        return MorphismElement(self.source, self.target, self.alg, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "MorphismElement":
        if isinstance(s, Elem):
            # left multiplication by a scalar form: X * (E_ij x Y) = (-1)^{|X|(a_i - a_j)} E_ij x X Y
            out = {}
            for (i, j), v in self.entries.items():
                sh = self.target.degree(i) - self.source.degree(j)
                out[(i, j)] = _parity_sign(s, sh) * v
            return MorphismElement(self.source, self.target, self.alg, out)
        s = as_rational(s)
        return MorphismElement(self.source, self.target, self.alg, {k: v * s for k, v in self.entries.items()})

    def __mul__(self, other: "MorphismElement") -> "MorphismElement":
        """Composition self o other."""
        if other.target != self.source:
            raise InputError("composition of incompatible morphisms")
        by_row: Dict[str, List[Tuple[str, Elem]]] = {}
        for (l, j), y in other.entries.items():
            by_row.setdefault(l, []).append((j, y))
        out: Dict[Entry, Elem] = {}
        for (i, l), x in self.entries.items():
            a_l = self.source.degree(l)
            for j, y in by_row.get(l, ()):
                a_j = other.source.degree(j)
                term = _parity_sign(x, a_l - a_j) * y
                if term:
                    out[(i, j)] = out[(i, j)] + term if (i, j) in out else term
        return MorphismElement(other.source, self.target, self.alg, out)

    def __eq__(self, other):
        return (isinstance(other, MorphismElement) and self.source == other.source
                and self.target == other.target and self.entries == other.entries)

    def __repr__(self):
        if not self.entries:
            return "0"
        return "{" + ", ".join(f"{i}<-{j}: {v}" for (i, j), v in sorted(self.entries.items())) + "}"

    def apply(self, vec: Mapping[str, Elem]) -> Dict[str, Elem]:
        """Act on an element sum_j e_j x eta_j of source tensor A."""
        out: Dict[str, Elem] = {}
        for (i, j), x in self.entries.items():
            eta = vec.get(j)
            if eta is None or not eta:
                continue
            term = _parity_sign(x, self.source.degree(j)) * eta
            if term:
                out[i] = out[i] + term if i in out else term
        return {k: v for k, v in out.items() if v}

    def map_entries(self, fn) -> "MorphismElement":
        return MorphismElement(self.source, self.target, self.alg,
                               {k: fn(v) for k, v in self.entries.items()})


def identity(module: GradedModule, alg: Algebra) -> MorphismElement:
    return MorphismElement(module, module, alg, {(e, e): alg.one() for e in module.labels()})


def zero_morphism(source: GradedModule, target: GradedModule, alg: Algebra) -> MorphismElement:
    return MorphismElement(source, target, alg, {})


def supercommutator(x: MorphismElement, y: MorphismElement) -> MorphismElement:
    s = -1 if (x.degree() * y.degree()) % 2 else 1
    return x * y - (y * x).scale(s)


def supertrace(phi: MorphismElement) -> Elem:
    if phi.source != phi.target:
        raise InputError("supertrace needs an endomorphism")
    out = phi.alg.zero()
    for e in phi.source.labels():
        v = phi.entries.get((e, e))
        if v is not None:
            out = out + (v if phi.source.degree(e) % 2 == 0 else -v)
    return out


# ---------------------------------------------------------------------------


@dataclass
class BaseCdga:
    """A free cdga with differential d and optional central curvature c in A^2."""

    alg: Algebra
    d: Derivation
    c: Optional[Elem] = None

    def __post_init__(self):
        if self.d.alg != self.alg or self.d.degree != 1:
            raise InputError("base differential must be a degree-1 derivation of the algebra")
        for n in self.alg.names:
            if self.d.apply(self.d.value(n)):
                raise StructureError(f"d_A^2 != 0 on {n}", witness=n)
        if self.c is not None:
            if not isinstance(self.c, Elem):
                self.c = self.alg.const(self.c)
            if self.c and self.c.degree() != 2:
                raise InputError("curvature element must have degree 2")
            if self.d.apply(self.c):
                raise StructureError("Bianchi identity d c = 0 fails", witness=self.c)

    def bracket_d(self, phi: MorphismElement) -> MorphismElement:
        """[d, Phi], entrywise (-1)^{a_i + a_j} d Phi_ij."""
        out = {}
        for (i, j), x in phi.entries.items():
            dx = self.d.apply(x)
            if (phi.target.degree(i) + phi.source.degree(j)) % 2:
                dx = -dx
            out[(i, j)] = dx
        return MorphismElement(phi.source, phi.target, phi.alg, out)


def de_rham_base(chart: Sequence[str], prefix: str = "d") -> BaseCdga:
    from .cdga import de_rham
    alg, d = de_rham(chart, prefix)
    return BaseCdga(alg, d)


class ZConnection:
    """E = d + M on a graded free module, M of total degree 1."""

    def __init__(self, base: BaseCdga, module: GradedModule, M: MorphismElement):
        if M.source != module or M.target != module:
            raise InputError("connection form must be an endomorphism of the module")
        if M.alg != base.alg:
            raise InputError("connection form lives over a different algebra")
        if M and M.degrees() != {1}:
            raise InputError(f"connection form has total degrees {sorted(M.degrees())}, expected 1")
        self.base = base
        self.module = module
        self.M = M

    @classmethod
    def from_images(cls, base: BaseCdga, module: GradedModule,
                    images: Mapping[str, Mapping[str, object]]) -> "ZConnection":
        """Build from E(e_j x 1) = sum_i e_i x omega_ij (``images[j][i] = omega_ij``)."""
        entries = {}
        for j, row in images.items():
            a_j = module.degree(j)
            for i, w in row.items():
                w = w if isinstance(w, Elem) else base.alg.const(w)
                entries[(i, j)] = _parity_sign(w.to(base.alg), a_j)
        return cls(base, module, MorphismElement(module, module, base.alg, entries))

    @classmethod
    def trivial(cls, base: BaseCdga, module: GradedModule) -> "ZConnection":
        return cls(base, module, zero_morphism(module, module, base.alg))

    @property
    def alg(self) -> Algebra:
        return self.base.alg

    def component(self, i: int) -> MorphismElement:
        """E^i: the part of M with coefficients of form degree i."""
        return self.M.form_part(i)

    def images(self) -> Dict[str, Dict[str, Elem]]:
        out: Dict[str, Dict[str, Elem]] = {}
        for (i, j), x in self.M.entries.items():
            out.setdefault(j, {})[i] = _parity_sign(x, self.module.degree(j))
        return out

    def apply_to(self, label: str, eta: Elem) -> Dict[str, Elem]:
        """E(e_label x eta)."""
        out = self.M.apply({label: eta})
        deta = self.base.d.apply(eta)
        if deta:
            if self.module.degree(label) % 2:
                deta = -deta
            out[label] = out[label] + deta if label in out else deta
        return {k: v for k, v in out.items() if v}

    def bracket(self, phi: MorphismElement) -> MorphismElement:
        """[E, Phi] for an endomorphism Phi."""
        return self.base.bracket_d(phi) + supercommutator(self.M, phi)

    def __eq__(self, other):
        return isinstance(other, ZConnection) and self.module == other.module and self.M == other.M

    def __repr__(self):
        return f"ZConnection(module={self.module.basis}, M={self.M})"


def curvature(conn: ZConnection) -> MorphismElement:
    R = conn.base.bracket_d(conn.M) + conn.M * conn.M
    c = conn.base.c
    if c is not None and c:
        R = R + identity(conn.module, conn.alg).scale(c)
    return R


def is_flat(conn: ZConnection) -> bool:
    return curvature(conn).is_zero()


def _require_flat(conn: ZConnection, name: str):
    R = curvature(conn)
    if R:
        k = min(R.entries)
        raise StructureError(f"{name} is not flat: curvature entry {k} = {R.entries[k]}", witness=k)


def d_hom(phi: MorphismElement, source: ZConnection, target: ZConnection,
          check: bool = True) -> MorphismElement:
    """E_2 phi - (-1)^{|phi|} phi E_1."""
    if check:
        _require_flat(source, "source")
        _require_flat(target, "target")
    if phi.source != source.module or phi.target != target.module:
        raise InputError("morphism does not match the connections")
    out = source.base.bracket_d(phi) + target.M * phi
    right = phi * source.M
    if phi and phi.degree() % 2:
        return out + right
    return out - right


def shift(conn: ZConnection, k: int = 1, prefix: str = "") -> ZConnection:
    """E[k]: degrees lowered by k, operator (-1)^k E (labels optionally prefixed)."""
    mod = GradedModule({d - k: tuple(prefix + lab for lab in labs) for d, labs in conn.module.basis.items()})
    entries = {}
    for (i, j), x in conn.M.entries.items():
        # on E[1], M' = -(-1)^{|X|} X per homogeneous part; iterate k times
        y = x
        for _ in range(abs(k)):
            y = _degree_twist(y, lambda p: -1 if p % 2 == 0 else 1)
        entries[(prefix + i, prefix + j)] = y
    return ZConnection(conn.base, mod, MorphismElement(mod, mod, conn.alg, entries))


def shift_morphism(phi: MorphismElement, source: GradedModule, target: GradedModule, k: int = 1,
                   sprefix: str = "", tprefix: str = "") -> MorphismElement:
    """The same map viewed between shifted modules (entry X -> (-1)^{k|X|} X)."""
    entries = {}
    for (i, j), x in phi.entries.items():
        entries[(tprefix + i, sprefix + j)] = _parity_sign(x, k)
    return MorphismElement(source, target, phi.alg, entries)


@dataclass
class Cone:
    connection: ZConnection
    inclusion: MorphismElement      # target of phi -> cone
    projection: MorphismElement     # cone -> source[1]
    source_shift: ZConnection


def cone(phi: MorphismElement, source: ZConnection, target: ZConnection) -> Cone:
    """Cone of a closed degree-0 morphism: target + source[1], with phi in the corner."""
    if phi.degree() != 0 and phi:
        raise InputError("cone needs a degree-0 morphism")
    closed = d_hom(phi, source, target)
    if closed:
        k = min(closed.entries)
        raise StructureError(f"morphism is not closed: d_hom entry {k} = {closed.entries[k]}", witness=k)
    s1 = shift(source, 1, prefix="s.")
    t = target
    mod = t.module.direct_sum(s1.module)
    entries = dict(t.M.entries)
    entries.update(s1.M.entries)
    corner = shift_morphism(phi, s1.module, t.module, 1, sprefix="s.")
    entries.update(corner.entries)
    conn = ZConnection(t.base, mod, MorphismElement(mod, mod, t.alg, entries))
    inc = MorphismElement(t.module, mod, t.alg, {(e, e): t.alg.one() for e in t.module.labels()})
    proj = MorphismElement(mod, s1.module, t.alg, {(e, e): t.alg.one() for e in s1.module.labels()})
    return Cone(conn, inc, proj, s1)


def direct_sum(a: ZConnection, b: ZConnection) -> ZConnection:
    mod = a.module.direct_sum(b.module)
    entries = dict(a.M.entries)
    entries.update(b.M.entries)
    return ZConnection(a.base, mod, MorphismElement(mod, mod, a.alg, entries))


# ---------------------------------------------------------------------------
# homotopy equivalence via the degree-0 page


def _zero_page_matrix(conn: ZConnection, point: Mapping[str, Fraction], deg: int):
    """Rational matrix of E^0 from degree deg to deg+1 at a chart point."""
    src = conn.module.basis.get(deg, ())
    tgt = conn.module.basis.get(deg + 1, ())
    rows = linalg.zeros(len(tgt), len(src))
    E0 = conn.component(0)
    for (i, j), x in E0.entries.items():
        if j in src and i in tgt:
            val = x.evaluate(point)
            rows[tgt.index(i)][src.index(j)] = val.constant_term()
    return rows


def evaluation_points(chart: Sequence[str], count: int = 3) -> List[Dict[str, Fraction]]:
    pts = [{x: Fraction(0) for x in chart}]
    for k in range(1, count):
        pts.append({x: Fraction(k * (i + 2), i + 1 + k) for i, x in enumerate(chart)})
    return pts


def zero_page_cohomology(conn: ZConnection, point: Mapping[str, Fraction]) -> Dict[int, int]:
    dims = {}
    for deg in conn.module.degrees:
        n = conn.module.rank(deg)
        out = linalg.rank(_zero_page_matrix(conn, point, deg))
        inc = linalg.rank(_zero_page_matrix(conn, point, deg - 1))
        dims[deg] = n - out - inc
    return dims


def is_homotopy_equivalence(phi: MorphismElement, source: ZConnection, target: ZConnection,
                            points: Optional[Iterable[Mapping[str, Fraction]]] = None) -> bool:
    """phi^0 is a quasi-isomorphism of the degree-0 pages (tested via its cone).

    The cone of phi^0 is evaluated at a fixed set of rational chart points
    and must be acyclic at each of them.
    """
    C = cone(phi, source, target).connection
    chart_vars = [n for n in C.alg.chart]
    pts = list(points) if points is not None else evaluation_points(chart_vars)
    for p in pts:
        dims = zero_page_cohomology(C, p)
        if any(dims.values()):
            return False
    return True


# ---------------------------------------------------------------------------
# Chern-Weil


def power(phi: MorphismElement, k: int) -> MorphismElement:
    out = identity(phi.source, phi.alg)
    for _ in range(k):
        out = out * phi
    return out


def chern_form(conn: ZConnection, k: int) -> Elem:
    """Str(R^k)."""
    return supertrace(power(curvature(conn), k))


def pontryagin(conn: ZConnection, coefficients: Sequence[object]) -> Elem:
    """sum_k c_k Str(R^k) with c_k = f^(k)(0)/k!; stops once R^k vanishes."""
    R = curvature(conn)
    Rk = identity(conn.module, conn.alg)
    out = conn.alg.zero()
    for k, ck in enumerate(coefficients):
        if k:
            Rk = Rk * R
        if not Rk:
            break
        out = out + supertrace(Rk) * as_rational(ck)
    return out


def bianchi_defect(conn: ZConnection, i: int) -> MorphismElement:
    """[E, R^i]; zero for every connection."""
    return conn.bracket(power(curvature(conn), i))


def _with_parameter(conn: ZConnection, alg_t: Algebra, base_t: BaseCdga) -> MorphismElement:
    return MorphismElement(conn.module, conn.module, alg_t,
                           {k: v.to(alg_t) for k, v in conn.M.entries.items()})


def integrate_parameter(x: Elem, t: str, target: Algebra) -> Elem:
    """Integrate a polynomial in the even variable t over [0, 1]."""
    ti = x.alg.index[t]
    out: Dict[tuple, Fraction] = {}
    for m, c in x.terms.items():
        e = m[ti]
        key = m[:ti] + m[ti + 1:]
        out[key] = out.get(key, 0) + c / (e + 1)
    return Elem(x.alg.sub([n for n in x.alg.names if n != t]), out).to(target)


@dataclass
class Transgression:
    primitive: Elem
    difference: Elem
    certified: bool


def transgression(conn0: ZConnection, conn1: ZConnection, k: int, param: str = "tau") -> Transgression:
    """P with Str(R_1^k) - Str(R_0^k) = d P along E_t = E_0 + t (E_1 - E_0)."""
    if conn0.module != conn1.module or conn0.base.alg != conn1.base.alg:
        raise InputError("transgression needs connections on the same module and base")
    alg = conn0.alg
    if param in alg.index:
        raise InputError(f"parameter name {param!r} clashes with a variable")
    alg_t = alg.extend(chart=[param])
    d_t = Derivation(alg_t, 1, {n: conn0.base.d.value(n).to(alg_t) for n in alg.names})
    c = conn0.base.c.to(alg_t) if conn0.base.c is not None else None
    base_t = BaseCdga(alg_t, d_t, c)
    M0 = _with_parameter(conn0, alg_t, base_t)
    M1 = _with_parameter(conn1, alg_t, base_t)
    dM = M1 - M0
    tvar = alg_t.var(param)
    Mt = M0 + dM.scale(tvar)
    conn_t = ZConnection(base_t, conn0.module, Mt)
    Rt = curvature(conn_t)
    integrand = supertrace(dM * power(Rt, k - 1)) * k if k >= 1 else alg_t.zero()
    P = integrate_parameter(integrand, param, alg)
    diff = chern_form(conn1, k) - chern_form(conn0, k)
    return Transgression(P, diff, conn0.base.d.apply(P) == diff)


# ---------------------------------------------------------------------------
# Atiyah cocycle of a pair


@dataclass
class AtiyahResult:
    cocycle: MorphismElement          # normal-linear part of the curvature
    closed: bool
    restriction_ok: bool


def _normal_filter(x: Elem, normal: Sequence[str], keep: int) -> Elem:
    idx = [x.alg.index[n] for n in normal]
    return Elem(x.alg, {m: c for m, c in x.terms.items() if sum(m[i] for i in idx) == keep})


def _below(phi: MorphismElement, normal: Sequence[str], order: int) -> MorphismElement:
    """Keep terms of normal weight < order (reduction modulo I^order)."""
    idx = [phi.alg.index[n] for n in normal]
    return phi.map_entries(lambda x: Elem(x.alg, {m: c for m, c in x.terms.items()
                                                  if sum(m[i] for i in idx) < order}))


def atiyah_cocycle(conn_g: ZConnection, normal: Sequence[str],
                   conn_h: Optional[ZConnection] = None) -> AtiyahResult:
    """Atiyah cocycle of an extension of an h-connection to g.

    ``conn_g`` lives over O(g); ``normal`` names the generators of O(g) dual
    to the complement of h, so that iota^dual sets them to zero.  When
    ``conn_h`` is given, the extension must restrict to it.
    """
    alg = conn_g.alg
    for n in normal:
        if n not in alg.index:
            raise InputError(f"unknown normal generator {n!r}")
    restriction_ok = True
    if conn_h is not None:
        restricted = conn_g.M.map_entries(lambda x: x.set_zero(normal))
        target = MorphismElement(conn_h.module, conn_h.module, alg,
                                 {k: v.to(alg) for k, v in conn_h.M.entries.items()})
        restriction_ok = restricted == target
        if not restriction_ok:
            raise InputError("the extension does not restrict to the given h-connection")
    R = curvature(conn_g)
    if _below(R, normal, 1):
        raise InputError("restricted connection is not flat along h")
    alpha = R.map_entries(lambda x: _normal_filter(x, normal, 1))
    closed = not _below(conn_g.bracket(alpha), normal, 2)
    return AtiyahResult(alpha, closed, restriction_ok)


def atiyah_primitive(conn_a: ZConnection, conn_b: ZConnection, normal: Sequence[str]):
    """omega = (E_b - E_a) mod I^2 with alpha_b - alpha_a = [E_a, omega] mod I^2.

    Returns (omega, certified).
    """
    if conn_a.module != conn_b.module:
        raise InputError("extensions of different modules")
    B = conn_b.M - conn_a.M
    if _below(B, normal, 1):
        raise InputError("the two extensions differ along h")
    omega = _below(B, normal, 2)
    a = atiyah_cocycle(conn_a, normal).cocycle
    b = atiyah_cocycle(conn_b, normal).cocycle
    lhs = b - a
    rhs = _below(conn_a.bracket(omega), normal, 2)
    return omega, lhs == rhs


def gauge(conn: ZConnection, g: MorphismElement, g_inv: MorphismElement) -> ZConnection:
    """g o E o g^-1 for a degree-0 automorphism g (inverse supplied and checked)."""
    one = identity(conn.module, conn.alg)
    if g * g_inv != one or g_inv * g != one:
        raise InputError("g_inv is not the inverse of g")
    M = g * conn.base.bracket_d(g_inv) + g * conn.M * g_inv
    return ZConnection(conn.base, conn.module, M)


def unipotent_inverse(N: MorphismElement) -> MorphismElement:
    """(1 + N)^-1 for nilpotent N of degree 0."""
    one = identity(N.source, N.alg)
    out = one
    term = one
    for _ in range(len(N.source.labels()) + 1 + N.alg.nvars):
        term = -(term * N)
        if not term:
            break
        out = out + term
    else:
        raise InputError("N is not nilpotent")
    return out
