"""Infinity-local systems on finite simplicial sets with values in complexes.

A local system assigns to each vertex x a finite-dimensional graded
Q-space F_x with differential f(x), and to every nondegenerate k-simplex
sigma (k >= 1) a map f(sigma): F(sigma_k) -> F(sigma_0) of degree 1 - k.
On degenerate simplices the values are forced: an edge s_0(x) carries the
identity, every other degenerate simplex carries 0.

Cochains between local systems (the dg hom spaces) carry the operations

    (phi cup psi)(sigma) = sum_t (-1)^(t |psi|) phi(front_t sigma) psi(back_t sigma)
    dhat(phi)(sigma)     = sum_{0<l<k} (-1)^(l + |phi|) phi(d_l sigma)
    D(phi)               = dhat(phi) + G cup phi - (-1)^|phi| phi cup F

and the Maurer-Cartan equation is dhat f + f cup f = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product as iproduct
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .graded import InputError, StructureError
from .simplicial import SimplicialSet, simplex_operator

Simplex = Hashable


@dataclass(frozen=True)
class GradedSpace:
    """Q^n with a degree attached to each basis vector."""

    degrees: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def shift(self, i: int) -> "GradedSpace":
        return GradedSpace(tuple(d - i for d in self.degrees))

    def __add__(self, other: "GradedSpace") -> "GradedSpace":
        return GradedSpace(self.degrees + other.degrees)


@lru_cache(maxsize=None)
def _zero_matrix(m: int, n: int) -> sp.ImmutableMatrix:
    return sp.ImmutableMatrix.zeros(m, n)


def zeros(tgt: GradedSpace, src: GradedSpace) -> sp.ImmutableMatrix:
    return _zero_matrix(tgt.dim, src.dim)


def degree_violations(M: sp.Matrix, src: GradedSpace, tgt: GradedSpace, p: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(tgt.dim) for j in range(src.dim)
            if M[i, j] != 0 and tgt.degrees[i] - src.degrees[j] != p]


def as_matrix(rows, shape=None) -> sp.Matrix:
    if isinstance(rows, sp.MatrixBase):
        if shape is not None and rows.shape != shape:
            raise InputError(f"matrix of shape {rows.shape}, expected {shape}")
        return rows
    M = sp.Matrix([[sp.Rational(str(v)) if isinstance(v, str) else sp.Rational(v) for v in r] for r in rows])
    if shape is not None and M.shape != shape:
        if M.shape == (0, 0) or 0 in shape:
            return sp.zeros(*shape)
        raise InputError(f"matrix of shape {M.shape}, expected {shape}")
    return M


def vertex(K: SimplicialSet, x: Simplex, i: int) -> Simplex:
    return simplex_operator(K, x, K.level_of[x], [i])


def _front_back(K: SimplicialSet) -> Dict:
    # simplicial sets are immutable, so the face tables can live on the object
    cache = K.__dict__.get("_front_back")
    if cache is None:
        cache = K.__dict__["_front_back"] = {}
    return cache


def front(K: SimplicialSet, x: Simplex, t: int) -> Simplex:
    cache = _front_back(K)
    key = ("f", x, t)
    if key not in cache:
        cache[key] = simplex_operator(K, x, K.level_of[x], list(range(t + 1)))
    return cache[key]


def back(K: SimplicialSet, x: Simplex, t: int) -> Simplex:
    cache = _front_back(K)
    key = ("b", x, t)
    if key not in cache:
        n = K.level_of[x]
        cache[key] = simplex_operator(K, x, n, list(range(t, n + 1)))
    return cache[key]


class InftyLocalSystem:
    """(F, f) on a finite simplicial set; Maurer-Cartan is checked separately."""

    def __init__(self, K: SimplicialSet, spaces: Mapping[Simplex, GradedSpace],
                 values: Mapping[Simplex, object], top: Optional[int] = None):
        self.K = K
        self.top = K.top if top is None else top
        self.spaces = {}
        for x in K.simplices(0):
            if x not in spaces:
                raise InputError(f"no complex at vertex {x!r}")
            sp_ = spaces[x]
            self.spaces[x] = sp_ if isinstance(sp_, GradedSpace) else GradedSpace(tuple(sp_))
        self.values: Dict[Simplex, sp.Matrix] = {}
        for x, M in values.items():
            if x not in K.level_of:
                raise InputError(f"{x!r} is not a simplex of the base")
            if K.is_degenerate(x):
                raise InputError(f"values on degenerate simplex {x!r} are forced")
            k = K.level_of[x]
            src, tgt = self.space_at(vertex(K, x, k) if k else x), self.space_at(vertex(K, x, 0) if k else x)
            M = as_matrix(M, (tgt.dim, src.dim))
            bad = degree_violations(M, src, tgt, 1 - k)
            if bad:
                raise InputError(f"value on {x!r} is not of degree {1 - k}: entries {bad[:3]}")
            self.values[x] = M

    def space_at(self, v: Simplex) -> GradedSpace:
        return self.spaces[v]

    def source_space(self, x: Simplex) -> GradedSpace:
        k = self.K.level_of[x]
        return self.spaces[vertex(self.K, x, k) if k else x]

    def target_space(self, x: Simplex) -> GradedSpace:
        return self.spaces[vertex(self.K, x, 0) if self.K.level_of[x] else x]

    def __call__(self, x: Simplex) -> sp.Matrix:
        K = self.K
        tgt, src = self.target_space(x), self.source_space(x)
        if not K.is_degenerate(x):
            return self.values.get(x, zeros(tgt, src))
        base, word = K.normal_form(x)
        if K.level_of[x] == 1 and word == (0,):
            return sp.eye(src.dim)
        return zeros(tgt, src)

    def differential(self, v: Simplex) -> sp.Matrix:
        return self(v)

    def as_cochain(self) -> "LocMorphism":
        """The structure f viewed as a degree-1 cochain from the system to itself."""
        return LocMorphism(self, self, 1, _StructureValues(self))

    def __eq__(self, other):
        if not isinstance(other, InftyLocalSystem) or other.K is not self.K or other.spaces != self.spaces:
            return False
        for n in range(self.top + 1):
            for x in self.K.nondegenerate(n):
                if self(x) != other(x):
                    return False
        return True


class _StructureValues(dict):
    def __init__(self, L: InftyLocalSystem):
        super().__init__()
        self.L = L

    def get(self, x, default=None):
        return self.L(x)

    def __getitem__(self, x):
        return self.L(x)


class LocMorphism:
    """Degree-p cochain F -> G: maps F(sigma_k) -> G(sigma_0) of degree p - k.

    Values on degenerate simplices are 0.
    """

    def __init__(self, source: InftyLocalSystem, target: InftyLocalSystem, degree: int,
                 values: Mapping[Simplex, object], check: bool = True):
        if source.K is not target.K:
            raise InputError("local systems live on different base simplicial sets")
        self.source, self.target, self.degree = source, target, int(degree)
        self.K = source.K
        if isinstance(values, _StructureValues):
            self.values = values
            return
        self.values = {}
        for x, M in values.items():
            if self.K.is_degenerate(x):
                raise InputError(f"cochains vanish on degenerate simplex {x!r}")
            k = self.K.level_of[x]
            src, tgt = self.source.source_space(x), self.target.target_space(x)
            M = as_matrix(M, (tgt.dim, src.dim))
            if check:
                bad = degree_violations(M, src, tgt, self.degree - k)
                if bad:
                    raise InputError(f"component on {x!r} is not of degree {self.degree - k}")
            self.values[x] = M

    def __call__(self, x: Simplex) -> sp.Matrix:
        if isinstance(self.values, _StructureValues):
            return self.values[x]
        tgt, src = self.target.target_space(x), self.source.source_space(x)
        if self.K.is_degenerate(x):
            return zeros(tgt, src)
        return self.values.get(x, zeros(tgt, src))

    def simplices(self) -> List[Simplex]:
        return [x for n in range(self.source.top + 1) for x in self.K.nondegenerate(n)]

    def _combine(self, other: "LocMorphism", a, b) -> "LocMorphism":
        self._same_type(other)
        return LocMorphism(self.source, self.target, self.degree,
                           {x: _lin(a, self(x)) + _lin(b, other(x)) for x in self.simplices()}, check=False)

    def _same_type(self, other):
        if (other.source is not self.source or other.target is not self.target
                or other.degree != self.degree):
            raise InputError("cochains of different type")

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def scale(self, c) -> "LocMorphism":
        return LocMorphism(self.source, self.target, self.degree,
                           {x: _lin(sp.Rational(c), self(x)) for x in self.simplices()}, check=False)

    def is_zero(self) -> bool:
        return all(self(x).is_zero_matrix for x in self.simplices())

    def nonzero(self) -> Dict[Simplex, sp.Matrix]:
        return {x: self(x) for x in self.simplices() if not self(x).is_zero_matrix}

    def __eq__(self, other):
        if not isinstance(other, LocMorphism):
            return NotImplemented
        try:
            self._same_type(other)
        except InputError:
            return False
        return all(self(x) == other(x) for x in self.simplices())


def _lin(c, M):
    if c == 1:
        return M
    if c == -1:
        return -M
    return c * M


def identity(L: InftyLocalSystem) -> LocMorphism:
    return LocMorphism(L, L, 0, {v: sp.eye(L.spaces[v].dim) for v in L.K.simplices(0)})


def cup(phi: LocMorphism, psi: LocMorphism) -> LocMorphism:
    """phi cup psi for psi: F -> G, phi: G -> H; the composite in the dg category."""
    if psi.target is not phi.source:
        raise InputError("cup needs target(psi) = source(phi)")
    K = phi.K
    out = {}
    for x in psi.simplices():
        k = K.level_of[x]
        acc = zeros(phi.target.target_space(x), psi.source.source_space(x))
        for t in range(k + 1):
            a, b = phi(front(K, x, t)), psi(back(K, x, t))
            if a.is_zero_matrix or b.is_zero_matrix:
                continue
            prod = a * b
            acc = acc - prod if (t * psi.degree) % 2 else acc + prod
        out[x] = acc
    return LocMorphism(psi.source, phi.target, phi.degree + psi.degree, out, check=False)


def dhat(phi: LocMorphism) -> LocMorphism:
    K = phi.K
    out = {}
    for x in phi.simplices():
        k = K.level_of[x]
        acc = zeros(phi.target.target_space(x), phi.source.source_space(x))
        for l in range(1, k):
            sign = -1 if (l + phi.degree) % 2 else 1
            acc += sign * phi(K.face(x, l))
        out[x] = acc
    return LocMorphism(phi.source, phi.target, phi.degree + 1, out, check=False)


def D(phi: LocMorphism) -> LocMorphism:
    """Differential of the dg hom space."""
    F, G = phi.source.as_cochain(), phi.target.as_cochain()
    sign = -1 if phi.degree % 2 else 1
    return dhat(phi) + cup(G, phi) - cup(phi, F).scale(sign)


def mc_residual(L: InftyLocalSystem) -> Dict[Simplex, sp.Matrix]:
    """Nonzero values of dhat f + f cup f on nondegenerate simplices."""
    f = L.as_cochain()
    return (dhat(f) + cup(f, f)).nonzero()


@dataclass
class MCReport:
    residual: Dict[Simplex, sp.Matrix]

    @property
    def passed(self) -> bool:
        return not self.residual

    def witness(self):
        if not self.residual:
            return None
        return min(self.residual, key=repr)


def mc_check(L: InftyLocalSystem) -> MCReport:
    return MCReport(mc_residual(L))


def require_mc(L: InftyLocalSystem) -> InftyLocalSystem:
    rep = mc_check(L)
    if not rep.passed:
        w = rep.witness()
        raise StructureError(f"Maurer-Cartan equation fails on {w!r}", witness=(w, rep.residual[w]))
    return L


# ---------------------------------------------------------------------------
# shift and cone


def shift(L: InftyLocalSystem, i: int) -> InftyLocalSystem:
    """F[i]: degrees drop by i and the value on a k-simplex gets (-1)^(i(k-1))."""
    K = L.K
    spaces = {v: s.shift(i) for v, s in L.spaces.items()}
    vals = {}
    for n in range(L.top + 1):
        for x in K.nondegenerate(n):
            sign = -1 if (i * (n - 1)) % 2 else 1
            M = L(x)
            if not M.is_zero_matrix:
                vals[x] = sign * M
    return InftyLocalSystem(K, spaces, vals, L.top)


def _block(a: sp.Matrix, b: sp.Matrix, c: sp.Matrix, d: sp.Matrix) -> sp.Matrix:
    rows, cols = a.rows + c.rows, a.cols + b.cols
    M = sp.zeros(rows, cols)
    for src, r0, c0 in ((a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)):
        for i in range(src.rows):
            for j in range(src.cols):
                if src[i, j] != 0:
                    M[r0 + i, c0 + j] = src[i, j]
    return M


def cone(phi: LocMorphism, check: bool = True) -> InftyLocalSystem:
    """Cone of a closed degree-0 cochain phi: F -> G, on F[1] + G.

    The value on a k-simplex is [[F[1](sigma), 0], [(-1)^k phi(sigma), G(sigma)]].
    Raises StructureError with the residual D(phi) when phi is not closed.
    """
    if phi.degree != 0:
        raise InputError("cone needs a degree-0 cochain")
    if check:
        Dphi = D(phi).nonzero()
        if Dphi:
            w = min(Dphi, key=repr)
            raise StructureError(f"cochain is not closed: D(phi) is nonzero on {w!r}", witness=(w, Dphi[w]))
    F, G = phi.source, phi.target
    F1 = shift(F, 1)
    K = F.K
    spaces = {v: F1.spaces[v] + G.spaces[v] for v in K.simplices(0)}
    vals = {}
    for n in range(F.top + 1):
        for x in K.nondegenerate(n):
            sign = -1 if n % 2 else 1
            a, d = F1(x), G(x)
            c = sign * phi(x)
            vals[x] = _block(a, zeros(F1.target_space(x), G.source_space(x)), c, d)
    return InftyLocalSystem(K, spaces, vals, F.top)


def direct_sum(L1: InftyLocalSystem, L2: InftyLocalSystem) -> InftyLocalSystem:
    K = L1.K
    spaces = {v: L1.spaces[v] + L2.spaces[v] for v in K.simplices(0)}
    vals = {}
    for n in range(L1.top + 1):
        for x in K.nondegenerate(n):
            a, d = L1(x), L2(x)
            vals[x] = _block(a, zeros(L1.target_space(x), L2.source_space(x)),
                             zeros(L2.target_space(x), L1.source_space(x)), d)
    return InftyLocalSystem(K, spaces, vals, L1.top)


# ---------------------------------------------------------------------------
# vertexwise cohomology


def _rank(M: sp.Matrix) -> int:
    return 0 if 0 in M.shape else M.rank()


def vertex_cohomology(L: InftyLocalSystem, v: Simplex) -> Dict[int, int]:
    """Dimensions of H^n(F_v)."""
    S = L.spaces[v]
    d = L(v)
    out = {}
    for n in sorted(set(S.degrees)):
        idx = [i for i, e in enumerate(S.degrees) if e == n]
        nxt = [i for i, e in enumerate(S.degrees) if e == n + 1]
        prv = [i for i, e in enumerate(S.degrees) if e == n - 1]
        out_rank = _rank(d.extract(nxt, idx)) if nxt and idx else 0
        in_rank = _rank(d.extract(idx, prv)) if idx and prv else 0
        h = len(idx) - out_rank - in_rank
        if h:
            out[n] = h
    return out


def _is_acyclic(d: sp.Matrix) -> bool:
    return d.rows == 0 or 2 * _rank(d) == d.rows


def is_homotopy_equivalence(phi: LocMorphism, check: bool = True) -> bool:
    """phi closed of degree 0 with phi(x): F_x -> G_x a quasi-isomorphism at every vertex."""
    if phi.degree != 0:
        return False
    if check and not D(phi).is_zero():
        raise StructureError("cochain is not closed")
    F, G = phi.source, phi.target
    for v in F.K.simplices(0):
        dF, dG, p = F(v), G(v), phi(v)
        # acyclicity of the vertex cone F_v[1] + G_v
        c = _block(-dF, zeros(F.spaces[v], G.spaces[v]), p, dG)
        if not _is_acyclic(c):
            return False
    return True


def e0_differential(phi: LocMorphism) -> LocMorphism:
    """d_0(phi) = d_G phi - (-1)^|phi| phi d_F, simplex by simplex."""
    K = phi.K
    out = {}
    for x in phi.simplices():
        k = K.level_of[x]
        dG = phi.target(vertex(K, x, 0) if k else x)
        dF = phi.source(vertex(K, x, k) if k else x)
        sign = -1 if (phi.degree - k) % 2 else 1
        out[x] = dG * phi(x) - sign * phi(x) * dF
    return LocMorphism(phi.source, phi.target, phi.degree + 1, out, check=False)


def cohomology_map(dS: sp.Matrix, S: GradedSpace, dT: sp.Matrix, T: GradedSpace, M: sp.Matrix, n: int,
                   shift_by: int = 0) -> sp.Matrix:
    """Matrix of H^n(S) -> H^(n+shift_by)(T) induced by a chain map M, in chosen bases."""
    def basis(d, space, deg):
        idx = [i for i, e in enumerate(space.degrees) if e == deg]
        nxt = [i for i, e in enumerate(space.degrees) if e == deg + 1]
        prv = [i for i, e in enumerate(space.degrees) if e == deg - 1]
        Z = d.extract(nxt, idx).nullspace() if nxt else [sp.eye(len(idx))[:, j] for j in range(len(idx))]
        B = d.extract(idx, prv) if prv else sp.zeros(len(idx), 0)
        return idx, Z, B

    si, SZ, SB = basis(dS, S, n)
    ti, TZ, TB = basis(dT, T, n + shift_by)
    # complement of B in Z for the source
    reps = []
    cur = SB
    for z in SZ:
        trial = cur.row_join(z) if cur.cols else z
        if _rank(trial) > _rank(cur) if cur.cols else not z.is_zero_matrix:
            reps.append(z)
            cur = trial
    tcur = TB
    treps = []
    for z in TZ:
        trial = tcur.row_join(z) if tcur.cols else z
        if (_rank(trial) > _rank(tcur)) if tcur.cols else not z.is_zero_matrix:
            treps.append(z)
            tcur = trial
    cols = []
    for z in reps:
        full = sp.zeros(S.dim, 1)
        for a, i in enumerate(si):
            full[i] = z[a]
        img = (M * full).extract(ti, [0]) if ti else sp.zeros(0, 1)
        # express img in the basis treps modulo TB
        A = (TB.row_join(sp.Matrix.hstack(*treps)) if TB.cols else sp.Matrix.hstack(*treps)) if treps else TB
        if not treps:
            cols.append(sp.zeros(0, 1))
            continue
        sol, params = A.gauss_jordan_solve(img)
        sol = sol.subs({p: 0 for p in params})
        cols.append(sol[TB.cols:, :])
    if not cols:
        return sp.zeros(len(treps), 0)
    return sp.Matrix.hstack(*cols)


def e1_composition_defects(L: InftyLocalSystem) -> List[Simplex]:
    """2-simplices where H(f(01)) H(f(12)) differs from H(f(02)) on cohomology."""
    K = L.K
    bad = []
    if L.top < 2:
        return bad
    for x in K.nondegenerate(2) + [y for y in K.simplices(2) if K.is_degenerate(y)]:
        v0, v1, v2 = (vertex(K, x, i) for i in range(3))
        e01, e12, e02 = K.face(x, 2), K.face(x, 0), K.face(x, 1)
        for n in sorted(set(L.spaces[v2].degrees)):
            H12 = cohomology_map(L(v2), L.spaces[v2], L(v1), L.spaces[v1], L(e12), n)
            H01 = cohomology_map(L(v1), L.spaces[v1], L(v0), L.spaces[v0], L(e01), n)
            H02 = cohomology_map(L(v2), L.spaces[v2], L(v0), L.spaces[v0], L(e02), n)
            lhs = H01 * H12 if H01.cols == H12.rows else None
            if lhs is None or lhs != H02:
                bad.append(x)
                break
    return bad


# ---------------------------------------------------------------------------
# dg nerve samples


@dataclass
class DgCategory:
    """Small dg category with finite-dimensional graded hom spaces.

    ``hom[(a, b)]`` lists basis names of Hom(b, a) (maps from b to a) with
    their degrees; ``compose[(u, v)]`` is the vector u o v (v first);
    ``d[u]`` is the differential of a basis element; ``identity[a]`` names
    the unit of a.  Vectors are dicts basis name -> rational.
    """

    objects: List[Hashable]
    hom: Dict[Tuple[Hashable, Hashable], Dict[str, int]]
    compose: Dict[Tuple[str, str], Dict[str, object]]
    d: Dict[str, Dict[str, object]] = field(default_factory=dict)
    identity: Dict[Hashable, str] = field(default_factory=dict)

    def basis_of(self, a, b, degree: int) -> List[str]:
        return [u for u, e in self.hom.get((a, b), {}).items() if e == degree]

    def comp(self, u: Mapping[str, object], v: Mapping[str, object]) -> Dict[str, sp.Rational]:
        out: Dict[str, sp.Rational] = {}
        for p, cp in u.items():
            for q, cq in v.items():
                for r, cr in self.compose.get((p, q), {}).items():
                    out[r] = out.get(r, 0) + sp.Rational(cp) * sp.Rational(cq) * sp.Rational(cr)
        return {k: c for k, c in out.items() if c != 0}

    def diff(self, u: Mapping[str, object]) -> Dict[str, sp.Rational]:
        out: Dict[str, sp.Rational] = {}
        for p, cp in u.items():
            for r, cr in self.d.get(p, {}).items():
                out[r] = out.get(r, 0) + sp.Rational(cp) * sp.Rational(cr)
        return {k: c for k, c in out.items() if c != 0}


def _vec_add(a, b, s=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + s * v
    return {k: v for k, v in out.items() if v != 0}


def dg_mc_defect(comps: Mapping[Tuple[int, ...], Mapping], I: Tuple[int, ...], diff, comp) -> Dict:
    """d f_I + sum_l (-1)^(l+1) f_{I - i_l} + sum_t (-1)^t f_{i_0..i_t} o f_{i_t..i_m}."""
    m = len(I) - 1
    acc = dict(diff(comps[I]))
    for l in range(1, m):
        acc = _vec_add(acc, comps[I[:l] + I[l + 1:]], 1 if l % 2 else -1)
    for t in range(1, m):
        acc = _vec_add(acc, comp(comps[I[:t + 1]], comps[I[t:]]), -1 if t % 2 else 1)
    return acc


def _subsets(n: int):
    return [I for m in range(2, n + 2) for I in combinations(range(n + 1), m)]


def _freeze(v: Mapping) -> Tuple:
    return tuple(sorted((k, sp.Rational(c)) for k, c in v.items() if c != 0))


def dg_nerve_sample(C: DgCategory, top: int = 3) -> SimplicialSet:
    """Simplices of the dg nerve of C whose components are basis vectors.

    A k-simplex is (objects, components) with a component f_I in
    Hom^{2-|I|}(X_{max I}, X_{min I}) for each I of size >= 2, solving the
    Maurer-Cartan-type equation of :func:`dg_mc_defect`.  Components range
    over basis elements of the required degree (0 if that space is zero, the
    identity on s_0-type edges); degenerate simplices are added by closure.
    """
    if top > 3:
        raise InputError("dg nerve samples are limited to level 3")
    objs = list(C.objects)
    levels: Dict[int, List] = {n: [] for n in range(top + 1)}

    def cands(a, b, deg):
        names = C.basis_of(a, b, deg)
        out = [{u: 1} for u in names]
        return out if out else [{}]

    for n in range(top + 1):
        seen = set()
        for X in iproduct(objs, repeat=n + 1):
            subs = _subsets(n)
            found = []

            def rec(k, comps):
                if k == len(subs):
                    found.append(dict(comps))
                    return
                I = subs[k]
                for c in cands(X[I[0]], X[I[-1]], 2 - len(I)):
                    comps[I] = c
                    # equation for I involves only I and its subsets
                    if len(I) > 2 or C.diff(c) == {}:
                        if not dg_mc_defect(comps, I, C.diff, C.comp):
                            rec(k + 1, comps)
                    del comps[I]

            rec(0, {})
            for comps in found:
                key = (tuple(X), tuple((I, _freeze(v)) for I, v in sorted(comps.items())))
                if key not in seen:
                    seen.add(key)
                    levels[n].append(key)
    # closure under degeneracies
    return _dg_simplicial_set(C, levels, top)


def _dg_faces(key, i):
    X, comps = key
    n = len(X) - 1
    keep = [v for v in range(n + 1) if v != i]
    ren = {v: j for j, v in enumerate(keep)}
    newX = tuple(X[v] for v in keep)
    new = tuple((tuple(ren[v] for v in I), c) for I, c in comps if i not in I)
    return (newX, tuple(sorted(new)))


def _dg_degen(C: DgCategory, key, j):
    X, comps = key
    n = len(X) - 1
    newX = X[:j + 1] + X[j:]
    # theta: [n+1] -> [n] repeating j
    theta = list(range(j + 1)) + list(range(j, n + 1))
    cmap = dict(comps)
    out = []
    for I in _subsets(n + 1):
        img = [theta[v] for v in I]
        if len(set(img)) < len(img):
            if I == (j, j + 1):
                c = _freeze({C.identity[X[j]]: 1})
            else:
                c = ()
        else:
            c = cmap[tuple(img)]
        out.append((I, c))
    return (newX, tuple(sorted(out)))


def _dg_simplicial_set(C: DgCategory, levels, top) -> SimplicialSet:
    lv = {n: list(levels[n]) for n in range(top + 1)}
    present = {n: set(lv[n]) for n in lv}
    for n in range(top):
        for key in list(lv[n]):
            for j in range(n + 1):
                y = _dg_degen(C, key, j)
                if y not in present[n + 1]:
                    present[n + 1].add(y)
                    lv[n + 1].append(y)
    faces, degens = {}, {}
    for n in range(top + 1):
        for key in lv[n]:
            if n:
                faces[key] = [_dg_faces(key, i) for i in range(n + 1)]
            if n < top:
                degens[key] = [_dg_degen(C, key, j) for j in range(n + 1)]
    return SimplicialSet(lv, faces, degens, top, name="dg-nerve")


def to_dg_simplices(L: InftyLocalSystem) -> Dict[Simplex, Tuple]:
    """The simplicial map K -> N_dg(Ch) of a local system, simplex by simplex.

    The image of sigma is (objects, {I: f(sigma_I)}) where the objects are
    the vertex complexes (space, differential) and sigma_I is the face
    spanned by I.  Each image is checked against the dg Maurer-Cartan
    equation in the dg category of complexes, and faces of images are
    checked to be images of faces.
    """
    K = L.K
    out = {}
    for n in range(L.top + 1):
        for x in K.simplices(n):
            verts = tuple(vertex(K, x, i) for i in range(n + 1)) if n else (x,)
            objects = tuple((L.spaces[v], L(v)) for v in verts)
            comps = {I: L(simplex_operator(K, x, n, list(I))) for I in _subsets(n)}
            for I in _subsets(n):
                if _ch_mc_defect(objects, comps, I):
                    raise StructureError(f"dg Maurer-Cartan equation fails on {x!r} at {I}", witness=(x, I))
            out[x] = (objects, comps)
    for x, (objects, comps) in out.items():
        n = K.level_of[x]
        for i in range(n + 1 if n else 0):
            keep = [v for v in range(n + 1) if v != i]
            ren = {v: j for j, v in enumerate(keep)}
            restricted = {tuple(ren[v] for v in I): M for I, M in comps.items() if i not in I}
            fo, fc = out[K.face(x, i)]
            if restricted != fc or tuple(objects[v] for v in keep) != fo:
                raise StructureError(f"dg nerve image is not simplicial at {x!r}, face {i}")
    return out


def _ch_mc_defect(objects, comps, I) -> bool:
    m = len(I) - 1
    da, db = objects[I[0]][1], objects[I[-1]][1]
    f = comps[I]
    sign = -1 if (1 - m) % 2 else 1
    acc = da * f - sign * f * db
    for l in range(1, m):
        acc += (1 if l % 2 else -1) * comps[I[:l] + I[l + 1:]]
    for t in range(1, m):
        acc += (-1 if t % 2 else 1) * comps[I[:t + 1]] * comps[I[t:]]
    return not acc.is_zero_matrix


def from_dg_simplices(K: SimplicialSet, images: Mapping[Simplex, Tuple],
                      top: Optional[int] = None) -> InftyLocalSystem:
    """Read a local system back from the images of the nondegenerate simplices."""
    top = K.top if top is None else top
    spaces, vals = {}, {}
    for v in K.simplices(0):
        (space, d), = images[v][0]
        spaces[v] = space
        vals[v] = d
    for n in range(1, top + 1):
        for x in K.nondegenerate(n):
            M = images[x][1][tuple(range(n + 1))]
            if not M.is_zero_matrix:
                vals[x] = M
    return InftyLocalSystem(K, spaces, vals, top)
