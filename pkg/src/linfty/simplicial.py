"""Finite simplicial sets truncated at a top level.

A :class:`SimplicialSet` stores every simplex (degenerate or not) up to a
level ``top`` together with face and degeneracy tables.  Nondegenerate
simplices and Eilenberg-Zilber normal forms are derived from the tables.
Standard simplices, horns and boundaries are the sub-objects of the nerve of
the ordinal [n] (weakly increasing vertex tuples); nerves of finite
categories use simplices (objects, morphisms).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .graded import InputError, StructureError

Simplex = Hashable


class SimplicialSet:
    """Levels 0..top with faces d_i and degeneracies s_j as explicit tables."""

    def __init__(self, levels: Mapping[int, Sequence[Simplex]],
                 faces: Mapping[Simplex, Sequence[Simplex]],
                 degens: Mapping[Simplex, Sequence[Simplex]], top: int, check: bool = True,
                 name: str = ""):
        self.top = int(top)
        self.levels = {n: list(levels.get(n, ())) for n in range(self.top + 1)}
        self.faces = {x: tuple(f) for x, f in faces.items()}
        self.degens = {x: tuple(s) for x, s in degens.items()}
        self.name = name
        self.level_of: Dict[Simplex, int] = {}
        for n, xs in self.levels.items():
            for x in xs:
                if x in self.level_of:
                    raise InputError(f"simplex {x!r} listed twice")
                self.level_of[x] = n
        degenerate = set()
        for n in range(self.top):
            for x in self.levels[n]:
                degenerate.update(self.degens.get(x, ()))
        self._degenerate = degenerate
        self._face_index: Dict[int, Dict[tuple, List[Simplex]]] = {}
        if check:
            bad = self.check()
            if bad:
                raise StructureError(f"simplicial identities fail: {bad[:3]}", witness=bad)

    def __repr__(self):
        sizes = [len(self.levels[n]) for n in range(self.top + 1)]
        return f"SimplicialSet({self.name or '?'}; sizes={sizes})"

    # -- basic access
    def face(self, x: Simplex, i: int) -> Simplex:
        return self.faces[x][i]

    def degen(self, x: Simplex, j: int) -> Simplex:
        return self.degens[x][j]

    def simplices(self, n: int) -> List[Simplex]:
        if n > self.top:
            raise InputError(f"level {n} exceeds the stored top level {self.top}")
        return self.levels.get(n, [])

    def nondegenerate(self, n: int) -> List[Simplex]:
        return [x for x in self.simplices(n) if x not in self._degenerate]

    def is_degenerate(self, x: Simplex) -> bool:
        return x in self._degenerate

    def dimension(self) -> int:
        """Largest level carrying a nondegenerate simplex."""
        return max((n for n in range(self.top + 1) if self.nondegenerate(n)), default=-1)

    def normal_form(self, x: Simplex) -> Tuple[Simplex, Tuple[int, ...]]:
        """(nondegenerate base, strictly decreasing degeneracy word)."""
        n = self.level_of[x]
        if x not in self._degenerate:
            return x, ()
        for y in self.levels[n - 1]:
            for j, z in enumerate(self.degens.get(y, ())):
                if z == x:
                    base, word = self.normal_form(y)
                    return base, insert_degeneracy(j, word)
        raise StructureError(f"degenerate simplex {x!r} without a preimage")

    def faces_index(self, n: int) -> Dict[tuple, List[Simplex]]:
        if n not in self._face_index:
            idx: Dict[tuple, List[Simplex]] = {}
            for x in self.simplices(n):
                idx.setdefault(self.faces.get(x, ()), []).append(x)
            self._face_index[n] = idx
        return self._face_index[n]

    def check(self) -> List[tuple]:
        """Violations of the simplicial identities on stored simplices."""
        bad = []
        for n in range(self.top + 1):
            for x in self.levels[n]:
                fs = self.faces.get(x, ())
                if len(fs) != (n + 1 if n else 0):
                    bad.append(("face count", x))
                    continue
                for f in fs:
                    if self.level_of.get(f) != n - 1:
                        bad.append(("face level", x))
                if n >= 2:
                    for i in range(n + 1):
                        for j in range(i + 1, n + 1):
                            if self.face(fs[j], i) != self.face(fs[i], j - 1):
                                bad.append(("d_i d_j", x, i, j))
                if n < self.top:
                    ss = self.degens.get(x, ())
                    if len(ss) != n + 1:
                        bad.append(("degeneracy count", x))
                        continue
                    for j in range(n + 1):
                        y = ss[j]
                        if self.level_of.get(y) != n + 1:
                            bad.append(("degeneracy level", x, j))
                            continue
                        for i in range(n + 2):
                            d = self.face(y, i)
                            if i == j or i == j + 1:
                                want = x
                            elif i < j:
                                want = self.degen(self.face(x, i), j - 1) if n >= 1 else None
                            else:
                                want = self.degen(self.face(x, i - 1), j) if n >= 1 else None
                            if d != want:
                                bad.append(("d_i s_j", x, i, j))
                        if n + 1 < self.top:
                            for i in range(j + 1):
                                if self.degen(self.degen(x, j), i) != self.degen(self.degen(x, i), j + 1):
                                    bad.append(("s_i s_j", x, i, j))
        return bad


def insert_degeneracy(i: int, word: Tuple[int, ...]) -> Tuple[int, ...]:
    """Normal form of s_i o s_word (word strictly decreasing, outermost first)."""
    if not word or i > word[0]:
        return (i,) + word
    return (word[0] + 1,) + insert_degeneracy(i, word[1:])


# ---------------------------------------------------------------------------
# finite categories and their nerves


class FiniteCategory:
    """Objects, named morphisms with source/target, identities and composition.

    ``compose[(g, f)]`` is g o f for f: a -> b, g: b -> c.
    """

    def __init__(self, objects: Sequence[Hashable], morphisms: Mapping[Hashable, Tuple[Hashable, Hashable]],
                 identities: Mapping[Hashable, Hashable], compose: Mapping[Tuple[Hashable, Hashable], Hashable],
                 check: bool = True):
        self.objects = list(objects)
        self.morphisms = dict(morphisms)
        self.identities = dict(identities)
        self.compose = dict(compose)
        if check:
            bad = self.check()
            if bad:
                raise StructureError(f"category axioms fail: {bad[:3]}", witness=bad)

    def src(self, f):
        return self.morphisms[f][0]

    def tgt(self, f):
        return self.morphisms[f][1]

    def hom(self, a, b) -> List[Hashable]:
        return [f for f, (s, t) in self.morphisms.items() if s == a and t == b]

    def check(self) -> List[tuple]:
        bad = []
        for a in self.objects:
            i = self.identities.get(a)
            if i is None or self.morphisms.get(i) != (a, a):
                bad.append(("identity", a))
        for f, (a, b) in self.morphisms.items():
            for g in [g for g, (s, _) in self.morphisms.items() if s == b]:
                h = self.compose.get((g, f))
                if h is None or self.morphisms.get(h) != (a, self.tgt(g)):
                    bad.append(("composite", g, f))
        if bad:
            return bad
        for f, (a, b) in self.morphisms.items():
            if self.compose[(self.identities[b], f)] != f or self.compose[(f, self.identities[a])] != f:
                bad.append(("unit", f))
        for f, (a, b) in self.morphisms.items():
            for g in [g for g, (s, _) in self.morphisms.items() if s == b]:
                for h in [h for h, (s, _) in self.morphisms.items() if s == self.tgt(g)]:
                    if self.compose[(h, self.compose[(g, f)])] != self.compose[(self.compose[(h, g)], f)]:
                        bad.append(("associativity", h, g, f))
        return bad

    def inverse(self, f) -> Optional[Hashable]:
        a, b = self.morphisms[f]
        for g in self.hom(b, a):
            if self.compose[(g, f)] == self.identities[a] and self.compose[(f, g)] == self.identities[b]:
                return g
        return None

    def is_groupoid(self) -> bool:
        return all(self.inverse(f) is not None for f in self.morphisms)


class FiniteGroupoid(FiniteCategory):
    """A finite category in which every morphism is invertible (checked)."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for f in self.morphisms:
            if self.inverse(f) is None:
                raise StructureError(f"morphism {f!r} has no inverse", witness=f)


def group_category(elements: Sequence[Hashable], multiply: Callable, unit) -> FiniteCategory:
    """One-object category of a finite monoid or group (compose g o f = g * f)."""
    morph = {g: ("*", "*") for g in elements}
    comp = {(g, f): multiply(g, f) for g in elements for f in elements}
    return FiniteCategory(["*"], morph, {"*": unit}, comp)


def cyclic_group(m: int) -> FiniteCategory:
    return group_category(list(range(m)), lambda a, b: (a + b) % m, 0)


def poset_category(elements: Sequence[Hashable], leq: Callable) -> FiniteCategory:
    morph = {(a, b): (a, b) for a in elements for b in elements if leq(a, b)}
    ident = {a: (a, a) for a in elements}
    comp = {((b, c), (a, b)): (a, c) for (a, b) in morph for (b2, c) in morph if b2 == b}
    return FiniteCategory(elements, morph, ident, comp)


def nerve(cat: FiniteCategory, top: int) -> SimplicialSet:
    """Nerve truncated at level ``top``; simplices are (objects, morphisms)."""
    levels: Dict[int, List[tuple]] = {0: [((a,), ()) for a in cat.objects]}
    out_of: Dict[Hashable, List[Hashable]] = {}
    for f, (a, _) in cat.morphisms.items():
        out_of.setdefault(a, []).append(f)
    for n in range(1, top + 1):
        cur = []
        for objs, mors in levels[n - 1]:
            for f in out_of.get(objs[-1], ()):
                cur.append((objs + (cat.tgt(f),), mors + (f,)))
        levels[n] = cur
    faces = {}
    degens = {}
    for n in range(top + 1):
        for x in levels[n]:
            objs, mors = x
            if n:
                fs = []
                for i in range(n + 1):
                    o = objs[:i] + objs[i + 1:]
                    if i == 0:
                        m = mors[1:]
                    elif i == n:
                        m = mors[:-1]
                    else:
                        m = mors[:i - 1] + (cat.compose[(mors[i], mors[i - 1])],) + mors[i + 1:]
                    fs.append((o, m))
                faces[x] = fs
            if n < top:
                degens[x] = [(objs[:j + 1] + objs[j:], mors[:j] + (cat.identities[objs[j]],) + mors[j:])
                             for j in range(n + 1)]
    return SimplicialSet(levels, faces, degens, top, name="nerve")


# ---------------------------------------------------------------------------
# standard simplices and their subobjects


def simplex_subset(n: int, generators: Iterable[Iterable[int]], top: Optional[int] = None,
                   name: str = "") -> SimplicialSet:
    """Simplicial subset of Delta[n] generated by the given vertex sets."""
    gens = [frozenset(g) for g in generators]
    top = n if top is None else top
    levels: Dict[int, List[tuple]] = {}
    for k in range(top + 1):
        levels[k] = [t for t in combinations_with_replacement(range(n + 1), k + 1)
                     if any(set(t) <= g for g in gens)]
    faces = {}
    degens = {}
    for k in range(top + 1):
        for t in levels[k]:
            if k:
                faces[t] = [t[:i] + t[i + 1:] for i in range(k + 1)]
            if k < top:
                degens[t] = [t[:j + 1] + t[j:] for j in range(k + 1)]
    return SimplicialSet(levels, faces, degens, top, name=name)


def standard_simplex(n: int, top: Optional[int] = None) -> SimplicialSet:
    return simplex_subset(n, [range(n + 1)], top, name=f"Delta[{n}]")


def boundary(n: int, top: Optional[int] = None) -> SimplicialSet:
    gens = [[v for v in range(n + 1) if v != i] for i in range(n + 1)]
    return simplex_subset(n, gens, top, name=f"dDelta[{n}]")


def horn(n: int, i: int, top: Optional[int] = None) -> SimplicialSet:
    if not (0 <= i <= n) or n < 1:
        raise InputError(f"no horn Lambda^{i}[{n}]")
    gens = [[v for v in range(n + 1) if v != j] for j in range(n + 1) if j != i]
    return simplex_subset(n, gens, top, name=f"Lambda^{i}[{n}]")


def product(X: SimplicialSet, Y: SimplicialSet, top: Optional[int] = None) -> SimplicialSet:
    top = min(X.top, Y.top) if top is None else top
    levels = {n: [(x, y) for x in X.simplices(n) for y in Y.simplices(n)] for n in range(top + 1)}
    faces, degens = {}, {}
    for n in range(top + 1):
        for x, y in levels[n]:
            if n:
                faces[(x, y)] = [(X.face(x, i), Y.face(y, i)) for i in range(n + 1)]
            if n < top:
                degens[(x, y)] = [(X.degen(x, j), Y.degen(y, j)) for j in range(n + 1)]
    return SimplicialSet(levels, faces, degens, top, name=f"{X.name}x{Y.name}")


# ---------------------------------------------------------------------------
# simplicial maps and matching objects


@dataclass
class SimplicialMap:
    source: SimplicialSet
    target: SimplicialSet
    mapping: Dict[Simplex, Simplex]

    def __call__(self, x):
        return self.mapping[x]

    def check(self) -> List[tuple]:
        bad = []
        S, T = self.source, self.target
        for x, y in self.mapping.items():
            n = S.level_of[x]
            if T.level_of.get(y) != n:
                bad.append(("level", x))
                continue
            if n:
                for i in range(n + 1):
                    fx = S.face(x, i)
                    if fx in self.mapping and self.mapping[fx] != T.face(y, i):
                        bad.append(("face", x, i))
            if x in S.degens and y in T.degens:
                for j in range(n + 1):
                    sx = S.degen(x, j)
                    if sx in self.mapping and self.mapping[sx] != T.degen(y, j):
                        bad.append(("degeneracy", x, j))
        return bad


def _extend_degenerate(K: SimplicialSet, X: SimplicialSet, f: Dict, n: int):
    for x in K.simplices(n):
        if x in f:
            continue
        base, word = K.normal_form(x)
        y = f[base]
        # apply the word innermost first
        for j in reversed(word):
            y = X.degen(y, j)
        f[x] = y


def matching_object(K: SimplicialSet, X: SimplicialSet, dim: Optional[int] = None) -> List[Dict[Simplex, Simplex]]:
    """All simplicial maps K -> X, each as a dict on K's simplices up to ``dim``."""
    dim = K.dimension() if dim is None else dim
    if dim > X.top:
        raise InputError(f"target stored only up to level {X.top}, need {dim}")
    order = [(n, x) for n in range(dim + 1) for x in K.nondegenerate(n)]
    results: List[Dict] = []

    def rec(k: int, f: Dict):
        if k == len(order):
            g = dict(f)
            for n in range(dim + 1):
                _extend_degenerate(K, X, g, n)
            results.append(g)
            return
        n, x = order[k]
        # all lower-level simplices of K are determined before level n starts
        if k == 0 or order[k - 1][0] != n:
            for m in range(n):
                _extend_degenerate(K, X, f, m)
        if n == 0:
            cands = X.simplices(0)
        else:
            key = tuple(f[K.face(x, i)] for i in range(n + 1))
            cands = X.faces_index(n).get(key, [])
        for y in cands:
            f[x] = y
            rec(k + 1, f)
            del f[x]
        # drop degenerate entries added at this level boundary when backtracking
        if k == 0 or order[k - 1][0] != n:
            for m in range(n):
                for z in K.simplices(m):
                    if K.is_degenerate(z):
                        f.pop(z, None)

    rec(0, {})
    return results


def horn_maps(X: SimplicialSet, n: int, i: int) -> List[Tuple[Simplex, ...]]:
    """Compatible families (y_j)_{j != i} of (n-1)-simplices: maps Lambda^i[n] -> X."""
    if n < 1 or not 0 <= i <= n:
        raise InputError(f"no horn Lambda^{i}[{n}]")
    idx = [j for j in range(n + 1) if j != i]
    out = []
    cand = X.simplices(n - 1)

    def ok(chosen: Dict[int, Simplex], k: int, y) -> bool:
        if n - 1 == 0:
            return True
        for j, yj in chosen.items():
            a, b = (j, k) if j < k else (k, j)
            ya, yb = (yj, y) if j < k else (y, yj)
            # d_a y_b = d_{b-1} y_a for a < b
            if X.face(yb, a) != X.face(ya, b - 1):
                return False
        return True

    def rec(pos: int, chosen: Dict[int, Simplex]):
        if pos == len(idx):
            out.append(tuple(chosen[j] for j in idx))
            return
        k = idx[pos]
        for y in cand:
            if ok(chosen, k, y):
                chosen[k] = y
                rec(pos + 1, chosen)
                del chosen[k]

    rec(0, {})
    return out


def horn_restriction(X: SimplicialSet, n: int, i: int) -> Dict[tuple, List[Simplex]]:
    out: Dict[tuple, List[Simplex]] = {}
    for x in X.simplices(n):
        key = tuple(X.face(x, j) for j in range(n + 1) if j != i)
        out.setdefault(key, []).append(x)
    return out


def kan_check(X: SimplicialSet, n: int, i: int) -> bool:
    """X_n -> Hom(Lambda^i[n], X) is surjective."""
    fillers = horn_restriction(X, n, i)
    return all(h in fillers for h in horn_maps(X, n, i))


def unique_kan_check(X: SimplicialSet, n: int, i: int) -> bool:
    """X_n -> Hom(Lambda^i[n], X) is bijective."""
    fillers = horn_restriction(X, n, i)
    horns = horn_maps(X, n, i)
    return all(len(fillers.get(h, ())) == 1 for h in horns) and len(horns) == len(X.simplices(n))


def kan_witness(X: SimplicialSet, n: int, i: int):
    """A horn without filler, or None."""
    fillers = horn_restriction(X, n, i)
    for h in horn_maps(X, n, i):
        if h not in fillers:
            return h
    return None


def boundary_maps(X: SimplicialSet, n: int) -> List[Tuple[Simplex, ...]]:
    """Compatible (n+1)-tuples of (n-1)-simplices: maps dDelta[n] -> X."""
    out = []
    cand = X.simplices(n - 1)

    def rec(k, chosen):
        if k == n + 1:
            out.append(tuple(chosen))
            return
        for y in cand:
            good = True
            if n >= 2:
                for a in range(k):
                    if X.face(y, a) != X.face(chosen[a], k - 1):
                        good = False
                        break
            if good:
                chosen.append(y)
                rec(k + 1, chosen)
                chosen.pop()

    rec(0, [])
    return out


def is_coskeletal(X: SimplicialSet, k: int, upto: int) -> bool:
    """X_n -> Hom(dDelta[n], X) is bijective for k < n <= upto."""
    for n in range(k + 1, upto + 1):
        fill: Dict[tuple, int] = {}
        for x in X.simplices(n):
            key = tuple(X.face(x, j) for j in range(n + 1))
            fill[key] = fill.get(key, 0) + 1
        for b in boundary_maps(X, n):
            if fill.get(b, 0) != 1:
                return False
        if sum(fill.values()) != len(fill):
            return False
    return True


def relative_kan_check(P: SimplicialSet, B: SimplicialSet, p: Mapping[Simplex, Simplex], n: int, i: int) -> bool:
    """P_n -> Hom(Lambda^i[n], P) x_{Hom(Lambda^i[n], B)} B_n is surjective."""
    have = set()
    for x in P.simplices(n):
        key = tuple(P.face(x, j) for j in range(n + 1) if j != i)
        have.add((key, p[x]))
    for h in horn_maps(P, n, i):
        image = tuple(p[y] for y in h)
        for b in B.simplices(n):
            if tuple(B.face(b, j) for j in range(n + 1) if j != i) == image:
                if (h, b) not in have:
                    return False
    return True


# ---------------------------------------------------------------------------
# prisms and path objects


def prism_decomposition(n: int) -> List[Tuple[Tuple[int, int], ...]]:
    """The n+1 top simplices x_k = (0,0)..(k,0),(k,1)..(n,1) of Delta[n] x Delta[1]."""
    if n < 0:
        raise InputError("n must be nonnegative")
    return [tuple((j, 0) for j in range(k + 1)) + tuple((j, 1) for j in range(k, n + 1))
            for k in range(n + 1)]


def prism_top_cells(n: int) -> List[Tuple[Tuple[int, int], ...]]:
    """Nondegenerate (n+1)-simplices of Delta[n] x Delta[1], read off the product."""
    P = product(standard_simplex(n, n + 1), standard_simplex(1, n + 1))
    out = []
    for a, b in P.nondegenerate(n + 1):
        out.append(tuple(zip(a, b)))
    return sorted(out)


@dataclass
class PathObject:
    """X^{Delta[1]} up to a level, with the constant map and the two evaluations."""

    space: SimplicialSet
    const: Dict[Simplex, Simplex]      # s_0^*: X -> X^{Delta[1]}
    ev0: Dict[Simplex, Simplex]        # restriction to Delta[n] x {0}
    ev1: Dict[Simplex, Simplex]        # restriction to Delta[n] x {1}


def prism_hom(X: SimplicialSet, n: int) -> List[Tuple[Simplex, ...]]:
    """Hom(Delta[n] x Delta[1], X) as glued tuples (y_0..y_n) of (n+1)-simplices.

    Consecutive prisms share a face: d_{k+1} y_k = d_{k+1} y_{k+1}.
    """
    out = []
    cand = X.simplices(n + 1)

    def rec(k, chosen):
        if k == n + 1:
            out.append(tuple(chosen))
            return
        for y in cand:
            if k and X.face(chosen[-1], k) != X.face(y, k):
                continue
            chosen.append(y)
            rec(k + 1, chosen)
            chosen.pop()

    rec(0, [])
    return out


def path_object(X: SimplicialSet, m: int, check: bool = True) -> PathObject:
    """Levels 0..m of X^{Delta[1]}; X must be stored up to level m + 1.

    Simplices are prism tuples; faces and degeneracies act through the
    cosimplicial structure of Delta[n] x Delta[1], computed by restricting
    the map on the vertex poset [n] x [1].
    """
    if X.top < m + 1:
        raise InputError(f"X must be stored up to level {m + 1}")
    if check:
        for n in range(1, m + 1):
            for i in range(n + 1):
                if not kan_check(X, n, i):
                    raise StructureError(f"X fails the Kan condition at Lambda^{i}[{n}]", witness=(n, i))
    levels = {n: prism_hom(X, n) for n in range(m + 1)}

    # restrict along a monotone map theta: [k] -> [n] (times id on [1])
    def restrict(path, n, theta):
        k = len(theta) - 1
        cells_n = prism_decomposition(n)
        res = []
        for cell in prism_decomposition(k):
            image = [(theta[v], e) for v, e in cell]
            # find a top cell of the n-prism containing the image chain
            for idx, big in enumerate(cells_n):
                pos = []
                ok = True
                for pt in image:
                    if pt in big:
                        pos.append(big.index(pt))
                    else:
                        ok = False
                        break
                if ok:
                    res.append(simplex_operator(X, path[idx], n + 1, pos))
                    break
            else:
                raise StructureError("prism image not contained in a top cell")
        return tuple(res)

    faces, degens = {}, {}
    for n in range(m + 1):
        for path in levels[n]:
            if n:
                faces[path] = [restrict(path, n, tuple(v for v in range(n + 1) if v != i)) for i in range(n + 1)]
            if n < m:
                degens[path] = [restrict(path, n, tuple(list(range(j + 1)) + list(range(j, n + 1))))
                                for j in range(n + 1)]
    P = SimplicialSet(levels, faces, degens, m, name="path")
    const, ev0, ev1 = {}, {}, {}
    for n in range(m + 1):
        for x in X.simplices(n):
            # constant path: precompose with the projection [n] x [1] -> [n]
            const[x] = tuple(simplex_operator(X, x, n, [v for v, _ in cell]) for cell in prism_decomposition(n))
        for path in levels[n]:
            ev0[path] = simplex_operator(X, path[n], n + 1, list(range(n + 1)))
            ev1[path] = simplex_operator(X, path[0], n + 1, list(range(1, n + 2)))
    return PathObject(P, const, ev0, ev1)


def simplex_operator(X: SimplicialSet, x: Simplex, n: int, theta: Sequence[int]) -> Simplex:
    """theta^* x for a monotone theta: [k] -> [n] given by its vertex list."""
    theta = list(theta)
    k = len(theta) - 1
    # factor theta = (surjection) then (injection): degeneracies after faces
    image = sorted(set(theta))
    y = x
    # faces: delete vertices not in the image, from the top down
    for v in reversed(range(n + 1)):
        if v not in image:
            y = X.face(y, v)
    # degeneracies: repeat vertices, left to right
    for idx in range(1, k + 1):
        if theta[idx] == theta[idx - 1]:
            y = X.degen(y, idx - 1)
    return y


# ---------------------------------------------------------------------------
# collapsible extensions


@dataclass
class HornStep:
    simplex: Simplex           # the new top simplex
    face_index: int            # j of the horn Lambda^j[m]
    new_face: Simplex          # d_j of the simplex, also new


def collapsible_decomposition(S: Iterable[Simplex], T: SimplicialSet, limit: int = 200):
    """Horn-pushout steps from a simplicial subset S to T, or None.

    ``S`` lists nondegenerate simplices of T closed under faces.  Faces of
    nondegenerate simplices of T must themselves be nondegenerate.
    """
    all_nd = [x for n in range(T.top + 1) for x in T.nondegenerate(n)]
    if len(all_nd) > limit:
        raise InputError(f"{len(all_nd)} cells exceed the search bound {limit}")
    start = frozenset(S)
    for x in start:
        n = T.level_of[x]
        for i in range(n + 1 if n else 0):
            if T.face(x, i) not in start:
                raise InputError(f"S is not closed under faces at {x!r}")
    for x in all_nd:
        n = T.level_of[x]
        for i in range(n + 1 if n else 0):
            if T.is_degenerate(T.face(x, i)):
                raise InputError("collapsible search needs faces of nondegenerate simplices to be nondegenerate")
    target = frozenset(all_nd)
    seen: Set[FrozenSet] = set()

    def moves(cur: FrozenSet):
        for x in all_nd:
            if x in cur:
                continue
            m = T.level_of[x]
            if m == 0:
                continue
            fs = [T.face(x, i) for i in range(m + 1)]
            missing = [i for i, f in enumerate(fs) if f not in cur]
            if len(missing) == 1:
                j = missing[0]
                tau = fs[j]
                if fs.count(tau) > 1:
                    continue
                # all faces of tau must already be present
                if T.level_of[tau] > 0 and any(T.face(tau, i) not in cur for i in range(m)):
                    continue
                yield HornStep(x, j, tau)

    def dfs(cur: FrozenSet, path: List[HornStep]):
        if cur == target:
            return list(path)
        if cur in seen:
            return None
        seen.add(cur)
        for step in moves(cur):
            path.append(step)
            res = dfs(cur | {step.simplex, step.new_face}, path)
            if res is not None:
                return res
            path.pop()
        return None

    return dfs(start, [])


def restriction_is_surjective(S: SimplicialSet, T: SimplicialSet, X: SimplicialSet) -> bool:
    """Hom(T, X) -> Hom(S, X) hits every map (S a subobject of T, same labels)."""
    maps_T = matching_object(T, X)
    maps_S = matching_object(S, X)
    dimS = S.dimension()
    keys = [x for n in range(dimS + 1) for x in S.nondegenerate(n)]
    image = {tuple(f[x] for x in keys) for f in maps_T}
    return all(tuple(g[x] for x in keys) in image for g in maps_S)


def integer_nerve_window(bound: int, top: int) -> SimplicialSet:
    """Finite simplicial subset of the nerve of (Z, +).

    k-simplices are strings (n_1, ..., n_k) whose contiguous partial sums all
    lie in [-bound, bound]; the set is closed under faces and degeneracies.
    """
    def ok(t):
        return all(abs(sum(t[a:b])) <= bound for a in range(len(t)) for b in range(a + 1, len(t) + 1))

    levels = {0: [()]}
    for n in range(1, top + 1):
        levels[n] = [t + (m,) for t in levels[n - 1] for m in range(-bound, bound + 1) if ok(t + (m,))]
    faces, degens = {}, {}
    for n in range(top + 1):
        for t in levels[n]:
            if n:
                fs = []
                for i in range(n + 1):
                    if i == 0:
                        fs.append(t[1:])
                    elif i == n:
                        fs.append(t[:-1])
                    else:
                        fs.append(t[:i - 1] + (t[i - 1] + t[i],) + t[i + 1:])
                faces[t] = fs
            if n < top:
                degens[t] = [t[:j] + (0,) + t[j:] for j in range(n + 1)]
    return SimplicialSet(levels, faces, degens, top, name=f"N(Z)|{bound}")


def ordered_complex(maximal: Sequence[Sequence[Hashable]], top: int, name: str = "") -> SimplicialSet:
    """Simplicial set of an ordered simplicial complex, degenerate simplices included.

    Simplices are weakly increasing vertex tuples (in the order of some
    maximal face) contained in a maximal face.
    """
    order: Dict[Hashable, int] = {}
    for face in maximal:
        for v in face:
            order.setdefault(v, len(order))
    cells = set()
    for face in maximal:
        f = sorted(set(face), key=lambda v: order[v])
        for n in range(top + 1):
            for combo in combinations_with_replacement(f, n + 1):
                cells.add(tuple(combo))
    levels = {n: sorted((c for c in cells if len(c) == n + 1), key=lambda c: [order[v] for v in c])
              for n in range(top + 1)}
    faces = {c: [c[:i] + c[i + 1:] for i in range(len(c))] for c in cells if len(c) > 1}
    degens = {c: [c[:j + 1] + c[j:] for j in range(len(c))] for c in cells if len(c) <= top}
    return SimplicialSet(levels, faces, degens, top, name=name or "ordered complex")
