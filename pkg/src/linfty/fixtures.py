"""Small named structures used by the test-suite, the CLI and the docs."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional

from .cdga import Algebra, Derivation, Elem
from .ce_dual import NQStructure, cdga_of, derived_brackets
from .graded import GradedModule, StructureError
from .linfty import LInftyStructure, is_linfty, sorted_tuples


def abelian(degrees=(-1, -2)) -> LInftyStructure:
    pairs = [(f"v{i}", d) for i, d in enumerate(degrees)]
    return LInftyStructure([], GradedModule.from_pairs(pairs))


def tangent_r2() -> LInftyStructure:
    """T R^2: frame ex, ey anchored to d/dx, d/dy, all brackets zero."""
    M = GradedModule.from_pairs([("ex", -1), ("ey", -1)])
    return LInftyStructure(["x", "y"], M, {}, {"ex": {"x": 1}, "ey": {"y": 1}})


def tangent_r1() -> LInftyStructure:
    M = GradedModule.from_pairs([("ex", -1)])
    return LInftyStructure(["x"], M, {}, {"ex": {"x": 1}})


def sl2(corrupt: bool = False) -> LInftyStructure:
    """sl_2 with [e,f] = h, [h,e] = 2e, [h,f] = -2f, in the shifted picture."""
    M = GradedModule.from_pairs([("e", -1), ("f", -1), ("h", -1)])
    he = 3 if corrupt else 2
    return LInftyStructure([], M, {2: {("e", "f"): {"h": 1}, ("h", "e"): {"e": he}, ("h", "f"): {"f": -2}}})


def affine_line() -> LInftyStructure:
    """Action algebroid of aff(1) on the line: a -> x d/dx, b -> d/dx, {a,b} = -b."""
    M = GradedModule.from_pairs([("a", -1), ("b", -1)])
    x = Algebra(["x"]).var("x")
    return LInftyStructure(["x"], M, {2: {("a", "b"): {"b": -1}}}, {"a": {"x": x}, "b": {"x": 1}})


# ---------------------------------------------------------------------------
# random valid structures: conjugate a simple homological field by a
# unipotent automorphism of the function algebra


def _random_base(rng: random.Random):
    """A simple homological field on a random small carrier."""
    choice = rng.choice(["tangent", "affine", "sl2", "abelian"])
    chart: List[str]
    pairs = []
    if choice == "tangent":
        chart = ["x", "y"][: rng.randint(1, 2)]
        pairs += [(f"t{i}", -1) for i in range(len(chart))]
    elif choice == "affine":
        chart = ["x"]
        pairs += [("a", -1), ("b", -1)]
    elif choice == "sl2":
        chart = ["x"]
        pairs += [("e", -1), ("f", -1), ("h", -1)]
    else:
        chart = ["x"]
    # contractible pairs u -> v in degrees (1,2) or (2,3) of the dual
    npairs = rng.randint(1, 2)
    used = {}
    for k in range(npairs):
        low = rng.choice([1, 2])
        pairs += [(f"u{k}", -low), (f"w{k}", -low - 1)]
        used[k] = low
    # keep ranks <= 3 per degree
    counts: Dict[int, int] = {}
    kept = []
    for lab, d in pairs:
        if counts.get(d, 0) < 3:
            kept.append((lab, d))
            counts[d] = counts.get(d, 0) + 1
    labels = {lab for lab, _ in kept}
    M = GradedModule.from_pairs(kept)
    alg, dual = cdga_of(chart, M)
    vals = {n: alg.zero() for n in alg.names}
    if choice == "tangent":
        for i, x in enumerate(chart):
            vals[x] = alg.var(dual[f"t{i}"])
    elif choice == "affine":
        x = alg.var("x")
        vals["x"] = x * alg.var(dual["a"]) + alg.var(dual["b"])
        # {a,b} = -b dualizes to Q(b*) = -(mu^-1) a* b*; computed via derived brackets below
    for k in range(npairs):
        if f"u{k}" in labels and f"w{k}" in labels:
            vals[dual[f"u{k}"]] = alg.var(dual[f"w{k}"])
    base = LInftyStructure(chart, M)
    # quadratic parts come from the known Lie structures through build_Q
    from .ce_dual import build_Q
    if choice == "affine":
        seed = LInftyStructure(chart, M, {2: {("a", "b"): {"b": -1}}},
                               {"a": {"x": Algebra(chart).var("x")}, "b": {"x": 1}})
        vals[dual["b"]] = build_Q(seed, check=False).Q.value(dual["b"])
    elif choice == "sl2":
        seed = LInftyStructure(chart, M, {2: {("e", "f"): {"h": 1}, ("h", "e"): {"e": 2},
                                              ("h", "f"): {"f": -2}}})
        Qs = build_Q(seed, check=False).Q
        for g in "efh":
            vals[dual[g]] = Qs.value(dual[g])
    return chart, M, alg, dual, Derivation(alg, 1, vals)


def _monomials_of_degree(alg: Algebra, names: List[str], degree: int, max_len: int):
    """Monomials (as name lists, sorted by position) in ``names`` of total degree."""
    out = []
    idx = sorted(names, key=lambda n: alg.index[n])

    def rec(start, cur, deg):
        if deg == degree and len(cur) >= 2:
            out.append(list(cur))
        if len(cur) == max_len or deg >= degree:
            return
        for k in range(start, len(idx)):
            n = idx[k]
            d = alg.degrees[alg.index[n]]
            if cur and cur[-1] == n and d % 2:
                continue
            rec(k, cur + [n], deg + d)

    rec(0, [], 0)
    return out


def _inverse(alg: Algebra, phi: Dict[str, Elem]) -> Dict[str, Elem]:
    psi = {n: alg.var(n) for n in alg.names}
    for _ in range(12):
        new = {}
        for n in alg.names:
            N = phi[n] - alg.var(n)
            new[n] = alg.var(n) - N.substitute(alg, psi)
        if all(new[n] == psi[n] for n in alg.names):
            return new
        psi = new
    raise RuntimeError("automorphism inverse did not stabilize")


def random_valid_structure(seed: int) -> LInftyStructure:
    """A random L-infinity algebroid, valid by construction.

    A homological field is conjugated by a random unipotent automorphism of
    O(E) with constant coefficients; the brackets are read off by derived
    brackets.  Chart coefficients stay of polynomial degree <= 1.
    """
    rng = random.Random(seed)
    chart, M, alg, dual, Q0 = _random_base(rng)
    gens = [g for g, _ in alg.generators]
    phi = {n: alg.var(n) for n in alg.names}
    for g in gens:
        d = alg.degrees[alg.index[g]]
        img = alg.var(g)
        for h in gens:
            if h != g and alg.degrees[alg.index[h]] == d and alg.index[h] < alg.index[g] and rng.random() < 0.5:
                img = img + alg.var(h) * rng.choice([-1, 1, 2])
        for mono in _monomials_of_degree(alg, [h for h in gens if h != g], d, 3):
            if rng.random() < 0.35:
                term = alg.one()
                for n in mono:
                    term = term * alg.var(n)
                img = img + term * Fraction(rng.choice([-2, -1, 1, 2]), rng.choice([1, 1, 2]))
        phi[g] = img
    psi = _inverse(alg, phi)
    vals = {}
    for n in alg.names:
        vals[n] = Q0.apply(alg.var(n).substitute(alg, psi)).substitute(alg, phi)
    Q = Derivation(alg, 1, vals)
    return derived_brackets(NQStructure(alg, Q, tuple(chart), M, dual))


def corruption_slots(L: LInftyStructure):
    """Every (tuple, output label) where a generator bracket may carry a value."""
    present = set(L.deg.values())
    slots = []
    for n in range(1, max(L.max_arity, 2) + 1):
        for tup in sorted_tuples(L, n):
            d = sum(L.deg[t] for t in tup) + 1
            if d in present:
                for c in L.labels:
                    if L.deg[c] == d:
                        slots.append((tup, c))
    return slots


def bump(L: LInftyStructure, tup, c, amount) -> LInftyStructure:
    """Add ``amount`` to the ``c`` coefficient of the bracket on ``tup``."""
    table = {n: {t: dict(v) for t, v in tab.items()} for n, tab in L.brackets.items()}
    entry = table.setdefault(len(tup), {}).setdefault(tup, {})
    entry[c] = entry.get(c, L.ring.zero()) + amount
    return LInftyStructure(L.chart, L.module, table, L.anchor)


def corrupt(L: LInftyStructure, seed: int) -> LInftyStructure:
    """Change exactly one bracket value so that some identity breaks.

    Candidates (slot, amount) are drawn in a seeded order; some changes keep
    the structure valid (rescaling l_1 on a three-term complex, say), so the
    first candidate that fails check_linfty is returned.
    """
    rng = random.Random(seed)
    amounts = [L.ring.one(), -L.ring.one()] + [L.ring.var(x) for x in L.chart]
    candidates = [(s, a) for s in corruption_slots(L) for a in range(len(amounts))]
    rng.shuffle(candidates)
    for (tup, c), a in candidates:
        C = bump(L, tup, c, amounts[a])
        if not is_linfty(C):
            return C
    raise StructureError("no single-value change breaks this structure")


# ---------------------------------------------------------------------------
# Z-connections over the de Rham algebra of R^2


def zconn_fixtures() -> Dict[str, "object"]:
    """Named connections on R^2, flat and curved, ungraded and graded."""
    from .zconn import MorphismElement, ZConnection, de_rham_base, gauge, identity, unipotent_inverse

    B = de_rham_base(["x", "y"])
    A = B.alg
    x, y, dx, dy = A.vars("x", "y", "dx", "dy")
    out = {}
    line = GradedModule.from_pairs([("u", 0)])
    out["line"] = ZConnection(B, line, MorphismElement(line, line, A, {("u", "u"): x * dy}))
    pair = GradedModule.from_pairs([("p", 0), ("q", 0)])
    out["pair"] = ZConnection(B, pair, MorphismElement(pair, pair, A, {
        ("p", "q"): x * dy, ("q", "p"): y * dx, ("p", "p"): dx * 2}))
    G = GradedModule.from_pairs([("a", 0), ("b", 1), ("c", 1), ("d", 2)])
    flat0 = ZConnection(B, G, MorphismElement(G, G, A, {("b", "a"): A.one(), ("d", "c"): A.one()}))
    out["graded_flat"] = flat0
    N = MorphismElement(G, G, A, {("a", "b"): dy * x, ("b", "c"): A.const(2), ("a", "d"): dx * dy,
                                  ("b", "d"): y * dx})
    out["graded_gauged"] = gauge(flat0, identity(G, A) + N, unipotent_inverse(N))
    out["graded_curved"] = ZConnection(B, G, MorphismElement(G, G, A, {
        ("b", "a"): x, ("d", "c"): A.one(), ("a", "a"): y * dx, ("c", "b"): dy,
        ("a", "b"): dx * dy * x, ("b", "b"): dx + dy}))
    return out


def atiyah_fixtures() -> Dict[str, dict]:
    """Pairs (g, h) with an h-module and two extensions of it to g.

    Each entry holds ``ext_a`` and ``ext_b`` (connections over the
    Chevalley-Eilenberg algebra of g), ``normal`` (generators dual to a
    complement of h) and ``zero`` (whether the Atiyah class must vanish).
    """
    from .ce_dual import ce_with_coefficients
    from .graded import Complex

    def line_module(labels):
        M = GradedModule.from_pairs([(lab, 0) for lab in labels])
        return Complex(M, {})

    out = {}
    g = sl2()
    V = line_module(["v0", "v1"])
    h_act = {"v0": {"v0": 1}, "v1": {"v1": -1}}
    out["sl2_cartan"] = {
        "ext_a": ce_with_coefficients(g, V, {"h": h_act}),
        "ext_b": ce_with_coefficients(g, V, {"h": h_act, "e": {"v1": {"v0": 1}}, "f": {"v0": {"v0": 2}}}),
        "normal": ["e*", "f*"], "zero": False,
    }
    ab = abelian((-1, -1))
    W = line_module(["w0", "w1"])
    nil = {"w1": {"w0": 1}}
    out["abelian"] = {
        "ext_a": ce_with_coefficients(ab, W, {"v0": nil, "v1": nil}),
        "ext_b": ce_with_coefficients(ab, W, {"v0": nil, "v1": {"w1": {"w0": 3}}}),
        "normal": ["v1*"], "zero": True,
    }
    T = tangent_r2()
    x = T.ring.var("x")
    U = line_module(["s"])
    out["tangent_plane"] = {
        "ext_a": ce_with_coefficients(T, U, {"ex": {}, "ey": {"s": {"s": x}}}),
        "ext_b": ce_with_coefficients(T, U, {"ex": {}, "ey": {"s": {"s": x + 1}}}),
        "normal": ["ey*"], "zero": False,
    }
    return out


# ---------------------------------------------------------------------------
# finite categories


_GROUPS = {
    "Z1": ([0], lambda a, b: 0, 0),
    "Z2": ([0, 1], lambda a, b: (a + b) % 2, 0),
    "Z3": ([0, 1, 2], lambda a, b: (a + b) % 3, 0),
}


def random_groupoid(seed: int):
    """Disjoint union of (group) x (pair groupoid) blocks, sized for nerves up to level 4."""
    from .simplicial import FiniteGroupoid

    rng = random.Random(seed)
    blocks = []
    budget = 3
    while budget > 0:
        k = rng.randint(1, min(2, budget))
        gname = rng.choice(["Z1", "Z2", "Z3"] if k == 1 else ["Z1", "Z2"])
        blocks.append((k, gname))
        budget -= k
        if rng.random() < 0.5:
            break
    objects, morph, ident, comp = [], {}, {}, {}
    for b, (k, gname) in enumerate(blocks):
        elems, mul, unit = _GROUPS[gname]
        obs = [f"o{b}{i}" for i in range(k)]
        objects.extend(obs)
        for a in obs:
            ident[a] = (a, unit, a)
            for c in obs:
                for g in elems:
                    morph[(a, g, c)] = (a, c)
        for (a, g, c) in [m for m in morph if m[0] in obs]:
            for h in elems:
                for e in obs:
                    comp[((c, h, e), (a, g, c))] = (a, mul(h, g), e)
    return FiniteGroupoid(objects, morph, ident, comp)


def random_category(seed: int):
    """A small category with a non-invertible morphism: a random poset or monoid."""
    from .simplicial import group_category, poset_category

    rng = random.Random(seed)
    if rng.random() < 0.5:
        n = rng.randint(2, 3)
        rel = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.7}
        rel.add((0, 1))
        closed = set(rel)
        for (a, b) in rel:
            for (c, d) in rel:
                if b == c:
                    closed.add((a, d))
        return poset_category(list(range(n)), lambda a, b: a == b or (a, b) in closed)
    m = rng.randint(2, 3)
    # multiplicative monoid of Z/m: 0 is absorbing, hence not invertible
    return group_category(list(range(m)), lambda a, b: (a * b) % m, 1)


# ---------------------------------------------------------------------------
# local systems


def integer_local_system(generator, degrees=(0, 0), differential=None, bound: int = 2, top: int = 3,
                         values=None):
    """Local system on a window of nerve(Z): the edge n acts by generator**n."""
    import sympy as sp

    from .locsys import InftyLocalSystem
    from .simplicial import integer_nerve_window

    K = integer_nerve_window(bound, top)
    A = sp.Matrix(generator)
    d = sp.zeros(len(degrees)) if differential is None else sp.Matrix(differential)
    vals = {(): d}
    for x in K.nondegenerate(1):
        vals[x] = A ** x[0]
    vals.update(values or {})
    return InftyLocalSystem(K, {(): tuple(degrees)}, vals)


def integer_fixtures() -> Dict[str, object]:
    """Named systems on nerve(Z), with the expected Maurer-Cartan verdict."""
    import sympy as sp

    J = [[1, 1], [0, 1]]
    # a two-term complex Q -> Q and the chain automorphism 2
    d01 = [[0, 0], [1, 0]]
    good = {
        "unipotent": integer_local_system(J),
        "scalar": integer_local_system([[3]], degrees=(0,)),
        "graded": integer_local_system([[2, 0], [0, 2]], degrees=(0, 1), differential=d01),
    }
    bad = {
        "broken_square": integer_local_system(J, values={(2,): sp.Matrix(J)}),
        "not_chain_map": integer_local_system([[2, 0], [0, 1]], degrees=(0, 1), differential=d01),
        "stray_homotopy": integer_local_system([[2, 0], [0, 2]], degrees=(0, 1), differential=d01,
                                               values={(1, -1): sp.Matrix([[0, 1], [0, 0]])}),
    }
    return {"good": good, "bad": bad}


def cyclic_local_system(m: int = 2, top: int = 3):
    """nerve(Z/m) acting on Q^2, by -1 when m = 2."""
    import sympy as sp

    from .locsys import InftyLocalSystem
    from .simplicial import cyclic_group, nerve

    K = nerve(cyclic_group(m), top)
    vals = {K.simplices(0)[0]: sp.zeros(2)}
    swap = sp.Matrix([[-1, 0], [0, -1]]) if m == 2 else sp.eye(2)
    for x in K.nondegenerate(1):
        vals[x] = swap ** x[1][0]
    return InftyLocalSystem(K, {K.simplices(0)[0]: (0, 0)}, vals)


def random_cochain(source, target, degree: int, rng: random.Random, low: int = -2, high: int = 2):
    """Random LocMorphism of the given degree with small integer entries."""
    import sympy as sp

    from .locsys import LocMorphism

    K = source.K
    vals = {}
    for n in range(source.top + 1):
        for x in K.nondegenerate(n):
            src, tgt = source.source_space(x), target.target_space(x)
            M = sp.zeros(tgt.dim, src.dim)
            for i in range(tgt.dim):
                for j in range(src.dim):
                    if tgt.degrees[i] - src.degrees[j] == degree - n:
                        M[i, j] = rng.randint(low, high)
            vals[x] = M
    return LocMorphism(source, target, degree, vals)


def random_morphism(source, target, alg, degree: int, rng: random.Random, density: float = 0.6,
                    offdiagonal: bool = False):
    """Random homogeneous MorphismElement over the de Rham algebra of a chart.

    Entry (i, j) is a form of degree ``degree - |i| + |j|`` with small
    polynomial coefficients; ``offdiagonal`` keeps only entries between
    labels of different degree.
    """
    from .zconn import MorphismElement

    chart = [n for n in alg.names if alg.degrees[alg.index[n]] == 0]
    odd = [n for n in alg.names if alg.degrees[alg.index[n]] == 1]
    entries = {}
    for i in target.labels():
        for j in source.labels():
            if offdiagonal and target.degree(i) == source.degree(j):
                continue
            p = degree - target.degree(i) + source.degree(j)
            if p < 0 or p > len(odd) or rng.random() > density:
                continue
            val = alg.zero()
            for _ in range(2):
                coeff = alg.const(rng.randint(-2, 2))
                for v in chart:
                    coeff = coeff * alg.var(v) ** rng.randint(0, 1)
                dif = alg.one()
                for n in sorted(rng.sample(odd, p), key=lambda n: alg.index[n]):
                    dif = dif * alg.var(n)
                val = val + coeff * dif
            if val:
                entries[(i, j)] = val
    return MorphismElement(source, target, alg, entries)
