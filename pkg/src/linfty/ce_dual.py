"""Chevalley-Eilenberg duals of L-infinity algebroids.

``build_Q`` turns brackets and anchor into a degree-1 vector field on the
free algebra O(E) = A[xi^a], one odd-or-even generator xi^a of degree -|e_a|
per carrier generator.  ``derived_brackets`` goes back: with constant
contractions d_a = d/d(xi^a),

    D_0 = Q,  D_k = [D_{k-1}, d_{a_k}],
    {e_{a_1}, ..., e_{a_n}} = sum_c D_n(xi^c)|_{xi=0} e_c,
    rho(e_a)[f]            = D_1(f)|_{xi=0}.

``build_Q`` inverts this monomial by monomial: the derived bracket of the
field xi^c -> xi^{a_1}...xi^{a_n} is a nonzero rational multiple mu_a of
e_c, and Q(xi^c) collects C^c_a / mu_a times that monomial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .cdga import Algebra, Derivation, Elem, compose_bracket, is_homological, partial
from .graded import GradedModule, InputError, StructureError
from .linfty import LInftyStructure, check_linfty, require_linfty, sorted_tuples


def dual_name(label: str) -> str:
    return f"{label}*"


@dataclass
class NQStructure:
    """Functions O(E) on the shifted carrier together with a degree-1 field Q."""

    alg: Algebra
    Q: Derivation
    chart: Tuple[str, ...]
    module: GradedModule
    dual: Dict[str, str]          # carrier label -> generator name

    @property
    def generator_names(self) -> List[str]:
        return [g for g, _ in self.alg.generators]

    def label_of(self, name: str) -> str:
        for lab, g in self.dual.items():
            if g == name:
                return lab
        raise InputError(f"{name!r} is not a dual generator")

    def arity_part(self, i: int) -> Derivation:
        """Q^(i): the part of Q raising polynomial degree in the generators by i - 1."""
        gens = self.generator_names
        vals = {}
        for n in self.alg.names:
            v = self.Q.value(n)
            base = 0 if n in self.alg.chart else 1
            vals[n] = v.weight_part(gens, base + i - 1) if base + i - 1 >= 0 else self.alg.zero()
        return Derivation(self.alg, 1, vals)

    def max_arity(self) -> int:
        gens = self.generator_names
        top = 0
        for n in self.alg.names:
            for w in self.Q.value(n).weight(gens):
                top = max(top, w)
        return top


def cdga_of(chart: Sequence[str], module: GradedModule) -> Tuple[Algebra, Dict[str, str]]:
    gens = []
    dual = {}
    for lab in module.labels():
        d = module.degree(lab)
        if d >= 0:
            raise InputError(f"generator {lab!r} has shifted degree {d}; only negative degrees dualize")
        dual[lab] = dual_name(lab)
        gens.append((dual[lab], -d))
    names = set(chart)
    for g, _ in gens:
        if g in names:
            raise InputError(f"dual generator name {g!r} collides with a chart variable")
    return Algebra(chart, gens), dual


def _monomial(alg: Algebra, names: Sequence[str]) -> Elem:
    m = alg.one()
    for n in names:
        m = m * alg.var(n)
    return m


def _derive(Q: Derivation, names: Sequence[str]) -> Derivation:
    D = Q
    for n in names:
        D = compose_bracket(D, partial(Q.alg, n))
    return D


def _at_zero(x: Elem, gens: Sequence[str]) -> Elem:
    return x.set_zero(gens)


class _Normalizer:
    """Caches mu_a: derived bracket of xi^c -> xi^{a_1}..xi^{a_n} at xi = 0."""

    def __init__(self, alg: Algebra):
        self.alg = alg
        self.cache: Dict[Tuple[str, ...], object] = {}
        gens = [g for g, _ in alg.generators]
        self.gens = gens

    def mu(self, names: Tuple[str, ...], target: str):
        key = names
        if key not in self.cache:
            m = _monomial(self.alg, names)
            probe = Derivation(self.alg, m.degree() - self.alg.degrees[self.alg.index[target]],
                               {target: m})
            D = _derive(probe, names)
            val = _at_zero(D.value(target), self.gens).constant_term()
            if not val:
                raise StructureError(f"degenerate monomial {names}")
            self.cache[key] = val
        return self.cache[key]


def build_Q(L: LInftyStructure, check: bool = True) -> NQStructure:
    """Homological vector field dual to ``L``.

    With ``check=False`` the field is built even for structures failing the
    Jacobi identities (used to compare both verdicts).
    """
    if check:
        require_linfty(L)
    alg, dual = cdga_of(L.chart, L.module)
    norm = _Normalizer(alg)
    values: Dict[str, Elem] = {n: alg.zero() for n in alg.names}
    for n, table in L.brackets.items():
        for tup, val in table.items():
            names = tuple(dual[t] for t in tup)
            m = _monomial(alg, names)
            for c, coeff in val.items():
                mu = norm.mu(names, dual[c])
                values[dual[c]] = values[dual[c]] + coeff.to(alg) * m * (1 / mu)
    for lab, vf in L.anchor.items():
        names = (dual[lab],)
        m = alg.var(dual[lab])
        for var, coeff in vf.items():
            mu = norm.mu(names, var)
            values[var] = values[var] + coeff.to(alg) * m * (1 / mu)
    Q = Derivation(alg, 1, values)
    return NQStructure(alg, Q, L.chart, L.module, dual)


def derived_brackets(N: NQStructure, check: bool = True, max_arity: Optional[int] = None) -> LInftyStructure:
    """Brackets and anchor read off iterated commutators of Q with contractions."""
    if check:
        ok, wit = is_homological(N.Q)
        if not ok:
            raise StructureError(f"Q^2 does not vanish on {wit}", witness=wit)
    alg = N.alg
    gens = N.generator_names
    ring = Algebra(N.chart)
    if max_arity is None:
        max_arity = N.max_arity()
    labels = N.module.labels()
    deg = {lab: N.module.degree(lab) for lab in labels}
    present = set(deg.values())
    brackets: Dict[int, Dict[Tuple[str, ...], Dict[str, Elem]]] = {}
    anchor: Dict[str, Dict[str, Elem]] = {}

    # depth-first over sorted tuples so that prefixes share commutators
    def visit(prefix: Tuple[str, ...], D: Derivation, start: int):
        n = len(prefix)
        if n:
            target_deg = sum(deg[t] for t in prefix) + 1
            if target_deg in present:
                val = {}
                for c in labels:
                    if deg[c] != target_deg:
                        continue
                    v = _at_zero(D.value(N.dual[c]), gens)
                    if v:
                        val[c] = v.to(ring)
                if val:
                    brackets.setdefault(n, {})[prefix] = val
            if n == 1 and deg[prefix[0]] == -1:
                vf = {}
                for x in N.chart:
                    v = _at_zero(D.value(x), gens)
                    if v:
                        vf[x] = v.to(ring)
                if vf:
                    anchor[prefix[0]] = vf
        if n == max_arity:
            return
        for k in range(start, len(labels)):
            lab = labels[k]
            if prefix and prefix[-1] == lab and deg[lab] % 2:
                continue
            visit(prefix + (lab,), compose_bracket(D, partial(alg, N.dual[lab])), k)

    visit((), N.Q, 0)
    return LInftyStructure(N.chart, N.module, brackets, anchor)


def homological_defects(N: NQStructure) -> Dict[Tuple[Tuple[str, ...], str], Elem]:
    """Nonzero coefficients of Q^2 on each variable, keyed by (label tuple, variable).

    The tuple lists the carrier labels of the generator monomial (with
    repetitions); the variable is a carrier label or a chart coordinate.
    """
    out = {}
    gens = N.generator_names
    gidx = [N.alg.index[g] for g in gens]
    for name in N.alg.names:
        sq = N.Q.apply(N.Q.value(name))
        if not sq:
            continue
        key_var = N.label_of(name) if name in N.dual.values() else name
        parts: Dict[Tuple[str, ...], Dict] = {}
        for mono, c in sq.terms.items():
            tup = []
            for i in gidx:
                tup.extend([N.label_of(N.alg.names[i])] * mono[i])
            parts.setdefault(tuple(tup), {})[mono] = c
        for tup, terms in parts.items():
            out[(tup, key_var)] = Elem(N.alg, terms)
    return out


def linfty_defects(L: LInftyStructure, max_arity: Optional[int] = None) -> Dict[Tuple[Tuple[str, ...], str], object]:
    """Failures of check_linfty keyed like :func:`homological_defects`."""
    out = {}
    for rep in check_linfty(L, max_arity):
        for tup, val in rep.values.items():
            for k, v in val.items():
                out[(tuple(tup), k)] = v
    return out


def ce_with_coefficients(L: LInftyStructure, E, connection: Mapping[str, Mapping], higher=None):
    """Chevalley-Eilenberg complex of ``L`` with values in a complex of free modules.

    ``E`` is a :class:`~linfty.graded.Complex` (its differential becomes the
    arity-0 part).  ``connection`` maps each degree -1 carrier label a to the
    matrix of nabla_{e_a} as ``{source_label: {target_label: coeff}}``;
    ``higher`` optionally maps label tuples of other arities to further
    matrices.  The result is a :class:`~linfty.zconn.ZConnection` over the
    CE algebra; its curvature vanishes exactly when the data is a
    representation up to homotopy.  Use :func:`truncated_ce` for finite
    pieces.
    """
    from .zconn import BaseCdga, ZConnection

    N = build_Q(L, check=False)
    base = BaseCdga(N.alg, N.Q)
    alg = N.alg
    labels = E.module.labels()
    images: Dict[str, Dict[str, Elem]] = {lab: {} for lab in labels}

    def add(src, tgt, val):
        cur = images[src].get(tgt, alg.zero())
        images[src][tgt] = cur + val

    for src, img in E.diff.items():
        for tgt, c in img.coeffs.items():
            add(src, tgt, alg.const(c))
    terms = [((a,), m) for a, m in connection.items()]
    terms += list((higher or {}).items())
    for tup, matrix in terms:
        tup = (tup,) if isinstance(tup, str) else tuple(tup)
        mono = _monomial(alg, [N.dual[a] for a in tup])
        for src, row in matrix.items():
            for tgt, c in row.items():
                coeff = c if isinstance(c, Elem) else alg.const(c)
                add(src, tgt, coeff.to(alg) * mono)
    return ZConnection.from_images(base, E.module, images)


def truncated_ce(conn, weights: Mapping[str, int], bound: int):
    """Finite subcomplex of O(E) tensor V spanned by monomials of weight <= bound.

    ``weights`` assigns a positive weight to every variable of the CE algebra;
    basis vectors e tensor m get the weight of m.  Raises InputError if the
    total differential does not preserve the truncation.
    Returns a :class:`~linfty.graded.Complex` with labels (e, monomial).
    """
    from itertools import product as iproduct

    from .graded import Complex, GradedModule, GradedElement

    alg = conn.base.alg
    w = [int(weights[n]) for n in alg.names]
    if any(x <= 0 for x in w):
        raise InputError("weights must be positive")
    monos = []

    def rec(i, cur, total):
        if i == alg.nvars:
            monos.append(tuple(cur))
            return
        top = 1 if alg.degrees[i] % 2 else (bound - total) // w[i]
        for e in range(0, top + 1):
            if total + e * w[i] > bound:
                break
            rec(i + 1, cur + [e], total + e * w[i])

    rec(0, [], 0)
    pairs = []
    for lab in conn.module.labels():
        for m in monos:
            pairs.append(((lab, m), conn.module.degree(lab) + alg.mono_degree(m)))
    module = GradedModule.from_pairs(pairs)
    diff = {}
    for (lab, m), _ in pairs:
        img = conn.apply_to(lab, Elem(alg, {m: 1}))
        coeffs = {}
        for tgt, el in img.items():
            for mono, c in el.terms.items():
                if (tgt, mono) not in module:
                    raise InputError(f"differential leaves the weight-{bound} truncation at {(lab, m)}")
                coeffs[(tgt, mono)] = c
        if coeffs:
            diff[(lab, m)] = GradedElement(module, coeffs)
    return Complex(module, diff, kind="cochain", check=False)
