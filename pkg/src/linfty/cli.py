"""Batch front end: ``linfty <command> manifest.json [--report json|text]``.

Exit codes: 0 all checks pass, 1 a check fails, 2 the manifest cannot be
parsed or is invalid, 3 an internal invariant broke.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import sympy as sp

from .graded import GradedModule, InputError, StructureError

SCHEMA = "linfty-manifest/1"


class ManifestError(InputError):
    pass


# ---------------------------------------------------------------------------
# report


class Report:
    def __init__(self, command: str):
        self.command = command
        self.checks: List[Dict[str, Any]] = []
        self.results: Dict[str, Any] = {}

    def check(self, name: str, passed: bool, witness: Any = None):
        entry = {"name": name, "passed": bool(passed)}
        if not passed and witness is not None:
            entry["witness"] = _jsonable(witness)
        self.checks.append(entry)

    def result(self, key: str, value: Any):
        self.results[key] = _jsonable(value)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> Dict[str, Any]:
        return {"command": self.command, "status": "pass" if self.passed else "fail",
                "checks": self.checks, "results": self.results}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2, sort_keys=True)
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            line = f"  [{'pass' if c['passed'] else 'FAIL'}] {c['name']}"
            if "witness" in c:
                line += f"  witness={json.dumps(c['witness'], sort_keys=True)}"
            lines.append(line)
        for k in sorted(self.results):
            lines.append(f"  {k} = {json.dumps(self.results[k], sort_keys=True)}")
        return "\n".join(lines)


def _jsonable(x: Any) -> Any:
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_jsonable(v) for v in x), key=str)
    if isinstance(x, sp.MatrixBase):
        return [[str(x[i, j]) for j in range(x.cols)] for i in range(x.rows)]
    return str(x)


# ---------------------------------------------------------------------------
# parsing helpers


def _need(m: Dict, key: str, kind=None):
    if key not in m:
        raise ManifestError(f"manifest is missing {key!r}")
    v = m[key]
    if kind is not None and not isinstance(v, kind):
        raise ManifestError(f"{key!r} has the wrong type")
    return v


def rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ManifestError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ManifestError(f"not a rational: {x!r}") from exc
    raise ManifestError(f"rationals are integers or 'p/q' strings, got {x!r}")


def poly_elem(alg, data):
    """[[coefficient, [exponents in alg.names order]], ...] -> Elem."""
    from .cdga import Elem

    if isinstance(data, (int, str)):
        return alg.const(rational(data))
    if not isinstance(data, list):
        raise ManifestError("polynomial must be a list of [coefficient, exponents]")
    terms = {}
    for item in data:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], list)):
            raise ManifestError(f"bad polynomial term {item!r}")
        c, exps = item
        if len(exps) != alg.nvars or not all(isinstance(e, int) and e >= 0 for e in exps):
            raise ManifestError(f"exponent vector {exps!r} does not match variables {list(alg.names)}")
        out = alg.monomial({n: e for n, e in zip(alg.names, exps) if e}, rational(c))
        for mono, cc in out.terms.items():
            terms[mono] = terms.get(mono, 0) + cc
    return Elem(alg, {m: c for m, c in terms.items() if c})


def poly_expr(names: Sequence[str], data) -> sp.Expr:
    if isinstance(data, (int, str)):
        q = rational(data)
        return sp.Rational(q.numerator, q.denominator)
    if not isinstance(data, list):
        raise ManifestError("polynomial must be a list of [coefficient, exponents]")
    out = sp.Integer(0)
    for item in data:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], list)) or len(item[1]) != len(names):
            raise ManifestError(f"bad polynomial term {item!r} for variables {list(names)}")
        q = rational(item[0])
        term = sp.Rational(q.numerator, q.denominator)
        for n, e in zip(names, item[1]):
            if not isinstance(e, int) or e < 0:
                raise ManifestError(f"bad exponent {e!r}")
            term *= sp.Symbol(n) ** e
        out += term
    return out


def graded_basis(data) -> GradedModule:
    if not isinstance(data, list) or not data:
        raise ManifestError("basis must be a nonempty list of {label, degree}")
    pairs = []
    for b in data:
        if not isinstance(b, dict) or not isinstance(b.get("label"), str) or not isinstance(b.get("degree"), int):
            raise ManifestError(f"bad basis entry {b!r}")
        pairs.append((b["label"], b["degree"]))
    if len({p[0] for p in pairs}) != len(pairs):
        raise ManifestError("duplicate basis labels")
    return GradedModule.from_pairs(pairs)


# ---------------------------------------------------------------------------
# L-infinity manifests


def load_linfty(m: Dict):
    from . import fixtures
    from .cdga import Algebra
    from .linfty import LInftyStructure

    if "fixture" in m:
        table = {"abelian": fixtures.abelian, "tangent_r2": fixtures.tangent_r2, "tangent_r1": fixtures.tangent_r1,
                 "sl2": fixtures.sl2, "sl2_corrupt": lambda: fixtures.sl2(corrupt=True),
                 "affine_line": fixtures.affine_line}
        name = m["fixture"]
        if isinstance(name, str) and name.startswith("random:"):
            return fixtures.random_valid_structure(int(name.split(":", 1)[1]))
        if name == "rotation_transfer":
            from .transfer import rotation_resolution, transfer
            return transfer(rotation_resolution(), 4).structure
        if name not in table:
            raise ManifestError(f"unknown L-infinity fixture {name!r}")
        return table[name]()
    chart = m.get("chart", [])
    if not isinstance(chart, list) or not all(isinstance(c, str) for c in chart):
        raise ManifestError("chart must be a list of variable names")
    module = graded_basis(_need(m, "basis"))
    ring = Algebra(chart)
    brackets: Dict[int, Dict] = {}
    for b in m.get("brackets", []):
        tup = tuple(_need(b, "tuple", list))
        val = _need(b, "value", dict)
        brackets.setdefault(len(tup), {})[tup] = {lab: poly_elem(ring, p) for lab, p in val.items()}
    anchor = {}
    for a in m.get("anchor", []):
        anchor[_need(a, "label", str)] = {v: poly_elem(ring, p) for v, p in _need(a, "field", dict).items()}
    return LInftyStructure(chart, module, brackets, anchor)


def _bracket_table(L) -> Dict[str, Any]:
    from .cdga import format_elem

    out = {}
    for n in sorted(L.brackets):
        for tup in sorted(L.brackets[n]):
            out[",".join(tup)] = {lab: format_elem(c) for lab, c in sorted(L.brackets[n][tup].items())}
    for lab in sorted(L.anchor):
        out[f"rho({lab})"] = {v: format_elem(c) for v, c in sorted(L.anchor[lab].items())}
    return out


def cmd_check_linfty(m, rep: Report):
    from .linfty import check_linfty

    L = load_linfty(m)
    arity = m.get("max_arity")
    for r in check_linfty(L, arity):
        w = r.witness()
        rep.check(f"{r.kind} arity {r.arity} ({r.checked} tuples)", r.passed,
                  None if w is None else {"tuple": list(w) if isinstance(w, tuple) else w,
                                          "residual": str(r.values[w])})


def cmd_build_q(m, rep: Report):
    from .cdga import format_elem, is_homological
    from .ce_dual import build_Q

    L = load_linfty(m)
    N = build_Q(L, check=False)
    ok, bad = is_homological(N.Q)
    rep.check("Q^2 = 0", ok, bad)
    rep.result("Q", {n: format_elem(N.Q.value(n)) for n in N.alg.names})


def cmd_derived_brackets(m, rep: Report):
    from .ce_dual import build_Q, derived_brackets

    L = load_linfty(m)
    L2 = derived_brackets(build_Q(L))
    rep.check("derived brackets of Q reproduce the input", L2 == L)
    rep.result("brackets", _bracket_table(L2))


def cmd_transfer(m, rep: Report):
    from .linfty import check_linfty
    from .transfer import commuting_resolution, rotation_resolution, transfer, xy_resolution

    table = {"rotation": rotation_resolution, "xy": xy_resolution, "commuting": commuting_resolution}
    name = _need(m, "fixture", str)
    if name not in table:
        raise ManifestError(f"unknown resolution {name!r}")
    arity = int(m.get("max_arity", 4))
    T = transfer(table[name](), arity)
    again = transfer(table[name](), arity)
    rep.check("deterministic rebuild", again.structure == T.structure)
    for r in check_linfty(T.structure, arity):
        rep.check(f"{r.kind} arity {r.arity}", r.passed, r.witness())
    rep.result("brackets", _bracket_table(T.structure))


# ---------------------------------------------------------------------------
# Z-connections


def load_zconn(m: Dict):
    from . import fixtures
    from .zconn import MorphismElement, ZConnection, de_rham_base

    if "fixture" in m:
        table = fixtures.zconn_fixtures()
        if m["fixture"] not in table:
            raise ManifestError(f"unknown connection fixture {m['fixture']!r}")
        return table[m["fixture"]]
    chart = _need(m, "chart", list)
    base = de_rham_base(chart)
    module = graded_basis(_need(m, "basis"))
    entries = {}
    for e in _need(m, "entries", list):
        key = (_need(e, "row", str), _need(e, "col", str))
        entries[key] = poly_elem(base.alg, _need(e, "form"))
    return ZConnection(base, module, MorphismElement(module, module, base.alg, entries))


def cmd_check_zconn(m, rep: Report):
    from .zconn import curvature, d_hom, identity

    c = load_zconn(m)
    R = curvature(c)
    rep.result("curvature", str(R))
    want = m.get("expect_flat", True)
    rep.check("flat" if want else "curved", R.is_zero() == bool(want), None if R.is_zero() else str(R))
    if R.is_zero():
        rep.check("d_Hom(id) = 0", d_hom(identity(c.module, c.alg), c, c).is_zero())


def cmd_chern(m, rep: Report):
    from .zconn import bianchi_defect, chern_form

    c = load_zconn(m)
    kmax = int(m.get("k_max", 3))
    for i in range(kmax + 1):
        rep.check(f"Bianchi [E, R^{i}] = 0", bianchi_defect(c, i).is_zero())
    for k in range(1, kmax + 1):
        ch = chern_form(c, k)
        dch = c.base.d.apply(ch)
        rep.check(f"d Str(R^{k}) = 0", not dch, str(dch))
        rep.result(f"Str(R^{k})", str(ch))


def cmd_transgression(m, rep: Report):
    from .zconn import transgression

    c0 = load_zconn(_need(m, "from", dict))
    c1 = load_zconn(_need(m, "to", dict))
    for k in range(1, int(m.get("k_max", 2)) + 1):
        T = transgression(c0, c1, k)
        rep.check(f"Str(R1^{k}) - Str(R0^{k}) = dP", T.certified, str(T.difference))
        rep.result(f"P_{k}", str(T.primitive))


def cmd_atiyah(m, rep: Report):
    from . import fixtures
    from .zconn import atiyah_cocycle, atiyah_primitive

    table = fixtures.atiyah_fixtures()
    name = _need(m, "fixture", str)
    if name not in table:
        raise ManifestError(f"unknown Atiyah fixture {name!r}")
    f = table[name]
    a = atiyah_cocycle(f["ext_a"], f["normal"])
    b = atiyah_cocycle(f["ext_b"], f["normal"])
    rep.check("alpha closed (first extension)", a.closed)
    rep.check("alpha closed (second extension)", b.closed)
    omega, ok = atiyah_primitive(f["ext_a"], f["ext_b"], f["normal"])
    rep.check("extensions differ by [E, omega]", ok)
    if f["zero"]:
        rep.check("alpha = 0", a.cocycle.is_zero() and b.cocycle.is_zero())
    rep.result("alpha", str(a.cocycle))
    rep.result("omega", str(omega))


# ---------------------------------------------------------------------------
# simplicial


def load_category(m: Dict):
    from .simplicial import FiniteCategory, cyclic_group, poset_category

    if "cyclic" in m:
        return cyclic_group(int(m["cyclic"]))
    if "poset" in m:
        p = m["poset"]
        elems = _need(p, "elements", list)
        rel = {tuple(x) for x in _need(p, "leq", list)}
        return poset_category(elems, lambda a, b: a == b or (a, b) in rel)
    objs = _need(m, "objects", list)
    mors = {_need(x, "name", str): (x["source"], x["target"]) for x in _need(m, "morphisms", list)}
    ids = _need(m, "identities", dict)
    comp = {(c["after"], c["before"]): c["result"] for c in _need(m, "compose", list)}
    return FiniteCategory(objs, mors, ids, comp)


def cmd_kan(m, rep: Report):
    from .simplicial import kan_check, nerve, unique_kan_check

    cat = load_category(m)
    top = int(m.get("top", 4))
    X = nerve(cat, top)
    unique = bool(m.get("unique", True))
    expect = m.get("expect", True)
    verdicts = {}
    for n in range(2, top + 1):
        for i in range(n + 1):
            ok = unique_kan_check(X, n, i) if unique else kan_check(X, n, i)
            verdicts[f"{n},{i}"] = ok
    if expect == "outer-fails":
        bad = [k for k, v in verdicts.items() if not v and k.split(",")[1] in ("0", k.split(",")[0])]
        rep.check("some outer horn has no filler", bool(bad))
    else:
        for k, v in verdicts.items():
            rep.check(f"horn {k} {'unique ' if unique else ''}filler", v)
    rep.result("horns", verdicts)


def cmd_path_object(m, rep: Report):
    from .simplicial import nerve, path_object, relative_kan_check

    cat = load_category(m)
    top = int(m.get("top", 3))
    X = nerve(cat, top)
    P = path_object(X, top - 1)
    rep.result("sizes", [len(P.space.simplices(n)) for n in range(P.space.top + 1)])
    for n in range(P.space.top + 1):
        for x in X.simplices(n):
            c = P.const[x]
            if P.ev0[c] != x or P.ev1[c] != x:
                rep.check(f"ev o const = id at level {n}", False, repr(x))
                break
        else:
            rep.check(f"ev o const = id at level {n}", True)
    for n in range(1, min(2, P.space.top) + 1):
        for i in range(n + 1):
            rep.check(f"relative Kan ({n},{i})", relative_kan_check(P.space, X, P.ev0, n, i))


def cmd_prism(m, rep: Report):
    from .simplicial import prism_decomposition, prism_top_cells

    n = int(_need(m, "n"))
    cells = prism_decomposition(n)
    ref = prism_top_cells(n)
    rep.check("vertex formula matches the product's top cells", sorted(cells) == sorted(ref))
    rep.check("n + 1 top cells", len(cells) == n + 1)
    rep.result("cells", [list(map(list, c)) for c in cells])


def cmd_collapsible(m, rep: Report):
    from itertools import combinations

    from .simplicial import collapsible_decomposition, standard_simplex

    n = int(_need(m, "n"))
    face = sorted({int(v) for v in _need(m, "face", list)})
    if not face or face[0] < 0 or face[-1] > n:
        raise ManifestError(f"face must be a nonempty subset of 0..{n}")
    S = [c for r in range(1, len(face) + 1) for c in combinations(face, r)]
    steps = collapsible_decomposition(S, standard_simplex(n, n))
    rep.check("horn-filling decomposition found", steps is not None)
    if steps is not None:
        rep.result("steps", [{"simplex": repr(s.simplex), "face": s.face_index} for s in steps])


# ---------------------------------------------------------------------------
# local systems


def _matrix(data) -> sp.Matrix:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise ManifestError("matrix must be a list of rows")
    rows = [[sp.Rational(rational(x).numerator, rational(x).denominator) for x in r] for r in data]
    return sp.Matrix(rows)


def load_locsys(m: Dict):
    from .locsys import GradedSpace, InftyLocalSystem
    from .simplicial import integer_nerve_window, ordered_complex

    base = _need(m, "base", dict)
    degrees = tuple(_need(m, "degrees", list))
    space = GradedSpace(degrees)
    if "integer_window" in base:
        w = base["integer_window"]
        K = integer_nerve_window(int(w["bound"]), int(w["top"]))
        vals = {(): _matrix(m.get("differential", [[0] * len(degrees)] * len(degrees)))}
        if "generator" in m:
            A = _matrix(m["generator"])
            for x in K.nondegenerate(1):
                vals[x] = A ** x[0]
        for v in m.get("values", []):
            vals[tuple(v["simplex"])] = _matrix(v["matrix"])
        return InftyLocalSystem(K, {(): space}, vals)
    if "ordered_complex" in base:
        oc = base["ordered_complex"]
        K = ordered_complex([tuple(f) for f in oc["maximal"]], int(oc.get("top", 2)))
        vals = {tuple(v["simplex"]): _matrix(v["matrix"]) for v in m.get("values", [])}
        return InftyLocalSystem(K, {x: space for x in K.simplices(0)}, vals)
    raise ManifestError("base must be integer_window or ordered_complex")


def cmd_mc_check(m, rep: Report):
    from .locsys import mc_check

    L = load_locsys(m)
    r = mc_check(L)
    w = r.witness()
    rep.check("Maurer-Cartan", r.passed, None if w is None else {"simplex": list(w), "residual": r.residual[w]})


def cmd_locsys_ops(m, rep: Report):
    import random

    from .locsys import D, LocMorphism, cone, identity, is_homotopy_equivalence, mc_check, require_mc, shift

    L = require_mc(load_locsys(m))
    rep.check("D(id) = 0", D(identity(L)).is_zero())
    rng = random.Random(int(m.get("seed", 0)))
    K = L.K
    for trial in range(int(m.get("trials", 3))):
        vals = {}
        p = rng.choice([-1, 0, 1])
        for x in identity(L).simplices():
            k = K.level_of[x]
            src, tgt = L.source_space(x), L.target_space(x)
            M = sp.zeros(tgt.dim, src.dim)
            for i in range(tgt.dim):
                for j in range(src.dim):
                    if tgt.degrees[i] - src.degrees[j] == p - k:
                        M[i, j] = rng.randint(-2, 2)
            vals[x] = M
        phi = LocMorphism(L, L, p, vals)
        rep.check(f"D^2 = 0 (trial {trial})", D(D(phi)).is_zero())
    for i in (1, 2):
        rep.check(f"shift by {i} keeps Maurer-Cartan", mc_check(shift(L, i)).passed)
        rep.check(f"shift by {i} then {-i} is the identity", shift(shift(L, i), -i) == L)
    c = cone(identity(L))
    rep.check("cone(id) is a local system", mc_check(c).passed)
    rep.check("id is a homotopy equivalence", is_homotopy_equivalence(identity(L)))


# ---------------------------------------------------------------------------
# iterated integrals


def load_chart(m: Dict):
    from .holonomy import FoliatedChart

    ch = _need(m, "chart", dict)
    leaf = tuple(_need(ch, "leaf", list))
    trans = tuple(ch.get("transverse", []))
    if not leaf:
        raise ManifestError("chart needs at least one leaf variable")
    return FoliatedChart(leaf, trans)


def load_form(chart, data):
    """A form is a list of {"d": [leaf variables], "poly": polynomial}."""
    from .holonomy import Form

    if not isinstance(data, list):
        raise ManifestError("form must be a list of {d, poly} terms")
    terms = {}
    for t in data:
        key = tuple(_need(t, "d", list))
        terms[key] = terms.get(key, 0) + poly_expr(chart.coords, _need(t, "poly"))
    return chart.check_form(Form(terms))


def _points(data) -> tuple:
    return tuple(tuple(rational(c) for c in p) for p in data)


def cmd_chen(m, rep: Report):
    from .holonomy import chen, straight_path

    chart = load_chart(m)
    word = [load_form(chart, f) for f in _need(m, "word", list)]
    start, end = _points(_need(m, "path", list))
    val = chen(word, straight_path(chart, start, end), chart)
    rep.result("value", str(val))
    if "expect" in m:
        exp = rational(m["expect"])
        got = val.terms.get((), 0)
        rep.check("value matches expectation", sp.sympify(got) == sp.Rational(exp.numerator, exp.denominator), str(got))


def cmd_phi(m, rep: Report):
    from .holonomy import AffineSimplex, chain_map_defect, gugenheim_defect, phi

    chart = load_chart(m)
    word = [load_form(chart, f) for f in _need(m, "word", list)]
    sigma = AffineSimplex(chart, _points(_need(m, "simplex", list)))
    rep.result("value", str(phi(word, sigma)))
    if m.get("check_relations"):
        if len(word) == 1 and sigma.dim >= 1:
            dfx = chain_map_defect(word[0], sigma, chart)
            rep.check("phi_1 chain map", dfx == 0, str(dfx))
        if len(word) == 2 and sigma.dim == 2:
            dfx = gugenheim_defect(word[0], word[1], sigma, chart)
            rep.check("Gugenheim relation", dfx == 0, str(dfx))


def load_connection(m: Dict):
    from .holonomy import ConnectionOnChart, MatForm, Form, horizontal_fixtures, plane_fixture

    if "fixture" in m:
        table = dict(horizontal_fixtures())
        table["plane"] = plane_fixture()
        if m["fixture"] not in table:
            raise ManifestError(f"unknown connection fixture {m['fixture']!r}")
        return table[m["fixture"]]
    chart = load_chart(m)
    degrees = tuple(_need(m, "degrees", list))
    n = len(degrees)
    ent = [[Form() for _ in range(n)] for _ in range(n)]
    for e in _need(m, "omega", list):
        i, j = int(_need(e, "row")), int(_need(e, "col"))
        if not (0 <= i < n and 0 <= j < n):
            raise ManifestError(f"entry ({i},{j}) out of range")
        ent[i][j] = ent[i][j] + load_form(chart, _need(e, "form", list))
    return ConnectionOnChart(chart, degrees, MatForm(ent, degrees, degrees))


def cmd_rh(m, rep: Report):
    from .holonomy import AffineSimplex, holonomy_local_system, rh_holonomy, square_complex
    from .locsys import mc_check

    conn = load_connection(m)
    order = int(m.get("order", 4))
    exact = bool(m.get("exact", True))
    rep.result("flat", conn.is_flat())
    if "simplex" in m:
        sigma = AffineSimplex(conn.chart, _points(m["simplex"]))
        res = rh_holonomy(conn, sigma, order, exact)
        rep.result("psi", res.matrix)
        rep.result("exact", res.exact)
        if "expect" in m:
            rep.check("psi matches expectation", res.matrix == _matrix(m["expect"]), res.matrix)
    if m.get("square", False):
        K, pts = square_complex(conn.chart)
        r = mc_check(holonomy_local_system(conn, K, pts, order, exact))
        want = m.get("expect_mc", True)
        w = r.witness()
        rep.check("Maurer-Cartan over the square" + ("" if want else " fails"), r.passed == bool(want),
                  None if w is None else {"simplex": list(w), "residual": r.residual[w]})


def cmd_foliated_cohomology(m, rep: Report):
    from .holonomy import foliated_cohomology

    chart = load_chart(m)
    bound = int(m.get("bound", 4))
    H = foliated_cohomology(chart, bound)
    rep.result("dims", {str(i): {str(w): d for w, d in sorted(v.items())} for i, v in sorted(H.items())})
    from math import comb

    q = len(chart.transverse)
    expect0 = {w: comb(w + q - 1, q - 1) if q else (1 if w == 0 else 0) for w in range(bound + 1)}
    got0 = {w: H.get(0, {}).get(w, 0) for w in range(bound + 1)}
    rep.check("H^0 = polynomials in the transverse variables", got0 == expect0, got0)
    rep.check("H^i = 0 for i > 0", all(not v for i, v in H.items() if i > 0))


COMMANDS: Dict[str, Callable] = {
    "check-linfty": cmd_check_linfty,
    "build-q": cmd_build_q,
    "derived-brackets": cmd_derived_brackets,
    "transfer": cmd_transfer,
    "check-zconn": cmd_check_zconn,
    "chern": cmd_chern,
    "transgression": cmd_transgression,
    "atiyah": cmd_atiyah,
    "kan": cmd_kan,
    "path-object": cmd_path_object,
    "prism": cmd_prism,
    "collapsible": cmd_collapsible,
    "mc-check": cmd_mc_check,
    "locsys-ops": cmd_locsys_ops,
    "chen": cmd_chen,
    "phi": cmd_phi,
    "rh": cmd_rh,
    "foliated-cohomology": cmd_foliated_cohomology,
}


def _threads() -> int:
    raw = os.environ.get("LINFTY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ManifestError(f"LINFTY_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ManifestError(f"LINFTY_THREADS must be a positive integer, got {raw!r}")
    return n


def run(command: str, path: str, fmt: str = "text", out=None) -> int:
    out = out or sys.stdout
    rep = Report(command)
    try:
        _threads()
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ManifestError(f"cannot read {path}: {exc}") from exc
        if not text.strip():
            raise ManifestError("empty manifest")
        try:
            manifest = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc}") from exc
        if not isinstance(manifest, dict) or not manifest:
            raise ManifestError("manifest must be a nonempty JSON object")
        schema = manifest.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise ManifestError(f"unsupported schema {schema!r}")
        COMMANDS[command](manifest, rep)
    except InputError as exc:
        print(json.dumps({"command": command, "status": "error", "error": str(exc)}, sort_keys=True)
              if fmt == "json" else f"{command}: input error: {exc}", file=out)
        return 2
    except StructureError as exc:
        rep.check("structure", False, {"error": str(exc), "witness": getattr(exc, "witness", None)})
        print(rep.render(fmt), file=out)
        return 1
    except (KeyError, TypeError, ValueError) as exc:
        print(f"{command}: input error: {exc!r}", file=out)
        return 2
    except Exception as exc:  # noqa: BLE001 - anything else is our bug
        print(f"{command}: internal error: {exc!r}", file=out)
        return 3
    print(rep.render(fmt), file=out)
    return 0 if rep.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="linfty", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("manifest")
    parser.add_argument("--report", choices=["json", "text"], default="text")
    args = parser.parse_args(argv)
    return run(args.command, args.manifest, args.report)


if __name__ == "__main__":
    raise SystemExit(main())
