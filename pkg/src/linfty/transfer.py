"""L-infinity algebroid structures on free resolutions of involutive modules.

Input is a resolution

    0 -> E_{-n} -> ... -> E_{-1} -> E_0 --rho--> F -> 0

of a module F of polynomial vector fields closed under the Lie bracket,
stored in the shifted picture (E_{-k} sits in degree -k-1).  The 2-bracket on
E_0 is the lift of the vector-field bracket through a section of rho; every
other bracket value is chosen so that the Jacobiator vanishes, by feeding
the residual to the preimage operator of the resolution:

    {x_1, ..., x_n}_n = P(-J_partial(x_1, ..., x_n)),

where J_partial is the n-th Jacobiator with this single value still zero and
P returns some z with d z = b for every boundary b.  Tuples are processed by
decreasing total degree, so every value J_partial needs is already known.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .cdga import Algebra, Elem
from .graded import GradedModule, InputError, StructureError
from .linfty import (LInftyStructure, Vec, VectorField, check_linfty, jacobiator, vec_add,
                     vec_scale, vf_bracket)

Preimage = Callable[[Vec], Optional[Vec]]


def _monomials(nvars: int, max_degree: int) -> List[Tuple[int, ...]]:
    out = []

    def rec(i, cur, left):
        if i == nvars:
            out.append(tuple(cur))
            return
        for e in range(left, -1, -1):
            rec(i + 1, cur + [e], left - e)

    rec(0, [], max_degree)
    return sorted(out, key=lambda m: (sum(m), m))


def _poly_degree(e: Elem) -> int:
    return max((sum(m) for m in e.terms), default=0)


def solve_polynomial(ring: Algebra, columns: Mapping[str, Mapping[str, Elem]],
                     rhs: Mapping[str, Elem], extra_degree: int = 1) -> Optional[Dict[str, Elem]]:
    """Find polynomial coefficients c_g with sum_g c_g * columns[g] = rhs.

    ``columns[g]`` and ``rhs`` are sparse maps key -> polynomial.  The
    unknown coefficients range over monomials up to deg(rhs) + extra_degree;
    the particular solution returned by row reduction is deterministic.
    """
    if not rhs:
        return {}
    top = max(_poly_degree(v) for v in rhs.values()) + extra_degree
    monos = _monomials(ring.nvars, top)
    unknowns = [(g, m) for g in columns for m in monos]
    rows_index: Dict[Tuple[str, Tuple[int, ...]], int] = {}
    entries: List[Tuple[int, int, object]] = []
    for j, (g, m) in enumerate(unknowns):
        xm = Elem(ring, {m: 1})
        for key, coeff in columns[g].items():
            for mono, c in (xm * coeff).terms.items():
                r = rows_index.setdefault((key, mono), len(rows_index))
                entries.append((r, j, c))
    b_entries = []
    for key, v in rhs.items():
        for mono, c in v.terms.items():
            if (key, mono) not in rows_index:
                return None
            b_entries.append((rows_index[(key, mono)], c))
    nrows = len(rows_index)
    A = linalg.zeros(nrows, len(unknowns))
    for r, j, c in entries:
        A[r][j] += c
    b = [0] * nrows
    for r, c in b_entries:
        b[r] += c
    sol = linalg.solve(A, b, len(unknowns))
    if sol is None:
        return None
    out: Dict[str, Elem] = {}
    for (g, m), c in zip(unknowns, sol):
        if c:
            out[g] = out.get(g, ring.zero()) + Elem(ring, {m: c})
    return {g: v for g, v in out.items() if v}


@dataclass
class ResolutionData:
    """A free resolution of an involutive module of vector fields on a chart.

    ``d`` maps each generator of E_{-k}, k >= 1, to its image in E_{-k+1};
    ``rho`` maps each generator of E_0 to a vector field.  ``section`` may fix
    delta on brackets of generators (``{(a, b): vec}``); otherwise delta is
    found by exact linear solving.  ``preimage`` may supply the contracting
    homotopy on boundaries; the default solves d z = b exactly.
    """

    chart: Tuple[str, ...]
    module: GradedModule
    d: Dict[str, Vec]
    rho: Dict[str, VectorField]
    section: Optional[Dict[Tuple[str, str], Vec]] = None
    preimage: Optional[Preimage] = None

    def __post_init__(self):
        self.chart = tuple(self.chart)
        self.ring = Algebra(self.chart)
        for lab in self.module.labels():
            if self.module.degree(lab) >= 0:
                raise InputError(f"{lab!r}: resolution generators sit in shifted degrees <= -1")
        self.d = {k: {t: self._c(c) for t, c in v.items()} for k, v in self.d.items()}
        self.d = {k: {t: c for t, c in v.items() if c} for k, v in self.d.items()}
        self.rho = {k: {t: self._c(c) for t, c in v.items()} for k, v in self.rho.items()}
        for lab, img in self.d.items():
            for t in img:
                if self.module.degree(t) != self.module.degree(lab) + 1:
                    raise InputError(f"d({lab}) has a component {t!r} of the wrong degree")
        for lab in self.rho:
            if self.module.degree(lab) != -1:
                raise InputError(f"rho is defined on E_0 only, not on {lab!r}")
        if self.section is not None:
            self.section = {tuple(k): {t: self._c(c) for t, c in v.items()}
                            for k, v in self.section.items()}

    def _c(self, c) -> Elem:
        if isinstance(c, Elem):
            return c if c.alg == self.ring else c.to(self.ring)
        return self.ring.const(c)

    def structure(self, brackets=None) -> LInftyStructure:
        table = {1: {(k,): v for k, v in self.d.items() if v}}
        for n, t in (brackets or {}).items():
            table.setdefault(n, {}).update(t)
        return LInftyStructure(self.chart, self.module, table, self.rho)

    def generators(self, degree: int) -> List[str]:
        return list(self.module.basis.get(degree, ()))

    # -- maps on polynomial vectors
    def apply_d(self, v: Vec) -> Vec:
        out: Vec = {}
        for lab, f in v.items():
            out = vec_add(out, self.d.get(lab, {}), f)
        return out

    def apply_rho(self, v: Vec) -> VectorField:
        out: VectorField = {}
        for lab, f in v.items():
            out = vec_add(out, self.rho.get(lab, {}), f)
        return out

    def default_preimage(self, b: Vec) -> Optional[Vec]:
        if not b:
            return {}
        degs = {self.module.degree(k) for k in b}
        if len(degs) != 1:
            raise InputError("inhomogeneous boundary")
        src = self.generators(degs.pop() - 1)
        return solve_polynomial(self.ring, {g: self.d.get(g, {}) for g in src}, b)

    def lift(self, b: Vec) -> Vec:
        """z with d z = b, via the supplied homotopy or exact solving."""
        op = self.preimage or self.default_preimage
        z = op(b)
        if z is None or self.apply_d(z) != {k: v for k, v in b.items() if v}:
            raise StructureError(f"obstruction {b} has no preimage under l_1 "
                                 f"(the supplied homotopy is not a contraction here)", witness=b)
        return z

    def delta(self, field_: VectorField, key=None) -> Vec:
        if self.section is not None and key is not None and key in self.section:
            v = self.section[key]
            if self.apply_rho(v) != {k: e for k, e in field_.items() if e}:
                raise StructureError(f"supplied section fails rho o delta = id on {key}", witness=key)
            return v
        cols = {g: self.rho.get(g, {}) for g in self.generators(-1)}
        sol = solve_polynomial(self.ring, cols, {k: e for k, e in field_.items() if e})
        if sol is None:
            raise StructureError(f"the module is not closed under brackets: {field_} has no preimage",
                                 witness=key)
        return sol

    # -- validation
    def check(self, degree_bound: int = 2) -> List[str]:
        """Problems found: d^2, rho o d, and exactness up to a polynomial degree."""
        problems = []
        for lab in self.module.labels():
            if self.apply_d(self.apply_d({lab: self.ring.one()})):
                problems.append(f"d^2 != 0 on {lab}")
            if self.module.degree(lab) == -2 and self.apply_rho(self.d.get(lab, {})):
                problems.append(f"rho o d != 0 on {lab}")
        for deg in sorted(self.module.degrees, reverse=True):
            ker = self._kernel_dim(deg, degree_bound)
            img = self._image_dim(deg - 1, degree_bound)
            if ker != img:
                problems.append(f"not exact at degree {deg} (kernel {ker}, image {img}) "
                                f"in polynomial degree <= {degree_bound}")
        return problems

    def _map_matrix(self, deg: int, bound: int, use_rho: bool):
        monos = _monomials(self.ring.nvars, bound)
        cols = []
        for g in self.generators(deg):
            img = self.rho.get(g, {}) if use_rho else self.d.get(g, {})
            for m in monos:
                xm = Elem(self.ring, {m: 1})
                cols.append({(k, mm): c for k, v in img.items() for mm, c in (xm * v).terms.items()})
        keys = sorted({k for c in cols for k in c}, key=repr)
        idx = {k: i for i, k in enumerate(keys)}
        A = linalg.zeros(len(keys), len(cols))
        for j, c in enumerate(cols):
            for k, v in c.items():
                A[idx[k]][j] = v
        return A, len(cols)

    def _kernel_dim(self, deg: int, bound: int) -> int:
        # kernel of the outgoing map restricted to coefficients of degree <= bound
        A, n = self._map_matrix(deg, bound, use_rho=(deg == -1))
        return n - (linalg.rank(A) if A else 0)

    def _image_dim(self, deg: int, bound: int) -> int:
        """Dimension of d(E_deg) intersected with coefficient degree <= bound."""
        if not self.generators(deg):
            return 0
        # images of coefficient-degree <= bound - 1 chains suffice when d is of
        # positive polynomial degree; take <= bound and intersect by degree
        monos = _monomials(self.ring.nvars, bound)
        vecs = []
        for g in self.generators(deg):
            for m in monos:
                xm = Elem(self.ring, {m: 1})
                img = {k: xm * v for k, v in self.d.get(g, {}).items()}
                if all(_poly_degree(v) <= bound for v in img.values()):
                    vecs.append({(k, mm): c for k, v in img.items() for mm, c in v.terms.items()})
        keys = sorted({k for c in vecs for k in c}, key=repr)
        idx = {k: i for i, k in enumerate(keys)}
        rows = [[0] * len(keys) for _ in vecs]
        for i, c in enumerate(vecs):
            for k, v in c.items():
                rows[i][idx[k]] = v
        return linalg.rank(rows) if rows and keys else 0


@dataclass
class TransferredStructure:
    """The constructed structure plus, per bracket value, the residual it cancels."""

    structure: LInftyStructure
    killed: Dict[Tuple[str, ...], Vec] = field(default_factory=dict)


def _tuples_by_degree(r: ResolutionData, n: int):
    labels = r.module.labels()
    deg = {lab: r.module.degree(lab) for lab in labels}
    tuples = []
    for tup in combinations_with_replacement(labels, n):
        if any(a == b and deg[a] % 2 for a, b in zip(tup, tup[1:])):
            continue
        target = sum(deg[t] for t in tup) + 1
        if not r.module.basis.get(target):
            continue
        tuples.append(tup)
    # decreasing total degree: the residual only uses tuples of larger degree
    tuples.sort(key=lambda t: -sum(deg[x] for x in t))
    return tuples


def _fill(r: ResolutionData, brackets: Dict[int, Dict[Tuple[str, ...], Vec]], n: int,
          killed: Dict[Tuple[str, ...], Vec], skip=lambda tup: False):
    table = brackets.setdefault(n, {})
    for tup in _tuples_by_degree(r, n):
        if skip(tup):
            continue
        L = r.structure(brackets)
        residual = jacobiator(L, n, tup)
        if not residual:
            continue
        z = r.lift(vec_scale(residual, -1))
        if z:
            table[tup] = z
            killed[tup] = residual
    if not table:
        del brackets[n]
    return brackets


def build_l2(r: ResolutionData, killed=None) -> Dict[Tuple[str, ...], Vec]:
    """2-bracket: delta[rho x, rho y] on E_0 pairs, then chain-map extension."""
    killed = {} if killed is None else killed
    brackets: Dict[int, Dict[Tuple[str, ...], Vec]] = {2: {}}
    zeros = r.generators(-1)
    for i, a in enumerate(zeros):
        for b in zeros[i + 1:]:
            br = vf_bracket(r.rho.get(a, {}), r.rho.get(b, {}), r.ring)
            if br:
                v = r.delta(br, key=(a, b))
                if v:
                    brackets[2][(a, b)] = v
    deg = {lab: r.module.degree(lab) for lab in r.module.labels()}
    _fill(r, brackets, 2, killed, skip=lambda t: deg[t[0]] == -1 and deg[t[1]] == -1)
    return brackets.get(2, {})


def build_l3(r: ResolutionData, l2: Mapping[Tuple[str, ...], Vec], killed=None) -> Dict[Tuple[str, ...], Vec]:
    return build_ln(r, {2: dict(l2)}, 3, killed)


def build_ln(r: ResolutionData, brackets: Mapping[int, Mapping[Tuple[str, ...], Vec]], n: int,
             killed=None) -> Dict[Tuple[str, ...], Vec]:
    """n-bracket values that cancel the arity-n Jacobiator residuals."""
    if n < 3:
        raise InputError("use build_l2 for arity 2")
    killed = {} if killed is None else killed
    table = {k: dict(v) for k, v in brackets.items()}
    table.pop(n, None)
    _fill(r, table, n, killed)
    return table.get(n, {})


def transfer(r: ResolutionData, max_arity: int = 4, check: bool = True) -> TransferredStructure:
    """Build brackets of arity 2..max_arity on the resolution."""
    if check:
        problems = r.check()
        if problems:
            raise StructureError("invalid resolution: " + "; ".join(problems), witness=problems)
    killed: Dict[Tuple[str, ...], Vec] = {}
    brackets: Dict[int, Dict[Tuple[str, ...], Vec]] = {}
    l2 = build_l2(r, killed)
    if l2:
        brackets[2] = l2
    for n in range(3, max_arity + 1):
        ln = build_ln(r, brackets, n, killed)
        if ln:
            brackets[n] = ln
    return TransferredStructure(r.structure(brackets), killed)


# ---------------------------------------------------------------------------
# fixtures


def rotation_resolution() -> ResolutionData:
    """Rotation fields on R^3 with their single Koszul relation."""
    ring = Algebra(["x", "y", "z"])
    x, y, z = ring.vars("x", "y", "z")
    M = GradedModule.from_pairs([("e1", -1), ("e2", -1), ("e3", -1), ("r", -2)])
    rho = {"e1": {"x": -y, "y": x}, "e2": {"y": -z, "z": y}, "e3": {"z": -x, "x": z}}
    d = {"r": {"e1": z, "e2": x, "e3": y}}
    return ResolutionData(("x", "y", "z"), M, d, rho)


def xy_resolution() -> ResolutionData:
    """F generated by X = x d/dy and Y = y d/dy, related by y X - x Y = 0."""
    ring = Algebra(["x", "y"])
    x, y = ring.vars("x", "y")
    M = GradedModule.from_pairs([("eX", -1), ("eY", -1), ("r", -2)])
    rho = {"eX": {"y": x}, "eY": {"y": y}}
    d = {"r": {"eX": y, "eY": -x}}
    return ResolutionData(("x", "y"), M, d, rho)


def commuting_resolution() -> ResolutionData:
    M = GradedModule.from_pairs([("ex", -1), ("ey", -1)])
    return ResolutionData(("x", "y"), M, {}, {"ex": {"x": 1}, "ey": {"y": 1}})
