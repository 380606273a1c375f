"""Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.

Every criterion collects named sub-checks, records a one-line verdict (printed
in the terminal summary by conftest.py, or directly when this file is run as
a script) and then asserts that all sub-checks hold within the time budget.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction
from itertools import combinations, permutations
from math import comb

import pytest
import sympy as sp

from linfty import fixtures
from linfty.cdga import is_homological
from linfty.ce_dual import build_Q, derived_brackets, homological_defects, linfty_defects
from linfty.holonomy import (PLANE, AffineSimplex, Form, chain_map_defect, foliated_cohomology,
                             gugenheim_defect, holonomy_local_system, horizontal_fixtures,
                             inject_curvature, integrate_chain, theta_negative_face,
                             theta_positive_face, chen, phi, rh_holonomy, square_complex,
                             straight_path, sym, theta_adjoint_integral, tnames)
from linfty.linfty import is_linfty, vf_bracket
from linfty.locsys import D, cone, cup, identity, mc_check, shift
from linfty.simplicial import (collapsible_decomposition, cyclic_group, is_coskeletal, kan_check,
                               nerve, path_object, prism_decomposition, prism_top_cells, product,
                               relative_kan_check, standard_simplex, unique_kan_check)
from linfty.transfer import rotation_resolution, transfer
from linfty.zconn import (ZConnection, atiyah_cocycle, atiyah_primitive, bianchi_defect, chern_form,
                          supertrace, transgression)

RESULTS: dict = {}


class Criterion:
    """Collects sub-checks for one criterion and renders the verdict line."""

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.failures = []
        self.count = 0

    def check(self, name: str, ok: bool):
        self.count += 1
        if not ok:
            self.failures.append(name)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
        slow = elapsed > self.budget
        ok = not self.failures and not slow
        line = (f"{'PASS' if ok else 'FAIL'} [{self.number}] {self.title}: "
                f"{self.count - len(self.failures)}/{self.count} checks, {elapsed:.1f}s (budget {self.budget:.0f}s)")
        if self.failures:
            line += f"; failing: {', '.join(self.failures[:4])}"
        if slow:
            line += "; over time budget"
        RESULTS[self.number] = line
        print(line)
        if exc_type is None:
            assert ok, line
        return False


# ---------------------------------------------------------------------------


def test_01_jacobi_iff_q_squared():
    with Criterion(1, "Jacobi <=> Q^2 = 0 on randomized structures", 10) as c:
        for seed in range(20):
            L = fixtures.random_valid_structure(seed)
            N = build_Q(L, check=False)
            c.check(f"valid#{seed} check_linfty", is_linfty(L))
            c.check(f"valid#{seed} Q^2", is_homological(N.Q)[0])
            C = fixtures.corrupt(L, seed)
            NC = build_Q(C, check=False)
            c.check(f"corrupt#{seed} check_linfty fails", not is_linfty(C))
            c.check(f"corrupt#{seed} Q^2 fails", not is_homological(NC.Q)[0])
            c.check(f"corrupt#{seed} witnesses match", set(homological_defects(NC)) == set(linfty_defects(C)))
            # every single-slot change: the two verdicts agree, witness for witness
            for tup, lab in fixtures.corruption_slots(L):
                B = fixtures.bump(L, tup, lab, L.ring.one())
                NB = build_Q(B, check=False)
                same = is_linfty(B) == is_homological(NB.Q)[0]
                c.check(f"sweep#{seed} {tup}->{lab}",
                        same and set(homological_defects(NB)) == set(linfty_defects(B)))


def test_02_voronov_roundtrip():
    with Criterion(2, "derived_brackets(build_Q(L)) = L", 5) as c:
        structures = {
            "abelian": fixtures.abelian(),
            "tangent_r2": fixtures.tangent_r2(),
            "sl2": fixtures.sl2(),
            "rotation_transfer": transfer(rotation_resolution(), 4).structure,
        }
        for name, L in structures.items():
            c.check(name, derived_brackets(build_Q(L)) == L)


def test_03_transfer_soundness():
    with Criterion(3, "transfer on the rotation foliation", 20) as c:
        r = rotation_resolution()
        T = transfer(r, 4)
        L = T.structure
        c.check("check_linfty to arity 4", is_linfty(L, 4))
        zeros = r.generators(-1)
        for a, b in combinations(zeros, 2):
            lhs = L.anchor_of(L.gen_bracket((a, b)))
            rhs = vf_bracket(L.anchor_of(L.basis_vec(a)), L.anchor_of(L.basis_vec(b)), L.ring)
            diff = {v: lhs.get(v, L.ring.zero()) - rhs.get(v, L.ring.zero()) for v in L.chart}
            c.check(f"rho strict on ({a},{b})", not any(diff.values()))
        c.check("deterministic rebuild", transfer(rotation_resolution(), 4).structure == L)


def test_04_chern_weil():
    with Criterion(4, "Chern-Weil closedness, Bianchi, transgression, supertrace", 10) as c:
        conns = fixtures.zconn_fixtures()
        for name, conn in conns.items():
            for i in range(4):
                c.check(f"{name} Bianchi {i}", bianchi_defect(conn, i).is_zero())
            for k in range(1, 4):
                c.check(f"{name} d Str(R^{k})", not conn.base.d.apply(chern_form(conn, k)))
        pairs = [("graded_flat", "graded_gauged"), ("graded_flat", "graded_curved"),
                 ("graded_gauged", "graded_curved")]
        for name in ("line", "pair"):
            triv = ZConnection.trivial(conns[name].base, conns[name].module)
            conns[name + "_trivial"] = triv
            pairs.append((name + "_trivial", name))
        for a, b in pairs:
            for k in range(1, 4):
                T = transgression(conns[a], conns[b], k)
                d = conns[a].base.d
                lhs = chern_form(conns[b], k) - chern_form(conns[a], k)
                c.check(f"{a}->{b} k={k}", T.certified and lhs == d.apply(T.primitive))
        G = conns["graded_flat"].module
        A = conns["graded_flat"].alg
        rng = random.Random(4)
        for n in range(50):
            phi_ = fixtures.random_morphism(G, G, A, rng.randint(-1, 3), rng, offdiagonal=True)
            c.check(f"Str off-diagonal #{n}", not supertrace(phi_))


def test_05_atiyah():
    with Criterion(5, "Atiyah cocycle closed, extension-independent, zero on abelian", 10) as c:
        for name, f in fixtures.atiyah_fixtures().items():
            a = atiyah_cocycle(f["ext_a"], f["normal"])
            b = atiyah_cocycle(f["ext_b"], f["normal"])
            c.check(f"{name} closed (a)", a.closed)
            c.check(f"{name} closed (b)", b.closed)
            _, ok = atiyah_primitive(f["ext_a"], f["ext_b"], f["normal"])
            c.check(f"{name} difference exact", ok)
            if f["zero"]:
                c.check(f"{name} alpha = 0", a.cocycle.is_zero() and b.cocycle.is_zero())


def test_06_simplicial():
    with Criterion(6, "nerves, prisms, path object, collapsible faces", 20) as c:
        for seed in range(5):
            G = fixtures.random_groupoid(seed)
            X = nerve(G, 4)
            for n in range(2, 5):
                for i in range(n + 1):
                    c.check(f"groupoid#{seed} unique Kan ({n},{i})", unique_kan_check(X, n, i))
            c.check(f"groupoid#{seed} 2-coskeletal", is_coskeletal(X, 2, 4))
            C = fixtures.random_category(seed)
            Y = nerve(C, 4)
            outer = [(n, i) for n in range(2, 5) for i in (0, n) if not kan_check(Y, n, i)]
            c.check(f"category#{seed} outer horn fails", not C.is_groupoid() and bool(outer))
        for n in range(4):
            cells = prism_decomposition(n)
            c.check(f"prism {n} formula", sorted(cells) == prism_top_cells(n))
            c.check(f"prism {n} count", len(set(cells)) == n + 1)
        X = nerve(cyclic_group(2), 3)
        P = path_object(X, 2)
        for n in range(3):
            c.check(f"d0* s0* = id at {n}", all(P.ev0[P.const[x]] == x for x in X.simplices(n)))
            c.check(f"d1* s0* = id at {n}", all(P.ev1[P.const[x]] == x for x in X.simplices(n)))
        XX = product(X, X, 2)
        ends = {x: (P.ev0[x], P.ev1[x]) for n in range(3) for x in P.space.simplices(n)}
        for n in (1, 2):
            for i in range(n + 1):
                c.check(f"relative Kan ({n},{i})", relative_kan_check(P.space, XX, ends, n, i))
        for n in range(4):
            T = standard_simplex(n, n)
            for k in range(n + 1):
                for face in combinations(range(n + 1), k + 1):
                    S = [s for r in range(1, k + 2) for s in combinations(face, r)]
                    c.check(f"collapsible {face} in D[{n}]", collapsible_decomposition(S, T) is not None)


def test_07_local_systems():
    with Criterion(7, "local systems: MC, D^2, Leibniz, cone, shift", 5) as c:
        fx = fixtures.integer_fixtures()
        for name, L in fx["good"].items():
            c.check(f"{name} passes MC", mc_check(L).passed)
        for name, L in fx["bad"].items():
            c.check(f"{name} fails MC", not mc_check(L).passed)
        rng = random.Random(7)
        systems = [fx["good"]["graded"], fx["good"]["unipotent"], fixtures.cyclic_local_system()]
        for n in range(10):
            L = systems[n % len(systems)]
            p, q = rng.choice([-1, 0, 1]), rng.choice([-1, 0, 1])
            phi_ = fixtures.random_cochain(L, L, p, rng)
            psi = fixtures.random_cochain(L, L, q, rng)
            c.check(f"D^2 #{n}", D(D(phi_)).is_zero())
            lhs = D(cup(psi, phi_))
            sign = -1 if q % 2 else 1
            rhs = cup(D(psi), phi_) + cup(psi, D(phi_)).scale(sign)
            c.check(f"Leibniz #{n}", lhs == rhs)
        open_seen = 0
        for n in range(10):
            L = systems[n % len(systems)]
            h = fixtures.random_cochain(L, L, -1, rng)
            closed = [D(h), identity(L), D(h) + identity(L).scale(rng.randint(-2, 2))]
            raw = fixtures.random_cochain(L, L, 0, rng)
            for m, f in enumerate(closed + [raw]):
                is_closed = D(f).is_zero()
                c.check(f"cone #{n}.{m}", mc_check(cone(f, check=False)).passed == is_closed)
            open_seen += not D(raw).is_zero()
        c.check("some random cochains are not closed", open_seen > 0)
        for name, L in list(fx["good"].items()) + [("cyclic", fixtures.cyclic_local_system())]:
            for i in (1, 2, 3):
                c.check(f"{name} shift {i} MC", mc_check(shift(L, i)).passed)
                c.check(f"{name} shift {i} involution", shift(shift(L, i), -i) == L)


def _simplex_integral(expr, k):
    """int over 1 >= t1 >= ... >= tk >= 0, by nested sympy integration."""
    t = [sp.Symbol(f"t{i}") for i in range(1, k + 1)]
    out = expr
    for i in range(k - 1, -1, -1):
        upper = t[i - 1] if i else 1
        out = sp.integrate(out, (t[i], 0, upper))
    return out


def test_08_chen_a_infinity():
    with Criterion(8, "theta identity, PL face factorizations, chen, A-infinity relations, leafwise cohomology", 30) as c:
        for k in (1, 2, 3):
            t = [sp.Symbol(n) for n in tnames(k)]
            for exps in [e for e in _exponents(k, 2)]:
                mono = sp.Mul(*[ti ** e for ti, e in zip(t, exps)])
                alpha = Form({tuple(tnames(k)): mono})
                want = (-1) ** k * _simplex_integral(mono, k)
                c.check(f"theta_{k} {exps}", theta_adjoint_integral(alpha, k) == want)
        grid = [Fraction(a, 6) for a in range(7)]
        for k in (2, 3):
            params = [()] if k == 2 else [(w,) for w in grid]
            for i in range(1, k):
                lhs, rhs = theta_negative_face(k, i)
                c.check(f"negative face k={k} i={i}", lhs.agrees_with(rhs, params))
                lhs, rhs = theta_positive_face(k, i)
                c.check(f"positive face k={k} i={i}", lhs.agrees_with(rhs, params))
        x, y = sym("x"), sym("y")
        path = straight_path(PLANE, (0, 0), (1, Fraction(1, 2)))
        zero_form = Form.scalar(x + 1)
        c.check("chen degree-0 vanishing", chen([Form({("x",): x}), zero_form], path, PLANE) == Form())
        ones = [Form({(d,): x ** a * y ** b}) for d in ("x", "y") for a in range(3) for b in range(3) if a + b <= 2]
        zeros = [Form.scalar(x ** a * y ** b) for a in range(3) for b in range(3) if a + b <= 2]
        sigma = AffineSimplex(PLANE, [(0, 0), (1, Fraction(1, 3)), (Fraction(1, 2), 1)])
        for a in ones:
            c.check(f"chain map on {a}", chain_map_defect(a, sigma, PLANE) == 0)
        for a in zeros:
            c.check(f"chain map on {a}", chain_map_defect(a, sigma.face(0), PLANE) == 0)
        for a in ones:
            for b in ones:
                c.check(f"Gugenheim {a},{b}", gugenheim_defect(a, b, sigma, PLANE) == 0)
        c.check("phi_2 degree-0 vanishing", phi([zero_form, ones[0]], sigma.face(0)) == 0)
        H = foliated_cohomology(PLANE.__class__(("x",), ("y",)), 4)
        c.check("H^0 dims = dims of Q[y]", {w: H.get(0, {}).get(w, 0) for w in range(5)}
                == {w: comb(w, 0) for w in range(5)})
        c.check("H^1 = 0", not any(H.get(1, {}).values()))


def _exponents(k, bound):
    if k == 0:
        yield ()
        return
    for e in range(bound + 1):
        for rest in _exponents(k - 1, bound - e):
            yield (e,) + rest


def test_09_riemann_hilbert():
    with Criterion(9, "holonomy over the triangulated square", 20) as c:
        K, pts = square_complex()
        fx = horizontal_fixtures()
        c.check("five fixtures", len(fx) == 5)
        for name, conn in fx.items():
            c.check(f"{name} nilpotent rank<=3 width<=2",
                    conn.rank <= 3 and max(conn.degrees) - min(conn.degrees) <= 2)
            c.check(f"{name} flat", conn.is_flat())
            c.check(f"{name} MC", mc_check(holonomy_local_system(conn, K, pts)).passed)
            bent = inject_curvature(conn)
            c.check(f"{name} curved fails MC", not mc_check(holonomy_local_system(bent, K, pts)).passed)
        conn = fx["upper_line"]
        xs = sp.Symbol("x")
        for e in K.nondegenerate(1):
            p0, p1 = pts[(e[0],)], pts[(e[1],)]
            s = AffineSimplex(conn.chart, [p0, p1])
            res = rh_holonomy(conn, s)
            # parallel transport of d - (xy + 1) dx E01 from p1 to p0
            c0 = sp.integrate(xs * sp.Rational(p0[1]) + 1, (xs, sp.Rational(p1[0]), sp.Rational(p0[0])))
            want = sp.eye(3)
            want[0, 1] = c0
            c.check(f"psi_1 closed form on {e}", res.exact and res.matrix == want)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
