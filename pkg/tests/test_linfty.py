from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfty import fixtures
from linfty.cdga import Algebra
from linfty.graded import GradedModule, InputError, StructureError
from linfty.linfty import (LInftyStructure, bracket, check_anchor, check_linfty, from_antisymmetric, is_linfty,
                           jacobiator, require_linfty, sorted_tuples, vf_bracket)


def swap_sign(labels, degrees):
    """Sign of sorting ``labels`` by adjacent swaps, -1 per odd-odd crossing."""
    seq = list(zip(labels, degrees))
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j][0] > seq[j + 1][0]:
                if seq[j][1] % 2 and seq[j + 1][1] % 2:
                    sign = -sign
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
    return sign


def neg(v):
    return {k: -c for k, c in v.items()}


class TestBrackets:
    def test_abelian_is_zero(self):
        L = fixtures.abelian()
        v = [L.basis_vec(lab) for lab in L.labels]
        assert bracket(L, v, 2) == {}
        assert bracket(L, v[:1], 1) == {}

    def test_sl2_reversed_pair(self):
        L = fixtures.sl2()
        e, f, h = (L.basis_vec(n) for n in "efh")
        one = L.ring.one()
        assert bracket(L, [e, f]) == {"h": one}
        # two odd inputs: {f, e} = (-1)^{1*1} {e, f}
        assert bracket(L, [f, e]) == {"h": -one}
        assert bracket(L, [h, e]) == {"e": 2 * one}
        assert bracket(L, [e, h]) == {"e": -2 * one}

    def test_shift_dictionary_matches_sl2(self):
        M = GradedModule.from_pairs([("e", 0), ("f", 0), ("h", 0)])
        L = from_antisymmetric([], M, {2: {("e", "f"): {"h": 1}, ("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}}})
        assert L == fixtures.sl2()

    def test_shift_dictionary_sign_on_odd_input(self):
        # [x, y] with |x| = 1, |y| = 0: {sx, sy} = (-1)^{|x|} s[x, y]
        M = GradedModule.from_pairs([("x", 1), ("y", 0), ("z", 1)])
        L = from_antisymmetric([], M, {2: {("x", "y"): {"z": 1}}})
        assert L.gen_bracket(("x", "y")) == {"z": -L.ring.one()}
        L3 = from_antisymmetric([], GradedModule.from_pairs([("a", 0), ("b", 0), ("c", 0), ("w", -1)]),
                                {3: {("a", "b", "c"): {"w": 1}}})
        assert L3.gen_bracket(("a", "b", "c")) == {"w": L3.ring.one()}

    def test_arity_mismatch(self):
        L = fixtures.sl2()
        with pytest.raises(InputError):
            bracket(L, [L.basis_vec("e")], 2)

    def test_unknown_generator(self):
        with pytest.raises(InputError):
            fixtures.sl2().bracket([{"q": Algebra([]).one()}])

    def test_degree_rule_enforced(self):
        M = GradedModule.from_pairs([("a", -1), ("b", -1), ("w", -2)])
        with pytest.raises(InputError):
            LInftyStructure([], M, {2: {("a", "b"): {"w": 1}}})

    def test_repeated_odd_entry_must_vanish(self):
        M = GradedModule.from_pairs([("a", -1), ("c", -1)])
        with pytest.raises(InputError):
            LInftyStructure([], M, {2: {("a", "a"): {"c": 1}}})

    @pytest.mark.parametrize("seed", range(6))
    def test_permutation_sign_up_to_four(self, seed):
        L = fixtures.random_valid_structure(seed)
        labs = list(L.labels)[:4]
        for n in range(2, min(4, len(labs)) + 1):
            for tup in sorted_tuples(L, n):
                if not set(tup) <= set(labs):
                    continue
                base = L.bracket([L.basis_vec(t) for t in tup])
                degs = [L.deg[t] for t in tup]
                for perm in set(permutations(range(n))):
                    args = [tup[k] for k in perm]
                    ranks = [L.order[a] * 10 + perm[i] for i, a in enumerate(args)]
                    s = swap_sign(ranks, [degs[k] for k in perm])
                    got = L.bracket([L.basis_vec(a) for a in args])
                    assert got == (base if s == 1 else neg(base)), (tup, perm)


class TestLeibniz:
    def test_tangent_chart(self):
        L = fixtures.tangent_r2()
        x = L.ring.var("x")
        ex, ey = L.basis_vec("ex"), L.basis_vec("ey")
        # {ex, x ey} = x {ex, ey} + d/dx(x) ey
        assert L.bracket([ex, {"ey": x}]) == {"ey": L.ring.one()}
        assert L.bracket([{"ey": x}, ex]) == {"ey": -L.ring.one()}

    def test_affine_line(self):
        L = fixtures.affine_line()
        x = L.ring.var("x")
        a, b = L.basis_vec("a"), L.basis_vec("b")
        # {a, x b} = x {a, b} + (x d/dx)(x) b = -x b + x b
        assert L.bracket([a, {"b": x}]) == {}
        assert L.bracket([b, {"a": x * x}]) == {"a": 2 * x, "b": x * x}

    @given(st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=25, deadline=None)
    def test_leibniz_on_monomials(self, p, q):
        L = fixtures.affine_line()
        x = L.ring.var("x")
        f = x ** p if p else L.ring.one()
        g = x ** q if q else L.ring.one()
        for u in L.labels:
            for v in L.labels:
                lhs = L.bracket([{u: f}, {v: g}])
                core = {k: c * f * g for k, c in L.gen_bracket((u, v)).items()}
                rho_u = L.anchor_of({u: f})
                rho_v = L.anchor_of({v: g})
                extra = {}
                dg = sum((c * g.diff(var) for var, c in rho_u.items()), L.ring.zero())
                df = sum((c * f.diff(var) for var, c in rho_v.items()), L.ring.zero())
                extra[v] = extra.get(v, L.ring.zero()) + dg
                extra[u] = extra.get(u, L.ring.zero()) - df
                want = dict(core)
                for k, c in extra.items():
                    want[k] = want.get(k, L.ring.zero()) + c
                assert lhs == {k: c for k, c in want.items() if c}

    def test_higher_brackets_are_linear(self):
        chart = ["x"]
        M = GradedModule.from_pairs([("a", -1), ("b", -1), ("c", -1), ("w", -2)])
        L = LInftyStructure(chart, M, {3: {("a", "b", "c"): {"w": 1}}}, {"a": {"x": 1}})
        x = L.ring.var("x")
        got = L.bracket([{"a": x}, {"b": x * x}, L.basis_vec("c")])
        assert got == {"w": x ** 3}


class TestJacobiator:
    def test_abelian(self):
        L = fixtures.abelian()
        for n in (1, 2, 3):
            for tup in sorted_tuples(L, n):
                assert jacobiator(L, n, tup) == {}

    def test_sl2_classical_jacobi(self):
        assert jacobiator(fixtures.sl2(), 3, ("e", "f", "h")) == {}

    def test_corrupted_sl2(self):
        C = fixtures.sl2(corrupt=True)
        val = jacobiator(C, 3, ("e", "f", "h"))
        assert val and set(val) == {"h"}
        failing = [r for r in check_linfty(C) if not r.passed]
        assert [(r.arity, r.kind, r.witness()) for r in failing] == [(3, "jacobi", ("e", "f", "h"))]
        with pytest.raises(StructureError) as err:
            require_linfty(C)
        assert err.value.witness == ("jacobi", 3, ("e", "f", "h"))

    def test_jacobiator_is_symmetric(self):
        C = fixtures.sl2(corrupt=True)
        base = jacobiator(C, 3, ("e", "f", "h"))
        for perm in permutations(("e", "f", "h")):
            s = swap_sign([C.order[p] for p in perm], [1, 1, 1])
            assert jacobiator(C, 3, perm) == (base if s == 1 else neg(base))

    def test_wrong_length(self):
        with pytest.raises(InputError):
            jacobiator(fixtures.sl2(), 3, ("e", "f"))

    def test_tangent_r2_to_arity_four(self):
        reports = check_linfty(fixtures.tangent_r2(), 4)
        assert all(r.passed for r in reports)
        assert {r.arity for r in reports if r.kind == "jacobi"} == {1, 2, 3, 4}

    @pytest.mark.parametrize("name", ["abelian", "tangent_r2", "tangent_r1", "sl2", "affine_line"])
    def test_named_fixtures_valid(self, name):
        assert is_linfty(getattr(fixtures, name)())


class TestAnchor:
    @pytest.mark.parametrize("seed", range(8))
    def test_anchor_is_a_morphism(self, seed):
        L = fixtures.random_valid_structure(seed)
        ones = [lab for lab in L.labels if L.deg[lab] == -1]
        for a in ones:
            for b in ones:
                lhs = L.anchor_of(L.bracket([L.basis_vec(a), L.basis_vec(b)]))
                rhs = vf_bracket(L.anchor.get(a, {}), L.anchor.get(b, {}), L.ring)
                assert lhs == rhs
        assert all(r.passed for r in check_anchor(L))

    def test_broken_anchor_detected(self):
        M = GradedModule.from_pairs([("a", -1), ("b", -1)])
        x = Algebra(["x"]).var("x")
        # [x d/dx, d/dx] = -d/dx, but the bracket claims +b
        L = LInftyStructure(["x"], M, {2: {("a", "b"): {"b": 1}}}, {"a": {"x": x}, "b": {"x": 1}})
        failing = [r for r in check_anchor(L) if not r.passed]
        assert [r.kind for r in failing] == ["anchor-bracket"]
        assert not is_linfty(L)

    def test_anchor_kills_image_of_differential(self):
        M = GradedModule.from_pairs([("a", -1), ("w", -2)])
        L = LInftyStructure(["x"], M, {1: {("w",): {"a": 1}}}, {"a": {"x": 1}})
        rep = [r for r in check_anchor(L) if r.kind == "anchor-d"][0]
        assert rep.witness() == ("w",)

    def test_anchor_only_on_degree_minus_one(self):
        M = GradedModule.from_pairs([("w", -2)])
        with pytest.raises(InputError):
            LInftyStructure(["x"], M, {}, {"w": {"x": 1}})
