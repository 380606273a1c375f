from itertools import combinations

import pytest

from linfty.cdga import Algebra
from linfty.graded import GradedModule, InputError, StructureError
from linfty.linfty import is_linfty, jacobiator, sorted_tuples, vf_bracket
from linfty.transfer import (ResolutionData, build_l2, build_l3, build_ln, commuting_resolution,
                             rotation_resolution, transfer, xy_resolution)


def perturbed_rotation():
    """Rotation resolution whose section for (e1, e2) is shifted by the boundary d(r)."""
    r = rotation_resolution()
    x, y, z = r.ring.vars("x", "y", "z")
    r.section = {("e1", "e2"): {"e1": z, "e2": x, "e3": y - 1}}
    return r


def strict_on_pairs(r, L):
    for a, b in combinations(r.generators(-1), 2):
        lhs = L.anchor_of(L.gen_bracket((a, b)))
        rhs = vf_bracket(r.rho[a], r.rho[b], r.ring)
        if lhs != rhs:
            return False
    return True


class TestResolutions:
    @pytest.mark.parametrize("make", [commuting_resolution, xy_resolution, rotation_resolution])
    def test_fixtures_are_valid(self, make):
        assert make().check() == []

    def test_rho_of_boundary_must_vanish(self):
        r = xy_resolution()
        x, y = r.ring.vars("x", "y")
        r.d = {"r": {"eX": y, "eY": x}}
        problems = r.check()
        assert any("rho o d" in p for p in problems)
        with pytest.raises(StructureError):
            transfer(r)

    def test_non_exact_detected(self):
        M = GradedModule.from_pairs([("eX", -1), ("eY", -1)])
        x, y = Algebra(["x", "y"]).vars("x", "y")
        r = ResolutionData(("x", "y"), M, {}, {"eX": {"y": x}, "eY": {"y": y}})
        # the relation y eX - x eY is missing, so E_0 -> F has a kernel
        assert any("not exact" in p for p in r.check())

    def test_generators_in_negative_degrees_only(self):
        with pytest.raises(InputError):
            ResolutionData(("x",), GradedModule.from_pairs([("a", 0)]), {}, {})

    def test_section_must_split_rho(self):
        r = rotation_resolution()
        r.section = {("e1", "e2"): {"e3": 1}}
        with pytest.raises(StructureError):
            transfer(r)


class TestL2:
    def test_commuting_fields(self):
        assert build_l2(commuting_resolution()) == {}

    def test_xy_bracket(self):
        r = xy_resolution()
        # [x d/dy, y d/dy] = x d/dy, whose section is eX
        assert build_l2(r) == {("eX", "eY"): {"eX": r.ring.one()}}

    def test_rotation_is_so3(self):
        one = rotation_resolution().ring.one()
        assert build_l2(rotation_resolution()) == {("e1", "e2"): {"e3": -one}, ("e1", "e3"): {"e2": one},
                                                   ("e2", "e3"): {"e1": -one}}

    def test_boundary_argument_gives_boundary(self):
        r = perturbed_rotation()
        L = transfer(r, 2).structure
        d_r = L.gen_bracket(("r",))
        for e in r.generators(-1):
            val = L.bracket([d_r, L.basis_vec(e)])
            assert not r.apply_rho(val)

    def test_mixed_values_come_from_lifts(self):
        r = perturbed_rotation()
        killed = {}
        l2 = build_l2(r, killed)
        assert set(killed) == {("r", "e1"), ("r", "e2")}
        for tup, residual in killed.items():
            assert r.apply_d(l2[tup]) == {k: -v for k, v in residual.items()}


class TestHigher:
    def test_commuting_all_zero(self):
        r = commuting_resolution()
        assert build_l3(r, {}) == {}
        assert build_ln(r, {}, 4) == {}

    def test_degree_zero_resolution_is_strict_lie(self):
        # d/dx and x d/dx + d/dy span a free involutive module with [a, b] = a
        M = GradedModule.from_pairs([("a", -1), ("b", -1)])
        x = Algebra(["x", "y"]).var("x")
        r = ResolutionData(("x", "y"), M, {}, {"a": {"x": 1}, "b": {"x": x, "y": 1}})
        T = transfer(r, 4)
        assert T.structure.brackets == {2: {("a", "b"): {"a": r.ring.one()}}}
        assert is_linfty(T.structure, 4)

    @pytest.mark.parametrize("make", [rotation_resolution, perturbed_rotation, xy_resolution])
    def test_homotopy_jacobi_to_arity_four(self, make):
        r = make()
        T = transfer(r, 4)
        L = T.structure
        for n in range(1, 5):
            for tup in sorted_tuples(L, n):
                assert jacobiator(L, n, tup) == {}, tup
        assert strict_on_pairs(r, L)

    def test_arity_argument(self):
        with pytest.raises(InputError):
            build_ln(rotation_resolution(), {}, 2)

    def test_broken_homotopy_raises(self):
        r = perturbed_rotation()
        r.preimage = lambda b: {}
        with pytest.raises(StructureError):
            transfer(r, 3)

    def test_supplied_homotopy_is_used(self):
        calls = []
        r = perturbed_rotation()

        def s(b):
            calls.append(b)
            return r.default_preimage(b)

        r.preimage = s
        assert transfer(r, 3).structure == transfer(perturbed_rotation(), 3).structure
        assert calls

    def test_deterministic(self):
        assert transfer(perturbed_rotation(), 4).structure == transfer(perturbed_rotation(), 4).structure
        assert transfer(rotation_resolution(), 4).structure == transfer(rotation_resolution(), 4).structure
