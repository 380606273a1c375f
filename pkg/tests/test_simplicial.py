from itertools import combinations_with_replacement, product as iproduct

import pytest

from linfty import fixtures
from linfty.graded import InputError, StructureError
from linfty.simplicial import (FiniteCategory, SimplicialMap, SimplicialSet, boundary, collapsible_decomposition,
                               cyclic_group, group_category, horn, insert_degeneracy, integer_nerve_window,
                               is_coskeletal, kan_check, kan_witness, matching_object, nerve, ordered_complex,
                               path_object, poset_category, prism_decomposition, prism_hom, prism_top_cells, product,
                               restriction_is_surjective, simplex_subset, standard_simplex, unique_kan_check)


def monotone_maps(k, n):
    """Vertex assignments [k] -> [n] that are weakly increasing."""
    return list(combinations_with_replacement(range(n + 1), k + 1))


class TestSimplicialSets:
    def test_standard_simplex_counts(self):
        D = standard_simplex(2, 3)
        for k in range(4):
            assert len(D.simplices(k)) == len(monotone_maps(k, 2))
        assert [len(D.nondegenerate(k)) for k in range(4)] == [3, 3, 1, 0]
        assert D.dimension() == 2

    def test_normal_form(self):
        D = standard_simplex(1, 3)
        assert D.normal_form((0, 0, 1, 1)) == ((0, 1), (2, 0))
        assert D.normal_form((0, 1)) == ((0, 1), ())

    def test_insert_degeneracy(self):
        assert insert_degeneracy(0, ()) == (0,)
        assert insert_degeneracy(2, (1, 0)) == (2, 1, 0)
        # s_0 s_0 = s_1 s_0
        assert insert_degeneracy(0, (0,)) == (1, 0)

    def test_identities_checked(self):
        with pytest.raises(StructureError):
            SimplicialSet({0: ["a", "b"], 1: ["e"]}, {"e": ["a", "b"]}, {"a": ["ea"], "b": ["eb"]}, 1)
        D = standard_simplex(1, 1)
        faces = dict(D.faces)
        faces[(0, 0)] = [(0,), (1,)]
        with pytest.raises(StructureError) as err:
            SimplicialSet(D.levels, faces, D.degens, 1)
        assert ("d_i s_j", (0,), 1, 0) in err.value.witness

    @pytest.mark.parametrize("X", [integer_nerve_window(2, 3), nerve(cyclic_group(3), 3),
                                   ordered_complex([["a", "b", "c"], ["c", "d"]], 3)])
    def test_constructions_are_valid(self, X):
        assert X.check() == []

    def test_simplicial_map_check(self):
        D1 = standard_simplex(1, 1)
        D0 = standard_simplex(0, 1)
        f = SimplicialMap(D1, D0, {(0,): (0,), (1,): (0,), (0, 1): (0, 0), (0, 0): (0, 0), (1, 1): (0, 0)})
        assert f.check() == []
        g = SimplicialMap(D1, D1, {(0,): (0,), (1,): (0,), (0, 1): (0, 1)})
        assert g.check()


class TestMatchingObject:
    def test_points(self):
        X = nerve(cyclic_group(2), 2)
        assert len(matching_object(standard_simplex(0, 0), X)) == len(X.simplices(0))

    def test_horn_into_interval(self):
        # composable pairs of edges of Delta[1]: 00.00, 00.01, 01.11, 11.11
        brute = [(a, b, c) for a, b, c in iproduct(range(2), repeat=3) if a <= b <= c]
        assert len(brute) == 4
        assert len(matching_object(horn(2, 1), standard_simplex(1, 2))) == 4

    def test_boundary_into_point(self):
        assert len(matching_object(boundary(1), standard_simplex(0, 1))) == 1

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_yoneda(self, n):
        X = nerve(cyclic_group(2), 3)
        maps = matching_object(standard_simplex(n, n), X)
        top = tuple(range(n + 1))
        assert sorted(map(repr, (f[top] for f in maps))) == sorted(map(repr, X.simplices(n)))

    def test_target_too_short(self):
        with pytest.raises(InputError):
            matching_object(standard_simplex(2, 2), standard_simplex(0, 1))


class TestKan:
    def test_group_nerve(self):
        X = nerve(cyclic_group(2), 4)
        for n in range(1, 5):
            for i in range(n + 1):
                assert kan_check(X, n, i)
                if n >= 2:
                    assert unique_kan_check(X, n, i)

    def test_poset_outer_horn(self):
        X = nerve(poset_category([0, 1], lambda a, b: a <= b), 3)
        assert not kan_check(X, 2, 0)
        assert kan_check(X, 2, 1)
        w = kan_witness(X, 2, 0)
        assert w is not None
        assert kan_witness(X, 2, 1) is None

    def test_horn_index_out_of_range(self):
        X = nerve(cyclic_group(2), 2)
        with pytest.raises(InputError):
            kan_check(X, 2, 3)
        with pytest.raises(InputError):
            horn(0, 0)

    def test_nerve_of_z_window_is_not_kan(self):
        X = integer_nerve_window(1, 2)
        assert not kan_check(X, 2, 1)


def monoids(size):
    """All monoid structures on {0..size-1} with unit 0."""
    out = []
    rest = list(range(1, size))
    pairs = [(a, b) for a in rest for b in rest]
    for values in iproduct(range(size), repeat=len(pairs)):
        table = dict(zip(pairs, values))

        def mul(a, b):
            if a == 0:
                return b
            if b == 0:
                return a
            return table[(a, b)]

        try:
            out.append(group_category(list(range(size)), mul, 0))
        except StructureError:
            continue
    return out


class TestNerves:
    def test_groupoid_iff_unique_kan_on_all_small_monoids(self):
        cats = monoids(3)
        assert any(c.is_groupoid() for c in cats) and any(not c.is_groupoid() for c in cats)
        for C in cats:
            X = nerve(C, 4)
            unique = all(unique_kan_check(X, n, i) for n in range(2, 5) for i in range(n + 1))
            assert unique == C.is_groupoid()
            assert is_coskeletal(X, 2, 4)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_tables(self, seed):
        G = fixtures.random_groupoid(seed)
        X = nerve(G, 3)
        assert all(unique_kan_check(X, n, i) for n in (2, 3) for i in range(n + 1))
        C = fixtures.random_category(seed)
        Y = nerve(C, 3)
        assert not all(unique_kan_check(Y, n, i) for n in (2, 3) for i in range(n + 1))

    def test_category_axioms_checked(self):
        with pytest.raises(StructureError):
            FiniteCategory(["a"], {"i": ("a", "a"), "f": ("a", "a")}, {"a": "i"},
                           {("i", "i"): "i", ("i", "f"): "f", ("f", "i"): "i", ("f", "f"): "f"})


class TestPrisms:
    def test_small_cases(self):
        assert prism_decomposition(0) == [((0, 0), (0, 1))]
        assert prism_decomposition(1) == [((0, 0), (0, 1), (1, 1)), ((0, 0), (1, 0), (1, 1))]

    @pytest.mark.parametrize("n", range(5))
    def test_lattice_paths(self, n):
        cells = prism_decomposition(n)
        assert len(set(cells)) == n + 1
        assert sorted(cells) == prism_top_cells(n)
        for a, b in zip(cells, cells[1:]):
            assert len(set(a) & set(b)) == n + 1

    def test_negative(self):
        with pytest.raises(InputError):
            prism_decomposition(-1)


class TestPathObject:
    def test_point(self):
        X = standard_simplex(0, 3)
        P = path_object(X, 2)
        assert [len(P.space.simplices(n)) for n in range(3)] == [1, 1, 1]

    def test_trivial_group(self):
        X = nerve(cyclic_group(1), 3)
        P = path_object(X, 2)
        assert [len(P.space.simplices(n)) for n in range(3)] == [len(X.simplices(n)) for n in range(3)]

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_prism_gluing_equals_hom(self, n):
        X = nerve(cyclic_group(2), 3)
        prism = product(standard_simplex(n, n + 1), standard_simplex(1, n + 1))
        maps = matching_object(prism, X)
        keys = [(tuple(v for v, _ in cell), tuple(e for _, e in cell)) for cell in prism_decomposition(n)]
        via_hom = {tuple(f[k] for k in keys) for f in maps}
        assert via_hom == set(prism_hom(X, n))
        assert len(maps) == len(via_hom)

    def test_sections(self):
        X = nerve(cyclic_group(2), 3)
        P = path_object(X, 2)
        for n in range(3):
            for x in X.simplices(n):
                assert P.ev0[P.const[x]] == x and P.ev1[P.const[x]] == x

    def test_requires_kan(self):
        X = nerve(poset_category([0, 1], lambda a, b: a <= b), 3)
        with pytest.raises(StructureError):
            path_object(X, 2)

    def test_requires_levels(self):
        with pytest.raises(InputError):
            path_object(nerve(cyclic_group(2), 2), 2)


class TestCollapsible:
    def test_horn_one_step(self):
        S = [s for s in horn(2, 1).nondegenerate(0) + horn(2, 1).nondegenerate(1)]
        steps = collapsible_decomposition(S, standard_simplex(2, 2))
        assert len(steps) == 1 and steps[0].face_index == 1

    def test_vertex_into_triangle(self):
        steps = collapsible_decomposition([(0,)], standard_simplex(2, 2))
        assert [s.simplex for s in steps] == [(0, 1), (0, 2), (0, 1, 2)]

    def test_boundary_not_found(self):
        dD = boundary(2)
        S = dD.nondegenerate(0) + dD.nondegenerate(1)
        assert collapsible_decomposition(S, standard_simplex(2, 2)) is None

    def test_not_closed_under_faces(self):
        with pytest.raises(InputError):
            collapsible_decomposition([(0, 1)], standard_simplex(2, 2))

    @pytest.mark.parametrize("gens", [[[0, 1], [1, 2]], [[0]], [[0, 1]]])
    def test_kan_targets_restrict_surjectively(self, gens):
        S = simplex_subset(2, gens, 2)
        T = standard_simplex(2, 2)
        S_cells = [x for n in range(3) for x in S.nondegenerate(n)]
        assert collapsible_decomposition(S_cells, T) is not None
        assert restriction_is_surjective(S, T, nerve(cyclic_group(2), 2))

    def test_non_kan_target_can_fail(self):
        poset = nerve(poset_category([0, 1], lambda a, b: a <= b), 2)
        assert not restriction_is_surjective(horn(2, 0), standard_simplex(2, 2), poset)
