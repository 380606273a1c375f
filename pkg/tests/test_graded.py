from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfty.graded import (Complex, GradedElement, GradedModule, InputError, Permutation, StackyComplex,
                           StructureError, all_permutations, check_complex, koszul_sign,
                           total_differential)


def brute_koszul(perm, degrees):
    """Sort the reordered tuple back by adjacent swaps, tracking odd-odd crossings."""
    seq = [(j, degrees[j - 1]) for j in perm.image]
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j][0] > seq[j + 1][0]:
                if seq[j][1] % 2 and seq[j + 1][1] % 2:
                    sign = -sign
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
    return sign


class TestKoszulSign:
    def test_identity(self):
        assert koszul_sign(Permutation.identity(3), (1, 1, 1)) == 1

    def test_swap_of_odd_elements(self):
        assert koszul_sign(Permutation((2, 1)), (1, 1)) == -1

    def test_cycle(self):
        # x_1 travels past x_2 and x_3; only the crossing with the odd x_3 counts
        assert brute_koszul(Permutation((2, 3, 1)), (1, 2, 1)) == -1
        assert koszul_sign(Permutation((2, 3, 1)), (1, 2, 1)) == -1
        assert koszul_sign(Permutation((2, 3, 1)), (1, 2, 2)) == 1

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            koszul_sign(Permutation((2, 1)), (1, 1, 1))

    def test_not_a_permutation(self):
        with pytest.raises(InputError):
            Permutation((1, 1))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_homomorphism_all_permutations(self, n):
        from itertools import product

        perms = list(all_permutations(n))
        for degrees in product((0, 1, 2), repeat=n):
            for p in perms:
                assert koszul_sign(p, degrees) == brute_koszul(p, degrees)
                reordered = p.apply(list(degrees))
                for q in perms:
                    # reorder by p, then by q: the composite reordering is p o q
                    combined = koszul_sign(p.compose(q), degrees)
                    assert combined == koszul_sign(p, degrees) * koszul_sign(q, reordered)

    def test_even_degrees_never_change_sign(self):
        for p in permutations(range(1, 5)):
            assert koszul_sign(Permutation(p), (0, 2, 4, 2)) == 1


M = GradedModule.from_pairs([("a", 0), ("b", 0), ("c", 1)])
coeffs = st.dictionaries(st.sampled_from(["a", "b", "c"]),
                         st.fractions(min_value=-5, max_value=5, max_denominator=4), max_size=3)
elements = coeffs.map(lambda d: GradedElement(M, d))


class TestGradedElement:
    @given(elements, elements, elements)
    def test_additive_group_laws(self, x, y, z):
        assert (x + y) + z == x + (y + z)
        assert x + y == y + x
        assert x - x == GradedElement(M)

    @given(st.fractions(max_denominator=5), st.fractions(max_denominator=5), elements, elements)
    def test_distributive(self, s, t, x, y):
        assert s * (x + y) == s * x + s * y
        assert (s + t) * x == s * x + t * x

    def test_zero_coefficients_pruned(self):
        assert GradedElement(M, {"a": 0}).coeffs == {}
        assert GradedElement(M, {"a": 1}) - GradedElement(M, {"a": 1}) == GradedElement(M)

    def test_foreign_label(self):
        with pytest.raises(InputError):
            GradedElement(M, {"z": 1})

    def test_inhomogeneous_degree(self):
        with pytest.raises(InputError):
            GradedElement(M, {"a": 1, "c": 1}).degree()

    def test_rationals_are_exact(self):
        x = GradedElement(M, {"a": "1/3"})
        assert (3 * x).coeffs == {"a": Fraction(1)}


class TestComplex:
    def test_zero_differential(self):
        assert check_complex(Complex(M, {})) == []

    def test_two_term(self):
        N = GradedModule.from_pairs([("u", 0), ("v", 1)])
        c = Complex(N, {"u": {"v": 1}})
        assert check_complex(c) == []
        assert c.cohomology_dims() == {0: 0, 1: 0}

    def test_three_term_rejected_with_witness(self):
        N = GradedModule.from_pairs([("u", 0), ("v", 1), ("w", 2)])
        with pytest.raises(StructureError) as err:
            Complex(N, {"u": {"v": 1}, "v": {"w": 1}})
        assert err.value.witness == ["u"]
        c = Complex(N, {"u": {"v": 1}, "v": {"w": 1}}, check=False)
        assert check_complex(c) == ["u"]

    def test_wrong_degree(self):
        with pytest.raises(InputError):
            Complex(M, {"a": {"b": 1}})

    def test_chain_kind(self):
        N = GradedModule.from_pairs([("u", 0), ("v", -1)])
        assert check_complex(Complex(N, {"u": {"v": 2}}, kind="chain")) == []


class TestStacky:
    def square(self, commuting):
        # x(0,0) -d-> y(1,0); x -delta-> z(0,-1); y -delta-> w(1,-1); z -d-> w
        bideg = {"x": (0, 0), "y": (1, 0), "z": (0, -1), "w": (1, -1)}
        d = {"x": {"y": 1}, "z": {"w": 1}}
        delta = {"x": {"z": 1}, "y": {"w": 1 if commuting else -1}}
        return StackyComplex(bideg, d, delta, commuting=commuting)

    def test_anticommuting_square(self):
        s = self.square(False)
        D = total_differential(s)
        assert check_complex(D) == []
        for lab in "xyzw":
            e = GradedElement.basis(s.module, lab)
            assert not D.d(D.d(e))

    def test_commuting_square_is_twisted(self):
        s = self.square(True)
        assert s.check() == []
        assert check_complex(total_differential(s)) == []

    def test_commuting_pair_rejected_without_twist(self):
        bideg = {"x": (0, 0), "y": (1, 0), "z": (0, -1), "w": (1, -1)}
        with pytest.raises(StructureError):
            StackyComplex(bideg, {"x": {"y": 1}, "z": {"w": 1}}, {"x": {"z": 1}, "y": {"w": 1}})

    def test_zero_delta_gives_d(self):
        bideg = {"x": (0, 0), "y": (1, 0)}
        s = StackyComplex(bideg, {"x": {"y": 3}}, {})
        assert total_differential(s).diff == {"x": GradedElement(s.module, {"y": 3})}

    def test_brst_shape(self):
        # Lambda^p V^* (x) Lambda^q V for one-dimensional V: 1, c, b, cb; d multiplies
        # by the ghost c, the Koszul delta contracts b; the two commute.
        bideg = {"1": (0, 0), "c": (1, 0), "b": (0, 1), "cb": (1, 1)}
        d = {"1": {"c": 1}, "b": {"cb": 1}}
        delta = {"b": {"1": 1}, "cb": {"c": 1}}
        s = StackyComplex(bideg, d, delta, commuting=True)
        assert check_complex(total_differential(s)) == []
