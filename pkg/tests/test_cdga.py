import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfty.cdga import (Algebra, Derivation, apply_derivation, compose_bracket, de_rham, is_homological,
                         partial)
from linfty.graded import InputError

ALG = Algebra(["x", "y"], [("u", -1), ("v", 0), ("p", 1), ("q", 1), ("r", 2)])


def monomials(alg):
    return [alg.var(n) for n in alg.names] + [alg.one()]


@st.composite
def elements(draw, alg=ALG, max_terms=3):
    out = alg.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        term = alg.const(draw(st.integers(-3, 3)))
        for n in draw(st.lists(st.sampled_from(alg.names), max_size=3)):
            term = term * alg.var(n)
        out = out + term
    return out


def homogeneous(draw, alg, degree):
    """Random homogeneous element of the given degree (possibly zero)."""
    gens = [n for n in alg.names]
    out = alg.zero()
    for _ in range(draw(st.integers(0, 3))):
        names = draw(st.lists(st.sampled_from(gens), max_size=3))
        deg = sum(alg.degrees[alg.index[n]] for n in names)
        if deg != degree:
            continue
        term = alg.const(draw(st.integers(-2, 2)))
        for n in names:
            term = term * alg.var(n)
        out = out + term
    return out


@st.composite
def derivations(draw, degree):
    vals = {}
    for n in ALG.names:
        vals[n] = homogeneous(draw, ALG, ALG.degrees[ALG.index[n]] + degree)
    return Derivation(ALG, degree, vals)


def degree_of(a):
    degs = a.degrees()
    return next(iter(degs)) if len(degs) == 1 else None


class TestAlgebra:
    def test_graded_commutativity(self):
        p, q, x, r = ALG.vars("p", "q", "x", "r")
        assert p * q == -(q * p)
        assert p * p == 0
        assert x * p == p * x
        assert r * p == p * r

    @given(elements(), elements(), elements())
    @settings(max_examples=60)
    def test_ring_laws(self, a, b, c):
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c

    def test_duplicate_names(self):
        with pytest.raises(InputError):
            Algebra(["x"], [("x", 1)])


class TestDerivations:
    def test_partial_on_polynomial(self):
        A = Algebra(["x"])
        x = A.var("x")
        assert apply_derivation(partial(A, "x"), x * x) == 2 * x

    def test_hand_expansion(self):
        A = Algebra([], [("xi", 1), ("eta", 1)])
        xi, eta = A.vars("xi", "eta")
        D = Derivation(A, 1, {"xi": xi * eta})
        # D(xi eta) = D(xi) eta - xi D(eta) = xi eta eta - 0 = 0
        assert D.apply(xi * eta) == 0

    def test_zero_derivation(self):
        D = Derivation(ALG, 1, {})
        assert D.apply(ALG.var("p") * ALG.var("x")) == 0

    def test_wrong_degree_value(self):
        with pytest.raises(InputError):
            Derivation(ALG, 1, {"x": ALG.var("x")})

    def test_foreign_element(self):
        with pytest.raises(InputError):
            partial(ALG, "x").apply(Algebra(["z"]).var("z"))

    @given(derivations(1), elements(), elements())
    @settings(max_examples=60)
    def test_leibniz_and_linearity(self, D, a, b):
        assert D.apply(a + b) == D.apply(a) + D.apply(b)
        for part_a in a.degrees():
            ah = a.homogeneous(part_a)
            sign = -1 if (D.degree * part_a) % 2 else 1
            assert D.apply(ah * b) == D.apply(ah) * b + ah * D.apply(b) * sign

    def test_bracket_of_coordinate_fields(self):
        A = Algebra(["x", "y"])
        assert compose_bracket(partial(A, "x"), partial(A, "y")).is_zero()

    def test_bracket_of_vector_fields(self):
        A = Algebra(["x", "y"])
        x, y = A.vars("x", "y")
        X = Derivation(A, 0, {"y": x})
        Y = Derivation(A, 0, {"x": y})
        assert compose_bracket(X, Y) == Derivation(A, 0, {"x": x, "y": -y})

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_antisymmetry_and_jacobi(self, data):
        d1, d2, d3 = (data.draw(derivations(k)) for k in
                      (data.draw(st.sampled_from([-1, 0, 1])) for _ in range(3)))
        s12 = -1 if (d1.degree * d2.degree) % 2 else 1
        assert compose_bracket(d1, d2) == compose_bracket(d2, d1).scale(-s12)
        # [d1,[d2,d3]] = [[d1,d2],d3] + (-1)^{|d1||d2|} [d2,[d1,d3]]
        lhs = compose_bracket(d1, compose_bracket(d2, d3))
        rhs = compose_bracket(compose_bracket(d1, d2), d3) + compose_bracket(d2, compose_bracket(d1, d3)).scale(s12)
        assert lhs == rhs

    @given(derivations(1))
    @settings(max_examples=40)
    def test_square_of_odd(self, D):
        sq = compose_bracket(D, D)
        for n in ALG.names:
            assert sq.value(n) == D.apply(D.value(n)) * 2


class TestHomological:
    def test_zero(self):
        assert is_homological(Derivation(ALG, 1, {})) == (True, None)

    def test_de_rham(self):
        A, d = de_rham(["x", "y"])
        assert is_homological(d) == (True, None)
        assert d.apply(A.var("x")) == A.var("dx")

    def test_failure_names_generator(self):
        A = Algebra([], [("xi", 1), ("eta", 2)])
        xi, eta = A.vars("xi", "eta")
        Q = Derivation(A, 1, {"xi": eta, "eta": xi * eta})
        assert is_homological(Q) == (False, "xi")

    def test_wrong_degree(self):
        with pytest.raises(InputError):
            is_homological(Derivation(ALG, 0, {}))
