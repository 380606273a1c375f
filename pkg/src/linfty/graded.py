"""Exact graded linear algebra: Koszul signs, graded modules, complexes and
chain-cochain (stacky) complexes over the rationals.

Degrees are cohomological throughout; chain-graded data is stored negated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

Rational = Fraction
Label = Hashable


class InputError(ValueError):
    """Malformed input to a kernel operation."""


class StructureError(ValueError):
    """A claimed structure fails one of its defining identities."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


# ---------------------------------------------------------------------------
# permutations and Koszul signs


@dataclass(frozen=True)
class Permutation:
    """A permutation of 1..n stored as its image list."""

    image: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if sorted(self.image) != list(range(1, n + 1)):
            raise InputError(f"not a permutation of 1..{n}: {self.image}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __len__(self):
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(i) = self(other(i))."""
        return Permutation(tuple(self(other(i)) for i in range(1, len(other) + 1)))

    def apply(self, items: Sequence) -> list:
        """Reorder ``items`` to (x_{s(1)}, ..., x_{s(n)})."""
        return [items[j - 1] for j in self.image]

    def sign(self) -> int:
        inv = sum(1 for i in range(len(self.image)) for j in range(i + 1, len(self.image))
                  if self.image[i] > self.image[j])
        return -1 if inv % 2 else 1


def koszul_sign(perm: Permutation, degrees: Sequence[int]) -> int:
    """Koszul sign of reordering homogeneous elements of the given degrees.

    The reordered tuple is (x_{s(1)}, ..., x_{s(n)}); every pair of odd
    elements whose relative order flips contributes a factor -1.
    """
    if len(perm) != len(degrees):
        raise InputError("permutation and degree list have different lengths")
    img = perm.image
    odd = 0
    for a in range(len(img)):
        for b in range(a + 1, len(img)):
            i, j = img[a], img[b]
            if i > j and degrees[i - 1] % 2 and degrees[j - 1] % 2:
                odd += 1
    return -1 if odd % 2 else 1


def sort_sign(degrees: Sequence[int], keys: Sequence) -> Tuple[int, List[int]]:
    """Koszul sign and index order that sorts ``keys`` stably."""
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    perm = Permutation(tuple(i + 1 for i in order))
    return koszul_sign(perm, degrees), order


def unshuffles(n: int, i: int) -> Iterable[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """(i, n-i) unshuffles of range(n): increasing index splits."""
    from itertools import combinations
    full = range(n)
    for head in combinations(full, i):
        hs = set(head)
        yield head, tuple(k for k in full if k not in hs)


def all_permutations(n: int) -> Iterable[Permutation]:
    for p in permutations(range(1, n + 1)):
        yield Permutation(p)


# ---------------------------------------------------------------------------
# graded modules and sparse elements


@dataclass(frozen=True)
class GradedModule:
    """Bounded graded free module: degree -> tuple of basis labels."""

    basis: Mapping[int, Tuple[Label, ...]]

    def __post_init__(self):
        basis = {int(d): tuple(v) for d, v in self.basis.items() if len(v)}
        seen = {}
        for d, labels in basis.items():
            if len(set(labels)) != len(labels):
                raise InputError(f"duplicate labels in degree {d}")
            for lab in labels:
                if lab in seen:
                    raise InputError(f"label {lab!r} appears in degrees {seen[lab]} and {d}")
                seen[lab] = d
        object.__setattr__(self, "basis", dict(sorted(basis.items())))
        object.__setattr__(self, "_degree_of", seen)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Label, int]]) -> "GradedModule":
        basis: Dict[int, list] = {}
        for lab, deg in pairs:
            basis.setdefault(int(deg), []).append(lab)
        return cls({d: tuple(v) for d, v in basis.items()})

    def degree(self, label: Label) -> int:
        try:
            return self._degree_of[label]
        except KeyError:
            raise InputError(f"unknown basis label {label!r}") from None

    def __contains__(self, label):
        return label in self._degree_of

    @property
    def degrees(self) -> List[int]:
        return list(self.basis)

    def rank(self, degree: int) -> int:
        return len(self.basis.get(degree, ()))

    def labels(self) -> List[Label]:
        return [lab for labs in self.basis.values() for lab in labs]

    def index(self, label: Label) -> int:
        return self.basis[self.degree(label)].index(label)

    def shift(self, k: int) -> "GradedModule":
        """M[k]: degree d of the result is degree d + k of M."""
        return GradedModule({d - k: labs for d, labs in self.basis.items()})

    def direct_sum(self, other: "GradedModule") -> "GradedModule":
        basis: Dict[int, tuple] = dict(self.basis)
        for d, labs in other.basis.items():
            basis[d] = basis.get(d, ()) + labs
        return GradedModule(basis)


class GradedElement:
    """Sparse rational combination of basis labels of a GradedModule."""

    __slots__ = ("module", "coeffs")

    def __init__(self, module: GradedModule, coeffs: Mapping[Label, object] = ()):
        clean = {}
        for lab, c in dict(coeffs).items():
            if lab not in module:
                raise InputError(f"label {lab!r} not in module")
            c = as_rational(c)
            if c:
                clean[lab] = clean.get(lab, 0) + c
        self.module = module
        self.coeffs = {k: v for k, v in clean.items() if v}

    @classmethod
    def basis(cls, module, label):
        return cls(module, {label: 1})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return GradedElement(self.module, out)

    def __neg__(self):
        return GradedElement(self.module, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        s = as_rational(scalar)
        return GradedElement(self.module, {k: s * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, GradedElement) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{v}*{k}" for k, v in sorted(self.coeffs.items(), key=lambda kv: repr(kv[0])))

    def degree(self):
        degs = {self.module.degree(k) for k in self.coeffs}
        if len(degs) > 1:
            raise InputError("element is not homogeneous")
        return degs.pop() if degs else None


LinearMap = Mapping[Label, GradedElement]


def apply_linear(images: Mapping[Label, GradedElement], target: GradedModule,
                 x: GradedElement) -> GradedElement:
    out: Dict[Label, Fraction] = {}
    for lab, c in x.coeffs.items():
        img = images.get(lab)
        if img is None:
            continue
        for k, v in img.coeffs.items():
            out[k] = out.get(k, 0) + c * v
    return GradedElement(target, out)


# ---------------------------------------------------------------------------
# complexes


def check_square_zero(module: GradedModule, diff: Mapping[Label, GradedElement]) -> List[Label]:
    bad = []
    for lab in module.labels():
        e = GradedElement.basis(module, lab)
        if apply_linear(diff, module, apply_linear(diff, module, e)):
            bad.append(lab)
    return bad


class Complex:
    """Graded module with a degree +1 (cochain) or -1 (chain) differential.

    ``diff`` maps basis labels to their images; unlisted labels map to 0.
    Square-zero is verified at construction unless ``check=False``.
    """

    def __init__(self, module: GradedModule, diff: Mapping[Label, object], kind: str = "cochain",
                 check: bool = True):
        if kind not in ("cochain", "chain"):
            raise InputError("kind must be 'cochain' or 'chain'")
        step = 1 if kind == "cochain" else -1
        images = {}
        for lab, img in diff.items():
            if not isinstance(img, GradedElement):
                img = GradedElement(module, img)
            for k in img.coeffs:
                if module.degree(k) != module.degree(lab) + step:
                    raise InputError(f"d({lab!r}) is not homogeneous of degree {step}")
            if img:
                images[lab] = img
        self.module = module
        self.kind = kind
        self.step = step
        self.diff = images
        if check:
            bad = check_square_zero(module, images)
            if bad:
                raise StructureError(f"d^2 != 0 on {bad}", witness=bad)

    def d(self, x: GradedElement) -> GradedElement:
        return apply_linear(self.diff, self.module, x)

    def matrix(self, degree: int):
        """Rational matrix of d: degree -> degree + step (rows = target)."""
        src = self.module.basis.get(degree, ())
        tgt = self.module.basis.get(degree + self.step, ())
        rows = [[Fraction(0)] * len(src) for _ in tgt]
        tindex = {lab: i for i, lab in enumerate(tgt)}
        for j, lab in enumerate(src):
            img = self.diff.get(lab)
            if img is not None:
                for k, v in img.coeffs.items():
                    rows[tindex[k]][j] = v
        return rows

    def cohomology_dims(self) -> Dict[int, int]:
        from .linalg import rank
        dims = {}
        for deg in self.module.degrees:
            n = self.module.rank(deg)
            r_out = rank(self.matrix(deg))
            r_in = rank(self.matrix(deg - self.step))
            dims[deg] = n - r_out - r_in
        return dims


def check_complex(c: Complex) -> List[Label]:
    """Basis labels e with d(d(e)) != 0; empty iff c is a complex."""
    return check_square_zero(c.module, c.diff)


class StackyComplex:
    """Bigraded module A^i_j with d: (i,j)->(i+1,j) and delta: (i,j)->(i,j-1).

    Basis labels are keyed by (i, j). The stored pair anticommutes; passing
    ``commuting=True`` accepts a commuting pair and twists delta by (-1)^i.
    Total degree is i - j.
    """

    def __init__(self, bidegrees: Mapping[Label, Tuple[int, int]],
                 d: Mapping[Label, Mapping[Label, object]],
                 delta: Mapping[Label, Mapping[Label, object]],
                 commuting: bool = False, check: bool = True):
        self.bidegree = {lab: (int(i), int(j)) for lab, (i, j) in bidegrees.items()}
        self.module = GradedModule.from_pairs((lab, i - j) for lab, (i, j) in self.bidegree.items())

        def clean(maps, step):
            out = {}
            for lab, img in maps.items():
                i, j = self.bidegree[lab]
                el = GradedElement(self.module, img)
                for k in el.coeffs:
                    if self.bidegree[k] != (i + step[0], j + step[1]):
                        raise InputError(f"map on {lab!r} has the wrong bidegree")
                if el:
                    out[lab] = el
            return out

        self.d = clean(d, (1, 0))
        dl = clean(delta, (0, -1))
        if commuting:
            dl = {lab: (-1) ** self.bidegree[lab][0] * img for lab, img in dl.items()}
        self.delta = dl
        if check:
            bad = self.check()
            if bad:
                raise StructureError(f"(d + delta)^2 != 0: {bad}", witness=bad)

    def _apply(self, maps, x):
        return apply_linear(maps, self.module, x)

    def check(self) -> List[Tuple[str, Label]]:
        bad = []
        for lab in self.bidegree:
            e = GradedElement.basis(self.module, lab)
            if self._apply(self.d, self._apply(self.d, e)):
                bad.append(("d^2", lab))
            if self._apply(self.delta, self._apply(self.delta, e)):
                bad.append(("delta^2", lab))
            if self._apply(self.d, self._apply(self.delta, e)) + self._apply(self.delta, self._apply(self.d, e)):
                bad.append(("d delta + delta d", lab))
        return bad


def total_differential(s: StackyComplex) -> Complex:
    """D = d + delta on the product total complex graded by i - j."""
    diff = {}
    for lab in s.bidegree:
        e = GradedElement.basis(s.module, lab)
        img = s._apply(s.d, e) + s._apply(s.delta, e)
        if img:
            diff[lab] = img
    return Complex(s.module, diff, kind="cochain")
