"""Polynomial vector fields on the base and on phase space.

A base field has n components in the variables x1..xn; a phase field has 2n
components (x-block then p-block) in the variables (x, p).  Both are exact:
coefficients are rationals and all operations below (Lie bracket,
Hamiltonian lift, Hamiltonian vector field, Poisson bracket, Euclidean
divergence) are pure polynomial calculus.

The divergence is taken in the declared coordinates with the Euclidean
volume; this is the only metric used anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from singfol import _linalg
from singfol.exactpoly import Polynomial, Space

__all__ = [
    "VectorField",
    "Frame",
    "lie_bracket",
    "hamiltonian_lift",
    "hamiltonian_vector_field",
    "poisson_bracket",
    "divergence",
    "scale_fiber",
]


class VectorField:
    """A tuple of polynomial components with a base/phase kind flag."""

    __slots__ = ("space", "kind", "components")

    def __init__(self, components: Sequence[Polynomial], kind: str = "base"):
        if kind not in ("base", "phase"):
            raise ValueError("kind must be 'base' or 'phase'")
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs at least one component")
        space = components[0].space
        for c in components:
            if c.space != space:
                raise ValueError("components declared over different spaces")
        expected = 2 * space.n if kind == "phase" else space.n
        if kind == "phase" and not space.fiber:
            raise ValueError("phase fields need a fiber in their space")
        if kind == "base" and space.fiber:
            raise ValueError("base fields must not carry fiber variables")
        if len(components) != expected:
            raise ValueError(
                f"{kind} field over n={space.n} needs {expected} components, got {len(components)}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    @classmethod
    def zero(cls, space: Space, kind: str = "base") -> "VectorField":
        count = 2 * space.n if kind == "phase" else space.n
        return cls([Polynomial.zero(space)] * count, kind)

    @classmethod
    def coordinate(cls, space: Space, pos: int) -> "VectorField":
        """The constant field d/d(variable at position pos) of base kind."""
        comps = [Polynomial.zero(space) for _ in range(space.n)]
        comps[pos] = Polynomial.constant(space, 1)
        return cls(comps, "base")

    @property
    def n(self) -> int:
        return self.space.n

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.kind == other.kind and self.components == other.components

    def __hash__(self):
        return hash((self.kind, self.components))

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.kind != other.kind:
            raise ValueError("kind mismatch")
        return VectorField(
            [a + b for a, b in zip(self.components, other.components)], self.kind
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        if self.kind != other.kind:
            raise ValueError("kind mismatch")
        return VectorField(
            [a - b for a, b in zip(self.components, other.components)], self.kind
        )

    def __neg__(self) -> "VectorField":
        return VectorField([-c for c in self.components], self.kind)

    def __mul__(self, factor) -> "VectorField":
        if isinstance(factor, VectorField):
            return NotImplemented
        return VectorField([c * factor for c in self.components], self.kind)

    __rmul__ = __mul__

    def apply(self, f: Polynomial) -> Polynomial:
        """Derivation action: sum of component * partial of f."""
        if f.space != self.space:
            raise ValueError("function lives in a different space")
        out = Polynomial.zero(self.space)
        for pos, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            out = out + comp * f.partial(pos)
        return out

    def evaluate(self, point: Sequence) -> list:
        return [c.evaluate(point) for c in self.components]

    def constant_part(self) -> list[Fraction]:
        return [c.constant_term() for c in self.components]

    def p_homogeneity(self) -> tuple[int | None, int | None]:
        """Fiber degrees (x-block, p-block) of a phase field, if uniform.

        Each slot is None when the corresponding block mixes degrees; a zero
        block reports None as well.
        """
        if self.kind != "phase":
            raise ValueError("homogeneity record applies to phase fields")
        n = self.n
        xdegs = {d for c in self.components[:n]
                 for d in [c.p_homogeneous_degree()] if not c.is_zero()}
        pdegs = {d for c in self.components[n:]
                 for d in [c.p_homogeneous_degree()] if not c.is_zero()}
        xd = xdegs.pop() if len(xdegs) == 1 else None
        pd = pdegs.pop() if len(pdegs) == 1 else None
        return xd, pd

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self) -> str:
        return f"VectorField{self}"


@dataclass(frozen=True)
class Frame:
    """An m-tuple of base vector fields generating a rank-m distribution.

    ``normal_form``, when present, holds the n-1 coefficient functions
    A_1..A_{n-1} of a corank-1 frame X^i = d_i + A_i d_n (so m = n-1); the
    component data is checked against it on construction.  Linear
    independence of the fields at the origin is always required.
    """

    n: int
    m: int
    fields: tuple[VectorField, ...]
    normal_form: tuple[Polynomial, ...] | None = None
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise ValueError("need 1 <= m < n")
        if len(self.fields) != self.m:
            raise ValueError(f"expected {self.m} fields, got {len(self.fields)}")
        for X in self.fields:
            if X.kind != "base" or X.n != self.n:
                raise ValueError("frame fields must be base fields in dimension n")
        if self.normal_form is not None:
            if self.m != self.n - 1:
                raise ValueError("normal form requires corank 1 (m = n-1)")
            if len(self.normal_form) != self.m:
                raise ValueError("normal form needs n-1 coefficient functions")
            space = Space(self.n)
            for i, (X, A) in enumerate(zip(self.fields, self.normal_form), start=1):
                expected = VectorField.coordinate(space, i - 1) + VectorField(
                    [Polynomial.zero(space)] * (self.n - 1) + [A], "base"
                )
                if X != expected:
                    raise ValueError(f"field {i} inconsistent with its normal form")
        const = [X.constant_part() for X in self.fields]
        if _linalg.rank(const) != self.m:
            raise ValueError("frame fields are linearly dependent at the origin")

    @classmethod
    def corank1(cls, n: int, coeffs: Sequence[Polynomial], name: str = "") -> "Frame":
        """Build the frame X^i = d_i + A_i d_n from A_1..A_{n-1}."""
        space = Space(n)
        if len(coeffs) != n - 1:
            raise ValueError(f"corank-1 frame in dimension {n} needs {n - 1} coefficients")
        fields = []
        for i, A in enumerate(coeffs):
            comps = [Polynomial.zero(space) for _ in range(n)]
            comps[i] = Polynomial.constant(space, 1)
            comps[n - 1] = comps[n - 1] + A
            fields.append(VectorField(comps, "base"))
        return cls(n, n - 1, tuple(fields), tuple(coeffs), name)

    @property
    def space(self) -> Space:
        return Space(self.n)

    def annihilator_basis(self, x: Sequence[Fraction]) -> list[list[Fraction]]:
        """Exact basis of covectors p with p . X^i(x) = 0 for all i."""
        rows = [X.evaluate(x) for X in self.fields]
        return _linalg.nullspace(rows)

    def bracket_generation_depth(self, x: Sequence[Fraction], max_depth: int = 4) -> int | None:
        """Smallest bracket depth at which the iterated brackets span R^n at x.

        Returns None when the span is still deficient at ``max_depth``.  This
        is a bounded diagnostic only; it never certifies nonholonomicity.
        """
        layers = [list(self.fields)]
        everything = list(self.fields)
        for depth in range(1, max_depth + 1):
            vectors = [V.evaluate(x) for V in everything]
            if _linalg.rank(vectors) == self.n:
                return depth
            new_layer = []
            for V in layers[-1]:
                for X in self.fields:
                    new_layer.append(lie_bracket(X, V))
            layers.append(new_layer)
            everything.extend(new_layer)
        return None


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Exact Lie bracket [X, Y] = DY . X - DX . Y, componentwise."""
    if X.kind != Y.kind or X.space != Y.space:
        raise ValueError("kind mismatch")
    comps = []
    for k in range(len(X.components)):
        acc = Polynomial.zero(X.space)
        for j in range(len(X.components)):
            acc = acc + X.components[j] * Y.components[k].partial(j)
            acc = acc - Y.components[j] * X.components[k].partial(j)
        comps.append(acc)
    return VectorField(comps, X.kind)


def hamiltonian_lift(X: VectorField) -> Polynomial:
    """The momentum function p . X(x) of a base field (fiber-linear)."""
    if X.kind != "base":
        raise ValueError("lift applies to base fields")
    phase = X.space.phase
    out = Polynomial.zero(phase)
    for k, comp in enumerate(X.components):
        pk = Polynomial.variable(phase, phase.p(k + 1))
        out = out + comp.lift_to_phase() * pk
    return out


def hamiltonian_vector_field(h: Polynomial) -> VectorField:
    """Symplectic gradient with the convention xdot = dh/dp, pdot = -dh/dx."""
    space = h.space if h.space.fiber else h.space.phase
    if not h.space.fiber:
        h = h.lift_to_phase()
    n = space.n
    xblock = [h.partial(space.p(k)) for k in range(1, n + 1)]
    pblock = [-h.partial(space.x(k)) for k in range(1, n + 1)]
    return VectorField(xblock + pblock, "phase")


def poisson_bracket(h: Polynomial, g: Polynomial) -> Polynomial:
    """{h, g} = sum_k dh/dp_k dg/dx_k - dh/dx_k dg/dp_k."""
    space = h.space
    if not space.fiber or g.space != space:
        raise ValueError("Poisson bracket needs two phase-space functions")
    out = Polynomial.zero(space)
    for k in range(1, space.n + 1):
        xk, pk = space.x(k), space.p(k)
        out = out + h.partial(pk) * g.partial(xk) - h.partial(xk) * g.partial(pk)
    return out


def divergence(V: VectorField) -> Polynomial:
    """Euclidean divergence in the declared coordinates."""
    out = Polynomial.zero(V.space)
    for pos, comp in enumerate(V.components):
        out = out + comp.partial(pos)
    return out


def scale_fiber(f: Polynomial, lam: Fraction) -> Polynomial:
    """Substitute p -> lam * p (identity on base polynomials)."""
    if not f.space.fiber:
        return f
    n = f.space.n
    lam = Fraction(lam)
    out = {}
    for exps, coeff in f.terms.items():
        k = sum(exps[n:])
        out[exps] = coeff * lam ** k
    return Polynomial(f.space, out)
