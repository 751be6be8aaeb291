"""Exact sparse multivariate polynomial arithmetic over the rationals.

A polynomial lives in a :class:`Space` holding ``n`` base variables
``x1..xn`` and, optionally, ``n`` fiber variables ``p1..pn`` (cotangent
coordinates).  Terms are stored as a dictionary mapping exponent tuples to
``Fraction`` coefficients:

    x1^2*p3 - 3/2  ->  {(2,0,0,0,0,1): Fraction(1), (0,...,0): Fraction(-3,2)}

Exponent tuples have one slot per variable, base block first.  Zero
coefficients are never stored, so two polynomials are equal iff their term
dictionaries are equal.  Coefficients are arbitrary-precision rationals;
every zero test is exact.

Printing sorts terms by descending (total degree, exponent tuple), i.e. a
graded lexicographic order with x1 < ... < xn < p1 < ... < pn, so output is
deterministic and round-trips through :func:`parse_expression`.

The module also provides truncated power series in the base variables
(:class:`JetSeries`) and a recursive-descent parser for the expression
grammar used by the CLI input format.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "Space",
    "Polynomial",
    "JetSeries",
    "SpaceMismatchError",
    "NonUnitError",
    "ParseError",
    "parse_expression",
]

# Guard against pathological inputs like "x1^99999999" blowing up memory.
MAX_EXPONENT = 4096


class SpaceMismatchError(ValueError):
    """Raised when combining polynomials declared over different spaces."""


class NonUnitError(ValueError):
    """Raised when inverting a series whose constant term is zero."""


class ParseError(ValueError):
    """Syntax or lookup error while parsing an expression.

    The byte offset of the offending position is available as ``offset``.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Space:
    """Variable layout shared by a family of polynomials.

    ``n`` is the base dimension.  With ``fiber=True`` the space also carries
    the n cotangent variables ``p1..pn`` after the base block.
    """

    n: int
    fiber: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("base dimension must be >= 1")

    @property
    def nvars(self) -> int:
        return 2 * self.n if self.fiber else self.n

    def x(self, k: int) -> int:
        """Position of the base variable x_k (1-based k)."""
        if not 1 <= k <= self.n:
            raise IndexError(f"x{k} out of range for n={self.n}")
        return k - 1

    def p(self, k: int) -> int:
        """Position of the fiber variable p_k (1-based k)."""
        if not self.fiber:
            raise IndexError("space has no fiber variables")
        if not 1 <= k <= self.n:
            raise IndexError(f"p{k} out of range for n={self.n}")
        return self.n + k - 1

    def var_name(self, pos: int) -> str:
        if not 0 <= pos < self.nvars:
            raise IndexError(f"variable position {pos} out of range")
        if pos < self.n:
            return f"x{pos + 1}"
        return f"p{pos - self.n + 1}"

    @property
    def base(self) -> "Space":
        """The same space without fiber variables."""
        return Space(self.n, False)

    @property
    def phase(self) -> "Space":
        """The same space with fiber variables."""
        return Space(self.n, True)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"exact coefficient expected, got {type(value).__name__}")


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("space", "terms")

    def __init__(self, space: Space, terms: Mapping[tuple, Fraction] | None = None):
        object.__setattr__(self, "space", space)
        clean = {}
        if terms:
            nv = space.nvars
            for exps, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff == 0:
                    continue
                if len(exps) != nv:
                    raise SpaceMismatchError(
                        f"exponent tuple of length {len(exps)} in a space with {nv} variables"
                    )
                clean[tuple(exps)] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, space: Space) -> "Polynomial":
        return cls(space)

    @classmethod
    def constant(cls, space: Space, value) -> "Polynomial":
        return cls(space, {(0,) * space.nvars: _as_fraction(value)})

    @classmethod
    def variable(cls, space: Space, pos: int) -> "Polynomial":
        if not 0 <= pos < space.nvars:
            raise IndexError(f"variable position {pos} out of range")
        exps = [0] * space.nvars
        exps[pos] = 1
        return cls(space, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, space: Space, exps: Sequence[int], coeff=1) -> "Polynomial":
        return cls(space, {tuple(exps): _as_fraction(coeff)})

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def total_degree(self) -> int:
        """Max total degree over stored terms; 0 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, pos: int) -> int:
        return max((e[pos] for e in self.terms), default=0)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.space.nvars, Fraction(0))

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def _p_degree(self, exps: tuple) -> int:
        n = self.space.n
        return sum(exps[n:]) if self.space.fiber else 0

    def p_degree(self) -> int:
        """Max degree in the fiber variables; 0 for base polynomials."""
        return max((self._p_degree(e) for e in self.terms), default=0)

    def p_homogeneous_degree(self) -> int | None:
        """Common fiber degree of all terms, or None.

        Returns k if every stored term has fiber degree exactly k.  Returns
        None when the degrees are mixed and also for the zero polynomial
        (callers distinguish via :meth:`is_zero`).
        """
        degs = {self._p_degree(e) for e in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    # -- ring operations ----------------------------------------------------

    def _check_space(self, other: "Polynomial"):
        if self.space != other.space:
            raise SpaceMismatchError(f"space mismatch: {self.space} vs {other.space}")

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.space, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_space(other)
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = out.get(exps, 0) + coeff
            if acc:
                out[exps] = acc
            else:
                out.pop(exps, None)
        return Polynomial(self.space, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.space, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.space, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return Polynomial(self.space)
            return Polynomial(self.space, {e: c * v for e, v in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_space(other)
        out: dict = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(a + b for a, b in zip(ea, eb))
                acc = out.get(key, 0) + ca * cb
                if acc:
                    out[key] = acc
                else:
                    del out[key]
        return Polynomial(self.space, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = Polynomial.constant(self.space, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus -----------------------------------------------------------

    def partial(self, pos: int) -> "Polynomial":
        """Exact formal partial derivative with respect to variable ``pos``."""
        if not 0 <= pos < self.space.nvars:
            raise IndexError(f"variable position {pos} out of range")
        out = {}
        for exps, coeff in self.terms.items():
            e = exps[pos]
            if e == 0:
                continue
            key = exps[:pos] + (e - 1,) + exps[pos + 1:]
            out[key] = out.get(key, 0) + coeff * e
        return Polynomial(self.space, out)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, point: Sequence):
        """Evaluate at a point (one value per variable, base block first).

        Exact Fraction arithmetic when every input is an int or Fraction;
        otherwise the IEEE double path is used.
        """
        if len(point) != self.space.nvars:
            raise ValueError(
                f"point of length {len(point)}, expected {self.space.nvars}"
            )
        if all(isinstance(v, (int, Fraction)) for v in point):
            return self.eval_exact(point)
        return self.eval_float([float(v) for v in point])

    def eval_exact(self, point: Sequence) -> Fraction:
        vals = [_as_fraction(v) for v in point]
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for e, v in zip(exps, vals):
                if e:
                    term *= v ** e
            total += term
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for exps, coeff in self.terms.items():
            term = float(coeff)
            for e, v in zip(exps, point):
                if e:
                    term *= v ** e
            total += term
        return total

    # -- substitution and reshaping ------------------------------------------

    def substitute(self, replacements: Mapping[int, "Polynomial"]) -> "Polynomial":
        """Substitute polynomials for variables (positions not listed stay)."""
        for pos, rep in replacements.items():
            if rep.space != self.space:
                raise SpaceMismatchError("replacement lives in a different space")
            if not 0 <= pos < self.space.nvars:
                raise IndexError(f"variable position {pos} out of range")
        # cache powers of each replacement up to its max needed exponent
        pow_cache: dict[int, list[Polynomial]] = {}
        for pos, rep in replacements.items():
            top = max((e[pos] for e in self.terms), default=0)
            powers = [Polynomial.constant(self.space, 1)]
            for _ in range(top):
                powers.append(powers[-1] * rep)
            pow_cache[pos] = powers
        result = Polynomial(self.space)
        for exps, coeff in self.terms.items():
            kept = list(exps)
            for pos in replacements:
                kept[pos] = 0
            term = Polynomial.monomial(self.space, kept, coeff)
            for pos in replacements:
                if exps[pos]:
                    term = term * pow_cache[pos][exps[pos]]
            result = result + term
        return result

    def lift_to_phase(self) -> "Polynomial":
        """Re-declare a base polynomial over the phase space (zero fiber block)."""
        if self.space.fiber:
            return self
        phase = self.space.phase
        pad = (0,) * self.space.n
        return Polynomial(phase, {e + pad: c for e, c in self.terms.items()})

    def drop_fiber(self) -> "Polynomial":
        """Forget the fiber block (requires no fiber variable to occur)."""
        if not self.space.fiber:
            return self
        n = self.space.n
        out = {}
        for exps, coeff in self.terms.items():
            if any(exps[n:]):
                raise ValueError("polynomial depends on fiber variables")
            out[exps[:n]] = coeff
        return Polynomial(self.space.base, out)

    def factor_out(self, pos: int) -> tuple[int, "Polynomial"]:
        """Largest k with variable^k dividing self, and the exact quotient.

        The zero polynomial returns (0, 0).
        """
        if self.is_zero():
            return 0, self
        k = min(e[pos] for e in self.terms)
        if k == 0:
            return 0, self
        out = {
            exps[:pos] + (exps[pos] - k,) + exps[pos + 1:]: c
            for exps, c in self.terms.items()
        }
        return k, Polynomial(self.space, out)

    def truncate_total(self, order: int) -> "Polynomial":
        """Drop every term of total degree exceeding ``order``."""
        return Polynomial(
            self.space, {e: c for e, c in self.terms.items() if sum(e) <= order}
        )

    # -- printing -----------------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for pos, e in enumerate(exps):
                if e == 0:
                    continue
                name = self.space.var_name(pos)
                factors.append(name if e == 1 else f"{name}^{e}")
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not chunks:
                if coeff > 0:
                    chunks.append(body)
                else:
                    # a leading unary minus binds to the first atom only, so
                    # "-x1^2" would re-parse as (-x1)^2; spell the -1 out
                    if mag == 1 and factors and "^" in factors[0]:
                        body = "*".join(["1"] + factors)
                    chunks.append(f"-{body}")
            else:
                chunks.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(chunks)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


class JetSeries:
    """Truncated power series: a base polynomial cut at total degree ``order``.

    Every arithmetic result is re-truncated, so a JetSeries is a class
    representative of a d-jet at the origin.
    """

    __slots__ = ("body", "order")

    def __init__(self, body: Polynomial, order: int):
        if body.space.fiber:
            raise ValueError("jets are taken in the base variables only")
        if order < 0:
            raise ValueError("jet order must be >= 0")
        object.__setattr__(self, "body", body.truncate_total(order))
        object.__setattr__(self, "order", order)

    def __setattr__(self, name, value):
        raise AttributeError("JetSeries is immutable")

    @property
    def space(self) -> Space:
        return self.body.space

    @classmethod
    def zero(cls, space: Space, order: int) -> "JetSeries":
        return cls(Polynomial.zero(space), order)

    @classmethod
    def constant(cls, space: Space, value, order: int) -> "JetSeries":
        return cls(Polynomial.constant(space, value), order)

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, JetSeries):
            return NotImplemented
        return self.order == other.order and self.body == other.body

    def __hash__(self):
        return hash((self.body, self.order))

    def _coerce(self, other) -> "JetSeries":
        if isinstance(other, JetSeries):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other
        if isinstance(other, Polynomial):
            return JetSeries(other, self.order)
        if isinstance(other, (int, Fraction)):
            return JetSeries.constant(self.space, other, self.order)
        raise TypeError(f"cannot combine JetSeries with {type(other).__name__}")

    def __add__(self, other) -> "JetSeries":
        other = self._coerce(other)
        return JetSeries(self.body + other.body, self.order)

    __radd__ = __add__

    def __neg__(self) -> "JetSeries":
        return JetSeries(-self.body, self.order)

    def __sub__(self, other) -> "JetSeries":
        other = self._coerce(other)
        return JetSeries(self.body - other.body, self.order)

    def __mul__(self, other) -> "JetSeries":
        if isinstance(other, (int, Fraction)):
            return JetSeries(self.body * other, self.order)
        other = self._coerce(other)
        return JetSeries(self.body * other.body, self.order)

    __rmul__ = __mul__

    def invert_unit(self) -> "JetSeries":
        """Multiplicative inverse modulo degree ``order``+1.

        Requires a nonzero constant term.  Computed by the geometric series:
        for u = c(1 - w) with w of positive order, 1/u = (1/c) sum w^k.
        """
        c = self.body.constant_term()
        if c == 0:
            raise NonUnitError("series has zero constant term")
        w = JetSeries(Polynomial.constant(self.space, 1) - self.body * (1 / c), self.order)
        acc = JetSeries.constant(self.space, 1, self.order)
        power = acc
        for _ in range(self.order):
            power = power * w
            if power.is_zero():
                break
            acc = acc + power
        return acc * (1 / c)

    def __str__(self) -> str:
        return f"{self.body} + O(deg {self.order + 1})"

    def __repr__(self) -> str:
        return f"JetSeries({self.body!r}, order={self.order})"


# ---------------------------------------------------------------------------
# Expression parser
#
# Grammar (whitespace insignificant, no implicit multiplication):
#   expr     := term  (('+'|'-') term)*
#   term     := factor ('*' factor)*
#   factor   := atom ('^' uint)?
#   atom     := rational | var | '(' expr ')' | '-' atom
#   rational := uint ('/' uint)?
#   var      := ('x'|'p') uint          (1-based, bounds-checked)
# ---------------------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str, space: Space):
        self.text = text
        self.space = space
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.take(ch):
            raise ParseError(f"expected '{ch}'", self.pos)

    def uint(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected an unsigned integer", start)
        return int(self.text[start:self.pos])

    def expr(self) -> Polynomial:
        value = self.term()
        while True:
            if self.take("+"):
                value = value + self.term()
            elif self.take("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> Polynomial:
        value = self.factor()
        while self.take("*"):
            value = value * self.factor()
        return value

    def factor(self) -> Polynomial:
        base = self.atom()
        if self.take("^"):
            at = self.pos
            k = self.uint()
            if k > MAX_EXPONENT:
                raise ParseError(f"exponent {k} exceeds limit {MAX_EXPONENT}", at)
            return base ** k
        return base

    def atom(self) -> Polynomial:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return -self.atom()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            self.expect(")")
            return value
        if ch in ("x", "p"):
            at = self.pos
            self.pos += 1
            k = self.uint()
            try:
                pos = self.space.x(k) if ch == "x" else self.space.p(k)
            except IndexError as exc:
                raise ParseError(str(exc), at) from None
            return Polynomial.variable(self.space, pos)
        if ch.isdigit():
            num = self.uint()
            if self.take("/"):
                at = self.pos
                den = self.uint()
                if den == 0:
                    raise ParseError("zero denominator", at)
                return Polynomial.constant(self.space, Fraction(num, den))
            return Polynomial.constant(self.space, num)
        raise ParseError("expected a number, variable, '(' or '-'", self.pos)


def parse_expression(text: str, space: Space) -> Polynomial:
    """Parse an expression into a canonical Polynomial over ``space``.

    Raises :class:`ParseError` (carrying the byte offset) on syntax errors,
    unknown variables and oversized exponents.
    """
    scanner = _Scanner(text, space)
    value = scanner.expr()
    scanner.skip_ws()
    if scanner.pos != len(text):
        raise ParseError("trailing input", scanner.pos)
    return value
