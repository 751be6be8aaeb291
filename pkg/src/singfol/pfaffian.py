"""Exact skew-symmetric linear algebra over the polynomial ring.

A :class:`SkewMatrix` stores the strictly-upper entries a_ij (i < j) of an
antisymmetric matrix; the lower triangle is derived as a_ji = -a_ij and the
diagonal is structurally zero.  Pfaffians of index-set minors come in two
routes:

* :func:`pfaffian_by_definition` expands the wedge power (1/s!) A_I^s and
  reads off the coefficient of e_{i1} ^ ... ^ e_{ir}.  This is the ground
  truth.
* :func:`pfaffian_by_recursion` uses the cofactor-style expansion along a
  pivot row.  Its scalar prefactor is not trusted from any source: it is
  calibrated once per minor size against the wedge definition on a block
  matrix (see :func:`calibration_report`) and then checked exactly on random
  corpora by the test suite.  The same goes for the prefactor of
  :func:`pfaffian_derivative`.

Kernel generators Z_I (one per index set of cardinality r+1) are the
Pfaffian-cofactor vectors spanning ker(A) wherever A has rank r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Callable, Sequence

from singfol.exactpoly import Polynomial, Space
from singfol.vectorfield import VectorField

__all__ = [
    "SkewMatrix",
    "KernelGenerator",
    "index_sets",
    "epsilon_sign",
    "pfaffian_by_definition",
    "pfaffian_by_recursion",
    "pfaffian_derivative",
    "minor_determinant",
    "kernel_generators",
    "skew_rank",
    "calibration_report",
]


def index_sets(m: int, l: int) -> list[tuple[int, ...]]:
    """All subsets of {1..m} of cardinality l, in lexicographic order."""
    return list(combinations(range(1, m + 1), l))


def _check_index_set(I: Sequence[int], m: int) -> tuple[int, ...]:
    I = tuple(I)
    if list(I) != sorted(set(I)):
        raise ValueError(f"index set {I} must be strictly increasing")
    if I and not (1 <= I[0] and I[-1] <= m):
        raise ValueError(f"index set {I} out of range 1..{m}")
    return I


def epsilon_sign(I: Sequence[int], j: int) -> int:
    """Sign of moving e_j to the front of the ordered wedge over I."""
    I = tuple(I)
    if j not in I:
        raise ValueError(f"{j} is not in the index set {I}")
    return -1 if I.index(j) % 2 else 1


class SkewMatrix:
    """Antisymmetric matrix with Polynomial entries (upper triangle stored)."""

    __slots__ = ("space", "size", "upper")

    def __init__(self, space: Space, size: int, upper: dict[tuple[int, int], Polynomial]):
        if size < 1:
            raise ValueError("size must be >= 1")
        clean = {}
        for (i, j), value in upper.items():
            if not (1 <= i < j <= size):
                raise ValueError(f"upper entry index ({i},{j}) out of range")
            if value.space != space:
                raise ValueError("entry declared over a different space")
            if not value.is_zero():
                clean[(i, j)] = value
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "upper", clean)

    def __setattr__(self, name, value):
        raise AttributeError("SkewMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Polynomial]]) -> "SkewMatrix":
        """Build from a full square array, checking antisymmetry exactly."""
        size = len(rows)
        space = rows[0][0].space
        upper = {}
        for i in range(size):
            if not rows[i][i].is_zero():
                raise ValueError(f"diagonal entry ({i + 1},{i + 1}) is nonzero")
            for j in range(i + 1, size):
                if rows[j][i] != -rows[i][j]:
                    raise ValueError(f"entries ({i + 1},{j + 1}) / ({j + 1},{i + 1}) not antisymmetric")
                upper[(i + 1, j + 1)] = rows[i][j]
        return cls(space, size, upper)

    def entry(self, i: int, j: int) -> Polynomial:
        if not (1 <= i <= self.size and 1 <= j <= self.size):
            raise IndexError(f"entry ({i},{j}) out of range")
        if i == j:
            return Polynomial.zero(self.space)
        if i < j:
            return self.upper.get((i, j), Polynomial.zero(self.space))
        value = self.upper.get((j, i))
        return -value if value is not None else Polynomial.zero(self.space)

    def map_entries(self, fn: Callable[[Polynomial], Polynomial]) -> "SkewMatrix":
        return SkewMatrix(self.space, self.size, {k: fn(v) for k, v in self.upper.items()})

    def evaluate(self, point: Sequence) -> list[list[Fraction]]:
        """Full numeric matrix at a rational point."""
        return [[self.entry(i, j).eval_exact(point) for j in range(1, self.size + 1)]
                for i in range(1, self.size + 1)]

    def rows(self) -> list[list[Polynomial]]:
        return [[self.entry(i, j) for j in range(1, self.size + 1)]
                for i in range(1, self.size + 1)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkewMatrix):
            return NotImplemented
        return self.size == other.size and self.upper == other.upper

    def __str__(self) -> str:
        body = ";  ".join(
            "[" + ", ".join(str(self.entry(i, j)) for j in range(1, self.size + 1)) + "]"
            for i in range(1, self.size + 1)
        )
        return f"SkewMatrix{self.size}({body})"


# ---------------------------------------------------------------------------
# Wedge-power definition
# ---------------------------------------------------------------------------


def _merge_disjoint(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[tuple[int, ...], int] | None:
    """Merge two ascending index tuples; None on overlap, else (merged, sign)."""
    out = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining elements of a
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out), sign


def _wedge(u: dict, v: dict, space: Space) -> dict:
    out: dict = {}
    for bu, cu in u.items():
        for bv, cv in v.items():
            merged = _merge_disjoint(bu, bv)
            if merged is None:
                continue
            basis, sign = merged
            term = cu * cv if sign > 0 else -(cu * cv)
            acc = out.get(basis)
            acc = term if acc is None else acc + term
            if acc.is_zero():
                out.pop(basis, None)
            else:
                out[basis] = acc
    return out


def pfaffian_by_definition(A: SkewMatrix, I: Sequence[int]) -> Polynomial:
    """Pfaffian of the minor A_I straight from the wedge-power definition.

    Conventions: 1 for the empty index set, 0 for odd cardinality.
    """
    I = _check_index_set(I, A.size)
    if len(I) == 0:
        return Polynomial.constant(A.space, 1)
    if len(I) % 2:
        return Polynomial.zero(A.space)
    s = len(I) // 2
    two_vector = {}
    for i, j in combinations(I, 2):
        value = A.entry(i, j)
        if not value.is_zero():
            two_vector[(i, j)] = value
    power = {(): Polynomial.constant(A.space, 1)}
    for _ in range(s):
        power = _wedge(power, two_vector, A.space)
        if not power:
            return Polynomial.zero(A.space)
    top = power.get(tuple(I))
    if top is None:
        return Polynomial.zero(A.space)
    return top * Fraction(1, factorial(s))


# ---------------------------------------------------------------------------
# Calibrated recursion and derivative formula
# ---------------------------------------------------------------------------

_recursion_prefactors: dict[int, Fraction] = {}
_derivative_prefactors: dict[int, Fraction] = {}


def _block_matrix(r: int, variable_entries: bool) -> SkewMatrix:
    """Block matrix e1^e2 + e3^e4 + ... of size r, unit or variable weights."""
    s = r // 2
    space = Space(max(s, 1))
    upper = {}
    for k in range(s):
        if variable_entries:
            upper[(2 * k + 1, 2 * k + 2)] = Polynomial.variable(space, k)
        else:
            upper[(2 * k + 1, 2 * k + 2)] = Polynomial.constant(space, 1)
    return SkewMatrix(space, r, upper)


def _proportionality(target: Polynomial, raw: Polynomial) -> Fraction:
    """The rational c with target = c * raw, or raise if none exists."""
    if raw.is_zero():
        if target.is_zero():
            return Fraction(0)
        raise ArithmeticError("calibration failed: raw sum is zero but target is not")
    exps, coeff = raw.sorted_terms()[0]
    c = target.coefficient(exps) / coeff
    if raw * c != target:
        raise ArithmeticError("calibration failed: sides are not proportional")
    return c


def _raw_recursion_sum(A: SkewMatrix, I: tuple[int, ...], i0: int,
                       sub: Callable[[tuple[int, ...]], Polynomial]) -> Polynomial:
    acc = Polynomial.zero(A.space)
    rest = tuple(k for k in I if k != i0)
    for j in rest:
        a = A.entry(i0, j)
        if a.is_zero():
            continue
        sign = epsilon_sign(I, i0) * epsilon_sign(rest, j)
        term = a * sub(tuple(k for k in rest if k != j))
        acc = acc + (term if sign > 0 else -term)
    return acc


def _recursion_prefactor(r: int) -> Fraction:
    """Prefactor c(r) fixed by comparing the raw pivot expansion against the
    wedge definition on the size-r block matrix (sub-Pfaffians taken from the
    definition, so the calibration never assumes the formula it fixes)."""
    if r not in _recursion_prefactors:
        block = _block_matrix(r, variable_entries=False)
        I = tuple(range(1, r + 1))
        raw = _raw_recursion_sum(block, I, 1, lambda J: pfaffian_by_definition(block, J))
        target = pfaffian_by_definition(block, I)
        _recursion_prefactors[r] = _proportionality(target, raw)
    return _recursion_prefactors[r]


def _derivative_prefactor(r: int) -> Fraction:
    if r not in _derivative_prefactors:
        block = _block_matrix(r, variable_entries=True)
        I = tuple(range(1, r + 1))
        d1 = lambda f: f.partial(0)
        raw = Polynomial.zero(block.space)
        for i in I:
            rest = tuple(k for k in I if k != i)
            for j in rest:
                da = d1(block.entry(i, j))
                if da.is_zero():
                    continue
                sign = epsilon_sign(I, i) * epsilon_sign(rest, j)
                term = pfaffian_by_definition(block, tuple(k for k in rest if k != j)) * da
                raw = raw + (term if sign > 0 else -term)
        target = d1(pfaffian_by_definition(block, I))
        _derivative_prefactors[r] = _proportionality(target, raw)
    return _derivative_prefactors[r]


def calibration_report(max_size: int = 8) -> dict[str, dict[int, str]]:
    """Calibrated prefactors per even minor size, as printable fractions."""
    rec = {r: str(_recursion_prefactor(r)) for r in range(2, max_size + 1, 2)}
    der = {r: str(_derivative_prefactor(r)) for r in range(2, max_size + 1, 2)}
    return {"recursion": rec, "derivative": der}


def _pf_cached(A: SkewMatrix, I: tuple[int, ...], cache: dict) -> Polynomial:
    if I in cache:
        return cache[I]
    if len(I) == 0:
        value = Polynomial.constant(A.space, 1)
    elif len(I) % 2:
        value = Polynomial.zero(A.space)
    elif len(I) == 2:
        value = A.entry(I[0], I[1])
    else:
        raw = _raw_recursion_sum(A, I, I[0], lambda J: _pf_cached(A, J, cache))
        value = raw * _recursion_prefactor(len(I))
    cache[I] = value
    return value


def pfaffian_by_recursion(A: SkewMatrix, I: Sequence[int], pivot: int | None = None,
                          cache: dict | None = None) -> Polynomial:
    """Pfaffian of A_I by the calibrated pivot expansion.

    ``pivot`` defaults to the smallest element of I; any element gives the
    same value.  Passing a ``cache`` dict shares sub-Pfaffians across calls
    on the same matrix.
    """
    I = _check_index_set(I, A.size)
    if len(I) % 2:
        raise ValueError("recursion applies to even-cardinality index sets")
    if len(I) == 0:
        return Polynomial.constant(A.space, 1)
    if cache is None:
        cache = {}
    if pivot is None or pivot == I[0]:
        return _pf_cached(A, I, cache)
    if pivot not in I:
        raise ValueError(f"pivot {pivot} is not in {I}")
    raw = _raw_recursion_sum(A, I, pivot, lambda J: _pf_cached(A, J, cache))
    return raw * _recursion_prefactor(len(I))


def pfaffian_derivative(A: SkewMatrix, I: Sequence[int], D: VectorField,
                        cache: dict | None = None) -> Polynomial:
    """Apply the derivation D to the Pfaffian of A_I without differentiating
    the Pfaffian itself: the calibrated cofactor formula sums
    phi(A, I minus {i,j}) * D(a_ij) over ordered pairs."""
    I = _check_index_set(I, A.size)
    if len(I) % 2:
        raise ValueError("derivative formula applies to even-cardinality index sets")
    if cache is None:
        cache = {}
    acc = Polynomial.zero(A.space)
    for i in I:
        rest = tuple(k for k in I if k != i)
        for j in rest:
            da = D.apply(A.entry(i, j))
            if da.is_zero():
                continue
            sign = epsilon_sign(I, i) * epsilon_sign(rest, j)
            term = _pf_cached(A, tuple(k for k in rest if k != j), cache) * da
            acc = acc + (term if sign > 0 else -term)
    if acc.is_zero():
        return acc
    return acc * _derivative_prefactor(len(I))


# ---------------------------------------------------------------------------
# Independent determinant oracle (no Pfaffians involved)
# ---------------------------------------------------------------------------


def minor_determinant(A: SkewMatrix, rows: Sequence[int], cols: Sequence[int] | None = None) -> Polynomial:
    """Determinant of the (rows x cols) minor by memoized cofactor expansion.

    Defaults to the symmetric minor (cols = rows).  Kept free of any Pfaffian
    machinery so it can serve as the oracle for phi^2 = Det and for the
    odd-minor factorization identity.
    """
    rows = _check_index_set(rows, A.size)
    cols = rows if cols is None else _check_index_set(cols, A.size)
    if len(rows) != len(cols):
        raise ValueError("minor must be square")
    if len(rows) == 0:
        return Polynomial.constant(A.space, 1)

    memo: dict[tuple[int, ...], Polynomial] = {}

    def expand(depth: int, remaining: tuple[int, ...]) -> Polynomial:
        if not remaining:
            return Polynomial.constant(A.space, 1)
        if remaining in memo:
            return memo[remaining]
        i = rows[depth]
        acc = Polynomial.zero(A.space)
        for pos, j in enumerate(remaining):
            a = A.entry(i, j)
            if a.is_zero():
                continue
            sub = expand(depth + 1, remaining[:pos] + remaining[pos + 1:])
            term = a * sub
            acc = acc + (term if pos % 2 == 0 else -term)
        memo[remaining] = acc
        return acc

    return expand(0, cols)


# ---------------------------------------------------------------------------
# Kernel generators and rank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelGenerator:
    """The vector Z_I = sum over i in I of eps(I,i) phi(A, I minus i) e_i."""

    I: tuple[int, ...]
    size: int
    coefficients: tuple[Polynomial, ...]

    def vector(self) -> list[Polynomial]:
        """Z_I embedded as a length-``size`` coefficient vector."""
        space = self.coefficients[0].space
        out = [Polynomial.zero(space) for _ in range(self.size)]
        for idx, coeff in zip(self.I, self.coefficients):
            out[idx - 1] = coeff
        return out


def kernel_generators(A: SkewMatrix, r: int) -> list[KernelGenerator]:
    """One generator per I in Lambda_{r+1}; spans ker(A) wherever rank(A) = r."""
    if r % 2:
        raise ValueError("rank parameter must be even")
    if not 0 <= r < A.size:
        raise ValueError(f"need 0 <= r < {A.size}")
    cache: dict = {}
    out = []
    for I in index_sets(A.size, r + 1):
        coeffs = tuple(
            epsilon_sign(I, i) * _pf_cached(A, tuple(k for k in I if k != i), cache)
            for i in I
        )
        out.append(KernelGenerator(I, A.size, coeffs))
    return out


def _scalar_rank_by_pfaffians(values: list[list[Fraction]]) -> int:
    m = len(values)

    def pf(I: tuple[int, ...], memo: dict) -> Fraction:
        if not I:
            return Fraction(1)
        if I in memo:
            return memo[I]
        i0 = I[0]
        rest = I[1:]
        acc = Fraction(0)
        for j in rest:
            a = values[i0 - 1][j - 1]
            if a == 0:
                continue
            sign = epsilon_sign(I, i0) * epsilon_sign(rest, j)
            acc += sign * a * pf(tuple(k for k in rest if k != j), memo)
        memo[I] = acc
        return acc

    memo: dict = {}
    top = m if m % 2 == 0 else m - 1
    for r in range(top, 0, -2):
        for I in index_sets(m, r):
            if pf(I, memo) != 0:
                return r
    return 0


def skew_rank(A: SkewMatrix, at: Sequence | None = None) -> int:
    """Largest even r with a nonvanishing Pfaffian minor of size r.

    Without ``at`` this is the generic rank over the fraction field (some
    minor is a nonzero polynomial); with a rational point it is the exact
    rank of the evaluated matrix.  Computed from Pfaffian minors so that the
    rank decision and the stratification equations are the same objects.
    """
    if at is not None:
        return _scalar_rank_by_pfaffians(A.evaluate(at))
    cache: dict = {}
    top = A.size if A.size % 2 == 0 else A.size - 1
    for r in range(top, 0, -2):
        for I in index_sets(A.size, r):
            if not _pf_cached(A, I, cache).is_zero():
                return r
    return 0
