"""Goh matrix of a frame, kernel generators on phase space, corank-1
projections, divergence-control certificates and kernel-dimension
stratification.

Conventions used throughout:

* the Goh matrix H has entries h^{ij} = p . [X^i, X^j], fiber-linear;
* for a corank-1 frame X^i = d_i + A_i d_n the bracket points along d_n, so
  H = p_n * Ht with Ht carrying the x-only reduced entries, and every
  Pfaffian minor factors as phi(H, I) = p_n^(|I|/2) * phi(Ht, I);
* generators for the rank-r kernel are Y_I = sum over j in I of
  eps(I,j) phi(H, I minus j) hvec^j, one per index set I of cardinality r+1,
  and their base projections Z_I use the reduced Pfaffians.

The divergence certificate checks three exact identities: the Euclidean
phase-space divergence of Y_I vanishes, the eps-weighted triple-bracket
expansion of that divergence vanishes (a Poisson-Jacobi cancellation), and
on the base div(Z_I) is an explicit combination of the components of Z_I
with coefficients proportional to d(A_j)/dx_n.  The proportionality
constant is solved from one linear equation over Q, never assumed.

Kernel-membership checks on the annihilator bundle use exact evaluation at
random rational points rather than quotient-ring arithmetic; a polynomial
that vanishes at sufficiently many generic exact points of the sampled
family is reported with those witnesses, and every identity that can be
stated off the ideal is checked fully symbolically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from singfol.exactpoly import Polynomial
from singfol.pfaffian import (
    SkewMatrix,
    epsilon_sign,
    index_sets,
    kernel_generators,
    skew_rank,
)
from singfol.vectorfield import (
    Frame,
    VectorField,
    divergence,
    hamiltonian_lift,
    hamiltonian_vector_field,
    lie_bracket,
    poisson_bracket,
)

__all__ = [
    "GohMatrix",
    "AbnormalGenerator",
    "DivergenceCertificate",
    "SamplerConfig",
    "Witness",
    "Stratum",
    "Stratification",
    "AnnihilatorError",
    "CertificateError",
    "NormalFormError",
    "SamplingError",
    "goh_matrix",
    "kernel_dim_at",
    "abnormal_generators",
    "project_corank1",
    "divergence_certificate",
    "singular_set_equations",
    "sample_annihilator_point",
    "stratify",
]


class AnnihilatorError(ValueError):
    """A point fails the constraints p . X^i(x) = 0, p != 0."""

    def __init__(self, offenders: list[tuple[int, Fraction]]):
        self.offenders = offenders
        if offenders:
            detail = ", ".join(f"h^{i}={v}" for i, v in offenders)
            super().__init__(f"point is off the annihilator bundle: {detail}")
        else:
            super().__init__("covector p must be nonzero")


class CertificateError(RuntimeError):
    """A divergence certificate has a nonzero residual polynomial."""

    def __init__(self, message: str, residual: Polynomial):
        super().__init__(f"{message}: residual {residual}")
        self.residual = residual


class NormalFormError(ValueError):
    """An operation needing the corank-1 normal form got a general frame."""


class SamplingError(RuntimeError):
    """No valid annihilator sample could be drawn."""


@dataclass(frozen=True)
class GohMatrix:
    """The skew matrix of pairwise bracket momenta of a frame.

    ``hamiltonians`` and ``ham_fields`` cache the momentum functions h^i and
    their Hamiltonian vector fields; ``reduced`` is the x-only matrix Ht with
    H = p_n * Ht, present exactly when the frame is in corank-1 normal form.
    """

    frame: Frame
    H: SkewMatrix
    hamiltonians: tuple[Polynomial, ...]
    ham_fields: tuple[VectorField, ...]
    reduced: SkewMatrix | None = None

    @property
    def m(self) -> int:
        return self.frame.m


def goh_matrix(F: Frame) -> GohMatrix:
    """Entries h^{ij} = lift of [X^i, X^j]; reduced form when corank-1."""
    phase = F.space.phase
    hams = tuple(hamiltonian_lift(X) for X in F.fields)
    hvfs = tuple(hamiltonian_vector_field(h) for h in hams)
    upper = {}
    for i in range(1, F.m + 1):
        for j in range(i + 1, F.m + 1):
            upper[(i, j)] = hamiltonian_lift(lie_bracket(F.fields[i - 1], F.fields[j - 1]))
    H = SkewMatrix(phase, F.m, upper)
    for entry in upper.values():
        if not entry.is_zero() and entry.p_homogeneous_degree() != 1:
            raise AssertionError("Goh entries must be fiber-linear")
    reduced = None
    if F.normal_form is not None:
        pn = phase.p(F.n)
        red_upper = {}
        for key, entry in upper.items():
            if entry.is_zero():
                continue
            k, quotient = entry.factor_out(pn)
            if k != 1:
                raise NormalFormError(f"entry {key} does not factor as p{F.n} * (x-only)")
            red_upper[key] = quotient.drop_fiber()
        reduced = SkewMatrix(F.space, F.m, red_upper)
    return GohMatrix(F, H, hams, hvfs, reduced)


def _annihilator_offenders(F: Frame, x: Sequence[Fraction], p: Sequence[Fraction]):
    offenders = []
    for i, X in enumerate(F.fields, start=1):
        value = sum((Fraction(pk) * vk for pk, vk in zip(p, X.evaluate(x))), Fraction(0))
        if value != 0:
            offenders.append((i, value))
    return offenders


def kernel_dim_at(F: Frame, x: Sequence[Fraction], p: Sequence[Fraction],
                  goh: GohMatrix | None = None) -> int:
    """Kernel dimension m - rank(H) at an exact point of the annihilator.

    The point must satisfy p . X^i(x) = 0 for every frame field and p != 0;
    otherwise an :class:`AnnihilatorError` reports the offending momenta.
    """
    if all(Fraction(v) == 0 for v in p):
        raise AnnihilatorError([])
    offenders = _annihilator_offenders(F, x, p)
    if offenders:
        raise AnnihilatorError(offenders)
    if goh is None:
        goh = goh_matrix(F)
    return F.m - skew_rank(goh.H, at=list(x) + list(p))


@dataclass(frozen=True)
class AbnormalGenerator:
    """A kernel generator realized as a phase-space vector field.

    ``coefficients`` are the frame coefficients eps(I,j) phi(H, I minus j)
    (phase polynomials, indexed along I).  ``Z`` and ``reduced_coefficients``
    carry the corank-1 base projection when the frame has a normal form.
    ``p_degree`` records the fiber homogeneity of the (x-block, p-block).
    """

    I: tuple[int, ...]
    rank: int
    Y: VectorField
    coefficients: tuple[Polynomial, ...]
    Z: VectorField | None = None
    reduced_coefficients: tuple[Polynomial, ...] | None = None
    p_degree: tuple[int | None, int | None] = (None, None)


def abnormal_generators(F: Frame, r: int, goh: GohMatrix | None = None) -> list[AbnormalGenerator]:
    """One generator Y_I per index set I of cardinality r+1 (lexicographic).

    The x-block of Y_I is fiber-homogeneous of degree r/2 and the p-block of
    degree r/2 + 1 (each Pfaffian coefficient has fiber degree |I minus j|/2
    since the Goh entries are fiber-linear).  For corank-1 frames the base
    projection is attached.
    """
    if r % 2:
        raise ValueError("rank parameter must be even")
    if not 0 <= r < F.m:
        raise ValueError(f"need 0 <= r < m={F.m}")
    if goh is None:
        goh = goh_matrix(F)
    generators = []
    for gen in kernel_generators(goh.H, r):
        Y = VectorField.zero(F.space.phase, "phase")
        for coeff, hvf in zip(gen.coefficients, (goh.ham_fields[i - 1] for i in gen.I)):
            Y = Y + VectorField([coeff * c for c in hvf.components], "phase")
        entry = AbnormalGenerator(gen.I, r, Y, gen.coefficients,
                                  p_degree=Y.p_homogeneity() if not Y.is_zero() else (None, None))
        if F.normal_form is not None:
            entry = project_corank1(entry, F, goh)
        generators.append(entry)
    return generators


def project_corank1(g: AbnormalGenerator, F: Frame, goh: GohMatrix | None = None) -> AbnormalGenerator:
    """Attach the base projection Z_I = sum eps(I,i) phi_red(I minus i) X^i.

    Consistency is enforced exactly: substituting p_i -> -A_i p_n into the
    x-block of Y_I must recover p_n^(r/2) times the components of Z_I.  A
    frame without the corank-1 structure fails with NormalFormError.
    """
    if F.normal_form is None:
        raise NormalFormError("corank-1 normal form required for projection")
    if goh is None:
        goh = goh_matrix(F)
    assert goh.reduced is not None
    from singfol.pfaffian import pfaffian_by_recursion

    cache: dict = {}
    red_coeffs = tuple(
        epsilon_sign(g.I, i) * pfaffian_by_recursion(goh.reduced, tuple(k for k in g.I if k != i), cache=cache)
        for i in g.I
    )
    Z = VectorField.zero(F.space, "base")
    for coeff, i in zip(red_coeffs, g.I):
        Z = Z + VectorField([coeff * c for c in F.fields[i - 1].components], "base")

    # exact consistency of the projection with the phase generator
    phase = F.space.phase
    pn_pos = phase.p(F.n)
    pn = Polynomial.variable(phase, pn_pos)
    subs = {phase.p(i + 1): -F.normal_form[i].lift_to_phase() * pn for i in range(F.n - 1)}
    scale = pn ** (g.rank // 2)
    for k in range(F.n):
        restricted = g.Y.components[k].substitute(subs)
        if restricted != scale * Z.components[k].lift_to_phase():
            raise NormalFormError(
                f"x-block component {k + 1} of Y_{g.I} does not factor through p{F.n}^{g.rank // 2}"
            )
    return AbnormalGenerator(g.I, g.rank, g.Y, g.coefficients, Z, red_coeffs, g.p_degree)


@dataclass(frozen=True)
class DivergenceCertificate:
    """Exact residual data certifying controlled divergence of a generator.

    The certificate is valid iff every stored residual polynomial is zero:
    ``phase_divergence`` (the Euclidean divergence of Y_I over phase space),
    ``jacobi_expansion`` (the eps-weighted sum of triple Poisson brackets
    that the divergence expands into) and, when a base projection exists,
    ``base_residual`` = div(Z_I) - sum c_j Z_I(x_j) with
    c_j = base_constant * d(A_j)/dx_n.
    """

    subject: tuple[int, ...]
    phase_divergence: Polynomial
    jacobi_expansion: Polynomial
    base_constant: Fraction | None = None
    base_coefficients: tuple[Polynomial, ...] | None = None
    base_residual: Polynomial | None = None
    bracket_order: str = "{h^j,{h^k,h^l}}"

    def ok(self) -> bool:
        residuals = [self.phase_divergence, self.jacobi_expansion]
        if self.base_residual is not None:
            residuals.append(self.base_residual)
        return all(r.is_zero() for r in residuals)


def _jacobi_expansion(g: AbnormalGenerator, goh: GohMatrix) -> Polynomial:
    """Sum over ordered distinct triples (j,k,l) in I of
    eps(I,j) eps(I-j,k) eps(I-jk,l) phi(H, I-jkl) {h^j, {h^k, h^l}}."""
    from singfol.pfaffian import pfaffian_by_recursion

    phase = goh.frame.space.phase
    acc = Polynomial.zero(phase)
    cache: dict = {}
    pair_brackets = {}
    for k in g.I:
        for l in g.I:
            if k < l:
                pair_brackets[(k, l)] = poisson_bracket(goh.hamiltonians[k - 1], goh.hamiltonians[l - 1])
    for j in g.I:
        rest_j = tuple(i for i in g.I if i != j)
        for k in rest_j:
            rest_jk = tuple(i for i in rest_j if i != k)
            for l in rest_jk:
                sign = (epsilon_sign(g.I, j) * epsilon_sign(rest_j, k)
                        * epsilon_sign(rest_jk, l))
                phi = pfaffian_by_recursion(goh.H, tuple(i for i in rest_jk if i != l), cache=cache)
                if phi.is_zero():
                    continue
                hkl = pair_brackets[(k, l)] if k < l else -pair_brackets[(l, k)]
                triple = poisson_bracket(goh.hamiltonians[j - 1], hkl)
                term = phi * triple
                acc = acc + (term if sign > 0 else -term)
    return acc


def divergence_certificate(g: AbnormalGenerator, F: Frame,
                           goh: GohMatrix | None = None) -> DivergenceCertificate:
    """Build and validate the divergence certificate of a generator.

    Raises :class:`CertificateError` (carrying the residual) as soon as any
    of the exact identities fails.
    """
    if goh is None:
        goh = goh_matrix(F)
    phase_div = divergence(g.Y)
    jacobi = _jacobi_expansion(g, goh)
    base_constant = None
    base_coeffs = None
    base_residual = None
    if g.Z is not None:
        if F.normal_form is None:
            raise NormalFormError("generator carries a projection but frame has no normal form")
        space = F.space
        dA = [A.partial(F.n - 1) for A in F.normal_form]  # d(A_j)/dx_n
        combo = Polynomial.zero(space)
        for j in g.I:
            combo = combo + dA[j - 1] * g.Z.components[j - 1]
        div_z = divergence(g.Z)
        if combo.is_zero():
            base_constant = Fraction(0)
            base_residual = div_z
        else:
            exps, coeff = combo.sorted_terms()[0]
            base_constant = div_z.coefficient(exps) / coeff
            base_residual = div_z - combo * base_constant
        base_coeffs = tuple(dA[j - 1] * base_constant for j in g.I)
    cert = DivergenceCertificate(g.I, phase_div, jacobi, base_constant, base_coeffs, base_residual)
    if not phase_div.is_zero():
        raise CertificateError(f"phase divergence of Y_{g.I} is nonzero", phase_div)
    if not jacobi.is_zero():
        raise CertificateError(f"Jacobi expansion for Y_{g.I} is nonzero", jacobi)
    if base_residual is not None and not base_residual.is_zero():
        raise CertificateError(f"base divergence of Z_{g.I} is not a frame combination", base_residual)
    return cert


def singular_set_equations(F: Frame, r: int, goh: GohMatrix | None = None) -> list[Polynomial]:
    """The reduced Pfaffian minors phi_I(x), I of cardinality r, whose common
    zero set is the singular set of the rank-r level."""
    if F.normal_form is None:
        raise NormalFormError("singular-set equations need the corank-1 normal form")
    if r % 2 or not 0 < r <= F.m:
        raise ValueError("r must be even and in 1..m")
    if goh is None:
        goh = goh_matrix(F)
    from singfol.pfaffian import pfaffian_by_recursion

    cache: dict = {}
    return [pfaffian_by_recursion(goh.reduced, I, cache=cache) for I in index_sets(F.m, r)]


# ---------------------------------------------------------------------------
# Stratification by kernel dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    """Reproducible sampling plan for annihilator points.

    ``box`` bounds every base coordinate; samples are exact rationals on the
    grid with the given denominator, so every rank decision downstream stays
    in exact arithmetic.  ``tolerance`` is the relative singular-value
    threshold used by the float path when screening locus candidates.
    """

    seed: int
    count: int = 256
    box: tuple[Fraction, Fraction] = (Fraction(-1), Fraction(1))
    tolerance: float = 1e-8
    denominator: int = 64
    max_levels: int = 4


@dataclass(frozen=True)
class Witness:
    x: tuple[Fraction, ...]
    p: tuple[Fraction, ...]
    kernel_dim: int
    exact: bool


@dataclass(frozen=True)
class Stratum:
    dim: int
    rank: int
    has_interior: bool
    sample_count: int
    witnesses: tuple[Witness, ...]
    vanishing_locus: tuple[Polynomial, ...]
    parity_ok: bool


@dataclass(frozen=True)
class Stratification:
    """Observed kernel-dimension levels with loci and witnesses.

    Only the top level (minimal dimension) is an open stratum; for
    polynomial frames every deeper level sits inside the common zero set of
    the previous level's Pfaffian minors, which has empty interior, so the
    deeper levels are reported as locus levels rather than open strata.
    """

    frame_name: str
    m: int
    dims: tuple[int, ...]
    strata: tuple[Stratum, ...]
    config: SamplerConfig
    unconfirmed: tuple[tuple[float, ...], ...] = ()


def _random_rational(rng: random.Random, lo: Fraction, hi: Fraction, den: int) -> Fraction:
    lo_n = int(lo * den)
    hi_n = int(hi * den)
    return Fraction(rng.randint(lo_n, hi_n), den)


def sample_annihilator_point(F: Frame, rng: random.Random, config: SamplerConfig
                             ) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Draw one exact point (x, p) with p annihilating the frame at x."""
    lo, hi = config.box
    for _ in range(64):
        x = tuple(_random_rational(rng, lo, hi, config.denominator) for _ in range(F.n))
        if F.normal_form is not None:
            p = tuple(-A.eval_exact(x) for A in F.normal_form) + (Fraction(1),)
            return x, p
        basis = F.annihilator_basis(x)
        if not basis:
            continue
        coeffs = [Fraction(rng.randint(-9, 9)) for _ in basis]
        p = tuple(sum((c * vec[k] for c, vec in zip(coeffs, basis)), Fraction(0))
                  for k in range(F.n))
        if any(v != 0 for v in p):
            return x, p
    raise SamplingError("could not draw a valid annihilator point (degenerate box?)")


def _rationalize_near(value: float, max_den: int = 10 ** 6) -> list[Fraction]:
    """Candidate exact values near a float, smallest denominators first."""
    out = []
    for den in (1, 2, 4, 8, 16, 64, 1024, 10 ** 4, max_den):
        cand = Fraction(value).limit_denominator(den)
        if cand not in out:
            out.append(cand)
    return out


def _project_onto_locus(minors: list[Polynomial], x: tuple[Fraction, ...],
                        tolerance: float) -> tuple[Fraction, ...] | None:
    """Try to move one coordinate of x onto the common zero set of minors.

    For each coordinate, the first minor depending on it is frozen to a
    univariate polynomial whose float roots are rationalized and verified
    against ALL minors exactly.  Returns an exact locus point or None.
    """
    n = len(x)
    nonzero = [q for q in minors if not q.is_zero()]
    if not nonzero:
        return None
    for k in range(n):
        lead = next((q for q in nonzero if q.degree_in(k) > 0), None)
        if lead is None:
            continue
        deg = lead.degree_in(k)
        # freeze the other coordinates, collect univariate coefficients
        coeffs = [0.0] * (deg + 1)
        for exps, c in lead.terms.items():
            value = float(c)
            for pos, e in enumerate(exps):
                if pos != k and e:
                    value *= float(x[pos]) ** e
            coeffs[deg - exps[k]] += value
        if all(abs(c) < 1e-300 for c in coeffs[:-1]):
            continue
        roots = np.roots(coeffs)
        for root in roots:
            if abs(root.imag) > tolerance:
                continue
            for cand in _rationalize_near(root.real):
                point = x[:k] + (cand,) + x[k + 1:]
                if all(q.eval_exact(point) == 0 for q in nonzero):
                    return point
    return None


def stratify(F: Frame, config: SamplerConfig, goh: GohMatrix | None = None) -> Stratification:
    """Observe the kernel-dimension levels of the Goh matrix on the
    annihilator bundle.

    Level one comes from exact random sampling; deeper levels are searched
    on the symbolic vanishing loci (corank-1 reduced minors when available)
    by projecting samples onto the locus one coordinate at a time, keeping
    only witnesses where every minor vanishes exactly.  Float candidates
    that survive the singular-value screen but admit no nearby exact locus
    point are reported in ``unconfirmed`` and excluded from the dims.
    """
    if goh is None:
        goh = goh_matrix(F)
    rng = random.Random(config.seed)

    samples = [sample_annihilator_point(F, rng, config) for _ in range(config.count)]
    observed: dict[int, list[Witness]] = {}
    counts: dict[int, int] = {}
    for x, p in samples:
        d = kernel_dim_at(F, x, p, goh)
        counts[d] = counts.get(d, 0) + 1
        observed.setdefault(d, []).append(Witness(x, p, d, True))

    reduced = goh.reduced
    unconfirmed: list[tuple[float, ...]] = []

    if reduced is not None:
        # walk down the loci: minors of the current rank cut the next level
        current_dim = min(observed)
        seen_dims = set(observed)
        seeds = [w.x for w in observed[current_dim][:16]]
        for _ in range(config.max_levels):
            rank_here = F.m - current_dim
            if rank_here <= 0:
                break
            minors = singular_set_equations(F, rank_here, goh)
            if all(q.is_zero() for q in minors):
                break
            found = []
            for x in seeds:
                point = _project_onto_locus(minors, x, config.tolerance)
                if point is None:
                    continue
                pt_p = tuple(-A.eval_exact(point) for A in F.normal_form) + (Fraction(1),)
                d = kernel_dim_at(F, point, pt_p, goh)
                found.append(Witness(point, pt_p, d, True))
            if not found:
                # float screening: keep a record of near-locus candidates that
                # could not be certified exactly
                for x in seeds[:4]:
                    xf = [float(v) for v in x]
                    values = [q.eval_float(xf) for q in minors if not q.is_zero()]
                    if values and max(abs(v) for v in values) < config.tolerance:
                        unconfirmed.append(tuple(xf))
                break
            deeper = min(w.kernel_dim for w in found)
            if deeper <= current_dim or deeper in seen_dims:
                break
            for w in found:
                observed.setdefault(w.kernel_dim, []).append(w)
            seen_dims.add(deeper)
            current_dim = deeper
            seeds = [w.x for w in found if w.kernel_dim == deeper][:16]

    dims = tuple(sorted(observed))
    strata = []
    for level, d in enumerate(dims):
        rank_here = F.m - d
        parity_ok = (d % 2 == F.m % 2) and d <= F.m - 2
        locus: tuple[Polynomial, ...] = ()
        if reduced is not None and rank_here > 0:
            locus = tuple(singular_set_equations(F, rank_here, goh))
        witnesses = tuple(observed[d][:4])
        strata.append(Stratum(d, rank_here, level == 0, counts.get(d, len(observed[d])),
                              witnesses, locus, parity_ok))
        if level == 0 and not parity_ok:
            w = observed[d][0]
            if F.bracket_generation_depth(w.x) is not None:
                raise AssertionError(
                    f"generic kernel dimension {d} violates the parity/bound constraints "
                    f"although the frame is bracket generating at {w.x}"
                )
    return Stratification(F.name, F.m, dims, tuple(strata), config, tuple(unconfirmed))
