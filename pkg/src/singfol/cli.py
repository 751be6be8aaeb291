"""Command-line front end.

Frames enter as a single JSON document, either from a file (``--frame``) or
from stdin, with polynomial payloads written in the expression grammar:

    { "dimension": 4, "rank": 3, "normal_form": ["0", "x1", "x2"] }
    { "dimension": 3, "rank": 2, "fields": [["1","0","0"], ["0","1","x1"]] }

``singfol demo <name>`` emits such a document for the built-in fixtures, so
demos pipe into the other subcommands.  Every report is deterministic:
identical inputs, flags and seeds produce byte-identical output.  Exit
codes: 0 success, 1 input error, 2 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from singfol import abnormal, dynamics
from singfol.demos import DEMOS, demo_names
from singfol.exactpoly import ParseError, Space, parse_expression
from singfol.pfaffian import calibration_report, index_sets, pfaffian_by_recursion, skew_rank
from singfol.vectorfield import Frame, VectorField, divergence

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CERTIFICATE = 2


class InputError(Exception):
    pass


class CertificateFailure(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


def _load_frame_spec(path: str | None) -> dict:
    if path and path != "-":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read frame file: {exc}") from exc
    else:
        if sys.stdin.isatty():
            raise InputError("no frame given: pass --frame FILE or pipe a JSON document")
        text = sys.stdin.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON frame document: {exc}") from exc
    if not isinstance(spec, dict):
        raise InputError("frame document must be a JSON object")
    return spec


def build_frame(spec: dict) -> Frame:
    """Validate a frame-spec document and build the Frame."""
    try:
        n = int(spec["dimension"])
        m = int(spec["rank"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"frame document needs integer 'dimension' and 'rank': {exc}") from exc
    name = str(spec.get("name", ""))
    space = Space(n)
    try:
        if "normal_form" in spec:
            exprs = spec["normal_form"]
            if m != n - 1:
                raise InputError(f"normal_form forces rank = dimension-1 = {n - 1}, got {m}")
            if len(exprs) != n - 1:
                raise InputError(f"normal_form needs {n - 1} expressions, got {len(exprs)}")
            coeffs = []
            for idx, text in enumerate(exprs, start=1):
                try:
                    coeffs.append(parse_expression(text, space))
                except ParseError as exc:
                    raise InputError(f"normal_form[{idx}]: {exc}") from exc
            return Frame.corank1(n, coeffs, name=name)
        if "fields" in spec:
            rows = spec["fields"]
            if len(rows) != m:
                raise InputError(f"'fields' needs {m} rows, got {len(rows)}")
            fields = []
            for i, row in enumerate(rows, start=1):
                if len(row) != n:
                    raise InputError(f"field {i} needs {n} components, got {len(row)}")
                comps = []
                for j, text in enumerate(row, start=1):
                    try:
                        comps.append(parse_expression(text, space))
                    except ParseError as exc:
                        raise InputError(f"fields[{i}][{j}]: {exc}") from exc
                fields.append(VectorField(comps, "base"))
            return Frame(n, m, tuple(fields), None, name)
        raise InputError("frame document needs 'normal_form' or 'fields'")
    except (ValueError, IndexError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from exc


def _certify_rank(F: Frame, goh) -> int:
    """Even rank at which generators are produced by default."""
    matrix = goh.reduced if goh.reduced is not None else goh.H
    r = skew_rank(matrix)
    top = F.m - 1 if F.m % 2 else F.m - 2
    return min(r, max(top, 0))


def _index_set_to_str(I) -> str:
    return "{" + ",".join(str(i) for i in I) + "}"


def _generator_lines(g: abnormal.AbnormalGenerator) -> list[str]:
    lines = [f"generator I={_index_set_to_str(g.I)}  p-degrees (x,p) = {g.p_degree}"]
    lines.append(f"  Y = {g.Y}")
    if g.Z is not None:
        lines.append(f"  Z = {g.Z}")
    return lines


def _generator_json(g: abnormal.AbnormalGenerator) -> dict:
    return {
        "I": list(g.I),
        "p_degree": list(g.p_degree),
        "Y": [str(c) for c in g.Y.components],
        "Z": [str(c) for c in g.Z.components] if g.Z is not None else None,
    }


def _calibration(F: Frame) -> dict:
    top = F.m if F.m % 2 == 0 else F.m + 1
    return calibration_report(max(2, top))


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (text_lines, results_payload, seed)
# ---------------------------------------------------------------------------


def cmd_goh(F: Frame, args):
    goh = abnormal.goh_matrix(F)
    lines = [f"Goh matrix of frame '{F.name or '?'}' (m={F.m}, n={F.n})"]
    for i in range(1, F.m + 1):
        row = ", ".join(str(goh.H.entry(i, j)) for j in range(1, F.m + 1))
        lines.append(f"  H[{i}] = [{row}]")
    payload = {"H": [[str(goh.H.entry(i, j)) for j in range(1, F.m + 1)]
                     for i in range(1, F.m + 1)]}
    if goh.reduced is not None:
        lines.append(f"reduced form (H = p{F.n} * Ht):")
        for i in range(1, F.m + 1):
            row = ", ".join(str(goh.reduced.entry(i, j)) for j in range(1, F.m + 1))
            lines.append(f"  Ht[{i}] = [{row}]")
        payload["reduced"] = [[str(goh.reduced.entry(i, j)) for j in range(1, F.m + 1)]
                              for i in range(1, F.m + 1)]
    return lines, payload, None


def cmd_pfaffian(F: Frame, args):
    goh = abnormal.goh_matrix(F)
    r = args.minors
    if r % 2 or r < 2 or r > F.m:
        raise InputError(f"--minors must be a positive even integer <= m={F.m}")
    matrix = goh.reduced if goh.reduced is not None else goh.H
    kind = "reduced" if goh.reduced is not None else "phase"
    cache: dict = {}
    lines = [f"Pfaffian minors of order {r} ({kind} Goh matrix)"]
    payload = {"order": r, "kind": kind, "minors": {}}
    for I in index_sets(F.m, r):
        value = pfaffian_by_recursion(matrix, I, cache=cache)
        lines.append(f"  phi{_index_set_to_str(I)} = {value}")
        payload["minors"][_index_set_to_str(I)] = str(value)
    return lines, payload, None


def cmd_generators(F: Frame, args):
    goh = abnormal.goh_matrix(F)
    r = args.rank if args.rank is not None else _certify_rank(F, goh)
    gens = abnormal.abnormal_generators(F, r, goh)
    lines = [f"kernel generators at rank {r} ({len(gens)} index sets)"]
    for g in gens:
        lines.extend("  " + line for line in _generator_lines(g))
    return lines, {"rank": r, "generators": [_generator_json(g) for g in gens]}, None


def cmd_certify(F: Frame, args):
    goh = abnormal.goh_matrix(F)
    r = args.rank if args.rank is not None else _certify_rank(F, goh)
    gens = abnormal.abnormal_generators(F, r, goh)
    lines = [f"divergence certificates at rank {r}"]
    results = []
    for g in gens:
        try:
            cert = abnormal.divergence_certificate(g, F, goh)
        except abnormal.CertificateError as exc:
            raise CertificateFailure(
                f"certificate failed for I={_index_set_to_str(g.I)}: {exc}",
                {"I": list(g.I), "residual": str(exc.residual)},
            ) from exc
        entry = {
            "I": list(g.I),
            "phase_divergence": str(cert.phase_divergence),
            "jacobi_expansion": str(cert.jacobi_expansion),
            "bracket_order": cert.bracket_order,
        }
        line = (f"  I={_index_set_to_str(g.I)}: div(Y) = {cert.phase_divergence}, "
                f"jacobi sum = {cert.jacobi_expansion}")
        if cert.base_constant is not None:
            entry["base_constant"] = str(cert.base_constant)
            entry["base_coefficients"] = [str(c) for c in cert.base_coefficients]
            entry["base_residual"] = str(cert.base_residual)
            line += f", base constant = {cert.base_constant}"
        results.append(entry)
        lines.append(line)
    lines.append(f"all {len(gens)} certificates valid")
    return lines, {"rank": r, "certificates": results}, None


def cmd_singular_set(F: Frame, args):
    goh = abnormal.goh_matrix(F)
    if args.rank is not None:
        r = args.rank
    else:
        # the locus equations live at the full generic rank, even when m is
        # too small to admit generators there
        matrix = goh.reduced if goh.reduced is not None else goh.H
        r = skew_rank(matrix)
    if r == 0:
        return ["rank 0: the singular-set equations are empty"], {"rank": 0, "equations": []}, None
    eqs = abnormal.singular_set_equations(F, r, goh)
    lines = [f"singular-set equations at rank {r} (common zero set of:)"]
    payload = []
    for I, q in zip(index_sets(F.m, r), eqs):
        lines.append(f"  phi{_index_set_to_str(I)} = {q}")
        payload.append({"I": list(I), "phi": str(q)})
    return lines, {"rank": r, "equations": payload}, None


def cmd_stratify(F: Frame, args):
    box = _parse_box(args.box)
    config = abnormal.SamplerConfig(seed=args.seed, count=args.samples,
                                    box=(Fraction(box[0]).limit_denominator(10 ** 6),
                                         Fraction(box[1]).limit_denominator(10 ** 6)),
                                    tolerance=args.tolerance)
    S = abnormal.stratify(F, config)
    lines = [f"kernel-dimension levels: {{{', '.join(str(d) for d in S.dims)}}} "
             f"(seed={args.seed}, samples={args.samples})"]
    payload = {"dims": list(S.dims), "levels": []}
    for st in S.strata:
        kind = "open stratum" if st.has_interior else "locus level"
        lines.append(f"  dim {st.dim} (rank {st.rank}, {kind}): {st.sample_count} samples, "
                     f"parity/bound {'ok' if st.parity_ok else 'violated'}")
        for w in st.witnesses[:2]:
            xs = ", ".join(str(v) for v in w.x)
            lines.append(f"    witness x = ({xs})")
        entry = {
            "dim": st.dim, "rank": st.rank, "has_interior": st.has_interior,
            "samples": st.sample_count, "parity_ok": st.parity_ok,
            "witnesses": [{"x": [str(v) for v in w.x], "p": [str(v) for v in w.p],
                           "exact": w.exact} for w in st.witnesses],
            "vanishing_locus": [str(q) for q in st.vanishing_locus],
        }
        payload["levels"].append(entry)
    if S.unconfirmed:
        lines.append(f"  unconfirmed float candidates: {len(S.unconfirmed)}")
        payload["unconfirmed"] = [list(x) for x in S.unconfirmed]
    return lines, payload, args.seed


def cmd_normalform(F: Frame, args):
    from singfol.normalform import JetFrame, normalize_frame

    JF = JetFrame.from_frame(F, args.order)
    N = normalize_frame(JF)
    lines = [f"normal form at jet order {args.order} (stage {N.stage})"]
    for k in range(1, F.m + 1):
        lines.append(f"  X{k} = {N.field(k)}")
    chart = [[str(v) for v in row] for row in N.chart]
    lines.append("chart matrix (original x = M . new x):")
    for row in chart:
        lines.append("  [" + ", ".join(row) + "]")
    payload = {"order": args.order, "fields": [[str(c.body) for c in row] for row in N.components],
               "chart": chart}
    return lines, payload, None


def _pick_generator(F: Frame, args, goh):
    r = args.rank if args.rank is not None else _certify_rank(F, goh)
    gens = abnormal.abnormal_generators(F, r, goh)
    if args.field:
        wanted = tuple(sorted(int(v) for v in args.field.split(",")))
        for g in gens:
            if g.I == wanted:
                return g, r
        raise InputError(f"no generator with I={_index_set_to_str(wanted)} at rank {r}")
    return gens[0], r


def cmd_integrate(F: Frame, args):
    if F.normal_form is None:
        raise InputError("integrate needs a corank-1 frame")
    goh = abnormal.goh_matrix(F)
    g, r = _pick_generator(F, args, goh)
    x0 = [float(v) for v in args.start.split(",")]
    if len(x0) != F.n:
        raise InputError(f"--from needs {F.n} coordinates")
    try:
        traj = dynamics.abnormal_trajectory(F, g, x0, args.T, args.h, args.tolerance)
    except dynamics.BlowUpError as exc:
        raise InputError(str(exc)) from exc
    csv = traj.to_csv(seed=None)
    if not traj.certified:
        raise CertificateFailure(
            f"trajectory residuals exceed tolerance {args.tolerance}",
            {"violations": traj.violations()[:8]},
        )
    payload = {
        "I": list(g.I), "rank": r, "T": args.T, "h": args.h,
        "end_state": [float(v) for v in traj.states[-1]],
        "max_goh_residual": float(traj.goh_residuals.max()),
        "max_annihilation_residual": float(traj.annihilation_residuals.max()),
        "certified": traj.certified,
    }
    return csv.rstrip("\n").split("\n"), payload, None


def cmd_scan_div(F: Frame, args):
    if F.normal_form is None:
        raise InputError("scan-div needs a corank-1 frame")
    goh = abnormal.goh_matrix(F)
    g, r = _pick_generator(F, args, goh)
    box = _parse_box(args.box)
    scan = dynamics.divergence_ratio_scan(g.Z, box, args.samples, args.seed, args.cutoff)
    lines = [
        f"divergence ratio scan for Z_{_index_set_to_str(g.I)} on [{box[0]}, {box[1]}]^{F.n}",
        f"  samples={scan.samples} seed={scan.seed} cutoff={scan.cutoff}",
        f"  ratio_sup (estimate) = {scan.ratio_sup!r}",
        f"  skipped (|Z| below cutoff) = {scan.skipped}, near-cutoff offenders = {len(scan.offenders)}",
    ]
    payload = {
        "I": list(g.I), "ratio_sup": scan.ratio_sup, "skipped": scan.skipped,
        "offenders": [list(x) for x in scan.offenders],
        "argmax": list(scan.argmax) if scan.argmax else None,
        "div": str(divergence(g.Z)),
    }
    return lines, payload, args.seed


def cmd_bracket_check(F: Frame, args):
    x = [Fraction(v).limit_denominator(10 ** 6) for v in (args.at.split(",") if args.at else ["0"] * F.n)]
    if len(x) != F.n:
        raise InputError(f"--at needs {F.n} coordinates")
    depth = F.bracket_generation_depth(x, args.depth)
    if depth is None:
        lines = [f"brackets up to depth {args.depth} do NOT span at the point (diagnostic only)"]
    else:
        lines = [f"brackets span the tangent space at depth {depth} (diagnostic only)"]
    return lines, {"depth": depth, "max_depth": args.depth}, None


def _parse_box(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"--box expects LO,HI: {exc}") from exc
    if not lo < hi:
        raise InputError("--box needs LO < HI")
    return lo, hi


def _add_frame_arg(sub):
    sub.add_argument("--frame", help="frame JSON file ('-' or omitted: stdin)")
    sub.add_argument("--json", action="store_true", help="machine-readable report")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); exit 2 is reserved for
    # certificate failures
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let values like "-0.5,0.5" (box bounds, start points) pass as
        # arguments instead of being mistaken for option strings
        self._negative_number_matcher = re.compile(r"^-\d+(\.\d+)?(,-?\d+(\.\d+)?)*$")

    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="singfol",
        description="Exact Goh/Pfaffian computations for polynomial frames",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    demo = subs.add_parser("demo", help="emit a built-in frame document")
    demo.add_argument("name", choices=demo_names())
    demo.add_argument("--json", action="store_true")

    goh = subs.add_parser("goh", help="print the Goh matrix H and its reduced form")
    _add_frame_arg(goh)

    pf = subs.add_parser("pfaffian", help="print Pfaffian minors of a given order")
    pf.add_argument("--minors", type=int, required=True)
    _add_frame_arg(pf)

    gen = subs.add_parser("generators", help="print kernel generators Y_I / Z_I")
    gen.add_argument("--rank", type=int, default=None)
    _add_frame_arg(gen)

    cert = subs.add_parser("certify", help="divergence certificates (exit 2 on failure)")
    cert.add_argument("--rank", type=int, default=None)
    _add_frame_arg(cert)

    sing = subs.add_parser("singular-set", help="reduced minors cutting the singular set")
    sing.add_argument("--rank", type=int, default=None)
    _add_frame_arg(sing)

    strat = subs.add_parser("stratify", help="sampled kernel-dimension levels")
    strat.add_argument("--samples", type=int, default=256)
    strat.add_argument("--seed", type=int, required=True)
    strat.add_argument("--box", default="-1,1")
    strat.add_argument("--tolerance", type=float, default=1e-8)
    _add_frame_arg(strat)

    nf = subs.add_parser("normalform", help="jet-level frame normal form")
    nf.add_argument("--order", type=int, default=3)
    _add_frame_arg(nf)

    integ = subs.add_parser("integrate", help="certified trajectory of a generator (CSV)")
    integ.add_argument("--field", help="index set of the generator, e.g. 1,2,3")
    integ.add_argument("--rank", type=int, default=None)
    integ.add_argument("--from", dest="start", required=True, help="start point x0, comma separated")
    integ.add_argument("--T", type=float, required=True)
    integ.add_argument("--h", type=float, required=True)
    integ.add_argument("--tolerance", type=float, default=1e-10)
    _add_frame_arg(integ)

    scan = subs.add_parser("scan-div", help="empirical |div Z| / |Z| ratio over a box")
    scan.add_argument("--field", help="index set of the generator, e.g. 1,2,3")
    scan.add_argument("--rank", type=int, default=None)
    scan.add_argument("--samples", type=int, default=256)
    scan.add_argument("--seed", type=int, required=True)
    scan.add_argument("--cutoff", type=float, default=1e-3)
    scan.add_argument("--box", default="-1,1")
    _add_frame_arg(scan)

    br = subs.add_parser("bracket-check", help="bounded bracket-generation diagnostic")
    br.add_argument("--depth", type=int, default=4)
    br.add_argument("--at", help="base point, comma separated (default origin)")
    _add_frame_arg(br)

    return parser


_HANDLERS = {
    "goh": cmd_goh,
    "pfaffian": cmd_pfaffian,
    "generators": cmd_generators,
    "certify": cmd_certify,
    "singular-set": cmd_singular_set,
    "stratify": cmd_stratify,
    "normalform": cmd_normalform,
    "integrate": cmd_integrate,
    "scan-div": cmd_scan_div,
    "bracket-check": cmd_bracket_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    as_json = getattr(args, "json", False)

    if args.command == "demo":
        spec = DEMOS[args.name].to_spec()
        print(json.dumps(spec, indent=None if as_json else 2, sort_keys=True))
        return EXIT_OK

    try:
        spec = _load_frame_spec(args.frame)
        frame = build_frame(spec)
        lines, results, seed = _HANDLERS[args.command](frame, args)
    except (InputError, abnormal.AnnihilatorError, abnormal.NormalFormError,
            abnormal.SamplingError) as exc:
        if as_json:
            print(json.dumps({"command": args.command, "error": str(exc)}, sort_keys=True))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificateFailure as exc:
        if as_json:
            print(json.dumps({"command": args.command, "error": str(exc),
                              "detail": exc.payload}, sort_keys=True))
        else:
            print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE

    if as_json:
        report = {
            "command": args.command,
            "inputs": {k: v for k, v in spec.items() if k != "description"},
            "results": results,
            "calibration": _calibration(frame),
            "seed": seed,
        }
        print(json.dumps(report, sort_keys=True))
    else:
        if frame.name:
            print(f"# frame: {frame.name}")
        for line in lines:
            print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
