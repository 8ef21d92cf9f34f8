"""linkspec command-line front end.

Every subcommand reads exact rationals as "p/q", prints a human-readable
report by default and a machine-readable one under --json, and emits tables
as CSV/JSON with a schema version.  Exit codes: 0 ok, 2 validation or parse
failure, 3 numeric non-convergence, 4 I/O failure.  Runs are deterministic
for a fixed --seed; LINKSPEC_THREADS caps table parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .hamiltonian import (
    HamiltonianError,
    ResolutionError,
    ham_from_dict,
    hofer_norm,
    integrate,
    integrate_exact,
    parse_twist_expr,
    twist_truncations,
)
from .homology import DiscClass, class_invariants, check_monotonicity_identity, riemann_hurwitz
from .potential import build_potential, find_critical_points
from .quasimorphism import (
    defect_bound,
    homogenize,
    independence_witness,
    quasicalabi_check,
    scl_lower_bound,
)
from .rationals import format_fraction, parse_fraction
from .spectral import bound, calabi_property_table, zeta_divergence_table
from .surface_link import (
    LinkError,
    build_equidistributed_sequence,
    build_parallel_link,
    check_monotone,
    link_from_dict,
    link_to_dict,
    validate_link,
)
from .tables import Table, emit

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise LinkError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


class IOFailure(Exception):
    pass


def _load_link(path: str):
    return link_from_dict(_load_json(path))


def _load_ham(path: str):
    return ham_from_dict(_load_json(path))


def _parse_range(text: str, step: int = 1) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        values = list(range(int(lo), int(hi) + 1, step))
        if not values:
            raise LinkError(f"empty range {text!r}")
        return values
    return [int(text)]


def _print(args, human: str, payload: dict) -> None:
    if args.json:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(human + "\n")


def _emit_table(args, table: Table) -> None:
    wrote = False
    if getattr(args, "csv", None):
        emit(table, "csv", args.csv)
        wrote = True
    if getattr(args, "json_out", None):
        emit(table, "json", args.json_out)
        wrote = True
    if not wrote:
        sys.stdout.write(emit(table, "json" if args.json else "csv"))


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    link = _load_link(args.link)
    report = validate_link(link)
    lines = [f"link: g={link.surface.genus} k={link.k} s={link.s}"]
    lines += [f"VIOLATION: {v}" for v in report.violations]
    lines += [f"warning: {w}" for w in report.warnings]
    lines.append("valid" if report.ok else "invalid")
    _print(args, "\n".join(lines), {
        "valid": report.ok,
        "violations": list(report.violations),
        "warnings": list(report.warnings),
    })
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_monotone(args) -> int:
    link = _load_link(args.link)
    rep = check_monotone(link, parse_fraction(args.eta))
    vals = ", ".join(format_fraction(v) for v in rep.values)
    human = (
        f"values 2*eta*(k_j-1)+A_j: {vals}\n"
        + (f"monotone, lambda = {format_fraction(rep.lam)}" if rep.is_monotone else "not monotone")
    )
    _print(args, human, {
        "eta": format_fraction(rep.eta),
        "values": [format_fraction(v) for v in rep.values],
        "is_monotone": rep.is_monotone,
        "lambda": format_fraction(rep.lam) if rep.lam is not None else None,
    })
    return EXIT_OK


def cmd_parallel(args) -> int:
    link = build_parallel_link(args.k, parse_fraction(args.eta))
    data = link_to_dict(link)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _print(args, f"wrote {args.out}", {"written": args.out})
    else:
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_equidist(args) -> int:
    eta = parse_fraction(args.eta) if args.eta is not None else Fraction(0)
    links = build_equidistributed_sequence(args.m, eta_rule=lambda m: eta, m_min=args.m)
    data = link_to_dict(links[0])
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _print(args, f"wrote {args.out}", {"written": args.out})
    else:
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_class(args) -> int:
    link = _load_link(args.link)
    coeffs = tuple(int(c) for c in args.coeffs.split(","))
    cls = DiscClass(link, coeffs)
    inv = class_invariants(link, cls)
    payload = {
        "maslov": inv.maslov,
        "area": format_fraction(inv.area),
        "delta": inv.delta,
        "divisor_intersections": list(inv.divisor_intersections),
    }
    lines = [
        f"maslov = {inv.maslov}",
        f"area = {format_fraction(inv.area)}",
        f"delta = {inv.delta}",
        f"divisor intersections = {list(inv.divisor_intersections)}",
    ]
    if all(c >= 0 for c in coeffs):
        cover = riemann_hurwitz(link, cls)
        payload["chi"] = cover.chi
        payload["dimension_identity_holds"] = cover.identity_holds
        lines.append(f"cover chi = {cover.chi}, branch points = {cover.branch_points}")
        lines.append(f"dimension identity holds: {cover.identity_holds}")
    if args.eta is not None:
        ok = check_monotonicity_identity(link, parse_fraction(args.eta), cls)
        payload["monotonicity_identity_holds"] = ok
        lines.append(f"monotonicity identity holds: {ok}")
    _print(args, "\n".join(lines), payload)
    return EXIT_OK


def cmd_potential(args) -> int:
    link = _load_link(args.link)
    W = build_potential(link, eta=parse_fraction(args.eta) if args.eta is not None else None)
    terms = []
    for m in W.monomials:
        mono = "*".join(
            f"{v}^{e}" if e != 1 else v for v, e in zip(W.variables, m.exponents) if e != 0
        ) or "1"
        if m.area_exponent:
            mono = f"T^({format_fraction(m.area_exponent)}) {mono}"
        terms.append(mono)
    _print(args, "W = " + " + ".join(terms), W.to_dict())
    return EXIT_OK


def cmd_crit(args) -> int:
    link = _load_link(args.link)
    W = build_potential(link)
    search = find_critical_points(W, seed=args.seed)
    lines = [f"{len(search)} critical points ({search.n_failed}/{search.n_starts} starts failed)"]
    pts = []
    for p in search:
        coords = ", ".join(f"{c.real:+.9f}{c.imag:+.9f}j" for c in p.coords)
        kind = "non-degenerate" if p.non_degenerate else "degenerate"
        lines.append(f"  ({coords})  |det H| = {abs(p.hessian_det):.6g}  {kind}")
        pts.append({
            "coords": [[c.real, c.imag] for c in p.coords],
            "residual": p.residual,
            "hessian_det": [p.hessian_det.real, p.hessian_det.imag],
            "non_degenerate": p.non_degenerate,
        })
    _print(args, "\n".join(lines), {"critical_points": pts, "failed_starts": search.n_failed})
    return EXIT_OK


def cmd_calabi(args) -> int:
    H = _load_ham(args.ham)
    val = integrate(H)
    exact = integrate_exact(H)
    human = f"Cal = {val:.12g}" + (f" (= {format_fraction(exact)})" if exact is not None else "")
    _print(args, human, {"calabi": val, "exact": format_fraction(exact) if exact is not None else None})
    return EXIT_OK


def cmd_hofer(args) -> int:
    H = _load_ham(args.ham)
    val = hofer_norm(H)
    _print(args, f"hofer norm = {val:.12g}", {"hofer_norm": val})
    return EXIT_OK


def cmd_twist(args) -> int:
    profile = parse_twist_expr(args.f, R=args.radius)
    fams = twist_truncations(profile, args.levels)
    rows = []
    for i, F in enumerate(fams, start=1):
        rows.append([i, F.truncation_level, integrate(F)])
    table = Table(columns=["i", "level", "calabi"], rows=rows, name="twist-truncations")
    _emit_table(args, table)
    return EXIT_OK


def cmd_bound(args) -> int:
    H = _load_ham(args.ham)
    link = _load_link(args.link)
    eta = parse_fraction(args.eta) if args.eta is not None else None
    b = bound(H, link, eta=eta)
    lines = [f"c_L(H) in [{b.lower:.12g}, {b.upper:.12g}]  (width {b.width:.3g})"]
    if b.exact:
        lines.append(f"exact: [{format_fraction(b.exact_lower)}, {format_fraction(b.exact_upper)}]")
    for step in b.derivation:
        lines.append(f"  via {step.axiom}: {step.detail}")
    _print(args, "\n".join(lines), {
        "lower": b.lower,
        "upper": b.upper,
        "exact_lower": format_fraction(b.exact_lower) if b.exact_lower is not None else None,
        "exact_upper": format_fraction(b.exact_upper) if b.exact_upper is not None else None,
        "derivation": [{"axiom": s.axiom, "detail": s.detail} for s in b.derivation],
    })
    return EXIT_OK


def cmd_calabi_table(args) -> int:
    H = _load_ham(args.ham)
    ms = _parse_range(args.m, args.step)
    eta = parse_fraction(args.eta) if args.eta is not None else Fraction(0)
    links = [
        build_equidistributed_sequence(m, eta_rule=lambda _m: eta, m_min=m)[0] for m in ms
    ]
    conv = calabi_property_table(H, links)
    table = Table(columns=conv.columns(), rows=conv.as_rows(), name="calabi-convergence")
    _emit_table(args, table)
    return EXIT_OK


def cmd_zeta(args) -> int:
    profile = parse_twist_expr(args.f, R=args.radius)
    ms = _parse_range(args.m, args.step)
    links = [build_parallel_link(m, 0) for m in ms]
    base = build_parallel_link(1, 0)
    zt = zeta_divergence_table(profile, links, base, count=args.levels)
    table = Table(columns=zt.columns(), rows=zt.as_rows(), name="zeta-divergence")
    _emit_table(args, table)
    return EXIT_OK


def cmd_defect(args) -> int:
    d = defect_bound(args.k, parse_fraction(args.eta))
    human = (
        f"k={d.k} eta={format_fraction(d.eta)} lambda={format_fraction(d.lam)} "
        f"defect={format_fraction(d.defect)}"
    )
    _print(args, human, {
        "k": d.k,
        "eta": format_fraction(d.eta),
        "lambda": format_fraction(d.lam),
        "defect": format_fraction(d.defect),
    })
    return EXIT_OK


def cmd_mu(args) -> int:
    H = _load_ham(args.ham)
    link = _load_link(args.link)
    q = homogenize(H, link, args.n, eta=parse_fraction(args.eta) if args.eta else None)
    human = (
        f"mu in [{q.lower:.12g}, {q.upper:.12g}]  "
        f"(c-bound [{q.c_lower:.12g}, {q.c_upper:.12g}], error <= {q.error_bound:.3g}, n={q.n_used})"
    )
    _print(args, human, {
        "mu_lower": q.lower,
        "mu_upper": q.upper,
        "c_lower": q.c_lower,
        "c_upper": q.c_upper,
        "n": q.n_used,
        "error_bound": q.error_bound,
    })
    return EXIT_OK


def cmd_scl(args) -> int:
    ns = _parse_range(args.n)
    # the band family is defined from n = 2 on
    st = scl_lower_bound(max(ns), n_min=max(2, min(ns)))
    table = Table(columns=st.columns(), rows=st.as_rows(), name="scl-lower-bounds")
    _emit_table(args, table)
    return EXIT_OK


def cmd_independence(args) -> int:
    config = _load_json(args.config)
    try:
        pairs = [(int(k), parse_fraction(eta)) for k, eta in config["pairs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise LinkError(f"malformed independence config (field 'pairs'): {exc}") from exc
    res = independence_witness(pairs)
    lines = ["evaluation matrix:"]
    for row in res.matrix:
        lines.append("  [" + ", ".join(format_fraction(v) for v in row) + "]")
    lines.append(f"unit triangular: {res.is_unit_triangular}")
    _print(args, "\n".join(lines), {
        "levels": [format_fraction(z) for z in res.levels],
        "matrix": [[format_fraction(v) for v in row] for row in res.matrix],
        "unit_triangular": res.is_unit_triangular,
    })
    return EXIT_OK if res.is_unit_triangular else EXIT_NUMERIC


def cmd_quasicalabi(args) -> int:
    H = _load_ham(args.ham)
    ks = _parse_range(args.k, args.step)
    qt = quasicalabi_check(H, ks)
    table = Table(columns=qt.columns(), rows=qt.as_rows(), name="quasicalabi")
    _emit_table(args, table)
    return EXIT_OK


def cmd_scenario(args) -> int:
    spec = _load_json(args.scenario)
    try:
        kind = spec["kind"]
        inputs = spec.get("inputs", {})
        outputs = spec.get("outputs", [])
    except (KeyError, TypeError) as exc:
        raise LinkError(f"malformed scenario: {exc}") from exc

    ns = argparse.Namespace(json=args.json, csv=None, json_out=None, seed=args.seed)
    for key, val in inputs.items():
        setattr(ns, key.replace("-", "_"), val)
    handlers = {
        "calabi-convergence": cmd_calabi_table,
        "zeta": cmd_zeta,
        "crit": cmd_crit,
        "scl": cmd_scl,
        "quasicalabi": cmd_quasicalabi,
        "twist": cmd_twist,
    }
    if kind not in handlers:
        raise LinkError(f"unknown scenario kind {kind!r}")
    defaults = {
        "calabi-convergence": {"step": 10, "eta": None},
        "zeta": {"step": 5, "radius": 0.35, "levels": 12},
        "crit": {},
        "scl": {},
        "quasicalabi": {"step": 1},
        "twist": {"radius": 1.0, "levels": 20},
    }
    for key, val in defaults[kind].items():
        if not hasattr(ns, key):
            setattr(ns, key, val)
    for out in outputs:
        if out.get("format") == "csv":
            ns.csv = out["path"]
        elif out.get("format") == "json":
            ns.json_out = out["path"]
        else:
            raise LinkError(f"unknown output format {out.get('format')!r}")
    return handlers[kind](ns)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkspec",
        description="Quantitative invariants of Lagrangian links on surfaces.",
    )
    parser.add_argument("--version", action="version", version=f"linkspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--seed", type=int, default=0, help="RNG seed for solver starts")
        return p

    p = add("validate", cmd_validate, "check the structural invariants of a link file")
    p.add_argument("link")

    p = add("monotone", cmd_monotone, "evaluate the monotonicity values and lambda")
    p.add_argument("link")
    p.add_argument("--eta", required=True)

    p = add("parallel", cmd_parallel, "build the k parallel-circle monotone link")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--eta", default="0")
    p.add_argument("-o", "--out")

    p = add("equidist", cmd_equidist, "build the m-disc equidistributed link")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--eta", default=None)
    p.add_argument("-o", "--out")

    p = add("class", cmd_class, "invariants of a disc class c1,...,cs")
    p.add_argument("link")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--eta", default=None)

    p = add("potential", cmd_potential, "print the disc potential monomials")
    p.add_argument("link")
    p.add_argument("--eta", default=None)

    p = add("crit", cmd_crit, "find critical points of the disc potential")
    p.add_argument("link")

    p = add("calabi", cmd_calabi, "Calabi integral of a Hamiltonian")
    p.add_argument("ham")

    p = add("hofer", cmd_hofer, "Hofer norm of a Hamiltonian")
    p.add_argument("ham")

    p = add("twist", cmd_twist, "truncation family of an infinite twist")
    p.add_argument("--f", required=True, help="profile, e.g. r^-4")
    p.add_argument("--levels", type=int, default=20)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--csv")
    p.add_argument("--json-out")

    p = add("bound", cmd_bound, "certified interval for c_L(H)")
    p.add_argument("ham")
    p.add_argument("link")
    p.add_argument("--eta", default=None)

    p = add("calabi-table", cmd_calabi_table, "Calabi-property convergence table")
    p.add_argument("ham")
    p.add_argument("-m", required=True, help="range, e.g. 10..100")
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--eta", default=None)
    p.add_argument("--csv")
    p.add_argument("--json-out")

    p = add("zeta", cmd_zeta, "infinite-twist divergence table")
    p.add_argument("--f", required=True)
    p.add_argument("-m", required=True, help="range of link sizes, e.g. 5..50")
    p.add_argument("--step", type=int, default=5)
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--radius", type=float, default=0.35)
    p.add_argument("--csv")
    p.add_argument("--json-out")

    p = add("defect", cmd_defect, "defect bound 2(k+1)lambda/k")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--eta", default="0")

    p = add("mu", cmd_mu, "homogenized invariant interval")
    p.add_argument("ham")
    p.add_argument("link")
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--eta", default=None)

    p = add("scl", cmd_scl, "stable-commutator-length lower-bound table")
    p.add_argument("-n", required=True, help="range, e.g. 2..20")

    p = add("independence", cmd_independence, "linear-independence witness matrix")
    p.add_argument("config")

    p = add("quasicalabi", cmd_quasicalabi, "vanishing-limit table for mu_{k,eta}")
    p.add_argument("ham")
    p.add_argument("-k", required=True, help="range, e.g. 2..100")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--json-out")

    p = add("scenario", cmd_scenario, "run a named scenario file")
    p.add_argument("scenario")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ResolutionError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LinkError, HamiltonianError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
