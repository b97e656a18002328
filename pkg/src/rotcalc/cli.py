"""Command-line interface: ``rotcalc <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on domain errors, which
are printed to stderr as ``ERROR:<Name>:<message>``.
"""

import argparse
import os
import sys
from importlib import resources

import mpmath

from . import __version__
from .arith import ceil_rat, floor_rat, format_rat, parse_rat
from .emit import graph_svg, orbit_csv
from .errors import IoError, NotAMember, ParseError, RationalFormatError, RotcalcError
from .groups import (
    IntervalMap,
    approximate,
    bieri_strebel,
    parse_group,
    stein_decompose,
    validate_membership,
)
from .invariant import DEFAULT_PRECISION, balance_residual, verify_exp_conjugacy
from .lang import (
    MapEnvironment,
    _read,
    eval_word,
    load_environment,
    load_map_file,
    parse_map,
    parse_word,
    serialize_map,
)
from .rotation import (
    defect_scan,
    defect_witness_pair,
    rot_cf,
    rot_decimal,
    rot_enclosure,
    rot_rational,
    _render,
    scl,
)

ENCLOSURE_DIGITS = 15


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _rat(text):
    try:
        return parse_rat(text)
    except RationalFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rat_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two rationals 'a,b', got {text!r}")
    return tuple(_rat(p.strip()) for p in parts)


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _read_pairs(path):
    """Whitespace-separated ``x y`` rational pairs, one per line; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(_read(path).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'x y'")
        try:
            rows.append((parse_rat(fields[0]), parse_rat(fields[1])))
        except RationalFormatError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return rows


def _read_measures(path):
    """Lines ``lo hi mass`` with exact ``lo``, ``hi`` and a decimal ``mass``."""
    out = []
    for lineno, line in enumerate(_read(path).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'lo hi mass'")
        try:
            lo, hi = parse_rat(fields[0]), parse_rat(fields[1])
        except RationalFormatError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        try:
            mpmath.mpf(fields[2])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad mass {fields[2]!r}") from None
        out.append(((lo, hi), fields[2]))
    return out


# -- shared input handling ----------------------------------------------------


def _add_map_input(p, word=True):
    p.add_argument("-e", "--map", metavar="FILE", help="map file (JSON)")
    if word:
        p.add_argument("-w", "--word", metavar="WORD",
                       help="word to evaluate; with -e the file map is bound to the name 'f'")
        p.add_argument("--env", metavar="FILE", help="environment file binding names to maps")
        p.add_argument("--unchecked", action="store_true",
                       help="skip membership checks when loading --env")


def _add_group(p, required=False):
    p.add_argument("--group", metavar="DESC", required=required,
                   help='group descriptor such as "T(l=1; gens=2,3)"')


def _environment(args):
    env = MapEnvironment()
    if getattr(args, "env", None):
        env = load_environment(args.env, unchecked=args.unchecked)
    if getattr(args, "group", None):
        env.group = parse_group(args.group)
    return env


def _load_map(path):
    """Load a map file; a missing path naming a bundled fixture loads the fixture."""
    if not os.path.exists(path):
        bundled = resources.files("rotcalc") / "data" / os.path.basename(path)
        if bundled.is_file():
            return parse_map(bundled.read_text(encoding="utf-8"))
    return load_map_file(path)


def _target_map(args, parser):
    env = _environment(args)
    word = getattr(args, "word", None)
    if args.map and not word:
        return _load_map(args.map), env
    if not word:
        parser.error("give a map with -e FILE or -w WORD")
    if args.map:
        env.bindings["f"] = _load_map(args.map)
    return eval_word(parse_word(word), env), env


def _group_of(args, env, parser):
    if env.group is None:
        parser.error("a group is required (--group, or a group in --env)")
    return env.group


def _out(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"{path}: {exc.strerror}") from exc


def _knots_text(g):
    return "".join(f"{format_rat(x)} {format_rat(y)}\n" for x, y in g.knots)


# -- subcommands --------------------------------------------------------------


def cmd_validate(args, parser):
    env = _environment(args)
    group = _group_of(args, env, parser)
    if args.knots:
        f = IntervalMap(_read_pairs(args.knots))
    else:
        f, _ = _target_map(args, parser)
    report = validate_membership(f, group)
    print("\n".join(report.lines()))
    if not report.ok:
        failed = ", ".join(k for k, v in report.checks.items() if not v)
        raise NotAMember(f"not in {group}: {failed}")


def cmd_rot(args, parser):
    F, _ = _target_map(args, parser)
    if args.mode == "enclosure":
        enc = rot_enclosure(F, args.n)
        if args.exact:
            print(enc)
        else:
            # outward rounding keeps the printed interval certified
            lo = _render(floor_rat(enc.lo * 10**ENCLOSURE_DIGITS), ENCLOSURE_DIGITS)
            hi = _render(ceil_rat(enc.hi * 10**ENCLOSURE_DIGITS), ENCLOSURE_DIGITS)
            print(f"[{lo}, {hi}] (n={enc.effort})")
    elif args.mode == "rational":
        result = rot_rational(F, args.qmax)
        print(result if result is not None else f"none (no rotation number with q <= {args.qmax})")
    elif args.mode == "cf":
        cf = rot_cf(F, args.depth)
        print(f"{cf} (exact)" if cf.exact else cf)
        print("convergents: " + ", ".join(format_rat(c) for c in cf.convergents))
    else:
        print(rot_decimal(F, args.digits))


def cmd_scl(args, parser):
    F, env = _target_map(args, parser)
    group = _group_of(args, env, parser)
    result = scl(F, group, digits=args.digits, q_max=args.qmax, n=args.n)
    print(result.text if args.digits is not None else result)


def cmd_eval(args, parser):
    F, _ = _target_map(args, parser)
    _out(serialize_map(F) + "\n", args.output)


def cmd_bieri_strebel(args, parser):
    group = parse_group(args.group)
    (a, c), (a2, c2) = args.source, args.target
    _out(_knots_text(bieri_strebel(group, a, c, a2, c2)), args.output)


def cmd_decompose(args, parser):
    F, env = _target_map(args, parser)
    group = _group_of(args, env, parser)
    fac = stein_decompose(F, group, window=args.window)
    lo1, hi1 = fac.fixed_arc_g1
    lo2, hi2 = fac.fixed_arc_g2
    print(f"g1\t{serialize_map(fac.g1)}")
    print(f"g2\t{serialize_map(fac.g2)}")
    print(f"fixed_arc_g1\t[{format_rat(lo1)}, {format_rat(hi1)}]\tshift {fac.g1_shift}")
    print(f"fixed_arc_g2\t[{format_rat(lo2)}, {format_rat(hi2)}]")


def cmd_approximate(args, parser):
    group = parse_group(args.group)
    g = approximate(_read_pairs(args.samples), args.eps, group, uniform=args.uniform)
    _out(serialize_map(g) + "\n", args.output)


def cmd_defect_scan(args, parser):
    group = parse_group(args.group)
    report = defect_scan(group, args.trials, args.seed, args.n,
                         complexity=args.complexity, workers=args.workers)
    print("\n".join(report.lines()))


def cmd_witness(args, parser):
    f, g = defect_witness_pair(parse_group(args.group))
    print(f"f\t{serialize_map(f)}")
    print(f"g\t{serialize_map(g)}")
    print("rot([f, g])\t1 (exact)")


def cmd_balance(args, parser):
    F, _ = _target_map(args, parser)
    r = balance_residual(F, _read_measures(args.measures), precision=args.prec)
    with mpmath.workprec(args.prec):
        print(mpmath.nstr(r, 15))


def cmd_conjugacy_check(args, parser):
    F, _ = _target_map(args, parser)
    r = verify_exp_conjugacy(F, args.base, args.beta, args.gamma, args.rho,
                             grid=args.grid, precision=args.prec)
    with mpmath.workprec(args.prec):
        print(mpmath.nstr(r, 6))


def cmd_plot(args, parser):
    F, _ = _target_map(args, parser)
    _out(graph_svg(F), args.output)


def cmd_orbit(args, parser):
    F, _ = _target_map(args, parser)
    _out(orbit_csv(F, args.x0, args.n), args.output)


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = _ArgParser(prog="rotcalc", allow_abbrev=False,
                        description="Exact PL circle maps, certified rotation numbers and scl.")
    parser.add_argument("--version", action="version", version=f"rotcalc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, func, help_text, aliases=()):
        p = sub.add_parser(name, help=help_text, description=help_text,
                           aliases=list(aliases), allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check membership of a map in a group")
    _add_map_input(p)
    _add_group(p)
    p.add_argument("--knots", metavar="FILE", help="interval map as 'x y' knot lines (for F groups)")

    p = add("rot", cmd_rot, "rotation number: enclosure, exact rational, continued fraction or decimal")
    _add_map_input(p)
    p.add_argument("--mode", choices=("enclosure", "rational", "cf", "decimal"), default="decimal")
    p.add_argument("--n", type=_positive_int, default=1024, help="iterate count for enclosure (default 1024)")
    p.add_argument("--qmax", type=_positive_int, default=64, help="largest denominator tried by rational")
    p.add_argument("--depth", type=_positive_int, default=10, help="number of cf terms")
    p.add_argument("--digits", type=_positive_int, default=9, help="decimal places for decimal mode")
    p.add_argument("--exact", action="store_true", help="print enclosure endpoints as exact rationals")

    p = add("scl", cmd_scl, "stable commutator length rot/2 of a group element")
    _add_map_input(p)
    _add_group(p)
    p.add_argument("--digits", type=_positive_int, help="certified decimal places")
    p.add_argument("--qmax", type=_positive_int, default=64, help="largest denominator for an exact answer")
    p.add_argument("--n", type=_positive_int, default=1024, help="iterate count for the fallback enclosure")

    p = add("compose", cmd_eval, "evaluate a word and print the resulting map", aliases=("eval",))
    _add_map_input(p)
    _add_group(p)
    p.add_argument("-o", "--output", metavar="FILE", help="write the map here instead of stdout")

    p = add("bieri-strebel", cmd_bieri_strebel, "PL map [a,c] -> [a2,c2] with breaks in A and slopes in P")
    _add_group(p, required=True)
    p.add_argument("--from", dest="source", type=_rat_pair, required=True, metavar="A,C")
    p.add_argument("--to", dest="target", type=_rat_pair, required=True, metavar="A2,C2")
    p.add_argument("-o", "--output", metavar="FILE")

    p = add("decompose", cmd_decompose, "factor a map into two maps that each fix an arc")
    _add_map_input(p)
    _add_group(p)
    p.add_argument("--window", type=_rat_pair, metavar="A,B", help="arc on which the second factor agrees with f")

    p = add("approximate", cmd_approximate, "group element through snapped samples of a circle map")
    _add_group(p, required=True)
    p.add_argument("--samples", required=True, metavar="FILE", help="'x y' lines")
    p.add_argument("--eps", type=_rat, required=True)
    p.add_argument("--uniform", action="store_true", help="also require sample gaps below eps/3")
    p.add_argument("-o", "--output", metavar="FILE")

    p = add("defect-scan", cmd_defect_scan, "enclose rot([f, g]) for random pairs against the bound 1")
    _add_group(p, required=True)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=_positive_int, default=256)
    p.add_argument("--complexity", type=_positive_int, default=3)
    p.add_argument("--workers", type=_positive_int, default=1)

    p = add("witness", cmd_witness, "a pair f, g with rot([f, g]) = 1 exactly")
    _add_group(p, required=True)

    p = add("balance", cmd_balance, "sum of mass times log slope for a measure on the pieces")
    _add_map_input(p)
    p.add_argument("--measures", required=True, metavar="FILE", help="'lo hi mass' lines")
    p.add_argument("--prec", type=_positive_int, default=DEFAULT_PRECISION, help="bits")

    p = add("conjugacy-check", cmd_conjugacy_check,
            "max residual of h(x) = beta - gamma*base^-x as a conjugacy to rotation by rho")
    _add_map_input(p)
    p.add_argument("--base", default="2")
    p.add_argument("--beta", default="2")
    p.add_argument("--gamma", default="2")
    p.add_argument("--rho", required=True, help="decimal or rational")
    p.add_argument("--grid", type=_positive_int, default=1024)
    p.add_argument("--prec", type=_positive_int, default=DEFAULT_PRECISION, help="bits")

    p = add("plot", cmd_plot, "SVG graph of the circle map")
    _add_map_input(p)
    p.add_argument("-o", "--output", metavar="FILE")

    p = add("orbit", cmd_orbit, "CSV of F^k(x0) and F^k(x0)/k")
    _add_map_input(p)
    p.add_argument("--x0", type=_rat, default=parse_rat("0"))
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("-o", "--output", metavar="FILE")
    return parser


def subcommand_parsers(parser=None):
    """Mapping of subcommand name (aliases included) to its parser."""
    parser = parser or build_parser()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except RotcalcError as exc:
        sys.stdout.flush()
        print(f"ERROR:{exc.name}:{exc.message}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
