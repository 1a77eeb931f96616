"""``hypermajority`` command line.

Exit status: 0 on success, 1 on usage errors, 2 when an exact identity or
the coupling property is violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from . import _backend, contour2d, dual1d, slice2d, stats
from .dynamics import run
from .lattice import Configuration, GridParseError, LatticeGeometry, read_grid_text, write_grid_text
from .rng import RngStream

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

# keys left out of the "# config:" line: they never change the output
_UNRECORDED = {"out", "threads", "config", "backend", "command", "func", "parser", "default_n"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, *, model="majority", d=2, n=3, side=None, time=None,
            replicas=None, out_help="output CSV (default: stdout)") -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--model", choices=["majority", "voter"], default=model, help="update rule (default: %(default)s)")
    g.add_argument("--d", type=int, default=d, choices=[1, 2], help="dimension (default: %(default)s)")
    g.add_argument("--n", type=int, default=None,
                   help=f"block side, majority model only (default: {n})")
    p.set_defaults(default_n=n)
    g.add_argument("--side", type=int, default=side, help="lattice side L (default: %(default)s)")
    g.add_argument("--time", type=float, default=time, help="time horizon T (default: %(default)s)")
    g.add_argument("--replicas", type=int, default=replicas, help="number of replicas (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="random seed (default: %(default)s)")
    g.add_argument("--out", type=Path, default=None, help=out_help)
    g.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available parallelism)")
    g.add_argument("--config", type=Path, default=None,
                   help="file of key=value lines using the flag names; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypermajority", description="Majority-rule dynamics on block hypergraphs.")
    parser.add_argument("--backend", choices=_backend.available(), default=None,
                        help="kernel implementation (default: %s)" % _backend.name())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("snapshot", help="final configuration of a torus run from a Bernoulli(1/2) start")
    _common(p, side=400, time=20.0, out_help="output prefix; writes PREFIX.txt and PREFIX.pgm (default: snapshot)")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("corners", help="corner identity phi_sum = 9 (c_minus - c_plus) over a cluster corpus")
    _common(p, replicas=200)
    p.add_argument("inputs", nargs="*", type=Path, help="cluster files in grid text format (default: generate a corpus)")
    p.add_argument("--shape-class", default="all", choices=["all", *contour2d.SHAPE_CLASSES],
                   help="generator shape class; 'all' cycles through them (default: %(default)s)")
    p.add_argument("--size", type=int, default=150, help="target cluster size for the generator (default: %(default)s)")
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("drift1d", help="front displacement for even n")
    _common(p, d=1, n=2, time=1000.0, replicas=100)
    p.set_defaults(func=cmd_drift1d)

    p = sub.add_parser("coupling1d", help="center-path coupling check for odd n")
    _common(p, d=1, n=3, time=50.0, replicas=500)
    p.add_argument("--pair-dist", type=_int_list, default=[1, 2, 3, 4, 5, 6],
                   help="pair distances, cycled over replicas (default: 1,2,3,4,5,6)")
    p.set_defaults(func=cmd_coupling1d)

    p = sub.add_parser("slice", help="slice process: drift table, runs, or good-time estimates")
    _common(p, n=2, time=1e4, replicas=None)
    p.add_argument("--mode", choices=["table", "run", "goodtime"], default="table", help="(default: %(default)s)")
    p.add_argument("--radius", type=int, default=6, help="table: bound on |X+|, |X-| (default: %(default)s)")
    p.add_argument("--interfaces", default="0:0,0:1,0:2,-1:0,-2:0",
                   help="goodtime: comma-separated a:b pairs (default: %(default)s)")
    p.add_argument("--cap", type=float, default=1000.0, help="goodtime: per-replica time cap (default: %(default)s)")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("extinction", help="extinction time of an m x m square (n = 3)")
    _common(p, time=1000.0, replicas=100)
    p.add_argument("--m-list", type=_int_list, default=[12, 20, 30], help="square sides (default: 12,20,30)")
    p.add_argument("--margin", type=int, default=None, help="window margin around the square (default: 2m)")
    p.set_defaults(func=cmd_extinction)

    p = sub.add_parser("cluster-stats", help="two-point disagreement probabilities on a torus")
    _common(p, d=1, replicas=1000)
    p.add_argument("--times", type=_float_list, default=[10.0, 50.0, 100.0], help="(default: 10,50,100)")
    p.add_argument("--pair-dist", type=_int_list, default=[1], help="pair distances (default: 1)")
    p.set_defaults(func=cmd_cluster_stats)
    return parser


def _config_tokens(path: Path) -> list[str]:
    tokens = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if key in ("inputs",):
            tokens.extend(shlex.split(value))
        else:
            tokens.extend([flag, value])
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        # config values go right after the subcommand so explicit flags override them
        k = argv.index(args.command)
        try:
            extra = _config_tokens(args.config)
        except UsageError as exc:
            parser.exit(EXIT_USAGE, f"hypermajority: error: {exc}\n")
        args = parser.parse_args(argv[: k + 1] + extra + argv[k + 1 :])
    args.parser = parser
    return args


def _validate(args) -> None:
    if args.model == "voter":
        if args.n is not None:
            raise UsageError("--n does not apply to --model voter")
    elif args.n is None:
        args.n = args.default_n
    if args.n is not None and args.n < 2:
        raise UsageError(f"--n must be at least 2, got {args.n}")
    for name in ("side", "replicas", "threads"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be positive, got {v}")
    if args.time is not None and not (args.time >= 0 and math.isfinite(args.time)):
        raise UsageError(f"--time must be a finite non-negative number, got {args.time}")
    if args.seed < 0:
        raise UsageError(f"--seed must be non-negative, got {args.seed}")


def config_line(args) -> str:
    items = []
    for key, value in sorted(vars(args).items()):
        if key in _UNRECORDED:
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        items.append(f"{key}={value}")
    return "# config: " + " ".join(items) + "\n"


class _Table:
    """CSV text with a leading config comment and optional trailing summary comments."""

    def __init__(self, args, header: list[str]):
        self.buf = io.StringIO()
        self.buf.write(config_line(args))
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(header)
        self.summaries: list[str] = []

    def row(self, *values) -> None:
        self.writer.writerow([_fmt(v) for v in values])

    def summary(self, text: str) -> None:
        self.summaries.append(f"# summary: {text}\n")

    def text(self) -> str:
        return self.buf.getvalue() + "".join(self.summaries)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    try:
        args.out.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror}") from None


def pgm_bytes(config: Configuration) -> bytes:
    """8-bit binary grayscale, first row = highest y; state 1 is black."""
    bits = config.bits if config.geometry.d == 2 else config.bits[:, None]
    img = np.where(bits.T[::-1], 0, 255).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def cmd_snapshot(args) -> int:
    if args.d != 2:
        raise UsageError("snapshot needs --d 2")
    rule = stats.make_rule(args.model, args.n)
    geo = LatticeGeometry.torus(args.side, 2)
    rng = RngStream(args.seed, 0)
    c0 = Configuration.bernoulli(geo, rng)
    final = run(c0, rule, args.time, rng).final
    prefix = args.out if args.out is not None else Path("snapshot")
    text = config_line(args) + write_grid_text(final)
    for path, data in ((prefix.with_name(prefix.name + ".txt"), text.encode()),
                       (prefix.with_name(prefix.name + ".pgm"), pgm_bytes(final))):
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from None
    print(f"density={stats.density(final)!r}", file=sys.stderr)
    return EXIT_OK


def _load_cluster(path: Path) -> Configuration:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        # "# " comment lines (such as a snapshot's config line) are not grid rows
        return read_grid_text("\n".join(l for l in text.splitlines() if not l.startswith("# ")))
    except GridParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_corners(args) -> int:
    t = _Table(args, ["cluster_id", "vertices", "c_plus", "c_minus", "phi_sum", "identity_holds"])
    if args.inputs:
        clusters = [(str(p), _load_cluster(p)) for p in args.inputs]
    else:
        classes = contour2d.SHAPE_CLASSES if args.shape_class == "all" else (args.shape_class,)

        def one(k):
            cls = classes[k % len(classes)]
            return f"{cls}-{k}", contour2d.generate_regular_cluster(RngStream(args.seed, k), args.size, cls)

        clusters = stats.map_replicas(one, args.replicas, args.threads)
    failures = asserted = 0
    for cid, config in clusters:
        r = contour2d.check_corner_identity(config)
        t.row(cid, r.vertices, r.c_plus, r.c_minus, r.phi_sum, r.identity_holds)
        if r.asserted:
            asserted += 1
            failures += not r.identity_holds
    t.summary(f"clusters={len(clusters)} asserted={asserted} violations={failures}")
    _emit(args, t.text())
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_drift1d(args) -> int:
    if args.model != "majority" or args.d != 1:
        raise UsageError("drift1d runs the majority model with --d 1")
    if args.n % 2:
        raise UsageError(f"--n must be even for the front process, got {args.n}")
    t = _Table(args, ["n", "T", "replica", "final_front"])

    def one(k):
        return dual1d.simulate_front(args.n, args.time, RngStream(args.seed, k)).final

    finals = stats.map_replicas(one, args.replicas, args.threads)
    for k, x in enumerate(finals):
        t.row(args.n, args.time, k, x)
    if args.time > 0:
        est = stats.Estimate.from_values(np.array(finals) / args.time)
        t.summary(f"mean_drift={est.mean!r} std_err={est.std_err!r} expected={args.n / 2!r}")
    _emit(args, t.text())
    return EXIT_OK


def cmd_coupling1d(args) -> int:
    if args.model != "majority" or args.d != 1:
        raise UsageError("coupling1d runs the majority model with --d 1")
    if args.n % 2 == 0:
        raise UsageError(f"--n must be odd for center paths, got {args.n}")
    if any(dd < 0 for dd in args.pair_dist):
        raise UsageError("--pair-dist values must be non-negative")
    t = _Table(args, ["n", "T", "replica", "S", "eta_x", "eta_y", "violated", "truncated"])

    def one(k):
        dist = args.pair_dist[k % len(args.pair_dist)]
        return dual1d.coupling_replica(args.n, args.time, dist, RngStream(args.seed, k))

    violations = truncated = 0
    for recs in stats.map_replicas(one, args.replicas, args.threads):
        for r in recs:
            t.row(args.n, args.time, r.replica, r.S, r.eta_x, r.eta_y, r.violated, r.truncated)
            violations += r.violated
            truncated += r.truncated
    t.summary(f"replicas={args.replicas} violations={violations} truncated_attempts={truncated}")
    _emit(args, t.text())
    return EXIT_VIOLATION if violations else EXIT_OK


def _parse_interfaces(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        try:
            a, b = item.split(":")
            out.append((int(a), int(b)))
        except ValueError:
            raise UsageError(f"--interfaces: expected a:b pairs, got {item!r}") from None
    return out


def cmd_slice(args) -> int:
    if args.model != "majority" or args.n != 2:
        raise UsageError("the slice process is defined for the majority model with --n 2")
    if args.mode == "table":
        t = _Table(args, ["a", "b", "drift_sigma", "drift_gap", "catalog_size"])
        bad = 0
        for row in slice2d.drift_table(args.radius):
            s = slice2d.SliceState.from_interface(row["a"], row["b"])
            bad += row["drift_sigma"] != 2 * (slice2d.good_count(s) - 1)
            if row["drift_gap"] is not None:
                bad += row["drift_gap"] > -2 * (row["a"] * row["b"] != 0)
            t.row(row["a"], row["b"], row["drift_sigma"], row["drift_gap"], row["catalog_size"])
        t.summary(f"states={len(t.buf.getvalue().splitlines()) - 2} violations={bad}")
        _emit(args, t.text())
        return EXIT_VIOLATION if bad else EXIT_OK
    if args.mode == "run":
        replicas = args.replicas or 100
        t = _Table(args, ["replica", "T", "x_minus", "x_zero", "x_plus", "sigma", "gap", "max_gap"])

        def one(k):
            tr = slice2d.simulate_slice(args.time, RngStream(args.seed, k))
            return tr.final, int(tr.gap().max())

        for k, (s, mg) in enumerate(stats.map_replicas(one, replicas, args.threads)):
            t.row(k, args.time, s.xm, s.x0, s.xp, slice2d.sigma(s), slice2d.gap(s), mg)
        _emit(args, t.text())
        return EXIT_OK
    replicas = args.replicas or 10000
    t = _Table(args, ["a", "b", "e_estimate", "std_err", "replicas", "cap_hits"])
    ifaces = _parse_interfaces(args.interfaces)

    def one(k):
        return slice2d.estimate_good_time(ifaces[k], replicas, args.seed, cap=args.cap)

    try:
        ests = stats.map_replicas(one, len(ifaces), args.threads)
    except slice2d.PreconditionError as exc:
        raise UsageError(str(exc)) from None
    for e in ests:
        t.row(e.iface[0], e.iface[1], e.mean, e.std_err, e.replicas, e.cap_hits)
    _emit(args, t.text())
    return EXIT_OK


def cmd_extinction(args) -> int:
    if args.model != "majority" or args.d != 2:
        raise UsageError("extinction runs the majority model with --d 2")
    t = _Table(args, ["m", "N0", "replica", "extinction_time", "flag"])
    for m in args.m_list:
        res = stats.extinction_time(m, args.replicas, args.seed, n=args.n, margin=args.margin,
                                    cap=args.time, threads=args.threads)
        for r in res.records:
            t.row(m, m * m, r.replica, r.time, r.flag)
        t.summary(f"m={m} mean={res.estimate.mean!r} std_err={res.estimate.std_err!r} "
                  f"used={res.estimate.replicas} flagged={res.flagged}")
    _emit(args, t.text())
    return EXIT_OK


def cmd_cluster_stats(args) -> int:
    t = _Table(args, ["t", "pair_dist", "estimate", "std_err", "replicas"])
    for dist in args.pair_dist:
        ests = stats.disagreement_probability(args.model, args.d, args.n, dist, args.times,
                                              args.replicas, args.seed, side=args.side,
                                              threads=args.threads)
        for tt, e in zip(args.times, ests):
            t.row(tt, dist, e.mean, e.std_err, e.replicas)
    _emit(args, t.text())
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    try:
        _validate(args)
        if args.backend:
            _backend.set_backend(args.backend)
        return args.func(args)
    except UsageError as exc:
        args.parser.exit(EXIT_USAGE, f"hypermajority {args.command}: error: {exc}\n")
    except (ValueError, OSError) as exc:
        args.parser.exit(EXIT_USAGE, f"hypermajority {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
