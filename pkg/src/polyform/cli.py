"""``polyform`` command-line front end.

Exit codes: 0 success, 1 oracle mismatch, 2 unreadable input, 3 invalid
parameters, 4 invalid cell, 5 operation not supported by the structure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import statistics
import sys
import time
from collections import Counter
from pathlib import Path

from . import __version__
from .bars import BarGraphStructure, build_bargraph
from .bfslabel import LabeledBfsTree, build_bfs
from .container import dump, kind_of, load, space_report
from .covering import build_covering
from .errors import (ContainerError, Disconnected, InvalidCell, InvalidK, InvalidThickness, ParseError,
                     PolyformError)
from .grid import (FORMATS, Polyomino, from_composition, is_connected, parse_composition, parse_polyomino,
                   random_composition_np, random_connected, random_strip, staircase, to_composition)
from .harness import run_exhaustive, run_trials
from .sliced import PRESETS, SlicedStructure, build_sliced, thickness

EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_PARAMS = 3
EXIT_CELL = 4
EXIT_UNSUPPORTED = 5

NAV_OPS = ("left", "right", "up", "down")
QUERY_OPS = NAV_OPS + ("adj", "deg", "vis", "relpos")
SUPPORTED = {
    "bfs": {"adj", "relpos"},
    "nice": set(NAV_OPS) | {"adj", "deg", "vis"},
    "sliced": set(NAV_OPS) | {"adj", "deg", "vis"},
    "bar": set(NAV_OPS) | {"adj", "deg", "vis"},
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _seed_default() -> int:
    raw = os.environ.get("POLYFORM_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(EXIT_PARAMS, f"POLYFORM_SEED must be an integer, got {raw!r}") from None


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


# inputs ---------------------------------------------------------------------


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None


def _parse_gen(spec: str):
    """``name:key=value,...`` into a polyomino or a composition."""
    name, _, rest = spec.partition(":")
    opts: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise CliError(EXIT_PARAMS, f"generator option {item!r} needs key=value")
        opts[key.strip()] = value.strip()
    try:
        n = int(float(opts.get("n", "1000")))
        seed = int(opts.get("seed", "0"))
        if n < 1:
            raise ValueError("n must be positive")
        if name == "staircase":
            return staircase(n)
        if name == "strip":
            return random_strip(n, int(opts.get("h", "64")), seed, float(opts.get("density", "0.5")))
        if name == "composition":
            return random_composition_np(n, seed) if n > 1 else [1]
        if name == "connected":
            return random_connected(n, random.Random(seed))
    except ValueError as exc:
        raise CliError(EXIT_PARAMS, f"bad generator spec {spec!r}: {exc}") from None
    raise CliError(EXIT_PARAMS, f"unknown generator {name!r} (staircase, strip, composition, connected)")


def _slice_f(args, n: int) -> int:
    if args.f is not None:
        return args.f
    if args.epsilon is not None:
        return thickness(n, "const-vis", args.epsilon)
    return thickness(n, args.profile)


def _auto_kind(p: Polyomino) -> str:
    if to_composition(p) is not None:
        return "bar"
    if p.height <= math.ceil(math.sqrt(p.n)):
        return "nice"
    return "sliced"


def _bfs_root(p: Polyomino):
    """Leftmost cell of the top row."""
    top = p.height - 1
    return min(x for x, y in p.cells if y == top), top


def _encode(p: Polyomino, kind: str, args, warn=True):
    if kind == "auto":
        kind = _auto_kind(p)
    if kind == "bar":
        sizes = to_composition(p)
        if sizes is None:
            raise CliError(EXIT_PARAMS, "input is not a bar graph")
        return build_bargraph(sizes)
    if kind == "nice":
        if warn and p.height > p.n / 4:
            print(f"warning: strip height {p.height} exceeds n/4 = {p.n / 4:g}; "
                  "the covering structure will not be compact (try --kind sliced or --rotate)",
                  file=sys.stderr)
        return build_covering(p)
    if kind == "sliced":
        return build_sliced(p, f=_slice_f(args, p.n))
    if kind == "bfs":
        if not is_connected(p):
            raise CliError(EXIT_PARAMS, "bfs encoding needs a connected polyomino")
        return build_bfs(p, _bfs_root(p))
    raise CliError(EXIT_PARAMS, f"unknown kind {kind!r}")


def _build_from_gen(spec: str, kind: str, args):
    obj = _parse_gen(spec)
    if isinstance(obj, list):
        if kind in ("auto", "bar"):
            return build_bargraph(obj)
        obj = from_composition(obj)
    return _encode(obj, kind, args, warn=False)


def _load_container(path: str):
    try:
        return load(_read_bytes(path))
    except ContainerError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


# handle maps ------------------------------------------------------------------


def _handle_pairs(s):
    if isinstance(s, BarGraphStructure):
        return ((s.coord(x), x) for x in s.handles())
    return s.handle_map.items()


# original direction -> direction in the quarter-turned encoding
ROTATED_DIRECTION = {"up": "right", "down": "left", "right": "down", "left": "up"}
ROTATE_MARK = "# rotated"


def _write_map(path: str, s, unrotate, rotated: bool) -> None:
    lines = [ROTATE_MARK + "\n"] if rotated else []
    for c, h in sorted(_handle_pairs(s), key=lambda item: item[1]):
        x, y = unrotate(c)
        lines.append(f"{x} {y} {h}\n")
    Path(path).write_text("".join(lines))


def _read_map(path: str) -> tuple[dict[tuple[int, int], int], bool]:
    out = {}
    rotated = False
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read map {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == ROTATE_MARK:
            rotated = True
            continue
        if not line.strip():
            continue
        try:
            x, y, h = (int(t) for t in line.split())
        except ValueError:
            raise CliError(EXIT_PARSE, f"{path}:{lineno}: expected 'x y id'") from None
        out[(x, y)] = h
    return out, rotated


class Resolver:
    """Translate "x,y" and "#id" references to handles and back."""

    def __init__(self, s, map_path: str | None):
        self.s = s
        self.forward: dict | None = None
        self.rotated = False
        if map_path and Path(map_path).exists():
            self.forward, self.rotated = _read_map(map_path)
        self.back = {h: c for c, h in (self.forward or {}).items()}

    def handle(self, ref: str) -> int:
        ref = ref.strip()
        if ref.startswith("#"):
            try:
                v = int(ref[1:])
            except ValueError:
                raise CliError(EXIT_CELL, f"bad handle {ref!r}") from None
            self.s._check(v)
            return v
        try:
            x, y = (int(t) for t in ref.split(","))
        except ValueError:
            raise CliError(EXIT_CELL, f"bad cell reference {ref!r} (use 'x,y' or '#id')") from None
        if self.forward is None and isinstance(self.s, BarGraphStructure):
            return self.s.handle((x, y))
        if self.forward is None:
            raise CliError(EXIT_CELL, "coordinate references need the .map sidecar (encode with --emit-map)")
        if (x, y) not in self.forward:
            raise InvalidCell(f"{(x, y)} is not a cell")
        return self.forward[(x, y)]

    def render(self, v: int | None, as_coord: bool) -> str:
        if v is None:
            return "null"
        if as_coord:
            if v in self.back:
                x, y = self.back[v]
                return f"{x},{y}"
            if isinstance(self.s, BarGraphStructure):
                x, y = self.s.coord(v)
                return f"{x},{y}"
        return f"#{v}"


# commands ---------------------------------------------------------------------


def cmd_encode(args) -> int:
    text = _read_bytes(args.input)
    if args.format == "composition" and args.kind in ("auto", "bar") and not args.rotate:
        s = build_bargraph(parse_composition(text))
        p_width = 0
    else:
        p = parse_polyomino(text, args.format)
        p_width = p.width
        if args.rotate:
            p = p.rotated()
        s = _encode(p, args.kind, args)
    Path(args.output).write_bytes(dump(s))
    if args.emit_map:
        if args.rotate:
            # rotated (x', y') came from original (W - 1 - y', x')
            unrotate = lambda c: (p_width - 1 - c[1], c[0])  # noqa: E731
        else:
            unrotate = lambda c: c  # noqa: E731
        _write_map(args.output + ".map", s, unrotate, args.rotate)
    return 0


def cmd_query(args) -> int:
    s = _load_container(args.container)
    kind = kind_of(s)
    if args.op not in SUPPORTED[kind]:
        raise CliError(EXIT_UNSUPPORTED, f"operation {args.op!r} is not supported by {kind} containers")
    res = Resolver(s, args.map or args.container + ".map")
    a = res.handle(args.a)
    as_coord = not args.a.strip().startswith("#")
    if args.op in ("adj", "vis"):
        if args.b is None:
            raise CliError(EXIT_PARAMS, f"--op {args.op} needs --b")
        b = res.handle(args.b)
        ans = s.adjacent(a, b) if args.op == "adj" else s.is_visible(a, b)
        print("true" if ans else "false")
    elif args.op == "deg":
        print(s.degree(a))
    elif args.op == "relpos":
        dx, dy = s.relative_position(a)
        print(f"{dx} {dy}")
    else:
        op = ROTATED_DIRECTION[args.op] if res.rotated else args.op
        print(res.render(s.neighbor(a, op), as_coord))
    return 0


def cmd_check(args) -> int:
    start = time.perf_counter()
    if args.exhaustive:
        if args.kind != "bar":
            raise CliError(EXIT_PARAMS, "--exhaustive is only available for --kind bar")
        if args.max_n > 16:
            raise CliError(EXIT_PARAMS, "--exhaustive supports --max-n up to 16")
        out = run_exhaustive(args.max_n)
        mode = "exhaustive"
    else:
        if args.trials < 0 or args.max_n < 1:
            raise CliError(EXIT_PARAMS, "--trials must be >= 0 and --max-n >= 1")
        out = run_trials(args.kind, args.trials, args.seed, args.max_n, f=args.f)
        mode = "random"
    summary = {"kind": args.kind, "mode": mode, "seed": args.seed,
               "trials": None if args.exhaustive else args.trials,
               "max_n": args.max_n, "structures": out.structures, "queries": out.queries,
               "status": "pass" if out.ok else "fail"}
    if out.mismatch is not None:
        summary["counterexample"] = out.mismatch
    if args.timing:
        summary["seconds"] = round(time.perf_counter() - start, 3)
    _emit(summary)
    return 0 if out.ok else EXIT_MISMATCH


def _structure_for_report(args):
    if args.gen:
        return _build_from_gen(args.gen, args.kind, args)
    if not args.container:
        raise CliError(EXIT_PARAMS, "give a container path or --gen SPEC")
    return _load_container(args.container)


def cmd_stats(args) -> int:
    _emit(space_report(_structure_for_report(args)).to_dict())
    return 0


def _random_handle(s, rng: random.Random) -> int:
    if isinstance(s, (BarGraphStructure, LabeledBfsTree)):
        return rng.randint(1, s.n)
    base = s.base if isinstance(s, SlicedStructure) else s
    t = base.tree
    while True:
        v = t.level_order_select(rng.randint(2, t.node_count))
        if not base.is_dummy(v):
            return v


def _vis_partner(s, v: int, rng: random.Random) -> int:
    """Either a random cell or a cell a few steps above ``v``."""
    if rng.random() < 0.5:
        return _random_handle(s, rng)
    steps = rng.randint(1, 2 * getattr(s, "f", 4))
    u = v
    for _ in range(steps):
        w = s.neighbor(u, "up")
        if w is None:
            break
        u = w
    return u


def _percentile(sorted_values, q: float) -> int:
    idx = min(len(sorted_values) - 1, max(0, math.ceil(q * len(sorted_values)) - 1))
    return sorted_values[idx]


def bench_structure(s, queries: int, seed: int, ops=None) -> list[dict]:
    """Per-query latency of every supported operation (plus the sliced iteration histogram)."""
    kind = kind_of(s)
    rng = random.Random(seed)
    ops = [op for op in (ops or QUERY_OPS) if op in SUPPORTED[kind]]
    clock = time.perf_counter_ns
    rows = []
    for op in ops:
        if op in NAV_OPS:
            args = [(_random_handle(s, rng),) for _ in range(queries)]
            fn = lambda v, _op=op: s.neighbor(v, _op)  # noqa: E731
        elif op == "deg":
            args = [(_random_handle(s, rng),) for _ in range(queries)]
            fn = s.degree
        elif op == "relpos":
            args = [(_random_handle(s, rng),) for _ in range(queries)]
            fn = s.relative_position
        else:
            args = []
            for _ in range(queries):
                v = _random_handle(s, rng)
                args.append((v, _vis_partner(s, v, rng) if op == "vis" else _random_handle(s, rng)))
            fn = s.adjacent if op == "adj" else s.is_visible
        for a in args[: min(1000, queries)]:  # warm-up
            fn(*a)
        times = []
        hist: Counter = Counter()
        traced = op == "vis" and isinstance(s, SlicedStructure)
        for a in args:
            t0 = clock()
            fn(*a)
            times.append(clock() - t0)
            if traced:
                hist[s.last_iterations] += 1
        times.sort()
        row = {"kind": kind, "n": s.n, "op": op, "queries": queries,
               "median_ns": int(statistics.median(times)) if times else 0,
               "p99_ns": int(_percentile(times, 0.99)) if times else 0}
        if traced:
            row["iterations_histogram"] = {str(k): v for k, v in sorted(hist.items())}
            row["slice_count"] = s.slice_count
        rows.append(row)
    return rows


def cmd_bench(args) -> int:
    if args.queries < 1:
        raise CliError(EXIT_PARAMS, "--queries must be positive")
    s = _structure_for_report(args)
    ops = args.ops.split(",") if args.ops else None
    if ops:
        bad = [op for op in ops if op not in QUERY_OPS]
        if bad:
            raise CliError(EXIT_PARAMS, f"unknown operation(s): {', '.join(bad)}")
    for row in bench_structure(s, args.queries, args.seed, ops):
        _emit(row)
    return 0


# argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors count as invalid parameters."""

    def error(self, message):
        raise CliError(EXIT_PARAMS, f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _add_slicing(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f", type=_positive_int, help="slice thickness for --kind sliced")
    p.add_argument("--epsilon", type=float, help="thickness ceil(epsilon*n/3) (const-vis profile)")
    p.add_argument("--profile", choices=PRESETS, default="min-space", help="thickness preset")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyform", description="Compact polyomino encodings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _seed_default()

    e = sub.add_parser("encode", help="encode a polyomino into a container file")
    e.add_argument("input", help="input file ('-' for stdin)")
    e.add_argument("output", help="container file to write")
    e.add_argument("--format", choices=FORMATS, default="ascii")
    e.add_argument("--kind", choices=("auto", "bfs", "nice", "sliced", "bar"), default="auto")
    _add_slicing(e)
    e.add_argument("--rotate", action="store_true", help="quarter-turn the input first (columns become rows)")
    e.add_argument("--emit-map", action="store_true", help="also write OUTPUT.map with 'x y id' lines")
    e.set_defaults(func=cmd_encode)

    q = sub.add_parser("query", help="answer one query against a container")
    q.add_argument("container")
    q.add_argument("--op", choices=QUERY_OPS, required=True)
    q.add_argument("--a", required=True, help="cell as 'x,y' or '#id'")
    q.add_argument("--b", help="second cell for adj and vis")
    q.add_argument("--map", help="handle map (default: CONTAINER.map)")
    q.set_defaults(func=cmd_query)

    c = sub.add_parser("check", help="compare random structures with the grid oracle")
    c.add_argument("--kind", choices=("bfs", "nice", "sliced", "bar"), required=True)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int, default=seed)
    c.add_argument("--max-n", type=int, default=60)
    c.add_argument("--f", type=_positive_int, help="fixed slice thickness (default: random per trial)")
    c.add_argument("--exhaustive", action="store_true", help="bar only: every composition up to --max-n, k in 2..4")
    c.add_argument("--timing", action="store_true", help="include wall time in the summary")
    c.set_defaults(func=cmd_check)

    for name, func, helptext in (("stats", cmd_stats, "space report"), ("bench", cmd_bench, "query latency")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("container", nargs="?")
        s.add_argument("--gen", help="generator spec, e.g. strip:n=100000,h=64,seed=1")
        s.add_argument("--kind", choices=("auto", "bfs", "nice", "sliced", "bar"), default="auto")
        _add_slicing(s)
        if name == "bench":
            s.add_argument("--queries", type=int, default=1_000_000)
            s.add_argument("--seed", type=int, default=seed)
            s.add_argument("--ops", help="comma-separated subset of " + ",".join(QUERY_OPS))
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"polyform: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"polyform: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidCell as exc:
        print(f"polyform: invalid cell: {exc}", file=sys.stderr)
        return EXIT_CELL
    except (InvalidThickness, InvalidK, Disconnected) as exc:
        print(f"polyform: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except PolyformError as exc:
        print(f"polyform: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
