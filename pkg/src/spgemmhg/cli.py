"""Command-line front end.

Verbs: ``gen`` (write test instances as Matrix Market), ``build`` (model
hypergraph to .shgr), ``partition`` (partition a .shgr), ``evaluate``
(report on an existing partition), ``sweep`` (grid of runs to CSV).

Exit codes: 0 ok, 1 internal error, 2 user-input error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import metrics, models, partitioner, sparse
from .errors import ConfigError, Error
from .hypergraph import Partition, read_hgr, write_hgr

CSV_HEADER = ("instance,model,p,seed,max_cut,connectivity,"
              "eps_achieved,delta_achieved,feasible,runtime_ms")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}")


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _fmt_float(x: float) -> str:
    if x == float("inf"):
        return "inf"
    return f"{x:.6g}"


def _report_row(instance: str, model: str, p: int, seed,
                report: metrics.CommReport | None, feasible: bool,
                runtime_ms: float) -> str:
    if report is None:
        body = ",,,,"
    else:
        body = (f"{report.max_cut_cost},{report.connectivity_total},"
                f"{_fmt_float(report.achieved_epsilon)},"
                f"{_fmt_float(report.achieved_delta)},")
    return (f"{instance},{model},{p},{seed},{body}"
            f"{1 if feasible else 0},{runtime_ms:.0f}")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.kind == "stencil27":
        if args.n is None:
            raise ConfigError("stencil27 needs --n (grid side)")
        s = sparse.gen_stencil27(args.n)
    elif args.kind == "sa-prolongator":
        if args.n is None:
            raise ConfigError("sa-prolongator needs --n (grid side)")
        s = sparse.gen_sa_prolongator(args.n)
    else:
        if args.n is None or args.d is None:
            raise ConfigError("erdos-renyi needs --n and --d")
        s = sparse.gen_erdos_renyi(args.n, args.d, args.seed)
    text = sparse.dump_matrix_market(s)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def _load_pair(args) -> tuple[sparse.NonzeroStructure,
                              sparse.NonzeroStructure | None]:
    s_a = sparse.load_matrix_market(_read(args.a))
    if args.b_file and args.b:
        raise ConfigError("give either a B file or --b, not both")
    if args.b_file:
        return s_a, sparse.load_matrix_market(_read(args.b_file))
    if args.b == "a":
        return s_a, s_a
    if args.b == "transpose-a":
        return s_a, sparse.transpose(s_a)
    return s_a, None


def cmd_build(args) -> int:
    s_a, s_b = _load_pair(args)
    mask = None
    if args.model == "masked":
        if not args.mask:
            raise ConfigError("--model masked needs --mask")
        mask = sparse.load_matrix_market(_read(args.mask))
    elif args.mask:
        raise ConfigError("--mask only applies to --model masked")
    spec = models.ModelSpec(args.model, not args.no_data_vertices, mask)

    if spec.kind == "spmv":
        if s_b is not None:
            raise ConfigError("the spmv model uses only the A matrix")
        h = models.build_model(s_a, None, spec)
    else:
        if s_b is None:
            raise ConfigError(f"model {spec.kind!r} needs a B matrix "
                              f"(file, --b a, or --b transpose-a)")
        if spec.kind != "masked":
            s_a, s_b, _, _ = sparse.strip_empty(s_a, s_b)
        h = models.build_model(s_a, s_b, spec)

    out = args.output or (Path(args.a).stem + f".{args.model}.shgr")
    text = f"% model {args.model}\n" + write_hgr(h)
    _write(out, text)
    print(f"{len(h.vertices)} {len(h.nets)} {h.n_pins} {h.total_comp}")
    return 0


def _embedded_model_name(text: str) -> str:
    for line in text.splitlines():
        if line.startswith("% model "):
            return line.split()[2]
        if not line.startswith("%"):
            break
    return "-"


# ---------------------------------------------------------------------------
# partition / evaluate
# ---------------------------------------------------------------------------

def cmd_partition(args) -> int:
    text = _read(args.hgr)
    h = read_hgr(text)
    model = _embedded_model_name(text)
    cfg = partitioner.PartitionConfig(
        p=args.p, epsilon=args.epsilon, objective=args.objective,
        seed=args.seed)
    start = time.perf_counter()
    if args.geometric:
        scheme, n_text = args.geometric
        try:
            grid_n = int(n_text)
        except ValueError:
            raise ConfigError(f"grid side {n_text!r} is not an integer")
        part = partitioner.geometric_partition(h, scheme, grid_n, args.p)
    elif args.oracle:
        part = partitioner.partition_bruteforce(h, cfg)
    else:
        part = partitioner.partition_multilevel(h, cfg)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    out = args.output or (Path(args.hgr).stem + ".part")
    _write(out, f"% seed {args.seed}\n" + part.to_text())
    report = metrics.comm_report(h, part)
    print(_report_row(args.hgr, model, args.p, args.seed, report, True,
                      runtime_ms))
    return 0


def cmd_evaluate(args) -> int:
    text = _read(args.hgr)
    h = read_hgr(text)
    part = Partition.from_text(_read(args.partition))
    report = metrics.comm_report(h, part)
    print(_report_row(args.hgr, _embedded_model_name(text), part.p, "-",
                      report, True, 0.0))
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _parse_config(text: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key=value, "
                              f"got {line!r}")
        out.setdefault(key.strip(), []).append(value.strip())
    return out


def _instance_structures(token: str):
    """Resolve an instance token to (S_A, S_B, forced_p or None).

    Forms: ``file:a.mtx:b.mtx``, ``file:a.mtx:a``, ``file:a.mtx:transpose-a``,
    ``amg-ap:N``, ``amg-ptap:N``, ``er:n:d:seed[:b]``.  A ``@p=K`` suffix
    pins the part count for weak-scaling grids.
    """
    forced_p = None
    body = token
    if "@" in token:
        body, _, suffix = token.partition("@")
        if not suffix.startswith("p="):
            raise ConfigError(f"instance {token!r}: bad suffix {suffix!r}")
        forced_p = int(suffix[2:])
    fields = body.split(":")
    kind = fields[0]
    if kind in ("amg-ap", "amg-ptap"):
        if len(fields) != 2:
            raise ConfigError(f"instance {token!r}: expected {kind}:N")
        n = int(fields[1])
        stencil = sparse.gen_stencil27(n)
        prolong = sparse.gen_sa_prolongator(n)
        if kind == "amg-ap":
            return stencil, prolong, forced_p
        ap, _ = sparse.symbolic_multiply(stencil, prolong)
        return sparse.transpose(prolong), ap, forced_p
    if kind == "er":
        if len(fields) not in (4, 5):
            raise ConfigError(f"instance {token!r}: expected er:n:d:seed[:b]")
        s = sparse.gen_erdos_renyi(int(fields[1]), float(fields[2]),
                                   int(fields[3]))
        b = fields[4] if len(fields) == 5 else "a"
        if b == "a":
            return s, s, forced_p
        if b == "transpose-a":
            return s, sparse.transpose(s), forced_p
        raise ConfigError(f"instance {token!r}: unknown B form {b!r}")
    if kind == "file":
        if len(fields) != 3:
            raise ConfigError(f"instance {token!r}: expected file:a:b")
        s_a = sparse.load_matrix_market(_read(fields[1]))
        if fields[2] == "a":
            return s_a, s_a, forced_p
        if fields[2] == "transpose-a":
            return s_a, sparse.transpose(s_a), forced_p
        return s_a, sparse.load_matrix_market(_read(fields[2])), forced_p
    raise ConfigError(f"unknown instance kind {kind!r} in {token!r}")


def _single(cfg: dict[str, list[str]], key: str, default: str) -> str:
    values = cfg.get(key)
    if not values:
        return default
    if len(values) > 1:
        raise ConfigError(f"config key {key!r} given {len(values)} times")
    return values[0]


def cmd_sweep(args) -> int:
    cfg = _parse_config(_read(args.config))
    instances = cfg.get("instance")
    model_names = cfg.get("model")
    if not instances:
        raise ConfigError("config needs at least one instance=")
    if not model_names:
        raise ConfigError("config needs at least one model=")
    for name in model_names:
        if name not in models.MODEL_KINDS:
            raise ConfigError(f"unknown model {name!r}")
    p_list = [int(x) for x in cfg.get("p", ["2"])]
    seeds = [int(x) for x in cfg.get("seed", ["0"])]
    epsilon = float(_single(cfg, "epsilon", "0.01"))
    objective = _single(cfg, "objective", metrics.CONNECTIVITY)
    with_data = _single(cfg, "data_vertices", "true").lower()
    if with_data not in ("true", "false"):
        raise ConfigError(f"data_vertices must be true or false, got {with_data!r}")
    passes = int(_single(cfg, "refinement_passes", "4"))
    output = _single(cfg, "output", "")

    rows = [CSV_HEADER]
    for token in instances:
        s_a, s_b, forced_p = _instance_structures(token)
        s_a, s_b, _, _ = sparse.strip_empty(s_a, s_b)
        built: dict[str, object] = {}
        for model_name in model_names:
            spec = models.ModelSpec(model_name, with_data == "true")
            for p in ([forced_p] if forced_p is not None else p_list):
                for seed in seeds:
                    start = time.perf_counter()
                    try:
                        h = built.get(model_name)
                        if h is None:
                            h = models.build_model(s_a, s_b, spec)
                            built[model_name] = h
                        part = partitioner.partition_multilevel(
                            h, partitioner.PartitionConfig(
                                p=p, epsilon=epsilon, objective=objective,
                                seed=seed, refinement_passes=passes))
                        report = metrics.comm_report(h, part)
                        ok = True
                    except Error:
                        report = None
                        ok = False
                    ms = (time.perf_counter() - start) * 1000.0
                    rows.append(_report_row(token, model_name, p, seed,
                                            report, ok, ms))
    text = "\n".join(rows) + "\n"
    if output:
        _write(output, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spgemmhg",
        description="Model sparse matrix products as hypergraphs, partition "
                    "them, and evaluate the communication they imply.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a test instance (.mtx)")
    g.add_argument("kind", choices=["stencil27", "sa-prolongator",
                                    "erdos-renyi"])
    g.add_argument("--n", type=int, help="grid side or matrix dimension")
    g.add_argument("--d", type=float, help="expected nonzeros per row")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a model hypergraph (.shgr)")
    b.add_argument("a", help="Matrix Market file for A")
    b.add_argument("b_file", nargs="?", help="Matrix Market file for B")
    b.add_argument("--b", choices=["a", "transpose-a"],
                   help="derive B from A instead of reading a file")
    b.add_argument("--model", required=True, choices=list(models.MODEL_KINDS))
    b.add_argument("--no-data-vertices", action="store_true")
    b.add_argument("--mask", help="Matrix Market mask for --model masked")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    p = sub.add_parser("partition", help="partition a .shgr hypergraph")
    p.add_argument("hgr")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objective", default=metrics.CONNECTIVITY,
                   choices=list(metrics.OBJECTIVES))
    p.add_argument("--oracle", action="store_true",
                   help="exhaustive optimum (small instances only)")
    p.add_argument("--geometric", nargs=2, metavar=("SCHEME", "N"),
                   help="grid-based baseline: row|outer and the grid side")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_partition)

    e = sub.add_parser("evaluate", help="report on an existing partition")
    e.add_argument("hgr")
    e.add_argument("partition")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="run a grid of partitioning jobs")
    s.add_argument("config")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())
