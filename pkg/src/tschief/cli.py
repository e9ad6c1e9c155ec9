"""Command-line entry points: train, eval, bench-scaling, ablate."""

import argparse
import itertools
import statistics
import sys
import time

import numpy as np

from . import io
from .core import TsChiefError
from .forest import ForestConfig, train

ABLATION_ARMS = (
    ("sim",), ("dict",), ("int",),
    ("sim", "dict"), ("sim", "int"), ("dict", "int"),
    ("sim", "dict", "int"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise TsChiefError(message)


def _forest_flags(p):
    p.add_argument("-k", type=int, default=500, help="trees (default 500)")
    p.add_argument("-t", type=int, default=1000, help="BOSS transforms in the pool (default 1000)")
    p.add_argument("--Ce", type=int, default=5, help="similarity candidates per node")
    p.add_argument("--Cb", type=int, default=100, help="dictionary candidates per node")
    p.add_argument("--Cr", type=int, default=100, help="interval candidates per node")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available CPUs)")
    p.add_argument("--normalize", action="store_true", help="z-normalize series on load")


def build_parser():
    parser = _Parser(prog="tschief", description="Time-series classification forest.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a forest and save it")
    p.add_argument("--train", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    _forest_flags(p)

    p = sub.add_parser("eval", help="train on a split, report test accuracy")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--results", help="CSV to append one row per repeat")
    _forest_flags(p)

    p = sub.add_parser("bench-scaling", help="training time against training-set size")
    p.add_argument("--train", required=True)
    p.add_argument("--test", help="optional split for accuracy")
    p.add_argument("--sizes", required=True, help="comma-separated ascending sizes")
    p.add_argument("--repeats", type=int, default=3, help="runs per size; the median is kept")
    p.add_argument("--out", required=True, help="CSV to write")
    _forest_flags(p)

    p = sub.add_parser("ablate", help="all seven splitter-type subsets")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--results", help="CSV to append one row per arm and repeat")
    _forest_flags(p)
    return parser


def _config(args, **override):
    base = dict(k=args.k, t=args.t, Ce=args.Ce, Cb=args.Cb, Cr=args.Cr,
                seed=args.seed, threads=args.threads)
    base.update(override)
    return ForestConfig(**base).validate()


def _record(train_set, test_set, cfg, forest, ev):
    nodes = forest.node_counts()
    return io.ResultsRecord(
        train_set.name, train_set.n, test_set.n, train_set.length, train_set.n_classes,
        cfg.k, cfg.t, cfg.Ce, cfg.Cb, cfg.Cr, cfg.seed, ev.accuracy,
        forest.train_seconds, ev.seconds,
        nodes["similarity"], nodes["dictionary"], nodes["interval"])


def _run_eval(train_set, test_set, cfg, results):
    forest = train(train_set, cfg)
    ev = forest.evaluate(test_set)
    rec = _record(train_set, test_set, cfg, forest, ev)
    if results:
        io.write_results([rec], results)
    return rec


def cmd_train(args):
    cfg = _config(args)
    data = io.load_ucr_file(args.train, normalize=args.normalize)
    forest = train(data, cfg)
    io.save_model(forest, args.out)
    print(f"trained n={data.n} length={data.length} classes={data.n_classes} "
          f"train_seconds={forest.train_seconds:.3f} -> {args.out}")
    return 0


def cmd_eval(args):
    if args.repeats < 1:
        raise TsChiefError("repeats must be >= 1")
    cfg = _config(args)
    train_set, test_set = io.load_ucr_split(args.train, args.test, args.normalize)
    accs = []
    for r in range(args.repeats):
        rec = _run_eval(train_set, test_set, _config(args, seed=cfg.seed + r), args.results)
        accs.append(rec.accuracy)
        print(f"seed={rec.seed} accuracy={rec.accuracy:.6f} "
              f"train_seconds={rec.train_seconds:.3f} test_seconds={rec.test_seconds:.3f}")
    print(f"mean accuracy={statistics.fmean(accs):.6f} over {len(accs)} run(s)")
    return 0


SCALING_HEADER = ("dataset", "size", "classes", "k", "t", "Ce", "Cb", "Cr", "seed",
                  "repeats", "train_seconds", "time_ratio", "accuracy")


def cmd_bench_scaling(args):
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise TsChiefError(f"bad --sizes value {args.sizes!r}") from None
    if not sizes or sizes != sorted(sizes):
        raise TsChiefError("--sizes must be a non-empty ascending list")
    if args.repeats < 1:
        raise TsChiefError("repeats must be >= 1")
    cfg = _config(args)
    if args.test:
        data, test_set = io.load_ucr_split(args.train, args.test, args.normalize)
    else:
        data, test_set = io.load_ucr_file(args.train, normalize=args.normalize), None
    present = int((data.class_counts() > 0).sum())
    if sizes[0] < present:
        raise TsChiefError(f"size {sizes[0]} smaller than class count {present}")
    rng = np.random.default_rng(cfg.seed)
    prev = None
    with open(args.out, "w") as fh:
        fh.write(",".join(SCALING_HEADER) + "\n")
        fh.flush()
        for size in sizes:
            sample = io.stratified_subsample(data, size, rng)
            times, forest = [], None
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                forest = train(sample, cfg)
                times.append(time.perf_counter() - t0)
            med = statistics.median(times)
            ratio = "" if prev is None else f"{med / prev:.4f}"
            acc = "" if test_set is None else f"{forest.evaluate(test_set).accuracy:.6f}"
            row = [data.name, size, data.n_classes, cfg.k, cfg.t, cfg.Ce, cfg.Cb, cfg.Cr,
                   cfg.seed, args.repeats, f"{med:.4f}", ratio, acc]
            fh.write(",".join(str(v) for v in row) + "\n")
            fh.flush()
            print(f"size={size} median_train_seconds={med:.3f}"
                  + (f" ratio={ratio}" if ratio else ""))
            prev = med
    return 0


def cmd_ablate(args):
    if args.repeats < 1:
        raise TsChiefError("repeats must be >= 1")
    cfg = _config(args)
    train_set, test_set = io.load_ucr_split(args.train, args.test, args.normalize)
    for r, arm in itertools.product(range(args.repeats), ABLATION_ARMS):
        arm_cfg = _config(args, seed=cfg.seed + r,
                          Ce=cfg.Ce if "sim" in arm else 0,
                          Cb=cfg.Cb if "dict" in arm else 0,
                          Cr=cfg.Cr if "int" in arm else 0)
        rec = _run_eval(train_set, test_set, arm_cfg, args.results)
        print(f"arm={'+'.join(arm)} seed={rec.seed} accuracy={rec.accuracy:.6f}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "bench-scaling": cmd_bench_scaling,
    "ablate": cmd_ablate,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (TsChiefError, OSError) as exc:
        msg = str(exc)
        if isinstance(exc, FileNotFoundError):
            msg = f"file not found: {exc.filename}"
        print(f"tschief: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
