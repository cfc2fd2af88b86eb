"""Command-line entry point: ``cdsbench <command> ...``.

Exit codes: 0 success, 1 validation or format error, 2 evaluation error.
"""

import argparse
import logging
import sys

from cdsbench import _accel
from cdsbench.config import load_config
from cdsbench.errors import BuildError, ConfigError, EvaluationError, FormatError
from cdsbench.eval.metrics import ALL_METRICS, evaluate_run, mean_metrics
from cdsbench.eval.qrels import read_qrels
from cdsbench.eval.report import compare_runs, delta_csv, per_query_delta
from cdsbench.eval.runs import read_run, write_run
from cdsbench.fileutil import atomic_write_text
from cdsbench.index import save_index
from cdsbench.optimizer import WeightGrid, format_weights, hill_climb
from cdsbench.pipeline import (
    build_index_from_config,
    evaluate_weights,
    load_or_build_index,
    load_resources,
    run_pipeline,
    train_ltr,
)

log = logging.getLogger("cdsbench")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EVALUATION = 2


def cmd_index(args):
    config = load_config(args.config)
    output = args.output or config.path("index")
    if not output:
        raise ConfigError("no output path: pass -o or set 'index' in the config")
    index = build_index_from_config(config, workers=_accel.worker_count(args.workers))
    save_index(index, output)
    log.info("indexed %d documents into %s", index.n_docs, output)


def cmd_run(args):
    config = load_config(args.config)
    resources = load_resources(config)
    index = load_or_build_index(config)
    run = run_pipeline(config, index, resources)
    write_run(run, args.output)
    log.info("wrote %s (%d topics)", args.output, len(run.topics))


def _qrels(args):
    return read_qrels(args.qrels, args.strata)


def cmd_evaluate(args):
    qrels = _qrels(args)
    run = read_run(args.run)
    per_topic = evaluate_run(run, qrels)
    if not per_topic:
        raise EvaluationError("no topic with judged-relevant documents")
    lines = []
    if args.per_topic:
        for topic, values in per_topic.items():
            lines.extend(f"{m}\t{topic}\t{values[m]:.4f}" for m in ALL_METRICS)
    means = mean_metrics(per_topic)
    lines.extend(f"{m}\tall\t{means[m]:.4f}" for m in ALL_METRICS)
    lines.append(f"num_q\tall\t{len(per_topic)}")
    text = "\n".join(lines) + "\n"
    if args.output:
        atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)


def _parse_fields(pairs):
    fields = {}
    for item in pairs or ():
        tag, sep, field = item.partition("=")
        if not sep:
            raise ConfigError(f"--field expects TAG=FIELD, got {item!r}")
        fields[tag] = field
    return fields


def cmd_compare(args):
    qrels = _qrels(args)
    baseline = read_run(args.baseline)
    runs = [read_run(p) for p in args.runs]
    report = compare_runs(runs, baseline, qrels, fields=_parse_fields(args.field))
    text = report.to_text()
    if args.text:
        atomic_write_text(args.text, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        atomic_write_text(args.csv, report.to_csv())


def cmd_delta(args):
    qrels = _qrels(args)
    rows = per_query_delta(read_run(args.run_a), read_run(args.run_b), qrels, args.metric)
    text = delta_csv(rows)
    if args.output:
        atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)


def cmd_optimize(args):
    config = load_config(args.config)
    qrels_path = config.path("qrels")
    if not qrels_path:
        raise ConfigError("optimize needs 'qrels' in the config")
    qrels = read_qrels(qrels_path, config.path("strata"))
    resources = load_resources(config)
    if resources.qrels is None:
        resources.qrels = qrels
    index = load_or_build_index(config)
    facets = tuple(f.strip() for f in args.facets.split(",")) if args.facets else WeightGrid().facets
    grid = WeightGrid(step=args.step, facets=facets)

    def objective(weights):
        return evaluate_weights(weights, resources.topics, index, qrels, config, resources)

    result = hill_climb(objective, grid, seed=config.seed if args.seed is None else args.seed,
                        epochs=args.epochs, workers=_accel.worker_count(1))
    atomic_write_text(args.weights_out, format_weights(result.best_weights))
    if args.trace_out:
        atomic_write_text(args.trace_out, result.to_csv())
    log.info("best mean infNDCG %.4f with %r", result.best_score, result.best_weights)


def cmd_train_ltr(args):
    config = load_config(args.config)
    index = load_or_build_index(config)
    model = train_ltr(config, index)
    model.save(args.output)
    log.info("trained on %s pairs, accuracy %s", model.metadata["pairs"], model.metadata["train_accuracy"])


def build_parser():
    parser = argparse.ArgumentParser(prog="cdsbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist the index for a config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="index file (default: the config's 'index' path)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("run", help="execute a pipeline config into a run file")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_run)

    def add_qrels(p):
        p.add_argument("--qrels", required=True)
        p.add_argument("--strata", help="pool sizes per stratum; omit for fully judged qrels")

    p = sub.add_parser("evaluate", help="metrics for one run")
    p.add_argument("run")
    add_qrels(p)
    p.add_argument("--per-topic", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="significance-marked comparison against a baseline")
    p.add_argument("baseline")
    p.add_argument("runs", nargs="+")
    add_qrels(p)
    p.add_argument("--field", action="append", metavar="TAG=FIELD", help="topic field label for a run tag")
    p.add_argument("--text", help="write the aligned text report here instead of stdout")
    p.add_argument("--csv", help="also write the report as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("delta", help="per-topic metric differences run_a - run_b as CSV")
    p.add_argument("run_a")
    p.add_argument("run_b")
    add_qrels(p)
    p.add_argument("--metric", default="infNDCG")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("optimize", help="hill-climb facet weights for a config")
    p.add_argument("config")
    p.add_argument("--weights-out", required=True)
    p.add_argument("--trace-out")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--facets", help="comma-separated facets to tune (default: title,abstract,body,mesh,concepts)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("train-ltr", help="train the linear re-ranker on prior-year data")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train_ltr)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except EvaluationError as exc:
        print(f"cdsbench: evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVALUATION
    except (FormatError, ConfigError, BuildError, OSError) as exc:
        print(f"cdsbench: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
