"""Command-line interface.

Subcommands:
  train      run one experiment per the given config
  eval       evaluate serialized weights on a dataset
  gradcheck  finite-difference check of the analytic gradients
  census     component/compute accounting table for all architectures
  compare    run all five architectures with one config, combined table
"""

from __future__ import annotations

import argparse
import sys

from .cells import architectures, census_table, get_cell, load_params
from .data import RESHAPE_MODES
from .gradcheck import check_cell
from .harness import (
    ExperimentConfig,
    RunRecord,
    evaluate,
    load_datasets,
    run_experiment,
    _metrics_from_cm,
)
from .linalg import GATE_FNS


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", default="litelstm", choices=architectures())
    p.add_argument("--dataset", default="mnist", choices=("mnist", "intrusion_csv"))
    p.add_argument("--hidden", type=int, default=100, help="hidden state size n")
    p.add_argument("--reshape", default="rows28x28", choices=RESHAPE_MODES)
    p.add_argument("--batch-size", type=int, default=None,
                   help="default 128 for mnist, 32 for intrusion_csv")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--gate", default="logistic", choices=GATE_FNS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip-norm", type=float, default=None)
    p.add_argument("--bptt-truncate", type=int, default=None,
                   help="limit the backward pass to the last K steps")
    p.add_argument("--data-dir", default=None, help="directory with the IDX files")
    p.add_argument("--csv", default=None, help="intrusion feature CSV path")
    p.add_argument("--schema", default=None, help="intrusion schema JSON path")
    p.add_argument("--window", type=int, default=None, help="rows per intrusion window")
    p.add_argument("--label-mode", default="binary", choices=("binary", "multiclass"))
    p.add_argument("--limit-train", type=int, default=None)
    p.add_argument("--limit-test", type=int, default=None)
    p.add_argument("--out", default="runs", help="output directory for records/weights")


def _config_from_args(args, arch: str | None = None) -> ExperimentConfig:
    return ExperimentConfig(
        architecture=arch or args.arch,
        dataset=args.dataset,
        hidden_size=args.hidden,
        reshape=args.reshape,
        window=args.window,
        label_mode=args.label_mode,
        batch_size=args.batch_size,
        epochs=args.epochs,
        lr=args.lr,
        beta1=args.beta1,
        beta2=args.beta2,
        eps=args.eps,
        gate_fn=args.gate,
        seed=args.seed,
        clip_norm=args.clip_norm,
        bptt_truncate=args.bptt_truncate,
        data_dir=args.data_dir,
        csv_path=args.csv,
        schema_path=args.schema,
        out_dir=args.out,
        limit_train=args.limit_train,
        limit_test=args.limit_test,
    )


def _print_record(rec: RunRecord) -> None:
    print(rec.final.format_table(f"{rec.arch} on {rec.dataset} [{rec.config_hash}]"))
    print(f"  train time  : {rec.time_train_s / 60:7.2f} min")
    print(f"  total time  : {rec.time_total_s / 60:7.2f} min")


def cmd_train(args) -> int:
    rec = run_experiment(_config_from_args(args))
    _print_record(rec)
    return 0


def cmd_eval(args) -> int:
    params, head = load_params(args.weights)
    if not head:
        print("weights file carries no classifier head; cannot evaluate", file=sys.stderr)
        return 2
    cfg = _config_from_args(args, arch=params.arch)
    cfg.hidden_size = params.n
    _, test = load_datasets(cfg)
    cell = get_cell(params.arch)
    cm = evaluate(cell, params, head, test)
    rep = _metrics_from_cm(cm, test, 0.0, sum(a.size for a in params.arrays.values()))
    print(rep.format_table(f"{params.arch} weights {args.weights} on {cfg.dataset} test split"))
    return 0


def cmd_gradcheck(args) -> int:
    archs = [args.arch] if args.arch else list(architectures())
    ok = True
    for arch in archs:
        report = check_cell(
            arch,
            n=args.hidden,
            m=args.input_size,
            T=args.timesteps,
            seeds=range(args.seeds),
            gate_fn=args.gate,
        )
        print(report.format())
        print()
        ok = ok and report.passed
    return 0 if ok else 1


def cmd_census(args) -> int:
    print(census_table(args.hidden, args.input_size))
    return 0


def cmd_compare(args) -> int:
    records = []
    for arch in architectures():
        print(f"== {arch}", flush=True)
        rec = run_experiment(_config_from_args(args, arch=arch))
        _print_record(rec)
        records.append(rec)

    cols = [r.arch for r in records]
    width = max(len(c) for c in cols) + 2
    print("\ncombined results")
    print("metric".ljust(16) + "".join(c.rjust(width) for c in cols))
    rows = [
        ("time_train (m)", [f"{r.time_train_s / 60:.2f}" for r in records]),
        ("time_total (m)", [f"{r.time_total_s / 60:.2f}" for r in records]),
        ("parameters", [str(r.param_count) for r in records]),
        ("accuracy (%)", [f"{r.final.accuracy:.2f}" for r in records]),
    ]
    for label, values in rows:
        print(label.ljust(16) + "".join(v.rjust(width) for v in values))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rnnlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training experiment")
    _add_experiment_flags(p_train)
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate serialized weights")
    p_eval.add_argument("--weights", required=True)
    _add_experiment_flags(p_eval)
    p_eval.set_defaults(fn=cmd_eval)

    p_grad = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p_grad.add_argument("--arch", default=None, choices=architectures())
    p_grad.add_argument("--hidden", type=int, default=4)
    p_grad.add_argument("--input-size", type=int, default=3)
    p_grad.add_argument("--timesteps", type=int, default=6)
    p_grad.add_argument("--seeds", type=int, default=20)
    p_grad.add_argument("--gate", default="logistic", choices=GATE_FNS)
    p_grad.set_defaults(fn=cmd_gradcheck)

    p_census = sub.add_parser("census", help="component accounting table")
    p_census.add_argument("--hidden", type=int, default=100)
    p_census.add_argument("--input-size", "--input", dest="input_size", type=int, default=28)
    p_census.set_defaults(fn=cmd_census)

    p_cmp = sub.add_parser("compare", help="run all architectures with one config")
    _add_experiment_flags(p_cmp)
    p_cmp.set_defaults(fn=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.fn(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
