"""Command-line entry point.

Every flag can also be set through an environment variable named
``P2NIA_<FLAG>`` (upper case, dashes as underscores), e.g. ``P2NIA_SEED=3``.
Explicit flags win over the environment.

Exit codes: 0 success, 1 usage error, 2 data error, 3 mechanism error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from pathlib import Path

from . import bias
from .data import ingest_csv, load_schema, save_schema, split, write_csv
from .desk import make_desk_data
from .errors import DataError, MechanismError, P2niaError
from .experiments import SweepConfig, run_sweep
from .metrics import METRICS
from .model import load_model, predict, save_model, train
from .protocol import (AuditRequest, BlackBoxConfig, auditor_evaluate, blackbox_audit, load_release,
                       load_request, platform_respond, save_release, save_request)

ENV_PREFIX = "P2NIA_"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MECHANISM = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _epsilon(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("epsilon must be > 0 (use 'inf' for no noise)")
    return value


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _apply_env(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        if not action.option_strings or action.dest in ("help",):
            continue
        env = ENV_PREFIX + action.dest.upper()
        if env in os.environ:
            raw = os.environ[env]
            action.default = action.type(raw) if action.type else raw
            action.required = False


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="p2nia", description="Privacy-preserving non-iterative fairness audits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = add("make-desk-data", "generate the bundled census-like dataset")
    sp.add_argument("--rows", type=int, default=25_000)
    sp.add_argument("--out", required=True)
    sp.add_argument("--schema-out", required=True)

    sp = add("train", "train the Naive Bayes platform model")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--train-fraction", type=float, default=None,
                    help="train on a seeded split of this fraction instead of all rows")

    sp = add("label", "write model predictions into the dataset")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--schema-out", required=True)

    sp = add("request", "auditor step 1: write an audit request")
    sp.add_argument("--n-prime", type=int, required=True)
    sp.add_argument("--protected", required=True)
    sp.add_argument("--mechanism", choices=("grr", "synth"), default="grr")
    sp.add_argument("--epsilon", type=_epsilon, required=True)
    sp.add_argument("--epsilon-mode", choices=("per-column", "total-split"), default="per-column")
    sp.add_argument("--metrics", type=_names, default=list(METRICS))
    sp.add_argument("--out", required=True)

    sp = add("privatize", "platform steps 2-5: label, privatize and release")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--request", help="request file; overrides the individual request flags")
    sp.add_argument("--mechanism", choices=("grr", "synth"), default="grr")
    sp.add_argument("--epsilon", type=_epsilon, default=None)
    sp.add_argument("--epsilon-mode", choices=("per-column", "total-split"), default="per-column")
    sp.add_argument("--n-prime", type=int, default=None)
    sp.add_argument("--platform-id", default="platform")
    sp.add_argument("--out", required=True, help="release CSV; metadata goes to <out>.meta.json")

    sp = add("audit", "auditor step 6: evaluate a release")
    sp.add_argument("--release", required=True)
    sp.add_argument("--request")
    sp.add_argument("--out", required=True)

    sp = add("blackbox", "baseline audit with uniformly drawn queries")
    sp.add_argument("--schema", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--queries", type=int, default=5000)
    sp.add_argument("--out", required=True)

    sp = add("bias-demo", "population-bias construction over a grid of alpha")
    sp.add_argument("--alphas", type=_floats, default=[0, 0.05, 0.1, 0.13, 0.2, 0.3, 0.5, 0.75, 1.0])
    sp.add_argument("--n", type=int, default=200_000)
    sp.add_argument("--out", required=True)

    sp = add("sweep", "repeated audits over a sample-size or epsilon grid")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--model", help="use this model instead of training on the split")
    sp.add_argument("--axis", choices=("sample_size", "epsilon"), required=True)
    sp.add_argument("--grid", type=_floats, required=True)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--mechanisms", type=_names, default=["grr", "synth", "blackbox"])
    sp.add_argument("--metrics", type=_names, default=list(METRICS))
    sp.add_argument("--epsilon", type=_epsilon, default=10.0)
    sp.add_argument("--epsilon-mode", choices=("per-column", "total-split"), default="per-column")
    sp.add_argument("--n-prime", type=int, default=5000)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True)

    for sp in sub.choices.values():
        _apply_env(sp)
    return p


def _cmd_make_desk_data(args):
    d = make_desk_data(args.rows, args.seed)
    write_csv(d, args.out)
    save_schema(d.schema, args.schema_out)


def _cmd_train(args):
    d = ingest_csv(args.dataset, args.schema)
    if args.train_fraction is not None:
        d, _ = split(d, args.train_fraction, args.seed)
    save_model(train(d), args.out)


def _cmd_label(args):
    labeled = predict(load_model(args.model), ingest_csv(args.dataset, args.schema))
    write_csv(labeled, args.out)
    save_schema(labeled.schema, args.schema_out)


def _cmd_request(args):
    req = AuditRequest(args.n_prime, args.protected, args.epsilon, args.mechanism, tuple(args.metrics),
                       args.epsilon_mode)
    save_request(req, args.out)


def _cmd_privatize(args):
    data = ingest_csv(args.dataset, args.schema)
    if args.request:
        req = load_request(args.request)
    else:
        if args.epsilon is None:
            raise UsageError("privatize: --epsilon is required without --request")
        n_prime = data.n_rows if args.n_prime is None else args.n_prime
        req = AuditRequest(n_prime, data.schema.protected.name, args.epsilon,
                           args.mechanism, epsilon_mode=args.epsilon_mode)
    release = platform_respond(req, data, load_model(args.model), seed=args.seed, platform_id=args.platform_id)
    save_release(release, args.out)


def _cmd_audit(args):
    req = load_request(args.request) if args.request else None
    Path(args.out).write_text(auditor_evaluate(load_release(args.release), req).to_text())


def _cmd_blackbox(args):
    report = blackbox_audit(BlackBoxConfig(args.queries, args.seed), load_schema(args.schema),
                            load_model(args.model))
    Path(args.out).write_text(report.to_text())


def _cmd_bias_demo(args):
    rows = bias.shift_demo(args.alphas, args.n, args.seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "analytic_gap", "empirical_error", "n"])
        for r in rows:
            w.writerow([repr(r["alpha"]), repr(r["analytic_gap"]), repr(r["empirical_error"]), r["n"]])


def _cmd_sweep(args):
    try:
        config = SweepConfig(axis=args.axis, grid=tuple(args.grid), repetitions=args.reps, base_seed=args.seed,
                             mechanisms=tuple(args.mechanisms), metrics=tuple(args.metrics),
                             epsilon=args.epsilon, n_prime=args.n_prime, epsilon_mode=args.epsilon_mode)
    except ValueError as exc:
        raise UsageError(f"sweep: {exc}") from exc
    model = load_model(args.model) if args.model else None
    result = run_sweep(ingest_csv(args.dataset, args.schema), config, model=model, jobs=args.jobs)
    result.write_csv(args.out)


COMMANDS = {
    "make-desk-data": _cmd_make_desk_data, "train": _cmd_train, "label": _cmd_label,
    "request": _cmd_request, "privatize": _cmd_privatize, "audit": _cmd_audit,
    "blackbox": _cmd_blackbox, "bias-demo": _cmd_bias_demo, "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except MechanismError as exc:
        print(f"p2nia {args.command}: mechanism error: {exc}", file=sys.stderr)
        return EXIT_MECHANISM
    except (DataError, OSError) as exc:
        print(f"p2nia {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except P2niaError as exc:
        print(f"p2nia {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
