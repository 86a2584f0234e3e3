"""Command-line entry point.

One binary with subcommands covering the whole pipeline: ``generate``
synthetic cohorts, ``train`` (optionally with backward member selection),
``evaluate`` under stratified cross-validation, ``predict`` for a single
subject, ``report`` to re-render a saved evaluation, and ``serve`` for
the HTTP prediction service.

Every failure is written to stderr as ``error:<category>:<message>`` and
produces a nonzero exit code (2 for usage errors, 1 otherwise).  All
randomness flows from the single ``--seed`` value through named
substreams, so identical invocations give identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import __version__
from .config import ConfigError, parse_bool, read_config
from .data import (
    DEFAULT_GENERATOR_PARAMS,
    FEATURE_COLUMNS,
    DatasetError,
    FeatureVector,
    GeneratorParams,
    InvalidParamsError,
    binarize_fit,
    check_feature_value,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .ensemble import (
    ModelFormatError,
    backward_search,
    ensemble_predict,
    fit_ensemble,
    load_model,
    save_model,
)
from .evaluation import (
    ReportFormatError,
    cross_validate,
    emit_roc,
    load_report,
    report_table,
    save_report,
)
from .learners import DEFAULT_KINDS
from .learners.base import as_kind
from .learners.params import Hyperparams
from .metrics import SingleClassError


class CliError(Exception):
    """Operator-facing failure with a machine-parseable category."""

    def __init__(self, category: str, message: str):
        self.category = category
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad flags; raise instead so main()
    # can emit the standard error prefix and return an exit code.
    def error(self, message):
        raise CliError("usage", message)


# Config keys consumed by the CLI itself; everything else in a --config
# file is handed to Hyperparams.from_config (which rejects unknowns).
_RUN_KEYS = frozenset(
    {
        "data",
        "k",
        "select",
        "candidates",
        "binarize_fit",
        "out.model",
        "out.report",
        "out.roc",
        "out.json",
    }
)

_DEFAULT_K = 10


@dataclasses.dataclass(frozen=True)
class RunSettings:
    """Merged view of one train/evaluate invocation (flags override file)."""

    data: str | None
    k: int
    seed: int
    select: bool
    candidates: tuple
    binarize: float | None
    out_model: str | None
    out_report: str | None
    out_roc: str | None
    out_json: str | None
    hp: Hyperparams


def _parse_candidates(text: str) -> tuple:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise CliError("config", "candidates list is empty")
    try:
        kinds = tuple(as_kind(name) for name in names)
    except ValueError as exc:
        raise CliError("config", str(exc)) from exc
    if len(set(kinds)) != len(kinds):
        raise CliError("config", "candidate kinds must be distinct")
    return kinds


def _settings(args) -> RunSettings:
    items = read_config(args.config) if getattr(args, "config", None) else {}
    run_items = {k: v for k, v in items.items() if k in _RUN_KEYS}
    hp_items = {k: v for k, v in items.items() if k not in _RUN_KEYS}
    try:
        hp = Hyperparams.from_config(hp_items)
    except InvalidParamsError as exc:
        raise CliError("config", str(exc)) from exc

    seed = args.seed if args.seed is not None else hp.seed
    hp = dataclasses.replace(hp, seed=seed)

    if args.k is not None:
        k = args.k
    else:
        try:
            k = int(run_items.get("k", _DEFAULT_K))
        except ValueError:
            raise CliError("config", f"k must be an integer, got {run_items['k']!r}") from None

    select = bool(getattr(args, "select", False))
    if not select and "select" in run_items:
        select = parse_bool("select", run_items["select"])

    if getattr(args, "candidates", None):
        candidates = _parse_candidates(args.candidates)
    elif "candidates" in run_items:
        candidates = _parse_candidates(run_items["candidates"])
    else:
        candidates = DEFAULT_KINDS

    binarize = getattr(args, "binarize_fit", None)
    if binarize is None and "binarize_fit" in run_items:
        try:
            binarize = float(run_items["binarize_fit"])
        except ValueError:
            raise CliError(
                "config", f"binarize_fit must be a number, got {run_items['binarize_fit']!r}"
            ) from None

    return RunSettings(
        data=getattr(args, "data", None) or run_items.get("data"),
        k=k,
        seed=seed,
        select=select,
        candidates=candidates,
        binarize=binarize,
        out_model=getattr(args, "out", None) or run_items.get("out.model"),
        out_report=getattr(args, "report_out", None) or run_items.get("out.report"),
        out_roc=getattr(args, "roc_out", None) or run_items.get("out.roc"),
        out_json=getattr(args, "json_out", None) or run_items.get("out.json"),
        hp=hp,
    )


def _load_run_dataset(s: RunSettings):
    if s.data is None:
        raise CliError("usage", "no dataset given (use --data or a config 'data' key)")
    ds = load_dataset(s.data)
    if s.binarize is not None:
        ds = binarize_fit(ds, s.binarize)
    return ds


def cmd_generate(args) -> int:
    if args.n < 1:
        raise CliError("usage", f"--n must be >= 1, got {args.n}")
    params = DEFAULT_GENERATOR_PARAMS
    if args.params:
        params = GeneratorParams.from_config(read_config(args.params))
    ds = generate_synthetic(args.n, args.seed, params)
    save_dataset(ds, args.out)
    print(f"rows={ds.n} prevalence={ds.prevalence:.6f}")
    return 0


def cmd_train(args) -> int:
    s = _settings(args)
    if s.out_model is None:
        raise CliError("usage", "no model output path (use --out or a config 'out.model' key)")
    ds = _load_run_dataset(s)
    negatives, positives = ds.class_counts()
    if negatives == 0 or positives == 0:
        print(
            "warning:data:dataset contains a single class; "
            "members fall back to constant scorers",
            file=sys.stderr,
        )
    if s.select:
        if s.k < 2:
            raise CliError("usage", f"--k must be >= 2, got {s.k}")
        model, trace = backward_search(
            s.candidates, ds, s.hp, k=s.k, seed=s.seed, fit_binarize_threshold=s.binarize
        )
        print(f"selection: initial cv_auc={trace.initial_criterion:.6f}")
        for kind_value, criterion in trace.steps:
            print(f"selection: removed {kind_value} -> cv_auc={criterion:.6f}")
        print("selection: kept " + ",".join(trace.final_members))
    else:
        model = fit_ensemble(s.candidates, ds, s.hp, fit_binarize_threshold=s.binarize)
    for member in model.members:
        if member.warning:
            print(f"warning:train:{member.kind.value}: {member.warning}", file=sys.stderr)
    save_model(model, s.out_model)
    print(
        f"model saved to {s.out_model} "
        f"(members: {', '.join(kind.value for kind in model.kinds)})"
    )
    return 0


def cmd_evaluate(args) -> int:
    s = _settings(args)
    if s.k < 2:
        raise CliError("usage", f"--k must be >= 2, got {s.k}")
    ds = _load_run_dataset(s)
    report = cross_validate(s.candidates, ds, s.hp, k=s.k, seed=s.seed, select=s.select)
    table = report_table(report)
    sys.stdout.write(table)
    if s.out_report:
        with open(s.out_report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table)
    if s.out_roc:
        emit_roc(report, s.out_roc)
    if s.out_json:
        save_report(report, s.out_json)
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    values = {
        "fit_result": args.fit,
        "bmi": args.bmi,
        "age": args.age,
        "diabetes": args.diabetes,
        "smoking": args.smoking,
    }
    for name in FEATURE_COLUMNS:
        message = check_feature_value(name, values[name])
        if message is not None:
            raise CliError("input", message)
    x = FeatureVector(
        fit_result=args.fit,
        bmi=args.bmi,
        age=args.age,
        diabetes=int(args.diabetes),
        smoking=int(args.smoking),
    )
    pred = ensemble_predict(model, x)
    print(f"probability={pred.soft_score!r} label={pred.majority_label}")
    for kind, vote, score in zip(model.kinds, pred.votes, pred.member_scores):
        print(f"vote kind={kind.value} vote={vote} score={float(score)!r}")
    return 0


def cmd_report(args) -> int:
    report = load_report(args.json)
    table = report_table(report)
    sys.stdout.write(table)
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table)
    if args.roc_out:
        emit_roc(report, args.roc_out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model = load_model(args.model)
    app = create_app(ensemble=model)
    print(
        f"serving ensemble model (format {model.version}, "
        f"members: {', '.join(kind.value for kind in model.kinds)}) "
        f"on http://{args.host}:{args.port}",
        flush=True,
    )
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        if code:
            raise CliError("server", f"server exited with status {code}") from exc
    return 0


def _add_run_flags(p) -> None:
    p.add_argument("--data", help="dataset CSV path")
    p.add_argument("--config", help="key=value config file (run settings and hyperparameters)")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p.add_argument("--k", type=int, default=None, help=f"CV folds (default {_DEFAULT_K})")
    p.add_argument(
        "--select",
        action="store_true",
        help="prune members by backward search on CV AUC before fitting",
    )
    p.add_argument(
        "--candidates",
        help="comma-separated classifier kinds (default: the six standard members)",
    )
    p.add_argument(
        "--binarize-fit",
        dest="binarize_fit",
        type=float,
        default=None,
        metavar="THRESHOLD",
        help=(
            "replace fit_result with a 0/1 indicator at this cutoff before "
            "training and at prediction time (a common lab cutoff is 100)"
        ),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="crcscreen",
        description=(
            "Colorectal-cancer screening risk ensemble: synthetic cohorts, "
            "training with optional member selection, cross-validated "
            "evaluation, single-subject prediction, and an HTTP service."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--n", type=int, required=True, help="number of subjects")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--params", help="generator params config file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train an ensemble and save the model file")
    _add_run_flags(p)
    p.add_argument("--out", help="model output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="stratified k-fold cross-validation report")
    _add_run_flags(p)
    p.add_argument("--report-out", dest="report_out", help="also write the text report here")
    p.add_argument("--roc-out", dest="roc_out", help="write pooled ROC curves as CSV")
    p.add_argument("--json-out", dest="json_out", help="write the full report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="score one subject with a saved model")
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--fit", type=float, required=True, help="FIT result (ng/mL, >= 0)")
    p.add_argument("--bmi", type=float, required=True, help="body-mass index (10-80)")
    p.add_argument("--age", type=float, required=True, help="age in years (18-120)")
    p.add_argument("--diabetes", type=float, required=True, help="diabetes diagnosis (0 or 1)")
    p.add_argument("--smoking", type=float, required=True, help="smoking history (0 or 1)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", help="re-render a saved evaluation report")
    p.add_argument("--json", required=True, help="report JSON written by evaluate --json-out")
    p.add_argument("--report-out", dest="report_out", help="also write the text report here")
    p.add_argument("--roc-out", dest="roc_out", help="write the stored ROC curves as CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--host", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=8000, help="bind port (default 8000)")
    p.set_defaults(func=cmd_serve)

    return parser


def _fail(category: str, exc) -> int:
    print(f"error:{category}:{exc}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error:{exc.category}:{exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version print and stop
        return exc.code if isinstance(exc.code, int) else 0
    if not hasattr(args, "func"):
        print("error:usage:a subcommand is required (see --help)", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error:{exc.category}:{exc}", file=sys.stderr)
        return 2 if exc.category == "usage" else 1
    except ConfigError as exc:
        return _fail("config", exc)
    except InvalidParamsError as exc:
        return _fail("config", exc)
    except (DatasetError, SingleClassError) as exc:
        return _fail("data", exc)
    except ModelFormatError as exc:
        return _fail("model", exc)
    except ReportFormatError as exc:
        return _fail("report", exc)
    except OSError as exc:
        return _fail("io", exc)
    except ValueError as exc:
        return _fail("usage", exc)


def run() -> None:
    raise SystemExit(main())
