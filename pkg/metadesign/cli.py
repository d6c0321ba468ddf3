"""
Command line entry point. Every subcommand maps its flags onto a data_dict
and calls the registered action; the action's result is printed as JSON.

Exit status: 0 on success, 2 for rejected input or a missing file, 1 for
anything unexpected.
"""
import argparse
import json
import logging
import sys

from metadesign import __VERSION__
from metadesign import helpers as h
from metadesign.config import load_config
from metadesign.design.program import ProgramParseError, ProgramSyntaxError
from metadesign.design.space import GrammarError
from metadesign.errors import ObjectNotFound, ValidationError
from metadesign.interpreter.engine import BudgetError
from metadesign.plugin import MetaDesignPlugin
from metadesign.policy.network import PolicyError
from metadesign.problems.instance import ProblemError

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)-5.5s [%(name)s] %(message)s"

USER_ERRORS = (ValidationError, ObjectNotFound, GrammarError, ProgramSyntaxError, ProgramParseError,
               ProblemError, PolicyError, BudgetError)

# subcommand -> (action, {flag dest: data_dict key})
COMMANDS = {
    "train": ("design_train", {
        "problem": "problem", "dims": "dims", "epochs": "epochs", "batch": "batch_size",
        "budget": "train_budget", "seed": "master_seed", "pop_size": "pop_size",
        "runs_per_instance": "runs_per_instance", "lr": "lr", "embed": "embed",
        "allow_events": "allow_events", "test_dims": "test_dims", "runs": "runs",
        "test_budget": "budget", "infer_samples": "infer_samples",
    }),
    "continual": ("design_continual", {
        "tasks": "tasks", "epochs": "epochs", "batch": "batch_size", "budget": "train_budget",
        "seed": "master_seed", "pop_size": "pop_size", "runs_per_instance": "runs_per_instance",
        "lr": "lr", "ewc_lambda": "ewc_lambda", "fisher_samples": "fisher_samples",
        "infer_samples": "infer_samples", "allow_events": "allow_events",
    }),
    "infer": ("design_infer", {
        "checkpoint": "checkpoint", "problem": "problem", "dims": "dims", "samples": "samples",
        "seed": "seed", "budget": "train_budget",
    }),
    "eval": ("program_eval", {
        "program": "program_file", "text": "program", "problem": "problem", "dims": "dims",
        "runs": "runs", "budget": "budget", "seed": "seed", "pop_size": "pop_size",
        "protocol": "protocol", "trace": "trace",
    }),
    "bench": ("baseline_bench", {
        "problems": "problems", "dims": "dims", "program": "program_file", "text": "program",
        "published": "published", "baselines": "baselines", "runs": "runs", "budget": "budget",
        "seed": "seed", "pop_size": "pop_size", "protocol": "protocol", "eta_c": "eta_c",
        "eta_m": "eta_m",
    }),
    "features": ("problem_features", {
        "problem": "problem", "seed": "seed", "trials": "trials", "wall_clock": "wall_clock",
    }),
    "tune": ("ga_tune", {
        "problem": "problem", "budget": "budget", "pop_size": "pop_size", "seeds": "seeds",
        "seed": "seed", "extended": "extended",
    }),
}


def common_flags():
    """
    Options accepted before or after the subcommand. Defaults are suppressed
    so a value given in one place is not reset by the other parser.
    """
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="ini file with [app:main] metadesign.* settings")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--workers", type=int, help="parallel interpreter runs")
    common.add_argument("--zero-wall-ms", action="store_true",
                        help="write 0 for wall times so outputs are byte-identical")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser():
    common = common_flags()
    parser = argparse.ArgumentParser(prog="metadesign", description="Design metaheuristics with a learned policy",
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__VERSION__}")
    sub = parser.add_subparsers(dest="command", required=True)
    problem_help = f"problem key, family one of: {', '.join(h.problem_keys())}"

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    train = add_parser("train", help="train a policy on one task")
    train.add_argument("--problem", help=problem_help)
    train.add_argument("--dims", type=int, nargs="+")
    _training_flags(train)
    train.add_argument("--embed", action="store_true", default=None, help="feed the problem factors")
    train.add_argument("--test-dims", type=int, nargs="+")
    train.add_argument("--runs", type=int)
    train.add_argument("--test-budget", type=int)

    continual = add_parser("continual", help="train one policy over a task sequence")
    continual.add_argument("--tasks", nargs="+", help="family[+layer...]@dim,dim entries")
    _training_flags(continual)
    continual.add_argument("--ewc-lambda", type=float)
    continual.add_argument("--fisher-samples", type=int)

    infer = add_parser("infer", help="sample programs from a checkpoint")
    infer.add_argument("--checkpoint", required=True)
    infer.add_argument("--problem", help=problem_help)
    infer.add_argument("--dims", type=int, nargs="+")
    infer.add_argument("--samples", type=int)
    infer.add_argument("--seed", type=int)
    infer.add_argument("--budget", type=int)

    ev = add_parser("eval", help="evaluate a program")
    _program_flags(ev)
    ev.add_argument("--problem", nargs="+", help=problem_help)
    _evaluation_flags(ev)
    ev.add_argument("--trace", action="store_true", default=None)

    bench = add_parser("bench", help="compare baselines and programs")
    bench.add_argument("--problems", nargs="+", help=problem_help)
    _program_flags(bench)
    bench.add_argument("--published", nargs="*")
    bench.add_argument("--baselines", nargs="*", type=str.upper, choices=h.baseline_kinds())
    _evaluation_flags(bench)
    bench.add_argument("--eta-c", type=float)
    bench.add_argument("--eta-m", type=float)

    features = add_parser("features", help="landscape factors of a problem")
    features.add_argument("--problem", required=True, help=problem_help)
    features.add_argument("--seed", type=int)
    features.add_argument("--trials", type=int)
    features.add_argument("--wall-clock", action="store_true", default=None)

    export = add_parser("export", help="write the vocabulary or a program as JSON")
    group = export.add_mutually_exclusive_group(required=True)
    group.add_argument("--vocab", action="store_true")
    group.add_argument("--program")

    tune = add_parser("tune", help="grid search of the GA rates")
    tune.add_argument("--problem", required=True, help=problem_help)
    tune.add_argument("--budget", type=int)
    tune.add_argument("--pop-size", type=int)
    tune.add_argument("--seeds", type=int)
    tune.add_argument("--seed", type=int)
    tune.add_argument("--extended", action="store_true", default=None)
    return parser


def _training_flags(parser):
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--pop-size", type=int)
    parser.add_argument("--runs-per-instance", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--infer-samples", type=int)
    parser.add_argument("--allow-events", action="store_true", default=None)


def _program_flags(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--program", help="file with a program in text form")
    group.add_argument("--text", help="program text")


def _evaluation_flags(parser):
    parser.add_argument("--dims", type=int, nargs="+")
    parser.add_argument("--runs", type=int)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--pop-size", type=int)
    parser.add_argument("--protocol", choices=["train", "test"])


def data_dict_from_args(args):
    if args.command == "export":
        if args.vocab:
            return "vocab_export", {}
        return "program_export", {"program_file": args.program}
    action, mapping = COMMANDS[args.command]
    values = vars(args)
    return action, {key: values[dest] for dest, key in mapping.items() if values.get(dest) is not None}


def setup_logging(verbose):
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    if verbose:
        root.setLevel(logging.DEBUG)


def get_action(name):
    try:
        return MetaDesignPlugin().get_actions()[name]
    except KeyError:
        raise ObjectNotFound(f"Action {name} not found")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(getattr(args, "config", None), overrides={
            "output_dir": getattr(args, "output_dir", None),
            "workers": getattr(args, "workers", None),
            "zero_wall_ms": getattr(args, "zero_wall_ms", None),
        })
        setup_logging(getattr(args, "verbose", False))
        action, data_dict = data_dict_from_args(args)
        context = {"config": config, "workers": config.train.workers}
        result = get_action(action)(context, data_dict)
    except USER_ERRORS as e:
        log.critical(f"{args.command} failed: {e}")
        print(f"metadesign {args.command}: {e}", file=sys.stderr)
        return 2
    except Exception:
        log.exception(f"{args.command} failed unexpectedly")
        return 1
    print(json.dumps(result, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
