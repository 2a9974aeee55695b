"""Command line entry point: ``train``, ``segment``, ``eval``, ``inspect``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(corpus, checkpoint or evaluation input), 3 training failure.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import checkpoint as ckpt_io
from .config import TrainConfig, dump_config, load_config
from .corpus import read_lines
from .errors import (
    CheckpointError,
    ConfigError,
    EvaluationError,
    IngestionError,
    TrainingError,
    VocabularyError,
)
from .evaluation import f1_score
from .model import param_shapes
from .train import load_model, segment_lines, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRAINING = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="tcn-cws", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("segment", help="segment raw text with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("eval", help="score a segmentation against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)

    p = sub.add_parser("inspect", help="summarize a checkpoint")
    p.add_argument("--model", required=True)
    return parser


def cmd_train(args, out):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    print("epoch\tloss\tP\tR\tF\tsentences/s", file=out)
    result = train(cfg, emit=lambda line: print(line, file=out, flush=True))
    best = "none" if result.best_f is None else repr(result.best_f)
    print(f"best F={best} at epoch {result.best_epoch}", file=out)
    return EXIT_OK


def cmd_segment(args, out):
    model, ck = load_model(args.model)
    lines = read_lines(args.input)
    result = segment_lines(model, ck.vocab, lines)
    Path(args.output).write_text("".join(line + "\n" for line in result), encoding="utf-8")
    return EXIT_OK


def cmd_eval(args, out):
    report = f1_score(read_lines(args.gold), read_lines(args.pred))
    print(report.human(), file=out)
    print(report.machine_line(), file=out)
    return EXIT_OK


def inspect_text(ck):
    lines = ["config:"]
    lines += ["  " + line for line in dump_config(ck.config).splitlines()]
    lines.append(f"vocabulary size: {len(ck.vocab)}")
    lines.append("tensors:")
    total = 0
    for name, shape in param_shapes(ck.config, len(ck.vocab)).items():
        size = ck.params[name].size
        total += size
        lines.append(f"  {name:<24} {'x'.join(map(str, shape)):>12} {size:>10}")
    lines.append(f"total parameters: {total}")
    if ck.adam is not None:
        lines.append(f"optimizer steps: {ck.adam.step}")
    lines.append(f"epoch: {ck.epoch}")
    best = "none" if ck.best_f is None else repr(ck.best_f)
    lines.append(f"best dev F: {best}")
    return "\n".join(lines)


def cmd_inspect(args, out):
    print(inspect_text(ckpt_io.load(args.model)), file=out)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "segment": cmd_segment,
    "eval": cmd_eval,
    "inspect": cmd_inspect,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"training failed: {exc}", file=err)
        return EXIT_TRAINING
    except CheckpointError as exc:
        print(f"load error: {exc}", file=err)
        return EXIT_DATA
    except (IngestionError, EvaluationError, VocabularyError) as exc:
        print(f"data error: {exc}", file=err)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
