"""Training loop, dev evaluation and segmentation helpers."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from .config import TrainConfig
from .corpus import (
    Vocabulary,
    load_corpus,
    load_embeddings,
    make_batches,
    segment_from_labels,
    split_words,
)
from .errors import ConfigError, TrainingError
from .evaluation import Stopwatch, f1_score, throughput
from .model import Model
from .optim import AdamConfig, AdamState, adam_step

log = logging.getLogger(__name__)

INIT_STREAM = 0
DROPOUT_STREAM = 2

BEST_NAME = "best.ckpt"
LAST_NAME = "last.ckpt"
LOG_NAME = "train.log"


def init_rng(seed):
    return np.random.default_rng([seed, INIT_STREAM])


def dropout_rng(seed, epoch):
    return np.random.default_rng([seed, DROPOUT_STREAM, epoch])


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    precision: float
    recall: float
    f1: float
    speed: float

    def line(self):
        return (
            f"{self.epoch}\t{self.loss!r}\t{self.precision!r}\t{self.recall!r}"
            f"\t{self.f1!r}\t{self.speed:.2f}"
        )


@dataclass
class TrainResult:
    history: list
    best_f: float
    best_epoch: int
    checkpoint_dir: Path
    stopped_early: bool


def gold_line(sentence, labels):
    return " ".join(segment_from_labels(sentence, labels))


def segment_text(model, vocab, line):
    """Segment one raw line; whitespace in the input is ignored."""
    sentence = "".join(split_words(line))
    if not sentence:
        return ""
    labels = model.predict(vocab.encode(sentence))
    return " ".join(segment_from_labels(sentence, labels))


def evaluate(model, vocab, pairs):
    """Dev report for ``(sentence, gold labels)`` pairs.

    Goes through the same text path as the ``segment`` and ``eval``
    commands so both produce identical numbers.
    """
    gold = [gold_line(s, y) for s, y in pairs]
    pred = [segment_text(model, vocab, line) for line in gold]
    return f1_score(gold, pred)


def split_dev(cfg, train_pairs):
    if cfg.dev:
        return train_pairs, load_corpus(cfg.dev)
    if cfg.dev_holdout <= 0:
        raise ConfigError("no dev corpus given and dev_holdout is 0")
    if len(train_pairs) <= cfg.dev_holdout:
        raise ConfigError(
            f"training corpus has {len(train_pairs)} sentences; cannot hold out {cfg.dev_holdout}"
        )
    return train_pairs[: -cfg.dev_holdout], train_pairs[-cfg.dev_holdout :]


def build_model(cfg, vocab, rng):
    embedding = None
    if cfg.embeddings:
        loaded = load_embeddings(cfg.embeddings, vocab, cfg.n, rng)
        log.info("embeddings: %d of %d characters found (hit rate %.3f)",
                 loaded.hits, len(vocab) - 2, loaded.hit_rate)
        embedding = loaded.table
    return Model.create(cfg.conv(), len(vocab), rng, embedding)


def prepare_checkpoint_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"checkpoint directory {path} is not writable: {exc}") from None
    return path


def train(cfg: TrainConfig, emit=print):
    """Run the full training procedure described by ``cfg``.

    Writes ``last.ckpt`` every epoch, ``best.ckpt`` whenever dev F improves,
    and ``train.log`` with one tab-separated line per epoch (epoch, mean
    per-character loss, P, R, F, sentences/s). ``emit`` receives the same
    lines.
    """
    out_dir = prepare_checkpoint_dir(cfg.checkpoint_dir)
    if not cfg.train:
        raise ConfigError("no training corpus configured (key 'train')")
    train_pairs, dev_pairs = split_dev(cfg, load_corpus(cfg.train))
    if not train_pairs:
        raise ConfigError("training corpus is empty")

    vocab = Vocabulary.from_sentences(s for s, _ in train_pairs)
    model = build_model(cfg, vocab, init_rng(cfg.seed))
    data = [(vocab.encode(s), y) for s, y in train_pairs]
    n_chars = sum(len(s) for s, _ in train_pairs)

    adam_cfg = AdamConfig(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    state = AdamState.zeros_like(model.params)
    frozen = ("embedding",) if cfg.freeze_embeddings else ()
    if frozen:
        del state.m["embedding"], state.v["embedding"]

    history = []
    best_f = None
    best_epoch = 0
    stale = 0
    stopped_early = False
    log_path = out_dir / LOG_NAME
    log_path.write_text("")

    def snapshot(epoch, best):
        return ckpt_io.Checkpoint(cfg, vocab, model.params, state, epoch, best)

    for epoch in range(1, cfg.ep + 1):
        batches = make_batches(data, cfg.bs, cfg.seed, epoch, cfg.sort_by_length)
        rng = dropout_rng(cfg.seed, epoch)
        total = 0.0
        clock = Stopwatch()
        for index, batch in enumerate(batches):
            with clock:
                loss, grads = model.batch_loss_and_grads(batch, rng)
                if not math.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss {loss} in epoch {epoch}, batch {index} "
                        f"(sentence lengths {batch.lengths.tolist()})"
                    )
                try:
                    adam_step(model.params, grads, state, adam_cfg, frozen)
                except TrainingError as exc:
                    raise TrainingError(f"epoch {epoch}, batch {index}: {exc}") from None
            total += loss

        report = evaluate(model, vocab, dev_pairs)
        record = EpochRecord(
            epoch,
            total / n_chars,
            report.precision,
            report.recall,
            report.f1,
            throughput(len(data), clock.elapsed),
        )
        history.append(record)
        with log_path.open("a", encoding="utf-8") as fh:
            fh.write(record.line() + "\n")
        emit(record.line())

        improved = best_f is None or report.f1 > best_f
        if improved:
            best_f, best_epoch, stale = report.f1, epoch, 0
            ckpt_io.save(snapshot(epoch, best_f), out_dir / BEST_NAME)
        else:
            stale += 1
        ckpt_io.save(snapshot(epoch, best_f), out_dir / LAST_NAME)
        if cfg.patience and stale >= cfg.patience:
            stopped_early = True
            break

    if cfg.ep == 0:
        ckpt_io.save(snapshot(0, None), out_dir / LAST_NAME)
    return TrainResult(history, best_f, best_epoch, out_dir, stopped_early)


def load_model(path):
    ck = ckpt_io.load(path)
    return Model(ck.config.conv(), ck.params), ck


def segment_lines(model, vocab, lines):
    return [segment_text(model, vocab, line) for line in lines]

