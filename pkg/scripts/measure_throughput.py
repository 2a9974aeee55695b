"""Time training and inference passes in sentences per second.

    python scripts/measure_throughput.py corpus.txt [--repeats 5] [--n 100 ...]

Uses a freshly initialized model; corpus loading is excluded from timing.
"""

import argparse
import statistics

import numpy as np

from tcn_cws.config import TrainConfig
from tcn_cws.corpus import Vocabulary, load_corpus, make_batches
from tcn_cws.evaluation import Stopwatch, throughput
from tcn_cws.model import Model
from tcn_cws.optim import AdamConfig, AdamState, adam_step


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--ly", type=int, default=4)
    ap.add_argument("--scheme", default="future")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = TrainConfig(n=args.n, fs=args.n, ly=args.ly, scheme=args.scheme, seed=args.seed)
    pairs = load_corpus(args.corpus)
    vocab = Vocabulary.from_sentences(s for s, _ in pairs)
    data = [(vocab.encode(s), y) for s, y in pairs]

    train_speeds, infer_speeds = [], []
    for rep in range(args.repeats):
        rng = np.random.default_rng([args.seed, rep])
        model = Model.create(cfg.conv(), len(vocab), np.random.default_rng(args.seed))
        state = AdamState.zeros_like(model.params)
        batches = make_batches(data, cfg.bs, args.seed)
        clock = Stopwatch()
        with clock:
            for batch in batches:
                _, grads = model.batch_loss_and_grads(batch, rng)
                adam_step(model.params, grads, state, AdamConfig())
        train_speeds.append(throughput(len(data), clock.elapsed))

        clock = Stopwatch()
        with clock:
            for chars, _ in data:
                model.predict(chars)
        infer_speeds.append(throughput(len(data), clock.elapsed))

    for name, speeds in (("train", train_speeds), ("infer", infer_speeds)):
        spread = (max(speeds) - min(speeds)) / statistics.median(speeds)
        print(f"{name}: median {statistics.median(speeds):.1f} sentences/s "
              f"(min {min(speeds):.1f}, max {max(speeds):.1f}, spread {spread:.1%})")


if __name__ == "__main__":
    main()
