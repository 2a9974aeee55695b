"""Train the future and past schemes on one corpus and tabulate dev P/R/F.

    python scripts/compare_schemes.py --config my.cfg --out runs/schemes

Every other setting comes from the config file; only ``scheme`` and
``checkpoint_dir`` are overridden per run.
"""

import argparse
import dataclasses
from pathlib import Path

from tcn_cws.config import load_config
from tcn_cws.train import train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default="runs/schemes")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()

    base = load_config(args.config)
    if args.seed is not None:
        base = dataclasses.replace(base, seed=args.seed)
    rows = []
    for scheme in ("past", "future"):
        cfg = dataclasses.replace(base, scheme=scheme,
                                  checkpoint_dir=str(Path(args.out) / scheme))
        result = train(cfg, emit=lambda line, s=scheme: print(f"[{s}] {line}", flush=True))
        best = result.history[result.best_epoch - 1]
        rows.append((scheme, best.precision, best.recall, best.f1, best.epoch))

    print()
    print(f"{'scheme':<8} {'P':>7} {'R':>7} {'F':>7}  epoch")
    for scheme, p, r, f, epoch in rows:
        print(f"{scheme:<8} {p * 100:7.2f} {r * 100:7.2f} {f * 100:7.2f}  {epoch}")


if __name__ == "__main__":
    main()
