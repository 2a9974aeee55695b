"""Write a small synthetic whitespace-segmented corpus.

Sentences are drawn from a fixed lexicon of one- to four-character words,
so the segmentation is learnable and the output is reproducible.

    python scripts/make_fixture.py tests/data/overfit.txt --sentences 50
"""

import argparse
import random

LEXICON = (
    "我 你 他 的 了 在 是 和 也 都 很 "
    "我们 你们 他们 今天 明天 学习 中文 喜欢 朋友 老师 学生 北京 上海 "
    "城市 天气 电脑 音乐 电影 工作 公司 时间 问题 研究 发展 经济 社会 "
    "图书馆 计算机 大学生 博物馆 研究生 "
    "自然语言 人工智能 中华民族"
).split()


def sentence(rng, lo=3, hi=7):
    return " ".join(rng.choice(LEXICON) for _ in range(rng.randint(lo, hi)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output")
    ap.add_argument("--sentences", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    with open(args.output, "w", encoding="utf-8") as fh:
        for _ in range(args.sentences):
            fh.write(sentence(rng) + "\n")


if __name__ == "__main__":
    main()
