"""Corpus reading, BMES labelling, vocabularies, embeddings and batching."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .crf import B, E, LABEL_INDEX, LABELS, M, S
from .errors import ConfigError, IngestionError
from .tensor import DTYPE

UNK = 0
PAD = 1
UNK_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
SHUFFLE_STREAM = 1


def word_labels(length):
    if length == 1:
        return [S]
    return [B] + [M] * (length - 2) + [E]


def labels_from_words(words):
    chars = []
    labels = []
    for w in words:
        chars.extend(w)
        labels.extend(word_labels(len(w)))
    return "".join(chars), labels


def split_words(line):
    # str.split() with no argument splits on runs of any Unicode whitespace,
    # which covers spaces, tabs and the ideographic space U+3000.
    return line.split()


def read_lines(path):
    """Decode a UTF-8 file line by line so bad bytes report a line number."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    out = []
    for lineno, line in enumerate(lines, 1):
        if line.endswith(b"\r"):
            line = line[:-1]
        try:
            out.append(line.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise IngestionError(f"invalid UTF-8 ({exc.reason})", line=lineno) from None
    return out


def parse_corpus_lines(lines):
    data = []
    for line in lines:
        words = split_words(line)
        if words:
            data.append(labels_from_words(words))
    return data


def load_corpus(path):
    """List of ``(sentence, labels)`` pairs; empty lines are skipped.

    ``sentence`` is a ``str`` (one item per Unicode scalar value) and
    ``labels`` a list of label indices into ``LABELS``.
    """
    return parse_corpus_lines(read_lines(path))


def is_well_formed(labels):
    inside = False
    for y in labels:
        if y in (M, E) and not inside:
            return False
        if y in (B, S) and inside:
            return False
        inside = y in (B, M)
    return not inside


def segment_from_labels(sentence, labels):
    """Split ``sentence`` into words according to predicted labels.

    Any label sequence is accepted. A word starts at every B or S and ends
    at E or S, or right before the next B/S, or at the end of the sentence.
    The concatenated words always equal ``sentence``.
    """
    if len(sentence) != len(labels):
        raise ValueError(f"{len(sentence)} characters but {len(labels)} labels")
    words = []
    current = ""
    for ch, y in zip(sentence, labels):
        y = int(y)
        if y in (B, S) and current:
            words.append(current)
            current = ""
        current += ch
        if y in (E, S):
            words.append(current)
            current = ""
    if current:
        words.append(current)
    return words


def label_names(labels):
    return "".join(LABELS[int(y)] for y in labels)


def parse_label_names(text):
    return [LABEL_INDEX[c] for c in text]


# -- vocabulary ------------------------------------------------------------


class Vocabulary:
    """Character to index map with reserved UNK (0) and PAD (1) entries.

    Characters are numbered in order of first occurrence.
    """

    def __init__(self, chars=()):
        self.itos = [UNK_TOKEN, PAD_TOKEN]
        self.stoi = {}
        for ch in chars:
            self.add(ch)

    def add(self, ch):
        if ch not in self.stoi:
            self.stoi[ch] = len(self.itos)
            self.itos.append(ch)
        return self.stoi[ch]

    @classmethod
    def from_sentences(cls, sentences):
        vocab = cls()
        for sent in sentences:
            for ch in sent:
                vocab.add(ch)
        return vocab

    @property
    def chars(self):
        return self.itos[2:]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, ch):
        return ch in self.stoi

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def index(self, ch):
        return self.stoi.get(ch, UNK)

    def encode(self, sentence):
        return np.fromiter((self.stoi.get(ch, UNK) for ch in sentence), dtype=np.intp,
                           count=len(sentence))


# -- embeddings ------------------------------------------------------------


@dataclass
class EmbeddingTable:
    table: np.ndarray
    hit_rate: float
    hits: int


def load_embeddings(path, vocab, dim, rng):
    """Read a text embedding file (header ``V n``, then ``token v1 .. vn``).

    Rows for vocabulary characters found in the file are copied; all other
    rows, UNK and PAD included, are drawn uniform(-0.1, 0.1) from ``rng``.
    Hit rate counts only the non-reserved vocabulary entries.
    """
    lines = read_lines(path)
    if not lines:
        raise IngestionError("empty embedding file", line=1)
    header = lines[0].split()
    try:
        _, file_dim = (int(x) for x in header)
    except ValueError:
        raise IngestionError(f"bad header {lines[0]!r}, expected 'V n'", line=1) from None
    if file_dim != dim:
        raise ConfigError(f"embedding file has dimension {file_dim}, config expects n={dim}")

    table = rng.uniform(-0.1, 0.1, size=(len(vocab), dim)).astype(DTYPE)
    found = set()
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.rstrip().split(" ")
        if len(parts) == 1 and not parts[0]:
            continue
        if len(parts) != dim + 1:
            raise IngestionError(f"expected a token and {dim} values, got {len(parts)} fields",
                                 line=lineno)
        token = parts[0]
        try:
            row = np.array([float(x) for x in parts[1:]], dtype=DTYPE)
        except ValueError:
            raise IngestionError("unparseable number", line=lineno) from None
        if token in vocab.stoi:
            table[vocab.stoi[token]] = row
            found.add(token)
    denom = len(vocab) - 2
    return EmbeddingTable(table, len(found) / denom if denom else 0.0, len(found))


# -- batching --------------------------------------------------------------


@dataclass
class Batch:
    chars: np.ndarray  # [bs, m_max] vocabulary indices, PAD beyond each length
    lengths: np.ndarray  # [bs]
    labels: np.ndarray  # [bs, m_max], -1 beyond each length

    @property
    def size(self):
        return len(self.lengths)

    def sentences(self):
        """Yield ``(chars, labels)`` trimmed to the true length."""
        for row, n in enumerate(self.lengths):
            yield self.chars[row, :n], self.labels[row, :n]

    @property
    def mask(self):
        return np.arange(self.chars.shape[1])[None, :] < self.lengths[:, None]


def pad_batch(items):
    """``items``: list of ``(index array, label list)``."""
    lengths = np.array([len(c) for c, _ in items], dtype=np.intp)
    width = int(lengths.max())
    chars = np.full((len(items), width), PAD, dtype=np.intp)
    labels = np.full((len(items), width), -1, dtype=np.intp)
    for row, (c, y) in enumerate(items):
        chars[row, : len(c)] = c
        labels[row, : len(y)] = y
    return Batch(chars, lengths, labels)


def make_batches(data, bs, seed, epoch=0, sort_by_length=False):
    """Shuffle deterministically per ``(seed, epoch)`` and cut into batches.

    ``data`` is a list of ``(index array, labels)``. With ``sort_by_length``
    the shuffled order is sorted by length inside windows of 50 batches and
    the resulting batches are shuffled again, which keeps padding low.
    """
    if bs < 1:
        raise ConfigError("batch size must be >= 1")
    if not data:
        raise ConfigError("cannot batch an empty dataset")
    rng = np.random.default_rng([seed, SHUFFLE_STREAM, epoch])
    order = rng.permutation(len(data))
    if sort_by_length:
        window = bs * 50
        chunks = []
        for start in range(0, len(order), window):
            part = order[start : start + window]
            chunks.append(part[np.argsort([len(data[i][0]) for i in part], kind="stable")])
        order = np.concatenate(chunks)
    groups = [order[i : i + bs] for i in range(0, len(order), bs)]
    if sort_by_length:
        groups = [groups[i] for i in rng.permutation(len(groups))]
    return [pad_batch([data[i] for i in g]) for g in groups]
