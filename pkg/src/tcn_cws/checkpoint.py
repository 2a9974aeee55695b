"""Binary checkpoint format.

Layout (all integers little-endian)::

    b"TCNCRF"  u8 version
    u32 len + UTF-8   config, as ``key = value`` lines
    u32 count, then per entry u32 len + UTF-8   vocabulary, index order
    u32 len + UTF-8   metadata lines (epoch, best_f, adam_step)
    u32 count, then per tensor:
        u16 len + UTF-8 name, u8 rank, rank x u64 extents,
        float64 values, row-major

Optimizer moments are stored as tensors named ``adam.m/<param>`` and
``adam.v/<param>``.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import TrainConfig, dump_config, parse_config
from .corpus import PAD_TOKEN, UNK_TOKEN, Vocabulary
from .errors import CheckpointError, TcnCwsError
from .model import param_shapes
from .optim import AdamState

MAGIC = b"TCNCRF"
VERSION = 1
_M_PREFIX = "adam.m/"
_V_PREFIX = "adam.v/"


@dataclass
class Checkpoint:
    config: TrainConfig
    vocab: Vocabulary
    params: dict
    adam: AdamState = None
    epoch: int = 0
    best_f: float = None


def _block(data):
    return struct.pack("<I", len(data)) + data


def to_bytes(ckpt):
    out = bytearray(MAGIC)
    out += struct.pack("<B", VERSION)
    out += _block(dump_config(ckpt.config).encode("utf-8"))
    out += struct.pack("<I", len(ckpt.vocab.itos))
    for token in ckpt.vocab.itos:
        out += _block(token.encode("utf-8"))
    best = "none" if ckpt.best_f is None else repr(float(ckpt.best_f))
    step = ckpt.adam.step if ckpt.adam is not None else 0
    meta = f"epoch = {ckpt.epoch}\nbest_f = {best}\nadam_step = {step}\n"
    out += _block(meta.encode("utf-8"))

    tensors = list(ckpt.params.items())
    if ckpt.adam is not None:
        tensors += [(_M_PREFIX + k, v) for k, v in ckpt.adam.m.items()]
        tensors += [(_V_PREFIX + k, v) for k, v in ckpt.adam.v.items()]
    out += struct.pack("<I", len(tensors))
    for name, value in tensors:
        value = np.asarray(value, dtype="<f8")
        encoded = name.encode("utf-8")
        out += struct.pack("<H", len(encoded)) + encoded
        out += struct.pack("<B", value.ndim)
        out += struct.pack(f"<{value.ndim}Q", *value.shape)
        out += np.ascontiguousarray(value).tobytes(order="C")
    return bytes(out)


def save(ckpt, path):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(to_bytes(ckpt))
    tmp.replace(path)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.data):
            raise CheckpointError(f"truncated file while reading {what}", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def text(self, fmt, what):
        start = self.pos
        (n,) = self.unpack(fmt, what)
        try:
            return self.take(n, what).decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(f"invalid UTF-8 in {what}", start) from None


def _meta(text):
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = (x.strip() for x in line.split("=", 1))
            out[k] = v
    return out


def from_bytes(data):
    r = _Reader(data)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)", 0)
    (version,) = r.unpack("<B", "version")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}", len(MAGIC))

    offset = r.pos
    try:
        config = parse_config(r.text("<I", "config block"), TrainConfig)
    except CheckpointError:
        raise
    except TcnCwsError as exc:
        raise CheckpointError(f"bad config block: {exc}", offset) from None

    offset = r.pos
    (count,) = r.unpack("<I", "vocabulary size")
    itos = [r.text("<I", "vocabulary entry") for _ in range(count)]
    if itos[:2] != [UNK_TOKEN, PAD_TOKEN] or len(set(itos)) != len(itos):
        raise CheckpointError("malformed vocabulary block", offset)
    vocab = Vocabulary(itos[2:])

    offset = r.pos
    meta = _meta(r.text("<I", "metadata block"))
    try:
        epoch = int(meta.get("epoch", "0"))
        best_f = None if meta.get("best_f", "none") == "none" else float(meta["best_f"])
        step = int(meta.get("adam_step", "0"))
    except ValueError:
        raise CheckpointError("malformed metadata block", offset) from None

    (n_tensors,) = r.unpack("<I", "tensor count")
    tensors = {}
    for _ in range(n_tensors):
        start = r.pos
        name = r.text("<H", "tensor name")
        (rank,) = r.unpack("<B", f"rank of {name}")
        shape = r.unpack(f"<{rank}Q", f"extents of {name}")
        size = int(np.prod(shape, dtype=np.int64))
        raw = r.take(8 * size, f"values of {name}")
        if name in tensors:
            raise CheckpointError(f"duplicate tensor {name}", start)
        tensors[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    if r.pos != len(data):
        raise CheckpointError("trailing bytes after last tensor", r.pos)

    expected = param_shapes(config, len(vocab))
    params = {}
    for name, shape in expected.items():
        if name not in tensors:
            raise CheckpointError(f"missing tensor {name}")
        if tensors[name].shape != shape:
            raise CheckpointError(
                f"tensor {name} has shape {tensors[name].shape}, config implies {shape}"
            )
        params[name] = tensors.pop(name)

    adam = None
    m = {k[len(_M_PREFIX):]: tensors.pop(k) for k in list(tensors) if k.startswith(_M_PREFIX)}
    v = {k[len(_V_PREFIX):]: tensors.pop(k) for k in list(tensors) if k.startswith(_V_PREFIX)}
    if m or v:
        for k, arr in list(m.items()) + list(v.items()):
            if k not in params or arr.shape != params[k].shape:
                raise CheckpointError(f"optimizer state for {k} does not match parameters")
        adam = AdamState(step, m, v)
    if tensors:
        raise CheckpointError(f"unexpected tensors: {sorted(tensors)}")
    return Checkpoint(config, vocab, params, adam, epoch, best_f)


def load(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from None
    return from_bytes(data)
