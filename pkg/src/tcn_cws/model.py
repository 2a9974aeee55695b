"""The full tagger: embedding -> TCN encoder -> dense decoder -> CRF.

Parameters live in one flat ``dict`` of float64 arrays keyed by stable
names (``layer0.block1.kernel``, ``crf.transitions`` ...); that dict is what
the optimizer updates and what checkpoints serialize.
"""

import numpy as np

from . import crf, layers
from .config import ConvConfig
from .tensor import DTYPE

BLOCKS_PER_LAYER = 2
EMBED_INIT_RANGE = 0.1


def glorot(rng, shape, fan_in, fan_out):
    r = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, size=shape)


def param_shapes(config, vocab_size):
    """Ordered ``name -> shape`` for a model of this configuration."""
    shapes = {"embedding": (vocab_size, config.n)}
    for i in range(config.ly):
        c_in = config.n if i == 0 else config.fs
        if i == 0 and config.n != config.fs:
            shapes["layer0.proj"] = (config.n, config.fs)
        for j in range(BLOCKS_PER_LAYER):
            prefix = f"layer{i}.block{j}."
            shapes[prefix + "kernel"] = (config.s, c_in if j == 0 else config.fs, config.fs)
            shapes[prefix + "bias"] = (config.fs,)
            shapes[prefix + "gain"] = (config.fs,)
            shapes[prefix + "shift"] = (config.fs,)
    width = config.fs if config.ly else config.n
    shapes["decoder.weight"] = (width, crf.NUM_LABELS)
    shapes["decoder.bias"] = (crf.NUM_LABELS,)
    shapes["crf.transitions"] = (crf.NUM_LABELS, crf.NUM_LABELS)
    return shapes


def init_params(config, vocab_size, rng, embedding=None):
    """Fresh parameters. ``embedding`` (if given) is used as the table;
    otherwise it is drawn uniform(-0.1, 0.1)."""
    params = {}
    for name, shape in param_shapes(config, vocab_size).items():
        kind = name.rsplit(".", 1)[-1]
        if name == "embedding":
            if embedding is None:
                value = rng.uniform(-EMBED_INIT_RANGE, EMBED_INIT_RANGE, size=shape)
            else:
                value = np.array(embedding, dtype=DTYPE)
                if value.shape != shape:
                    raise ValueError(f"embedding table {value.shape}, expected {shape}")
        elif kind == "kernel":
            s, c_in, fs = shape
            value = glorot(rng, shape, s * c_in, s * fs)
        elif kind in ("weight", "proj"):
            value = glorot(rng, shape, *shape)
        elif kind == "gain":
            value = np.ones(shape)
        else:
            value = np.zeros(shape)
        params[name] = np.ascontiguousarray(value, dtype=DTYPE)
    return params


class Model:
    def __init__(self, config: ConvConfig, params):
        self.config = config
        self.params = params

    @classmethod
    def create(cls, config, vocab_size, rng, embedding=None):
        return cls(config, init_params(config, vocab_size, rng, embedding))

    @property
    def vocab_size(self):
        return self.params["embedding"].shape[0]

    def _layer_params(self):
        p = self.params
        out = []
        for i in range(self.config.ly):
            blocks = []
            for j in range(BLOCKS_PER_LAYER):
                prefix = f"layer{i}.block{j}."
                blocks.append({k: p[prefix + k] for k in ("kernel", "bias", "gain", "shift")})
            entry = {"blocks": blocks}
            if i == 0 and "layer0.proj" in p:
                entry["proj"] = p["layer0.proj"]
            out.append(entry)
        return out

    def scores(self, chars, mode="infer", rng=None):
        """Emission scores ``[m, 4]`` plus the tapes needed for backward."""
        p = self.params
        e, embed_tape = layers.embed(chars, p["embedding"])
        h, enc_tape = layers.encode(
            e, self._layer_params(), self.config.scheme, mode, self.config.dp, rng
        )
        score, dec_tape = layers.decode(h, p["decoder.weight"], p["decoder.bias"])
        return score, (embed_tape, enc_tape, dec_tape)

    def backward(self, tapes, grad_score, grad_transitions):
        embed_tape, enc_tape, dec_tape = tapes
        grads = {}
        g, grads["decoder.weight"], grads["decoder.bias"] = layers.decode_backward(
            dec_tape, grad_score
        )
        g, layer_grads = layers.encode_backward(enc_tape, g)
        for i, entry in enumerate(layer_grads):
            if "proj" in entry:
                grads[f"layer{i}.proj"] = entry["proj"]
            for j, block in enumerate(entry["blocks"]):
                for k, v in block.items():
                    grads[f"layer{i}.block{j}.{k}"] = v
        grads["embedding"] = layers.embed_backward(embed_tape, g)
        grads["crf.transitions"] = grad_transitions
        return grads

    def loss(self, chars, labels, mode="train", rng=None):
        score, _ = self.scores(chars, mode, rng)
        return crf.nll_loss(score, self.params["crf.transitions"], labels)

    def loss_and_grads(self, chars, labels, mode="train", rng=None):
        score, tapes = self.scores(chars, mode, rng)
        loss, g_score, g_trans = crf.loss_backward(score, self.params["crf.transitions"], labels)
        return loss, self.backward(tapes, g_score, g_trans)

    def predict(self, chars):
        score, _ = self.scores(chars, "infer")
        return crf.viterbi(score, self.params["crf.transitions"])

    def batch_loss_and_grads(self, batch, rng=None, mode="train"):
        """Summed loss and mean gradient over the sentences of a batch.

        Each sentence is processed at its true length, so padded positions
        never reach the loss.
        """
        total = 0.0
        summed = None
        for chars, labels in batch.sentences():
            loss, grads = self.loss_and_grads(chars, labels, mode, rng)
            total += loss
            if summed is None:
                summed = grads
            else:
                for k, v in grads.items():
                    summed[k] += v
        scale = 1.0 / batch.size
        for v in summed.values():
            v *= scale
        return total, summed

    def batch_loss(self, batch, mode="infer", rng=None):
        return sum(self.loss(c, y, mode, rng) for c, y in batch.sentences())

    def num_parameters(self):
        return sum(v.size for v in self.params.values())
