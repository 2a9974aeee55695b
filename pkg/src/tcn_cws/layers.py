"""Encoder and decoder layers with hand-written backward passes.

Every forward function returns ``(output, tape)``. The tape keeps whatever
the matching ``*_backward`` needs and may be consumed only once.

Shapes: a sentence of ``m`` characters is an ``[m, channels]`` matrix.
Convolution kernels are ``[s, in_channels, filters]``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, VocabularyError
from .tensor import DTYPE, relu

LN_EPS = 1e-5
SCHEMES = ("future", "past")


@dataclass
class TapeNode:
    layer: str
    saved: dict = field(default_factory=dict)
    consumed: bool = False

    def take(self):
        if self.consumed:
            raise RuntimeError(f"tape for {self.layer} already consumed")
        self.consumed = True
        return self.saved


# -- embedding -------------------------------------------------------------


def embed(chars, table):
    chars = np.asarray(chars, dtype=np.intp)
    if chars.size and (chars.min() < 0 or chars.max() >= table.shape[0]):
        bad = int(chars[(chars < 0) | (chars >= table.shape[0])][0])
        raise VocabularyError(f"character index {bad} outside vocabulary of {table.shape[0]}")
    return table[chars], TapeNode("embed", {"chars": chars, "rows": table.shape[0]})


def embed_backward(tape, grad_out):
    saved = tape.take()
    grad_table = np.zeros((saved["rows"], grad_out.shape[1]), dtype=DTYPE)
    np.add.at(grad_table, saved["chars"], grad_out)
    return grad_table


# -- dilated convolution ---------------------------------------------------


def tap_positions(m, size, dilation, scheme):
    """Index matrix ``[m, size]`` of input rows read by each output row.

    Out-of-range taps point at row ``m``, which callers fill with zeros.
    """
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    sign = 1 if scheme == "future" else -1
    pos = np.arange(m)[:, None] + sign * dilation * np.arange(size)[None, :]
    pos[(pos < 0) | (pos >= m)] = m
    return pos


def dilated_conv(x, kernel, bias, dilation, scheme):
    """out[t] = bias + sum_i kernel[i]^T x[t +/- dilation*i], zero-padded.

    The future scheme reads positions to the right of ``t``, the past scheme
    to the left; output length equals input length.
    """
    m, c_in = x.shape
    size, k_in, filters = kernel.shape
    if k_in != c_in:
        raise DimensionError(f"kernel expects {k_in} input channels, got {c_in}")
    if dilation < 1:
        raise ConfigError("dilation must be >= 1")
    taps = tap_positions(m, size, dilation, scheme)
    padded = np.vstack([x, np.zeros((1, c_in), dtype=DTYPE)])
    gathered = padded[taps].reshape(m, size * c_in)
    out = gathered @ kernel.reshape(size * c_in, filters) + bias
    return out, TapeNode("conv", {"taps": taps, "gathered": gathered, "kernel": kernel})


def dilated_conv_backward(tape, grad_out):
    saved = tape.take()
    kernel, taps, gathered = saved["kernel"], saved["taps"], saved["gathered"]
    size, c_in, filters = kernel.shape
    m = grad_out.shape[0]
    grad_kernel = (gathered.T @ grad_out).reshape(kernel.shape)
    grad_bias = grad_out.sum(axis=0)
    grad_gathered = (grad_out @ kernel.reshape(size * c_in, filters).T).reshape(m, size, c_in)
    grad_padded = np.zeros((m + 1, c_in), dtype=DTYPE)
    np.add.at(grad_padded, taps, grad_gathered)
    return grad_padded[:m], grad_kernel, grad_bias


# -- layer normalization ---------------------------------------------------


def layer_norm(x, gain, shift, eps=LN_EPS):
    """Normalize each position across its channels, then scale and shift."""
    mean = x.mean(axis=1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    out = normed * gain + shift
    return out, TapeNode("layer_norm", {"normed": normed, "inv_std": inv_std, "gain": gain})


def layer_norm_backward(tape, grad_out):
    saved = tape.take()
    normed, inv_std, gain = saved["normed"], saved["inv_std"], saved["gain"]
    grad_gain = (grad_out * normed).sum(axis=0)
    grad_shift = grad_out.sum(axis=0)
    g = grad_out * gain
    grad_x = inv_std * (
        g - g.mean(axis=1, keepdims=True) - normed * (g * normed).mean(axis=1, keepdims=True)
    )
    return grad_x, grad_gain, grad_shift


# -- dropout ---------------------------------------------------------------


def dropout(x, rate, mode, rng=None):
    """Inverted dropout. Returns ``(output, mask)``; the mask holds the
    survivor scale (0 or 1/(1-rate)) and is all ones at inference."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode == "infer" or rate == 0.0:
        return x, np.ones_like(x)
    if mode != "train":
        raise ConfigError(f"unknown mode {mode!r}")
    keep = rng.random(x.shape) >= rate
    mask = keep / (1.0 - rate)
    return x * mask, mask


# -- convolutional block and hidden layer ----------------------------------


def conv_block(x, params, dilation, scheme, mode, rate=0.0, rng=None):
    """Convolution, then layer normalization, then dropout.

    ``params`` is a mapping with keys kernel, bias, gain and shift.
    """
    h, conv_tape = dilated_conv(x, params["kernel"], params["bias"], dilation, scheme)
    h, ln_tape = layer_norm(h, params["gain"], params["shift"])
    out, mask = dropout(h, rate, mode, rng)
    return out, TapeNode("conv_block", {"conv": conv_tape, "ln": ln_tape, "mask": mask})


def conv_block_backward(tape, grad_out):
    """Returns ``(grad_x, grads)`` with ``grads`` keyed like the params."""
    saved = tape.take()
    g = grad_out * saved["mask"]
    g, grad_gain, grad_shift = layer_norm_backward(saved["ln"], g)
    grad_x, grad_kernel, grad_bias = dilated_conv_backward(saved["conv"], g)
    return grad_x, {
        "kernel": grad_kernel,
        "bias": grad_bias,
        "gain": grad_gain,
        "shift": grad_shift,
    }


def hidden_layer(prev, blocks, dilation, scheme, mode, rate=0.0, rng=None, proj=None):
    """ReLU(prev + two stacked conv blocks), position by position.

    ``blocks`` is a pair of block parameter mappings. ``proj`` is an
    optional ``[in, filters]`` matrix applied to the residual path when the
    input width differs from the filter count.
    """
    h = prev
    block_tapes = []
    for params in blocks:
        h, t = conv_block(h, params, dilation, scheme, mode, rate, rng)
        block_tapes.append(t)
    residual = prev if proj is None else prev @ proj
    if residual.shape != h.shape:
        raise DimensionError(
            f"residual {residual.shape} does not match block output {h.shape}"
        )
    pre = residual + h
    out = relu(pre)
    return out, TapeNode(
        "hidden_layer",
        {"blocks": block_tapes, "active": pre > 0, "prev": prev, "proj": proj},
    )


def hidden_layer_backward(tape, grad_out):
    """Returns ``(grad_prev, block_grads, grad_proj)``."""
    saved = tape.take()
    g = grad_out * saved["active"]
    proj = saved["proj"]
    if proj is None:
        grad_prev = g.copy()
        grad_proj = None
    else:
        grad_prev = g @ proj.T
        grad_proj = saved["prev"].T @ g
    block_grads = [None] * len(saved["blocks"])
    for i in reversed(range(len(saved["blocks"]))):
        g, block_grads[i] = conv_block_backward(saved["blocks"][i], g)
    grad_prev += g
    return grad_prev, block_grads, grad_proj


# -- encoder / decoder -----------------------------------------------------


def encode(inputs, layer_params, scheme, mode, rate=0.0, rng=None):
    """Chain hidden layers; layer ``i`` uses dilation ``2**i``.

    ``layer_params`` is a list with one entry per hidden layer, each a
    mapping with ``blocks`` (two block mappings) and optionally ``proj``.
    """
    if inputs.shape[0] < 1:
        raise DimensionError("cannot encode an empty sentence")
    h = inputs
    tapes = []
    for i, lp in enumerate(layer_params):
        h, t = hidden_layer(h, lp["blocks"], 2**i, scheme, mode, rate, rng, lp.get("proj"))
        tapes.append(t)
    return h, TapeNode("encode", {"layers": tapes})


def encode_backward(tape, grad_out):
    """Returns ``(grad_inputs, layer_grads)`` mirroring ``layer_params``."""
    saved = tape.take()
    layer_grads = [None] * len(saved["layers"])
    g = grad_out
    for i in reversed(range(len(saved["layers"]))):
        g, block_grads, grad_proj = hidden_layer_backward(saved["layers"][i], g)
        entry = {"blocks": block_grads}
        if grad_proj is not None:
            entry["proj"] = grad_proj
        layer_grads[i] = entry
    return g, layer_grads


def decode(hidden, weight, bias):
    if weight.ndim != 2 or weight.shape[0] != hidden.shape[1] or bias.shape != (weight.shape[1],):
        raise DimensionError(
            f"decoder weight {weight.shape}/bias {bias.shape} incompatible with hidden {hidden.shape}"
        )
    return hidden @ weight + bias, TapeNode("decode", {"hidden": hidden, "weight": weight})


def decode_backward(tape, grad_out):
    saved = tape.take()
    return grad_out @ saved["weight"].T, saved["hidden"].T @ grad_out, grad_out.sum(axis=0)
