"""Chinese word segmentation with a dilated temporal-convolutional encoder
and a linear-chain CRF, trained with hand-written backward passes."""

from .config import ConvConfig, TrainConfig
from .crf import LABELS, forward_alpha, nll_loss, viterbi
from .model import Model

__all__ = ["ConvConfig", "TrainConfig", "LABELS", "Model", "forward_alpha", "nll_loss", "viterbi"]
