"""Configuration dataclasses and the ``key = value`` text format.

Defaults reproduce the published hyper-parameters, so an empty config file
trains the reference model.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .layers import SCHEMES


@dataclass
class ConvConfig:
    n: int = 100
    fs: int = 100
    ly: int = 4
    s: int = 3
    dp: float = 0.3
    sl: int = 1
    scheme: str = "future"

    def __post_init__(self):
        if self.sl != 1:
            raise ConfigError("stride length is fixed at 1")
        if not 0.0 <= self.dp < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {self.dp}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for key in ("n", "fs", "s"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be positive")
        if self.ly < 0:
            raise ConfigError("ly must be non-negative")

    @property
    def dilations(self):
        return [2**i for i in range(self.ly)]

    @property
    def receptive_field(self):
        """Farthest input offset that can reach one output position."""
        return sum(2 * (self.s - 1) * d for d in self.dilations)


@dataclass
class TrainConfig(ConvConfig):
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    ep: int = 100
    bs: int = 32
    seed: int = 0
    patience: int = 10
    freeze_embeddings: bool = False
    sort_by_length: bool = False
    train: str = ""
    dev: str = ""
    dev_holdout: int = 2000
    embeddings: str = ""
    checkpoint_dir: str = "checkpoints"

    def __post_init__(self):
        super().__post_init__()
        if self.lr <= 0 or self.eps <= 0:
            raise ConfigError("lr and eps must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")
        if self.bs < 1 or self.ep < 0 or self.patience < 0 or self.dev_holdout < 0:
            raise ConfigError("bs must be >= 1; ep, patience, dev_holdout >= 0")

    def conv(self):
        names = {f.name for f in dataclasses.fields(ConvConfig)}
        return ConvConfig(**{k: v for k, v in dataclasses.asdict(self).items() if k in names})


_PATH_KEYS = ("train", "dev", "embeddings", "checkpoint_dir")


def _coerce(name, kind, raw):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text, cls=TrainConfig, base_dir=None):
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Relative paths are resolved against ``base_dir`` when given.
    """
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    kinds = {"int": int, "float": float, "str": str, "bool": bool}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = types[key]
        kind = kinds.get(kind, kind) if isinstance(kind, str) else kind
        values[key] = _coerce(key, kind, raw)
    if base_dir is not None:
        for key in _PATH_KEYS:
            if values.get(key) and key in types:
                p = Path(values[key])
                if not p.is_absolute():
                    values[key] = str(Path(base_dir) / p)
    return cls(**values)


def load_config(path, cls=TrainConfig):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, cls, base_dir=path.parent)


def dump_config(cfg):
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
