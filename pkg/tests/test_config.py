import pytest

from tcn_cws.config import ConvConfig, TrainConfig, dump_config, parse_config
from tcn_cws.errors import ConfigError


def test_defaults_match_published_table():
    cfg = parse_config("")
    assert (cfg.n, cfg.lr, cfg.fs, cfg.ly, cfg.s, cfg.dp, cfg.sl, cfg.ep, cfg.bs) == (
        100, 0.001, 100, 4, 3, 0.3, 1, 100, 32)
    assert (cfg.beta1, cfg.beta2, cfg.eps) == (0.9, 0.999, 1e-8)
    assert cfg.scheme == "future" and cfg.dev_holdout == 2000 and cfg.patience == 10
    assert cfg.dilations == [1, 2, 4, 8]
    assert cfg.receptive_field == 60


def test_parse_and_round_trip(tmp_path):
    text = """
    # comment
    ly = 2   # trailing comment
    scheme = past
    freeze_embeddings = yes
    lr = 0.01
    train = data/train.txt
    """
    cfg = parse_config(text, base_dir=tmp_path)
    assert cfg.ly == 2 and cfg.scheme == "past" and cfg.freeze_embeddings and cfg.lr == 0.01
    assert cfg.train == str(tmp_path / "data/train.txt")
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize("text", ["bogus = 1", "ly = two", "sl = 2", "dp = 1.0",
                                  "scheme = sideways", "no equals sign", "bs = 0"])
def test_rejects_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_conv_view():
    cfg = TrainConfig(n=8, fs=8, ly=1)
    assert cfg.conv() == ConvConfig(n=8, fs=8, ly=1)
