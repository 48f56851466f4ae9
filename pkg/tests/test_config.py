import pytest

from colorcacti.config import RunConfig, build_config, dump_config, load_config, parse_config
from colorcacti.errors import ConfigError


def test_parse_types_and_comments(tmp_path):
    values = parse_config("nt = 22\n# note\nnoise-sigma = 0.01  # inline\ntrace = yes\nmeasurements = a.cacti, b.cacti\n")
    assert values == {"nt": 22, "noise_sigma": 0.01, "trace": True, "measurements": ["a.cacti", "b.cacti"]}
    cfg = build_config(values)
    assert cfg.nt == 22 and cfg.basis == ("db8", "db8", "dct")


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="frobnicate"):
        parse_config("frobnicate = 1\n")


def test_bad_value_names_key():
    with pytest.raises(ConfigError, match="nt"):
        parse_config("nt = eight\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just words\n")


@pytest.mark.parametrize("key,value", [
    ("basis_x", "haar"), ("color", "cmyk"), ("tau_update", "exact"), ("nt", 0), ("noise_sigma", -1.0),
    ("max_sweeps", 0), ("peak", 0.0),
])
def test_validation_names_key(key, value):
    with pytest.raises(ConfigError, match=key):
        build_config({key: value})


def test_overrides_and_relative_paths(tmp_path):
    (tmp_path / "run.cfg").write_text("masks = masks.cacti\nmeasurements = m0.cacti\nseed = 3\n")
    values = load_config(tmp_path / "run.cfg")
    cfg = build_config(values, {"seed": 9, "nt": None})
    assert cfg.seed == 9 and cfg.nt == 8
    assert cfg.masks == str(tmp_path / "masks.cacti")
    assert cfg.measurements == [str(tmp_path / "m0.cacti")]


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.cfg")


def test_dump_round_trip(tmp_path):
    dump_config(tmp_path / "c.cfg", {"nt": 4, "truth": ["a", "b"], "color": "bayer"})
    assert parse_config((tmp_path / "c.cfg").read_text()) == {"nt": 4, "truth": ["a", "b"], "color": "bayer"}


def test_defaults():
    cfg = RunConfig()
    assert (cfg.a0, cfg.b0, cfg.c0, cfg.d0) == (1e-6,) * 4
    assert cfg.levels == 3 and cfg.tau_update == "verbatim" and cfg.color == "mono"
