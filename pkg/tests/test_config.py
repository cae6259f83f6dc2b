"""key=value pipeline configuration parsing."""

import pytest

from palmshield.config import (ConfigError, PipelineConfig, config_items,
                               format_config, load_config, parse_config)


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.mfrat_window == 13
    assert cfg.fusion_r == 8.0
    assert cfg.block_size == 24
    assert cfg.block_count == 36
    assert cfg.cell_size == 4
    assert cfg.iom_l == 420
    assert cfg.iom_k == 50
    assert cfg.mode == "raw"
    assert cfg.w_o == 0.5
    assert cfg.shift_radius == 0
    assert cfg.cyclic_wrap is False
    assert cfg.hessian_threshold == 1000.0


def test_empty_text_gives_defaults():
    assert parse_config("") == PipelineConfig()


def test_parse_overrides_and_comments():
    cfg = parse_config("""
        # tuning for a quick run
        iom_l = 64
        mode = angular
        cyclic_wrap = true
        fusion_r = 10.5
    """)
    assert cfg.iom_l == 64
    assert cfg.mode == "angular"
    assert cfg.cyclic_wrap is True
    assert cfg.fusion_r == 10.5
    assert cfg.iom_k == 50  # untouched default


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("iom_ell = 3")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("iom_l = 3\niom_l = 4")


def test_bad_value_types_rejected():
    with pytest.raises(ConfigError):
        parse_config("iom_l = soon")
    with pytest.raises(ConfigError):
        parse_config("cyclic_wrap = yes")  # only true/false
    with pytest.raises(ConfigError):
        parse_config("w_o = ")


def test_missing_equals_rejected():
    with pytest.raises(ConfigError):
        parse_config("just a line")


def test_semantic_validation_applies_to_parsed_values():
    with pytest.raises(ConfigError):
        parse_config("mfrat_window = 12")      # must be odd
    with pytest.raises(ConfigError):
        parse_config("cell_size = 5")          # must divide block_size
    with pytest.raises(ConfigError):
        parse_config("mode = hex")
    with pytest.raises(ConfigError):
        parse_config("w_o = 1.25")


def test_round_trip_through_text():
    cfg = parse_config("iom_k = 9\nshift_radius = 2\ncyclic_wrap = true")
    assert parse_config(format_config(cfg)) == cfg


def test_config_items_cover_every_field():
    items = dict(config_items(PipelineConfig()))
    assert items["cyclic_wrap"] == "false"
    assert items["iom_l"] == "420"
    assert len(items) == 12


def test_load_config_reads_files(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("block_size = 12\ncell_size = 3\nblock_count = 4\n")
    cfg = load_config(p)
    assert (cfg.block_size, cfg.cell_size) == (12, 3)
