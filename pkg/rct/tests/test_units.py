from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import pytest

from rct.errors import ConfigError
from rct.settings import Settings, load_settings
from rct.units import fs_to_ps, ns_number, ns_to_fs, ps_to_fs, rational_document, render_ps


def test_conversions_are_exact():
    assert ns_to_fs(Decimal("0.469")) == 469_000
    assert ns_to_fs(Decimal("1.845161")) == 1_845_161
    assert ps_to_fs(Decimal("67")) == 67_000
    with pytest.raises(ValueError):
        ns_to_fs(Decimal("0.0000001"))


def test_plain_decimal_rendering():
    assert fs_to_ps(6_180_000) == Decimal("6180")
    assert str(fs_to_ps(6_180_000)) == "6180"
    assert str(fs_to_ps(1_500)) == "1.5"
    assert ns_number(1_845_161) == 1.845161
    assert ns_number(2_000_000) == 2


def test_render_rounds_half_even_to_the_femtosecond():
    assert render_ps(Fraction(200_000, 3)) == "66.667 ps"
    assert render_ps(Fraction(5, 2)) == "0.002 ps"
    assert rational_document(Fraction(3_200_000, 15)) == {"num_fs": 640_000, "den": 3, "fs": 213_333}


def test_settings_come_from_the_environment(monkeypatch):
    monkeypatch.setenv("RCT_DP_MAX_FRONTIER", "4")
    monkeypatch.setenv("RCT_FALLBACK_STRATEGY", "BNB")
    monkeypatch.setenv("RCT_LOG_LEVEL", "debug")
    settings = load_settings("absent.env")
    assert settings == Settings(log_level="DEBUG", dp_max_frontier=4, fallback_strategy="bnb")


def test_env_file_is_read(tmp_path):
    env = tmp_path / "rct.env"
    env.write_text("RCT_BNB_NODE_LIMIT=5_000\n")
    assert load_settings(env).bnb_node_limit == 5_000


@pytest.mark.parametrize(
    ("key", "value"),
    [("RCT_DP_MAX_FRONTIER", "lots"), ("RCT_ORACLE_CHUNK", "0"), ("RCT_FALLBACK_STRATEGY", "dp")],
)
def test_bad_settings_are_config_errors(monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ConfigError):
        load_settings("absent.env")
