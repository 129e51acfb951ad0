import pytest
from ebitsim.logging.config import load_config, load_stock_config


def console_level(config):
    return config["handlers"]["console"]["level"]


def test_stock_config_defaults_to_info(monkeypatch):
    monkeypatch.delenv("LOG_LEVEL", raising = False)
    config = load_stock_config("default")

    assert console_level(config) == "INFO"
    assert config["loggers"]["fsspec"]["level"] == "INFO"


@pytest.mark.parametrize("level, expected", [
    ("warning", "WARNING"),
    ("debug", "DEBUG"),
    ("", "INFO"),
])
def test_stock_config_follows_log_level(monkeypatch, level, expected):
    monkeypatch.setenv("LOG_LEVEL", level)
    assert console_level(load_stock_config("default")) == expected


def test_debug_config_logs_everything():
    assert console_level(load_stock_config("debug")) == "DEBUG"


def test_log_level_tag_without_a_level(monkeypatch):
    monkeypatch.delenv("LOG_LEVEL", raising = False)

    assert load_config("level: !LOG_LEVEL") == {"level": None}
    assert load_config("level: !coalesce [null, ERROR]") == {"level": "ERROR"}
