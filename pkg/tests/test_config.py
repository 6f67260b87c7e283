import logging

from src.utils.config import Settings, configure_logging


def test_defaults():
    settings = Settings.from_env({})
    assert settings.log_level == "WARNING"
    assert settings.log_file is None
    assert settings.sweep_workers == 4


def test_values_from_the_environment():
    settings = Settings.from_env({"CIRCLE_CHAINS_LOG_LEVEL": "debug", "CIRCLE_CHAINS_SWEEP_WORKERS": "8"})
    assert settings.log_level == "DEBUG"
    assert settings.sweep_workers == 8


def test_invalid_values_fall_back_to_defaults():
    assert Settings.from_env({"CIRCLE_CHAINS_LOG_LEVEL": "chatty"}) == Settings()
    assert Settings.from_env({"CIRCLE_CHAINS_SWEEP_WORKERS": "0"}) == Settings()
    assert Settings.from_env({"CIRCLE_CHAINS_LOG_LEVEL": ""}).log_level == "WARNING"


def test_configure_logging(tmp_path):
    log_file = tmp_path / "chains.log"
    configure_logging(Settings(log_level="INFO", log_file=str(log_file)))
    root = logging.getLogger()
    assert root.level == logging.INFO
    logging.getLogger("src.test").info("hello from the test")
    for handler in root.handlers:
        handler.flush()
    assert "hello from the test" in log_file.read_text()
    configure_logging(Settings())
    assert logging.getLogger().level == logging.WARNING
