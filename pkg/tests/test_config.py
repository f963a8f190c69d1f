import json
import logging
import os
import subprocess
import sys
from pathlib import Path

import pytest

from src.core.config import ConfigManager, PsgSettings
from src.utils.logging_config import PsgLogger, get_logger


def test_defaults_written_on_first_load(settings_manager):
    assert settings_manager.config_file.exists()
    data = json.loads(settings_manager.config_file.read_text(encoding='utf-8'))
    assert data["seed"] == 0x5053474C
    assert data["w_threshold"] == 2
    assert settings_manager.settings == PsgSettings()


def test_set_setting_persists(settings_manager):
    settings_manager.set_setting("spot_checks", 5)
    reloaded = ConfigManager(str(settings_manager.config_dir))
    assert reloaded.get_setting("spot_checks") == 5
    with pytest.raises(AttributeError):
        settings_manager.set_setting("no_such_setting", 1)


def test_malformed_file_falls_back_to_defaults(tmp_path, capsys):
    home = tmp_path / "home"
    home.mkdir()
    (home / "settings.json").write_text("{not json", encoding='utf-8')
    manager = ConfigManager(str(home))
    assert manager.settings == PsgSettings()
    assert "Error loading config file" in capsys.readouterr().err


def test_unknown_keys_rejected(tmp_path, capsys):
    home = tmp_path / "home"
    home.mkdir()
    (home / "settings.json").write_text('{"colour": "blue"}', encoding='utf-8')
    assert ConfigManager(str(home)).settings == PsgSettings()


def test_read_settings_file_merges_over_defaults(settings_manager, tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"output_format": "json", "threads": 2}', encoding='utf-8')
    settings = settings_manager.read_settings_file(str(path))
    assert settings.output_format == "json"
    assert settings.threads == 2
    assert settings.spot_checks == PsgSettings().spot_checks
    assert settings_manager.settings.output_format == "csv"


def test_export_import(settings_manager, tmp_path):
    settings_manager.set_setting("arc_B", 2.0)
    path = tmp_path / "export.json"
    settings_manager.export_settings(str(path))
    settings_manager.reset_to_defaults()
    assert settings_manager.settings.arc_B == 1.0
    settings_manager.import_settings(str(path))
    assert settings_manager.settings.arc_B == 2.0


def test_resolved_threads():
    assert PsgSettings(threads=3).resolved_threads() == 3
    assert PsgSettings(threads=0).resolved_threads() >= 1


def test_cache_dir_environment_wins(settings_manager, tmp_path, monkeypatch):
    monkeypatch.delenv("PSG_CACHE_DIR", raising=False)
    assert settings_manager.get_cache_dir() == settings_manager.config_dir / "cache"
    assert settings_manager.get_cache_dir(str(tmp_path / "flag")) == tmp_path / "flag"
    monkeypatch.setenv("PSG_CACHE_DIR", str(tmp_path / "env"))
    assert settings_manager.get_cache_dir(str(tmp_path / "flag")) == tmp_path / "env"


def test_logger_names():
    assert get_logger("ps_core").name == "psgoldbach.ps_core"


def test_log_files_are_rotated(tmp_path):
    logs = tmp_path / "logs"
    logs.mkdir()
    for i in range(5):
        (logs / f"psg_2020010{i}_000000.log").write_text("old", encoding='utf-8')
    psg_logger = PsgLogger(log_dir=logs, max_log_files=3, console_level="ERROR")
    try:
        assert len(list(logs.glob("psg_*.log"))) == 3
        assert psg_logger.console_handler.level == logging.ERROR
    finally:
        root = logging.getLogger("psgoldbach")
        for handler in (psg_logger.file_handler, psg_logger.console_handler):
            root.removeHandler(handler)
            handler.close()


@pytest.mark.parametrize("first", ["src.utils.checksum", "src.utils.logging_config", "src.storage", "src.cli"])
def test_any_module_can_be_imported_first(first, tmp_path):
    root = Path(__file__).resolve().parents[1]
    env = dict(os.environ, PSG_HOME=str(tmp_path))
    code = f"import {first}; import src.core; from src.utils.logging_config import get_logger; get_logger('x')"
    done = subprocess.run([sys.executable, "-c", code], cwd=root, env=env, capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
