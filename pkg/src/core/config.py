import json
import os
import sys
from pathlib import Path
from typing import Any, Optional
from dataclasses import dataclass, asdict, fields


@dataclass
class PsgSettings:
    """Application settings configuration"""

    # Parallelism
    threads: int = 0  # 0 means available parallelism
    segment_size: int = 1 << 20

    # Caching
    cache_enabled: bool = True

    # W-trick and arcs
    w_threshold: int = 2  # W = 2
    arc_B: float = 1.0
    grid_oversample: int = 4

    # Sampling
    seed: int = 0x5053474C

    # Output
    output_format: str = "csv"  # csv, json

    # Logging Settings
    log_level: str = "WARNING"
    log_to_file: bool = True
    max_log_files: int = 10

    # Verification
    validate_limit: int = 10_000
    spot_checks: int = 32
    exception_floor: int = 10_000
    run_retention_days: int = 30

    def resolved_threads(self) -> int:
        if self.threads and self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


class ConfigManager:
    """Manages application configuration"""

    def __init__(self, config_dir: Optional[str] = None):
        if config_dir is None:
            config_dir = os.environ.get('PSG_HOME')
        if config_dir is None:
            if os.name == 'nt':  # Windows
                config_dir = os.path.join(os.environ.get('APPDATA', ''), 'psgoldbach')
            else:  # Linux/Mac
                config_dir = os.path.join(os.path.expanduser('~'), '.psgoldbach')

        self.config_dir = Path(config_dir)
        self.config_dir.mkdir(parents=True, exist_ok=True)

        self.config_file = self.config_dir / 'settings.json'
        self.settings = self.load_settings()

    @staticmethod
    def _from_dict(data: dict) -> PsgSettings:
        known = {f.name for f in fields(PsgSettings)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown settings: {', '.join(sorted(unknown))}")
        return PsgSettings(**data)

    def load_settings(self) -> PsgSettings:
        """Load settings from file or create defaults"""
        if self.config_file.exists():
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                return self._from_dict(data)

            except (json.JSONDecodeError, TypeError, ValueError) as e:
                # the logger depends on these settings, so this goes straight to stderr
                print(f"Error loading config file: {e}. Using defaults.", file=sys.stderr)
                return PsgSettings()

        default_settings = PsgSettings()
        self.save_settings(default_settings)
        return default_settings

    def save_settings(self, settings: Optional[PsgSettings] = None):
        """Save settings to file"""
        if settings is None:
            settings = self.settings

        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(asdict(settings), f, indent=2)

            self.settings = settings
        except (IOError, OSError) as e:
            print(f"Error saving config file: {e}", file=sys.stderr)
            self.settings = settings

    def get_setting(self, key: str) -> Any:
        """Get a specific setting value"""
        return getattr(self.settings, key, None)

    def set_setting(self, key: str, value: Any):
        """Set a specific setting value"""
        if hasattr(self.settings, key):
            setattr(self.settings, key, value)
            self.save_settings()
        else:
            raise AttributeError(f"Setting '{key}' does not exist")

    def reset_to_defaults(self):
        self.settings = PsgSettings()
        self.save_settings()

    def export_settings(self, export_path: str):
        """Export settings to a specific file"""
        try:
            with open(export_path, 'w', encoding='utf-8') as f:
                json.dump(asdict(self.settings), f, indent=2)
        except (IOError, OSError) as e:
            raise RuntimeError(f"Failed to export settings: {e}") from e

    def read_settings_file(self, import_path: str) -> PsgSettings:
        """Parse a settings file on top of the defaults without persisting it"""
        try:
            with open(import_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
            merged = asdict(PsgSettings())
            merged.update(data)
            return self._from_dict(merged)
        except (json.JSONDecodeError, TypeError, ValueError, IOError, OSError) as e:
            raise ValueError(f"Failed to read settings from {import_path}: {e}") from e

    def import_settings(self, import_path: str):
        """Import settings from a specific file"""
        self.save_settings(self.read_settings_file(import_path))

    def get_logs_dir(self) -> Path:
        """Get the logs directory"""
        logs_dir = self.config_dir / 'logs'
        logs_dir.mkdir(exist_ok=True)
        return logs_dir

    def get_cache_dir(self, override: Optional[str] = None) -> Path:
        """Get the cache directory; PSG_CACHE_DIR wins over any explicit override"""
        env_dir = os.environ.get('PSG_CACHE_DIR')
        if env_dir:
            cache_dir = Path(env_dir)
        elif override:
            cache_dir = Path(override)
        else:
            cache_dir = self.config_dir / 'cache'
        cache_dir.mkdir(parents=True, exist_ok=True)
        return cache_dir


# Global configuration manager instance
config_manager = ConfigManager()
