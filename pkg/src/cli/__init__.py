# src/cli/__init__.py
"""
Command-line interface
"""

from .commands import CliConfig, main, parse_args, run

__all__ = ['CliConfig', 'main', 'parse_args', 'run']
