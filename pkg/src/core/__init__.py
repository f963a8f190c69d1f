# src/core/__init__.py
"""
Number theory core, configuration and run history
"""

from .config import config_manager
from .ps_core import RationalExponent, make_exponent, ps_primes
from .goldbach import GoldbachConfig, verify_range

__all__ = ['config_manager', 'RationalExponent', 'make_exponent', 'ps_primes',
           'GoldbachConfig', 'verify_range']
