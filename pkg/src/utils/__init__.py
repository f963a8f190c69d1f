# src/utils/__init__.py
"""
Utility modules and helper functions
"""

from .checksum import checksummer
from .logging_config import get_logger

__all__ = ['checksummer', 'get_logger']
