from .cache_store import CacheStore
from .sequence_io import (read_sequence_csv, write_sequence_csv, read_sequence_binary,
                          write_sequence_binary, write_spectrum_csv, write_json_lines)

__all__ = ['CacheStore', 'read_sequence_csv', 'write_sequence_csv', 'read_sequence_binary',
           'write_sequence_binary', 'write_spectrum_csv', 'write_json_lines']
