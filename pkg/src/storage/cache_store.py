import os
import struct
import tempfile
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..core.errors import CacheCorrupt
from ..utils.checksum import checksummer
from ..utils.logging_config import get_logger

logger = get_logger('cache_store')

MAGIC = b"PSGC"
FORMAT_VERSION = 1

_PRIME_HEADER = struct.Struct('<4sHQ')
_MEMBER_HEADER = struct.Struct('<4sHQII')
_CHECKSUM = struct.Struct('<Q')


def encode_bitset(header: bytes, mask: np.ndarray) -> bytes:
    payload = np.packbits(mask.astype(bool), bitorder='little').tobytes()
    body = header + payload
    return body + _CHECKSUM.pack(checksummer.digest64(body))


def decode_bitset(blob: bytes, header_struct: struct.Struct, path) -> Tuple[tuple, np.ndarray]:
    """Validate magic, version and checksum; return (header fields, bool mask)"""
    if len(blob) < header_struct.size + _CHECKSUM.size:
        raise CacheCorrupt(path, "truncated file")

    body, stored = blob[:-_CHECKSUM.size], _CHECKSUM.unpack(blob[-_CHECKSUM.size:])[0]
    if checksummer.digest64(body) != stored:
        raise CacheCorrupt(path, "checksum mismatch")

    fields = header_struct.unpack(body[:header_struct.size])
    magic, version, limit = fields[0], fields[1], fields[2]
    if magic != MAGIC:
        raise CacheCorrupt(path, f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheCorrupt(path, f"unsupported format version {version}")

    payload = np.frombuffer(body[header_struct.size:], dtype=np.uint8)
    expected_bytes = (limit + 1 + 7) // 8
    if payload.size != expected_bytes:
        raise CacheCorrupt(path, f"payload has {payload.size} bytes, expected {expected_bytes}")

    mask = np.unpackbits(payload, bitorder='little', count=limit + 1).astype(bool)
    return fields, mask


class CacheStore:
    """Disk cache for prime and membership bitsets over [0, limit]"""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def prime_path(self, limit: int) -> Path:
        return self.cache_dir / f"primes_{limit}.psgc"

    def membership_path(self, limit: int, num: int, den: int) -> Path:
        return self.cache_dir / f"members_{num}-{den}_{limit}.psgc"

    def _write_atomic(self, target: Path, blob: bytes):
        """Write through a temporary file and replace, so readers never see a partial file"""
        fd, temp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=self.cache_dir)
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(blob)
            Path(temp_name).replace(target)
        except Exception:
            Path(temp_name).unlink(missing_ok=True)
            raise

    def _read(self, path: Path, header_struct: struct.Struct) -> Optional[Tuple[tuple, np.ndarray]]:
        if not path.exists():
            return None
        try:
            return decode_bitset(path.read_bytes(), header_struct, path)
        except CacheCorrupt as e:
            logger.warning(f"{e}; recomputing")
            path.unlink(missing_ok=True)
            return None
        except OSError as e:
            logger.warning(f"Could not read cache file {path}: {e}")
            return None

    def store_primes(self, limit: int, mask: np.ndarray):
        header = _PRIME_HEADER.pack(MAGIC, FORMAT_VERSION, limit)
        try:
            self._write_atomic(self.prime_path(limit), encode_bitset(header, mask))
            logger.debug(f"Cached prime bitset up to {limit}")
        except OSError as e:
            logger.warning(f"Failed to write prime cache for {limit}: {e}")

    def load_primes(self, limit: int) -> Optional[np.ndarray]:
        """Exact-key hit first, otherwise the smallest cached bitset covering limit"""
        candidates = [self.prime_path(limit)]
        covering = []
        for path in self.cache_dir.glob("primes_*.psgc"):
            try:
                cached_limit = int(path.stem.split('_', 1)[1])
            except ValueError:
                continue
            if cached_limit > limit:
                covering.append((cached_limit, path))
        candidates.extend(path for _, path in sorted(covering))

        for path in candidates:
            result = self._read(path, _PRIME_HEADER)
            if result is None:
                continue
            fields, mask = result
            if fields[2] < limit:
                logger.warning(f"Cache file {path} covers {fields[2]} < {limit}; ignoring")
                continue
            logger.debug(f"Prime cache hit: {path.name}")
            return mask[:limit + 1].copy()
        return None

    def store_membership(self, limit: int, num: int, den: int, mask: np.ndarray):
        header = _MEMBER_HEADER.pack(MAGIC, FORMAT_VERSION, limit, num, den)
        try:
            self._write_atomic(self.membership_path(limit, num, den), encode_bitset(header, mask))
            logger.debug(f"Cached membership bitset for c={num}/{den} up to {limit}")
        except OSError as e:
            logger.warning(f"Failed to write membership cache: {e}")

    def load_membership(self, limit: int, num: int, den: int) -> Optional[np.ndarray]:
        path = self.membership_path(limit, num, den)
        result = self._read(path, _MEMBER_HEADER)
        if result is None:
            return None
        fields, mask = result
        if tuple(fields[2:]) != (limit, num, den):
            logger.warning(f"Cache file {path} has key {fields[2:]}, expected {(limit, num, den)}; recomputing")
            return None
        return mask

    def clear(self) -> int:
        removed = 0
        for path in self.cache_dir.glob("*.psgc"):
            try:
                path.unlink()
                removed += 1
            except OSError as e:
                logger.warning(f"Failed to remove {path}: {e}")
        return removed
