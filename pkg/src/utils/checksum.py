import struct

from cryptography.hazmat.primitives import hashes


class Checksummer:
    """Integrity digests for cache files and exported artifacts"""

    @staticmethod
    def _new_digest(algorithm: str) -> hashes.Hash:
        if algorithm == 'sha256':
            return hashes.Hash(hashes.SHA256())
        elif algorithm == 'blake2b':
            return hashes.Hash(hashes.BLAKE2b(64))
        raise ValueError(f"Unsupported algorithm: {algorithm}")

    @classmethod
    def digest64(cls, data: bytes, algorithm: str = 'sha256') -> int:
        """Leading 8 bytes of the digest, read as a little-endian u64"""
        digest = cls._new_digest(algorithm)
        digest.update(data)
        return struct.unpack('<Q', digest.finalize()[:8])[0]

    @classmethod
    def calculate_file_hash(cls, file_path: str, algorithm='sha256', chunk_size: int = 1 << 16) -> str:
        """Hex digest of a whole file"""
        digest = cls._new_digest(algorithm)
        with open(file_path, 'rb') as f:
            for chunk in iter(lambda: f.read(chunk_size), b""):
                digest.update(chunk)
        return digest.finalize().hex()

    @classmethod
    def files_match(cls, first_path: str, second_path: str) -> bool:
        try:
            return cls.calculate_file_hash(first_path) == cls.calculate_file_hash(second_path)
        except OSError:
            return False


checksummer = Checksummer()
