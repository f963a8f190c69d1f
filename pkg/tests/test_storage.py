import io
import struct

import numpy as np
import pytest

from src.core.errors import CacheCorrupt
from src.core.spectral import dft_grid
from src.core.weights import SequenceKind, indicator_seq, lambda_seq, make_context
from src.storage.cache_store import MAGIC, _PRIME_HEADER, decode_bitset, encode_bitset
from src.storage.sequence_io import (read_sequence_binary, read_sequence_csv, write_json_lines,
                                     write_sequence_binary, write_sequence_csv, write_spectrum_csv)
from src.utils.checksum import checksummer


def _prime_mask(limit):
    mask = np.zeros(limit + 1, dtype=bool)
    mask[[p for p in (2, 3, 5, 7, 11, 13, 17, 19) if p <= limit]] = True
    return mask


def test_bitset_encoding_layout():
    mask = _prime_mask(20)
    blob = encode_bitset(_PRIME_HEADER.pack(MAGIC, 1, 20), mask)
    assert blob[:4] == b"PSGC"
    assert struct.unpack('<H', blob[4:6])[0] == 1
    assert struct.unpack('<Q', blob[6:14])[0] == 20
    assert len(blob) == _PRIME_HEADER.size + 3 + 8
    fields, decoded = decode_bitset(blob, _PRIME_HEADER, "mem")
    assert fields[2] == 20
    assert np.array_equal(decoded, mask)


def test_bitset_checksum_detects_flip():
    blob = bytearray(encode_bitset(_PRIME_HEADER.pack(MAGIC, 1, 20), _prime_mask(20)))
    blob[_PRIME_HEADER.size] ^= 0x01
    with pytest.raises(CacheCorrupt, match="checksum"):
        decode_bitset(bytes(blob), _PRIME_HEADER, "mem")


def test_bitset_rejects_wrong_version():
    blob = encode_bitset(_PRIME_HEADER.pack(MAGIC, 2, 20), _prime_mask(20))
    with pytest.raises(CacheCorrupt, match="version"):
        decode_bitset(blob, _PRIME_HEADER, "mem")


def test_corrupt_cache_file_is_recomputed(cache_store):
    cache_store.store_primes(20, _prime_mask(20))
    path = cache_store.prime_path(20)
    data = bytearray(path.read_bytes())
    data[-1] ^= 0xFF
    path.write_bytes(bytes(data))
    assert cache_store.load_primes(20) is None
    assert not path.exists()


def test_prime_cache_serves_smaller_limits(cache_store):
    cache_store.store_primes(20, _prime_mask(20))
    assert np.array_equal(cache_store.load_primes(12), _prime_mask(12))
    assert cache_store.load_primes(30) is None


def test_membership_cache_is_keyed_by_exponent(cache_store):
    mask = np.array([False, True, True, False, True])
    cache_store.store_membership(4, 11, 10, mask)
    assert np.array_equal(cache_store.load_membership(4, 11, 10), mask)
    assert cache_store.load_membership(4, 3, 2) is None
    assert cache_store.clear() == 1


def test_no_temporary_files_left(cache_store):
    cache_store.store_primes(20, _prime_mask(20))
    assert [p.name for p in cache_store.cache_dir.iterdir()] == ["primes_20.psgc"]


def test_checksummer():
    assert checksummer.digest64(b"psg") == checksummer.digest64(b"psg")
    assert checksummer.digest64(b"psg") != checksummer.digest64(b"psg", 'blake2b')
    with pytest.raises(ValueError):
        checksummer.digest64(b"psg", 'md5')


def test_file_hash(tmp_path):
    first, second = tmp_path / "a.bin", tmp_path / "b.bin"
    first.write_bytes(b"same")
    second.write_bytes(b"same")
    assert checksummer.files_match(str(first), str(second))
    assert not checksummer.files_match(str(first), str(tmp_path / "missing"))


def test_sequence_csv_round_trip(tmp_path):
    f = lambda_seq(make_context(30, 1))
    path = tmp_path / "lambda.csv"
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        write_sequence_csv(f, handle)
    text = path.read_text(encoding='utf-8')
    assert text.startswith("n,value\n1,0.0\n")
    assert "\r" not in text
    back = read_sequence_csv(path)
    assert back.n_max == f.n_max
    assert np.array_equal(back.values, f.values)


def test_sequence_csv_bad_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("n,value\n1,abc\n", encoding='utf-8')
    with pytest.raises(ValueError):
        read_sequence_csv(path)


def test_sequence_binary(tmp_path):
    f = lambda_seq(make_context(100, 2))
    path = tmp_path / "lambda.psws"
    write_sequence_binary(f, path)
    blob = path.read_bytes()
    assert blob[:4] == b"PSWS"
    assert len(blob) == 4 + 8 + 1 + 8 * f.n_max
    back = read_sequence_binary(path)
    assert back.kind is SequenceKind.LAMBDA
    assert np.array_equal(back.values, f.values)

    path.write_bytes(blob[:-8])
    with pytest.raises(CacheCorrupt):
        read_sequence_binary(path)


def test_spectrum_csv():
    out = io.StringIO()
    write_spectrum_csv(dft_grid(indicator_seq(4), 4), out)
    lines = out.getvalue().split('\n')
    assert lines[0] == "j,theta,re,im,modulus"
    assert lines[1].startswith("0,0.0,")
    assert float(lines[1].split(",")[2]) == pytest.approx(4.0)
    assert len([line for line in lines if line]) == 5


def test_json_lines():
    out = io.StringIO()
    write_json_lines([{"n": 9, "count": 4, "witness": [2, 2, 5]}, {"n": 7, "count": 0, "witness": None}], out)
    assert out.getvalue() == ('{"n": 9, "count": 4, "witness": [2, 2, 5]}\n'
                              '{"n": 7, "count": 0, "witness": null}\n')
