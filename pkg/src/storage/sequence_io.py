"""
Reading and writing weighted sequences, spectra and report records

PSWS binary layout (little-endian): b"PSWS", n_max u64, kind u8, then
n_max f64 values f(1..n_max).
"""

import csv
import json
import struct
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from ..core.errors import CacheCorrupt, OutOfRange
from ..core.spectral import SpectrumGrid, spectrum_csv_rows
from ..core.weights import SequenceKind, WeightedSequence
from ..utils.logging_config import get_logger

logger = get_logger('sequence_io')

SEQUENCE_MAGIC = b"PSWS"
_SEQUENCE_HEADER = struct.Struct('<4sQB')

# stable on-disk codes; never renumber
_KIND_CODES = {
    SequenceKind.CUSTOM: 0,
    SequenceKind.LAMBDA: 1,
    SequenceKind.NU: 2,
    SequenceKind.TAU: 3,
    SequenceKind.INDICATOR: 4,
}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}

PathLike = Union[str, Path]


def write_sequence_csv(f: WeightedSequence, stream: IO[str]):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(["n", "value"])
    for n, value in enumerate(f.values.tolist(), start=1):
        writer.writerow([n, repr(value)])


def read_sequence_csv(path: PathLike, kind: SequenceKind = SequenceKind.CUSTOM) -> WeightedSequence:
    """Rows (n, value); missing n are zero, n_max is the largest n present"""
    entries = {}
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        reader = csv.reader(handle)
        for line_no, row in enumerate(reader, start=1):
            if not row or (line_no == 1 and row[0].strip() == "n"):
                continue
            try:
                n, value = int(row[0]), float(row[1])
            except (ValueError, IndexError) as e:
                raise OutOfRange(f"{path}:{line_no}: bad row {row!r}") from e
            if n < 1:
                raise OutOfRange(f"{path}:{line_no}: n must be positive, got {n}")
            entries[n] = value

    if not entries:
        raise OutOfRange(f"{path} holds no sequence values")
    n_max = max(entries)
    values = np.zeros(n_max, dtype=np.float64)
    for n, value in entries.items():
        values[n - 1] = value
    return WeightedSequence(n_max, values, kind, Path(path).stem)


def write_sequence_binary(f: WeightedSequence, path: PathLike):
    header = _SEQUENCE_HEADER.pack(SEQUENCE_MAGIC, f.n_max, _KIND_CODES[f.kind])
    Path(path).write_bytes(header + f.values.astype('<f8').tobytes())
    logger.debug(f"Wrote {f.n_max} values to {path}")


def read_sequence_binary(path: PathLike) -> WeightedSequence:
    blob = Path(path).read_bytes()
    if len(blob) < _SEQUENCE_HEADER.size:
        raise CacheCorrupt(path, "truncated header")
    magic, n_max, code = _SEQUENCE_HEADER.unpack(blob[:_SEQUENCE_HEADER.size])
    if magic != SEQUENCE_MAGIC:
        raise CacheCorrupt(path, f"bad magic {magic!r}")
    if code not in _CODE_KINDS:
        raise CacheCorrupt(path, f"unknown sequence kind {code}")
    payload = blob[_SEQUENCE_HEADER.size:]
    if len(payload) != 8 * n_max:
        raise CacheCorrupt(path, f"payload has {len(payload)} bytes, expected {8 * n_max}")
    values = np.frombuffer(payload, dtype='<f8').astype(np.float64)
    return WeightedSequence(int(n_max), values, _CODE_KINDS[code], Path(path).stem)


def write_spectrum_csv(g: SpectrumGrid, stream: IO[str]):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(["j", "theta", "re", "im", "modulus"])
    for j, theta, re, im, modulus in spectrum_csv_rows(g):
        writer.writerow([j, repr(theta), repr(re), repr(im), repr(modulus)])


def write_json_lines(records: Iterable[dict], stream: IO[str]):
    """One UTF-8 JSON object per line"""
    for record in records:
        stream.write(json.dumps(record, ensure_ascii=False, sort_keys=False))
        stream.write('\n')
