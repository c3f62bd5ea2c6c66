"""Bit-packed binary codes, fast Hamming distance, and code-set files.

Codes are produced by thresholding the linear model at zero:

    bit_j(x) = 1  iff  (W.T x + b)_j >= 0

(the >= makes sign(0) a set bit, matching the +1 convention used for
target codes).  An r-bit code is stored LSB-first in ceil(r/64) uint64
words; unused bits in the last word are always zero, so two codes are
equal exactly when their words are equal.  Hamming distance is XOR plus
popcount over the words.

Code-set file layout (little-endian throughout):

    8 bytes  magic "HCOHCODE"
    1 byte   version (1)
    u32      n           number of codes
    u32      r           bits per code
    n * ceil(r/64) u64   packed words, instance-major
    n * u32  label ids
"""

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FormatError
from .learner import HashModel

WORD_BITS = 64
CODE_MAGIC = b"HCOHCODE"
CODE_VERSION = 1


def words_per_code(length: int) -> int:
    return (length + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an (n, r) array of {0,1} into (n, ceil(r/64)) uint64 words."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n, r = bits.shape
    padded = np.zeros((n, words_per_code(r) * WORD_BITS), dtype=np.uint8)
    padded[:, :r] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns an (n, length) uint8 array."""
    words = np.atleast_2d(np.asarray(words, dtype=np.uint64))
    as_bytes = words.astype("<u8").view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :length]


def _mask_padding(words: np.ndarray, length: int) -> np.ndarray:
    """Zero the bits beyond ``length`` in the last word (canonical form)."""
    tail = length % WORD_BITS
    if tail and words.size:
        words[..., -1] &= np.uint64((1 << tail) - 1)
    return words


@dataclass
class BinaryCode:
    """A single r-bit code: ceil(r/64) uint64 words plus the bit length."""

    words: np.ndarray
    length: int

    def __post_init__(self):
        self.words = _mask_padding(
            np.array(self.words, dtype=np.uint64, ndmin=1), self.length)


@dataclass
class BinaryCodeSet:
    """n equal-length codes with their labels, packed row-per-instance.

    Padding bits are masked at construction, so code equality is word
    equality.
    """

    words: np.ndarray   # (n, ceil(length/64)) uint64
    labels: np.ndarray  # (n,)
    length: int

    def __post_init__(self):
        self.words = _mask_padding(
            np.array(self.words, dtype=np.uint64, ndmin=2), self.length)
        self.labels = np.atleast_1d(np.asarray(self.labels, dtype=np.int64))
        if self.words.shape[0] != self.labels.shape[0]:
            raise DimensionError(
                f"{self.words.shape[0]} codes but {self.labels.shape[0]} labels")
        if self.words.shape[1] != words_per_code(self.length):
            raise DimensionError(
                f"{self.words.shape[1]} words per code, expected "
                f"{words_per_code(self.length)} for length {self.length}")

    def __len__(self) -> int:
        return self.words.shape[0]

    def code(self, index: int) -> BinaryCode:
        return BinaryCode(self.words[index].copy(), self.length)


def encode(model: HashModel, features: np.ndarray, labels=None) -> BinaryCodeSet:
    """Hash feature rows through the model into a packed code set.

    Labels are carried alongside the codes for retrieval evaluation; pass
    None to fill with -1 when they are unknown.
    """
    u = np.asarray(features, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != model.feature_dim:
        raise DimensionError(
            f"features have shape {u.shape}, expected (n, {model.feature_dim})")
    bits = (u @ model.weights + model.bias >= 0).astype(np.uint8)
    if labels is None:
        labels = np.full(u.shape[0], -1, dtype=np.int64)
    labels = np.atleast_1d(np.asarray(labels))
    return BinaryCodeSet(words=pack_bits(bits), labels=labels,
                         length=model.code_length)


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    """Number of differing bit positions between two equal-length codes."""
    if a.length != b.length:
        raise DimensionError(f"code lengths differ: {a.length} vs {b.length}")
    return int(np.bitwise_count(a.words ^ b.words).sum())


def hamming_to_set(query: BinaryCode, database: BinaryCodeSet) -> np.ndarray:
    """Hamming distance from one code to every code in a set (uint32)."""
    if query.length != database.length:
        raise DimensionError(
            f"code lengths differ: {query.length} vs {database.length}")
    xor = database.words ^ query.words[None, :]
    return np.bitwise_count(xor).sum(axis=1, dtype=np.uint32)


def save_code_set(path, code_set: BinaryCodeSet) -> None:
    """Write a code set atomically (temp file + rename)."""
    n = len(code_set)
    header = CODE_MAGIC + struct.pack("<BII", CODE_VERSION, n, code_set.length)
    body = code_set.words.astype("<u8").tobytes()
    labels = code_set.labels.astype("<u4").tobytes()
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(body)
        fh.write(labels)
    os.replace(tmp, path)


def load_code_set(path) -> BinaryCodeSet:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != CODE_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:8]!r}, expected {CODE_MAGIC!r}")
    if len(data) < 17:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    version, n, length = struct.unpack_from("<BII", data, 8)
    if version != CODE_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    wpc = words_per_code(length)
    expected = 17 + n * wpc * 8 + n * 4
    if len(data) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes, got {len(data)}")
    words = np.frombuffer(data, dtype="<u8", count=n * wpc, offset=17)
    labels = np.frombuffer(data, dtype="<u4", count=n, offset=17 + n * wpc * 8)
    return BinaryCodeSet(words=words.reshape(n, wpc).astype(np.uint64),
                         labels=labels.astype(np.int64), length=length)
