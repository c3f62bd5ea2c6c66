"""Binary checkpoints bundling the model, codebook state, and reducer.

Layout, all little-endian, in order:

    4 bytes  magic "HCOH"
    u8       version (1)
    u32 u32  d, r
    f64      eta
    u64      round
    d*r f64  W, row-major
    r   f64  b
    u32      codebook order
    u64      codebook seed
    u32      number of assigned labels, then that many (u32 label, u32 column)
    u32 u32  reducer in_dim, out_dim
    u64      reducer seed
    u8       reducer identity flag

The codebook matrix and the projection matrix are not stored; both are
regenerated from (order, seed) and (dims, seed) on load, which keeps
checkpoints small and loads deterministic.  Writes go to a temp file
followed by an atomic rename, so a crashed run never leaves a partial
checkpoint behind.
"""

import os
import struct

import numpy as np

from .errors import FormatError
from .hadamard import HadamardCodebook
from .learner import HashModel
from .lsh import LshReducer

MAGIC = b"HCOH"
VERSION = 1


def save_checkpoint(path, model: HashModel, book: HadamardCodebook,
                    reducer: LshReducer) -> None:
    d, r = model.feature_dim, model.code_length
    parts = [
        MAGIC,
        struct.pack("<BII", VERSION, d, r),
        struct.pack("<d", model.eta),
        struct.pack("<Q", model.round),
        model.weights.astype("<f8").tobytes(),
        model.bias.astype("<f8").tobytes(),
        struct.pack("<IQ", book.order, book.seed),
        struct.pack("<I", len(book.assignment)),
    ]
    for label in sorted(book.assignment):
        parts.append(struct.pack("<II", label, book.assignment[label]))
    parts.append(struct.pack("<IIQB", reducer.in_dim, reducer.out_dim,
                             reducer.seed, 1 if reducer.is_identity else 0))
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(parts))
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a checkpoint; returns (model, codebook, reducer)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 29:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    version, d, r = struct.unpack_from("<BII", data, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    off = 13
    eta, = struct.unpack_from("<d", data, off); off += 8
    rnd, = struct.unpack_from("<Q", data, off); off += 8
    need = off + (d * r + r) * 8 + 16
    if len(data) < need:
        raise FormatError(f"{path}: expected at least {need} bytes, got {len(data)}")
    weights = np.frombuffer(data, dtype="<f8", count=d * r, offset=off)
    off += d * r * 8
    bias = np.frombuffer(data, dtype="<f8", count=r, offset=off)
    off += r * 8
    order, book_seed = struct.unpack_from("<IQ", data, off); off += 12
    n_assigned, = struct.unpack_from("<I", data, off); off += 4
    need = off + n_assigned * 8 + 17
    if len(data) != need:
        raise FormatError(f"{path}: expected {need} bytes, got {len(data)}")
    assignment = {}
    for _ in range(n_assigned):
        label, column = struct.unpack_from("<II", data, off); off += 8
        assignment[label] = column
    in_dim, out_dim, red_seed, identity = struct.unpack_from("<IIQB", data, off)

    model = HashModel(weights=weights.reshape(d, r).astype(np.float64),
                      bias=bias.astype(np.float64), eta=eta, round=rnd)
    book = HadamardCodebook.restore(order, book_seed, assignment)
    reducer = LshReducer.create(in_dim, out_dim, red_seed)
    if reducer.is_identity != bool(identity):
        raise FormatError(
            f"{path}: identity flag {identity} inconsistent with dims "
            f"{in_dim}x{out_dim}")
    if in_dim != order or out_dim != r:
        raise FormatError(
            f"{path}: reducer dims {in_dim}x{out_dim} inconsistent with "
            f"order {order} and code length {r}")
    return model, book, reducer
