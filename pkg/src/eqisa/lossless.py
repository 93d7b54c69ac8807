"""A bzip2-style single-block compressor: RLE1, BWT, MTF, RLE2, Huffman.

The stages mirror bzip2's pipeline but the container is our own::

    magic "EQBZ" | flags u8 | original length u32 | crc32 u32
    then, if flags has STORED: the raw bytes
    otherwise: primary index u32 | RLE2 length u32 | table size u16
               | (symbol u8, code length u8) * table size
               | payload bits u32 | payload bytes

Codes are canonical Huffman codes rebuilt from the stored lengths. A block
is stored raw whenever coding would not make it smaller.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CorruptionError
from .huffman import canonical_codes, code_lengths

MAGIC = b"EQBZ"
BLOCK_SIZE = 900_000
FLAG_STORED = 0x01
_HEAD = struct.Struct(">4sBII")
_CODED = struct.Struct(">IIH")
_BITS = struct.Struct(">I")


def _as_array(data) -> np.ndarray:
    return np.frombuffer(bytes(data), dtype=np.uint8).copy()


# ---------------------------------------------------------------------------
# individual stages
# ---------------------------------------------------------------------------

def bwt_forward(data: bytes) -> tuple[bytes, int]:
    """Last column of the sorted cyclic rotations, and the row holding the input.

    Rotations are ranked by prefix doubling; equal rotations (periodic input)
    keep their start-index order.
    """
    n = len(data)
    if n == 0:
        return b"", 0
    s = _as_array(data).astype(np.int64)
    rank = s.copy()
    sa = np.argsort(rank, kind="stable")
    idx = np.arange(n)
    k = 1
    while k < n:
        second = rank[(idx + k) % n]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        step = np.empty(n, dtype=np.int64)
        step[0] = 0
        step[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(step)
        rank = new_rank
        if rank.max() == n - 1:
            break
        k *= 2
    last = s[(sa - 1) % n].astype(np.uint8)
    primary = int(np.flatnonzero(sa == 0)[0])
    return last.tobytes(), primary


def bwt_inverse(data: bytes, primary: int) -> bytes:
    n = len(data)
    if n == 0:
        if primary != 0:
            raise CorruptionError("bwt", "nonzero primary index for empty block")
        return b""
    if not 0 <= primary < n:
        raise CorruptionError("bwt", f"primary index {primary} out of range for {n} bytes")
    return _kernels.bwt_inverse(_as_array(data), int(primary)).tobytes()


def mtf_encode(data: bytes) -> bytes:
    return _kernels.mtf_encode(_as_array(data)).tobytes()


def mtf_decode(data: bytes) -> bytes:
    return _kernels.mtf_decode(_as_array(data)).tobytes()


def rle_encode(data: bytes, stage: int) -> bytes:
    """Stage 1: runs of 4..255 equal bytes become 4 literals plus a count byte.
    Stage 2: runs of 1..256 zero bytes become ``0, run - 1``."""
    arr = _as_array(data)
    if stage == 1:
        return _kernels.rle1_encode(arr).tobytes()
    if stage == 2:
        return _kernels.rle2_encode(arr).tobytes()
    raise ValueError(f"stage must be 1 or 2, got {stage}")


def rle_decode(data: bytes, stage: int) -> bytes:
    arr = _as_array(data)
    if stage == 1:
        out, status = _kernels.rle1_decode(arr)
        if status == 1:
            raise CorruptionError("rle1", "run count above 251")
        if status == 2:
            raise CorruptionError("rle1", "run of four literals without a count byte")
        return out.tobytes()
    if stage == 2:
        out, status = _kernels.rle2_decode(arr)
        if status:
            raise CorruptionError("rle2", "zero marker without a run length")
        return out.tobytes()
    raise ValueError(f"stage must be 1 or 2, got {stage}")


# ---------------------------------------------------------------------------
# block
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompressedBlock:
    original_length: int
    crc: int
    flags: int
    bwt_primary_index: int = 0
    symbol_count: int = 0
    code_lengths: dict[int, int] = field(default_factory=dict)
    payload_bits: int = 0
    payload: bytes = b""

    @property
    def stored(self) -> bool:
        return bool(self.flags & FLAG_STORED)

    def to_bytes(self) -> bytes:
        head = _HEAD.pack(MAGIC, self.flags, self.original_length, self.crc)
        if self.stored:
            return head + self.payload
        table = b"".join(struct.pack(">BB", s, ln) for s, ln in sorted(self.code_lengths.items()))
        return (
            head
            + _CODED.pack(self.bwt_primary_index, self.symbol_count, len(self.code_lengths))
            + table
            + _BITS.pack(self.payload_bits)
            + self.payload
        )

    @property
    def size(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedBlock":
        data = bytes(data)
        if len(data) < _HEAD.size:
            raise CorruptionError("container", "block shorter than its header")
        magic, flags, length, crc = _HEAD.unpack_from(data)
        if magic != MAGIC:
            raise CorruptionError("container", f"bad magic {magic!r}")
        if flags & ~FLAG_STORED:
            raise CorruptionError("container", f"unknown flags {flags:#x}")
        pos = _HEAD.size
        if flags & FLAG_STORED:
            body = data[pos:]
            if len(body) != length:
                raise CorruptionError("container", f"stored block holds {len(body)} bytes, expected {length}")
            return cls(length, crc, flags, payload=body)
        if len(data) < pos + _CODED.size:
            raise CorruptionError("container", "truncated block header")
        primary, count, ntable = _CODED.unpack_from(data, pos)
        pos += _CODED.size
        if len(data) < pos + 2 * ntable + _BITS.size:
            raise CorruptionError("prefix coding", "truncated code table")
        lengths: dict[int, int] = {}
        for i in range(ntable):
            s, ln = data[pos + 2 * i], data[pos + 2 * i + 1]
            if ln == 0 or s in lengths:
                raise CorruptionError("prefix coding", "malformed code table")
            lengths[s] = ln
        pos += 2 * ntable
        (nbits,) = _BITS.unpack_from(data, pos)
        pos += _BITS.size
        payload = data[pos:]
        if len(payload) != (nbits + 7) // 8:
            raise CorruptionError("container", f"payload is {len(payload)} bytes, expected {(nbits + 7) // 8}")
        return cls(length, crc, flags, primary, count, lengths, nbits, payload)


def compress(data: bytes) -> CompressedBlock:
    """Run the five stages; fall back to a stored block if that is smaller."""
    data = bytes(data)
    if len(data) > BLOCK_SIZE:
        raise ValueError(f"input of {len(data)} bytes exceeds the {BLOCK_SIZE}-byte block size")
    crc = zlib.crc32(data)
    stored = CompressedBlock(len(data), crc, FLAG_STORED, payload=data)
    if not data:
        return stored
    r1 = rle_encode(data, 1)
    last, primary = bwt_forward(r1)
    r2 = _as_array(rle_encode(mtf_encode(last), 2))
    counts = np.bincount(r2, minlength=256)
    lengths = code_lengths({int(s): int(c) for s, c in enumerate(counts) if c})
    codes = canonical_codes(lengths)
    syms = sorted(codes)
    index = np.zeros(256, dtype=np.int64)
    for i, s in enumerate(syms):
        index[s] = i
    flat = np.array([int(b) for s in syms for b in codes[s]], dtype=np.uint8)
    lens = np.array([len(codes[s]) for s in syms], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(lens)[:-1])).astype(np.int64)
    bits = _kernels.emit_codes(index[r2], flat, offsets, lens)
    block = CompressedBlock(
        len(data), crc, 0, primary, int(r2.size), lengths, int(bits.size), np.packbits(bits).tobytes()
    )
    return block if block.size < stored.size else stored


def _decode_payload(block: CompressedBlock) -> bytes:
    codes = canonical_codes(block.code_lengths)
    syms = sorted(codes)
    left, right, leaf = [-1], [-1], [-1]
    for i, s in enumerate(syms):
        node = 0
        for b in codes[s]:
            arr = right if b == "1" else left
            if arr[node] < 0:
                arr[node] = len(leaf)
                left.append(-1)
                right.append(-1)
                leaf.append(-1)
            node = arr[node]
        leaf[node] = i
    bits = np.unpackbits(np.frombuffer(block.payload, dtype=np.uint8))
    if bits[block.payload_bits:].any():
        raise CorruptionError("prefix coding", "nonzero padding bits")
    out, used, status = _kernels.prefix_decode(
        bits[: block.payload_bits].copy(),
        block.symbol_count,
        np.array(left, np.int64),
        np.array(right, np.int64),
        np.array(leaf, np.int64),
    )
    if status or used != block.payload_bits:
        raise CorruptionError("prefix coding", "bit stream does not decode to the declared symbol count")
    return np.asarray(syms, dtype=np.uint8)[out].tobytes()


def decompress(block) -> bytes:
    """Invert :func:`compress`. Accepts a block or its serialized bytes.

    Raises:
        CorruptionError: naming the stage at which the data stopped making sense.
    """
    if not isinstance(block, CompressedBlock):
        block = CompressedBlock.from_bytes(block)
    if block.stored:
        data = bytes(block.payload)
    else:
        if not block.code_lengths:
            raise CorruptionError("prefix coding", "empty code table")
        r2 = _decode_payload(block)
        mtf = rle_decode(r2, 2)
        last = mtf_decode(mtf)
        r1 = bwt_inverse(last, block.bwt_primary_index)
        data = rle_decode(r1, 1)
    if len(data) != block.original_length:
        raise CorruptionError("rle1", f"decoded {len(data)} bytes, expected {block.original_length}")
    if zlib.crc32(data) != block.crc:
        raise CorruptionError("checksum", "crc32 mismatch")
    return data


def compressed_size(data: bytes) -> int:
    return compress(data).size
