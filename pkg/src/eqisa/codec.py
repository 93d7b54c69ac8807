"""Instruction codebooks and the EQISA program bitstream.

A program is two bit streams: the concatenated instruction codes, then the
operand qubit ids at a fixed ``ceil(log2 N)`` bits each (one id per
single-qubit token, two per CX). On disk each stream is padded to a byte
boundary behind a fixed header::

    magic "EQSA" | version u8 | variant u8 | N u16 | tokens u32
    | codebook hash u64 | instruction bits u32 | qubit-id bits u32

All integers are big-endian. Header bytes are not counted by
:func:`total_bits`.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CodebookMismatchError, CorruptionError, EncodeError
from .huffman import code_cost, huffman_codes, is_prefix_free, kraft_sum

FORMAT_VERSION = 1
MAGIC = b"EQSA"
HEADER = struct.Struct(">4sBBHIQII")
VARIANTS = ("v0", "v1", "v2", "v3")
ARITY = {"CX": 2}
_CODEBOOK_MAGIC = "# eqisa codebook"


def id_width(num_qubits: int) -> int:
    """Bits per qubit id; a single-qubit system needs none."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    return math.ceil(math.log2(num_qubits)) if num_qubits > 1 else 0


@dataclass(frozen=True, eq=False)
class Codebook:
    """A prefix-free map from instruction labels to bit strings."""

    variant: str
    codes: dict[str, str]
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.codes:
            raise ValueError("codebook is empty")
        if any(not c or set(c) - {"0", "1"} for c in self.codes.values()):
            raise ValueError("codes must be nonempty bit strings")
        if not is_prefix_free(self.codes.values()):
            raise ValueError("codes are not prefix-free")
        labels = sorted(self.codes)
        object.__setattr__(self, "_labels", labels)
        object.__setattr__(self, "_index", {lb: i for i, lb in enumerate(labels)})

    def __contains__(self, label: str) -> bool:
        return label in self.codes

    def __eq__(self, other) -> bool:
        return isinstance(other, Codebook) and self.variant == other.variant and self.codes == other.codes

    def __hash__(self):
        return hash((self.variant, tuple(sorted(self.codes.items()))))

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    @property
    def digest(self) -> int:
        """64-bit identifier of the label/code assignment."""
        text = "".join(f"{lb}\t{self.codes[lb]}\n" for lb in self._labels)
        return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")

    def cost(self, freqs) -> float:
        return code_cost(self.codes, freqs)

    def kraft(self) -> float:
        return kraft_sum(self.codes.values())

    def _emit_tables(self):
        lens = np.array([len(self.codes[lb]) for lb in self._labels], dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(lens)[:-1])).astype(np.int64)
        flat = np.array([int(b) for lb in self._labels for b in self.codes[lb]], dtype=np.uint8)
        return flat, offsets, lens

    def _decode_tree(self):
        left, right, leaf = [-1], [-1], [-1]
        for i, lb in enumerate(self._labels):
            node = 0
            for b in self.codes[lb]:
                arr = right if b == "1" else left
                if arr[node] < 0:
                    arr[node] = len(leaf)
                    left.append(-1)
                    right.append(-1)
                    leaf.append(-1)
                node = arr[node]
            leaf[node] = i
        return np.array(left, np.int64), np.array(right, np.int64), np.array(leaf, np.int64)

    def to_text(self) -> str:
        lines = [_CODEBOOK_MAGIC, f"# variant={self.variant}"]
        lines += [f"# {k}={v}" for k, v in self.provenance.items() if k != "variant"]
        lines += [f"{lb}\t{self.codes[lb]}" for lb in self._labels]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Codebook":
        lines = text.splitlines()
        if not lines or lines[0].strip() != _CODEBOOK_MAGIC:
            raise ValueError("not a codebook file")
        prov: dict[str, str] = {}
        codes: dict[str, str] = {}
        for ln in lines[1:]:
            if not ln.strip():
                continue
            if ln.startswith("#"):
                k, _, v = ln[1:].strip().partition("=")
                prov[k.strip()] = v.strip()
                continue
            lb, _, code = ln.partition("\t")
            codes[lb] = code.strip()
        variant = prov.pop("variant", "v0")
        return cls(variant, codes, prov)


def build_v0(labels, provenance=None) -> Codebook:
    """Fixed-width code: label ``i`` (in the given order) gets ``i`` in binary."""
    labels = list(dict.fromkeys(labels))
    if not labels:
        raise ValueError("v0 needs at least one label")
    width = max(1, math.ceil(math.log2(len(labels))))
    return Codebook("v0", {lb: format(i, f"0{width}b") for i, lb in enumerate(labels)}, dict(provenance or {}))


def build_huffman(freqs, variant: str = "v1", provenance=None) -> Codebook:
    """Huffman codebook over the labels with positive frequency."""
    return Codebook(variant, huffman_codes(freqs), dict(provenance or {}))


def with_pseudo_counts(freqs, labels) -> dict[str, float]:
    """Give zero-weight ``labels`` the smallest positive weight so they stay encodable."""
    out = {lb: float(freqs.get(lb, 0.0)) for lb in labels}
    positive = [w for w in out.values() if w > 0]
    floor = min(positive) if positive else 1.0
    return {lb: (w if w > 0 else floor) for lb, w in out.items()}


@dataclass(frozen=True)
class EncodedProgram:
    variant: str
    num_qubits: int
    token_count: int
    codebook_hash: int
    instruction_bits: np.ndarray
    qubit_id_bits: np.ndarray
    version: int = FORMAT_VERSION

    @property
    def total_bits(self) -> int:
        return int(self.instruction_bits.size + self.qubit_id_bits.size)

    def to_bytes(self) -> bytes:
        head = HEADER.pack(
            MAGIC,
            self.version,
            VARIANTS.index(self.variant),
            self.num_qubits,
            self.token_count,
            self.codebook_hash,
            self.instruction_bits.size,
            self.qubit_id_bits.size,
        )
        return head + np.packbits(self.instruction_bits).tobytes() + np.packbits(self.qubit_id_bits).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedProgram":
        if len(data) < HEADER.size:
            raise CorruptionError("header", f"{len(data)} bytes is shorter than the header")
        magic, version, variant, n, count, digest, ib, qb = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise CorruptionError("header", f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise CorruptionError("header", f"unsupported version {version}")
        if variant >= len(VARIANTS):
            raise CorruptionError("header", f"unknown variant byte {variant}")
        if n < 1:
            raise CorruptionError("header", "num_qubits is zero")
        ilen, qlen = (ib + 7) // 8, (qb + 7) // 8
        body = data[HEADER.size:]
        if len(body) != ilen + qlen:
            raise CorruptionError("container", f"payload is {len(body)} bytes, header implies {ilen + qlen}")
        raw = np.frombuffer(body, dtype=np.uint8)
        ibits = np.unpackbits(raw[:ilen])
        qbits = np.unpackbits(raw[ilen:])
        if ibits[ib:].any() or qbits[qb:].any():
            raise CorruptionError("container", "nonzero padding bits")
        return cls(VARIANTS[variant], n, count, digest, ibits[:ib].copy(), qbits[:qb].copy(), version)


def total_bits(p: EncodedProgram) -> int:
    return p.total_bits


def _check_ids(tokens, qubit_ids, num_qubits):
    need = sum(ARITY.get(t, 1) for t in tokens)
    if need != len(qubit_ids):
        raise ValueError(f"{len(tokens)} tokens need {need} qubit ids, got {len(qubit_ids)}")
    for q in qubit_ids:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit id {q} out of range for {num_qubits} qubits")


def encode_program(tokens, qubit_ids, codebook: Codebook, num_qubits: int) -> EncodedProgram:
    """Encode a token stream and its operand ids.

    Raises:
        EncodeError: a token has no code (re-expand unselected labels first).
        ValueError: the id stream does not match the tokens' arities.
    """
    tokens = list(tokens)
    qubit_ids = [int(q) for q in qubit_ids]
    if not 1 <= num_qubits <= 0xFFFF:
        raise ValueError(f"num_qubits {num_qubits} outside 1..65535")
    for t in tokens:
        if t not in codebook.codes:
            raise EncodeError(t)
    _check_ids(tokens, qubit_ids, num_qubits)
    flat, offsets, lens = codebook._emit_tables()
    symbols = np.array([codebook._index[t] for t in tokens], dtype=np.int64)
    ibits = _kernels.emit_codes(symbols, flat, offsets, lens) if tokens else np.empty(0, np.uint8)
    w = id_width(num_qubits)
    if w and qubit_ids:
        ids = np.asarray(qubit_ids, dtype=np.int64)
        qbits = ((ids[:, None] >> np.arange(w - 1, -1, -1)) & 1).astype(np.uint8).ravel()
    else:
        qbits = np.empty(0, np.uint8)
    return EncodedProgram(codebook.variant, num_qubits, len(tokens), codebook.digest, np.asarray(ibits, np.uint8), qbits)


def decode_program(p: EncodedProgram, codebook: Codebook) -> tuple[list[str], list[int]]:
    """Recover ``(tokens, qubit_ids)``.

    Raises:
        CodebookMismatchError: the codebook hash differs from the header's.
        CorruptionError: the streams are truncated, overlong, or malformed.
    """
    if p.codebook_hash != codebook.digest:
        raise CodebookMismatchError(
            f"program was encoded with codebook {p.codebook_hash:016x}, got {codebook.digest:016x}"
        )
    left, right, leaf = codebook._decode_tree()
    syms, used, status = _kernels.prefix_decode(np.asarray(p.instruction_bits, np.uint8), p.token_count, left, right, leaf)
    if status == 1:
        raise CorruptionError("instruction stream", f"truncated after {len(syms)} of {p.token_count} tokens")
    if status == 2:
        raise CorruptionError("instruction stream", f"invalid code at bit {used - 1}")
    if used != p.instruction_bits.size:
        raise CorruptionError("instruction stream", f"{p.instruction_bits.size - used} trailing bits")
    labels = codebook._labels
    tokens = [labels[i] for i in syms.tolist()]
    need = sum(ARITY.get(t, 1) for t in tokens)
    w = id_width(p.num_qubits)
    if p.qubit_id_bits.size != need * w:
        raise CorruptionError("qubit-id stream", f"expected {need * w} bits, found {p.qubit_id_bits.size}")
    if w:
        weights = 1 << np.arange(w - 1, -1, -1)
        ids = (p.qubit_id_bits.reshape(need, w).astype(np.int64) * weights).sum(axis=1).tolist()
    else:
        ids = [0] * need
    if any(q >= p.num_qubits for q in ids):
        raise CorruptionError("qubit-id stream", "qubit id out of range")
    return tokens, ids
