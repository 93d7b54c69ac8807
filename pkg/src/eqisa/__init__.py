"""Energy-efficient quantum instruction streams.

Circuits are lowered to {H, T, Tdg, CX} by Shannon and Solovay-Kitaev
decomposition, tokenized against a basis of composite gates, Huffman coded,
and optionally passed through a bzip2-style lossless stage.
"""
from .basis import SKBasis, generate_basis
from .circuit import Circuit, Gate, Op, circuit_unitary, parse_qasm, to_qasm
from .codec import Codebook, EncodedProgram, build_huffman, build_v0, decode_program, encode_program
from .dictionary import FrequencyTable, learn_frequencies, select_dictionary
from .lossless import compress, decompress
from .qsd import lower_circuit, qsd_decompose
from .skd import solovay_kitaev

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Codebook",
    "EncodedProgram",
    "FrequencyTable",
    "Gate",
    "Op",
    "SKBasis",
    "build_huffman",
    "build_v0",
    "circuit_unitary",
    "compress",
    "decode_program",
    "decompress",
    "encode_program",
    "generate_basis",
    "learn_frequencies",
    "lower_circuit",
    "parse_qasm",
    "qsd_decompose",
    "select_dictionary",
    "solovay_kitaev",
    "to_qasm",
]
