"""End-to-end glue: trained models, circuit lowering, encoding, and benchmark rows."""
from __future__ import annotations

import concurrent.futures
import os
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .basis import DEFAULT_BASE_GATES, SKBasis, generate_basis, load_basis, save_basis, split_label
from .circuit import Circuit, circuit_unitary, parse_qasm_detailed, qasm_byte_size, layer_depth, to_qasm
from .codec import VARIANTS, Codebook, EncodedProgram, build_huffman, build_v0, encode_program, with_pseudo_counts
from .config import RunConfig
from .dictionary import (
    CX_LABEL,
    DictionarySelection,
    FrequencyTable,
    Tokenizer,
    learn_frequencies,
    reexpand_unselected,
    reexpanded_frequencies,
    select_dictionary,
    tokenize_circuit,
)
from .lossless import compress
from .qsd import LoweringResult, lower_circuit, qsd_decompose

V0_LABELS = DEFAULT_BASE_GATES + (CX_LABEL,)


@lru_cache(maxsize=16)
def cached_basis(depth: int, base_gates: tuple[str, ...] = DEFAULT_BASE_GATES) -> SKBasis:
    return generate_basis(base_gates, depth)


@dataclass
class Model:
    """Everything the encoder needs: the basis, SKD settings, statistics and codebooks."""

    basis: SKBasis
    recursion: int
    simplify: bool
    table: FrequencyTable
    selection: DictionarySelection
    codebooks: dict[str, Codebook] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return self.basis.depth


def letter_frequencies(table: FrequencyTable, base_gates=DEFAULT_BASE_GATES) -> dict[str, float]:
    out = {g: 0.0 for g in base_gates}
    for lb, v in table.entries.items():
        if lb == CX_LABEL:
            continue
        for g in split_label(lb, base_gates):
            out[g] += v
    out[CX_LABEL] = table.entries.get(CX_LABEL, 0.0)
    return out


def trained_codebooks(table: FrequencyTable, selection: DictionarySelection, basis: SKBasis) -> dict[str, Codebook]:
    """Global codebooks from training statistics.

    Labels the training ensemble never used (CX in particular, since training
    targets are single-qubit) get the smallest observed weight so that every
    instruction stays encodable.
    """
    prov = dict(table.provenance)
    v1 = letter_frequencies(table, basis.base_gates)
    v2 = dict(table.entries)
    v3 = reexpanded_frequencies(table, selection, basis.base_gates)
    return {
        "v0": build_v0(V0_LABELS, {"source": "fixed-width"}),
        "v1": build_huffman(with_pseudo_counts(v1, list(v1)), "v1", prov),
        "v2": build_huffman(with_pseudo_counts(v2, list(v2)), "v2", prov),
        "v3": build_huffman(with_pseudo_counts(v3, list(v3)), "v3", {**prov, "selection_mode": selection.mode}),
    }


def select_from_config(table: FrequencyTable, cfg: RunConfig) -> DictionarySelection:
    if cfg.threshold_mode == "top-k":
        return select_dictionary(table, "top-k", k=cfg.top_k)
    if cfg.threshold_mode == "value":
        return select_dictionary(table, "value", value=cfg.threshold_value)
    return select_dictionary(table, "mean")


def train_model(cfg: RunConfig, basis: SKBasis | None = None) -> Model:
    cfg.validate()
    basis = basis or cached_basis(cfg.sk_depth)
    table = learn_frequencies(
        cfg.ensemble_size, cfg.seed, basis.depth, cfg.sk_recursion, basis=basis, simplify=cfg.simplify, workers=cfg.workers
    )
    selection = select_from_config(table, cfg)
    return Model(basis, cfg.sk_recursion, cfg.simplify, table, selection, trained_codebooks(table, selection, basis))


MODEL_FILES = {
    "basis": "basis.txt",
    "frequencies": "frequencies.txt",
    "selection": "selection.txt",
}


def save_model(model: Model, directory) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    save_basis(model.basis, d / MODEL_FILES["basis"])
    written.append(d / MODEL_FILES["basis"])
    (d / MODEL_FILES["frequencies"]).write_text(model.table.to_text(), encoding="utf-8")
    written.append(d / MODEL_FILES["frequencies"])
    (d / MODEL_FILES["selection"]).write_text(model.selection.to_text(), encoding="utf-8")
    written.append(d / MODEL_FILES["selection"])
    for v, cb in model.codebooks.items():
        p = d / f"codebook_{v}.txt"
        p.write_text(cb.to_text(), encoding="utf-8")
        written.append(p)
    return written


def load_model(directory) -> Model:
    d = Path(directory)
    basis = load_basis(d / MODEL_FILES["basis"])
    table = FrequencyTable.from_text((d / MODEL_FILES["frequencies"]).read_text(encoding="utf-8"))
    selection = DictionarySelection.from_text((d / MODEL_FILES["selection"]).read_text(encoding="utf-8"))
    codebooks = {v: Codebook.from_text((d / f"codebook_{v}.txt").read_text(encoding="utf-8")) for v in VARIANTS}
    recursion = int(table.provenance.get("n", "0"))
    simplify = table.provenance.get("simplify", "true") == "true"
    return Model(basis, recursion, simplify, table, selection, codebooks)


# ---------------------------------------------------------------------------
# per-circuit work
# ---------------------------------------------------------------------------

def lower(circuit: Circuit, model: Model, lowering: str = "per-gate") -> LoweringResult:
    """Bring a circuit down to {H, T, Tdg, CX}.

    ``per-gate`` expands each rotation in place; ``unitary`` first rebuilds
    the whole circuit from its dense unitary by Shannon decomposition.
    """
    if lowering == "unitary":
        circuit = qsd_decompose(circuit_unitary(circuit))
    elif lowering != "per-gate":
        raise ValueError(f"unknown lowering mode {lowering!r}")
    return lower_circuit(circuit, model.basis, model.recursion, simplify=model.simplify)


def token_streams(lowered: Circuit, model: Model) -> dict[str, tuple[list[str], list[int]]]:
    """Instruction and qubit-id streams of a lowered circuit for each variant."""
    base = model.basis.base_gates
    single = tokenize_circuit(lowered, Tokenizer(base, base))
    full = tokenize_circuit(lowered, Tokenizer(model.basis.non_null_labels, base))
    v3 = reexpand_unselected(full[0], model.selection, base)
    ids3 = _reexpanded_ids(full[0], full[1], model.selection, base)
    return {"v0": single, "v1": single, "v2": full, "v3": (v3, ids3)}


def _reexpanded_ids(tokens, ids, selection, base_gates) -> list[int]:
    keep = set(selection.selected)
    out: list[int] = []
    pos = 0
    for t in tokens:
        if t == CX_LABEL:
            out.extend(ids[pos : pos + 2])
            pos += 2
        else:
            reps = 1 if t in keep else len(split_label(t, base_gates))
            out.extend([ids[pos]] * reps)
            pos += 1
    return out


def codebook_for(variant: str, tokens, model: Model, mode: str = "per-circuit") -> Codebook:
    """Codebook used for one variant: fixed (v0), trained (v3 or mode=trained), or per-circuit Huffman."""
    if variant == "v0" or variant == "v3" or mode == "trained":
        return model.codebooks[variant]
    counts = Counter(tokens)
    if not counts:
        return model.codebooks[variant]
    return build_huffman(dict(counts), variant, {"source": "per-circuit"})


@dataclass
class EncodedCircuit:
    lowered: Circuit
    error_bound: float
    programs: dict[str, EncodedProgram]
    codebooks: dict[str, Codebook]
    streams: dict[str, tuple[list[str], list[int]]]


def payload_bytes(p: EncodedProgram) -> bytes:
    """Instruction and qubit-id streams, each byte-padded, without the header."""
    return np.packbits(p.instruction_bits).tobytes() + np.packbits(p.qubit_id_bits).tobytes()


def encode_circuit(circuit: Circuit, model: Model, lowering: str = "per-gate", codebook_mode: str = "per-circuit", variants=VARIANTS) -> EncodedCircuit:
    low = lower(circuit, model, lowering)
    streams = token_streams(low.circuit, model)
    programs, books = {}, {}
    for v in variants:
        tokens, ids = streams[v]
        cb = codebook_for(v, tokens, model, codebook_mode)
        books[v] = cb
        programs[v] = encode_program(tokens, ids, cb, low.circuit.num_qubits)
    return EncodedCircuit(low.circuit, low.error_bound, programs, books, streams)


def bench_row(name: str, qasm_text: str, model: Model, lowering: str, codebook_mode: str) -> dict:
    """Raw report columns for one circuit; failures come back with ``error`` set."""
    row = {"name": name, "lowering": lowering, "codebook_mode": codebook_mode, "error": ""}
    try:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            circuit, _ = parse_qasm_detailed(qasm_text)
        enc = encode_circuit(circuit, model, lowering, codebook_mode)
    except Exception as exc:  # recorded in the report, never fatal for the batch
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    low = enc.lowered
    row.update(
        num_qubits=low.num_qubits,
        source_ops=len(circuit),
        depth=low.depth,
        layer_depth=layer_depth(low),
        decomposition_error=float(enc.error_bound),
        qasm_bits=qasm_byte_size(to_qasm(low)),
        v0_lossless_bytes=compress(payload_bytes(enc.programs["v0"])).size,
        v3_lossless_bytes=compress(payload_bytes(enc.programs["v3"])).size,
    )
    for v in VARIANTS:
        row[f"{v}_bits"] = enc.programs[v].total_bits
    return row


def _bench_job(args):
    name, text, model, lowering, mode = args
    return bench_row(name, text, model, lowering, mode)


def corpus_files(directory) -> list[Path]:
    return sorted(Path(directory).glob("*.qasm"), key=lambda p: (_qubits_from_name(p), p.name))


def _qubits_from_name(p: Path) -> int:
    tail = p.stem.rsplit("_", 1)[-1]
    return int(tail) if tail.isdigit() else 0


def run_bench(paths, model: Model, lowering: str = "per-gate", codebook_mode: str = "per-circuit", workers: int = 1) -> list[dict]:
    jobs = [(Path(p).stem, Path(p).read_text(encoding="utf-8"), model, lowering, codebook_mode) for p in paths]
    if workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            return list(pool.map(_bench_job, jobs))
    return [_bench_job(j) for j in jobs]


def default_corpus_dir() -> Path:
    return Path(__file__).parent / "corpus"
