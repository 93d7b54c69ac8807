"""Instruction dictionaries: tokenization, usage statistics, and selection.

An *alphabet* is a set of basis labels (``"H"``, ``"HTH"``, ...). Gate streams
are segmented into alphabet labels by greedy longest match, which is lossless
whenever the single base gates are in the alphabet. ``"CX"`` is carried as an
opaque two-qubit instruction next to the single-qubit labels.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .basis import DEFAULT_BASE_GATES, NULL_LABEL, SKBasis, generate_basis, split_label
from .circuit import Circuit, Gate, Op
from .numerics import haar_random_su2
from .skd import solovay_kitaev

CX_LABEL = "CX"
FORCED_LABELS = (CX_LABEL,) + DEFAULT_BASE_GATES
THRESHOLD_MODES = ("mean", "top-k", "value")


class Tokenizer:
    """Greedy longest-match segmenter over a fixed alphabet of gate words."""

    def __init__(self, labels, base_gates=DEFAULT_BASE_GATES):
        self.base_gates = tuple(base_gates)
        self.labels = tuple(dict.fromkeys(lb for lb in labels if lb not in (NULL_LABEL, CX_LABEL)))
        missing = [g for g in self.base_gates if g not in self.labels]
        if missing:
            raise ValueError(f"alphabet must contain every base gate; missing {missing}")
        self._gate_index = {g: i for i, g in enumerate(self.base_gates)}
        children = [[-1] * len(self.base_gates)]
        terminal = [-1]
        for li, label in enumerate(self.labels):
            node = 0
            for g in split_label(label, self.base_gates):
                c = self._gate_index[g]
                if children[node][c] < 0:
                    children[node][c] = len(children)
                    children.append([-1] * len(self.base_gates))
                    terminal.append(-1)
                node = children[node][c]
            terminal[node] = li
        self._child = np.array(children, dtype=np.int64)
        self._terminal = np.array(terminal, dtype=np.int64)

    def encode_gates(self, stream) -> np.ndarray:
        try:
            return np.array([self._gate_index[g] for g in stream], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"gate {exc.args[0]!r} is not a base gate") from None

    def __call__(self, stream) -> list[str]:
        idx, fail = _kernels.greedy_tokenize(self.encode_gates(stream), self._child, self._terminal)
        if fail >= 0:  # unreachable while base gates are in the alphabet
            raise ValueError(f"no alphabet entry matches the stream at position {fail}")
        return [self.labels[i] for i in idx.tolist()]


def tokenize(stream, alphabet, base_gates=DEFAULT_BASE_GATES) -> list[str]:
    """Segment a single-qubit gate stream into alphabet labels (greedy, lossless)."""
    return Tokenizer(alphabet, base_gates)(stream)


def detokenize(tokens, base_gates=DEFAULT_BASE_GATES) -> list[str]:
    out: list[str] = []
    for t in tokens:
        out.extend(split_label(t, base_gates))
    return out


def tokenize_circuit(circuit: Circuit, tokenizer: Tokenizer) -> tuple[list[str], list[int]]:
    """Tokenize a lowered circuit into an instruction stream and a qubit-id stream.

    Single-qubit gates accumulate in a run per qubit. A CX first flushes the
    pending runs of both its qubits (oldest run first), then emits itself;
    the remaining runs are flushed at the end in order of their first gate.
    Each single-qubit token contributes one qubit id, each CX two.
    """
    pending: dict[int, tuple[int, list[str]]] = {}
    tokens: list[str] = []
    ids: list[int] = []

    for pos, op in enumerate(circuit.ops):
        kind = op.gate.kind
        if kind == CX_LABEL:
            runs = sorted((pending[q][0], q) for q in op.qubits if q in pending)
            for _, q in runs:
                _, gates = pending.pop(q)
                for t in tokenizer(gates):
                    tokens.append(t)
                    ids.append(q)
            tokens.append(CX_LABEL)
            ids.extend(op.qubits)
        elif kind in tokenizer.base_gates:
            q = op.qubits[0]
            if q not in pending:
                pending[q] = (pos, [])
            pending[q][1].append(kind)
        else:
            raise ValueError(f"gate {kind} is not in the lowered gate set; lower the circuit first")
    for _, q in sorted((start, q) for q, (start, _) in pending.items()):
        for t in tokenizer(pending[q][1]):
            tokens.append(t)
            ids.append(q)
    return tokens, ids


def detokenize_circuit(tokens, qubit_ids, num_qubits: int, base_gates=DEFAULT_BASE_GATES) -> Circuit:
    ops = []
    pos = 0
    for t in tokens:
        if t == CX_LABEL:
            ops.append(Op(Gate("CX"), (qubit_ids[pos], qubit_ids[pos + 1])))
            pos += 2
        else:
            q = qubit_ids[pos]
            pos += 1
            ops.extend(Op(Gate(g), (q,)) for g in split_label(t, base_gates))
    if pos != len(qubit_ids):
        raise ValueError(f"{len(qubit_ids) - pos} unused qubit ids")
    return Circuit(num_qubits, tuple(ops))


# ---------------------------------------------------------------------------
# frequency tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyTable:
    """Mean usage count per circuit for every instruction label.

    ``entries`` keeps the basis order (CX last); ``provenance`` records what
    produced the table.
    """

    entries: dict[str, float]
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("frequencies must be nonnegative")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def to_text(self) -> str:
        lines = ["# eqisa frequency-table"]
        lines += [f"# {k}={v}" for k, v in self.provenance.items()]
        lines += [f"{k}\t{v!r}" for k, v in self.entries.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FrequencyTable":
        entries: dict[str, float] = {}
        prov: dict[str, str] = {}
        for ln in text.splitlines():
            if not ln.strip():
                continue
            if ln.startswith("#"):
                body = ln[1:].strip()
                if "=" in body:
                    k, _, v = body.partition("=")
                    prov[k.strip()] = v.strip()
                continue
            k, _, v = ln.partition("\t")
            entries[k] = float(v)
        return cls(entries, prov)


def _decompose_and_count(args) -> dict[str, int]:
    u, n, basis, simplify = args
    res = solovay_kitaev(u, n, basis, simplify=simplify)
    counts: dict[str, int] = {}
    for t in Tokenizer(basis.non_null_labels, basis.base_gates)(res.sequence):
        counts[t] = counts.get(t, 0) + 1
    return counts


def learn_frequencies(
    ensemble_size: int,
    seed: int = 0,
    d: int = 5,
    n: int = 4,
    basis: SKBasis | None = None,
    simplify: bool = True,
    workers: int | None = None,
) -> FrequencyTable:
    """Average instruction usage over SK decompositions of Haar-random SU(2) targets.

    Every target is drawn up front from one seeded generator, so the table
    does not depend on ``workers``; counts are summed in sample order.
    """
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be >= 1")
    if basis is None:
        basis = generate_basis(DEFAULT_BASE_GATES, d)
    elif basis.depth != d:
        raise ValueError(f"basis depth {basis.depth} does not match d={d}")
    rng = np.random.default_rng(seed)
    targets = [haar_random_su2(rng) for _ in range(ensemble_size)]
    jobs = [(u, n, basis, simplify) for u in targets]
    if workers and workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            per_sample = list(pool.map(_decompose_and_count, jobs, chunksize=8))
    else:
        per_sample = [_decompose_and_count(j) for j in jobs]
    totals = {lb: 0 for lb in basis.non_null_labels}
    for counts in per_sample:
        for k, v in counts.items():
            totals[k] += v
    entries = {lb: totals[lb] / ensemble_size for lb in basis.non_null_labels}
    entries[CX_LABEL] = 0.0
    provenance = {
        "d": str(d),
        "n": str(n),
        "ensemble_size": str(ensemble_size),
        "seed": str(seed),
        "simplify": str(bool(simplify)).lower(),
        "base_gates": " ".join(basis.base_gates),
    }
    return FrequencyTable(entries, provenance)


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DictionarySelection:
    """Labels kept for the sparse dictionary; always includes CX and the base gates."""

    selected: tuple[str, ...]
    mode: str = "mean"
    threshold: float | None = None

    def __contains__(self, label: str) -> bool:
        return label in self.selected

    def __len__(self) -> int:
        return len(self.selected)

    def to_text(self) -> str:
        lines = ["# eqisa dictionary-selection", f"# mode={self.mode}"]
        if self.threshold is not None:
            lines.append(f"# threshold={self.threshold!r}")
        lines += list(self.selected)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DictionarySelection":
        mode, threshold, labels = "mean", None, []
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                body = ln[1:].strip()
                if body.startswith("mode="):
                    mode = body[5:]
                elif body.startswith("threshold="):
                    threshold = float(body[10:])
                continue
            labels.append(ln)
        return cls(tuple(labels), mode, threshold)


def select_dictionary(
    table: FrequencyTable,
    mode: str = "mean",
    k: int | None = None,
    value: float | None = None,
    base_gates=DEFAULT_BASE_GATES,
    extends: DictionarySelection | None = None,
) -> DictionarySelection:
    """Keep the frequently used instructions.

    Modes:
        ``mean``: keep labels whose mean count is at least the mean of all
            nonzero mean counts.
        ``top-k``: keep the most used labels until the selection (including
            CX and the base gates) has ``k`` entries; ties go to the earlier
            label in the table.
        ``value``: keep labels with mean count >= ``value``.

    With ``extends``, the labels of an earlier selection are kept and only
    the remaining slots (top-k) or extra labels (other modes) are chosen
    afresh, so dictionaries for growing ``k`` are nested.

    The result lists CX and the base gates first, then the kept labels in
    table order.
    """
    if not table.entries:
        raise ValueError("frequency table is empty")
    forced = (CX_LABEL,) + tuple(base_gates)
    order = {lb: i for i, lb in enumerate(table.entries)}
    candidates = [lb for lb in table.entries if lb not in forced and lb != NULL_LABEL]
    threshold = None
    if mode == "mean":
        nonzero = [v for v in table.entries.values() if v > 0]
        threshold = float(np.mean(nonzero)) if nonzero else float("inf")
        chosen = {lb for lb in candidates if table.entries[lb] >= threshold}
    elif mode == "value":
        if value is None:
            raise ValueError("mode 'value' needs an explicit threshold value")
        threshold = float(value)
        chosen = {lb for lb in candidates if table.entries[lb] >= threshold}
    elif mode == "top-k":
        if k is None or k < len(forced):
            raise ValueError(f"top-k needs k >= {len(forced)} (CX and base gates are always kept)")
        kept = {lb for lb in (extends.selected if extends else ()) if lb not in forced}
        missing = kept - set(candidates)
        if missing:
            raise ValueError(f"extended selection has labels missing from the table: {sorted(missing)}")
        if len(kept) + len(forced) > k:
            raise ValueError(f"k={k} is smaller than the extended selection ({len(kept) + len(forced)})")
        ranked = sorted(
            (lb for lb in candidates if table.entries[lb] > 0 and lb not in kept),
            key=lambda lb: (-table.entries[lb], order[lb]),
        )
        chosen = kept | set(ranked[: k - len(forced) - len(kept)])
        if chosen:
            threshold = min(table.entries[lb] for lb in chosen)
    else:
        raise ValueError(f"unknown threshold mode {mode!r}; expected one of {THRESHOLD_MODES}")
    if extends is not None and mode != "top-k":
        chosen |= {lb for lb in extends.selected if lb not in forced and lb in order}
    rest = sorted(chosen, key=order.__getitem__)
    return DictionarySelection(forced + tuple(rest), mode, threshold)


def reexpand_unselected(tokens, selection, base_gates=DEFAULT_BASE_GATES) -> list[str]:
    """Replace tokens outside the selection by their single-gate letters."""
    keep = set(selection.selected if isinstance(selection, DictionarySelection) else selection)
    out: list[str] = []
    for t in tokens:
        if t in keep or t == CX_LABEL:
            out.append(t)
        else:
            out.extend(split_label(t, base_gates))
    return out


def reexpanded_frequencies(table: FrequencyTable, selection: DictionarySelection, base_gates=DEFAULT_BASE_GATES) -> dict[str, float]:
    """Frequencies over the selection after unselected labels fall back to letters."""
    keep = set(selection.selected)
    out = {lb: 0.0 for lb in selection.selected}
    for lb, v in table.entries.items():
        if lb in keep:
            out[lb] += v
        elif v:
            for g in split_label(lb, base_gates):
                out[g] += v
    return out
