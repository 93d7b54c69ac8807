"""Compression, energy and complexity figures, and the per-circuit report.

Every derived report column is a pure function of the raw columns
(:func:`derive`), so a saved CSV can be re-checked with :func:`verify_rows`.
"""
from __future__ import annotations

import csv
import io
import math

from .circuit import Circuit
from .codec import EncodedProgram

DEFAULT_PJ_PER_BIT = 2.46

RAW_COLUMNS = (
    "name",
    "num_qubits",
    "lowering",
    "codebook_mode",
    "source_ops",
    "depth",
    "layer_depth",
    "v0_bits",
    "v1_bits",
    "v2_bits",
    "v3_bits",
    "v0_lossless_bytes",
    "v3_lossless_bytes",
    "qasm_bits",
    "decomposition_error",
    "error",
)
DERIVED_COLUMNS = (
    "v1_factor",
    "v2_factor",
    "v3_factor",
    "v3_lossless_bits",
    "v3_lossless_vs_qasm",
    "energy_qasm_j",
    "energy_v0_j",
    "energy_v3_j",
    "energy_v3_lossless_j",
    "circuit_complexity",
    "description_complexity",
    "description_complexity_lossless",
    "total_complexity",
    "total_complexity_lossless",
    "complexity_gap",
)
COLUMNS = RAW_COLUMNS + DERIVED_COLUMNS
_INT_COLUMNS = {
    "num_qubits",
    "source_ops",
    "depth",
    "layer_depth",
    "v0_bits",
    "v1_bits",
    "v2_bits",
    "v3_bits",
    "v0_lossless_bytes",
    "v3_lossless_bytes",
    "qasm_bits",
    "v3_lossless_bits",
    "circuit_complexity",
    "description_complexity",
    "description_complexity_lossless",
    "total_complexity",
    "total_complexity_lossless",
    "complexity_gap",
}
_TEXT_COLUMNS = {"name", "lowering", "codebook_mode", "error"}


def compression_factor(encoded_bits: float, baseline_bits: float) -> float:
    """``encoded / baseline``; the baseline must be positive."""
    if not baseline_bits > 0:
        raise ValueError(f"baseline must be positive, got {baseline_bits}")
    return encoded_bits / baseline_bits


def energy_estimate(bits: float, pj_per_bit: float = DEFAULT_PJ_PER_BIT) -> float:
    """Link energy in joules for sending ``bits`` at ``pj_per_bit`` picojoules per bit."""
    if pj_per_bit < 0:
        raise ValueError(f"energy rate must be nonnegative, got {pj_per_bit}")
    if bits < 0:
        raise ValueError(f"bit count must be nonnegative, got {bits}")
    return bits * pj_per_bit * 1e-12


def circuit_complexity(c: Circuit) -> int:
    """Qubit count times serial depth."""
    return c.num_qubits * c.depth


def description_complexity(p: EncodedProgram | None, lossless_bits: int | None = None, post_lossless: bool = False) -> int:
    """Bit length of the v3 program; with ``post_lossless`` the compressed size instead."""
    if post_lossless:
        if lossless_bits is None:
            raise ValueError("post_lossless needs the compressed bit count")
        return int(lossless_bits)
    return 0 if p is None else p.total_bits


def total_complexity(c: Circuit, p: EncodedProgram | None, lossless_bits: int | None = None, post_lossless: bool = False) -> int:
    return circuit_complexity(c) + description_complexity(p, lossless_bits, post_lossless)


# ---------------------------------------------------------------------------
# report rows
# ---------------------------------------------------------------------------

def _factor(a, b):
    return compression_factor(a, b) if b else math.nan


def derive(raw: dict, pj_per_bit: float = DEFAULT_PJ_PER_BIT) -> dict:
    """Full row (raw + derived columns) from the raw columns."""
    row = {k: raw.get(k) for k in RAW_COLUMNS}
    if row.get("error"):
        row.update({k: None for k in DERIVED_COLUMNS})
        return row
    v0, v3 = row["v0_bits"], row["v3_bits"]
    lossless_bits = 8 * row["v3_lossless_bytes"]
    circ = row["num_qubits"] * row["depth"]
    row.update(
        v1_factor=_factor(row["v1_bits"], v0),
        v2_factor=_factor(row["v2_bits"], v0),
        v3_factor=_factor(v3, v0),
        v3_lossless_bits=lossless_bits,
        v3_lossless_vs_qasm=_factor(lossless_bits, row["qasm_bits"]),
        energy_qasm_j=energy_estimate(row["qasm_bits"], pj_per_bit),
        energy_v0_j=energy_estimate(v0, pj_per_bit),
        energy_v3_j=energy_estimate(v3, pj_per_bit),
        energy_v3_lossless_j=energy_estimate(lossless_bits, pj_per_bit),
        circuit_complexity=circ,
        description_complexity=v3,
        description_complexity_lossless=lossless_bits,
        total_complexity=circ + v3,
        total_complexity_lossless=circ + lossless_bits,
        complexity_gap=circ - v3,
    )
    return row


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(col: str, text: str):
    if text == "":
        return "" if col in _TEXT_COLUMNS else None
    if col in _TEXT_COLUMNS:
        return text
    if col in _INT_COLUMNS:
        return int(text)
    return float(text)


def report_header(pj_per_bit: float, notes: dict | None = None) -> list[str]:
    lines = [
        "# eqisa benchmark report",
        "# qasm_bits: 8 x bytes of the lowered circuit printed as OpenQASM 2.0, comments stripped",
        "# bit totals exclude stream headers; factors are relative to v0 (2 bits per gate)",
        f"# energy_pj_per_bit={pj_per_bit!r}",
    ]
    for k, v in (notes or {}).items():
        lines.append(f"# {k}={v}")
    return lines


def rows_to_csv(rows, pj_per_bit: float = DEFAULT_PJ_PER_BIT, notes: dict | None = None) -> str:
    buf = io.StringIO()
    for line in report_header(pj_per_bit, notes):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> tuple[list[dict], dict]:
    """Parse a report CSV; returns ``(rows, header_notes)``."""
    notes: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            k, sep, v = line[1:].strip().partition("=")
            if sep:
                notes[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None:
        return [], notes
    if tuple(header) != COLUMNS:
        raise ValueError("unexpected report columns")
    rows = [{c: _parse(c, v) for c, v in zip(header, rec)} for rec in reader]
    return rows, notes


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


def verify_rows(rows, pj_per_bit: float = DEFAULT_PJ_PER_BIT) -> list[tuple[int, str]]:
    """Columns whose stored value differs from recomputation, as ``(row, column)`` pairs."""
    bad = []
    for i, r in enumerate(rows):
        again = derive(r, pj_per_bit)
        for c in DERIVED_COLUMNS:
            if not _same(again[c], r.get(c)):
                bad.append((i, c))
    return bad


def render_table(rows, columns=None) -> str:
    """Fixed-width text table of selected columns."""
    columns = columns or (
        "name",
        "num_qubits",
        "depth",
        "v0_bits",
        "v3_bits",
        "v3_factor",
        "v3_lossless_bits",
        "qasm_bits",
        "v3_lossless_vs_qasm",
        "complexity_gap",
    )

    def cell(v):
        if isinstance(v, float):
            return f"{v:.4g}"
        return "" if v is None else str(v)

    table = [list(columns)] + [[cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(columns))]
    lines = ["  ".join(s.rjust(w) if j else s.ljust(w) for j, (s, w) in enumerate(zip(row, widths))) for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
