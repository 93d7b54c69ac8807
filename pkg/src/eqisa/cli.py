"""Command-line entry point.

Exit codes:
    0  success
    1  nothing succeeded (every benchmark row failed, or a report did not verify)
    2  usage error, bad configuration, invalid gate set, or missing input file
    3  QASM parse error
    4  capacity limit exceeded
    5  corrupt input or codebook mismatch

Data goes to stdout (or ``-o``); diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import warnings
from pathlib import Path

from . import __version__
from .basis import DEFAULT_BASE_GATES, generate_basis, load_basis, save_basis
from .circuit import parse_qasm_detailed, to_qasm
from .codec import VARIANTS, Codebook, EncodedProgram, decode_program
from .config import CODEBOOK_MODES, LOWERING_MODES, ConfigError, RunConfig, load_config
from .dictionary import THRESHOLD_MODES, detokenize_circuit
from .errors import CapacityError, CodebookMismatchError, CorruptionError, GateSetError, QasmParseError
from .lossless import MAGIC as EQBZ_MAGIC
from .lossless import compress, decompress
from .metrics import derive, render_table, rows_from_csv, rows_to_csv, verify_rows
from .pipeline import (
    Model,
    corpus_files,
    default_corpus_dir,
    encode_circuit,
    load_model,
    payload_bytes,
    run_bench,
    save_model,
    train_model,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_CAPACITY, EXIT_INTEGRITY = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"eqisa: {msg}", file=sys.stderr)


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        _err(f"wrote {out}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _resolve_config(args) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    cfg = load_config(getattr(args, "config", None))
    overrides = {
        "sk_depth": getattr(args, "sk_depth", None),
        "sk_recursion": getattr(args, "sk_recursion", None),
        "ensemble_size": getattr(args, "ensemble_size", None),
        "seed": getattr(args, "seed", None),
        "variant": getattr(args, "variant", None),
        "threshold_mode": getattr(args, "threshold_mode", None),
        "top_k": getattr(args, "top_k", None),
        "threshold_value": getattr(args, "threshold_value", None),
        "lowering": getattr(args, "lowering", None),
        "codebook_mode": getattr(args, "codebook_mode", None),
        "energy_pj_per_bit": getattr(args, "energy_pj_per_bit", None),
        "workers": getattr(args, "workers", None),
        "model_dir": getattr(args, "model", None),
        "basis_path": getattr(args, "basis", None),
    }
    if getattr(args, "no_simplify", False):
        overrides["simplify"] = False
    if getattr(args, "post_lossless", False):
        overrides["post_lossless"] = True
    return cfg.replace(**overrides).validate()


def _basis_for(cfg: RunConfig):
    if not cfg.basis_path:
        return None
    path = Path(cfg.basis_path)
    if not path.is_file():
        raise UsageError(f"basis file not found: {path}")
    basis = _load_checked(load_basis, path, "basis file")
    if basis.depth != cfg.sk_depth:
        _err(f"using the basis file's depth d={basis.depth} (config said {cfg.sk_depth})")
    return basis


def _load_checked(loader, path, what: str):
    try:
        return loader(path)
    except FileNotFoundError as exc:
        raise UsageError(f"{what} incomplete: {exc.filename} is missing") from exc
    except (CorruptionError, GateSetError):
        raise
    except ValueError as exc:
        raise CorruptionError(what, f"{path}: {exc}") from exc


def _model_for(cfg: RunConfig) -> Model:
    if cfg.model_dir:
        d = Path(cfg.model_dir)
        if not d.is_dir():
            raise UsageError(f"model directory not found: {d}")
        return _load_checked(load_model, d, "model")
    _err(
        f"no --model given; training one now (d={cfg.sk_depth}, n={cfg.sk_recursion}, "
        f"{cfg.ensemble_size} samples, seed {cfg.seed})"
    )
    basis = _basis_for(cfg)
    if basis is not None:
        cfg = cfg.replace(sk_depth=basis.depth)
    return train_model(cfg, basis)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_basis(args) -> int:
    cfg = _resolve_config(args)
    gates = tuple(g.strip() for g in args.gates.split(",") if g.strip())
    basis = generate_basis(gates, cfg.sk_depth)
    if args.output:
        save_basis(basis, args.output)
        _err(f"wrote {args.output}")
    print(f"{len(basis.non_null_labels)} elements (+ null)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    basis = _basis_for(cfg)
    if basis is not None:
        cfg = cfg.replace(sk_depth=basis.depth)
    model = train_model(cfg, basis)
    if cfg.ensemble_size < 10:
        model.table.provenance["low_confidence"] = "true"
        _err(f"warning: only {cfg.ensemble_size} training sample(s); frequencies are low-confidence")
    out = args.output or cfg.model_dir or "eqisa-model"
    for p in save_model(model, out):
        _err(f"wrote {p}")
    print(f"selected {len(model.selection)} instructions: {' '.join(model.selection.selected)}")
    return EXIT_OK


def _read_qasm(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {p}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        circuit, _ = parse_qasm_detailed(p.read_text(encoding="utf-8"))
    for w in caught:
        _err(f"warning: {w.message}")
    return circuit


def cmd_encode(args) -> int:
    cfg = _resolve_config(args)
    circuit = _read_qasm(args.input)
    model = _model_for(cfg)
    enc = encode_circuit(circuit, model, cfg.lowering, cfg.codebook_mode)
    prog, book = enc.programs[cfg.variant], enc.codebooks[cfg.variant]
    out = Path(args.output or Path(args.input).with_suffix(".eqisa"))
    out.write_bytes(prog.to_bytes())
    cb_path = Path(args.codebook_out or f"{out}.codebook")
    cb_path.write_text(book.to_text(), encoding="utf-8")
    _err(f"wrote {out} and {cb_path}")
    v0 = enc.programs["v0"].total_bits
    print(f"lowering={cfg.lowering} codebook_mode={cfg.codebook_mode} gates={len(enc.lowered)} error_bound={enc.error_bound:.3g}")
    for v in VARIANTS:
        bits = enc.programs[v].total_bits
        factor = f"{bits / v0:.4f}" if v0 else "n/a"
        mark = " *" if v == cfg.variant else ""
        print(f"{v}: {bits} bits, factor {factor}{mark}")
    if args.compress:
        block = compress(payload_bytes(prog))
        zpath = out.with_suffix(out.suffix + ".eqbz")
        zpath.write_bytes(compress(prog.to_bytes()).to_bytes())
        _err(f"wrote {zpath}")
        print(f"{cfg.variant}+lossless: {8 * block.size} bits (payload only)")
    return EXIT_OK


def _read_program(path: str) -> EncodedProgram:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {p}")
    data = p.read_bytes()
    if data[:4] == EQBZ_MAGIC:
        data = decompress(data)
    return EncodedProgram.from_bytes(data)


def cmd_decode(args) -> int:
    prog = _read_program(args.input)
    stem = args.input[: -len(".eqbz")] if args.input.endswith(".eqbz") else args.input
    cb_path = Path(args.codebook or f"{stem}.codebook")
    if not cb_path.is_file():
        raise UsageError(f"codebook file not found: {cb_path}")
    try:
        book = Codebook.from_text(cb_path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise CorruptionError("codebook", str(exc)) from exc
    tokens, ids = decode_program(prog, book)
    circuit = detokenize_circuit(tokens, ids, prog.num_qubits)
    _write_or_print(to_qasm(circuit), args.output)
    return EXIT_OK


def cmd_compress(args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file not found: {src}")
    data = src.read_bytes()
    block = compress(data)
    out = Path(args.output or f"{src}.eqbz")
    out.write_bytes(block.to_bytes())
    print(f"{len(data)} -> {block.size} bytes{' (stored)' if block.stored else ''}")
    return EXIT_OK


def cmd_decompress(args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file not found: {src}")
    data = decompress(src.read_bytes())
    out = Path(args.output) if args.output else (src.with_suffix("") if src.suffix == ".eqbz" else Path(f"{src}.out"))
    out.write_bytes(data)
    _err(f"wrote {out} ({len(data)} bytes)")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _resolve_config(args)
    corpus = Path(args.corpus) if args.corpus else default_corpus_dir()
    if not corpus.is_dir():
        raise UsageError(f"corpus directory not found: {corpus}")
    paths = corpus_files(corpus)
    notes = {
        "lowering": cfg.lowering,
        "codebook_mode": cfg.codebook_mode,
        "sk_depth": cfg.sk_depth,
        "sk_recursion": cfg.sk_recursion,
        "description_complexity": "post-lossless" if cfg.post_lossless else "pre-lossless",
    }
    if not paths:
        _err(f"warning: no .qasm files in {corpus}")
        _write_or_print(rows_to_csv([], cfg.energy_pj_per_bit, notes), args.output)
        return EXIT_OK
    model = _model_for(cfg)
    notes.update(sk_depth=model.depth, sk_recursion=model.recursion)
    rows = [derive(r, cfg.energy_pj_per_bit) for r in run_bench(paths, model, cfg.lowering, cfg.codebook_mode, cfg.workers)]
    for r in rows:
        if r["error"]:
            _err(f"{r['name']}: {r['error']}")
    _write_or_print(rows_to_csv(rows, cfg.energy_pj_per_bit, notes), args.output)
    if all(r["error"] for r in rows):
        _err("every circuit failed")
        return EXIT_FAIL
    return EXIT_OK


def _grouped(rows) -> str:
    groups: dict[int, list[dict]] = {}
    for r in rows:
        if not r.get("error"):
            groups.setdefault(r["num_qubits"], []).append(r)
    lines = ["qubits  circuits  v1_factor  v2_factor  v3_factor  mean_v3_bits  mean_v3_lossless_bits"]
    for n in sorted(groups):
        g = groups[n]
        means = [statistics.fmean(r[c] for r in g) for c in ("v1_factor", "v2_factor", "v3_factor", "v3_bits", "v3_lossless_bits")]
        lines.append(f"{n:6d}  {len(g):8d}  {means[0]:9.4f}  {means[1]:9.4f}  {means[2]:9.4f}  {means[3]:12.1f}  {means[4]:21.1f}")
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"report file not found: {src}")
    try:
        rows, notes = rows_from_csv(src.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise CorruptionError("report", str(exc)) from exc
    pj = float(notes.get("energy_pj_per_bit", 2.46))
    bad = verify_rows(rows, pj)
    text = _grouped(rows) if args.group else render_table(rows)
    sys.stdout.write(text)
    if bad:
        for i, col in bad[:20]:
            _err(f"row {i} ({rows[i].get('name')}): column {col} does not match its raw inputs")
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_sk(p) -> None:
    p.add_argument("--sk-depth", type=int, help="SK basis depth d (default 5)")
    p.add_argument("--sk-recursion", type=int, help="SKD recursion degree n (default 4)")
    p.add_argument("--no-simplify", action="store_true", help="keep adjacent inverse pairs in SKD output")


def _add_model(p) -> None:
    p.add_argument("--model", help="directory written by 'eqisa train' (trained on the fly if omitted)")
    p.add_argument("--basis", help="basis file from 'eqisa basis' to train against")
    p.add_argument("--lowering", choices=LOWERING_MODES, help="per-gate (default) or unitary (QSD of the whole circuit)")
    p.add_argument("--codebook-mode", choices=CODEBOOK_MODES, help="v1/v2 codebooks per circuit (default) or trained")
    p.add_argument("--ensemble-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    _add_sk(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqisa", description="Compressed quantum instruction streams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value config file (default: $EQISA_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="generate an SK basis")
    p.add_argument("--sk-depth", type=int)
    p.add_argument("--gates", default=",".join(DEFAULT_BASE_GATES), help="comma-separated base gates")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("train", help="learn frequencies, select a dictionary and build codebooks")
    _add_sk(p)
    p.add_argument("--basis")
    p.add_argument("--ensemble-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold-mode", choices=THRESHOLD_MODES)
    p.add_argument("--top-k", type=int)
    p.add_argument("--threshold-value", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output", help="model directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="lower and encode a QASM file")
    p.add_argument("input")
    _add_model(p)
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("-o", "--output")
    p.add_argument("--codebook-out")
    p.add_argument("--compress", action="store_true", help="also write a lossless-compressed copy")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode an .eqisa (or .eqisa.eqbz) file to QASM")
    p.add_argument("input")
    p.add_argument("--codebook", help="codebook file (default: <input>.codebook)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("compress", help="lossless-compress any file")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="invert 'compress'")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("bench", help="run the pipeline over a corpus and emit a CSV report")
    p.add_argument("corpus", nargs="?", help="directory of .qasm files (default: the shipped corpus)")
    _add_model(p)
    p.add_argument("--energy-pj-per-bit", type=float)
    p.add_argument("--post-lossless", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="verify and summarise a benchmark CSV")
    p.add_argument("input")
    p.add_argument("--group", action="store_true", help="mean factors grouped by qubit count")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigError, GateSetError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except QasmParseError as exc:
        _err(f"parse error: {exc}")
        return EXIT_PARSE
    except CapacityError as exc:
        _err(f"capacity: {exc}")
        return EXIT_CAPACITY
    except (CorruptionError, CodebookMismatchError) as exc:
        _err(str(exc))
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
