import shutil

import pytest

from eqisa import __version__
from eqisa.circuit import circuit_unitary, parse_qasm
from eqisa.cli import main
from eqisa.metrics import rows_from_csv
from eqisa.numerics import phase_aligned_distance
from eqisa.pipeline import corpus_files, default_corpus_dir, encode_circuit, load_model

CORPUS = corpus_files(default_corpus_dir())
SMALL = ["--sk-depth", "3", "--sk-recursion", "1", "--ensemble-size", "5"]


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_basis_counts(capsys, tmp_path):
    assert main(["basis", "--sk-depth", "3", "-o", str(tmp_path / "b.txt")]) == 0
    assert capsys.readouterr().out.strip() == "21 elements (+ null)"
    assert (tmp_path / "b.txt").is_file()
    assert main(["basis", "--sk-depth", "1"]) == 0
    assert capsys.readouterr().out.strip() == "3 elements (+ null)"


def test_usage_errors(capsys):
    assert main(["basis", "--bogus"]) == 2
    assert main(["basis", "--sk-depth", "2", "--gates", "H,T"]) == 2
    assert "inversion" in capsys.readouterr().err
    assert main(["basis", "--sk-depth", "99"]) == 2
    assert main(["train", "--basis", "/nonexistent/basis.txt"]) == 2
    assert main(["encode", "/nonexistent.qasm"]) == 2


def test_train_is_reproducible(tmp_path, capsys):
    args = ["train", "--sk-depth", "3", "--sk-recursion", "2", "--ensemble-size", "30", "--seed", "3"]
    assert main(args + ["-o", str(tmp_path / "a")]) == 0
    assert main(args + ["-o", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "codebook_v3.txt" in files and "frequencies.txt" in files and "selection.txt" in files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert capsys.readouterr().out.startswith("selected ")


def test_train_single_sample_is_flagged(tmp_path, capsys):
    assert main(["train", *SMALL[:4], "--ensemble-size", "1", "-o", str(tmp_path / "m")]) == 0
    assert "low-confidence" in capsys.readouterr().err
    assert load_model(tmp_path / "m").table.provenance["low_confidence"] == "true"


def test_train_from_basis_file(tmp_path):
    assert main(["basis", "--sk-depth", "2", "-o", str(tmp_path / "b.txt")]) == 0
    assert main(["train", "--basis", str(tmp_path / "b.txt"), "--sk-recursion", "1", "--ensemble-size", "3", "-o", str(tmp_path / "m")]) == 0
    assert load_model(tmp_path / "m").depth == 2


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_encode_decode_roundtrip(small_model_dir, tmp_path, capsys, path):
    src = tmp_path / path.name
    shutil.copy(path, src)
    assert main(["encode", str(src), "--model", str(small_model_dir), "--compress"]) == 0
    out = capsys.readouterr().out
    assert "v3:" in out and "v3+lossless" in out
    eq = src.with_suffix(".eqisa")
    assert main(["decode", str(eq), "-o", str(tmp_path / "a.qasm")]) == 0
    assert main(["decode", f"{eq}.eqbz", "--codebook", f"{eq}.codebook", "-o", str(tmp_path / "b.qasm")]) == 0
    a, b = (tmp_path / "a.qasm").read_text(), (tmp_path / "b.qasm").read_text()
    assert a == b
    lowered = encode_circuit(parse_qasm(path.read_text()), load_model(small_model_dir)).lowered
    assert phase_aligned_distance(circuit_unitary(parse_qasm(a)), circuit_unitary(lowered)) < 1e-9


@pytest.mark.parametrize("variant", ["v0", "v1", "v2"])
def test_encode_other_variants(small_model_dir, tmp_path, variant):
    src = tmp_path / "g.qasm"
    shutil.copy(default_corpus_dir() / "grover_2.qasm", src)
    assert main(["encode", str(src), "--model", str(small_model_dir), "--variant", variant, "--codebook-mode", "trained"]) == 0
    assert main(["decode", str(src.with_suffix(".eqisa")), "-o", str(tmp_path / "out.qasm")]) == 0


def test_encode_trains_when_no_model(tmp_path, capsys):
    src = tmp_path / "g.qasm"
    shutil.copy(default_corpus_dir() / "ghz_2.qasm", src)
    assert main(["encode", str(src), *SMALL]) == 0
    assert "training one now" in capsys.readouterr().err


def test_encode_parse_and_capacity_errors(small_model_dir, tmp_path):
    bad = tmp_path / "bad.qasm"
    bad.write_text("OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n")
    assert main(["encode", str(bad), "--model", str(small_model_dir)]) == 3
    wide = tmp_path / "wide.qasm"
    wide.write_text("OPENQASM 2.0;\nqreg q[7];\n" + "".join(f"h q[{i}];\n" for i in range(7)))
    assert main(["encode", str(wide), "--model", str(small_model_dir), "--lowering", "unitary"]) == 4
    assert main(["encode", str(wide), "--model", str(small_model_dir)]) == 0


def test_decode_integrity_errors(small_model_dir, tmp_path):
    src = tmp_path / "w.qasm"
    shutil.copy(default_corpus_dir() / "wstate_2.qasm", src)
    assert main(["encode", str(src), "--model", str(small_model_dir)]) == 0
    eq = src.with_suffix(".eqisa")
    raw = eq.read_bytes()
    (tmp_path / "cut.eqisa").write_bytes(raw[:-1])
    assert main(["decode", str(tmp_path / "cut.eqisa"), "--codebook", f"{eq}.codebook"]) == 5
    wrong = tmp_path / "wrong.codebook"
    wrong.write_text((small_model_dir / "codebook_v0.txt").read_text())
    assert main(["decode", str(eq), "--codebook", str(wrong)]) == 5
    junk = tmp_path / "junk.codebook"
    junk.write_text("not a codebook\n")
    assert main(["decode", str(eq), "--codebook", str(junk)]) == 5
    assert main(["decode", str(eq), "--codebook", str(tmp_path / "missing")]) == 2


def test_corrupt_model_directory(small_model_dir, tmp_path):
    d = tmp_path / "m"
    shutil.copytree(small_model_dir, d)
    text = (d / "basis.txt").read_text().splitlines()
    (d / "basis.txt").write_text("\n".join(text[:-1]) + "\n")
    src = tmp_path / "g.qasm"
    shutil.copy(default_corpus_dir() / "ghz_2.qasm", src)
    assert main(["encode", str(src), "--model", str(d)]) == 5
    (d / "selection.txt").unlink()
    assert main(["encode", str(src), "--model", str(small_model_dir / "nope")]) == 2


def test_compress_decompress(tmp_path, capsys):
    f = tmp_path / "data.bin"
    f.write_bytes(b"abc" * 500)
    assert main(["compress", str(f)]) == 0
    assert "->" in capsys.readouterr().out
    f2 = tmp_path / "copy.bin"
    assert main(["decompress", f"{f}.eqbz", "-o", str(f2)]) == 0
    assert f2.read_bytes() == f.read_bytes()
    z = tmp_path / "data.bin.eqbz"
    z.write_bytes(z.read_bytes()[:-2])
    assert main(["decompress", str(z)]) == 5


def test_bench_and_report(small_model_dir, tmp_path, capsys):
    out = tmp_path / "report.csv"
    assert main(["bench", "--model", str(small_model_dir), "-o", str(out)]) == 0
    rows, notes = rows_from_csv(out.read_text())
    assert len(rows) == 13 and notes["lowering"] == "per-gate"
    assert notes["description_complexity"] == "pre-lossless"
    for r in rows:
        assert r["error"] == ""
        assert all(v is not None for k, v in r.items() if k != "error")
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "ghz_2" in capsys.readouterr().out
    assert main(["report", str(out), "--group"]) == 0
    grouped = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in grouped[1:]] == ["2", "3", "4"]
    tampered = tmp_path / "bad.csv"
    tampered.write_text(out.read_text().replace("ghz_2,2,", "ghz_2,3,", 1))
    assert main(["report", str(tampered)]) == 1


def test_bench_empty_and_failing_corpus(small_model_dir, tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["bench", str(empty), "--model", str(small_model_dir)]) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert rows_from_csv(captured.out)[0] == []
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "x_2.qasm").write_text("garbage")
    assert main(["bench", str(bad), "--model", str(small_model_dir)]) == 1
    assert main(["bench", str(tmp_path / "missing"), "--model", str(small_model_dir)]) == 2


def test_config_file_and_env(small_model_dir, tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"variant=v1\nmodel_dir={small_model_dir}\n")
    src = tmp_path / "g.qasm"
    shutil.copy(default_corpus_dir() / "ghz_2.qasm", src)
    assert main(["--config", str(cfg), "encode", str(src)]) == 0
    assert "v1:" in [ln.split()[0] for ln in capsys.readouterr().out.splitlines() if ln.endswith("*")][0]
    monkeypatch.setenv("EQISA_CONFIG", str(cfg))
    assert main(["encode", str(src), "--variant", "v2"]) == 0
    assert [ln for ln in capsys.readouterr().out.splitlines() if ln.endswith("*")][0].startswith("v2:")
    cfg.write_text("variant=v9\n")
    assert main(["encode", str(src)]) == 2
