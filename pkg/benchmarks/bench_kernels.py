"""Time each hot kernel under numba against its numpy/python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Every pair is
also checked for identical output on the benchmark inputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from eqisa import _kernels
from eqisa.basis import generate_basis
from eqisa.dictionary import Tokenizer
from eqisa.huffman import canonical_codes, code_lengths
from eqisa.lossless import bwt_forward


def _inputs(rng):
    basis = generate_basis(depth=5)
    quats = basis.quaternions
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)

    text = rng.choice(np.frombuffer(b"HTtCX", np.uint8), size=200_000).astype(np.uint8)
    runs = np.repeat(rng.integers(0, 4, 20_000).astype(np.uint8), rng.integers(1, 12, 20_000))
    mtf = _kernels.mtf_encode(runs)
    last, primary = bwt_forward(text[:50_000].tobytes())
    last = np.frombuffer(last, np.uint8).copy()

    lengths = code_lengths({s: int(c) for s, c in enumerate(np.bincount(text)) if c})
    codes = canonical_codes(lengths)
    syms = sorted(codes)
    index = np.zeros(256, np.int64)
    index[syms] = np.arange(len(syms))
    flat = np.array([int(b) for s in syms for b in codes[s]], np.uint8)
    lens = np.array([len(codes[s]) for s in syms], np.int64)
    offs = np.concatenate(([0], np.cumsum(lens)[:-1])).astype(np.int64)
    symbols = index[text]
    bits = _kernels.emit_codes(symbols, flat, offs, lens)
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
    tree = tuple(np.array(a, np.int64) for a in (left, right, leaf))

    tok = Tokenizer(basis.non_null_labels, basis.base_gates)
    gates = rng.integers(0, 3, 100_000).astype(np.int64)
    return {
        "nearest": (quats, q),
        "mtf_encode": (runs,),
        "mtf_decode": (mtf,),
        "rle1_encode": (runs,),
        "rle1_decode": (_kernels.rle1_encode(runs),),
        "rle2_encode": (mtf,),
        "rle2_decode": (_kernels.rle2_encode(mtf),),
        "bwt_inverse": (last, primary),
        "emit_codes": (symbols, flat, offs, lens),
        "prefix_decode": (bits, symbols.size) + tree,
        "greedy_tokenize": (gates, tok._child, tok._terminal),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def _best(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    inputs = _inputs(np.random.default_rng(args.seed))
    print(f"{'kernel':16s} {'numba ms':>10s} {'fallback ms':>12s} {'speedup':>8s}  same")
    for name, (jitted, fallback) in _kernels.IMPLEMENTATIONS.items():
        call = inputs[name]
        if jitted is None:
            print(f"{name:16s} {'n/a':>10s}")
            continue
        ref = fallback(*call)
        out = jitted(*call)  # first call compiles
        t_jit = _best(jitted, call, args.repeat)
        t_py = _best(fallback, call, args.repeat)
        print(f"{name:16s} {1e3 * t_jit:10.3f} {1e3 * t_py:12.3f} {t_py / t_jit:8.1f}x  {_same(out, ref)}")


if __name__ == "__main__":
    main()
