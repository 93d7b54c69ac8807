"""Hot inner loops, each with a numba body and a plain numpy/python body.

The numba path is used when numba imports and ``EQISA_DISABLE_NUMBA`` is unset
(or ``0``). Both paths share signatures and return identical results; the
benchmark in ``benchmarks/bench_kernels.py`` times one against the other via
:data:`IMPLEMENTATIONS`.

Status codes returned by decoders: 0 = ok, anything else = malformed input.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLE_NUMBA = os.environ.get("EQISA_DISABLE_NUMBA", "").strip() not in ("", "0")
USE_NUMBA = numba is not None and not DISABLE_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"

NEAREST_TIE_TOL = 1e-12


def _jit(fn):
    if numba is None:
        return None
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# nearest net element (quaternion representation of SU(2))
# ---------------------------------------------------------------------------

def _nearest_loop(quats, q):
    k = quats.shape[0]
    dists = np.empty(k)
    best = np.inf
    for i in range(k):
        dm = 0.0
        dp = 0.0
        for j in range(4):
            a = q[j] - quats[i, j]
            b = q[j] + quats[i, j]
            dm += a * a
            dp += b * b
        d = np.sqrt(min(dm, dp))
        dists[i] = d
        if d < best:
            best = d
    for i in range(k):
        if dists[i] <= best + NEAREST_TIE_TOL:
            return i, dists[i]
    return 0, dists[0]


def _nearest_numpy(quats, q):
    dm = np.sum((quats - q) ** 2, axis=1)
    dp = np.sum((quats + q) ** 2, axis=1)
    dists = np.sqrt(np.minimum(dm, dp))
    best = dists.min()
    i = int(np.flatnonzero(dists <= best + NEAREST_TIE_TOL)[0])
    return i, float(dists[i])


# ---------------------------------------------------------------------------
# move-to-front
# ---------------------------------------------------------------------------

def _mtf_encode_loop(data):
    table = np.arange(256).astype(np.uint8)
    out = np.empty(data.shape[0], dtype=np.uint8)
    for i in range(data.shape[0]):
        c = data[i]
        j = 0
        while table[j] != c:
            j += 1
        out[i] = j
        while j > 0:
            table[j] = table[j - 1]
            j -= 1
        table[0] = c
    return out


def _mtf_decode_loop(data):
    table = np.arange(256).astype(np.uint8)
    out = np.empty(data.shape[0], dtype=np.uint8)
    for i in range(data.shape[0]):
        j = data[i]
        c = table[j]
        out[i] = c
        while j > 0:
            table[j] = table[j - 1]
            j -= 1
        table[0] = c
    return out


def _mtf_encode_py(data):
    table = list(range(256))
    out = bytearray(len(data))
    for i, c in enumerate(data.tolist()):
        j = table.index(c)
        out[i] = j
        if j:
            del table[j]
            table.insert(0, c)
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


def _mtf_decode_py(data):
    table = list(range(256))
    out = bytearray(len(data))
    for i, j in enumerate(data.tolist()):
        c = table[j]
        out[i] = c
        if j:
            del table[j]
            table.insert(0, c)
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


# ---------------------------------------------------------------------------
# run-length stage 1: four literals then a count byte (0..251)
# ---------------------------------------------------------------------------

def _rle1_encode_loop(data):
    n = data.shape[0]
    out = np.empty(n + n // 4 + 1, dtype=np.uint8)
    m = 0
    i = 0
    while i < n:
        c = data[i]
        j = i
        while j < n and data[j] == c and j - i < 255:
            j += 1
        run = j - i
        if run >= 4:
            for _ in range(4):
                out[m] = c
                m += 1
            out[m] = run - 4
            m += 1
        else:
            for _ in range(run):
                out[m] = c
                m += 1
        i = j
    return out[:m]


def _rle1_decode_loop(data):
    n = data.shape[0]
    # first pass: output length and validation
    total = 0
    run = 0
    prev = -1
    for i in range(n):
        b = data[i]
        if run == 4:
            if b > 251:
                return np.empty(0, dtype=np.uint8), 1
            total += b
            run = 0
            prev = -1
        else:
            total += 1
            if b == prev:
                run += 1
            else:
                run = 1
                prev = b
    if run == 4:
        return np.empty(0, dtype=np.uint8), 2
    out = np.empty(total, dtype=np.uint8)
    m = 0
    run = 0
    prev = -1
    for i in range(n):
        b = data[i]
        if run == 4:
            for _ in range(b):
                out[m] = prev
                m += 1
            run = 0
            prev = -1
        else:
            out[m] = b
            m += 1
            if b == prev:
                run += 1
            else:
                run = 1
                prev = b
    return out, 0


def _rle1_encode_numpy(data):
    n = data.shape[0]
    if n == 0:
        return data.copy()
    starts = np.flatnonzero(np.r_[True, data[1:] != data[:-1]])
    lengths = np.diff(np.r_[starts, n])
    values = data[starts]
    out = bytearray()
    for v, length in zip(values.tolist(), lengths.tolist()):
        while length > 0:
            chunk = min(length, 255)
            if chunk >= 4:
                out += bytes((v, v, v, v, chunk - 4))
            else:
                out += bytes((v,)) * chunk
            length -= chunk
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


def _rle1_decode_py(data):
    out = bytearray()
    run = 0
    prev = -1
    for b in data.tolist():
        if run == 4:
            if b > 251:
                return np.empty(0, dtype=np.uint8), 1
            out += bytes((prev,)) * b
            run = 0
            prev = -1
        else:
            out.append(b)
            if b == prev:
                run += 1
            else:
                run = 1
                prev = b
    if run == 4:
        return np.empty(0, dtype=np.uint8), 2
    return np.frombuffer(bytes(out), dtype=np.uint8).copy(), 0


# ---------------------------------------------------------------------------
# run-length stage 2: zero runs become (0, run-1), run <= 256
# ---------------------------------------------------------------------------

def _rle2_encode_loop(data):
    n = data.shape[0]
    out = np.empty(2 * n + 1, dtype=np.uint8)
    m = 0
    i = 0
    while i < n:
        if data[i] == 0:
            j = i
            while j < n and data[j] == 0 and j - i < 256:
                j += 1
            out[m] = 0
            out[m + 1] = j - i - 1
            m += 2
            i = j
        else:
            out[m] = data[i]
            m += 1
            i += 1
    return out[:m]


def _rle2_decode_loop(data):
    n = data.shape[0]
    total = 0
    i = 0
    while i < n:
        if data[i] == 0:
            if i + 1 >= n:
                return np.empty(0, dtype=np.uint8), 1
            total += data[i + 1] + 1
            i += 2
        else:
            total += 1
            i += 1
    out = np.zeros(total, dtype=np.uint8)
    m = 0
    i = 0
    while i < n:
        if data[i] == 0:
            m += data[i + 1] + 1
            i += 2
        else:
            out[m] = data[i]
            m += 1
            i += 1
    return out, 0


def _rle2_encode_numpy(data):
    n = data.shape[0]
    if n == 0:
        return data.copy()
    starts = np.flatnonzero(np.r_[True, data[1:] != data[:-1]])
    lengths = np.diff(np.r_[starts, n])
    values = data[starts]
    out = bytearray()
    for v, length in zip(values.tolist(), lengths.tolist()):
        if v:
            out += bytes((v,)) * length
            continue
        while length > 0:
            chunk = min(length, 256)
            out += bytes((0, chunk - 1))
            length -= chunk
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


def _rle2_decode_numpy(data):
    n = data.shape[0]
    if n == 0:
        return data.copy(), 0
    # locate zero markers left to right; a count byte is never itself a marker
    is_marker = np.zeros(n, dtype=bool)
    flat = data.tolist()
    i = 0
    while i < n:
        if flat[i] == 0:
            if i + 1 >= n:
                return np.empty(0, dtype=np.uint8), 1
            is_marker[i] = True
            i += 2
        else:
            i += 1
    is_count = np.r_[False, is_marker[:-1]]
    keep = ~is_count
    values = np.where(is_marker, 0, data)[keep]
    reps = np.where(is_marker, data[np.minimum(np.arange(n) + 1, n - 1)].astype(np.int64) + 1, 1)[keep]
    return np.repeat(values, reps).astype(np.uint8), 0


# ---------------------------------------------------------------------------
# inverse Burrows-Wheeler (LF mapping)
# ---------------------------------------------------------------------------

def _bwt_inverse_loop(last, primary):
    n = last.shape[0]
    counts = np.zeros(256, dtype=np.int64)
    occ = np.empty(n, dtype=np.int64)
    for i in range(n):
        c = last[i]
        occ[i] = counts[c]
        counts[c] += 1
    starts = np.zeros(256, dtype=np.int64)
    acc = 0
    for c in range(256):
        starts[c] = acc
        acc += counts[c]
    out = np.empty(n, dtype=np.uint8)
    row = primary
    for k in range(n - 1, -1, -1):
        c = last[row]
        out[k] = c
        row = starts[c] + occ[row]
    return out


def _bwt_inverse_numpy(last, primary):
    n = last.shape[0]
    # LF as a permutation: stable sort of the last column gives first-column order
    order = np.argsort(last, kind="stable")
    lf = np.empty(n, dtype=np.int64)
    lf[order] = np.arange(n)
    lf_list = lf.tolist()
    last_list = last.tolist()
    out = bytearray(n)
    row = int(primary)
    for k in range(n - 1, -1, -1):
        out[k] = last_list[row]
        row = lf_list[row]
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


# ---------------------------------------------------------------------------
# prefix-code emission and decoding
# ---------------------------------------------------------------------------

def _emit_codes_loop(symbols, code_bits, offsets, lengths):
    total = 0
    for i in range(symbols.shape[0]):
        total += lengths[symbols[i]]
    out = np.empty(total, dtype=np.uint8)
    m = 0
    for i in range(symbols.shape[0]):
        s = symbols[i]
        o = offsets[s]
        for j in range(lengths[s]):
            out[m] = code_bits[o + j]
            m += 1
    return out


def _emit_codes_numpy(symbols, code_bits, offsets, lengths):
    lens = lengths[symbols]
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.uint8)
    starts = np.cumsum(lens) - lens
    within = np.arange(total) - np.repeat(starts, lens)
    idx = np.repeat(offsets[symbols], lens) + within
    return code_bits[idx].astype(np.uint8)


def _prefix_decode_loop(bits, count, left, right, leaf):
    """Walk ``count`` codewords from ``bits``; returns (symbols, bits_used, status)."""
    out = np.empty(count, dtype=np.int64)
    pos = 0
    n = bits.shape[0]
    for k in range(count):
        node = 0
        while leaf[node] < 0:
            if pos >= n:
                return out[:k], pos, 1
            if bits[pos] == 0:
                node = left[node]
            else:
                node = right[node]
            pos += 1
            if node < 0:
                return out[:k], pos, 2
        out[k] = leaf[node]
    return out, pos, 0


def _prefix_decode_py(bits, count, left, right, leaf):
    bl = bits.tolist()
    lt = left.tolist()
    rt = right.tolist()
    lf = leaf.tolist()
    out = []
    pos = 0
    n = len(bl)
    for _ in range(count):
        node = 0
        while lf[node] < 0:
            if pos >= n:
                return np.asarray(out, dtype=np.int64), pos, 1
            node = rt[node] if bl[pos] else lt[node]
            pos += 1
            if node < 0:
                return np.asarray(out, dtype=np.int64), pos, 2
        out.append(lf[node])
    return np.asarray(out, dtype=np.int64), pos, 0


# ---------------------------------------------------------------------------
# greedy longest-match segmentation over a trie
# ---------------------------------------------------------------------------

def _greedy_tokenize_loop(stream, child, terminal):
    """Returns (label indices, failure position or -1)."""
    n = stream.shape[0]
    out = np.empty(n, dtype=np.int64)
    m = 0
    i = 0
    while i < n:
        node = 0
        best = -1
        best_len = 0
        j = i
        while j < n:
            node = child[node, stream[j]]
            if node < 0:
                break
            j += 1
            if terminal[node] >= 0:
                best = terminal[node]
                best_len = j - i
        if best < 0:
            return out[:m], i
        out[m] = best
        m += 1
        i += best_len
    return out[:m], -1


def _greedy_tokenize_py(stream, child, terminal):
    s = stream.tolist()
    ch = child.tolist()
    term = terminal.tolist()
    out = []
    n = len(s)
    i = 0
    while i < n:
        node = 0
        best = -1
        best_len = 0
        j = i
        while j < n:
            node = ch[node][s[j]]
            if node < 0:
                break
            j += 1
            if term[node] >= 0:
                best = term[node]
                best_len = j - i
        if best < 0:
            return np.asarray(out, dtype=np.int64), i
        out.append(best)
        i += best_len
    return np.asarray(out, dtype=np.int64), -1


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_PAIRS = {
    "nearest": (_nearest_loop, _nearest_numpy),
    "mtf_encode": (_mtf_encode_loop, _mtf_encode_py),
    "mtf_decode": (_mtf_decode_loop, _mtf_decode_py),
    "rle1_encode": (_rle1_encode_loop, _rle1_encode_numpy),
    "rle1_decode": (_rle1_decode_loop, _rle1_decode_py),
    "rle2_encode": (_rle2_encode_loop, _rle2_encode_numpy),
    "rle2_decode": (_rle2_decode_loop, _rle2_decode_numpy),
    "bwt_inverse": (_bwt_inverse_loop, _bwt_inverse_numpy),
    "emit_codes": (_emit_codes_loop, _emit_codes_numpy),
    "prefix_decode": (_prefix_decode_loop, _prefix_decode_py),
    "greedy_tokenize": (_greedy_tokenize_loop, _greedy_tokenize_py),
}

#: name -> (numba implementation or None, fallback implementation)
IMPLEMENTATIONS = {name: (_jit(loop), fallback) for name, (loop, fallback) in _PAIRS.items()}


def _select(name):
    jitted, fallback = IMPLEMENTATIONS[name]
    return jitted if (USE_NUMBA and jitted is not None) else fallback


nearest = _select("nearest")
mtf_encode = _select("mtf_encode")
mtf_decode = _select("mtf_decode")
rle1_encode = _select("rle1_encode")
rle1_decode = _select("rle1_decode")
rle2_encode = _select("rle2_encode")
rle2_decode = _select("rle2_decode")
bwt_inverse = _select("bwt_inverse")
emit_codes = _select("emit_codes")
prefix_decode = _select("prefix_decode")
greedy_tokenize = _select("greedy_tokenize")
