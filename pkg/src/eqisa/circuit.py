"""Gate vocabulary, circuits, their unitaries, and an OpenQASM 2.0 subset reader.

Qubit 0 is the most significant bit of a basis-state index, so the two-qubit
state ``|q0 q1>`` has index ``2*q0 + q1``. Circuit depth is the number of
operations laid out serially; :func:`layer_depth` gives the parallel depth.
"""
from __future__ import annotations

import ast
import math
import operator
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, QasmParseError

MAX_UNITARY_QUBITS = 6

FIXED_KINDS = ("H", "T", "Tdg", "CX")
ROTATION_KINDS = ("RX", "RY", "RZ")
PARAM_COUNT = {"H": 0, "T": 0, "Tdg": 0, "CX": 0, "RX": 1, "RY": 1, "RZ": 1, "U3": 3}
ARITY = {"CX": 2}


@dataclass(frozen=True)
class Gate:
    """A gate symbol: a kind plus its angle parameters (radians)."""

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in PARAM_COUNT:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != PARAM_COUNT[self.kind]:
            raise ValueError(f"{self.kind} takes {PARAM_COUNT[self.kind]} parameters, got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise ValueError(f"{self.kind} parameters must be finite: {params}")
        object.__setattr__(self, "params", params)

    @property
    def arity(self) -> int:
        return ARITY.get(self.kind, 1)

    def inverse(self) -> "Gate":
        k, p = self.kind, self.params
        if k in ("H", "CX"):
            return self
        if k == "T":
            return TDG
        if k == "Tdg":
            return T
        if k in ROTATION_KINDS:
            return Gate(k, (-p[0],))
        theta, phi, lam = p
        return Gate("U3", (-theta, -lam, -phi))

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}({', '.join(repr(x) for x in self.params)})"


H = Gate("H")
T = Gate("T")
TDG = Gate("Tdg")
CX = Gate("CX")


def rx(theta: float) -> Gate:
    return Gate("RX", (theta,))


def ry(theta: float) -> Gate:
    return Gate("RY", (theta,))


def rz(theta: float) -> Gate:
    return Gate("RZ", (theta,))


def u3(theta: float, phi: float, lam: float) -> Gate:
    return Gate("U3", (theta, phi, lam))


_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED_MATRICES = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "Tdg": np.array([[1, 0], [0, np.exp(-1j * math.pi / 4)]], dtype=complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def gate_unitary(g: Gate) -> np.ndarray:
    """Matrix of a gate: 2x2, or 4x4 for CX with the control as the high bit."""
    if g.kind in _FIXED_MATRICES:
        return _FIXED_MATRICES[g.kind].copy()
    if g.kind == "RX":
        return rx_matrix(*g.params)
    if g.kind == "RY":
        return ry_matrix(*g.params)
    if g.kind == "RZ":
        return rz_matrix(*g.params)
    return u3_matrix(*g.params)


@dataclass(frozen=True)
class Op:
    gate: Gate
    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) != self.gate.arity:
            raise ValueError(f"{self.gate.kind} acts on {self.gate.arity} qubit(s), got {len(qs)}")
        if len(set(qs)) != len(qs):
            raise ValueError(f"{self.gate.kind} needs distinct qubits, got {qs}")
        if any(q < 0 for q in qs):
            raise ValueError(f"negative qubit index in {qs}")


@dataclass(frozen=True)
class Circuit:
    """An ordered list of operations on ``num_qubits`` qubits."""

    num_qubits: int
    ops: tuple[Op, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if int(self.num_qubits) < 1:
            raise ValueError("a circuit needs at least one qubit")
        object.__setattr__(self, "num_qubits", int(self.num_qubits))
        ops = tuple(self.ops)
        for op in ops:
            if not isinstance(op, Op):
                raise TypeError(f"expected Op, got {type(op).__name__}")
            if max(op.qubits) >= self.num_qubits:
                raise ValueError(f"qubit index {max(op.qubits)} out of range for {self.num_qubits} qubits")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_ops(cls, num_qubits: int, ops) -> "Circuit":
        """Build from ``(gate, qubits)`` pairs; ``qubits`` may be a bare int."""
        built = []
        for g, qs in ops:
            if isinstance(qs, int):
                qs = (qs,)
            built.append(Op(g, tuple(qs)))
        return cls(num_qubits, tuple(built))

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.num_qubits, self.ops + other.ops)

    @property
    def depth(self) -> int:
        return len(self.ops)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, tuple(Op(op.gate.inverse(), op.qubits) for op in reversed(self.ops)))

    def count_ops(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            counts[op.gate.kind] = counts.get(op.gate.kind, 0) + 1
        return counts


def layer_depth(c: Circuit) -> int:
    """Number of parallel layers when each op is scheduled as early as possible."""
    level = [0] * c.num_qubits
    for op in c.ops:
        t = max(level[q] for q in op.qubits) + 1
        for q in op.qubits:
            level[q] = t
    return max(level, default=0)


def _apply(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    k = len(qubits)
    g = mat.reshape((2,) * (2 * k))
    out = np.tensordot(g, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a circuit (at most 6 qubits)."""
    n = c.num_qubits
    if n > MAX_UNITARY_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense-unitary limit of {MAX_UNITARY_QUBITS}")
    dim = 1 << n
    state = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in c.ops:
        state = _apply(state, gate_unitary(op.gate), op.qubits)
    return state.reshape(dim, dim)


# ---------------------------------------------------------------------------
# OpenQASM 2.0 subset
# ---------------------------------------------------------------------------

_QASM_GATES = {
    "h": ("H", 0),
    "t": ("T", 0),
    "tdg": ("Tdg", 0),
    "cx": ("CX", 0),
    "rx": ("RX", 1),
    "ry": ("RY", 1),
    "rz": ("RZ", 1),
    "u3": ("U3", 3),
    "x": ("RX", 0),
    "y": ("RY", 0),
    "z": ("RZ", 0),
    "s": ("RZ", 0),
    "sdg": ("RZ", 0),
    "id": ("RZ", 0),
}
_DESUGAR = {"id": 0.0, "x": math.pi, "y": math.pi, "z": math.pi, "s": math.pi / 2, "sdg": -math.pi / 2}
_SKIPPED = ("measure", "barrier", "creg")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "sqrt": math.sqrt, "exp": math.exp, "ln": math.log}

_STMT_RE = re.compile(r"^([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*(.*)$", re.S)
_ARG_RE = re.compile(r"^([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")


def _eval_param(text: str, line: int) -> float:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise QasmParseError(f"bad parameter expression {text.strip()!r}", line) from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise QasmParseError(f"unsupported parameter expression {text.strip()!r}", line)

    try:
        value = ev(tree)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        if isinstance(exc, QasmParseError):
            raise
        raise QasmParseError(f"cannot evaluate {text.strip()!r}: {exc}", line) from exc
    if not math.isfinite(value):
        raise QasmParseError(f"parameter {text.strip()!r} is not finite", line)
    return value


def _statements(text: str):
    """Yield ``(statement, line_number)`` pairs split on ';' with comments removed."""
    buf: list[str] = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        for ch in line:
            if ch == ";":
                stmt = "".join(buf).strip()
                if stmt:
                    yield stmt, start
                buf, start = [], None
            else:
                if start is None and not ch.isspace():
                    start = lineno
                buf.append(ch)
        buf.append(" ")
    rest = "".join(buf).strip()
    if rest:
        raise QasmParseError(f"missing ';' after {rest!r}", start)


def parse_qasm_detailed(text: str) -> tuple[Circuit, int]:
    """Parse QASM text; returns the circuit and the number of skipped statements."""
    stmts = list(_statements(text))
    if not stmts:
        raise QasmParseError("empty program: missing 'OPENQASM 2.0' header", 1)
    head, hline = stmts[0]
    if not re.fullmatch(r"OPENQASM\s+2(\.0)?", head):
        raise QasmParseError(f"malformed header {head!r}; expected 'OPENQASM 2.0;'", hline)

    reg_name = None
    size = None
    ops: list[Op] = []
    skipped = 0
    for stmt, line in stmts[1:]:
        word = stmt.split(None, 1)[0].split("(", 1)[0]
        if word == "include":
            continue
        if word in _SKIPPED:
            skipped += 1
            continue
        if word == "qreg":
            m = re.fullmatch(r"qreg\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]", stmt)
            if not m:
                raise QasmParseError(f"malformed register declaration {stmt!r}", line)
            if reg_name is not None:
                raise QasmParseError("only one qreg is supported", line)
            reg_name, size = m.group(1), int(m.group(2))
            if size < 1:
                raise QasmParseError("qreg must declare at least one qubit", line)
            continue
        m = _STMT_RE.match(stmt)
        name = m.group(1) if m else word
        if name not in _QASM_GATES:
            raise QasmParseError(f"unknown gate {name!r}", line)
        if reg_name is None:
            raise QasmParseError(f"gate {name!r} used before qreg declaration", line)
        kind, nparams = _QASM_GATES[name]
        ptext = m.group(2)
        params = [] if ptext is None or not ptext.strip() else [_eval_param(p, line) for p in ptext.split(",")]
        if len(params) != nparams:
            raise QasmParseError(f"gate {name!r} takes {nparams} parameter(s), got {len(params)}", line)
        if name in _DESUGAR:
            params = [_DESUGAR[name]]
        qubits = []
        for arg in m.group(3).split(","):
            am = _ARG_RE.match(arg.strip())
            if not am:
                raise QasmParseError(f"bad qubit argument {arg.strip()!r}", line)
            if am.group(1) != reg_name:
                raise QasmParseError(f"unknown register {am.group(1)!r}", line)
            idx = int(am.group(2))
            if idx >= size:
                raise QasmParseError(f"qubit index {idx} out of range for {reg_name}[{size}]", line)
            qubits.append(idx)
        gate = Gate(kind, tuple(params))
        if len(qubits) != gate.arity or len(set(qubits)) != len(qubits):
            raise QasmParseError(f"gate {name!r} expects {gate.arity} distinct qubit(s)", line)
        ops.append(Op(gate, tuple(qubits)))
    if reg_name is None:
        raise QasmParseError("no qreg declared", stmts[-1][1])
    return Circuit(size, tuple(ops)), skipped


def parse_qasm(text: str) -> Circuit:
    """Parse the OpenQASM 2.0 subset into a :class:`Circuit`.

    ``measure``, ``barrier`` and ``creg`` statements are dropped; a single
    warning reports how many were skipped.

    Raises:
        QasmParseError: with the offending line number.
    """
    circuit, skipped = parse_qasm_detailed(text)
    if skipped:
        warnings.warn(f"skipped {skipped} measure/barrier/creg statement(s)", stacklevel=2)
    return circuit


_QASM_NAMES = {"H": "h", "T": "t", "Tdg": "tdg", "CX": "cx", "RX": "rx", "RY": "ry", "RZ": "rz", "U3": "u3"}


def to_qasm(c: Circuit, reg: str = "q") -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {reg}[{c.num_qubits}];"]
    for op in c.ops:
        name = _QASM_NAMES[op.gate.kind]
        if op.gate.params:
            name += "(" + ",".join(repr(p) for p in op.gate.params) + ")"
        args = ",".join(f"{reg}[{q}]" for q in op.qubits)
        lines.append(f"{name} {args};")
    return "\n".join(lines) + "\n"


def strip_comments(text: str) -> str:
    """Remove ``//`` comments; lines holding only a comment disappear entirely."""
    out = []
    for line in text.splitlines(keepends=True):
        if "//" not in line:
            out.append(line)
            continue
        code = line.split("//", 1)[0].rstrip()
        if code:
            out.append(code + ("\n" if line.endswith("\n") else ""))
    return "".join(out)


def qasm_byte_size(text: str) -> int:
    """Baseline size in bits: 8 times the UTF-8 length of the comment-free source."""
    return 8 * len(strip_comments(text).encode("utf-8"))
