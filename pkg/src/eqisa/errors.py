"""Exception types raised across the toolchain."""


class EqisaError(Exception):
    """Base class for all toolchain errors."""


class NumericsError(EqisaError, ValueError):
    """A matrix failed a numerical precondition or a decomposition did not converge."""


class GateSetError(EqisaError, ValueError):
    """The base gate set violates a structural requirement (e.g. inverse closure)."""


class QasmParseError(EqisaError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class CapacityError(EqisaError, ValueError):
    """Input exceeds a documented size limit (e.g. more than 6 qubits for dense unitaries)."""


class EncodeError(EqisaError, KeyError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"token {token!r} has no code in the codebook")

    def __str__(self) -> str:
        return self.args[0]


class CodebookMismatchError(EqisaError, ValueError):
    """The codebook offered for decoding is not the one the stream was encoded with."""


class CorruptionError(EqisaError, ValueError):
    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        msg = f"corrupted data at stage {stage!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
