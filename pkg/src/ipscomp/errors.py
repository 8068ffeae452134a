"""Exception hierarchy shared by every module."""


class IpsError(Exception):
    """Base class for all library errors."""


# field
class NotPrime(IpsError):
    pass


class NotIrreducible(IpsError):
    pass


class DegreeMismatch(IpsError):
    pass


class DivisionByZero(IpsError, ZeroDivisionError):
    pass


class FieldMismatch(IpsError):
    pass


class UnsupportedField(IpsError):
    pass


# circuit
class CircuitError(IpsError):
    pass


class Cyclic(CircuitError):
    pass


class BadArity(CircuitError):
    pass


class NonConstantDenominator(CircuitError):
    pass


class NonInvertibleDenominator(CircuitError):
    pass


class UnmappableConstant(IpsError):
    pass


class CapExceeded(IpsError):
    pass


class ParseError(IpsError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# certificates
class ArityMismatch(IpsError):
    pass


class AxiomListMismatch(IpsError):
    pass


class WidthMismatch(IpsError):
    pass


class MultiOutput(IpsError):
    pass


class UnknownGate(IpsError):
    pass


class IndexOutOfRange(IpsError):
    pass


# bit level
class WidthOverflow(IpsError):
    pass


class WrongCharacteristic(IpsError):
    pass


class UnsupportedGate(IpsError):
    pass


# pipeline
class SourceNotZero(IpsError):
    pass


class Malformed(IpsError):
    pass


class VerificationFailed(IpsError):
    def __init__(self, stage, msg=""):
        self.stage = stage
        super().__init__(f"verification failed at {stage}" + (f": {msg}" if msg else ""))
