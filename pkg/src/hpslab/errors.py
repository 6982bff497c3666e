"""Exception hierarchy shared by every module.

All domain errors derive from ``HpsError`` so the CLI can map them to exit
code 1 without catching programming errors.
"""


class HpsError(Exception):
    """Base class for domain errors."""


class DimensionMismatch(HpsError, ValueError):
    """Operand shapes or qubit counts disagree."""


class SingularMatrix(HpsError, ArithmeticError):
    """A GF(2) matrix that must be invertible is not."""


class TooManyQubits(HpsError):
    """A dense 2^n object would exceed the configured qubit cap."""


class TooLarge(HpsError):
    """An exact enumeration exceeds its feasibility guard."""


class OddQubitCount(HpsError, ValueError):
    """A half/half bipartition was requested for odd n."""


class InvalidQ(HpsError, ValueError):
    """The angle modulus is outside the range an operation supports."""


class RankDeficient(HpsError):
    """An architecture lacks the rank an algorithm requires."""


class TooManyTerms(HpsError):
    """More Hamiltonian terms than an algorithm can handle."""


class PublicKeyExhausted(HpsError):
    """Every copy of a quantum public key has already been consumed."""
