"""Error types shared across the engines.

Every engine error carries a stable machine-readable ``code`` and an optional
``payload`` dict so front ends can serialize failures as JSON.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "EngineError"

    def __init__(self, message: str, **payload):
        super().__init__(message)
        self.message = message
        self.payload = dict(payload)

    def to_json(self) -> dict:
        out = {"error": self.code, "message": self.message}
        if self.payload:
            out["payload"] = self.payload
        return out


class DimensionMismatch(EngineError):
    code = "DimensionMismatch"


class AxisOutOfRange(EngineError):
    code = "AxisOutOfRange"


class DegreeOutOfRange(EngineError):
    code = "DegreeOutOfRange"


class IndexOutOfRange(EngineError):
    code = "IndexOutOfRange"


class BadTruncation(EngineError):
    code = "BadTruncation"


class TruncationTooSmall(EngineError):
    code = "TruncationTooSmall"


class ResonantDivisor(EngineError):
    code = "ResonantDivisor"


class DegenerateEigenvalue(EngineError):
    code = "DegenerateEigenvalue"


class UnsupportedKappa(EngineError):
    code = "UnsupportedKappa"


class UnsupportedOrder(EngineError):
    code = "UnsupportedOrder"


class OrderTooHigh(EngineError):
    code = "OrderTooHigh"


class DomainExceeded(EngineError):
    code = "DomainExceeded"


class PoleOnRay(EngineError):
    code = "PoleOnRay"


class InsufficientCoefficients(EngineError):
    code = "InsufficientCoefficients"


class NotConverged(EngineError):
    code = "NotConverged"


class NoConvergence(EngineError):
    code = "NoConvergence"


class HypothesisViolation(EngineError):
    code = "HypothesisViolation"


class GradientProviderFailure(EngineError):
    code = "GradientProviderFailure"


class ModelFormatError(EngineError):
    code = "ModelFormatError"
