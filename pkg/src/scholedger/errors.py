"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LedgerError(Exception):
    """Base class for all errors raised by scholedger."""


class ArgumentError(LedgerError, ValueError):
    """An argument is malformed or outside its documented domain."""


class EncodingError(LedgerError, ValueError):
    """A value cannot be canonically encoded (e.g. NaN or infinity)."""


class IdentityError(LedgerError):
    """A key id is unknown to the identity registry."""


class AttestationError(LedgerError):
    """An attestation signature does not verify."""


class ConfigError(LedgerError, ValueError):
    """A governance config violates one of its invariants."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ValidationError(LedgerError):
    """An event body was rejected by validation; ``violations`` lists why."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NoLiveVersionError(LedgerError):
    """No non-retracted version of a lineage exists at the requested time."""


class NoReplicationsError(LedgerError):
    """Replication trust was requested for an artifact with no replications."""


class DegenerateWeightsError(LedgerError, ValueError):
    """Credential weights sum to zero."""
