"""Signed, hash-chained ledger for scholarly events, with scoring, analysis and simulation."""

from .config import GovernanceConfig, load_config
from .errors import (
    ArgumentError, AttestationError, ConfigError, EncodingError, IdentityError, LedgerError,
    NoLiveVersionError, NoReplicationsError, ValidationError,
)
from .hashing import compute_content_hash
from .identity import generate_identity, sign, verify
from .ledger import Ledger, LedgerEvent, append_event, verify_chain
from .merkle import build_merkle_root, merkle_proof, verify_inclusion

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "AttestationError", "ConfigError", "EncodingError", "GovernanceConfig", "IdentityError",
    "Ledger", "LedgerError", "LedgerEvent", "NoLiveVersionError", "NoReplicationsError", "ValidationError",
    "append_event", "build_merkle_root", "compute_content_hash", "generate_identity", "load_config",
    "merkle_proof", "sign", "verify", "verify_chain", "verify_inclusion",
]
