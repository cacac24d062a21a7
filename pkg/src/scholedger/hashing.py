"""SHA-256 content addressing with domain separation for envelopes and Merkle nodes."""

from __future__ import annotations

import hashlib
import re

from .errors import ArgumentError

HASH_NAME = "sha256"
GENESIS_HASH = "0" * 64

# Content hashes are plain SHA-256 so any external tool can recompute them.
# Envelope and Merkle-node hashes carry a one-byte prefix to keep them apart.
ENVELOPE_PREFIX = b"\x01"
MERKLE_NODE_PREFIX = b"\x02"

_HEX64 = re.compile(r"[0-9a-f]{64}")


def compute_content_hash(data: bytes) -> str:
    """Return the lowercase hex SHA-256 digest of ``data``."""
    return hashlib.sha256(data).hexdigest()


def envelope_hash(envelope_bytes: bytes) -> str:
    return hashlib.sha256(ENVELOPE_PREFIX + envelope_bytes).hexdigest()


def merkle_node_hash(left: str, right: str) -> str:
    return hashlib.sha256(MERKLE_NODE_PREFIX + bytes.fromhex(left) + bytes.fromhex(right)).hexdigest()


def is_content_hash(value) -> bool:
    return isinstance(value, str) and _HEX64.fullmatch(value) is not None


def require_hash(value, what: str = "hash") -> str:
    if not is_content_hash(value):
        raise ArgumentError(f"{what} must be 64 lowercase hex characters, got {value!r}")
    return value
