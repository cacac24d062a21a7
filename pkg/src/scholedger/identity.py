"""Ed25519 identities, detached signatures and key-signed attestations."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from .canonical import encode_value
from .errors import ArgumentError, AttestationError, IdentityError
from .hashing import compute_content_hash, require_hash

SIGNATURE_SCHEME = "ed25519"
KEY_LEN = 32
SIGNATURE_LEN = 64

CLAIM_KINDS = ("institutional-credential", "external-id", "editor-role")

_RAW = serialization.Encoding.Raw


def _private(secret: bytes) -> Ed25519PrivateKey:
    if not isinstance(secret, (bytes, bytearray)) or len(secret) != KEY_LEN:
        raise ArgumentError(f"secret key must be {KEY_LEN} bytes")
    return Ed25519PrivateKey.from_private_bytes(bytes(secret))


def public_key_of(secret: bytes) -> bytes:
    return _private(secret).public_key().public_bytes(_RAW, serialization.PublicFormat.Raw)


def key_id_of(public_key: bytes) -> str:
    return compute_content_hash(bytes(public_key))


@dataclass(frozen=True)
class Attestation:
    subject: str
    issuer_key: str
    claim_kind: str
    payload_hash: str
    signature: bytes

    def message(self) -> bytes:
        return attestation_message(self.subject, self.claim_kind, self.payload_hash)

    def identity_tuple(self) -> tuple[str, str, str]:
        return (self.issuer_key, self.claim_kind, self.payload_hash)


@dataclass(frozen=True)
class IdentityRecord:
    key_id: str
    public_key: bytes
    created_at: int
    attestations: tuple[Attestation, ...] = field(default=())

    def has_claim(self, kind: str) -> bool:
        return any(a.claim_kind == kind for a in self.attestations)


def generate_identity(seed: bytes | None = None, created_at: int = 0) -> tuple[bytes, IdentityRecord]:
    """Create a keypair; a 32-byte ``seed`` makes it deterministic."""
    if seed is None:
        seed = os.urandom(KEY_LEN)
    elif not isinstance(seed, (bytes, bytearray)) or len(seed) != KEY_LEN:
        raise ArgumentError(f"seed must be exactly {KEY_LEN} bytes")
    secret = bytes(seed)
    public = public_key_of(secret)
    return secret, IdentityRecord(key_id_of(public), public, int(created_at))


def sign(body: bytes, secret: bytes) -> bytes:
    return _private(secret).sign(bytes(body))


def verify(body: bytes, sig: bytes, public_key: bytes) -> bool:
    if len(public_key) != KEY_LEN:
        raise ArgumentError(f"public key must be {KEY_LEN} bytes, got {len(public_key)}")
    if len(sig) != SIGNATURE_LEN:
        raise ArgumentError(f"signature must be {SIGNATURE_LEN} bytes, got {len(sig)}")
    try:
        Ed25519PublicKey.from_public_bytes(bytes(public_key)).verify(bytes(sig), bytes(body))
    except (InvalidSignature, ValueError):
        return False
    return True


def attestation_message(subject: str, claim_kind: str, payload_hash: str) -> bytes:
    return encode_value({"claim_kind": claim_kind, "payload_hash": payload_hash, "subject": subject})


def make_attestation(subject: str, claim_kind: str, payload_hash: str, issuer_secret: bytes) -> Attestation:
    if claim_kind not in CLAIM_KINDS:
        raise ArgumentError(f"unknown attestation kind {claim_kind!r}")
    require_hash(subject, "subject key id")
    require_hash(payload_hash, "payload hash")
    issuer = key_id_of(public_key_of(issuer_secret))
    sig = sign(attestation_message(subject, claim_kind, payload_hash), issuer_secret)
    return Attestation(subject, issuer, claim_kind, payload_hash, sig)


def check_attestation(att: Attestation, registry: Mapping[str, IdentityRecord]) -> None:
    """Raise unless ``att`` is signed by a registered issuer."""
    issuer = registry.get(att.issuer_key)
    if issuer is None:
        raise IdentityError(f"unknown attestation issuer {att.issuer_key}")
    if att.claim_kind not in CLAIM_KINDS:
        raise AttestationError(f"unknown attestation kind {att.claim_kind!r}")
    try:
        ok = verify(att.message(), att.signature, issuer.public_key)
    except ArgumentError:
        ok = False
    if not ok:
        raise AttestationError("attestation signature does not verify against issuer key")


def bind_attestation(
    record: IdentityRecord, att: Attestation, registry: Mapping[str, IdentityRecord]
) -> IdentityRecord:
    """Return ``record`` with ``att`` attached; re-binding the same attestation is a no-op."""
    if att.subject != record.key_id:
        raise AttestationError("attestation subject does not match identity")
    check_attestation(att, registry)
    if any(a.identity_tuple() == att.identity_tuple() for a in record.attestations):
        return record
    return replace(record, attestations=record.attestations + (att,))


# key files: hex text, one key per file

def write_key_files(directory: Path | str, name: str, secret: bytes) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sec_path = directory / f"{name}.secret"
    pub_path = directory / f"{name}.public"
    sec_path.write_text(secret.hex() + "\n", encoding="utf-8")
    os.chmod(sec_path, 0o600)
    pub_path.write_text(public_key_of(secret).hex() + "\n", encoding="utf-8")
    return sec_path, pub_path


def read_key_file(path: Path | str) -> bytes:
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        key = bytes.fromhex(text)
    except ValueError as exc:
        raise ArgumentError(f"{path}: not a hex key") from exc
    if len(key) != KEY_LEN:
        raise ArgumentError(f"{path}: key must be {KEY_LEN} bytes")
    return key
