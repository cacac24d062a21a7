"""Append-only, hash-chained, signed event log.

Each envelope is stored as one canonical JSON line. ``prev_hash`` links an
envelope to the domain-separated hash of the previous line, ``event_id`` is the
content hash of the body and ``signature`` covers the canonical body bytes.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import identity as ident
from .canonical import decode_value, encode_value
from .config import GovernanceConfig
from .errors import ArgumentError, IdentityError, ValidationError
from .events import Body, IdentityRegistration, State, _project, body_from_dict, canonical_encode, validate_event
from .hashing import GENESIS_HASH, compute_content_hash, envelope_hash, is_content_hash
from .merkle import AnchorRecord, build_merkle_root, merkle_proof

ENVELOPE_KEYS = ("author_key", "body", "event_id", "prev_hash", "seq", "signature", "timestamp")
LEDGER_FORMAT = "scholedger/1"


@dataclass(frozen=True)
class LedgerEvent:
    event_id: str
    seq: int
    prev_hash: str
    timestamp: int
    author_key: str
    signature: bytes
    body: Body

    def to_dict(self) -> dict:
        return {
            "author_key": self.author_key,
            "body": self.body.to_dict(),
            "event_id": self.event_id,
            "prev_hash": self.prev_hash,
            "seq": self.seq,
            "signature": self.signature.hex(),
            "timestamp": self.timestamp,
        }

    def to_bytes(self) -> bytes:
        return encode_value(self.to_dict())

    @property
    def envelope_hash(self) -> str:
        return envelope_hash(self.to_bytes())

    @classmethod
    def from_dict(cls, d: dict) -> "LedgerEvent":
        if not isinstance(d, dict) or sorted(d) != list(ENVELOPE_KEYS):
            raise ArgumentError("envelope keys do not match the envelope schema")
        return cls(
            event_id=d["event_id"],
            seq=d["seq"],
            prev_hash=d["prev_hash"],
            timestamp=d["timestamp"],
            author_key=d["author_key"],
            signature=bytes.fromhex(d["signature"]),
            body=body_from_dict(d["body"]),
        )

    @classmethod
    def from_bytes(cls, line: bytes) -> "LedgerEvent":
        return cls.from_dict(decode_value(line))


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    seq: int | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        if self.ok:
            return {"ok": True}
        return {"ok": False, "reason": self.reason, "seq": self.seq}


class Ledger:
    """In-memory chain plus its projected state; single writer."""

    def __init__(self, config: GovernanceConfig | None = None):
        self.config = (config or GovernanceConfig()).check()
        self.events: list[LedgerEvent] = []
        self.state = State()
        self._head = GENESIS_HASH

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def head_hash(self) -> str:
        return self._head

    def append(self, body: Body, signer: bytes) -> LedgerEvent:
        return append_event(self, body, signer)

    def lines(self) -> list[bytes]:
        return [e.to_bytes() for e in self.events]

    def envelope_hashes(self) -> list[str]:
        return [envelope_hash(line) for line in self.lines()]

    def state_at(self, t: int) -> State:
        """State projected from the events stamped at or before ``t``."""
        state = State()
        for e in self.events:
            if e.timestamp > t:
                break
            _project(state, e.body, e.event_id, e.seq, e.author_key)
        return state

    # persistence
    def write(self, path: Path | str) -> None:
        data = b"".join(line + b"\n" for line in self.lines())
        tmp = Path(str(path) + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: Path | str, config: GovernanceConfig | None = None, verify: bool = True) -> "Ledger":
        lines = read_lines(path)
        if verify:
            report = verify_chain(lines)
            if not report.ok:
                raise ValidationError([f"seq {report.seq}: {report.reason}"])
        ledger = cls(config)
        for line in lines:
            env = LedgerEvent.from_bytes(line)
            problems = validate_event(env.body, ledger.state, ledger.config, signer=env.author_key)
            if problems:
                raise ValidationError([f"seq {env.seq}: {p}" for p in problems])
            _project(ledger.state, env.body, env.event_id, env.seq, env.author_key)
            ledger.events.append(env)
            ledger._head = envelope_hash(line)
        return ledger


def read_lines(path: Path | str) -> list[bytes]:
    data = Path(path).read_bytes()
    if not data:
        return []
    lines = data.split(b"\n")
    if lines[-1] == b"":
        lines.pop()
    return lines


def append_event(log: Ledger, body: Body, signer: bytes) -> LedgerEvent:
    """Validate, sign and append ``body``; the log is unchanged on any error."""
    public = ident.public_key_of(signer)
    key_id = ident.key_id_of(public)
    self_registration = isinstance(body, IdentityRegistration) and body.public_key == public.hex()
    if key_id not in log.state.identities and not self_registration:
        raise IdentityError(f"signer {key_id} is not registered")
    problems = validate_event(body, log.state, log.config, signer=key_id)
    if problems:
        raise ValidationError(problems)
    body_bytes = canonical_encode(body)
    env = LedgerEvent(
        event_id=compute_content_hash(body_bytes),
        seq=len(log.events),
        prev_hash=log.head_hash,
        timestamp=body.tau,
        author_key=key_id,
        signature=ident.sign(body_bytes, signer),
        body=body,
    )
    line = env.to_bytes()
    _project(log.state, body, env.event_id, env.seq, key_id)
    log.events.append(env)
    log._head = envelope_hash(line)
    return env


# Both helpers are pure functions of their byte arguments, so repeated
# verification of a growing or re-read log reuses earlier results.
@lru_cache(maxsize=1 << 14)
def _parse_envelope(line: bytes) -> tuple[str | None, LedgerEvent | None, bytes]:
    try:
        raw = json.loads(line.decode("utf-8"))
        env = LedgerEvent.from_dict(raw)
    except (UnicodeDecodeError, ValueError, TypeError, KeyError, AttributeError):
        return "malformed envelope", None, b""
    try:
        canonical = env.to_bytes()
    except ValueError:
        return "malformed envelope", None, b""
    if canonical != line:
        return "non-canonical encoding", None, b""
    return None, env, encode_value(raw["body"])


@lru_cache(maxsize=1 << 14)
def _signature_ok(body_bytes: bytes, signature: bytes, public: bytes) -> bool:
    try:
        return ident.verify(body_bytes, signature, public)
    except ArgumentError:
        return False


def _check_envelope(line: bytes, k: int, prev: str, keys: dict[str, bytes]) -> tuple[str | None, LedgerEvent | None]:
    reason, env, body_bytes = _parse_envelope(bytes(line))
    if reason is not None:
        return reason, None
    if env.seq != k:
        return "seq mismatch", None
    if env.prev_hash != prev:
        return "prev_hash mismatch", None
    if env.event_id != compute_content_hash(body_bytes):
        return "event_id mismatch", None
    if env.timestamp != env.body.tau:
        return "timestamp mismatch", None
    if isinstance(env.body, IdentityRegistration):
        try:
            public = bytes.fromhex(env.body.public_key)
        except ValueError:
            return "malformed public key", None
        if ident.key_id_of(public) != env.author_key:
            return "identity not self-signed", None
    else:
        public = keys.get(env.author_key)
        if public is None:
            return "unknown author", None
    if not _signature_ok(body_bytes, env.signature, public):
        return "bad signature", None
    return None, env


def verify_chain(log: Ledger | Iterable[LedgerEvent | bytes]) -> VerificationReport:
    """Check every envelope invariant; report the smallest failing seq."""
    items = log.events if isinstance(log, Ledger) else list(log)
    prev = GENESIS_HASH
    keys: dict[str, bytes] = {}
    for k, item in enumerate(items):
        line = item.to_bytes() if isinstance(item, LedgerEvent) else bytes(item)
        reason, env = _check_envelope(line, k, prev, keys)
        if reason is not None:
            return VerificationReport(False, k, reason)
        if isinstance(env.body, IdentityRegistration):
            keys.setdefault(env.author_key, bytes.fromhex(env.body.public_key))
        prev = envelope_hash(line)
    return VerificationReport(True)


# ---------------------------------------------------------------------------
# anchoring

def anchor_range(log: Ledger, seq_from: int, seq_to: int, anchored_at: int) -> AnchorRecord:
    if not 0 <= seq_from <= seq_to < len(log):
        raise ArgumentError(f"anchor range {seq_from}..{seq_to} outside ledger of length {len(log)}")
    leaves = log.envelope_hashes()[seq_from:seq_to + 1]
    return AnchorRecord(build_merkle_root(leaves), seq_from, seq_to, int(anchored_at))


def next_anchor(log: Ledger, anchors: Sequence[AnchorRecord], anchored_at: int) -> AnchorRecord:
    """Anchor every event after the last anchored range."""
    start = anchors[-1].seq_to + 1 if anchors else 0
    if start >= len(log):
        raise ArgumentError("nothing to anchor")
    return anchor_range(log, start, len(log) - 1, anchored_at)


def inclusion_proof(log: Ledger, anchor: AnchorRecord, seq: int) -> list[tuple[str, str]]:
    if not anchor.seq_from <= seq <= anchor.seq_to:
        raise ArgumentError(f"seq {seq} is not inside the anchored range")
    leaves = log.envelope_hashes()[anchor.seq_from:anchor.seq_to + 1]
    return merkle_proof(leaves, seq - anchor.seq_from)


def verify_anchors(log: Ledger | Sequence[bytes], anchors: Sequence[AnchorRecord]) -> VerificationReport:
    """Anchors must tile the log contiguously from seq 0 and match recomputed roots."""
    lines = log.lines() if isinstance(log, Ledger) else list(log)
    hashes = [envelope_hash(line) for line in lines]
    expected = 0
    for i, a in enumerate(anchors):
        if a.seq_from != expected or a.seq_to < a.seq_from or a.seq_to >= len(hashes):
            return VerificationReport(False, i, "anchor ranges not contiguous")
        if not is_content_hash(a.merkle_root) or build_merkle_root(hashes[a.seq_from:a.seq_to + 1]) != a.merkle_root:
            return VerificationReport(False, i, "merkle root mismatch")
        expected = a.seq_to + 1
    return VerificationReport(True)


def read_anchors(path: Path | str) -> list[AnchorRecord]:
    p = Path(path)
    if not p.exists():
        return []
    return [AnchorRecord.from_dict(decode_value(line)) for line in read_lines(p)]


def append_anchor(path: Path | str, anchor: AnchorRecord) -> None:
    with open(path, "ab") as fh:
        fh.write(encode_value(anchor.to_dict()) + b"\n")


def ledger_header(config: GovernanceConfig) -> dict:
    return {
        "config_hash": config.config_hash,
        "format": LEDGER_FORMAT,
        "genesis": GENESIS_HASH,
        "hash_function": config.hash_function,
        "signature_scheme": config.signature_scheme,
    }
