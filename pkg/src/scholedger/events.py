"""Typed scholarly event bodies, their canonical encoding, validation and state projection.

Every body carries ``tau``, the Unix-seconds timestamp at which it is appended.
The ledger state is a fold of :func:`apply_event` over the chain; nothing is
ever removed from it.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, fields
from typing import Any, ClassVar, Iterable

from . import identity as ident
from .analysis import classify_delta
from .canonical import decode_value, encode_value
from .claims import Claim
from .config import CITATION_MODALITIES, COMMENTARY_MODALITIES, GovernanceConfig
from .errors import ArgumentError, ValidationError
from .hashing import GENESIS_HASH, is_content_hash

VERSION_MODIFICATIONS = ("corrigendum", "retraction-notice", "addendum", "reanalysis", "extension")
RETRACTION_REASONS = ("methodological-flaw", "ethical-breach", "data-falsity", "superseded")
ORIGINAL = "original"


class Body:
    kind: ClassVar[str]
    _floats: ClassVar[tuple[str, ...]] = ()
    _tuples: ClassVar[tuple[str, ...]] = ()
    _claim_lists: ClassVar[tuple[str, ...]] = ()
    _claims: ClassVar[tuple[str, ...]] = ()

    def __post_init__(self):
        for name in self._floats:
            value = getattr(self, name)
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                object.__setattr__(self, name, float(value))
        for name in self._tuples + self._claim_lists:
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in self._claim_lists:
                value = [c.to_dict() for c in value]
            elif f.name in self._claims:
                value = value.to_dict()
            elif f.name in self._tuples:
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, d: dict):
        data = dict(d)
        data.pop("kind", None)
        names = {f.name for f in fields(cls)}
        if set(data) != names:
            raise ArgumentError(f"{cls.kind} body fields {sorted(data)} != {sorted(names)}")
        for name in cls._claim_lists:
            data[name] = tuple(Claim.from_dict(c) for c in data[name])
        for name in cls._claims:
            data[name] = Claim.from_dict(data[name])
        return cls(**data)


@dataclass(frozen=True)
class IdentityRegistration(Body):
    kind: ClassVar[str] = "identity"
    public_key: str
    scheme: str
    tau: int


@dataclass(frozen=True)
class AttestationGrant(Body):
    kind: ClassVar[str] = "attestation"
    subject: str
    issuer_key: str
    claim_kind: str
    payload_hash: str
    signature: str
    tau: int

    def attestation(self) -> ident.Attestation:
        return ident.Attestation(self.subject, self.issuer_key, self.claim_kind, self.payload_hash,
                                 bytes.fromhex(self.signature))


@dataclass(frozen=True)
class ArtifactRegistration(Body):
    kind: ClassVar[str] = "register"
    _tuples: ClassVar[tuple[str, ...]] = ("domain_tags", "methods")
    _claim_lists: ClassVar[tuple[str, ...]] = ("claims",)
    artifact_hash: str
    lineage_id: str
    title: str
    created_at: int
    tau: int
    domain_tags: tuple[str, ...] = ()
    claims: tuple[Claim, ...] = ()
    methods: tuple[str, ...] = ()
    data_hash: str | None = None
    protocol_hash: str | None = None


@dataclass(frozen=True)
class CommentaryEvent(Body):
    kind: ClassVar[str] = "comment"
    _claim_lists: ClassVar[tuple[str, ...]] = ("claims",)
    target: str
    modality: str
    text_hash: str
    tau: int
    claims: tuple[Claim, ...] = ()


@dataclass(frozen=True)
class CitationEvent(Body):
    kind: ClassVar[str] = "cite"
    _floats: ClassVar[tuple[str, ...]] = ("polarity", "integration_depth")
    citing: str
    cited: str
    modality: str
    polarity: float
    integration_depth: float
    tau: int


@dataclass(frozen=True)
class VersionEvent(Body):
    kind: ClassVar[str] = "version"
    lineage_id: str
    version_hash: str
    modification: str
    tau: int
    parent_version: str | None = None


@dataclass(frozen=True)
class RetractionEvent(Body):
    kind: ClassVar[str] = "retract"
    _tuples: ClassVar[tuple[str, ...]] = ("reasons",)
    target_version: str
    reasons: tuple[str, ...]
    voluntary: bool
    tau: int


@dataclass(frozen=True)
class NullResultEvent(Body):
    kind: ClassVar[str] = "null"
    _floats: ClassVar[tuple[str, ...]] = ("effect_size", "confidence")
    hypothesis_id: str
    dataset_desc: str
    method_desc: str
    effect_size: float
    confidence: float
    tau: int


@dataclass(frozen=True)
class ReplicationEvent(Body):
    kind: ClassVar[str] = "replicate"
    _floats: ClassVar[tuple[str, ...]] = ("congruence",)
    target: str
    dataset_variant: str
    congruence: float
    tau: int


@dataclass(frozen=True)
class TransferUseEvent(Body):
    kind: ClassVar[str] = "transfer"
    _claims: ClassVar[tuple[str, ...]] = ("resulting_claim",)
    source: str
    new_domain: str
    dataset: str
    protocol: str
    resulting_claim: Claim
    tau: int


BODY_TYPES: dict[str, type[Body]] = {
    cls.kind: cls
    for cls in (IdentityRegistration, AttestationGrant, ArtifactRegistration, CommentaryEvent,
                CitationEvent, VersionEvent, RetractionEvent, NullResultEvent, ReplicationEvent,
                TransferUseEvent)
}


def body_to_dict(body: Body | dict) -> dict:
    return body if isinstance(body, dict) else body.to_dict()


def canonical_encode(body: Body | dict) -> bytes:
    """Canonical bytes of an event body (sorted keys, compact, UTF-8)."""
    return encode_value(body_to_dict(body))


def body_from_dict(d: dict) -> Body:
    if not isinstance(d, dict):
        raise ArgumentError("event body must be an object")
    cls = BODY_TYPES.get(d.get("kind"))
    if cls is None:
        raise ArgumentError(f"unknown event kind {d.get('kind')!r}")
    try:
        return cls.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ArgumentError(f"malformed {cls.kind} body: {exc}") from exc


def decode_body(data: bytes | str) -> Body:
    return body_from_dict(decode_value(data))


# ---------------------------------------------------------------------------
# state projection

@dataclass(frozen=True)
class Record:
    """A body together with where and by whom it was appended."""

    event_id: str
    seq: int
    signer: str
    body: Any

    @property
    def tau(self) -> int:
        return self.body.tau


@dataclass(frozen=True)
class VersionNode:
    version_hash: str
    lineage_id: str
    parent: str | None
    modification: str
    tau: int
    seq: int
    signer: str
    delta_class: str | None


@dataclass
class State:
    identities: dict[str, ident.IdentityRecord] = field(default_factory=dict)
    artifacts: dict[str, Record] = field(default_factory=dict)
    versions: dict[str, VersionNode] = field(default_factory=dict)
    version_events: list[Record] = field(default_factory=list)
    commentaries: dict[str, Record] = field(default_factory=dict)
    citations: list[Record] = field(default_factory=list)
    retractions: dict[str, Record] = field(default_factory=dict)
    nulls: list[Record] = field(default_factory=list)
    replications: list[Record] = field(default_factory=list)
    transfers: list[Record] = field(default_factory=list)
    attestations: list[Record] = field(default_factory=list)
    event_count: int = 0
    last_timestamp: int = 0

    def copy(self) -> "State":
        return State(**{f.name: copy.copy(getattr(self, f.name)) for f in fields(self)})

    # queries
    def author_of(self, artifact: str) -> str | None:
        rec = self.artifacts.get(artifact)
        return rec.signer if rec else None

    def lineage_versions(self, lineage_id: str) -> list[VersionNode]:
        return sorted((v for v in self.versions.values() if v.lineage_id == lineage_id),
                      key=lambda v: (v.tau, v.seq))

    def is_editor(self, key_id: str) -> bool:
        rec = self.identities.get(key_id)
        return rec is not None and rec.has_claim("editor-role")

    def target_exists(self, target: str) -> bool:
        return target in self.artifacts or target in self.commentaries

    def to_dict(self) -> dict:
        """Canonical export used to check replay determinism."""

        def rec(r: Record) -> dict:
            return {"body": r.body.to_dict(), "event_id": r.event_id, "seq": r.seq, "signer": r.signer}

        return {
            "artifacts": {k: rec(v) for k, v in sorted(self.artifacts.items())},
            "attestations": [rec(r) for r in self.attestations],
            "citations": [rec(r) for r in self.citations],
            "commentaries": {k: rec(v) for k, v in sorted(self.commentaries.items())},
            "event_count": self.event_count,
            "identities": {
                k: {"attestations": [[a.issuer_key, a.claim_kind, a.payload_hash] for a in v.attestations],
                    "created_at": v.created_at, "public_key": v.public_key.hex()}
                for k, v in sorted(self.identities.items())
            },
            "last_timestamp": self.last_timestamp,
            "nulls": [rec(r) for r in self.nulls],
            "replications": [rec(r) for r in self.replications],
            "retractions": {k: rec(v) for k, v in sorted(self.retractions.items())},
            "transfers": [rec(r) for r in self.transfers],
            "version_events": [rec(r) for r in self.version_events],
            "versions": {
                k: {"delta_class": v.delta_class, "lineage_id": v.lineage_id, "modification": v.modification,
                    "parent": v.parent, "seq": v.seq, "signer": v.signer, "tau": v.tau}
                for k, v in sorted(self.versions.items())
            },
        }


# ---------------------------------------------------------------------------
# validation

def _in_unit(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and 0.0 <= x <= 1.0


def _bad_hash(value, allow_none=False) -> bool:
    if value is None:
        return not allow_none
    return not is_content_hash(value)


def validate_event(body: Body, state: State, config: GovernanceConfig, signer: str | None = None) -> list[str]:
    """Return every rule ``body`` breaks against ``state``; an empty list means valid."""
    v = list(config.violations())
    if not isinstance(body, Body):
        return v + ["malformed body"]
    tau = body.tau
    if not isinstance(tau, int) or isinstance(tau, bool) or tau < 0:
        v.append("timestamp must be a non-negative integer")
    elif tau < state.last_timestamp:
        v.append("timestamp regression")

    if isinstance(body, IdentityRegistration):
        try:
            pub = bytes.fromhex(body.public_key)
        except ValueError:
            pub = b""
        if len(pub) != ident.KEY_LEN or body.public_key != pub.hex():
            v.append("malformed public key")
        else:
            key_id = ident.key_id_of(pub)
            if key_id in state.identities:
                v.append("duplicate identity")
            if signer is not None and signer != key_id:
                v.append("identity must be self-signed")
        if body.scheme != config.signature_scheme:
            v.append("signature scheme mismatch")
        return v

    if signer is not None and signer not in state.identities:
        v.append("unknown signer")

    if isinstance(body, AttestationGrant):
        if body.subject not in state.identities:
            v.append("unknown target")
        if body.claim_kind not in ident.CLAIM_KINDS:
            v.append("unknown attestation kind")
        if signer is not None and body.issuer_key != signer:
            v.append("attestation issuer must sign the event")
        if _bad_hash(body.payload_hash):
            v.append("malformed payload hash")
        issuer = state.identities.get(body.issuer_key)
        if issuer is None:
            v.append("unknown attestation issuer")
        else:
            try:
                ok = ident.verify(ident.attestation_message(body.subject, body.claim_kind, body.payload_hash),
                                  bytes.fromhex(body.signature), issuer.public_key)
            except ValueError:
                ok = False
            if not ok:
                v.append("bad attestation signature")

    elif isinstance(body, ArtifactRegistration):
        if _bad_hash(body.artifact_hash) or body.artifact_hash == GENESIS_HASH:
            v.append("malformed artifact hash")
        elif body.artifact_hash in state.artifacts:
            v.append("duplicate artifact")
        if _bad_hash(body.lineage_id):
            v.append("malformed lineage id")
        elif body.lineage_id != body.artifact_hash:
            root = state.artifacts.get(body.lineage_id)
            if root is None or root.body.lineage_id != body.lineage_id:
                v.append("unknown lineage")
        if _bad_hash(body.data_hash, allow_none=True) or _bad_hash(body.protocol_hash, allow_none=True):
            v.append("malformed data or protocol hash")
        if not isinstance(body.created_at, int) or body.created_at < 0:
            v.append("created_at must be a non-negative integer")
        elif isinstance(tau, int) and body.created_at > tau:
            v.append("created_at after registration")

    elif isinstance(body, CommentaryEvent):
        if not state.target_exists(body.target):
            v.append("unknown target")
        if body.modality not in COMMENTARY_MODALITIES:
            v.append("unknown modality")
        if _bad_hash(body.text_hash):
            v.append("malformed text hash")

    elif isinstance(body, CitationEvent):
        if body.citing == body.cited:
            v.append("self citation")
        citing = state.artifacts.get(body.citing)
        cited = state.artifacts.get(body.cited)
        if citing is None or cited is None:
            v.append("unknown target")
        else:
            if citing.tau < cited.tau:
                v.append("citation points forward in time")
            if signer is not None and citing.signer != signer:
                v.append("unauthorized citation")
        if body.modality not in CITATION_MODALITIES:
            v.append("unknown modality")
        if not (isinstance(body.polarity, float) and -1.0 <= body.polarity <= 1.0):
            v.append("polarity out of range")
        if not _in_unit(body.integration_depth):
            v.append("integration depth out of range")

    elif isinstance(body, VersionEvent):
        art = state.artifacts.get(body.version_hash)
        if not any(n.lineage_id == body.lineage_id for n in state.versions.values()):
            v.append("unknown lineage")
        if art is None or art.body.lineage_id != body.lineage_id:
            v.append("version not registered in lineage")
        if body.version_hash in state.versions:
            v.append("duplicate version")
        if body.parent_version is None:
            v.append("lineage already has a root")
        else:
            parent = state.versions.get(body.parent_version)
            if parent is None or parent.lineage_id != body.lineage_id:
                v.append("unknown parent version")
        if body.modification not in VERSION_MODIFICATIONS:
            v.append("unknown modification type")

    elif isinstance(body, RetractionEvent):
        node = state.versions.get(body.target_version)
        if node is None:
            v.append("unknown target")
        elif body.target_version in state.retractions:
            v.append("already retracted")
        if not body.reasons or any(r not in RETRACTION_REASONS for r in body.reasons) \
                or len(set(body.reasons)) != len(body.reasons):
            v.append("malformed reason vector")
        if not isinstance(body.voluntary, bool):
            v.append("voluntary must be boolean")
        if node is not None:
            author = state.author_of(body.target_version)
            if signer != author and not (signer is not None and state.is_editor(signer)):
                v.append("unauthorized retraction")
            if body.voluntary and signer != author:
                v.append("voluntary retraction must be self-signed")

    elif isinstance(body, NullResultEvent):
        if not body.hypothesis_id:
            v.append("empty hypothesis id")
        if not _in_unit(body.confidence):
            v.append("confidence out of range")
        if not (isinstance(body.effect_size, float) and math.isfinite(body.effect_size)):
            v.append("effect size must be finite")

    elif isinstance(body, ReplicationEvent):
        if body.target not in state.artifacts:
            v.append("unknown target")
        if not _in_unit(body.congruence):
            v.append("congruence out of range")

    elif isinstance(body, TransferUseEvent):
        if body.source not in state.artifacts:
            v.append("unknown target")

    return v


def _project(state: State, body: Body, event_id: str, seq: int, signer: str) -> None:
    """Mutate ``state`` in place; callers validate first."""
    rec = Record(event_id, seq, signer, body)
    if isinstance(body, IdentityRegistration):
        pub = bytes.fromhex(body.public_key)
        state.identities[ident.key_id_of(pub)] = ident.IdentityRecord(ident.key_id_of(pub), pub, body.tau)
    elif isinstance(body, AttestationGrant):
        subject = state.identities[body.subject]
        state.identities[body.subject] = ident.bind_attestation(subject, body.attestation(), state.identities)
        state.attestations.append(rec)
    elif isinstance(body, ArtifactRegistration):
        state.artifacts[body.artifact_hash] = rec
        if body.lineage_id == body.artifact_hash:
            state.versions[body.artifact_hash] = VersionNode(
                body.artifact_hash, body.lineage_id, None, ORIGINAL, body.tau, seq, signer, None)
    elif isinstance(body, CommentaryEvent):
        state.commentaries[event_id] = rec
    elif isinstance(body, CitationEvent):
        state.citations.append(rec)
    elif isinstance(body, VersionEvent):
        prev = state.artifacts[body.parent_version].body
        nxt = state.artifacts[body.version_hash].body
        state.versions[body.version_hash] = VersionNode(
            body.version_hash, body.lineage_id, body.parent_version, body.modification, body.tau, seq,
            signer, classify_delta(prev, nxt))
        state.version_events.append(rec)
    elif isinstance(body, RetractionEvent):
        state.retractions[body.target_version] = rec
    elif isinstance(body, NullResultEvent):
        state.nulls.append(rec)
    elif isinstance(body, ReplicationEvent):
        state.replications.append(rec)
    elif isinstance(body, TransferUseEvent):
        state.transfers.append(rec)
    state.event_count = seq + 1
    state.last_timestamp = max(state.last_timestamp, body.tau)


def apply_event(state: State, envelope, config: GovernanceConfig) -> State:
    """Return the state after ``envelope``; the input state is never modified."""
    problems = validate_event(envelope.body, state, config, signer=envelope.author_key)
    if problems:
        raise ValidationError(problems)
    new = state.copy()
    _project(new, envelope.body, envelope.event_id, envelope.seq, envelope.author_key)
    return new


def replay(envelopes: Iterable, config: GovernanceConfig) -> State:
    state = State()
    for env in envelopes:
        problems = validate_event(env.body, state, config, signer=env.author_key)
        if problems:
            raise ValidationError([f"seq {env.seq}: {p}" for p in problems])
        _project(state, env.body, env.event_id, env.seq, env.author_key)
    return state
