"""Deterministic fixture ledger used by the test-suite and the ``fixture`` CLI command.

Hand-computed values under :func:`fixture_config`:

* alice: V=2 (A1's two claims have a congruent replication), E=3 (three of her
  comments on E1 carry an endorsement meta-comment), RC=1 (dave retracted A2)
  -> reputation 1*2 + 0.5*3 + 1/(1+1) = 4.0; trust = 3 endorsements + 2
  supporting replications = 5.0; correction scores (0.0, 1.0) from one
  unchallenged corrigendum of A1.
* erin: voluntary retraction of E2, whose influence at that time is 2.0 (two
  foundational citations, polarity 1, depth 1, from uncited citers), and a
  self-signed involuntary retraction of E3 -> (S_rect, S_ethics) = (2.0, 1.5);
  reputation 0 + 0 + 1/(1+1) = 0.5.
* A1: replication congruences [1, 1, 0] -> replication trust 2/3.
* E1: commentary vector (2, 1, 0, 1).
* E2: impact weight 1*2 + 2*0 = 2.0.
* hypothesis H-coffee: two confident nulls -> 0.8 prior dampened to 0.2.
"""

from __future__ import annotations

import hashlib

from . import identity as ident
from .claims import Claim
from .config import GovernanceConfig
from .events import (
    ArtifactRegistration, AttestationGrant, CitationEvent, CommentaryEvent, IdentityRegistration,
    NullResultEvent, ReplicationEvent, RetractionEvent, TransferUseEvent, VersionEvent,
)
from .hashing import compute_content_hash
from .ledger import Ledger

T0 = 1_700_000_000
NAMES = ("alice", "bob", "carol", "dave", "erin", "board")


def fixture_config() -> GovernanceConfig:
    return GovernanceConfig(rep_alpha=1.0, rep_beta=0.5, rep_gamma=1.0,
                            trust_lambda1=1.0, trust_lambda2=1.0, trust_lambda3=1.0,
                            damp_lambda=0.5, impact_alpha=1.0, impact_beta=2.0,
                            ethics_beta=1.0, ethics_gamma=0.5)


def fixture_seed(name: str) -> bytes:
    return hashlib.sha256(b"scholedger-fixture:" + name.encode()).digest()


def content(label: str) -> str:
    return compute_content_hash(f"fixture content {label}".encode())


def build_fixture(config: GovernanceConfig | None = None) -> tuple[Ledger, dict]:
    """Return the fixture ledger and a map of symbolic names to hashes/key ids."""
    ledger = Ledger(config or fixture_config())
    keys = {n: ident.generate_identity(fixture_seed(n))[0] for n in NAMES}
    ids = {n: ident.key_id_of(ident.public_key_of(k)) for n, k in keys.items()}
    ref: dict[str, str] = dict(ids)
    t = T0

    def tick(step=10):
        nonlocal t
        t += step
        return t

    for n in NAMES:
        ledger.append(IdentityRegistration(ident.public_key_of(keys[n]).hex(), "ed25519", T0), keys[n])
    att = ident.make_attestation(ids["dave"], "editor-role", content("dave-editor"), keys["board"])
    ledger.append(AttestationGrant(att.subject, att.issuer_key, att.claim_kind, att.payload_hash,
                                   att.signature.hex(), tick()), keys["board"])

    def register(who, label, claims=(), **kw):
        h = content(label)
        ref[label] = h
        kw.setdefault("lineage_id", h)
        kw.setdefault("title", f"{label} study")
        ledger.append(ArtifactRegistration(artifact_hash=h, created_at=t - 5, tau=t, claims=tuple(claims), **kw),
                      keys[who])
        return h

    tick()
    register("erin", "E1", [Claim("sleep", "memory", "positive", "cohort", "rct")], domain_tags=("psychology",))
    register("erin", "E2", [Claim("noise", "focus", "negative", "lab", "survey")], domain_tags=("psychology",))
    register("erin", "E3", [Claim("diet", "mood", "positive", "cohort", "survey")], domain_tags=("nutrition",))
    tick(100)
    a1_claims = [Claim("coffee", "alertness", "positive", "lab", "rct", 0.4),
                 Claim("coffee", "sleep", "negative", "lab", "rct")]
    register("alice", "A1", a1_claims, domain_tags=("pharmacology",), methods=("double blind",),
             protocol_hash=content("A1-protocol"))
    register("alice", "A2", [Claim("tea", "alertness", "zero", "lab", "rct")], domain_tags=("pharmacology",))
    register("bob", "B1", [], domain_tags=("psychology",))

    tick()
    for citer, who in (("A1", "alice"), ("B1", "bob")):
        ledger.append(CitationEvent(ref[citer], ref["E2"], "foundational", 1.0, 1.0, t), keys[who])
    tick(100)
    ledger.append(RetractionEvent(ref["E2"], ("superseded",), True, tick()), keys["erin"])
    ledger.append(RetractionEvent(ref["E3"], ("methodological-flaw",), False, tick()), keys["erin"])

    for delta in (1.0, 1.0, 0.0):
        ledger.append(ReplicationEvent(ref["A1"], "lab-variant", delta, tick()), keys["carol"])

    def comment(who, target, modality, label, claims=()):
        env = ledger.append(CommentaryEvent(target, modality, content(label), tick(), tuple(claims)), keys[who])
        ref[label] = env.event_id
        return env.event_id

    comment("bob", ref["E1"], "endorsement", "bob-endorse-E1")
    comment("carol", ref["E1"], "endorsement", "carol-endorse-E1")
    comment("bob", ref["E1"], "derivation", "bob-derive-E1")
    comment("dave", ref["E1"], "error-flag", "dave-flag-E1")
    ledger.append(ReplicationEvent(ref["E1"], "field-variant", 0.2, tick()), keys["carol"])
    alice_comments = [
        comment("alice", ref["E1"], mod, f"alice-c{i}")
        for i, mod in enumerate(("criticism", "reinterpretation", "criticism", "criticism"), start=1)
    ]
    for i, eid in enumerate(alice_comments[:3], start=1):
        comment("bob", eid, "endorsement", f"bob-meta-c{i}")

    ledger.append(RetractionEvent(ref["A2"], ("data-falsity",), False, tick()), keys["dave"])

    tick(100)
    register("alice", "A1v2", a1_claims, lineage_id=ref["A1"], domain_tags=("pharmacology",),
             methods=("double blind",), protocol_hash=content("A1-protocol-v2"))
    ledger.append(VersionEvent(ref["A1"], ref["A1v2"], "corrigendum", tick(), ref["A1"]), keys["alice"])

    for conf in (0.9, 0.9, 0.3):
        ledger.append(NullResultEvent("H-coffee", "cohort", "rct", 0.01, conf, tick()), keys["carol"])
    ledger.append(TransferUseEvent(ref["A1"], "education", "classroom", "double blind",
                                   Claim("coffee", "exam-score", "positive", "classroom", "rct"), tick()),
                  keys["carol"])
    return ledger, ref
