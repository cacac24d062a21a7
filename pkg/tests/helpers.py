"""Independent oracles and random ledger builders shared by the tests."""

from __future__ import annotations

import random
import struct

import numpy as np

from scholedger import identity as ident
from scholedger.claims import Claim
from scholedger.config import GovernanceConfig
from scholedger.events import (
    ArtifactRegistration, CitationEvent, CommentaryEvent, IdentityRegistration, NullResultEvent,
    ReplicationEvent, TransferUseEvent,
)
from scholedger.hashing import compute_content_hash
from scholedger.ledger import Ledger

# --- pure-python SHA-256 (FIPS 180-4), used only as an oracle ---------------

_K = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
]
_H0 = [0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19]


def _rotr(x, n):
    return ((x >> n) | (x << (32 - n))) & 0xFFFFFFFF


def sha256_oracle(data: bytes) -> str:
    msg = bytes(data) + b"\x80"
    msg += b"\x00" * ((56 - len(msg) % 64) % 64)
    msg += struct.pack(">Q", len(data) * 8)
    h = list(_H0)
    for off in range(0, len(msg), 64):
        w = list(struct.unpack(">16I", msg[off:off + 64]))
        for i in range(16, 64):
            s0 = _rotr(w[i - 15], 7) ^ _rotr(w[i - 15], 18) ^ (w[i - 15] >> 3)
            s1 = _rotr(w[i - 2], 17) ^ _rotr(w[i - 2], 19) ^ (w[i - 2] >> 10)
            w.append((w[i - 16] + s0 + w[i - 7] + s1) & 0xFFFFFFFF)
        a, b, c, d, e, f, g, hh = h
        for i in range(64):
            t1 = (hh + (_rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)) + ((e & f) ^ (~e & g)) + _K[i] + w[i]) & 0xFFFFFFFF
            t2 = ((_rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)) + ((a & b) ^ (a & c) ^ (b & c))) & 0xFFFFFFFF
            a, b, c, d, e, f, g, hh = (t1 + t2) & 0xFFFFFFFF, a, b, c, (d + t1) & 0xFFFFFFFF, e, f, g
        h = [(x + y) & 0xFFFFFFFF for x, y in zip(h, [a, b, c, d, e, f, g, hh])]
    return "".join(f"{x:08x}" for x in h)


def merkle_root_oracle(leaves: list[str]) -> str:
    """Recursive restatement of the tree rule: pad odd levels, hash 0x02||L||R."""
    if len(leaves) == 1:
        return leaves[0]
    if len(leaves) % 2:
        leaves = leaves + [leaves[-1]]
    parents = [sha256_oracle(b"\x02" + bytes.fromhex(leaves[i]) + bytes.fromhex(leaves[i + 1]))
               for i in range(0, len(leaves), 2)]
    return merkle_root_oracle(parents)


def transitive_closure(adj: np.ndarray) -> np.ndarray:
    """Warshall closure of a boolean adjacency matrix (reach[i, j]: path i -> j of length >= 1)."""
    reach = adj.astype(bool).copy()
    n = len(reach)
    for k in range(n):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def influence_oracle(nodes, edges, config: GovernanceConfig) -> dict:
    """Scalar fixed-point loop over (citing, cited, modality, polarity, depth) tuples."""
    score = {n: 0.0 for n in nodes}
    for _ in range(config.influence_max_iter):
        top = max(score.values()) if score else 0.0
        new = {n: 0.0 for n in nodes}
        for citing, cited, modality, pol, depth in edges:
            norm = score[citing] / top if top > 0 else 0.0
            w = config.modality_weights[modality] * (1 + pol) / 2 * depth
            new[cited] += w * (1 + config.influence_decay * norm)
        change = max(abs(new[n] - score[n]) for n in nodes)
        score = new
        if change < config.influence_tol:
            break
    return score


# --- ledger builders ---------------------------------------------------------

def seeded_key(label: str) -> bytes:
    return compute_content_hash(f"test-key:{label}".encode()).encode()[:32]


def new_identity(ledger: Ledger, label: str, tau: int = 0) -> tuple[bytes, str]:
    secret = seeded_key(label)
    pub = ident.public_key_of(secret)
    ledger.append(IdentityRegistration(pub.hex(), "ed25519", tau), secret)
    return secret, ident.key_id_of(pub)


def artifact_body(label: str, tau: int, claims=(), **kw) -> ArtifactRegistration:
    h = compute_content_hash(label.encode())
    kw.setdefault("lineage_id", h)
    kw.setdefault("title", label)
    return ArtifactRegistration(artifact_hash=h, created_at=kw.pop("created_at", tau), tau=tau,
                                claims=tuple(claims), **kw)


SUBJECTS = ("x", "y")
PREDICATES = ("p", "q")
DIRECTIONS = ("positive", "negative", "zero")
DATASETS = ("d1", "d2")


def random_claim(rng: random.Random) -> Claim:
    return Claim(rng.choice(SUBJECTS), rng.choice(PREDICATES), rng.choice(DIRECTIONS), rng.choice(DATASETS),
                 rng.choice(("m1", "m2")))


def random_ledger(n_events: int, seed: int, config: GovernanceConfig | None = None) -> Ledger:
    """A valid ledger of exactly ``n_events`` mixed events."""
    rng = random.Random(seed)
    ledger = Ledger(config)
    keys = []
    tau = 1_000
    for i in range(min(4, n_events)):
        keys.append(new_identity(ledger, f"rand-{seed}-{i}", tau))
    artifacts: list[tuple[str, bytes]] = []
    comments: list[str] = []
    while len(ledger) < n_events:
        tau += rng.randint(0, 50)
        secret, _ = rng.choice(keys)
        roll = rng.random()
        if roll < 0.25 or len(artifacts) < 2:
            body = artifact_body(f"art-{seed}-{len(ledger)}", tau, [random_claim(rng)],
                                 domain_tags=(rng.choice(("bio", "law", "cs")),))
            ledger.append(body, secret)
            artifacts.append((body.artifact_hash, secret))
        elif roll < 0.45:
            (citing, owner), (cited, _) = rng.sample(artifacts, 2)
            if ledger.state.artifacts[citing].seq < ledger.state.artifacts[cited].seq:
                citing, cited = cited, citing
                owner = next(s for h, s in artifacts if h == citing)
            ledger.append(CitationEvent(citing, cited, rng.choice(("foundational", "extension", "critique")),
                                        rng.uniform(-1, 1), rng.random(), tau), owner)
        elif roll < 0.7:
            target = rng.choice(comments) if comments and rng.random() < 0.3 else rng.choice(artifacts)[0]
            env = ledger.append(CommentaryEvent(target, rng.choice(("criticism", "endorsement", "error-flag")),
                                                compute_content_hash(str(rng.random()).encode()), tau), secret)
            comments.append(env.event_id)
        elif roll < 0.85:
            ledger.append(ReplicationEvent(rng.choice(artifacts)[0], "v", rng.random(), tau), secret)
        elif roll < 0.95:
            ledger.append(NullResultEvent(f"H{rng.randint(0, 3)}", "d", "m", 0.0, rng.random(), tau), secret)
        else:
            ledger.append(TransferUseEvent(rng.choice(artifacts)[0], "edu", "d", "p", random_claim(rng), tau), secret)
    return ledger


# --- scripted CLI pipeline ---------------------------------------------------

def cli_pipeline(root) -> dict:
    """init→keygen→register→comment→cite→version→retract→null→replicate→verify→score→export.

    Returns the bytes of every file written, keyed by path relative to ``root``.
    """
    from pathlib import Path

    from scholedger.cli import run_command

    root = Path(root)
    d = ["--dir", str(root)]

    def run(*argv):
        res = run_command(list(argv) + d)
        assert res.exit_code == 0, (argv, res.stdout, res.stderr)
        return res

    run("init")
    alice = run("keygen", "--name", "alice", "--seed", "11" * 32, "--at", "1000").json()["key_id"]
    run("keygen", "--name", "bob", "--seed", "22" * 32, "--at", "1000")
    a = run("register", "--key", "alice", "--content-text", "sleep and memory", "--title", "Sleep and memory",
            "--tag", "psychology", "--claim", "sleep:memory:positive:cohort:rct:0.3", "--method", "rct",
            "--at", "1100", "--created-at", "1050").json()["artifact_hash"]
    b = run("register", "--key", "bob", "--content-text", "sleep follow-up", "--title", "Sleep follow-up",
            "--claim", "sleep:memory:negative:cohort:rct", "--at", "1200").json()["artifact_hash"]
    c = run("comment", "--key", "bob", "--target", a, "--modality", "criticism", "--text", "sample too small",
            "--at", "1300").json()["event_id"]
    run("comment", "--key", "alice", "--target", c, "--modality", "endorsement", "--text", "fair", "--at", "1310")
    run("cite", "--key", "bob", "--citing", b, "--cited", a, "--modality", "critique", "--polarity", "-0.5",
        "--depth", "0.8", "--at", "1400")
    v1 = run("register", "--key", "alice", "--content-text", "sleep and memory v2", "--title", "Sleep and memory",
             "--lineage", a, "--claim", "sleep:memory:positive:cohort:rct:0.2", "--method", "rct",
             "--at", "1500").json()["artifact_hash"]
    run("version", "--key", "alice", "--lineage", a, "--version-hash", v1, "--parent", a,
        "--modification", "reanalysis", "--at", "1500")
    run("retract", "--key", "alice", "--target", v1, "--reason", "methodological-flaw", "--voluntary", "--at", "1600")
    run("null", "--key", "bob", "--hypothesis", "H-sleep", "--dataset", "cohort", "--method", "rct",
        "--effect-size", "0.01", "--confidence", "0.9", "--at", "1700")
    run("replicate", "--key", "bob", "--target", a, "--dataset-variant", "cohort-2", "--congruence", "0.75",
        "--at", "1800")
    run("verify")
    run("score", "--identity", alice, "--out", str(root / "out" / "alice.json"), "--at", "2000")
    run("score", "--artifact", a, "--out", str(root / "out" / "a.json"), "--at", "2000")
    run("export", "--kind", "scores", "--out", str(root / "out" / "scores.json"), "--at", "2000")
    run("export", "--kind", "graph", "--out", str(root / "out" / "graph.tsv"))
    run("export", "--kind", "trace", "--target", a, "--out", str(root / "out" / "trace.json"))
    files = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != ".lock":
            files[str(p.relative_to(root))] = p.read_bytes()
    return files
