"""Detection operators over claims and artifact metadata.

The embedder is a hashed bag-of-tokens so every result is reproducible without a
model download; anything implementing :class:`Embedder` can replace it.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from typing import Iterable, Protocol, Sequence

import numpy as np

from .claims import Claim, min_claim_distance
from .errors import ArgumentError

_TOKEN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.casefold())


def _bucket(token: str, d: int) -> tuple[int, float]:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    bucket = int.from_bytes(digest[:8], "big") % d
    sign = 1.0 if digest[8] & 1 else -1.0
    return bucket, sign


def baseline_embed(text: str | Sequence[str], d: int = 64) -> np.ndarray:
    """Signed feature hashing of tokens, L2-normalised; empty input gives the zero vector."""
    if d < 2:
        raise ArgumentError("embedding dimension must be at least 2")
    tokens = tokenize(text) if isinstance(text, str) else [t.casefold() for t in text if t]
    vec = np.zeros(d)
    for tok in tokens:
        b, s = _bucket(tok, d)
        vec[b] += s
    norm = np.linalg.norm(vec)
    # opposite-signed collisions can cancel to zero
    return vec / norm if norm > 0 else vec


class Embedder(Protocol):
    def __call__(self, tokens: Sequence[str], d: int) -> np.ndarray: ...


class Summariser(Protocol):
    """Provider hook for artifact summarisation; no implementation ships."""

    def summarise(self, artifact_text: str) -> str: ...


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ArgumentError(f"dimension mismatch {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


OPPOSED = frozenset({"positive", "negative"})


def contradiction_flag(claims_i: Sequence[Claim], claims_j: Sequence[Claim]) -> tuple[int, list[tuple[Claim, Claim]]]:
    witnesses = [
        (a, b)
        for a in claims_i
        for b in claims_j
        if a.key == b.key and {a.direction, b.direction} == OPPOSED
    ]
    return (1 if witnesses else 0), witnesses


def artifact_tokens(body) -> list[str]:
    tokens = tokenize(body.title)
    for tag in body.domain_tags:
        tokens.extend(tokenize(tag))
    for c in body.claims:
        tokens.extend(tokenize(c.subject))
        tokens.extend(tokenize(c.predicate))
    return tokens


def method_fingerprint(body) -> frozenset[str]:
    toks: set[str] = set()
    for c in body.claims:
        toks.update(tokenize(c.method_class))
    for m in body.methods:
        toks.update(tokenize(m))
    return frozenset(toks)


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def embed_artifact(body, config, embedder: Embedder | None = None) -> np.ndarray:
    return (embedder or baseline_embed)(artifact_tokens(body), config.embedding_dim)


def _registered(state, artifact: str):
    rec = state.artifacts.get(artifact)
    if rec is None:
        raise ArgumentError(f"unknown artifact {artifact}")
    return rec


def overlap_distances(a: str, b: str, state, config, embedder: Embedder | None = None) -> tuple[float, float]:
    ba, bb = _registered(state, a).body, _registered(state, b).body
    d_s = 1.0 - similarity(embed_artifact(ba, config, embedder), embed_artifact(bb, config, embedder))
    d_m = 1.0 - jaccard(method_fingerprint(ba), method_fingerprint(bb))
    return d_s, d_m


def overlap_flag(a: str, b: str, state, config, embedder: Embedder | None = None) -> bool:
    d_s, d_m = overlap_distances(a, b, state, config, embedder)
    return d_s < config.overlap_eps_s and d_m < config.overlap_eps_m


def softmax_entropy(sims: Sequence[float], temperature: float = 1.0) -> float:
    """Normalised Shannon entropy of softmax(sims / T); 1.0 for fewer than two entries."""
    n = len(sims)
    if n < 2:
        return 1.0
    z = np.asarray(sims, dtype=float) / temperature
    z = z - z.max()
    p = np.exp(z)
    p /= p.sum()
    h = -float(np.sum(p * np.log(p)))
    return h / math.log(n)


def novelty_terms(artifact: str, state, config, embedder: Embedder | None = None) -> tuple[float, float, float]:
    """Return (entropy, claim distance, latency) for ``artifact`` against earlier artifacts."""
    rec = _registered(state, artifact)
    priors = sorted((r for r in state.artifacts.values() if r.seq < rec.seq), key=lambda r: r.seq)
    vec = embed_artifact(rec.body, config, embedder)
    sims = [similarity(vec, embed_artifact(p.body, config, embedder)) for p in priors]
    entropy = softmax_entropy(sims, config.softmax_temperature)
    prior_claims = [c for p in priors for c in p.body.claims]
    distance = min_claim_distance(rec.body.claims, prior_claims)
    delay = rec.body.tau - rec.body.created_at
    latency = 1.0 - min(1.0, delay / config.novelty_horizon)
    return entropy, distance, latency


def novelty(artifact: str, state, config, embedder: Embedder | None = None) -> float:
    e, c, lat = novelty_terms(artifact, state, config, embedder)
    return config.novelty_lambda1 * e + config.novelty_lambda2 * c + config.novelty_lambda3 * lat


def _claims_by_key(claims: Sequence[Claim]) -> dict:
    grouped: dict = {}
    for c in claims:
        grouped.setdefault(c.key, Counter())[(c.direction, c.magnitude)] += 1
    return grouped


def changed_claim_keys(prev_claims: Sequence[Claim], next_claims: Sequence[Claim]) -> set:
    """Keys whose claims were removed or had direction/magnitude changed."""
    before, after = _claims_by_key(prev_claims), _claims_by_key(next_claims)
    return {k for k, outcomes in before.items() if after.get(k) != outcomes}


def classify_delta(v_prev, v_next) -> str:
    """Classify the change between two registered versions as minor, major or critical."""
    if v_prev.lineage_id != v_next.lineage_id:
        raise ArgumentError("versions belong to different lineages")
    if changed_claim_keys(v_prev.claims, v_next.claims):
        return "critical"
    methods_prev = (sorted(c.method_class for c in v_prev.claims), sorted(v_prev.methods))
    methods_next = (sorted(c.method_class for c in v_next.claims), sorted(v_next.methods))
    if (v_prev.protocol_hash != v_next.protocol_hash or v_prev.data_hash != v_next.data_hash
            or methods_prev != methods_next):
        return "major"
    return "minor"
