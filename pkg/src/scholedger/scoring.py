"""Closed-form scores over a ledger state, parameterised by :class:`GovernanceConfig`.

All functions are pure in (state, config); nothing is cached between calls.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .analysis import changed_claim_keys, novelty
from .claims import min_claim_distance
from .config import GovernanceConfig
from .errors import ArgumentError, ConfigError, DegenerateWeightsError, NoReplicationsError
from .graphs import REUSE_CITATION_MODALITIES, citation_graph, reuse_set

INTERPRETIVE_MODALITIES = frozenset({"reinterpretation", "derivation"})
CORRECTION_MODIFICATIONS = frozenset({"corrigendum", "addendum", "reanalysis"})
CHALLENGE_MODALITIES = frozenset({"error-flag", "criticism"})


def _need_identity(identity: str, state) -> None:
    if identity not in state.identities:
        raise ArgumentError(f"unknown identity {identity}")


def _need_artifact(artifact: str, state) -> None:
    if artifact not in state.artifacts:
        raise ArgumentError(f"unknown artifact {artifact}")


def _authored(identity: str, state) -> list:
    return sorted((r for r in state.artifacts.values() if r.signer == identity), key=lambda r: r.seq)


def _owned_targets(identity: str, state) -> set[str]:
    """Artifacts and commentaries signed by ``identity``."""
    owned = {h for h, r in state.artifacts.items() if r.signer == identity}
    owned.update(eid for eid, r in state.commentaries.items() if r.signer == identity)
    return owned


def _endorsement_metas(event_id: str, state) -> list:
    return [r for r in state.commentaries.values()
            if r.body.target == event_id and r.body.modality == "endorsement"]


# ---------------------------------------------------------------------------
# reputation and trust

def reputation_counts(identity: str, state, config: GovernanceConfig) -> tuple[int, int, int]:
    """(validated claims, endorsed reviews, involuntary retractions) for ``identity``."""
    _need_identity(identity, state)
    replicated = {r.body.target for r in state.replications
                  if r.body.congruence >= config.congruence_threshold}
    authored = _authored(identity, state)
    validated = sum(len(r.body.claims) for r in authored if r.body.artifact_hash in replicated)
    endorsed = sum(1 for eid, r in state.commentaries.items()
                   if r.signer == identity and _endorsement_metas(eid, state))
    retracted = sum(1 for target, r in state.retractions.items()
                    if state.author_of(target) == identity and not r.body.voluntary)
    return validated, endorsed, retracted


def reputation(identity: str, state, config: GovernanceConfig) -> float:
    v, e, rc = reputation_counts(identity, state, config)
    return config.rep_alpha * v + config.rep_beta * e + config.rep_gamma / (1 + rc)


def _require_counts(*counts) -> None:
    for c in counts:
        if np.any(np.asarray(c) < 0):
            raise ArgumentError("counts must be non-negative")


def trust_update(t_prev, endorsements, flagged_errors, replication_support, config: GovernanceConfig):
    """One epoch of the affine trust delta; works elementwise on numpy arrays."""
    _require_counts(endorsements, flagged_errors, replication_support)
    return (t_prev + config.trust_lambda1 * endorsements
            - config.trust_lambda2 * flagged_errors
            + config.trust_lambda3 * replication_support)


def trust_signals(identity: str, state, config: GovernanceConfig) -> list[tuple[int, str]]:
    """(tau, kind) of every endorsement, error flag and supporting replication aimed at ``identity``."""
    owned = _owned_targets(identity, state)
    out = []
    for r in state.commentaries.values():
        if r.body.target in owned and r.signer != identity:
            if r.body.modality == "endorsement":
                out.append((r.tau, "endorsement"))
            elif r.body.modality == "error-flag":
                out.append((r.tau, "error"))
    for r in state.replications:
        if r.body.target in owned and r.signer != identity and r.body.congruence >= config.congruence_threshold:
            out.append((r.tau, "replication"))
    return out


def identity_trust(identity: str, t: int, state, config: GovernanceConfig, start: float = 0.0) -> float:
    """Fold ``trust_update`` over every epoch up to and including the one holding ``t``."""
    _need_identity(identity, state)
    per_epoch: dict[int, list[int]] = defaultdict(lambda: [0, 0, 0])
    slot = {"endorsement": 0, "error": 1, "replication": 2}
    for tau, kind in trust_signals(identity, state, config):
        if tau <= t:
            per_epoch[tau // config.epoch_length][slot[kind]] += 1
    trust = start
    for epoch in sorted(per_epoch):
        trust = trust_update(trust, *per_epoch[epoch], config)
    return float(trust)


def clamp_trust(t: float) -> float:
    return t / (1.0 + t) if t >= 0 else 0.0


# ---------------------------------------------------------------------------
# influence

def edge_base_weight(edge, config: GovernanceConfig) -> float:
    return config.modality_weight(edge.modality) * (1.0 + edge.polarity) / 2.0 * edge.integration_depth


def influence_scores(state, config: GovernanceConfig, at: int | None = None) -> dict[str, float]:
    """Fixed point of incoming edge weight boosted by each citer's normalised influence."""
    graph = citation_graph(state, at)
    nodes = sorted(graph.nodes)
    if not graph.edges:
        return {n: 0.0 for n in nodes}
    index = {n: i for i, n in enumerate(nodes)}
    src = np.array([index[e.citing] for e in graph.edges])
    dst = np.array([index[e.cited] for e in graph.edges])
    base = np.array([edge_base_weight(e, config) for e in graph.edges])
    scores = np.zeros(len(nodes))
    for _ in range(config.influence_max_iter):
        top = scores.max()
        norm = scores / top if top > 0 else np.zeros_like(scores)
        new = np.bincount(dst, weights=base * (1.0 + config.influence_decay * norm[src]), minlength=len(nodes))
        change = np.abs(new - scores).max()
        scores = new
        if change < config.influence_tol:
            break
    return {n: float(scores[index[n]]) for n in nodes}


def influence(artifact: str, state, config: GovernanceConfig, at: int | None = None) -> float:
    _need_artifact(artifact, state)
    return influence_scores(state, config, at).get(artifact, 0.0)


def influence_gradient(artifact: str, t: int, state, config: GovernanceConfig) -> float:
    """Change in influence over the epoch ending at ``t``."""
    return influence(artifact, state, config, at=t) - influence(artifact, state, config, at=t - config.epoch_length)


# ---------------------------------------------------------------------------
# replication, nulls, corrections

def replication_trust(artifact: str, state) -> float:
    _need_artifact(artifact, state)
    deltas = [r.body.congruence for r in state.replications if r.body.target == artifact]
    if not deltas:
        raise NoReplicationsError(f"no replications of {artifact}")
    return sum(deltas) / len(deltas)


def null_count(hypothesis_id: str, state, config: GovernanceConfig) -> int:
    return sum(1 for r in state.nulls
               if r.body.hypothesis_id == hypothesis_id and r.body.confidence >= config.null_confidence_threshold)


def null_dampening(prior: float, hypothesis_id: str, state, config: GovernanceConfig) -> float:
    if not 0.0 < prior <= 1.0:
        raise ArgumentError("prior must lie in (0, 1]")
    if not 0.0 < config.damp_lambda < 1.0:
        raise ConfigError("dampening lambda must lie in (0, 1)")
    return prior * config.damp_lambda ** null_count(hypothesis_id, state, config)


def _challenged_before(version_hash: str, seq: int, state) -> bool:
    return any(r.body.target == version_hash and r.body.modality in CHALLENGE_MODALITIES and r.seq < seq
               for r in state.commentaries.values())


def correction_scores(identity: str, state, config: GovernanceConfig) -> tuple[float, float]:
    """(rectification score, ethics score) for ``identity``.

    Voluntary retractions of one's own work count as proactive and add the
    retracted artifact's influence at retraction time to the rectification score.
    Self-signed involuntary retractions count as responsive. Self-signed
    corrections of one's own work are responsive when the corrected version had
    been flagged or criticised beforehand, proactive otherwise.
    """
    _need_identity(identity, state)
    s_rect = 0.0
    s_ethics = 0.0
    for target, r in sorted(state.retractions.items(), key=lambda kv: kv[1].seq):
        if state.author_of(target) != identity or r.signer != identity:
            continue
        if r.body.voluntary:
            s_rect += influence(target, state, config, at=r.tau)
            s_ethics += config.ethics_beta
        else:
            s_ethics += config.ethics_gamma
    for r in state.version_events:
        b = r.body
        if r.signer != identity or b.modification not in CORRECTION_MODIFICATIONS:
            continue
        if state.author_of(b.parent_version) != identity:
            continue
        s_ethics += config.ethics_gamma if _challenged_before(b.parent_version, r.seq, state) else config.ethics_beta
    return s_rect, s_ethics


def epistemic_influence(identity: str, t: int, state, config: GovernanceConfig) -> float:
    """Role-weighted influence of artifacts ``identity`` authored or formally corrected by ``t``."""
    _need_identity(identity, state)
    roles: dict[str, float] = {}
    for h, r in state.artifacts.items():
        if r.signer == identity and r.tau <= t:
            roles[h] = config.author_role_weight
    for r in state.version_events:
        parent = r.body.parent_version
        if r.signer == identity and r.tau <= t and parent is not None:
            roles[parent] = max(roles.get(parent, 0.0), config.corrector_role_weight)
    if not roles:
        return 0.0
    scores = influence_scores(state, config, at=t)
    return sum(w * scores.get(h, 0.0) for h, w in sorted(roles.items()))


# ---------------------------------------------------------------------------
# impact, valuation, use

def impact_weight(c_pos: int, c_null: int, config: GovernanceConfig) -> float:
    if not config.impact_alpha > 0 or config.impact_beta < config.impact_alpha:
        raise ConfigError("impact weight ordering")
    _require_counts(c_pos, c_null)
    return config.impact_alpha * c_pos + config.impact_beta * c_null


def citation_polarity_counts(artifact: str, state) -> tuple[int, int]:
    """(affirmative, non-affirmative) incoming citations; polarity > 0 counts as affirmative."""
    pos = neg = 0
    for r in state.citations:
        if r.body.cited == artifact:
            if r.body.polarity > 0:
                pos += 1
            else:
                neg += 1
    return pos, neg


@dataclass(frozen=True)
class ReviewAgentProfile:
    agent: str
    credential_weight: float
    ontology_tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.credential_weight < 0:
            raise ArgumentError("credential weight must be non-negative")


def agent_valuation(scores: Mapping[str, Mapping[str, float]],
                    profiles: Sequence[ReviewAgentProfile]) -> dict[str, float]:
    """Credential-weighted mean of each evaluative dimension across agents."""
    kappa = {p.agent: float(p.credential_weight) for p in profiles}
    total: dict[str, float] = defaultdict(float)
    weight: dict[str, float] = defaultdict(float)
    for agent, dims in scores.items():
        if agent not in kappa:
            raise ArgumentError(f"no profile for agent {agent}")
        for dim, value in dims.items():
            if not 0.0 <= value <= 1.0:
                raise ArgumentError(f"score {value} for {agent}/{dim} outside [0, 1]")
            total[dim] += kappa[agent] * value
            weight[dim] += kappa[agent]
    if not weight or any(w <= 0 for w in weight.values()):
        raise DegenerateWeightsError("credential weights sum to zero")
    return {dim: total[dim] / weight[dim] for dim in sorted(total)}


def use_signal(artifact: str, t: int, state, config: GovernanceConfig) -> tuple[float, float]:
    """(use signal, interpretive impact) from reuse, transfer and interpretation events up to ``t``."""
    _need_artifact(artifact, state)
    claims = state.artifacts[artifact].body.claims
    terms = []  # (modality weight, signer, claim distance)
    for r in state.citations:
        if r.body.cited == artifact and r.body.modality in REUSE_CITATION_MODALITIES and r.tau <= t:
            terms.append((config.modality_weight(r.body.modality), r.signer, 1.0))
    for r in state.transfers:
        if r.body.source == artifact and r.tau <= t:
            terms.append((config.modality_weight("transfer"), r.signer,
                          min_claim_distance([r.body.resulting_claim], claims)))
    for r in state.commentaries.values():
        if r.body.target == artifact and r.body.modality in INTERPRETIVE_MODALITIES and r.tau <= t:
            s = min_claim_distance(r.body.claims, claims) if r.body.claims else 1.0
            terms.append((config.modality_weight(r.body.modality), r.signer, s))
    trust: dict[str, float] = {}
    s_a = i_interp = 0.0
    for m, signer, s in terms:
        if signer not in trust:
            trust[signer] = clamp_trust(identity_trust(signer, t, state, config))
        w = m * trust[signer]
        s_a += w
        i_interp += w * s
    return s_a, i_interp


def commentary_vector(artifact: str, state, congruence_threshold: float = 0.5) -> tuple[int, int, int, int]:
    """(endorsements, extensions/derivations, confirmed replications, error flags) aimed at ``artifact``."""
    _need_artifact(artifact, state)
    v = x = e = 0
    for r in state.commentaries.values():
        if r.body.target != artifact:
            continue
        if r.body.modality == "endorsement":
            v += 1
        elif r.body.modality == "derivation":
            x += 1
        elif r.body.modality == "error-flag":
            e += 1
    x += sum(1 for r in state.citations if r.body.cited == artifact and r.body.modality == "extension")
    rep = sum(1 for r in state.replications
              if r.body.target == artifact and r.body.congruence >= congruence_threshold)
    return v, x, rep, e


def _descendants(version_hash: str, state) -> list:
    out, frontier = [], [version_hash]
    while frontier:
        parent = frontier.pop()
        for node in state.versions.values():
            if node.parent == parent:
                out.append(node)
                frontier.append(node.version_hash)
    return out


def review_confirmation(event_id: str, state) -> float:
    """Share of a review's error flags later borne out by retraction or a critical delta."""
    rec = state.commentaries[event_id]
    body = rec.body
    if body.modality != "error-flag":
        return 1.0
    target = body.target
    retraction = state.retractions.get(target)
    retracted = retraction is not None and retraction.seq > rec.seq
    changed: set = set()
    any_critical = False
    if target in state.versions:
        for node in _descendants(target, state):
            if node.delta_class == "critical" and node.seq > rec.seq:
                any_critical = True
                changed |= changed_claim_keys(state.artifacts[node.parent].body.claims,
                                              state.artifacts[node.version_hash].body.claims)
    if not body.claims:
        return 1.0 if (retracted or any_critical) else 0.0
    hits = sum(1 for c in body.claims if retracted or c.key in changed)
    return hits / len(body.claims)


def review_quality(event_id: str, state, config: GovernanceConfig) -> float:
    if event_id not in state.commentaries:
        raise ArgumentError(f"{event_id} is not a commentary event")
    body = state.commentaries[event_id].body
    claims_term = min(1.0, len(body.claims) / 5)
    meta_term = min(1.0, len(_endorsement_metas(event_id, state)) / 3)
    return (config.rqi_claims_weight * claims_term
            + config.rqi_confirmation_weight * review_confirmation(event_id, state)
            + config.rqi_meta_weight * meta_term)


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class ScoreReport:
    subject: str
    kind: str
    scores: dict[str, float] = field(default_factory=dict)
    computed_at: int = 0
    config_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "computed_at": self.computed_at,
            "config_hash": self.config_hash,
            "kind": self.kind,
            "scores": dict(sorted(self.scores.items())),
            "subject": self.subject,
        }


def identity_report(identity: str, t: int, state, config: GovernanceConfig) -> ScoreReport:
    v, e, rc = reputation_counts(identity, state, config)
    s_rect, s_ethics = correction_scores(identity, state, config)
    scores = {
        "reputation": reputation(identity, state, config),
        "validated_claims": float(v),
        "endorsed_reviews": float(e),
        "involuntary_retractions": float(rc),
        "trust": identity_trust(identity, t, state, config),
        "rectification": s_rect,
        "ethics": s_ethics,
        "epistemic_influence": epistemic_influence(identity, t, state, config),
    }
    return ScoreReport(identity, "identity", scores, t, config.config_hash)


def artifact_report(artifact: str, t: int, state, config: GovernanceConfig) -> ScoreReport:
    _need_artifact(artifact, state)
    s_a, i_interp = use_signal(artifact, t, state, config)
    v, x, r, e = commentary_vector(artifact, state, config.congruence_threshold)
    pos, neg = citation_polarity_counts(artifact, state)
    scores = {
        "influence": influence(artifact, state, config, at=t),
        "influence_gradient": influence_gradient(artifact, t, state, config),
        "use_signal": s_a,
        "interpretive_impact": i_interp,
        "novelty": novelty(artifact, state, config),
        "impact_weight": impact_weight(pos, neg, config),
        "reuse_count": float(len(reuse_set(artifact, t, state))),
        "endorsements": float(v),
        "extensions": float(x),
        "replications": float(r),
        "error_flags": float(e),
    }
    try:
        scores["replication_trust"] = replication_trust(artifact, state)
    except NoReplicationsError:
        pass
    return ScoreReport(artifact, "artifact", scores, t, config.config_hash)
