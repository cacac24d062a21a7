"""Governance configuration: every tunable weight and threshold in one hashed file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .canonical import encode_value
from .errors import ConfigError
from .hashing import compute_content_hash

CITATION_MODALITIES = (
    "foundational", "critique", "replication", "methodological-reuse", "extension", "contradiction",
)
COMMENTARY_MODALITIES = (
    "criticism", "endorsement", "reinterpretation", "derivation", "error-flag", "replication-note",
)
TRANSFER_MODALITY = "transfer"


def _default_modality_weights() -> dict[str, float]:
    weights = {m: 1.0 for m in CITATION_MODALITIES + COMMENTARY_MODALITIES}
    weights[TRANSFER_MODALITY] = 1.0
    return weights


@dataclass
class GovernanceConfig:
    config_version: str = "1"
    signature_scheme: str = "ed25519"
    hash_function: str = "sha256"
    # reputation R(a)
    rep_alpha: float = 1.0
    rep_beta: float = 1.0
    rep_gamma: float = 1.0
    # trust delta
    trust_lambda1: float = 1.0
    trust_lambda2: float = 1.0
    trust_lambda3: float = 1.0
    # null-result dampening, must lie in (0, 1)
    damp_lambda: float = 0.5
    # impact weight, impact_beta >= impact_alpha > 0
    impact_alpha: float = 1.0
    impact_beta: float = 2.0
    # redundancy flag thresholds on semantic / method distance
    overlap_eps_s: float = 0.1
    overlap_eps_m: float = 0.5
    novelty_lambda1: float = 1.0
    novelty_lambda2: float = 1.0
    novelty_lambda3: float = 1.0
    novelty_horizon: float = 30 * 86400.0
    softmax_temperature: float = 1.0
    embedding_dim: int = 64
    modality_weights: dict[str, float] = field(default_factory=_default_modality_weights)
    influence_decay: float = 0.5
    influence_tol: float = 1e-9
    influence_max_iter: int = 50
    epoch_length: int = 86400
    congruence_threshold: float = 0.5
    null_confidence_threshold: float = 0.5
    ethics_beta: float = 1.0
    ethics_gamma: float = 0.5
    author_role_weight: float = 1.0
    corrector_role_weight: float = 0.5
    rqi_claims_weight: float = 1 / 3
    rqi_confirmation_weight: float = 1 / 3
    rqi_meta_weight: float = 1 / 3

    def violations(self) -> list[str]:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or isinstance(value, str):
                continue
            if isinstance(value, (int, float)):
                if not math.isfinite(value) or value < 0:
                    out.append(f"{f.name} must be finite and non-negative")
        for name, w in sorted(self.modality_weights.items()):
            if not isinstance(w, (int, float)) or not math.isfinite(w) or w < 0:
                out.append(f"modality weight {name} must be finite and non-negative")
        for m in CITATION_MODALITIES + COMMENTARY_MODALITIES + (TRANSFER_MODALITY,):
            if m not in self.modality_weights:
                out.append(f"missing modality weight {m}")
        if not self.impact_alpha > 0:
            out.append("impact alpha must be positive")
        if self.impact_beta < self.impact_alpha:
            out.append("impact weight ordering")
        if not 0 < self.damp_lambda < 1:
            out.append("dampening lambda must lie in (0, 1)")
        if not 0 < self.influence_decay < 1:
            out.append("influence decay must lie in (0, 1)")
        if self.epoch_length <= 0:
            out.append("epoch length must be positive")
        if self.novelty_horizon <= 0:
            out.append("novelty horizon must be positive")
        if self.softmax_temperature <= 0:
            out.append("softmax temperature must be positive")
        if self.embedding_dim < 2:
            out.append("embedding dimension must be at least 2")
        rqi = self.rqi_claims_weight + self.rqi_confirmation_weight + self.rqi_meta_weight
        if abs(rqi - 1.0) > 1e-9:
            out.append("review quality weights must sum to 1")
        if self.signature_scheme != "ed25519":
            out.append(f"unsupported signature scheme {self.signature_scheme!r}")
        if self.hash_function != "sha256":
            out.append(f"unsupported hash function {self.hash_function!r}")
        return out

    def check(self) -> "GovernanceConfig":
        bad = self.violations()
        if bad:
            raise ConfigError(bad)
        return self

    def modality_weight(self, modality: str) -> float:
        return float(self.modality_weights.get(modality, 0.0))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["modality_weights"] = dict(sorted(self.modality_weights.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GovernanceConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"unknown config key {k}" for k in unknown])
        kwargs = dict(d)
        if "modality_weights" in kwargs:
            merged = _default_modality_weights()
            merged.update(kwargs["modality_weights"])
            kwargs["modality_weights"] = merged
        return cls(**kwargs)

    def canonical_bytes(self) -> bytes:
        return encode_value(self.to_dict())

    @property
    def config_hash(self) -> str:
        return compute_content_hash(self.canonical_bytes())


def load_config(path: Path | str) -> GovernanceConfig:
    """Parse and invariant-check a JSON config file; raises ConfigError on violations."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return GovernanceConfig.from_dict(data).check()


def save_config(config: GovernanceConfig, path: Path | str) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
