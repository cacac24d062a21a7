"""Seeded agent simulation of malicious reviewing under anonymous and identity-linked regimes."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import GovernanceConfig
from .errors import ArgumentError
from .scoring import trust_update


def epistemic_loss(n: int, p_m: float, q: float) -> float:
    """Expected degradation from ``n`` reviewers each malicious with probability ``p_m``."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ArgumentError("n must be a non-negative integer")
    if not 0.0 <= p_m <= 1.0:
        raise ArgumentError("p_m must lie in [0, 1]")
    if not (q >= 0 and math.isfinite(q)):
        raise ArgumentError("q must be finite and non-negative")
    return n * p_m * q


@dataclass(frozen=True)
class ScenarioConfig:
    n_agents: int = 100
    troll_fraction: float = 0.2
    p_m0: float = 0.3
    q: float = 1.0
    eta: float = 0.5
    epochs: int = 100
    seed: int = 0
    identity_penalties: bool = True
    # chance an honest review attracts a visible endorsement when identity is on
    endorse_prob: float = 0.5

    def __post_init__(self):
        problems = []
        if not isinstance(self.n_agents, int) or self.n_agents < 1:
            problems.append("n_agents must be a positive integer")
        if not 0.0 <= self.troll_fraction <= 1.0:
            problems.append("troll_fraction must lie in [0, 1]")
        if not 0.0 <= self.p_m0 <= 1.0:
            problems.append("p_m0 must lie in [0, 1]")
        if not (self.q >= 0 and math.isfinite(self.q)):
            problems.append("q must be finite and non-negative")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            problems.append("eta must be finite and non-negative")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            problems.append("epochs must be at least 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.endorse_prob <= 1.0:
            problems.append("endorse_prob must lie in [0, 1]")
        if problems:
            raise ArgumentError("; ".join(problems))

    @property
    def n_trolls(self) -> int:
        return int(math.floor(self.troll_fraction * self.n_agents + 0.5))

    @classmethod
    def from_json(cls, path: Path | str) -> "ScenarioConfig":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class SimMetrics:
    loss: list[float] = field(default_factory=list)
    p_m: list[float] = field(default_factory=list)
    rep_honest: list[float] = field(default_factory=list)
    rep_troll: list[float] = field(default_factory=list)
    malicious: list[int] = field(default_factory=list)

    def rows(self):
        for t in range(len(self.loss)):
            yield t, self.loss[t], self.p_m[t], self.rep_honest[t], self.rep_troll[t]

    def to_csv(self, path: Path | str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss", "p_m", "rep_honest", "rep_troll"])
            for t, loss, p, rh, rt in self.rows():
                w.writerow([t, repr(loss), repr(p), repr(rh), repr(rt)])

    def to_dict(self) -> dict:
        return asdict(self)


def _mean(x: np.ndarray) -> float:
    return math.fsum(x) / x.size if x.size else 0.0


def run_scenario(scn: ScenarioConfig, config: GovernanceConfig | None = None) -> SimMetrics:
    """Simulate ``scn.epochs`` epochs; identical seeds give identical metrics.

    Each epoch a troll reviews maliciously with its current probability. Under
    identity linkage every malicious review is attributable, so it is flagged and
    the troll pays ``trust_lambda2`` per flag, and its probability decays by
    ``exp(-eta * penalty)``. Anonymous reviews are never flagged.
    """
    config = config or GovernanceConfig()
    rng = np.random.Generator(np.random.Philox(scn.seed))
    n_trolls = scn.n_trolls
    n_honest = scn.n_agents - n_trolls
    visibility = 1.0 if scn.identity_penalties else 0.0
    p = np.full(n_trolls, float(scn.p_m0))
    trust_troll = np.zeros(n_trolls)
    trust_honest = np.zeros(n_honest)
    m = SimMetrics()
    for _ in range(scn.epochs):
        m.p_m.append(_mean(p))
        malicious = rng.random(n_trolls) < p
        flag_draw = rng.random(n_trolls)
        endorse_draw = rng.random(n_honest)
        count = int(malicious.sum())
        m.malicious.append(count)
        m.loss.append(epistemic_loss(scn.n_agents, count / scn.n_agents, scn.q))
        flagged = (malicious & (flag_draw < visibility)).astype(float)
        endorsed = (endorse_draw < scn.endorse_prob * visibility).astype(float)
        trust_troll = trust_update(trust_troll, 0.0, flagged, 0.0, config)
        trust_honest = trust_update(trust_honest, endorsed, 0.0, 0.0, config)
        if scn.identity_penalties:
            penalty = config.trust_lambda2 * flagged
            p = p * np.exp(-scn.eta * penalty)
        m.rep_honest.append(_mean(trust_honest))
        m.rep_troll.append(_mean(trust_troll))
    return m


def paired_sweep(base: ScenarioConfig, seeds, config: GovernanceConfig | None = None):
    """Run each seed under both regimes; yields (seed, identity metrics, anonymous metrics)."""
    from dataclasses import replace

    for seed in seeds:
        on = run_scenario(replace(base, seed=seed, identity_penalties=True), config)
        off = run_scenario(replace(base, seed=seed, identity_penalties=False), config)
        yield seed, on, off
