"""Citation graph, version DAGs, commentary traces and reuse curves derived from ledger state."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .errors import ArgumentError, NoLiveVersionError

REUSE_CITATION_MODALITIES = frozenset({"methodological-reuse", "extension", "replication"})

DIRECT = "direct"
TRANSITIVE = "transitive"
POST_RETRACTION = "post-retraction-citation"


@dataclass(frozen=True)
class CitationEdge:
    citing: str
    cited: str
    modality: str
    polarity: float
    integration_depth: float
    tau: int
    event_id: str = ""


@dataclass
class CitationGraph:
    nodes: set[str] = field(default_factory=set)
    edges: list[CitationEdge] = field(default_factory=list)

    def add_edge(self, edge: CitationEdge) -> None:
        self.nodes.update((edge.citing, edge.cited))
        self.edges.append(edge)

    def citers(self) -> dict[str, list[CitationEdge]]:
        """Incoming edges keyed by cited node."""
        out: dict[str, list[CitationEdge]] = defaultdict(list)
        for e in self.edges:
            out[e.cited].append(e)
        return out


def citation_graph(state, at: int | None = None) -> CitationGraph:
    g = CitationGraph(nodes={h for h, r in state.artifacts.items() if at is None or r.tau <= at})
    for rec in state.citations:
        if at is not None and rec.tau > at:
            continue
        b = rec.body
        g.add_edge(CitationEdge(b.citing, b.cited, b.modality, b.polarity, b.integration_depth, b.tau, rec.event_id))
    return g


def retraction_affected_set(graph: CitationGraph, retracted: str, t_r: int) -> dict[str, frozenset[str]]:
    """Every artifact that depends on ``retracted`` through citations, with its flags.

    Direct citers are flagged ``direct`` (plus ``post-retraction-citation`` when the
    citation is stamped after ``t_r``); everything further upstream is ``transitive``.
    """
    if retracted not in graph.nodes:
        raise ArgumentError(f"unknown artifact {retracted}")
    incoming = graph.citers()
    flags: dict[str, set[str]] = {}
    for e in incoming.get(retracted, ()):
        f = flags.setdefault(e.citing, {DIRECT})
        if e.tau > t_r:
            f.add(POST_RETRACTION)
    seen = set(flags) | {retracted}
    queue = deque(sorted(flags))
    while queue:
        node = queue.popleft()
        for e in incoming.get(node, ()):
            if e.citing not in seen:
                seen.add(e.citing)
                flags[e.citing] = {TRANSITIVE}
                queue.append(e.citing)
    return {k: frozenset(v) for k, v in flags.items()}


def live_version(lineage_id: str, t: int, state) -> str:
    """Latest version stamped at or before ``t`` that is not retracted by ``t``."""
    best = None
    for node in state.versions.values():
        if node.lineage_id != lineage_id or node.tau > t:
            continue
        retraction = state.retractions.get(node.version_hash)
        if retraction is not None and retraction.tau <= t:
            continue
        if best is None or (node.tau, node.seq) > (best.tau, best.seq):
            best = node
    if best is None:
        if not any(n.lineage_id == lineage_id for n in state.versions.values()):
            raise ArgumentError(f"unknown lineage {lineage_id}")
        raise NoLiveVersionError(f"no live version of {lineage_id} at t={t}")
    return best.version_hash


def fork_branches(lineage_id: str, state) -> list[list[str]]:
    """All root-to-leaf version paths; retracted versions stay listed."""
    nodes = [n for n in state.versions.values() if n.lineage_id == lineage_id]
    if not nodes:
        raise ArgumentError(f"unknown lineage {lineage_id}")
    children: dict[str, list] = defaultdict(list)
    roots = []
    for n in nodes:
        if n.parent is None:
            roots.append(n)
        else:
            children[n.parent].append(n)
    order = lambda n: (n.tau, n.seq)  # noqa: E731
    paths: list[list[str]] = []

    def walk(node, prefix):
        path = prefix + [node.version_hash]
        kids = sorted(children.get(node.version_hash, ()), key=order)
        if not kids:
            paths.append(path)
        for kid in kids:
            walk(kid, path)

    for root in sorted(roots, key=order):
        walk(root, [])
    return paths


@dataclass(frozen=True)
class TraceEntry:
    event_id: str
    tau: int
    signer: str
    modality: str
    meta_depth: int
    target: str


def commentary_trace(target: str, state) -> list[TraceEntry]:
    """Commentary on ``target`` and, recursively, commentary on that commentary."""
    if not state.target_exists(target):
        raise ArgumentError(f"unknown target {target}")
    by_target: dict[str, list] = defaultdict(list)
    for rec in state.commentaries.values():
        by_target[rec.body.target].append(rec)
    entries = []
    frontier = [(target, 0)]
    while frontier:
        parent, depth = frontier.pop()
        for rec in by_target.get(parent, ()):
            entries.append(TraceEntry(rec.event_id, rec.tau, rec.signer, rec.body.modality, depth + 1, parent))
            frontier.append((rec.event_id, depth + 1))
    entries.sort(key=lambda e: (e.tau, e.event_id))
    return entries


def reuse_set(artifact: str, t: int, state) -> set[str]:
    """Distinct reusers of ``artifact`` up to ``t``: citing artifacts and transfer events."""
    out = set()
    for rec in state.citations:
        b = rec.body
        if b.cited == artifact and b.modality in REUSE_CITATION_MODALITIES and rec.tau <= t:
            out.add(b.citing)
    for rec in state.transfers:
        if rec.body.source == artifact and rec.tau <= t:
            out.add(rec.event_id)
    return out


def reuse_rate(artifact: str, t0: int, t1: int, state, epoch_length: int) -> float:
    if t1 <= t0:
        raise ArgumentError("reuse_rate needs t1 > t0")
    if artifact not in state.artifacts:
        raise ArgumentError(f"unknown artifact {artifact}")
    delta = len(reuse_set(artifact, t1, state)) - len(reuse_set(artifact, t0, state))
    return delta / ((t1 - t0) / epoch_length)


def edge_list_rows(graph: CitationGraph) -> list[str]:
    rows = sorted(graph.edges, key=lambda e: (e.tau, e.event_id, e.citing, e.cited))
    return [f"{e.citing}\t{e.cited}\t{e.modality}\t{e.polarity!r}\t{e.integration_depth!r}\t{e.tau}" for e in rows]
