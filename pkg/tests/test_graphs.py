import random

import numpy as np
import pytest

from helpers import artifact_body, new_identity, transitive_closure
from scholedger.errors import ArgumentError, NoLiveVersionError
from scholedger.events import CitationEvent, CommentaryEvent, RetractionEvent, TransferUseEvent, VersionEvent
from scholedger.claims import Claim
from scholedger.graphs import (
    DIRECT, POST_RETRACTION, TRANSITIVE, CitationEdge, CitationGraph, citation_graph, commentary_trace,
    edge_list_rows, fork_branches, live_version, retraction_affected_set, reuse_rate, reuse_set,
)
from scholedger.hashing import compute_content_hash
from scholedger.ledger import Ledger


def graph(edges, tau=1):
    g = CitationGraph()
    for citing, cited in edges:
        g.add_edge(CitationEdge(citing, cited, "extension", 1.0, 1.0, tau))
    return g


def test_no_citers():
    g = CitationGraph(nodes={"A"})
    assert retraction_affected_set(g, "A", 0) == {}


def test_unknown_artifact():
    with pytest.raises(ArgumentError):
        retraction_affected_set(CitationGraph(), "A", 0)


def test_chain():
    out = retraction_affected_set(graph([("B", "A"), ("C", "B")]), "A", 10)
    assert out == {"B": {DIRECT}, "C": {TRANSITIVE}}


def test_diamond():
    out = retraction_affected_set(graph([("B", "A"), ("C", "A"), ("D", "B"), ("D", "C")]), "A", 10)
    assert out == {"B": {DIRECT}, "C": {DIRECT}, "D": {TRANSITIVE}}


def test_post_retraction_citation_flag():
    g = graph([("B", "A")], tau=20)
    g.add_edge(CitationEdge("C", "A", "extension", 1.0, 1.0, 5))
    out = retraction_affected_set(g, "A", 10)
    assert out["B"] == {DIRECT, POST_RETRACTION}
    assert out["C"] == {DIRECT}


def test_matches_closure_on_random_dags():
    rng = random.Random(1)
    for _ in range(20):
        n = rng.randint(2, 25)
        adj = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i):
                adj[i, j] = rng.random() < 0.15
        g = graph([(str(i), str(j)) for i, j in zip(*np.nonzero(adj))])
        g.nodes.update(str(i) for i in range(n))
        reach = transitive_closure(adj)
        r = rng.randrange(n)
        out = retraction_affected_set(g, str(r), 10**9)
        assert set(out) == {str(i) for i in range(n) if reach[i, r]}
        for k, flags in out.items():
            assert flags == ({DIRECT} if adj[int(k), r] else {TRANSITIVE})


def lineage():
    ledger = Ledger()
    key, _ = new_identity(ledger, "author", 0)
    v = [artifact_body("L0", 10)]
    ledger.append(v[0], key)
    root = v[0].artifact_hash
    for i, tau in ((1, 20), (2, 30)):
        v.append(artifact_body(f"L{i}", tau, lineage_id=root))
        ledger.append(v[i], key)
        ledger.append(VersionEvent(root, v[i].artifact_hash, "addendum", tau, v[i - 1].artifact_hash), key)
    return ledger, key, root, [b.artifact_hash for b in v]


def test_live_version_examples():
    ledger, key, root, v = lineage()
    assert live_version(root, 10, ledger.state) == v[0]
    assert live_version(root, 25, ledger.state) == v[1]
    ledger.append(RetractionEvent(v[2], ("superseded",), True, 35), key)
    assert live_version(root, 40, ledger.state) == v[1]
    assert live_version(root, 32, ledger.state) == v[2]
    with pytest.raises(NoLiveVersionError):
        live_version(root, 5, ledger.state)
    with pytest.raises(ArgumentError):
        live_version("ab" * 32, 40, ledger.state)


def test_fork_branches():
    ledger, key, root, v = lineage()
    assert fork_branches(root, ledger.state) == [v]
    fork = artifact_body("L3", 40, lineage_id=root)
    ledger.append(fork, key)
    ledger.append(VersionEvent(root, fork.artifact_hash, "reanalysis", 40, v[1]), key)
    assert fork_branches(root, ledger.state) == [v, v[:2] + [fork.artifact_hash]]


def test_commentary_trace():
    ledger = Ledger()
    key, kid = new_identity(ledger, "c", 0)
    art = artifact_body("T", 1)
    ledger.append(art, key)
    assert commentary_trace(art.artifact_hash, ledger.state) == []
    x = ledger.append(CommentaryEvent(art.artifact_hash, "criticism", compute_content_hash(b"x"), 5), key)
    y = ledger.append(CommentaryEvent(x.event_id, "endorsement", compute_content_hash(b"y"), 6), key)
    trace = commentary_trace(art.artifact_hash, ledger.state)
    assert [(e.event_id, e.meta_depth) for e in trace] == [(x.event_id, 1), (y.event_id, 2)]
    a = ledger.append(CommentaryEvent(art.artifact_hash, "derivation", compute_content_hash(b"a"), 7), key)
    b = ledger.append(CommentaryEvent(art.artifact_hash, "derivation", compute_content_hash(b"b"), 7), key)
    tail = commentary_trace(art.artifact_hash, ledger.state)[-2:]
    assert [e.event_id for e in tail] == sorted([a.event_id, b.event_id])
    with pytest.raises(ArgumentError):
        commentary_trace("ab" * 32, ledger.state)


def test_reuse_rate():
    ledger = Ledger(None)
    key, _ = new_identity(ledger, "r", 0)
    day = ledger.config.epoch_length
    src = artifact_body("S", 0)
    ledger.append(src, key)
    citers = []
    for i in range(4):
        c = artifact_body(f"C{i}", 0)
        ledger.append(c, key)
        citers.append(c.artifact_hash)
    for i in range(2):
        ledger.append(CitationEvent(citers[i], src.artifact_hash, "extension", 1, 1, 1 * day), key)
    ledger.append(CitationEvent(citers[0], src.artifact_hash, "methodological-reuse", 1, 1, 1 * day), key)
    assert len(reuse_set(src.artifact_hash, day, ledger.state)) == 2
    assert reuse_rate(src.artifact_hash, day, 2 * day, ledger.state, day) == 0.0
    ledger.append(CitationEvent(citers[2], src.artifact_hash, "extension", 1, 1, 3 * day), key)
    ledger.append(CitationEvent(citers[3], src.artifact_hash, "replication", 1, 1, 3 * day), key)
    ledger.append(TransferUseEvent(src.artifact_hash, "edu", "d", "p", Claim("a", "b", "zero"), 4 * day), key)
    assert reuse_rate(src.artifact_hash, day, 4 * day, ledger.state, day) == 1.0
    with pytest.raises(ArgumentError):
        reuse_rate(src.artifact_hash, 4 * day, day, ledger.state, day)


def test_edge_rows(fixture_ledger):
    ledger, ref = fixture_ledger
    assert edge_list_rows(CitationGraph()) == []
    rows = edge_list_rows(citation_graph(ledger.state))
    assert rows[0].split("\t")[:3] == [ref["A1"], ref["E2"], "foundational"]
