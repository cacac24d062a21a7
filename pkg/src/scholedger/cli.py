"""Command-line front end.

Machine-readable results go to stdout as JSON; diagnostics go to stderr.
Exit codes: 0 success, 1 validation or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import io
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import identity as ident
from .analysis import contradiction_flag, novelty_terms, overlap_distances, similarity, embed_artifact
from .canonical import encode_value
from .claims import Claim
from .config import GovernanceConfig, load_config, save_config
from .errors import LedgerError
from .events import (
    ArtifactRegistration, AttestationGrant, CitationEvent, CommentaryEvent, IdentityRegistration,
    NullResultEvent, ReplicationEvent, RetractionEvent, TransferUseEvent, VersionEvent,
)
from .graphs import citation_graph, commentary_trace, edge_list_rows
from .hashing import compute_content_hash
from .ledger import (
    Ledger, append_anchor, ledger_header, next_anchor, read_anchors, read_lines, verify_anchors, verify_chain,
)
from .scoring import artifact_report, identity_report
from .simulate import ScenarioConfig, paired_sweep, run_scenario

ENV_DIR = "SCHOLEDGER_DIR"
CHAIN = "chain.jsonl"
ANCHORS = "anchors.jsonl"
CONFIG = "config.json"
HEADER = "ledger.json"


@dataclass
class CommandResult:
    exit_code: int
    stdout: str
    stderr: str = ""

    def json(self):
        return json.loads(self.stdout)


class UsageError(Exception):
    pass


class Failure(Exception):
    """Validation/verification failure carrying a JSON payload for stdout."""

    def __init__(self, payload: dict, message: str = ""):
        self.payload = payload
        super().__init__(message or json.dumps(payload))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# workspace helpers

class Workspace:
    def __init__(self, directory: str | None):
        self.root = Path(directory or os.environ.get(ENV_DIR) or ".")

    chain = property(lambda self: self.root / CHAIN)
    anchors = property(lambda self: self.root / ANCHORS)
    config_path = property(lambda self: self.root / CONFIG)
    header = property(lambda self: self.root / HEADER)
    keys = property(lambda self: self.root / "keys")
    content = property(lambda self: self.root / "content")

    def config(self) -> GovernanceConfig:
        if not self.config_path.exists():
            raise Failure({"ok": False, "error": f"no ledger at {self.root} (run init)"})
        return load_config(self.config_path)

    def ledger(self) -> Ledger:
        return Ledger.load(self.chain, self.config())

    def store(self, data: bytes) -> str:
        h = compute_content_hash(data)
        path = self.content / h[:2] / h
        path.parent.mkdir(parents=True, exist_ok=True)
        if not path.exists():
            path.write_bytes(data)
        return h

    def secret(self, key: str) -> bytes:
        path = Path(key)
        if not path.exists():
            path = self.keys / f"{key}.secret"
        if not path.exists():
            raise Failure({"ok": False, "error": f"no secret key {key!r}"})
        return ident.read_key_file(path)

    @contextlib.contextmanager
    def lock(self):
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / ".lock", "w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)


def _now(args) -> int:
    return int(args.at) if args.at is not None else int(time.time())


def _append(ws: Workspace, body, key: str) -> dict:
    with ws.lock():
        ledger = ws.ledger()
        env = ledger.append(body, ws.secret(key))
        with open(ws.chain, "ab") as fh:
            fh.write(env.to_bytes() + b"\n")
    return {"ok": True, "event_id": env.event_id, "seq": env.seq, "kind": body.kind}


def _claims(values) -> tuple[Claim, ...]:
    return tuple(Claim.parse(v) for v in values or ())


# ---------------------------------------------------------------------------
# commands

def cmd_init(args, ws: Workspace):
    if ws.chain.exists() and not args.force:
        raise Failure({"ok": False, "error": f"ledger already exists at {ws.chain}"})
    config = load_config(args.config) if args.config else GovernanceConfig()
    ws.root.mkdir(parents=True, exist_ok=True)
    save_config(config, ws.config_path)
    ws.header.write_text(json.dumps(ledger_header(config), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ws.chain.write_bytes(b"")
    ws.anchors.write_bytes(b"")
    ws.content.mkdir(exist_ok=True)
    ws.keys.mkdir(exist_ok=True)
    return {"ok": True, "config_hash": config.config_hash, "dir": str(ws.root)}


def cmd_keygen(args, ws):
    seed = bytes.fromhex(args.seed) if args.seed else None
    secret, record = ident.generate_identity(seed)
    ident.write_key_files(ws.keys, args.name, secret)
    body = IdentityRegistration(record.public_key.hex(), ws.config().signature_scheme, _now(args))
    out = _append(ws, body, args.name)
    out["key_id"] = record.key_id
    out["name"] = args.name
    return out


def cmd_attest(args, ws):
    payload = compute_content_hash((args.payload or "").encode())
    att = ident.make_attestation(args.subject, args.kind, payload, ws.secret(args.key))
    body = AttestationGrant(att.subject, att.issuer_key, att.claim_kind, att.payload_hash, att.signature.hex(),
                            _now(args))
    return _append(ws, body, args.key)


def cmd_register(args, ws):
    if args.content:
        artifact = ws.store(Path(args.content).read_bytes())
    elif args.content_text is not None:
        artifact = ws.store(args.content_text.encode())
    elif args.artifact_hash:
        artifact = args.artifact_hash
    else:
        raise UsageError("register needs --content, --content-text or --artifact-hash\n")
    tau = _now(args)
    body = ArtifactRegistration(
        artifact_hash=artifact,
        lineage_id=args.lineage or artifact,
        title=args.title,
        created_at=int(args.created_at) if args.created_at is not None else tau,
        tau=tau,
        domain_tags=tuple(args.tag or ()),
        claims=_claims(args.claim),
        methods=tuple(args.method or ()),
        data_hash=args.data_hash,
        protocol_hash=args.protocol_hash,
    )
    out = _append(ws, body, args.key)
    out["artifact_hash"] = artifact
    return out


def cmd_comment(args, ws):
    text = Path(args.text_file).read_bytes() if args.text_file else (args.text or "").encode()
    body = CommentaryEvent(args.target, args.modality, ws.store(text), _now(args), _claims(args.claim))
    return _append(ws, body, args.key)


def cmd_cite(args, ws):
    body = CitationEvent(args.citing, args.cited, args.modality, args.polarity, args.depth, _now(args))
    return _append(ws, body, args.key)


def cmd_version(args, ws):
    body = VersionEvent(args.lineage, args.version_hash, args.modification, _now(args), args.parent)
    return _append(ws, body, args.key)


def cmd_retract(args, ws):
    body = RetractionEvent(args.target, tuple(args.reason), args.voluntary, _now(args))
    return _append(ws, body, args.key)


def cmd_null(args, ws):
    body = NullResultEvent(args.hypothesis, args.dataset, args.method, args.effect_size, args.confidence, _now(args))
    return _append(ws, body, args.key)


def cmd_replicate(args, ws):
    body = ReplicationEvent(args.target, args.dataset_variant, args.congruence, _now(args))
    return _append(ws, body, args.key)


def cmd_transfer(args, ws):
    body = TransferUseEvent(args.source, args.domain, args.dataset, args.protocol, Claim.parse(args.claim), _now(args))
    return _append(ws, body, args.key)


def cmd_verify(args, ws):
    path = Path(args.ledger) if args.ledger else ws.chain
    lines = read_lines(path)
    report = verify_chain(lines)
    if not report.ok:
        raise Failure(report.to_dict())
    anchors_path = Path(args.anchors) if args.anchors else (None if args.ledger else ws.anchors)
    out = {"ok": True}
    if anchors_path is not None and anchors_path.exists():
        anchors = read_anchors(anchors_path)
        a = verify_anchors(lines, anchors)
        if not a.ok:
            raise Failure({"ok": False, "anchor": a.seq, "reason": a.reason})
        if anchors:
            out["anchors"] = len(anchors)
    return out


def cmd_anchor(args, ws):
    with ws.lock():
        ledger = ws.ledger()
        anchor = next_anchor(ledger, read_anchors(ws.anchors), _now(args))
        append_anchor(ws.anchors, anchor)
    return {"ok": True, **anchor.to_dict()}


def _write(path, data: bytes) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)


def _report(args, ws):
    ledger = ws.ledger()
    t = _now(args)
    if args.identity:
        return identity_report(args.identity, t, ledger.state, ledger.config).to_dict()
    return artifact_report(args.artifact, t, ledger.state, ledger.config).to_dict()


def cmd_score(args, ws):
    report = _report(args, ws)
    if args.out:
        _write(args.out, encode_value(report) + b"\n")
    if args.figure:
        from .plotting import plot_scores

        plot_scores(report, args.figure)
    return report


def cmd_analyze(args, ws):
    ledger = ws.ledger()
    state, config = ledger.state, ledger.config
    records = []
    if args.pair:
        a, b = args.pair
        for h in (a, b):
            if h not in state.artifacts:
                raise Failure({"ok": False, "error": f"unknown artifact {h}"})
        ca, cb = state.artifacts[a].body.claims, state.artifacts[b].body.claims
        flag, witnesses = contradiction_flag(ca, cb)
        d_s, d_m = overlap_distances(a, b, state, config)
        sim = similarity(embed_artifact(state.artifacts[a].body, config), embed_artifact(state.artifacts[b].body, config))
        pair = [a, b]
        records += [
            {"config_hash": config.config_hash, "operator": "contradiction", "pair": pair, "value": flag,
             "witnesses": [[w[0].to_dict(), w[1].to_dict()] for w in witnesses]},
            {"config_hash": config.config_hash, "operator": "similarity", "pair": pair, "value": sim},
            {"config_hash": config.config_hash, "operator": "overlap", "pair": pair,
             "value": d_s < config.overlap_eps_s and d_m < config.overlap_eps_m,
             "semantic_distance": d_s, "method_distance": d_m},
        ]
    for h in args.artifact or ():
        e, c, lat = novelty_terms(h, state, config)
        value = config.novelty_lambda1 * e + config.novelty_lambda2 * c + config.novelty_lambda3 * lat
        records.append({"artifact": h, "config_hash": config.config_hash, "operator": "novelty", "value": value,
                        "entropy": e, "claim_distance": c, "latency": lat})
    if not records:
        raise UsageError("analyze needs --pair A B and/or --artifact A\n")
    text = b"".join(encode_value(r) + b"\n" for r in records)
    if args.out:
        _write(args.out, text)
    return text.decode()


def _scenario(args) -> ScenarioConfig:
    base = ScenarioConfig.from_json(args.scenario) if args.scenario else ScenarioConfig()
    overrides = {k: getattr(args, k) for k in ("n_agents", "troll_fraction", "p_m0", "q", "eta", "epochs", "seed")
                 if getattr(args, k) is not None}
    if args.anonymous:
        overrides["identity_penalties"] = False
    return replace(base, **overrides)


def cmd_simulate(args, ws):
    scn = _scenario(args)
    config = load_config(args.config) if args.config else GovernanceConfig()
    if args.seeds:
        wins = 0
        for _, on, off in paired_sweep(scn, range(scn.seed, scn.seed + args.seeds), config):
            wins += on.loss[-1] <= off.loss[-1]
        return {"ok": True, "seeds": args.seeds, "identity_not_worse": wins}
    metrics = run_scenario(scn, config)
    out = {"ok": True, "final_loss": metrics.loss[-1], "final_p_m": metrics.p_m[-1],
           "total_malicious": sum(metrics.malicious), "epochs": scn.epochs}
    if args.csv:
        csv_path = Path(args.csv)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        metrics.to_csv(csv_path)
        out["csv"] = str(csv_path)
        compare = None
        if args.compare:
            compare = run_scenario(replace(scn, identity_penalties=not scn.identity_penalties), config)
            other = csv_path.with_name(csv_path.stem + "_compare.csv")
            compare.to_csv(other)
            out["compare_csv"] = str(other)
        if not args.no_figure:
            from .plotting import plot_simulation

            fig = plot_simulation(metrics, csv_path.with_suffix(".png"), compare=compare,
                                  title="identity-linked" if scn.identity_penalties else "anonymous")
            out["figure"] = str(fig)
    return out


def cmd_export(args, ws):
    ledger = ws.ledger()
    state, config = ledger.state, ledger.config
    t = _now(args)
    if args.kind == "graph":
        rows = edge_list_rows(citation_graph(state))
        data = "".join(r + "\n" for r in rows).encode()
    elif args.kind == "trace":
        if not args.target:
            raise UsageError("export --kind trace needs --target\n")
        rows = [{"event_id": e.event_id, "meta_depth": e.meta_depth, "modality": e.modality, "signer": e.signer,
                 "target": e.target, "tau": e.tau} for e in commentary_trace(args.target, state)]
        data = encode_value({"config_hash": config.config_hash, "rows": rows, "target": args.target}) + b"\n"
    else:
        reports = [identity_report(k, t, state, config).to_dict() for k in sorted(state.identities)]
        reports += [artifact_report(h, t, state, config).to_dict() for h in sorted(state.artifacts)]
        data = encode_value({"computed_at": t, "config_hash": config.config_hash, "reports": reports}) + b"\n"
    _write(args.out, data)
    out = {"ok": True, "kind": args.kind, "path": args.out, "sha256": compute_content_hash(data)}
    if args.figure and args.kind == "scores":
        from .plotting import plot_scores

        for r in reports:
            if r["subject"] == args.figure_subject:
                plot_scores(r, args.figure)
                out["figure"] = args.figure
    return out


def cmd_config(args, ws):
    config = load_config(args.path)
    return {"ok": True, "config_hash": config.config_hash}


def cmd_fixture(args, ws):
    from .fixture import NAMES, build_fixture, fixture_seed

    ledger, ref = build_fixture()
    ws.root.mkdir(parents=True, exist_ok=True)
    save_config(ledger.config, ws.config_path)
    ws.header.write_text(json.dumps(ledger_header(ledger.config), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ledger.write(ws.chain)
    ws.anchors.write_bytes(b"")
    for name in NAMES:
        ident.write_key_files(ws.keys, name, fixture_seed(name))
    return {"ok": True, "events": len(ledger), "ref": ref}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scholedger", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def command(name, func, help_text, signed=False, timed=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--dir", help=f"ledger directory (default ${ENV_DIR} or .)")
        if signed:
            sp.add_argument("--key", required=True, help="key name under keys/ or path to a secret key file")
        if timed:
            sp.add_argument("--at", type=int, help="timestamp in Unix seconds (default: now)")
        sp.set_defaults(func=func)
        return sp

    sp = command("init", cmd_init, "create an empty ledger directory")
    sp.add_argument("--config", help="governance config JSON to install")
    sp.add_argument("--force", action="store_true")

    sp = command("keygen", cmd_keygen, "create a keypair and register it", timed=True)
    sp.add_argument("--name", required=True)
    sp.add_argument("--seed", help="64 hex chars of seed for a deterministic key")

    sp = command("attest", cmd_attest, "issue a signed attestation about another identity", signed=True, timed=True)
    sp.add_argument("--subject", required=True)
    sp.add_argument("--kind", required=True, choices=ident.CLAIM_KINDS)
    sp.add_argument("--payload", help="credential text; only its hash is recorded")

    sp = command("register", cmd_register, "register an artifact or a new version's content", signed=True, timed=True)
    sp.add_argument("--content")
    sp.add_argument("--content-text")
    sp.add_argument("--artifact-hash")
    sp.add_argument("--title", required=True)
    sp.add_argument("--tag", action="append")
    sp.add_argument("--claim", action="append", help="subject:predicate:direction[:dataset[:method[:magnitude]]]")
    sp.add_argument("--method", action="append")
    sp.add_argument("--lineage")
    sp.add_argument("--created-at", type=int)
    sp.add_argument("--data-hash")
    sp.add_argument("--protocol-hash")

    sp = command("comment", cmd_comment, "post commentary on an artifact or comment", signed=True, timed=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--modality", required=True)
    sp.add_argument("--text")
    sp.add_argument("--text-file")
    sp.add_argument("--claim", action="append")

    sp = command("cite", cmd_cite, "record a typed citation", signed=True, timed=True)
    sp.add_argument("--citing", required=True)
    sp.add_argument("--cited", required=True)
    sp.add_argument("--modality", required=True)
    sp.add_argument("--polarity", type=float, default=1.0)
    sp.add_argument("--depth", type=float, default=1.0)

    sp = command("version", cmd_version, "link a registered artifact as a new version", signed=True, timed=True)
    sp.add_argument("--lineage", required=True)
    sp.add_argument("--version-hash", required=True)
    sp.add_argument("--parent")
    sp.add_argument("--modification", required=True)

    sp = command("retract", cmd_retract, "retract a version", signed=True, timed=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--reason", action="append", required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--voluntary", dest="voluntary", action="store_true", default=True)
    g.add_argument("--involuntary", dest="voluntary", action="store_false")

    sp = command("null", cmd_null, "record a null result", signed=True, timed=True)
    sp.add_argument("--hypothesis", required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--method", required=True)
    sp.add_argument("--effect-size", type=float, required=True)
    sp.add_argument("--confidence", type=float, required=True)

    sp = command("replicate", cmd_replicate, "record a replication attempt", signed=True, timed=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--dataset-variant", required=True)
    sp.add_argument("--congruence", type=float, required=True)

    sp = command("transfer", cmd_transfer, "record a method transfer to a new domain", signed=True, timed=True)
    sp.add_argument("--source", required=True)
    sp.add_argument("--domain", required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--claim", required=True)

    sp = command("verify", cmd_verify, "verify chain integrity and anchors")
    sp.add_argument("--ledger", help="chain file to verify (default <dir>/chain.jsonl)")
    sp.add_argument("--anchors")

    command("anchor", cmd_anchor, "anchor un-anchored events under a Merkle root", timed=True)

    sp = command("score", cmd_score, "score report for an identity or artifact", timed=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--identity")
    g.add_argument("--artifact")
    sp.add_argument("--out")
    sp.add_argument("--figure", help="also render the report as a PNG bar chart")

    sp = command("analyze", cmd_analyze, "contradiction, overlap and novelty operators (JSONL)")
    sp.add_argument("--pair", nargs=2, metavar=("A", "B"))
    sp.add_argument("--artifact", action="append")
    sp.add_argument("--out")

    sp = command("simulate", cmd_simulate, "run the incentive simulation")
    sp.add_argument("--scenario", help="scenario JSON file")
    sp.add_argument("--config", help="governance config JSON")
    sp.add_argument("--n-agents", type=int)
    sp.add_argument("--troll-fraction", type=float)
    sp.add_argument("--p-m0", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--anonymous", action="store_true", help="disable identity penalties")
    sp.add_argument("--seeds", type=int, help="paired identity/anonymous sweep over this many seeds")
    sp.add_argument("--csv", help="write per-epoch metrics CSV (and a PNG alongside)")
    sp.add_argument("--compare", action="store_true", help="also run the opposite regime and overlay it")
    sp.add_argument("--no-figure", action="store_true")

    sp = command("export", cmd_export, "write scores, graph or trace files", timed=True)
    sp.add_argument("--kind", required=True, choices=("scores", "graph", "trace"))
    sp.add_argument("--out", required=True)
    sp.add_argument("--target")
    sp.add_argument("--figure", help="PNG path for one subject's score chart")
    sp.add_argument("--figure-subject")

    sp = command("config", cmd_config, "check a governance config file")
    sp.add_argument("path")

    command("fixture", cmd_fixture, "write the documented fixture ledger")
    return p


def run_command(argv) -> CommandResult:
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = build_parser().parse_args(list(argv))
    except UsageError as exc:
        return CommandResult(2, out.getvalue(), err.getvalue() + str(exc))
    except SystemExit as exc:  # --help
        return CommandResult(int(exc.code or 0), out.getvalue(), err.getvalue())
    ws = Workspace(args.dir)
    try:
        result = args.func(args, ws)
    except UsageError as exc:
        return CommandResult(2, "", str(exc))
    except Failure as exc:
        return CommandResult(1, json.dumps(exc.payload, sort_keys=True) + "\n", str(exc) + "\n")
    except LedgerError as exc:
        payload = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "violations"):
            payload["violations"] = exc.violations
        return CommandResult(1, json.dumps(payload, sort_keys=True) + "\n", f"{type(exc).__name__}: {exc}\n")
    except (OSError, ValueError) as exc:
        return CommandResult(1, json.dumps({"ok": False, "error": type(exc).__name__, "message": str(exc)},
                                           sort_keys=True) + "\n", f"{exc}\n")
    if isinstance(result, str):
        return CommandResult(0, result)
    return CommandResult(0, json.dumps(result, sort_keys=True) + "\n")


def main(argv=None) -> int:
    res = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(res.stdout)
    sys.stderr.write(res.stderr)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
