"""Deterministic scenario runner.

A run turns the scenario into timed actions, translates each action into a
transaction against a scratch copy of the state, and finalizes one block per
tick through the simulated consensus engine. Failed actions are not dropped:
they become ``Rejected`` compliance events so the report can show them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .consensus import Candidate, ConsensusEngine, NetworkConfig
from .crypto import canonical_json
from .docstore import commit
from .errors import CommitmentMismatch, RunFailed, SupernetError, UnknownLc
from .ledger import (
    LedgerState,
    Transaction,
    TxKind,
    apply_block,
    build_block,
    genesis_state,
    try_apply,
)
from .scenario import Scenario
from .settlement import BRL, INR, USDC, FxQuote
from .workflow import (
    DOCS_PRESENTED,
    ExamResult,
    LcTerms,
    doc_content,
    examine_docs,
    reveal_documents,
)

START_TICK = 1


@dataclass(frozen=True)
class Action:
    tick: int
    seq: int
    actor: str
    action: str
    args: dict = field(default_factory=dict)


# -- planning ------------------------------------------------------------------


def default_documents(terms: LcTerms) -> dict[str, dict]:
    docs = {}
    for kind in sorted(terms.required_docs):
        if kind == "Invoice":
            docs[kind] = {"amount": terms.amount.amount, "asset": terms.amount.asset}
        elif kind == "BillOfLading":
            docs[kind] = {"shipment_tick": terms.latest_shipment_tick}
        else:
            docs[kind] = {"ref": f"{terms.trade_ref}/{kind}"}
    return docs


def standard_script(lc: dict) -> list[tuple[int, str, str, dict]]:
    """The eight-step happy path plus settlement and compliance for one LC."""
    t = lc["terms"]
    ref = t["trade_ref"]
    s = lc.get("start", START_TICK)
    gap = lc.get("step_interval", 1)
    a, b, i, v = t["applicant"], t["beneficiary"], t["issuing_bank"], t["advising_bank"]
    steps = [
        (0, a, "agree_terms", {}),
        (0, b, "agree_terms", {}),
        (1, i, "issue", {}),
        (2, v, "advise", {}),
        (3, b, "present", {}),
        (4, v, "examine", {}),
        (5, v, "forward", {}),
        (6, i, "examine", {}),
        (7, i, "accept", {}),
    ]
    method = lc.get("settlement", "usdc")
    funding = lc.get("funding", 0)
    if method in ("usdc", "basket"):
        steps += [(8, i, "onramp", {"amount": funding}), (9, i, "pay", {}), (10, v, "offramp", {})]
    elif method == "escrow":
        steps += [(2, i, "escrow_fund", {"amount": funding}), (8, v, "escrow_release", {})]
    if method != "none":
        end = steps[-1][0]
        steps += [(end + 1, v, "brc", {}), (end + 2, b, "gr", {})]
    return [(s + k * gap, actor, action, {"trade_ref": ref, **args}) for k, actor, action, args in steps]


def plan(scenario: Scenario) -> list[Action]:
    data = scenario.data
    validators = data["validators"]
    raw: list[tuple[int, str, str, dict]] = []
    for p in data["parties"]:
        if p["id"] not in validators:
            raw.append((p.get("onboard_at", 0), validators[0], "onboard", {"party": p["id"]}))
    for lc in data.get("lcs", []):
        if lc.get("script", True):
            raw += standard_script(lc)
    for da in data.get("da_trades", []):
        raw += da_script(da)
    for a in data.get("actions", []):
        args = {k: v for k, v in a.items() if k not in ("tick", "actor", "action")}
        raw.append((a["tick"], a["actor"], a["action"], args))
    ordered = sorted(enumerate(raw), key=lambda item: (item[1][0], item[0]))
    return [Action(tick, seq, actor, action, args) for seq, (_, (tick, actor, action, args)) in enumerate(ordered)]


def da_script(da: dict) -> list[tuple[int, str, str, dict]]:
    from .workflow import DaDurations

    d = DaDurations.from_dict(da.get("durations"))
    s = da.get("start", START_TICK)
    accepted = s + d.docs_transit + d.acceptance + d.acceptance_delay
    ref = {"trade_ref": da["trade_ref"]}
    return [
        (s, da["exporter"], "da_present", dict(ref)),
        (accepted, da["importer"], "da_accept", dict(ref)),
        (accepted + d.payment, da["exporter_bank"], "da_paid", dict(ref)),
    ]


# -- run -----------------------------------------------------------------------


@dataclass
class RunResult:
    lines: list[str]
    state: LedgerState
    report: dict

    @property
    def transcript(self) -> str:
        return "".join(line + "\n" for line in self.lines)


class _Rejected(Exception):
    def __init__(self, error: SupernetError):
        self.error = error


class Driver:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        data = scenario.data
        self.rng = random.Random(scenario.seed)
        self.config = scenario.genesis_config()
        self.state = genesis_state(self.config)
        self.net = NetworkConfig.from_dict(data.get("network", {}), seed=scenario.seed)
        faults = data.get("faults", {})
        self.engine = ConsensusEngine(self.state.validators, self.net, faults.get("silent", ()))
        self.tampers = {(t["trade_ref"], t["kind"], t.get("presentation", 1)) for t in faults.get("tamper", [])}
        self.lcs = {lc["terms"]["trade_ref"]: lc for lc in data.get("lcs", [])}
        self.das = {da["trade_ref"]: da for da in data.get("da_trades", [])}
        self.inbox: dict[tuple[str, str], dict[str, tuple[bytes, bytes]]] = {}
        self.lines: list[str] = []

    # helpers
    def _quote(self, pair: str, tick: int) -> dict:
        fx = self.scenario.data.get("fx", {})
        if pair not in fx:
            raise _Rejected(UnknownLc(f"no {pair} quote configured"))
        return FxQuote.from_dict({"pair": pair, **fx[pair], "tick": tick}).to_dict()

    def _terms(self, ref: str, override: dict | None = None) -> LcTerms:
        if ref not in self.lcs:
            raise _Rejected(UnknownLc(ref))
        return LcTerms.from_dict({**self.lcs[ref]["terms"], **(override or {})})

    @staticmethod
    def _lc(scratch: LedgerState, ref: str):
        lc = scratch.book.registry.get(ref)
        if lc is None:
            raise _Rejected(UnknownLc(ref))
        return lc

    def _documents(self, terms: LcTerms, args: dict, lc_entry: dict) -> dict[str, dict]:
        docs = default_documents(terms)
        for kind, meta in {**lc_entry.get("documents", {}), **args.get("documents", {})}.items():
            docs[kind] = {**docs.get(kind, {}), **meta}
        for kind in args.get("omit", ()):
            docs.pop(kind, None)
        return docs

    def _commit_docs(self, ref: str, docs: dict[str, dict], presentation: int) -> tuple[dict, dict]:
        commitments, reveals = {}, {}
        for kind in sorted(docs):
            content = doc_content(kind, docs[kind])
            c = commit(content, self.rng)
            commitments[kind] = c.digest
            if (ref, kind, presentation) in self.tampers:
                content = doc_content(kind, {**docs[kind], "altered": True})
            reveals[kind] = (c.salt, content)
        return commitments, reveals

    # action translation: returns [(sender, kind, body)], plus private deliveries
    def translate(self, a: Action, scratch: LedgerState, now: int) -> tuple[list[tuple[str, TxKind, dict]], list[dict]]:
        args, actor, act = a.args, a.actor, a.action
        ref = args.get("trade_ref", "")
        private: list[dict] = []
        if act == "onboard":
            p = self.scenario.party(args["party"])
            return [(actor, TxKind.ONBOARD_PARTY, {"id": p["id"], "role": p["role"], "country": p["country"]})], private
        if act == "agree_terms":
            return [(actor, TxKind.AGREE_TERMS, {"trade_ref": ref, "terms_hash": self._terms(ref).token_id()})], private
        if act == "issue":
            return [(actor, TxKind.ISSUE_LC, {"terms": self._terms(ref, args.get("terms")).to_dict()})], private
        if act == "propose":
            body = {"proposal_id": args["proposal_id"], "action": args["op"], "subject": args["subject"], "approve": True}
            return [(actor, TxKind.GOVERNANCE_VOTE, body)], private
        if act == "vote":
            return [(actor, TxKind.GOVERNANCE_VOTE, {"proposal_id": args["proposal_id"], "approve": args.get("approve", True)})], private
        if act.startswith("da_"):
            return self._translate_da(a, scratch, now)

        lc = self._lc(scratch, ref)
        token, terms = lc.token_id, lc.terms
        if act == "advise":
            return [(actor, TxKind.ADVISE_LC, {"token_id": token})], private
        if act == "present":
            index = len(scratch.book.presentations.get(token, []))
            docs = self._documents(terms, args, self.lcs.get(ref, {}))
            commitments, reveals = self._commit_docs(ref, docs, index + 1)
            for kind, (salt, content) in reveals.items():
                private.append(self._reveal(terms.advising_bank, token, index, kind, salt, content))
            return [(actor, TxKind.PRESENT_DOCS, {"token_id": token, "docs": commitments})], private
        if act == "examine":
            presentation = scratch.book.latest_presentation(token)
            index = len(scratch.book.presentations[token]) - 1
            reveals = self.inbox.get((actor, token), {})
            try:
                result = examine_docs(presentation, terms, reveal_documents(presentation, reveals))
            except CommitmentMismatch:
                result = ExamResult(voided=True)
            txs = [(actor, TxKind.EXAM_RESULT, {"token_id": token, "presentation": index, **result.to_dict()})]
            if not result.clean:
                to = terms.beneficiary if lc.state == DOCS_PRESENTED else terms.advising_bank
                txs.append((actor, TxKind.DISCREPANCY_NOTICE, {"token_id": token, "to": to, "codes": list(result.codes)}))
            return txs, private
        if act == "forward":
            index = len(scratch.book.presentations.get(token, [])) - 1
            for kind, (salt, content) in sorted(self.inbox.get((terms.advising_bank, token), {}).items()):
                private.append(self._reveal(terms.issuing_bank, token, index, kind, salt, content))
            return [(actor, TxKind.FORWARD_DOCS, {"token_id": token})], private
        if act == "accept":
            body = {"token_id": token}
            if ref in self.lcs and self.lcs[ref].get("basket_id"):
                body["basket_id"] = self.lcs[ref]["basket_id"]
            return [(actor, TxKind.ACCEPT_DOCS, body)], private
        if act == "onramp":
            body = {"amount": args.get("amount", 0), "quote": self._quote(f"{BRL}/{USDC}", now), "lc": token}
            return [(actor, TxKind.TOKEN_MINT, body)], private
        if act == "pay":
            due = scratch.accounts.amount_due(token, now)
            return [(actor, TxKind.TOKEN_TRANSFER, {"to": terms.advising_bank, "amount": args.get("amount", due), "lc": token})], private
        if act == "offramp":
            trigger = scratch.accounts.triggers.get(token)
            amount = args.get("amount", trigger.paid_usdc if trigger else 0)
            body = {"amount": amount, "quote": self._quote(f"{USDC}/{INR}", now), "credit_to": terms.beneficiary, "lc": token}
            return [(actor, TxKind.TOKEN_BURN, body)], private
        if act == "escrow_fund":
            body = {"lc": token, "amount": args.get("amount", 0), "beneficiary": terms.advising_bank}
            return [(actor, TxKind.ESCROW_FUND, body)], private
        if act == "escrow_release":
            return [(actor, TxKind.ESCROW_RELEASE, {"lc": token, "quote": self._quote(f"{BRL}/{INR}", now)})], private
        events = {"brc": "BRC", "gr": "GR", "expire": "Expire"}
        if act in events:
            return [(actor, TxKind.COMPLIANCE_EVENT, {"event": events[act], "token_id": token})], private
        raise _Rejected(UnknownLc(f"unsupported action {act}"))

    def _translate_da(self, a: Action, scratch: LedgerState, now: int):
        ref = a.args.get("trade_ref", "")
        da = self.das.get(ref)
        if da is None:
            raise _Rejected(UnknownLc(ref))
        if a.action == "da_accept":
            return [(a.actor, TxKind.DA_ACCEPT, {"trade_ref": ref})], []
        if a.action == "da_paid":
            return [(a.actor, TxKind.COMPLIANCE_EVENT, {"event": "DaPaid", "trade_ref": ref})], []
        docs = da.get("documents") or {"Invoice": dict(da["amount"]), "BillOfLading": {"ref": f"{ref}/BillOfLading"}}
        commitments, reveals = self._commit_docs(ref, docs, 1)
        private = [self._reveal(da["importer_bank"], ref, 0, k, s, c) for k, (s, c) in reveals.items()]
        body = {
            "trade_ref": ref,
            "importer": da["importer"],
            "exporter_bank": da["exporter_bank"],
            "importer_bank": da["importer_bank"],
            "amount": da["amount"],
            "docs": commitments,
        }
        return [(a.actor, TxKind.DA_PRESENT, body)], private

    @staticmethod
    def _reveal(to: str, token: str, index: int, kind: str, salt: bytes, content: bytes) -> dict:
        return {"to": to, "token_id": token, "presentation": index, "kind": kind, "salt": salt.hex(), "content": content.decode()}

    def _rejection(self, scratch: LedgerState, a: Action, error: SupernetError, now: int) -> Transaction:
        sender = a.actor if a.actor in scratch.book.parties else scratch.validators.members[0]
        body = {"event": "Rejected", "action": a.action, "error": error.code, "detail": str(error), "ref": a.args.get("trade_ref", "")}
        return Transaction.create(sender, TxKind.COMPLIANCE_EVENT, body, now, scratch.gas)

    def _batch(self, actions: list[Action], now: int) -> tuple[list[Transaction], list[dict]]:
        scratch = self.state
        txs: list[Transaction] = []
        private: list[dict] = []
        for a in actions:
            try:
                specs, reveals = self.translate(a, scratch, now)
                staged = scratch
                new_txs = []
                for sender, kind, body in specs:
                    tx = Transaction.create(sender, kind, body, now, staged.gas)
                    staged = try_apply(staged, tx)
                    new_txs.append(tx)
            except _Rejected as exc:
                error = exc.error
            except SupernetError as exc:
                error = exc
            else:
                scratch = staged
                txs += new_txs
                private += reveals
                fresh: dict[tuple[str, str], dict] = {}
                for r in reveals:
                    fresh.setdefault((r["to"], r["token_id"]), {})[r["kind"]] = (bytes.fromhex(r["salt"]), r["content"].encode())
                self.inbox.update(fresh)
                continue
            tx = self._rejection(scratch, a, error, now)
            scratch = try_apply(scratch, tx)
            txs.append(tx)
        return txs, private

    def run(self) -> RunResult:
        from .report import build_report

        genesis = self.state.chain[0]
        data = self.scenario.data
        self.lines.append(
            _dump(
                {
                    "type": "genesis",
                    "scenario": self.scenario.name,
                    "seed": self.scenario.seed,
                    "config": self.config,
                    "network": self.net.to_dict(),
                    "faults": data.get("faults", {}),
                    "report_inputs": {
                        "baseline": data.get("baseline", {}),
                        "da_trades": data.get("da_trades", []),
                        "indices": data.get("indices"),
                        "manual_fee": data.get("manual_fee"),
                    },
                    "block": genesis.to_dict(),
                    "settlement": self.state.accounts.snapshot(),
                }
            )
        )
        actions = plan(self.scenario)
        now, i = START_TICK, 0
        while i < len(actions):
            now = max(now, actions[i].tick)
            j = i
            while j < len(actions) and actions[j].tick <= now:
                j += 1
            txs, private = self._batch(actions[i:j], now)
            i = j
            now = self._finalize(txs, private, now)
        self.engine.drain()
        lines = list(self.lines)
        return RunResult(lines, self.state, build_report(lines))

    def _finalize(self, txs: list[Transaction], private: list[dict], now: int) -> int:
        draft = build_block(self.state, txs, self.state.validators.members[0], (), sim_time=now)
        try:
            cert, timeouts = self.engine.finalize_height(Candidate(draft.height, draft.hash()), now)
        except SupernetError as exc:
            raise RunFailed(draft.height, now, exc) from exc
        block = build_block(
            self.state, txs, cert.proposer, cert.votes, round=cert.round, sim_time=now, finalized_at=cert.finalized_at
        )
        try:
            self.state = apply_block(self.state, block)
        except SupernetError as exc:
            raise RunFailed(block.height, now, exc) from exc
        self.engine.sync(self.state.validators)
        self.lines.append(
            _dump(
                {
                    "type": "block",
                    "block": block.to_dict(),
                    "consensus": [{"round": t.round, "votes": t.votes, "needed": t.needed} for t in timeouts],
                    "private": private,
                    "settlement": self.state.accounts.snapshot(),
                }
            )
        )
        return max(now + 1, cert.finalized_at + 1)


def _dump(obj: dict) -> str:
    return canonical_json(obj).decode()


def run(scenario: Scenario, seed: int | None = None) -> RunResult:
    if seed is not None:
        scenario = scenario.with_seed(seed)
    return Driver(scenario).run()
