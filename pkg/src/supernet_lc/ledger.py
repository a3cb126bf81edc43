"""Append-only block/transaction ledger and the replicated application.

``LedgerState`` is a pure function of the genesis config and the ordered
finalized transactions: ``replay`` rebuilds it bit-for-bit from a chain.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from . import consensus
from .crypto import ZERO_HASH, canonical_json, encode_fields, hash_hex, hex_to_bytes
from .docstore import DocStore
from .errors import (
    BrokenHashChain,
    InvalidParentHash,
    InvalidProposal,
    InvalidTransaction,
    InvalidWallet,
    NotAMember,
    QuorumNotMet,
    SupernetError,
    UnknownParty,
    WrongBank,
    WrongState,
)
from .merkle import merkle_root
from .settlement import BASKET, Accounts, BasketDefinition, FxQuote, SettlementTrigger
from .workflow import ACCEPTED, BANK_ROLES, DaTrade, ExamResult, LcBook, LcTerms, Money


class TxKind(str, Enum):
    ONBOARD_PARTY = "OnboardParty"
    AGREE_TERMS = "AgreeTerms"
    ISSUE_LC = "IssueLc"
    ADVISE_LC = "AdviseLc"
    PRESENT_DOCS = "PresentDocs"
    EXAM_RESULT = "ExamResult"
    DISCREPANCY_NOTICE = "DiscrepancyNotice"
    FORWARD_DOCS = "ForwardDocs"
    ACCEPT_DOCS = "AcceptDocs"
    TOKEN_MINT = "TokenMint"
    TOKEN_TRANSFER = "TokenTransfer"
    TOKEN_BURN = "TokenBurn"
    ESCROW_FUND = "EscrowFund"
    ESCROW_RELEASE = "EscrowRelease"
    GOVERNANCE_VOTE = "GovernanceVote"
    COMPLIANCE_EVENT = "ComplianceEvent"
    DA_PRESENT = "DaPresent"
    DA_ACCEPT = "DaAccept"


DEFAULT_GAS = {
    TxKind.ISSUE_LC: 50,
    TxKind.ADVISE_LC: 20,
    TxKind.PRESENT_DOCS: 30,
    TxKind.DISCREPANCY_NOTICE: 10,
    TxKind.FORWARD_DOCS: 20,
    TxKind.ACCEPT_DOCS: 20,
    TxKind.TOKEN_MINT: 5,
    TxKind.TOKEN_TRANSFER: 5,
    TxKind.TOKEN_BURN: 5,
    TxKind.GOVERNANCE_VOTE: 1,
}
OTHER_GAS = 10


@dataclass(frozen=True)
class GasSchedule:
    costs: tuple[tuple[str, int], ...]

    @classmethod
    def build(cls, overrides: Mapping[str, int] | None = None) -> "GasSchedule":
        table = {k.value: DEFAULT_GAS.get(k, OTHER_GAS) for k in TxKind}
        for name, cost in (overrides or {}).items():
            if name not in table:
                raise ValueError(f"unknown transaction kind {name!r}")
            if int(cost) < 0:
                raise ValueError("gas costs cannot be negative")
            table[name] = int(cost)
        return cls(tuple(sorted(table.items())))

    def cost(self, kind: TxKind | str) -> int:
        return dict(self.costs)[TxKind(kind).value]


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    sender: str
    kind: TxKind
    payload: bytes
    gas_charged: int
    sim_time: int

    @staticmethod
    def compute_id(sender: str, kind: TxKind | str, payload: bytes, sim_time: int) -> str:
        return hash_hex(encode_fields(sender, TxKind(kind).value, payload, sim_time))

    @classmethod
    def create(cls, sender: str, kind: TxKind | str, body: Mapping, sim_time: int, gas: GasSchedule) -> "Transaction":
        kind = TxKind(kind)
        payload = canonical_json(body)
        return cls(cls.compute_id(sender, kind, payload, sim_time), sender, kind, payload, gas.cost(kind), sim_time)

    @property
    def body(self) -> dict:
        return json.loads(self.payload)

    def id_is_valid(self) -> bool:
        return self.tx_id == self.compute_id(self.sender, self.kind, self.payload, self.sim_time)

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "sender": self.sender,
            "kind": self.kind.value,
            "payload": self.body,
            "gas_charged": self.gas_charged,
            "sim_time": self.sim_time,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Transaction":
        return cls(
            tx_id=str(data["tx_id"]),
            sender=str(data["sender"]),
            kind=TxKind(data["kind"]),
            payload=canonical_json(data["payload"]),
            gas_charged=int(data["gas_charged"]),
            sim_time=int(data["sim_time"]),
        )


def tx_root(txs: Iterable[Transaction]) -> str:
    return merkle_root([hex_to_bytes(t.tx_id) for t in txs]).hex()


def header_hash(height: int, parent_hash: str, root: str, sim_time: int) -> str:
    return hash_hex(encode_fields(height, hex_to_bytes(parent_hash), hex_to_bytes(root), sim_time))


@dataclass(frozen=True)
class Block:
    """A block header plus the certificate (proposer, round, votes) that finalized it.

    The header hash covers height, parent, tx root and time. The certificate
    is checked against the validator set on replay rather than hashed, since
    replicas can hold different but equally valid vote sets for one header.
    """

    height: int
    parent_hash: str
    tx_root: str
    proposer: str
    votes: tuple[str, ...]
    sim_time: int
    round: int = 0
    finalized_at: int = 0
    txs: tuple[Transaction, ...] = ()

    def hash(self) -> str:
        return header_hash(self.height, self.parent_hash, self.tx_root, self.sim_time)

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "parent_hash": self.parent_hash,
            "tx_root": self.tx_root,
            "proposer": self.proposer,
            "round": self.round,
            "votes": list(self.votes),
            "sim_time": self.sim_time,
            "finalized_at": self.finalized_at,
            "hash": self.hash(),
            "txs": [t.to_dict() for t in self.txs],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Block":
        return cls(
            height=int(data["height"]),
            parent_hash=str(data["parent_hash"]),
            tx_root=str(data["tx_root"]),
            proposer=str(data["proposer"]),
            votes=tuple(data["votes"]),
            sim_time=int(data["sim_time"]),
            round=int(data.get("round", 0)),
            finalized_at=int(data.get("finalized_at", data["sim_time"])),
            txs=tuple(Transaction.from_dict(t) for t in data.get("txs", ())),
        )


@dataclass
class LedgerState:
    config: dict
    gas: GasSchedule
    validators: consensus.ValidatorSet
    chain: list[Block] = field(default_factory=list)
    book: LcBook = field(default_factory=LcBook)
    accounts: Accounts = field(default_factory=Accounts)
    docs: DocStore = field(default_factory=DocStore)
    proposals: dict[str, consensus.MembershipProposal] = field(default_factory=dict)
    pending_membership: list[str] = field(default_factory=list)
    membership_log: list[dict] = field(default_factory=list)
    gas_total: dict[str, int] = field(default_factory=dict)

    @property
    def lc_registry(self):
        return self.book.registry

    @property
    def doc_roots(self) -> dict[str, str]:
        return self.docs.doc_roots

    @property
    def height(self) -> int:
        return len(self.chain) - 1

    def head_hash(self) -> str:
        return self.chain[-1].hash() if self.chain else ZERO_HASH

    def clone(self) -> "LedgerState":
        # blocks are immutable, so the chain list is copied shallowly
        return copy.deepcopy(self, memo={id(self.chain): list(self.chain)})


# -- genesis -------------------------------------------------------------------


def config_hash(config: Mapping) -> str:
    return hash_hex(canonical_json(config))


def genesis_block(config: Mapping) -> Block:
    members = tuple(config["validators"])
    return Block(
        height=0,
        parent_hash=ZERO_HASH,
        tx_root=config_hash(config),
        proposer=members[0],
        votes=tuple(sorted(members)),
        sim_time=0,
    )


def genesis_state(config: Mapping) -> LedgerState:
    """Initial state: genesis banks registered, wallets funded, bank validators seated."""
    config = json.loads(canonical_json(config))
    state = LedgerState(
        config=config,
        gas=GasSchedule.build(config.get("gas")),
        validators=consensus.ValidatorSet(tuple(config["validators"])),
    )
    rules = config.get("rules", {})
    if "gr_deadline_ticks" in rules:
        state.book.gr_deadline_ticks = int(rules["gr_deadline_ticks"])
    for party in config.get("parties", []):
        state.book.onboard_party(party["id"], party["role"], party["country"], 0)
        if party["role"] in BANK_ROLES:
            state.accounts.banks.add(party["id"])
    for basket_id, definition in sorted(config.get("baskets", {}).items()):
        state.accounts.baskets[basket_id] = BasketDefinition.from_dict(basket_id, definition)
    for entry in config.get("balances", []):
        state.accounts.fund(entry["owner"], entry["asset"], int(entry["amount"]))
    state.chain.append(genesis_block(config))
    return state


# -- transaction application ---------------------------------------------------


def _require_bank(state: LedgerState, party_id: str) -> None:
    if party_id not in state.accounts.banks:
        raise WrongBank(f"{party_id} is not a bank")


def _apply(state: LedgerState, tx: Transaction) -> None:
    book, accounts = state.book, state.accounts
    body = tx.body
    sender, tick, kind = tx.sender, tx.sim_time, tx.kind
    if sender not in book.parties:
        raise UnknownParty(sender)

    if kind is TxKind.ONBOARD_PARTY:
        if sender not in state.validators:
            raise NotAMember(f"{sender} cannot admit parties")
        party = book.onboard_party(body["id"], body["role"], body["country"], tick)
        if party.role in BANK_ROLES:
            accounts.banks.add(party.id)
    elif kind is TxKind.AGREE_TERMS:
        book.agree_terms(body["trade_ref"], sender, body["terms_hash"])
    elif kind is TxKind.ISSUE_LC:
        book.issue_lc(LcTerms.from_dict(body["terms"]), sender, tick)
    elif kind is TxKind.ADVISE_LC:
        book.advise_lc(body["token_id"], sender, tick)
    elif kind is TxKind.PRESENT_DOCS:
        docs = {k: str(v) for k, v in body["docs"].items()}
        digests = {k: hex_to_bytes(v) for k, v in sorted(docs.items())}
        book.present_docs(body["token_id"], sender, docs, tick)
        trade_ref = book.lc(body["token_id"]).terms.trade_ref
        for kind_name, digest in digests.items():
            state.docs.add_version(f"{trade_ref}/{kind_name}", digest, sender, tick)
    elif kind is TxKind.EXAM_RESULT:
        latest = len(book.presentations.get(body["token_id"], [])) - 1
        if int(body["presentation"]) != latest:
            raise WrongState(f"exam names presentation {body['presentation']}, latest is {latest}")
        book.record_exam(body["token_id"], sender, ExamResult.from_dict(body), tick)
    elif kind is TxKind.DISCREPANCY_NOTICE:
        book.notify_discrepancy(body["token_id"], sender, body["to"], list(body["codes"]), tick)
    elif kind is TxKind.FORWARD_DOCS:
        book.forward_docs(body["token_id"], sender, tick)
    elif kind is TxKind.ACCEPT_DOCS:
        lc = book.accept_docs(body["token_id"], sender, tick)
        amount = lc.terms.amount
        basket_id = body.get("basket_id") if amount.asset == BASKET else None
        if amount.asset == BASKET and basket_id not in accounts.baskets:
            raise InvalidWallet(f"unknown basket {basket_id!r}")
        accounts.add_trigger(
            SettlementTrigger(lc.token_id, lc.terms.issuing_bank, lc.terms.advising_bank, amount.asset, amount.amount, basket_id)
        )
    elif kind is TxKind.TOKEN_MINT:
        _require_bank(state, sender)
        accounts.onramp(sender, int(body["amount"]), FxQuote.from_dict(body["quote"]), body.get("lc"))
    elif kind is TxKind.TOKEN_TRANSFER:
        accounts.transfer(sender, body["to"], int(body["amount"]), body["lc"], tick)
    elif kind is TxKind.TOKEN_BURN:
        _require_bank(state, sender)
        lc_id = body.get("lc")
        credit_to = book.require_party(body["credit_to"]).id
        if lc_id is not None and book.lc(lc_id).state != ACCEPTED:
            raise WrongState(f"off-ramp for {lc_id} needs an accepted, unsettled LC")
        accounts.offramp(sender, int(body["amount"]), FxQuote.from_dict(body["quote"]), credit_to, lc_id)
        if lc_id is not None:
            book.mark_settled(lc_id, tick)
    elif kind is TxKind.ESCROW_FUND:
        _require_bank(state, sender)
        lc = book.lc(body["lc"])
        if sender != lc.terms.issuing_bank or body["beneficiary"] != lc.terms.advising_bank:
            raise WrongBank("escrow runs from the issuing bank to the advising bank")
        accounts.escrow_fund(sender, int(body["amount"]), body["beneficiary"], lc.token_id)
    elif kind is TxKind.ESCROW_RELEASE:
        lc = book.lc(body["lc"])
        if sender not in (lc.terms.issuing_bank, lc.terms.advising_bank):
            raise WrongBank(sender)
        accounts.escrow_release(lc.token_id, lc.state == ACCEPTED, FxQuote.from_dict(body["quote"]))
        book.mark_settled(lc.token_id, tick)
    elif kind is TxKind.GOVERNANCE_VOTE:
        _governance(state, sender, body, tick)
    elif kind is TxKind.COMPLIANCE_EVENT:
        _compliance(state, sender, body, tick)
    elif kind is TxKind.DA_PRESENT:
        trade = DaTrade(
            trade_ref=body["trade_ref"],
            exporter=sender,
            importer=body["importer"],
            exporter_bank=body["exporter_bank"],
            importer_bank=body["importer_bank"],
            amount=Money(int(body["amount"]["amount"]), body["amount"]["asset"]),
            doc_commitments={k: str(v) for k, v in body.get("docs", {}).items()},
        )
        book.da_present(trade, sender, tick)
    elif kind is TxKind.DA_ACCEPT:
        book.da_accept(body["trade_ref"], sender, tick)
    else:  # pragma: no cover - enum is closed
        raise InvalidProposal(f"unhandled kind {kind}")


def _governance(state: LedgerState, sender: str, body: Mapping, tick: int) -> None:
    pid = body["proposal_id"]
    members = state.validators
    if pid in state.proposals:
        proposal = consensus.vote_membership(state.proposals[pid], sender, bool(body["approve"]), members)
    else:
        subject = body["subject"]
        if body["action"] == consensus.ADD:
            if subject not in state.accounts.banks:
                raise InvalidProposal(f"{subject} must be an onboarded bank")
            if any(p.subject == subject and p.status == consensus.OPEN for p in state.proposals.values()):
                raise InvalidProposal(f"{subject} already has an open proposal")
        proposal = consensus.open_proposal(pid, body["action"], subject, sender, members)
    state.proposals[pid] = proposal
    if proposal.status == consensus.PASSED:
        state.pending_membership.append(pid)


def _compliance(state: LedgerState, sender: str, body: Mapping, tick: int) -> None:
    book = state.book
    event = body["event"]
    if event == "BRC":
        book.issue_brc(body["token_id"], sender, tick)
    elif event == "GR":
        book.submit_gr(body["token_id"], sender, tick)
    elif event == "Expire":
        book.expire_lc(body["token_id"], sender, tick)
    elif event == "DaPaid":
        book.da_paid(body["trade_ref"], sender, tick)
    elif event == "Rejected":
        book.log_event({"event": "Rejected", "actor": sender, "tick": tick, **{k: body[k] for k in ("action", "error", "detail", "ref")}})
    else:
        raise InvalidProposal(f"unknown compliance event {event!r}")


def apply_tx(state: LedgerState, tx: Transaction) -> None:
    """Apply one transaction in place (callers hand in a clone)."""
    if tx.gas_charged != state.gas.cost(tx.kind):
        raise InvalidProposal(f"gas {tx.gas_charged} does not match schedule {state.gas.cost(tx.kind)}")
    try:
        _apply(state, tx)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidProposal(f"malformed {tx.kind.value} payload: {exc!r}") from None
    state.gas_total[tx.sender] = state.gas_total.get(tx.sender, 0) + tx.gas_charged


def try_apply(state: LedgerState, tx: Transaction) -> LedgerState:
    """Return a new state with ``tx`` applied, or raise leaving ``state`` untouched."""
    trial = state.clone()
    apply_tx(trial, tx)
    return trial


def _close_block(state: LedgerState) -> None:
    for pid in state.pending_membership:
        proposal = state.proposals[pid]
        before = state.validators
        state.validators = consensus.apply_membership(before, proposal)
        state.membership_log.append(
            {"height": state.height, "proposal_id": pid, "action": proposal.action, "subject": proposal.subject, "size": len(state.validators)}
        )
    state.pending_membership = []


def check_certificate(state: LedgerState, block: Block) -> None:
    members = state.validators
    if block.proposer not in members or block.proposer != members.proposer(block.height, block.round):
        raise QuorumNotMet(f"{block.proposer} is not the proposer for height {block.height} round {block.round}")
    votes = set(block.votes)
    if len(votes) != len(block.votes) or not votes <= set(members.members):
        raise QuorumNotMet("votes must come from distinct current validators")
    if len(votes) < members.quorum:
        raise QuorumNotMet(f"{len(votes)} votes < quorum {members.quorum} of {len(members)}")


def apply_block(state: LedgerState, block: Block) -> LedgerState:
    """Validate and apply a finalized block; the input state is never modified."""
    if block.height != len(state.chain):
        raise InvalidParentHash(f"expected height {len(state.chain)}, got {block.height}")
    if block.parent_hash != state.head_hash():
        raise InvalidParentHash(f"height {block.height}: parent does not match head")
    for tx in block.txs:
        if not tx.id_is_valid():
            raise BrokenHashChain(block.height, f"tx {tx.tx_id[:12]} does not hash to its id")
    if tx_root(block.txs) != block.tx_root:
        raise BrokenHashChain(block.height, "tx_root does not match transactions")
    check_certificate(state, block)
    new = state.clone()
    for index, tx in enumerate(block.txs):
        if tx.sim_time > block.sim_time:
            raise InvalidTransaction(index, "transaction time after block time")
        try:
            apply_tx(new, tx)
        except SupernetError as exc:
            raise InvalidTransaction(index, exc) from exc
    new.chain.append(block)
    _close_block(new)
    return new


def build_block(
    state: LedgerState,
    txs: Iterable[Transaction],
    proposer: str,
    votes: Iterable[str],
    *,
    round: int = 0,
    sim_time: int | None = None,
    finalized_at: int | None = None,
) -> Block:
    txs = tuple(txs)
    when = sim_time if sim_time is not None else max([t.sim_time for t in txs] + [state.chain[-1].sim_time])
    return Block(
        height=len(state.chain),
        parent_hash=state.head_hash(),
        tx_root=tx_root(txs),
        proposer=proposer,
        votes=tuple(sorted(set(votes))),
        sim_time=when,
        round=round,
        finalized_at=when if finalized_at is None else finalized_at,
        txs=txs,
    )


def append_block(state: LedgerState, txs: Iterable[Transaction], proposer: str, votes: Iterable[str], **kwargs: Any) -> LedgerState:
    return apply_block(state, build_block(state, txs, proposer, votes, **kwargs))


def replay(genesis: Mapping, blocks: Iterable[Block]) -> LedgerState:
    blocks = list(blocks)
    state = genesis_state(genesis)
    if blocks and blocks[0].height == 0:
        if blocks[0].hash() != state.chain[0].hash():
            raise BrokenHashChain(0, "genesis block does not match config")
        blocks = blocks[1:]
    for block in blocks:
        try:
            state = apply_block(state, block)
        except InvalidParentHash as exc:
            raise BrokenHashChain(block.height, str(exc)) from exc
    return state


def total_gas(state: LedgerState, party: str) -> int:
    if party not in state.book.parties:
        raise UnknownParty(party)
    return state.gas_total.get(party, 0)


__all__ = [
    "Block",
    "GasSchedule",
    "LedgerState",
    "Transaction",
    "TxKind",
    "append_block",
    "apply_block",
    "apply_tx",
    "build_block",
    "genesis_state",
    "replay",
    "total_gas",
    "try_apply",
]
