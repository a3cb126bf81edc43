"""Digital letter-of-credit state machine, corridor compliance and the DA flow.

``LcBook`` holds every LC, presentation and compliance record. Its methods
validate fully before mutating, so a rejected call never leaves partial state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .crypto import canonical_json, encode_fields, hash_hex
from .docstore import verify_reveal
from .errors import (
    CommitmentMismatch,
    DuplicateLc,
    DuplicateParty,
    InvalidRole,
    InvalidTerms,
    NotAdvisingBank,
    NotBeneficiary,
    NotIndianBank,
    NotSettled,
    UnknownLc,
    UnknownParty,
    WrongBank,
    WrongState,
)

IMPORTER = "Importer"
EXPORTER = "Exporter"
ISSUING_BANK = "IssuingBank"
ADVISING_BANK = "AdvisingBank"
ROLES = (IMPORTER, EXPORTER, ISSUING_BANK, ADVISING_BANK)
BANK_ROLES = (ISSUING_BANK, ADVISING_BANK)

DOC_KINDS = ("Invoice", "BillOfLading", "PackingList", "CertificateOfOrigin", "InsuranceCertificate")

MISSING_DOCUMENT = "MissingDocument"
LATE_SHIPMENT = "LateShipment"
LATE_PRESENTATION = "LatePresentation"
AMOUNT_EXCEEDED = "AmountExceeded"
EXPIRED_LC = "ExpiredLc"
DISCREPANCY_CODES = (MISSING_DOCUMENT, LATE_SHIPMENT, LATE_PRESENTATION, AMOUNT_EXCEEDED, EXPIRED_LC)

RULE_TABLE_ID = "exam-rules/v1"

DRAFTED = "Drafted"
ISSUED = "Issued"
ADVISED = "Advised"
DOCS_PRESENTED = "DocsPresented"
DISCREPANCY_RAISED = "DiscrepancyRaised"
COMPLIANT = "Compliant"
DOCS_FORWARDED = "DocsForwarded"
ACCEPTED = "Accepted"
SETTLED = "Settled"
EXPIRED = "Expired"
REJECTED = "Rejected"

TRANSITIONS: dict[str, frozenset[str]] = {
    DRAFTED: frozenset({ISSUED}),
    ISSUED: frozenset({ADVISED}),
    ADVISED: frozenset({DOCS_PRESENTED, EXPIRED}),
    DOCS_PRESENTED: frozenset({COMPLIANT, DISCREPANCY_RAISED, EXPIRED}),
    DISCREPANCY_RAISED: frozenset({DOCS_PRESENTED}),
    COMPLIANT: frozenset({DOCS_FORWARDED}),
    DOCS_FORWARDED: frozenset({ACCEPTED, DISCREPANCY_RAISED}),
    ACCEPTED: frozenset({SETTLED}),
}

PENDING = "Pending"
CLEAN = "Clean"
DISCREPANT = "Discrepant"
VOIDED = "Voided"

TICKS_PER_DAY = 24
GR_DEADLINE_TICKS = 21 * TICKS_PER_DAY
INDIA = "IN"
BRAZIL = "BR"


@dataclass(frozen=True)
class Party:
    id: str
    role: str
    country: str
    onboarded_at: int = 0

    def to_dict(self) -> dict:
        return {"id": self.id, "role": self.role, "country": self.country, "onboarded_at": self.onboarded_at}


@dataclass(frozen=True)
class Money:
    amount: int
    asset: str

    def to_dict(self) -> dict:
        return {"amount": self.amount, "asset": self.asset}


@dataclass(frozen=True)
class LcTerms:
    trade_ref: str
    applicant: str
    beneficiary: str
    issuing_bank: str
    advising_bank: str
    amount: Money
    expiry_tick: int
    latest_shipment_tick: int
    required_docs: frozenset[str]
    tenor: str = "Sight"
    amount_tolerance_bps: int = 0

    def validate(self) -> None:
        if self.latest_shipment_tick > self.expiry_tick:
            raise InvalidTerms("latest shipment falls after expiry")
        if self.amount.amount <= 0:
            raise InvalidTerms("amount must be positive")
        if not self.required_docs:
            raise InvalidTerms("at least one document must be required")
        unknown = set(self.required_docs) - set(DOC_KINDS)
        if unknown:
            raise InvalidTerms(f"unknown document kinds {sorted(unknown)}")
        if self.amount_tolerance_bps < 0:
            raise InvalidTerms("tolerance cannot be negative")
        if self.tenor != "Sight" and not (self.tenor.startswith("Usance:") and self.tenor[7:].isdigit()):
            raise InvalidTerms(f"bad tenor {self.tenor!r}")

    def encode(self) -> bytes:
        return encode_fields(
            self.trade_ref,
            self.applicant,
            self.beneficiary,
            self.issuing_bank,
            self.advising_bank,
            self.amount.amount,
            self.amount.asset,
            self.expiry_tick,
            self.latest_shipment_tick,
            [k for k in DOC_KINDS if k in self.required_docs],
            self.tenor,
            self.amount_tolerance_bps,
        )

    def token_id(self) -> str:
        return hash_hex(self.encode())

    def max_amount_ok(self, invoiced: int) -> bool:
        return invoiced * 10000 <= self.amount.amount * (10000 + self.amount_tolerance_bps)

    def to_dict(self) -> dict:
        return {
            "trade_ref": self.trade_ref,
            "applicant": self.applicant,
            "beneficiary": self.beneficiary,
            "issuing_bank": self.issuing_bank,
            "advising_bank": self.advising_bank,
            "amount": self.amount.to_dict(),
            "expiry_tick": self.expiry_tick,
            "latest_shipment_tick": self.latest_shipment_tick,
            "required_docs": [k for k in DOC_KINDS if k in self.required_docs],
            "tenor": self.tenor,
            "amount_tolerance_bps": self.amount_tolerance_bps,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LcTerms":
        try:
            return cls(
                trade_ref=str(data["trade_ref"]),
                applicant=str(data["applicant"]),
                beneficiary=str(data["beneficiary"]),
                issuing_bank=str(data["issuing_bank"]),
                advising_bank=str(data["advising_bank"]),
                amount=Money(int(data["amount"]["amount"]), str(data["amount"]["asset"])),
                expiry_tick=int(data["expiry_tick"]),
                latest_shipment_tick=int(data["latest_shipment_tick"]),
                required_docs=frozenset(data["required_docs"]),
                tenor=str(data.get("tenor", "Sight")),
                amount_tolerance_bps=int(data.get("amount_tolerance_bps", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTerms(f"malformed terms: {exc}") from None


@dataclass
class NftLc:
    token_id: str
    terms: LcTerms
    state: str = DRAFTED
    state_history: list[tuple[str, int]] = field(default_factory=list)

    def move(self, new_state: str, tick: int) -> None:
        if new_state not in TRANSITIONS.get(self.state, ()):
            raise WrongState(f"{self.terms.trade_ref}: {self.state} -> {new_state} not allowed")
        self.state = new_state
        self.state_history.append((new_state, tick))


@dataclass(frozen=True)
class ExamResult:
    codes: tuple[str, ...] = ()
    voided: bool = False
    rule_id: str = RULE_TABLE_ID

    @property
    def clean(self) -> bool:
        return not self.codes and not self.voided

    @property
    def label(self) -> str:
        if self.voided:
            return VOIDED
        return CLEAN if self.clean else DISCREPANT

    def to_dict(self) -> dict:
        return {"result": self.label, "codes": list(self.codes), "rule_id": self.rule_id}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExamResult":
        codes = tuple(data.get("codes", ()))
        if any(c not in DISCREPANCY_CODES for c in codes):
            raise WrongState(f"unknown discrepancy code in {codes}")
        label = data["result"]
        result = cls(codes=codes, voided=label == VOIDED, rule_id=str(data.get("rule_id", RULE_TABLE_ID)))
        if result.label != label:
            raise WrongState(f"result {label!r} inconsistent with codes {codes}")
        return result


@dataclass
class Presentation:
    lc: str
    doc_commitments: dict[str, str]
    presented_at: int
    exam_result: str = PENDING
    codes: tuple[str, ...] = ()
    rule_id: str | None = None
    issuing_result: str = PENDING
    issuing_codes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "lc": self.lc,
            "doc_commitments": dict(sorted(self.doc_commitments.items())),
            "presented_at": self.presented_at,
            "exam_result": self.exam_result,
            "codes": list(self.codes),
            "rule_id": self.rule_id,
            "issuing_result": self.issuing_result,
            "issuing_codes": list(self.issuing_codes),
        }


@dataclass
class ComplianceRecord:
    lc: str
    gr_deadline_ticks: int = GR_DEADLINE_TICKS
    gr_submitted_at: int | None = None
    brc_issued_at: int | None = None
    brc_issuer: str | None = None
    settled_at: int | None = None

    @property
    def gr_compliant(self) -> bool | None:
        """None until both the settlement and the GR submission exist."""
        if self.gr_submitted_at is None or self.settled_at is None:
            return None
        return self.gr_submitted_at <= self.settled_at + self.gr_deadline_ticks

    def flags(self) -> list[str]:
        out = []
        if self.settled_at is not None:
            if self.brc_issued_at is None:
                out.append("MissingBRC")
            if self.gr_submitted_at is None:
                out.append("MissingGR")
            elif not self.gr_compliant:
                out.append("LateGR")
        return out

    def to_dict(self) -> dict:
        return {
            "lc": self.lc,
            "gr_deadline_ticks": self.gr_deadline_ticks,
            "gr_submitted_at": self.gr_submitted_at,
            "gr_compliant": self.gr_compliant,
            "brc_issued_at": self.brc_issued_at,
            "brc_issuer": self.brc_issuer,
            "settled_at": self.settled_at,
            "flags": self.flags(),
        }


# -- document examination ---------------------------------------------------


def doc_content(kind: str, metadata: Mapping) -> bytes:
    return canonical_json({"kind": kind, **metadata})


def reveal_documents(presentation: Presentation, reveals: Mapping[str, tuple[bytes, bytes]]) -> dict[str, dict]:
    """Check each ``(salt, content)`` against its on-chain commitment and decode it."""
    metadata = {}
    for kind, digest in presentation.doc_commitments.items():
        if kind not in reveals:
            raise CommitmentMismatch(f"no reveal for committed {kind}")
        salt, content = reveals[kind]
        if not verify_reveal(digest, salt, content):
            raise CommitmentMismatch(f"{kind} content does not match its commitment")
        body = json.loads(content)
        if body.pop("kind", None) != kind:
            raise CommitmentMismatch(f"{kind} reveal is labelled as another kind")
        metadata[kind] = body
    return metadata


def examine_docs(presentation: Presentation, terms: LcTerms, doc_metadata: Mapping[str, Mapping]) -> ExamResult:
    """Apply the four examination rules; every violated code is reported."""
    violated = set()
    if not set(terms.required_docs) <= set(doc_metadata):
        violated.add(MISSING_DOCUMENT)
    invoice = doc_metadata.get("Invoice")
    if invoice is not None:
        if invoice.get("asset", terms.amount.asset) != terms.amount.asset or not terms.max_amount_ok(
            int(invoice["amount"])
        ):
            violated.add(AMOUNT_EXCEEDED)
    bill = doc_metadata.get("BillOfLading")
    if bill is not None and int(bill["shipment_tick"]) > terms.latest_shipment_tick:
        violated.add(LATE_SHIPMENT)
    if presentation.presented_at > terms.expiry_tick:
        violated.update((LATE_PRESENTATION, EXPIRED_LC))
    return ExamResult(tuple(c for c in DISCREPANCY_CODES if c in violated))


# -- the book ----------------------------------------------------------------


@dataclass
class LcBook:
    parties: dict[str, Party] = field(default_factory=dict)
    registry: dict[str, NftLc] = field(default_factory=dict)
    tokens: dict[str, str] = field(default_factory=dict)
    agreements: dict[str, dict[str, str]] = field(default_factory=dict)
    presentations: dict[str, list[Presentation]] = field(default_factory=dict)
    compliance: dict[str, ComplianceRecord] = field(default_factory=dict)
    da_trades: dict[str, "DaTrade"] = field(default_factory=dict)
    notices: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    gr_deadline_ticks: int = GR_DEADLINE_TICKS

    # parties
    def onboard_party(self, party_id: str, role: str, country: str, tick: int = 0) -> Party:
        if role not in ROLES:
            raise InvalidRole(role)
        if party_id in self.parties:
            raise DuplicateParty(party_id)
        if not party_id:
            raise InvalidRole("empty party id")
        party = Party(party_id, role, country, tick)
        self.parties[party_id] = party
        return party

    def require_party(self, party_id: str) -> Party:
        try:
            return self.parties[party_id]
        except KeyError:
            raise UnknownParty(party_id) from None

    def lc(self, token_id: str) -> NftLc:
        try:
            return self.registry[self.tokens[token_id]]
        except KeyError:
            raise UnknownLc(token_id) from None

    def latest_presentation(self, token_id: str) -> Presentation:
        items = self.presentations.get(token_id)
        if not items:
            raise WrongState("no presentation on record")
        return items[-1]

    # steps 2-4
    def agree_terms(self, trade_ref: str, party_id: str, terms_hash: str) -> None:
        party = self.require_party(party_id)
        if party.role not in (IMPORTER, EXPORTER):
            raise InvalidRole(f"{party_id} is not a trading party")
        current = self.agreements.get(trade_ref, {})
        if party_id in current:
            raise WrongState(f"{party_id} already agreed {trade_ref}")
        self.agreements[trade_ref] = {**current, party_id: terms_hash}

    def issue_lc(self, terms: LcTerms, sender: str, tick: int) -> NftLc:
        self.require_party(sender)
        if sender != terms.issuing_bank:
            raise WrongBank(f"{sender} is not the issuing bank named in the terms")
        if terms.trade_ref in self.registry:
            raise DuplicateLc(terms.trade_ref)
        terms.validate()
        roles = {
            terms.applicant: IMPORTER,
            terms.beneficiary: EXPORTER,
            terms.issuing_bank: ISSUING_BANK,
            terms.advising_bank: ADVISING_BANK,
        }
        if len(roles) != 4:
            raise InvalidTerms("the four parties must be distinct")
        for party_id, role in roles.items():
            party = self.parties.get(party_id)
            if party is None or party.role != role:
                raise InvalidTerms(f"{party_id} is not an onboarded {role}")
        token_id = terms.token_id()
        lc = NftLc(token_id, terms, DRAFTED, [(DRAFTED, tick)])
        lc.move(ISSUED, tick)
        self.registry[terms.trade_ref] = lc
        self.tokens[token_id] = terms.trade_ref
        self.compliance[token_id] = ComplianceRecord(token_id, self.gr_deadline_ticks)
        return lc

    def advise_lc(self, token_id: str, sender: str, tick: int) -> NftLc:
        lc = self.lc(token_id)
        if lc.state != ISSUED:
            raise WrongState(f"cannot advise from {lc.state}")
        if sender != lc.terms.advising_bank:
            raise NotAdvisingBank(sender)
        lc.move(ADVISED, tick)
        return lc

    # steps 5-8
    def present_docs(self, token_id: str, sender: str, docs: Mapping[str, str], tick: int) -> Presentation:
        lc = self.lc(token_id)
        if lc.state not in (ADVISED, DISCREPANCY_RAISED):
            raise WrongState(f"cannot present from {lc.state}")
        if sender != lc.terms.beneficiary:
            raise NotBeneficiary(sender)
        unknown = set(docs) - set(DOC_KINDS)
        if unknown:
            raise WrongState(f"unknown document kinds {sorted(unknown)}")
        presentation = Presentation(token_id, dict(docs), tick)
        lc.move(DOCS_PRESENTED, tick)
        self.presentations.setdefault(token_id, []).append(presentation)
        return presentation

    def record_exam(self, token_id: str, examiner: str, result: ExamResult, tick: int) -> Presentation:
        lc = self.lc(token_id)
        terms = lc.terms
        if lc.state == DOCS_PRESENTED:
            if examiner != terms.advising_bank:
                raise WrongBank(f"{examiner} cannot examine at the advising stage")
            presentation = self.latest_presentation(token_id)
            lc.move(COMPLIANT if result.clean else DISCREPANCY_RAISED, tick)
            presentation.exam_result = result.label
            presentation.codes = result.codes
            presentation.rule_id = result.rule_id
            return presentation
        if lc.state == DOCS_FORWARDED:
            if examiner != terms.issuing_bank:
                raise WrongBank(f"{examiner} cannot examine forwarded documents")
            presentation = self.latest_presentation(token_id)
            if presentation.issuing_result != PENDING:
                raise WrongState("issuing bank already examined this presentation")
            if not result.clean:
                lc.move(DISCREPANCY_RAISED, tick)
            presentation.issuing_result = result.label
            presentation.issuing_codes = result.codes
            return presentation
        raise WrongState(f"nothing to examine in state {lc.state}")

    def notify_discrepancy(self, token_id: str, sender: str, to: str, codes: list[str], tick: int) -> dict:
        lc = self.lc(token_id)
        banks = (lc.terms.issuing_bank, lc.terms.advising_bank)
        if sender not in banks:
            raise WrongBank(f"{sender} is not a bank on this LC")
        if to not in (lc.terms.issuing_bank, lc.terms.advising_bank, lc.terms.beneficiary, lc.terms.applicant):
            raise UnknownParty(to)
        if any(c not in DISCREPANCY_CODES for c in codes):
            raise WrongState(f"unknown discrepancy codes {codes}")
        notice = {"lc": token_id, "from": sender, "to": to, "codes": list(codes), "tick": tick}
        self.notices.append(notice)
        return notice

    def forward_docs(self, token_id: str, sender: str, tick: int) -> NftLc:
        lc = self.lc(token_id)
        if lc.state != COMPLIANT:
            raise WrongState(f"cannot forward from {lc.state}")
        if sender != lc.terms.advising_bank:
            raise WrongBank(f"{sender} is not the advising bank")
        lc.move(DOCS_FORWARDED, tick)
        return lc

    def accept_docs(self, token_id: str, sender: str, tick: int) -> NftLc:
        lc = self.lc(token_id)
        if lc.state != DOCS_FORWARDED:
            raise WrongState(f"cannot accept from {lc.state}")
        if sender != lc.terms.issuing_bank:
            raise WrongBank(f"{sender} is not the issuing bank")
        if self.latest_presentation(token_id).issuing_result != CLEAN:
            raise WrongState("issuing bank has not passed its own examination")
        lc.move(ACCEPTED, tick)
        return lc

    def expire_lc(self, token_id: str, sender: str, tick: int) -> NftLc:
        lc = self.lc(token_id)
        if sender not in (lc.terms.issuing_bank, lc.terms.advising_bank):
            raise WrongBank(sender)
        if tick <= lc.terms.expiry_tick:
            raise WrongState("LC has not expired yet")
        if lc.state not in (ADVISED, DOCS_PRESENTED):
            raise WrongState(f"cannot expire from {lc.state}")
        lc.move(EXPIRED, tick)
        return lc

    def mark_settled(self, token_id: str, tick: int) -> bool:
        """Move an Accepted LC to Settled; repeated calls change nothing."""
        lc = self.lc(token_id)
        if lc.state == SETTLED:
            return False
        if lc.state != ACCEPTED:
            raise WrongState(f"cannot settle from {lc.state}")
        lc.move(SETTLED, tick)
        self.compliance[token_id].settled_at = tick
        return True

    # corridor compliance
    def issue_brc(self, token_id: str, issuer: str, tick: int) -> ComplianceRecord:
        lc = self.lc(token_id)
        party = self.require_party(issuer)
        if issuer != lc.terms.advising_bank or party.country != INDIA:
            raise NotIndianBank(f"{issuer} cannot issue a BRC for {lc.terms.trade_ref}")
        if lc.state != SETTLED:
            raise NotSettled(lc.terms.trade_ref)
        record = self.compliance[token_id]
        if record.brc_issued_at is not None:
            raise WrongState("BRC already issued")
        record.brc_issued_at = tick
        record.brc_issuer = issuer
        return record

    def submit_gr(self, token_id: str, sender: str, tick: int) -> ComplianceRecord:
        lc = self.lc(token_id)
        if sender != lc.terms.beneficiary:
            raise NotBeneficiary(sender)
        record = self.compliance[token_id]
        if record.gr_submitted_at is not None:
            raise WrongState("GR form already submitted")
        record.gr_submitted_at = tick
        return record

    def log_event(self, event: dict) -> None:
        self.events.append(event)

    # documentary acceptance
    def da_present(self, trade: "DaTrade", sender: str, tick: int) -> "DaTrade":
        if trade.trade_ref in self.da_trades or trade.trade_ref in self.registry:
            raise DuplicateLc(trade.trade_ref)
        if sender != trade.exporter:
            raise NotBeneficiary(sender)
        for party_id, role in (
            (trade.exporter, EXPORTER),
            (trade.importer, IMPORTER),
            (trade.exporter_bank, ADVISING_BANK),
            (trade.importer_bank, ISSUING_BANK),
        ):
            party = self.parties.get(party_id)
            if party is None or party.role != role:
                raise InvalidTerms(f"{party_id} is not an onboarded {role}")
        stored = DaTrade(**{**trade.__dict__, "state": DA_PRESENTED, "timing": {DA_PRESENTED: tick}})
        self.da_trades[trade.trade_ref] = stored
        return stored

    def da_accept(self, trade_ref: str, sender: str, tick: int) -> "DaTrade":
        trade = self._da(trade_ref)
        if trade.state != DA_PRESENTED:
            raise WrongState(f"DA {trade_ref} is {trade.state}")
        if sender != trade.importer:
            raise WrongBank(f"{sender} is not the drawee")
        trade.state = DA_ACCEPTED
        trade.title_holder = trade.importer
        trade.timing[DA_ACCEPTED] = tick
        return trade

    def da_paid(self, trade_ref: str, sender: str, tick: int) -> "DaTrade":
        trade = self._da(trade_ref)
        if trade.state != DA_ACCEPTED:
            raise WrongState(f"DA {trade_ref} is {trade.state}")
        if sender != trade.exporter_bank:
            raise WrongBank(f"{sender} is not the remitting bank")
        trade.state = DA_PAID
        trade.timing[DA_PAID] = tick
        return trade

    def _da(self, trade_ref: str) -> "DaTrade":
        try:
            return self.da_trades[trade_ref]
        except KeyError:
            raise UnknownLc(trade_ref) from None


# -- documentary acceptance timing ----------------------------------------------

DA_PRESENTED = "DocsPresented"
DA_ACCEPTED = "Accepted"
DA_PAID = "Paid"


@dataclass
class DaTrade:
    trade_ref: str
    exporter: str
    importer: str
    exporter_bank: str
    importer_bank: str
    amount: Money
    doc_commitments: dict[str, str] = field(default_factory=dict)
    state: str = "New"
    title_holder: str = ""
    timing: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.title_holder:
            self.title_holder = self.exporter

    def to_dict(self) -> dict:
        return {
            "trade_ref": self.trade_ref,
            "exporter": self.exporter,
            "importer": self.importer,
            "exporter_bank": self.exporter_bank,
            "importer_bank": self.importer_bank,
            "amount": self.amount.to_dict(),
            "doc_commitments": dict(sorted(self.doc_commitments.items())),
            "state": self.state,
            "title_holder": self.title_holder,
            "timing": dict(self.timing),
        }


@dataclass(frozen=True)
class DaDurations:
    docs_transit: int = 3 * TICKS_PER_DAY
    acceptance: int = 2 * TICKS_PER_DAY
    payment: int = 1 * TICKS_PER_DAY
    acceptance_delay: int = 0
    fee_bps: int = 50

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "DaDurations":
        return cls(**{k: int(v) for k, v in (data or {}).items()})


@dataclass(frozen=True)
class DaStep:
    name: str
    actor: str
    tick: int


@dataclass(frozen=True)
class DaTranscript:
    trade_ref: str
    steps: tuple[DaStep, ...]
    total_ticks: int
    fee: int


def run_da_flow(trade: DaTrade, durations: DaDurations = DaDurations(), start_tick: int = 0) -> DaTranscript:
    """Timed DA schedule: presentation, acceptance (with any injected delay), payment."""
    accepted = start_tick + durations.docs_transit + durations.acceptance + durations.acceptance_delay
    paid = accepted + durations.payment
    steps = (
        DaStep(DA_PRESENTED, trade.exporter, start_tick),
        DaStep(DA_ACCEPTED, trade.importer, accepted),
        DaStep(DA_PAID, trade.exporter_bank, paid),
    )
    fee = trade.amount.amount * durations.fee_bps // 10000
    return DaTranscript(trade.trade_ref, steps, paid - start_tick, fee)


@dataclass(frozen=True)
class LcBaseline:
    """Manual-process step durations for the current SWIFT-based LC path."""

    swift_issuance: int = 1 * TICKS_PER_DAY
    manual_exam: int = 5 * TICKS_PER_DAY
    courier: int = 3 * TICKS_PER_DAY
    issuing_exam: int = 5 * TICKS_PER_DAY
    swift_payment: int = 1 * TICKS_PER_DAY

    @property
    def presentation_negotiation(self) -> int:
        return self.manual_exam + self.courier + self.issuing_exam

    @property
    def total(self) -> int:
        return self.swift_issuance + self.presentation_negotiation + self.swift_payment

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "LcBaseline":
        return cls(**{k: int(v) for k, v in (data or {}).items()})

    def to_dict(self) -> dict:
        return {
            "swift_issuance": self.swift_issuance,
            "manual_exam": self.manual_exam,
            "courier": self.courier,
            "issuing_exam": self.issuing_exam,
            "swift_payment": self.swift_payment,
        }
