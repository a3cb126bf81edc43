"""Independent audit of a transcript.

Unlike :func:`ledger.replay`, the audit does not stop at the first fault:
it collects every violation it can find. Replay continues as long as the
chain is intact; structural and conservation checks run on every line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .docstore import verify_reveal
from .errors import CommitmentMismatch, SupernetError
from .ledger import Block, LedgerState, TxKind, apply_block, genesis_state, tx_root
from .settlement import supply_violations
from .transcript import load_transcript
from .workflow import VOIDED, ExamResult, examine_docs, reveal_documents


@dataclass
class Verdict:
    heights: int = 0
    violations: list[str] = field(default_factory=list)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"clean": self.clean, "heights": self.heights, "checked": dict(sorted(self.checked.items())), "violations": self.violations}

    def _count(self, what: str, n: int = 1) -> None:
        self.checked[what] = self.checked.get(what, 0) + n


def _recorded_supply(verdict: Verdict, height: int, settlement: dict) -> None:
    supply = settlement.get("supply", {})
    for problem in supply_violations(supply):
        verdict.violations.append(f"height {height}: conservation: {problem}")
    for asset, s in sorted(supply.items()):
        held = sum(w.get(asset, 0) for w in settlement.get("balances", {}).values())
        if held != s["balances"]:
            verdict.violations.append(f"height {height}: conservation: {asset} balances sum to {held}, supply records {s['balances']}")


def _structure(verdict: Verdict, block: Block, recorded: dict, prev_hash: str) -> bool:
    h = block.height
    ok = True
    for i, tx in enumerate(block.txs):
        if not tx.id_is_valid():
            verdict.violations.append(f"height {h}: hash chain: tx {i} does not hash to its id")
            ok = False
    if tx_root(block.txs) != block.tx_root:
        verdict.violations.append(f"height {h}: hash chain: tx_root does not match transactions")
        ok = False
    if recorded.get("hash") != block.hash():
        verdict.violations.append(f"height {h}: hash chain: recorded header hash is wrong")
        ok = False
    if block.parent_hash != prev_hash:
        verdict.violations.append(f"height {h}: hash chain: parent does not link to height {h - 1}")
        ok = False
    return ok


def _reveals(verdict: Verdict, state: LedgerState, reveals: list[tuple[int, dict]]) -> dict:
    """Check each reveal against its commitment; return them grouped for exam checks."""
    grouped: dict[tuple[str, str, int], dict] = {}
    book = state.book
    for height, r in reveals:
        token, index, kind = r["token_id"], int(r["presentation"]), r["kind"]
        voided = False
        if token in book.da_trades:
            commitments = book.da_trades[token].doc_commitments
        else:
            items = book.presentations.get(token, [])
            if index >= len(items):
                verdict.violations.append(f"height {height}: reveal for unknown presentation {token[:12]}#{index}")
                continue
            commitments = items[index].doc_commitments
            voided = VOIDED in (items[index].exam_result, items[index].issuing_result)
        salt, content = bytes.fromhex(r["salt"]), r["content"].encode()
        verdict._count("reveals")
        if kind not in commitments or not verify_reveal(commitments[kind], salt, content):
            if not voided:
                verdict.violations.append(f"height {height}: reveal of {kind} for {token[:12]} does not match its commitment")
        grouped.setdefault((r["to"], token, index), {})[kind] = (salt, content)
    return grouped


def _exams(verdict: Verdict, state: LedgerState, blocks: list[Block], grouped: dict) -> None:
    for block in blocks:
        for tx in block.txs:
            if tx.kind is not TxKind.EXAM_RESULT:
                continue
            body = tx.body
            token, index = body["token_id"], int(body["presentation"])
            presentation = state.book.presentations[token][index]
            terms = state.book.lc(token).terms
            try:
                expected = examine_docs(presentation, terms, reveal_documents(presentation, grouped.get((tx.sender, token, index), {})))
            except CommitmentMismatch:
                expected = ExamResult(voided=True)
            verdict._count("exams")
            if ExamResult.from_dict(body) != expected:
                verdict.violations.append(
                    f"height {block.height}: exam of {token[:12]}#{index} recorded {body['result']} but rules give {expected.label}"
                )


def _proofs(verdict: Verdict, state: LedgerState) -> None:
    # audit() rebuilds every chain, root and inclusion proof
    for problem in state.docs.audit():
        verdict.violations.append(f"docstore: {problem}")
    verdict._count("proofs", sum(len(v) for v in state.docs.histories.values()))


def verify(source: str | Path | list[str]) -> Verdict:
    verdict = Verdict()
    try:
        transcript = load_transcript(source)
    except SupernetError as exc:
        verdict.violations.append(f"unreadable transcript: {exc}")
        return verdict
    try:
        state = genesis_state(transcript.genesis["config"])
    except (SupernetError, KeyError, TypeError, ValueError) as exc:
        verdict.violations.append(f"height 0: bad genesis config: {exc}")
        return verdict
    recorded_genesis = transcript.genesis.get("block", {})
    if recorded_genesis.get("hash") != state.chain[0].hash() or Block.from_dict(recorded_genesis) != state.chain[0]:
        verdict.violations.append("height 0: hash chain: genesis block does not match its config")
    _recorded_supply(verdict, 0, transcript.genesis.get("settlement", {}))
    prev_hash = recorded_genesis.get("hash", "")
    live = True
    blocks: list[Block] = []
    reveals: list[tuple[int, dict]] = []
    for record in transcript.records:
        try:
            block = Block.from_dict(record["block"])
        except (KeyError, TypeError, ValueError) as exc:
            verdict.violations.append(f"malformed block record: {exc!r}")
            live = False
            continue
        verdict.heights += 1
        intact = _structure(verdict, block, record["block"], prev_hash)
        prev_hash = record["block"].get("hash", "")
        settlement = record.get("settlement", {})
        _recorded_supply(verdict, block.height, settlement)
        if not (live and intact):
            live = False
            continue
        try:
            state = apply_block(state, block)
        except SupernetError as exc:
            verdict.violations.append(f"height {block.height}: replay rejected block: {exc}")
            live = False
            continue
        blocks.append(block)
        reveals += [(block.height, r) for r in record.get("private", [])]
        if state.accounts.snapshot() != settlement:
            verdict.violations.append(f"height {block.height}: conservation: recorded settlement differs from replay")
        for problem in state.accounts.conservation_violations():
            verdict.violations.append(f"height {block.height}: conservation: {problem}")
    if live:
        grouped = _reveals(verdict, state, reveals)
        _exams(verdict, state, blocks, grouped)
        _proofs(verdict, state)
    return verdict
