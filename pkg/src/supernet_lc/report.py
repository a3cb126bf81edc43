"""Run reports, computed only from a transcript.

``build_report`` replays the transcript and derives every section from the
replayed state and the blocks, so regenerating a report from a saved
transcript reproduces it byte-for-byte.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .analytics import DEFAULT_REQUESTS, bundled_fixture, index_report, load_table, round3
from .ledger import Block, LedgerState, TxKind
from .transcript import load_transcript
from .workflow import TICKS_PER_DAY, DaDurations, DaTrade, LcBaseline, Money, run_da_flow

LC_MESSAGE_KINDS = (
    TxKind.ISSUE_LC,
    TxKind.ADVISE_LC,
    TxKind.PRESENT_DOCS,
    TxKind.EXAM_RESULT,
    TxKind.DISCREPANCY_NOTICE,
    TxKind.FORWARD_DOCS,
    TxKind.ACCEPT_DOCS,
)
DA_DAYS = (5, 7)
LC_WEEKS = (1, 2)


def _days(ticks: int) -> str:
    return str(round3(Fraction(ticks, TICKS_PER_DAY)))


def _tx_ref(state: LedgerState, body: dict) -> str:
    token = body.get("token_id") or body.get("lc")
    if token and token in state.book.tokens:
        return state.book.tokens[token]
    if "terms" in body:
        return body["terms"]["trade_ref"]
    return body.get("trade_ref") or body.get("ref") or body.get("id") or body.get("proposal_id") or ""


def _event(tx_kind: TxKind, body: dict) -> str:
    if tx_kind is TxKind.COMPLIANCE_EVENT:
        if body["event"] == "Rejected":
            return f"Rejected {body['action']}: {body['error']}"
        return body["event"]
    if tx_kind is TxKind.EXAM_RESULT:
        return f"ExamResult {body['result']}"
    return tx_kind.value


def _timeline(state: LedgerState, blocks: list[Block]) -> list[dict]:
    return [
        {"height": b.height, "tick": tx.sim_time, "actor": tx.sender, "event": _event(tx.kind, tx.body), "ref": _tx_ref(state, tx.body)}
        for b in blocks
        for tx in b.txs
    ]


def _lcs(state: LedgerState) -> dict:
    book = state.book
    out = {}
    for ref, lc in sorted(book.registry.items()):
        out[ref] = {
            "token_id": lc.token_id,
            "state": lc.state,
            "history": [[s, t] for s, t in lc.state_history],
            "amount": lc.terms.amount.to_dict(),
            "presentations": [p.to_dict() for p in book.presentations.get(lc.token_id, [])],
        }
    return out


def _discrepancies(state: LedgerState) -> list[dict]:
    book = state.book
    return [{**n, "lc": book.tokens.get(n["lc"], n["lc"])} for n in book.notices]


def _gas(state: LedgerState, blocks: list[Block]) -> dict:
    per_party = {p: state.gas_total.get(p, 0) for p in sorted(state.book.parties)}
    total = sum(tx.gas_charged for b in blocks for tx in b.txs)
    return {"per_party": per_party, "total": total, "balanced": sum(per_party.values()) == total}


def _settlement(state: LedgerState) -> dict:
    accounts = state.accounts
    return {
        "per_lc": {state.book.tokens.get(lc, lc): hops for lc, hops in sorted(accounts.hops.items())},
        "escrows": {state.book.tokens.get(k, k): e.to_dict() for k, e in sorted(accounts.escrows.items())},
        "final": accounts.snapshot(),
        "conservation_violations": accounts.conservation_violations(),
    }


def _compliance(state: LedgerState) -> dict:
    return {state.book.tokens[k]: r.to_dict() for k, r in sorted(state.book.compliance.items())}


def _fraud(state: LedgerState) -> list[dict]:
    return [{**e, "fraud": e["error"] == "DuplicateLc"} for e in state.book.events if e.get("event") == "Rejected"]


def _consensus(genesis: dict, records: list[dict], blocks: list[Block], state: LedgerState) -> dict:
    timeouts = sum(len(r.get("consensus", [])) for r in records)
    proposers: dict[str, int] = {}
    for b in blocks:
        proposers[b.proposer] = proposers.get(b.proposer, 0) + 1
    return {
        "blocks": len(blocks),
        "first_round_blocks": sum(1 for b in blocks if b.round == 0),
        "round_timeouts": timeouts,
        "min_votes": min((len(b.votes) for b in blocks), default=0),
        "proposers": dict(sorted(proposers.items())),
        "silent": sorted(genesis.get("faults", {}).get("silent", [])),
        "partitions": genesis.get("network", {}).get("partitions", []),
        "validators": list(state.validators.members),
        "quorum": state.validators.quorum,
        "membership_changes": state.membership_log,
        "proposals": {k: p.to_dict() for k, p in sorted(state.proposals.items())},
    }


def _supernet_steps(state: LedgerState, blocks: list[Block], courier_ticks: int) -> dict:
    per_lc: dict[str, list[dict]] = {}
    for b in blocks:
        for tx in b.txs:
            if tx.kind in LC_MESSAGE_KINDS:
                ref = _tx_ref(state, tx.body)
                # a step occupies one finalized block; latency counts the block's own tick
                per_lc.setdefault(ref, []).append(
                    {"step": _event(tx.kind, tx.body), "height": b.height, "blocks": 1, "ticks": b.finalized_at - b.sim_time + 1}
                )
    out = {}
    for ref, steps in sorted(per_lc.items()):
        presented = [s["height"] for s in steps if s["step"] == "PresentDocs"]
        accepted = [s for s in steps if s["step"] == "AcceptDocs"]
        ticks = None
        courier = None
        if presented and accepted:
            first = next(b for b in blocks if b.height == presented[0])
            last = next(b for b in blocks if b.height == accepted[-1]["height"])
            ticks = last.finalized_at - first.sim_time + 1
            # physical title documents still travel by courier; nothing on-chain waits for them
            courier = {"off_chain": True, "ticks": courier_ticks, "dispatched": last.finalized_at, "arrives": last.finalized_at + courier_ticks}
        out[ref] = {
            "steps": steps,
            "max_step_blocks": max(s["blocks"] for s in steps),
            "max_step_ticks": max(s["ticks"] for s in steps),
            "presentation_negotiation_ticks": ticks,
            "courier": courier,
            "steps_within_one_block": all(s["blocks"] <= 1 for s in steps),
            "steps_within_one_tick": all(s["ticks"] <= 1 for s in steps),
        }
    return out


def _timing(genesis: dict, state: LedgerState, blocks: list[Block]) -> dict:
    inputs = genesis.get("report_inputs", {})
    baseline = LcBaseline.from_dict(inputs.get("baseline"))
    pn = baseline.presentation_negotiation
    lc_baseline = {
        "durations": baseline.to_dict(),
        "presentation_negotiation_ticks": pn,
        "presentation_negotiation_days": _days(pn),
        "within_1_2_weeks": LC_WEEKS[0] * 7 * TICKS_PER_DAY <= pn <= LC_WEEKS[1] * 7 * TICKS_PER_DAY,
        "total_ticks": baseline.total,
    }
    da_out = {}
    for da in inputs.get("da_trades", []):
        ref = da["trade_ref"]
        durations = DaDurations.from_dict(da.get("durations"))
        planned = run_da_flow(
            DaTrade(ref, da["exporter"], da["importer"], da["exporter_bank"], da["importer_bank"], Money(**da["amount"])),
            durations,
            da.get("start", 1),
        )
        onchain = state.book.da_trades.get(ref)
        timing = onchain.timing if onchain else {}
        elapsed = timing["Paid"] - timing["DocsPresented"] if "Paid" in timing and "DocsPresented" in timing else None
        da_out[ref] = {
            "state": onchain.state if onchain else None,
            "title_holder": onchain.title_holder if onchain else None,
            "timing": timing,
            "elapsed_ticks": elapsed,
            "elapsed_days": _days(elapsed) if elapsed is not None else None,
            "planned_ticks": planned.total_ticks,
            "within_5_7_days": elapsed is not None and DA_DAYS[0] * TICKS_PER_DAY <= elapsed <= DA_DAYS[1] * TICKS_PER_DAY,
            "manual_fee": {"amount": planned.fee, "asset": da["amount"]["asset"], "fee_bps": durations.fee_bps},
        }
    supernet = _supernet_steps(state, blocks, baseline.courier)
    default_da = [d for d in da_out.values() if d["elapsed_ticks"] is not None and d["within_5_7_days"]]
    ordering = None
    fastest = [s["presentation_negotiation_ticks"] for s in supernet.values() if s["presentation_negotiation_ticks"]]
    if default_da and fastest:
        ordering = max(fastest) < min(d["elapsed_ticks"] for d in default_da) < pn
    fee = inputs.get("manual_fee")
    manual = None
    if fee is not None:
        manual = {"per_lc": {"amount": int(fee["amount"]), "asset": fee["asset"]}, "lcs": len(supernet), "total": int(fee["amount"]) * len(supernet)}
    return {
        "lc_baseline": lc_baseline,
        "da": da_out,
        "supernet": supernet,
        "ordering_supernet_da_lc": ordering,
        "manual_charges": manual,
    }


def _indices(genesis: dict) -> list[dict] | None:
    wanted = genesis.get("report_inputs", {}).get("indices")
    if wanted is None:
        return None
    return index_report(load_table(bundled_fixture()), wanted.get("requests") or DEFAULT_REQUESTS)


def build_report(source: str | Path | list[str]) -> dict:
    transcript = load_transcript(source)
    state = transcript.replay()
    blocks = transcript.blocks
    genesis = transcript.genesis
    return {
        "scenario": genesis.get("scenario"),
        "seed": genesis.get("seed"),
        "head": {"height": state.height, "hash": state.head_hash()},
        "timeline": _timeline(state, blocks),
        "lcs": _lcs(state),
        "discrepancies": _discrepancies(state),
        "gas": _gas(state, blocks),
        "settlement": _settlement(state),
        "compliance": _compliance(state),
        "rejections": _fraud(state),
        "consensus": _consensus(genesis, list(transcript.records), blocks, state),
        "timing": _timing(genesis, state, blocks),
        "indices": _indices(genesis),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']} (seed {report['seed']}), head height {report['head']['height']}", ""]
    lines.append("timeline")
    for e in report["timeline"]:
        lines.append(f"  h{e['height']:<4} t{e['tick']:<5} {e['actor']:<14} {e['event']}  {e['ref']}")
    lines += ["", "letters of credit"]
    for ref, lc in report["lcs"].items():
        path = " > ".join(s for s, _ in lc["history"])
        lines.append(f"  {ref}: {lc['state']}  ({path})")
    if report["discrepancies"]:
        lines += ["", "discrepancy notices"]
        for n in report["discrepancies"]:
            lines.append(f"  t{n['tick']} {n['lc']} {n['from']} -> {n['to']}: {', '.join(n['codes']) or 'voided presentation'}")
    lines += ["", f"gas (total {report['gas']['total']})"]
    for party, gas in report["gas"]["per_party"].items():
        lines.append(f"  {party:<14} {gas}")
    lines += ["", "settlement"]
    for ref, hops in report["settlement"]["per_lc"].items():
        for name, hop in sorted(hops.items()):
            detail = ", ".join(f"{k}={v}" for k, v in sorted(hop.items()))
            lines.append(f"  {ref} {name}: {detail}")
    problems = report["settlement"]["conservation_violations"]
    lines.append(f"  conservation: {'ok' if not problems else '; '.join(problems)}")
    lines += ["", "compliance"]
    for ref, record in report["compliance"].items():
        flags = ", ".join(record["flags"]) or "none"
        lines.append(f"  {ref}: BRC at {record['brc_issued_at']}, GR at {record['gr_submitted_at']}, gr_compliant={record['gr_compliant']}, flags: {flags}")
    if report["rejections"]:
        lines += ["", "rejected actions"]
        for e in report["rejections"]:
            tag = "FRAUD " if e["fraud"] else ""
            lines.append(f"  {tag}t{e['tick']} {e['actor']} {e['action']} {e['ref']}: {e['error']}")
    c = report["consensus"]
    lines += [
        "",
        "consensus",
        f"  blocks {c['blocks']}, first-round {c['first_round_blocks']}, round timeouts {c['round_timeouts']}, min votes {c['min_votes']}",
        f"  validators {', '.join(c['validators'])} (quorum {c['quorum']})",
    ]
    for change in c["membership_changes"]:
        lines.append(f"  h{change['height']} {change['action']} {change['subject']} -> {change['size']} validators")
    t = report["timing"]
    lines += ["", "timing"]
    lb = t["lc_baseline"]
    lines.append(f"  LC baseline presentation+negotiation: {lb['presentation_negotiation_days']} days (1-2 weeks: {lb['within_1_2_weeks']})")
    for ref, d in t["da"].items():
        lines.append(f"  DA {ref}: {d['elapsed_days']} days (5-7 days: {d['within_5_7_days']}), manual fee {d['manual_fee']['amount']} {d['manual_fee']['asset']}")
    for ref, s in t["supernet"].items():
        lines.append(
            f"  supernet {ref}: {len(s['steps'])} steps, max {s['max_step_blocks']} block / {s['max_step_ticks']} tick per step,"
            f" presentation+negotiation {s['presentation_negotiation_ticks']} ticks"
        )
        if s["courier"]:
            c = s["courier"]
            lines.append(f"    title documents by courier (off-chain): t{c['dispatched']} -> t{c['arrives']}")
    if t["ordering_supernet_da_lc"] is not None:
        lines.append(f"  ordering supernet < DA < LC baseline: {t['ordering_supernet_da_lc']}")
    if t["manual_charges"]:
        m = t["manual_charges"]
        lines.append(f"  manual charges (report only): {m['per_lc']['amount']} {m['per_lc']['asset']} x {m['lcs']} LCs = {m['total']}")
    if report["indices"]:
        lines += ["", "indices"]
        for e in report["indices"]:
            if e["index"] == "tiva":
                shares = ", ".join(f"{k} {v}%" for k, v in e["shares"].items())
                lines.append(f"  tiva {e['sector']} {e['year']}: {shares}")
            else:
                who = e.get("exporter") or e.get("country")
                extra = f"->{e['partner']}" if "partner" in e else f" {e['sector']}"
                lines.append(f"  {e['index']} {who}{extra} {e['year']}: {e['value']} ({e['reading']})")
    return "\n".join(lines) + "\n"
