"""Acceptance criteria 1-8, each at its stated tolerance.

Every test records one ``PASS``/``FAIL criterion N`` line; the lines are
printed at the end of the pytest session (see conftest) and when this file is
run as a script.
"""

import json
import random
import time
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction

from oracles import exam_grid, exam_oracle, make_accounts, random_operation
from supernet_lc.analytics import DEFAULT_REQUESTS, bundled_fixture, index_report, load_table
from supernet_lc.consensus import NetworkConfig, Partition, ValidatorSet, conflicts, quorum, simulate_chain
from supernet_lc.crypto import hash_hex
from supernet_lc.docstore import DocStore
from supernet_lc.driver import run
from supernet_lc.errors import SupernetError
from supernet_lc.ledger import apply_block
from supernet_lc.merkle import MerkleProof, verify_proof
from supernet_lc.report import build_report, report_json
from supernet_lc.scenario import bundled, bundled_scenarios
from supernet_lc.settlement import supply_violations
from supernet_lc.transcript import load_transcript
from supernet_lc.verify import verify
from supernet_lc.workflow import TICKS_PER_DAY, Presentation, examine_docs

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def within(value, target, tol) -> bool:
    return abs(Fraction(value) - Fraction(target)) <= Fraction(tol)


# -- 1 -------------------------------------------------------------------------


def test_criterion_1_index_reproduction():
    start = time.perf_counter()
    tii_row, rca_in, rca_br, tiva = index_report(load_table(bundled_fixture()), DEFAULT_REQUESTS)
    elapsed_ms = (time.perf_counter() - start) * 1000
    checks = [
        within(tii_row["value"], "1.567", "0.001"),
        within(rca_in["value"], "1.40", "0.01"),
        within(rca_br["value"], "0.12", "0.01"),
        within(tiva["shares"]["IND"], "61.4", "0.1"),
        within(tiva["shares"]["BRA"], "38.6", "0.1"),
        elapsed_ms < 1000,
    ]
    detail = (
        f"tii {tii_row['value']}, rca IND {rca_in['value']}, rca BRA {rca_br['value']}, "
        f"tiva {tiva['shares']['IND']}/{tiva['shares']['BRA']} in {elapsed_ms:.1f} ms"
    )
    record(1, all(checks), detail)


# -- 2 -------------------------------------------------------------------------


def test_criterion_2_duplicate_lc_rejected_on_every_seed():
    scenario = bundled("duplicate_lc")
    rejected = 0
    for seed in range(100):
        result = run(scenario, seed=seed)
        frauds = [r for r in result.report["rejections"] if r["fraud"] and r["actor"] == "bank_br2"]
        single = len(result.state.book.registry) == 1
        owner = next(iter(result.state.book.registry.values())).terms.issuing_bank == "bank_br"
        rejected += len(frauds) == 1 and single and owner
    record(2, rejected == 100, f"second issuance rejected in {rejected}/100 seeded runs")


# -- 3 -------------------------------------------------------------------------


def fault_plan(rng, names, n):
    """Up to n - quorum(n) nodes either silent or partitioned for a stretch."""
    faulty = rng.sample(names, rng.randint(1, n - quorum(n)))
    silent, cut = [], []
    for node in faulty:
        (silent if rng.random() < 0.5 else cut).append(node)
    partitions = ()
    if cut:
        start = rng.randint(0, 20)
        partitions = (Partition(start, start + rng.randint(5, 60), frozenset(cut)),)
    return silent, partitions


def test_criterion_3_consensus_safety():
    seeds = range(120)
    runs = conflicting = one_round_failures = stalled = 0
    for seed in seeds:
        rng = random.Random(seed)
        for n in (4, 5, 7):
            names = [f"v{i}" for i in range(n)]
            members = ValidatorSet(tuple(names))
            clean = simulate_chain(members, NetworkConfig(seed=seed, delay_min=0, delay_max=2), heights=5)
            one_round_failures += bool(clean.timeouts) or any(c.round != 0 for c in clean.certificates.values())
            one_round_failures += len(clean.certificates) != 5
            conflicting += bool(conflicts(clean.replicas.values()))

            silent, partitions = fault_plan(rng, names, n)
            net = NetworkConfig(
                seed=seed,
                delay_min=0,
                delay_max=rng.randint(1, 4),
                drop_probability=rng.choice([Fraction(0), Fraction(1, 20), Fraction(1, 5)]),
                partitions=partitions,
            )
            faulty = simulate_chain(
                members, net, heights=5, silent=silent, header_for=lambda h, p: hash_hex(f"{h}/{p}".encode())
            )
            conflicting += bool(conflicts(faulty.replicas.values()))
            stalled += faulty.stalled_at is not None
            runs += 2
    ok = conflicting == 0 and one_round_failures == 0
    record(
        3,
        ok,
        f"{runs} runs over {len(seeds)} seeds, n in {{4,5,7}}: {conflicting} conflicting heights, "
        f"{one_round_failures} zero-fault runs needing more than one round ({stalled} faulty runs stalled)",
    )


# -- 4 -------------------------------------------------------------------------


def flip(hex_value: str, rng) -> str:
    data = bytearray(bytes.fromhex(hex_value))
    bit = rng.randrange(len(data) * 8)
    data[bit // 8] ^= 1 << (bit % 8)
    return data.hex()


def random_history(rng) -> DocStore:
    store = DocStore()
    for d in range(rng.randint(1, 3)):
        for v in range(rng.randint(1, 12)):
            store.add_version(f"doc{d}", rng.randbytes(rng.randint(0, 40)), rng.choice(["exp_in", "bank_in", "imp_br"]), v * rng.randint(1, 5))
    return store


def mutate_record(store: DocStore, rng) -> None:
    doc_id = rng.choice(sorted(store.histories))
    versions = store.histories[doc_id]
    i = rng.randrange(len(versions))
    old = versions[i]
    field_name = rng.choice(["content_hash", "parent_hash", "author", "tick", "version"])
    if field_name in ("content_hash", "parent_hash"):
        new = replace(old, **{field_name: flip(getattr(old, field_name), rng)})
    elif field_name == "author":
        new = replace(old, author=old.author + "x")
    else:
        new = replace(old, **{field_name: getattr(old, field_name) + rng.randint(1, 3)})
    versions[i] = new


def test_criterion_4_document_provenance():
    rng = random.Random(4)
    honest = honest_fail = mutations = undetected = 0
    for _ in range(1_000):
        store = random_history(rng)
        for doc_id, versions in store.histories.items():
            for v in range(1, len(versions) + 1):
                proof = store.prove_inclusion(doc_id, v)
                honest += 1
                honest_fail += not (verify_proof(proof) and proof.root == store.doc_roots[doc_id])
        doc_id = rng.choice(sorted(store.histories))
        proof = store.prove_inclusion(doc_id, rng.randint(1, len(store.histories[doc_id])))
        corrupted = [
            replace(proof, leaf_hash=flip(proof.leaf_hash, rng)),
            replace(proof, root=flip(proof.root, rng)),
        ]
        if proof.path:
            k = rng.randrange(len(proof.path))
            path = list(proof.path)
            path[k] = (flip(path[k][0], rng), path[k][1])
            corrupted.append(MerkleProof(proof.leaf_hash, tuple(path), proof.root))
        for bad in corrupted:
            mutations += 1
            undetected += verify_proof(bad)
        mutate_record(store, rng)
        mutations += 1
        undetected += not store.audit()
        store = random_history(rng)
        target = rng.choice(sorted(store.doc_roots))
        store.doc_roots[target] = flip(store.doc_roots[target], rng)
        mutations += 1
        undetected += not store.audit()
    ok = honest_fail == 0 and undetected == 0
    record(4, ok, f"{honest} honest proofs ({honest_fail} failed); {mutations} single mutations ({undetected} undetected)")


# -- 5 -------------------------------------------------------------------------


def payout_oracle() -> int:
    """1,000,000.00 BRL -> USDC at 0.20 less 50 bps -> INR at 83 less 25 bps, in paise."""
    usdc = Decimal("1000000.00") * Decimal("0.20") * (1 - Decimal("0.0050"))
    inr = usdc * Decimal(83) * (1 - Decimal("0.0025"))
    return int((inr * 100).to_integral_value())


def test_criterion_5_settlement_conservation():
    block_checks = block_failures = 0
    for path in bundled_scenarios():
        result = run(bundled(path.stem))
        transcript = load_transcript(result.lines)
        state = transcript.initial_state()
        for rec, block in zip(transcript.records, transcript.blocks):
            state = apply_block(state, block)
            block_checks += 1
            block_failures += bool(state.accounts.conservation_violations())
            block_failures += bool(supply_violations(rec["settlement"]["supply"]))
    rng = random.Random(5)
    fuzz_failures = 0
    for _ in range(1_000):
        acc = make_accounts(rng.choice([0, 10**6, 10**9]))
        for _ in range(rng.randint(1, 25)):
            try:
                random_operation(acc, rng)
            except SupernetError:
                pass
            fuzz_failures += bool(acc.conservation_violations())
    happy = run(bundled("happy_path")).report["settlement"]["per_lc"]["TR-2024-001"]["offramp"]["inr_out"]
    oracle = payout_oracle()
    ok = block_failures == 0 and fuzz_failures == 0 and happy == oracle
    record(
        5,
        ok,
        f"{block_checks} blocks across {len(bundled_scenarios())} scenarios ({block_failures} violations), "
        f"1000 fuzzed sequences ({fuzz_failures} violations), payout {happy} paise vs oracle {oracle}",
    )


# -- 6 -------------------------------------------------------------------------


def test_criterion_6_examination_oracle():
    cases = mismatches = 0
    for terms, meta, at in exam_grid():
        cases += 1
        result = examine_docs(Presentation("t", {}, at), terms, meta)
        mismatches += set(result.codes) != exam_oracle(at, terms, meta)
    record(6, mismatches == 0, f"{cases} grid cases, {mismatches} mismatches")


# -- 7 -------------------------------------------------------------------------


def test_criterion_7_timing_comparison():
    timing = run(bundled("da_comparison")).report["timing"]
    da = timing["da"]["TR-CMP-DA"]
    lc = timing["lc_baseline"]
    supernet = next(iter(timing["supernet"].values()))
    checks = {
        "DA 5-7 days": da["within_5_7_days"] and 5 * TICKS_PER_DAY <= da["elapsed_ticks"] <= 7 * TICKS_PER_DAY,
        "LC 1-2 weeks": lc["within_1_2_weeks"] and 7 * TICKS_PER_DAY <= lc["presentation_negotiation_ticks"] <= 14 * TICKS_PER_DAY,
        "steps <= 1 block": supernet["steps_within_one_block"] and all(s["blocks"] <= 1 for s in supernet["steps"]),
        "ordering": timing["ordering_supernet_da_lc"] is True,
    }
    detail = (
        f"DA {da['elapsed_days']} days, LC baseline {lc['presentation_negotiation_days']} days, "
        f"supernet max {supernet['max_step_blocks']} block per step; "
        + ", ".join(f"{k}: {'ok' if v else 'no'}" for k, v in checks.items())
    )
    record(7, all(checks.values()), detail)


# -- 8 -------------------------------------------------------------------------


def test_criterion_8_determinism():
    problems = []
    names = [p.stem for p in bundled_scenarios()]
    for name in names:
        first, second = run(bundled(name)), run(bundled(name))
        if first.transcript != second.transcript:
            problems.append(f"{name}: transcripts differ")
        if load_transcript(first.lines).replay() != first.state:
            problems.append(f"{name}: replay differs from live state")
        if report_json(build_report(first.lines)) != report_json(first.report):
            problems.append(f"{name}: regenerated report differs")
        verdict = verify(first.lines)
        if not verdict.clean:
            problems.append(f"{name}: {verdict.violations}")
    record(8, not problems, f"{len(names)} scenarios byte-identical and verify-clean" if not problems else json.dumps(problems))


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
