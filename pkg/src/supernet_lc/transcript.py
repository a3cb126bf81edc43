"""Reading run transcripts: one canonical JSON object per line.

Line 1 is the genesis record; every later line holds one finalized block,
its settlement snapshot, consensus timeouts and the private reveals sent
alongside it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, SchemaError
from .ledger import Block, LedgerState, genesis_state, replay


@dataclass(frozen=True)
class Transcript:
    genesis: dict
    records: tuple[dict, ...]

    @property
    def blocks(self) -> list[Block]:
        return [Block.from_dict(r["block"]) for r in self.records]

    def replay(self) -> LedgerState:
        return replay(self.genesis["config"], self.blocks)

    def initial_state(self) -> LedgerState:
        return genesis_state(self.genesis["config"])


def parse_lines(lines: list[str]) -> list[dict]:
    out = []
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(number, exc.msg) from None
        if not isinstance(obj, dict):
            raise ParseError(number, "each line must hold one object")
        out.append(obj)
    return out


def load_transcript(source: str | Path | list[str]) -> Transcript:
    lines = source if isinstance(source, list) else Path(source).read_text(encoding="utf-8").splitlines()
    records = parse_lines(lines)
    if not records or records[0].get("type") != "genesis":
        raise SchemaError("type", "transcript must start with a genesis record")
    for i, r in enumerate(records[1:], 2):
        if r.get("type") != "block" or "block" not in r:
            raise SchemaError(f"line {i}", "expected a block record")
    return Transcript(records[0], tuple(records[1:]))
