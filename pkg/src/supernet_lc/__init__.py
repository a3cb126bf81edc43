"""Deterministic simulator of a permissioned bank supernet for letter-of-credit trade."""

from .driver import RunResult, run
from .ledger import Block, GasSchedule, LedgerState, Transaction, TxKind, append_block, replay, total_gas
from .report import build_report
from .scenario import Scenario, load_scenario
from .verify import Verdict, verify

__all__ = [
    "Block",
    "GasSchedule",
    "LedgerState",
    "RunResult",
    "Scenario",
    "Transaction",
    "TxKind",
    "Verdict",
    "append_block",
    "build_report",
    "load_scenario",
    "replay",
    "run",
    "total_gas",
    "verify",
]
