"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) that is written into
transcripts and reports, so renaming a class is a format change.
"""

from __future__ import annotations


class SupernetError(Exception):
    """Base class for every simulator error."""

    @property
    def code(self) -> str:
        return type(self).__name__


# ledger_core
class QuorumNotMet(SupernetError):
    pass


class InvalidParentHash(SupernetError):
    pass


class InvalidTransaction(SupernetError):
    def __init__(self, index: int, cause: SupernetError | str):
        self.index = index
        self.cause = cause
        cause_code = cause.code if isinstance(cause, SupernetError) else str(cause)
        super().__init__(f"tx #{index} rejected: {cause_code}: {cause}")


class BrokenHashChain(SupernetError):
    def __init__(self, height: int, reason: str = ""):
        self.height = height
        self.reason = reason
        super().__init__(f"hash chain broken at height {height}: {reason}")


class UnknownParty(SupernetError):
    pass


# consensus
class RoundTimeout(SupernetError):
    def __init__(self, height: int, round: int, votes: int, needed: int):
        self.height = height
        self.round = round
        self.votes = votes
        self.needed = needed
        super().__init__(f"height {height} round {round}: {votes}/{needed} votes before timeout")


class NotAMember(SupernetError):
    pass


class DuplicateVote(SupernetError):
    pass


class ProposalClosed(SupernetError):
    pass


class InvalidProposal(SupernetError):
    pass


class SimulationStalled(SupernetError):
    pass


# lc_workflow
class DuplicateParty(SupernetError):
    pass


class InvalidRole(SupernetError):
    pass


class DuplicateLc(SupernetError):
    def __init__(self, trade_ref: str):
        self.trade_ref = trade_ref
        super().__init__(f"an LC already exists for trade_ref {trade_ref!r}")


class InvalidTerms(SupernetError):
    pass


class UnknownLc(SupernetError):
    pass


class WrongState(SupernetError):
    pass


class NotAdvisingBank(SupernetError):
    pass


class NotBeneficiary(SupernetError):
    pass


class WrongBank(SupernetError):
    pass


class CommitmentMismatch(SupernetError):
    pass


class NotIndianBank(SupernetError):
    pass


class NotSettled(SupernetError):
    pass


# docstore
class BrokenChain(SupernetError):
    pass


class UnknownDocument(SupernetError):
    pass


class VersionOutOfRange(SupernetError):
    pass


# settlement
class InsufficientFunds(SupernetError):
    pass


class QuotePairMismatch(SupernetError):
    pass


class NoSettlementTrigger(SupernetError):
    pass


class MissingPrice(SupernetError):
    def __init__(self, good_id: str, tick: int):
        self.good_id = good_id
        self.tick = tick
        super().__init__(f"no price for {good_id!r} at tick {tick}")


class ConditionNotMet(SupernetError):
    pass


class InvalidWallet(SupernetError):
    pass


# analytics
class NonPositiveInput(SupernetError):
    pass


class AllZero(SupernetError):
    pass


class MissingAggregate(SupernetError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing aggregate {name!r}")


# scenario_cli
class RunFailed(SupernetError):
    """A module error raised mid-run, tagged with where it happened."""

    def __init__(self, height: int, tick: int, cause: Exception):
        self.height = height
        self.tick = tick
        self.cause = cause
        super().__init__(f"height {height} tick {tick}: {type(cause).__name__}: {cause}")


class ParseError(SupernetError):
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class SchemaError(SupernetError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)
