"""Permissioned bank validators: quorum rounds over a seeded simulated network.

Round 0 at a height is a single vote phase. The round proposer broadcasts a
header hash, replicas accept it and vote, and the proposer finalizes as soon
as every member has voted. Otherwise it waits out a vote window of one round
trip at maximum delay and finalizes on a quorum. A quorum that forms later
still counts until the round times out. The proposer then broadcasts the
certificate.

A later round first collects promises from a quorum. Each promise reports the
replica's highest accepted (round, header), and the proposer must re-propose
the newest one it hears. Replicas ignore proposals from rounds below their
promise. Any two quorums intersect, so once a header is certified every
later proposer carries it forward and a conflicting certificate cannot form.
Faults are crash-silent replicas and network partitions; nobody equivocates.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

from .errors import (
    DuplicateVote,
    InvalidProposal,
    NotAMember,
    ProposalClosed,
    RoundTimeout,
    SimulationStalled,
)

ROUND_TIMEOUT = 10
MAX_ROUNDS = 1000
FOREVER = 2**62

ADD = "Add"
REMOVE = "Remove"
OPEN = "Open"
PASSED = "Passed"
REJECTED = "Rejected"


def quorum(n: int) -> int:
    if n < 1:
        raise ValueError("validator set must be non-empty")
    return (2 * n) // 3 + 1


@dataclass(frozen=True)
class ValidatorSet:
    members: tuple[str, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("validator set must be non-empty")
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate validator ids")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, item: str) -> bool:
        return item in self.members

    @property
    def quorum(self) -> int:
        return quorum(len(self.members))

    def proposer(self, height: int, round: int = 0) -> str:
        return self.members[(height + round) % len(self.members)]

    def with_added(self, subject: str) -> "ValidatorSet":
        return ValidatorSet(self.members + (subject,))

    def with_removed(self, subject: str) -> "ValidatorSet":
        return ValidatorSet(tuple(m for m in self.members if m != subject))


# -- membership governance -------------------------------------------------


@dataclass(frozen=True)
class MembershipProposal:
    proposal_id: str
    action: str
    subject: str
    proposer: str
    votes_for: frozenset[str] = frozenset()
    votes_against: frozenset[str] = frozenset()
    status: str = OPEN

    def to_dict(self) -> dict:
        return {
            "proposal_id": self.proposal_id,
            "action": self.action,
            "subject": self.subject,
            "proposer": self.proposer,
            "votes_for": sorted(self.votes_for),
            "votes_against": sorted(self.votes_against),
            "status": self.status,
        }


def open_proposal(
    proposal_id: str, action: str, subject: str, proposer: str, members: ValidatorSet
) -> MembershipProposal:
    """Create a proposal; the proposer's own approval is counted immediately."""
    if proposer not in members:
        raise NotAMember(proposer)
    if action == ADD and subject in members:
        raise InvalidProposal(f"{subject} is already a validator")
    if action == REMOVE and subject not in members:
        raise InvalidProposal(f"{subject} is not a validator")
    if action == REMOVE and len(members) == 1:
        raise InvalidProposal("cannot remove the last validator")
    if action not in (ADD, REMOVE):
        raise InvalidProposal(f"unknown action {action!r}")
    proposal = MembershipProposal(proposal_id, action, subject, proposer)
    return vote_membership(proposal, proposer, True, members)


def vote_membership(
    proposal: MembershipProposal, voter: str, approve: bool, members: ValidatorSet
) -> MembershipProposal:
    if voter not in members:
        raise NotAMember(voter)
    if proposal.status != OPEN:
        raise ProposalClosed(proposal.proposal_id)
    if voter in proposal.votes_for or voter in proposal.votes_against:
        raise DuplicateVote(f"{voter} already voted on {proposal.proposal_id}")
    if approve:
        proposal = replace(proposal, votes_for=proposal.votes_for | {voter})
    else:
        proposal = replace(proposal, votes_against=proposal.votes_against | {voter})
    q = members.quorum
    if len(proposal.votes_for) >= q:
        proposal = replace(proposal, status=PASSED)
    elif len(proposal.votes_against) > len(members) - q:
        proposal = replace(proposal, status=REJECTED)
    return proposal


def apply_membership(members: ValidatorSet, proposal: MembershipProposal) -> ValidatorSet:
    if proposal.status != PASSED:
        return members
    if proposal.action == ADD:
        return members if proposal.subject in members else members.with_added(proposal.subject)
    return members.with_removed(proposal.subject) if proposal.subject in members else members


# -- simulated network -----------------------------------------------------


@dataclass(frozen=True)
class Partition:
    start: int
    end: int
    validators: frozenset[str]

    def cuts(self, node: str, tick: int) -> bool:
        return self.start <= tick < self.end and node in self.validators

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "validators": sorted(self.validators)}


@dataclass(frozen=True)
class NetworkConfig:
    seed: int = 0
    delay_min: int = 0
    delay_max: int = 0
    drop_probability: Fraction = Fraction(0)
    partitions: tuple[Partition, ...] = ()
    round_timeout: int = ROUND_TIMEOUT

    def __post_init__(self):
        if not 0 <= self.delay_min <= self.delay_max:
            raise ValueError("need 0 <= delay_min <= delay_max")
        if not 0 <= self.drop_probability < 1:
            raise ValueError("drop_probability must lie in [0, 1)")
        if self.round_timeout < 1:
            raise ValueError("round_timeout must be positive")

    def is_cut(self, node: str, tick: int) -> bool:
        return any(p.cuts(node, tick) for p in self.partitions)

    @property
    def vote_window(self) -> int:
        """Ticks a proposer waits for stragglers: one round trip at maximum delay."""
        return min(2 * self.delay_max + 1, self.round_timeout)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "delay": [self.delay_min, self.delay_max],
            "drop_probability": str(self.drop_probability),
            "partitions": [p.to_dict() for p in self.partitions],
            "round_timeout": self.round_timeout,
        }

    @classmethod
    def from_dict(cls, data: dict, seed: int | None = None) -> "NetworkConfig":
        delay = data.get("delay", [0, 0])
        return cls(
            seed=data.get("seed", 0) if seed is None else seed,
            delay_min=int(delay[0]),
            delay_max=int(delay[1]),
            drop_probability=Fraction(str(data.get("drop_probability", "0"))),
            partitions=tuple(
                Partition(int(p["start"]), int(p["end"]), frozenset(p["validators"]))
                for p in data.get("partitions", [])
            ),
            round_timeout=int(data.get("round_timeout", ROUND_TIMEOUT)),
        )


@dataclass(frozen=True)
class Message:
    seq: int
    sent_at: int
    src: str
    dst: str
    kind: str
    body: tuple


@dataclass(frozen=True)
class Delivery:
    seq: int
    sent_at: int
    tick: int
    src: str
    dst: str
    kind: str
    status: str  # delivered | dropped | partitioned

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "sent_at": self.sent_at,
            "tick": self.tick,
            "src": self.src,
            "dst": self.dst,
            "kind": self.kind,
            "status": self.status,
        }


class Network:
    """Discrete-event message loop keyed by (tick, sequence number)."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self.now = 0
        self._seq = 0
        self._queue: list[tuple[int, int, Message]] = []
        self.trace: list[Delivery] = []

    def send(self, src: str, dst: str, kind: str, body: tuple = ()) -> None:
        seq = self._seq
        self._seq += 1
        # draw both variates unconditionally so the stream never depends on outcomes
        drop_draw = self.rng.random()
        delay = self.rng.randint(self.config.delay_min, self.config.delay_max)
        msg = Message(seq, self.now, src, dst, kind, body)
        if self.config.is_cut(src, self.now):
            self.trace.append(Delivery(seq, self.now, self.now, src, dst, kind, "partitioned"))
        elif drop_draw < self.config.drop_probability:
            self.trace.append(Delivery(seq, self.now, self.now, src, dst, kind, "dropped"))
        else:
            heapq.heappush(self._queue, (self.now + delay, seq, msg))

    def advance(self, tick: int) -> None:
        self.now = max(self.now, tick)

    def pending(self) -> int:
        return len(self._queue)

    def run(
        self,
        until: int,
        handler: Callable[[Message], None],
        stop: Callable[[], bool] = lambda: False,
    ) -> None:
        """Deliver every message due at or before ``until`` unless ``stop`` fires."""
        while self._queue and self._queue[0][0] <= until and not stop():
            tick, _, msg = heapq.heappop(self._queue)
            self.now = max(self.now, tick)
            if self.config.is_cut(msg.dst, tick):
                self.trace.append(Delivery(msg.seq, msg.sent_at, tick, msg.src, msg.dst, msg.kind, "partitioned"))
                continue
            self.trace.append(Delivery(msg.seq, msg.sent_at, tick, msg.src, msg.dst, msg.kind, "delivered"))
            handler(msg)
        if not stop() and until < FOREVER:
            self.now = max(self.now, until)


def run_network(events: Iterable[tuple[int, str, str, str]], net: NetworkConfig) -> list[Delivery]:
    """Play scheduled sends ``(tick, src, dst, kind)`` through the network, returning the trace."""
    network = Network(net)
    for tick, src, dst, kind in sorted(events, key=lambda e: e[0]):
        network.run(tick - 1, _ignore)
        network.advance(tick)
        network.send(src, dst, kind)
    network.run(FOREVER, _ignore)
    return network.trace


def trace_lines(trace: Iterable[Delivery]) -> str:
    """Line-delimited JSON export of a delivery trace, for golden comparisons."""
    return "".join(json.dumps(d.to_dict(), sort_keys=True, separators=(",", ":")) + "\n" for d in trace)


def _ignore(msg: Message) -> None:
    pass


# -- quorum rounds ---------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    height: int
    header_hash: str


@dataclass(frozen=True)
class Certificate:
    height: int
    header_hash: str
    round: int
    proposer: str
    votes: frozenset[str]
    finalized_at: int


@dataclass
class Replica:
    node_id: str
    honest: bool = True
    promised: dict[int, int] = field(default_factory=dict)
    accepted: dict[int, tuple[int, str]] = field(default_factory=dict)
    finalized: dict[int, Certificate] = field(default_factory=dict)

    def promise(self, height: int, round: int) -> bool:
        if round < self.promised.get(height, 0):
            return False
        self.promised[height] = round
        return True

    def accept(self, height: int, round: int, header: str) -> bool:
        if not self.promise(height, round):
            return False
        self.accepted[height] = (round, header)
        return True

    def adopt(self, cert: Certificate, members: ValidatorSet) -> bool:
        if cert.height in self.finalized:
            return False
        if len(cert.votes & set(members.members)) < members.quorum:
            return False
        self.finalized[cert.height] = cert
        return True


@dataclass
class _Round:
    height: int
    round: int
    proposer: str
    header: str
    members: ValidatorSet
    votes: set[str] = field(default_factory=set)
    promises: dict[str, tuple[int, str] | None] = field(default_factory=dict)
    proposing: bool = False
    done: Certificate | None = None


class ConsensusEngine:
    """Replicas plus the network they talk over; drives one height at a time."""

    def __init__(self, members: ValidatorSet, net: NetworkConfig, silent: Iterable[str] = ()):
        self.members = members
        self.net = Network(net)
        self.silent = set(silent)
        self.replicas: dict[str, Replica] = {}
        self.certificates: dict[int, Certificate] = {}
        self._round: _Round | None = None
        self.sync(members)

    def sync(self, members: ValidatorSet) -> None:
        self.members = members
        for node in members.members:
            if node not in self.replicas:
                self.replicas[node] = Replica(node, honest=node not in self.silent)
                # a joining bank backfills the certified chain from its peers
                for cert in self.certificates.values():
                    self.replicas[node].finalized.setdefault(cert.height, cert)

    def _active(self, node: str) -> bool:
        return node in self.replicas and self.replicas[node].honest and node in self.members

    def _handle(self, msg: Message) -> None:
        if not self._active(msg.dst):
            return
        replica = self.replicas[msg.dst]
        cur = self._round
        if msg.kind in ("PREPARE", "PROPOSE"):
            height, round_, header, justify = msg.body
            if justify is not None:
                replica.adopt(justify, self.members)
            if height in replica.finalized:
                self.net.send(msg.dst, msg.src, "COMMIT", (replica.finalized[height],))
            elif msg.kind == "PREPARE":
                if replica.promise(height, round_):
                    self.net.send(msg.dst, msg.src, "PROMISE", (height, round_, replica.accepted.get(height)))
            elif replica.accept(height, round_, header):
                self.net.send(msg.dst, msg.src, "VOTE", (height, round_, header))
        elif msg.kind == "PROMISE":
            height, round_, accepted = msg.body
            if cur is None or cur.done or cur.proposing or msg.dst != cur.proposer:
                return
            if (height, round_) == (cur.height, cur.round) and msg.src in self.members:
                cur.promises[msg.src] = tuple(accepted) if accepted is not None else None
        elif msg.kind == "VOTE":
            height, round_, header = msg.body
            if cur is None or cur.done or msg.dst != cur.proposer:
                return
            if (height, round_, header) != (cur.height, cur.round, cur.header):
                return
            if msg.src in self.members:
                cur.votes.add(msg.src)
            if len(cur.votes) == len(self.members):
                self._finalize(cur)
        elif msg.kind == "COMMIT":
            (cert,) = msg.body
            replica.adopt(cert, self.members)
            if cur is not None and not cur.done and msg.dst == cur.proposer and cert.height == cur.height:
                cur.done = replica.finalized.get(cur.height)

    def _finalize(self, cur: _Round) -> None:
        cert = Certificate(cur.height, cur.header, cur.round, cur.proposer, frozenset(cur.votes), self.net.now)
        replica = self.replicas[cur.proposer]
        replica.adopt(cert, self.members)
        cur.done = replica.finalized[cur.height]
        for node in self.members.members:
            if node != cur.proposer:
                self.net.send(cur.proposer, node, "COMMIT", (cur.done,))

    def propose_and_finalize(self, candidate: Candidate, round: int, start_tick: int) -> Certificate:
        """Run one round. Returns the certificate or raises RoundTimeout."""
        members = self.members
        self.net.run(start_tick - 1, self._handle)
        self.net.advance(start_tick)
        proposer = members.proposer(candidate.height, round)
        deadline = start_tick + self.net.config.round_timeout
        cur = _Round(candidate.height, round, proposer, candidate.header_hash, members)
        self._round = cur
        try:
            if self._active(proposer) and not self.net.config.is_cut(proposer, start_tick):
                replica = self.replicas[proposer]
                parent = self.certificates.get(candidate.height - 1)
                if parent is not None:
                    replica.finalized.setdefault(parent.height, parent)  # state sync from peers
                if candidate.height in replica.finalized:
                    cur.done = replica.finalized[candidate.height]
                    return cur.done
                header = candidate.header_hash
                phase_start = start_tick
                if round > 0:
                    header = self._prepare(cur, replica, parent, deadline)
                    phase_start = self.net.now
                if header is not None and replica.accept(candidate.height, round, header):
                    self._collect_votes(cur, replica, header, parent, phase_start, deadline)
            if cur.done is None:
                self.net.advance(deadline)
                raise RoundTimeout(candidate.height, round, len(cur.votes), members.quorum)
            return cur.done
        finally:
            self._round = None

    def _prepare(self, cur: _Round, replica: Replica, parent: Certificate | None, deadline: int) -> str | None:
        """Gather promises from a quorum; return the header this round must carry."""
        if not replica.promise(cur.height, cur.round):
            return None
        cur.promises[replica.node_id] = replica.accepted.get(cur.height)
        for node in cur.members.members:
            if node != replica.node_id:
                self.net.send(replica.node_id, node, "PREPARE", (cur.height, cur.round, None, parent))
        quorum_ = cur.members.quorum
        self.net.run(deadline - 1, self._handle, stop=lambda: cur.done is not None or len(cur.promises) >= quorum_)
        if cur.done is not None or len(cur.promises) < quorum_:
            return None
        reported = [a for a in cur.promises.values() if a is not None]
        return max(reported)[1] if reported else cur.header

    def _collect_votes(
        self, cur: _Round, replica: Replica, header: str, parent: Certificate | None, phase_start: int, deadline: int
    ) -> None:
        members = cur.members
        cur.header = header
        cur.proposing = True
        cur.votes.add(replica.node_id)
        if len(cur.votes) == len(members):
            self._finalize(cur)
            return
        for node in members.members:
            if node != replica.node_id:
                self.net.send(replica.node_id, node, "PROPOSE", (cur.height, cur.round, header, parent))
        window = min(phase_start + self.net.config.vote_window, deadline)
        self.net.run(window - 1, self._handle, stop=lambda: cur.done is not None)
        if cur.done is None and len(cur.votes) < members.quorum:
            self.net.run(deadline - 1, self._handle, stop=lambda: cur.done is not None or len(cur.votes) >= members.quorum)
        if cur.done is None and len(cur.votes) >= members.quorum:
            self.net.advance(max(window - 1, self.net.now))
            self._finalize(cur)

    def finalize_height(
        self, candidate: Candidate, start_tick: int, max_rounds: int = MAX_ROUNDS
    ) -> tuple[Certificate, list[RoundTimeout]]:
        """Retry rounds with rotating proposers until a certificate forms."""
        timeouts: list[RoundTimeout] = []
        tick = start_tick
        for round_ in range(max_rounds):
            try:
                cert = self.propose_and_finalize(candidate, round_, tick)
            except RoundTimeout as exc:
                timeouts.append(exc)
                tick += self.net.config.round_timeout
                continue
            self.certificates.setdefault(candidate.height, cert)
            return self.certificates[candidate.height], timeouts
        raise SimulationStalled(f"height {candidate.height}: no quorum after {max_rounds} rounds")

    def drain(self) -> None:
        self.net.run(FOREVER, self._handle)

    def honest_ids(self) -> list[str]:
        return [r.node_id for r in self.replicas.values() if r.honest]


def conflicts(replicas: Iterable[Replica]) -> dict[int, set[str]]:
    """Heights at which honest replicas finalized differing headers."""
    seen: dict[int, set[str]] = {}
    for replica in replicas:
        if not replica.honest:
            continue
        for height, cert in replica.finalized.items():
            seen.setdefault(height, set()).add(cert.header_hash)
    return {h: hashes for h, hashes in seen.items() if len(hashes) > 1}


@dataclass
class ConsensusRun:
    certificates: dict[int, Certificate]
    timeouts: list[RoundTimeout]
    replicas: dict[str, Replica]
    stalled_at: int | None
    trace: list[Delivery]


def simulate_chain(
    members: ValidatorSet,
    net: NetworkConfig,
    heights: int,
    silent: Iterable[str] = (),
    header_for: Callable[[int, str], str] | None = None,
    max_rounds: int = 30,
    block_interval: int = 1,
) -> ConsensusRun:
    """Finalize ``heights`` consecutive blocks; ``header_for(height, proposer)``
    lets different proposers push different candidates at the same height."""
    engine = ConsensusEngine(members, net, silent)
    timeouts: list[RoundTimeout] = []
    tick = 0
    stalled_at = None
    for height in range(1, heights + 1):
        cert = None
        for round_ in range(max_rounds):
            proposer = members.proposer(height, round_)
            header = header_for(height, proposer) if header_for else f"{height:064x}"
            try:
                cert = engine.propose_and_finalize(Candidate(height, header), round_, tick)
                engine.certificates.setdefault(height, cert)
                break
            except RoundTimeout as exc:
                timeouts.append(exc)
                tick += net.round_timeout
        if cert is None:
            stalled_at = height
            break
        tick = max(tick + block_interval, engine.net.now + block_interval)
    engine.drain()
    return ConsensusRun(engine.certificates, timeouts, engine.replicas, stalled_at, engine.net.trace)
