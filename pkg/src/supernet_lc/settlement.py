"""Token settlement: BRL on-ramp to USDC, bank-to-bank transfer, INR off-ramp,
basket-backed valuation and Reais escrow.

Balances are integer minor units. Each conversion floors twice, first after
applying the rate and again after taking the fee. The converting bank keeps
the fee. Supply bookkeeping satisfies, per asset::

    minted == balances + escrow + fees + burned
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import (
    ConditionNotMet,
    InsufficientFunds,
    InvalidWallet,
    MissingPrice,
    NoSettlementTrigger,
    QuotePairMismatch,
)

BRL = "BRL"
INR = "INR"
USDC = "USDC"
BASKET = "BASKET"
DECIMALS = {BRL: 2, INR: 2, USDC: 6, BASKET: 6}
BANK_ONLY = frozenset({USDC, BASKET})


def _rational(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class FxQuote:
    base: str
    quote: str
    rate: Fraction
    fee_bps: int = 0
    tick: int = 0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if not 0 <= self.fee_bps <= 10000:
            raise ValueError("fee_bps must lie in [0, 10000]")
        for asset in (self.base, self.quote):
            if asset not in DECIMALS:
                raise ValueError(f"unknown asset {asset}")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.base, self.quote)

    def to_dict(self) -> dict:
        return {"pair": f"{self.base}/{self.quote}", "rate": str(self.rate), "fee_bps": self.fee_bps, "tick": self.tick}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FxQuote":
        base, quote = str(data["pair"]).split("/")
        return cls(base, quote, _rational(str(data["rate"])), int(data.get("fee_bps", 0)), int(data.get("tick", 0)))


@dataclass(frozen=True)
class Conversion:
    amount_in: int
    gross: int
    fee: int

    @property
    def net(self) -> int:
        return self.gross - self.fee


def convert(amount: int, quote: FxQuote) -> Conversion:
    scale = Fraction(10) ** (DECIMALS[quote.quote] - DECIMALS[quote.base])
    gross = math.floor(amount * quote.rate * scale)
    net = math.floor(gross * Fraction(10000 - quote.fee_bps, 10000))
    return Conversion(amount, gross, gross - net)


# -- basket --------------------------------------------------------------------


@dataclass(frozen=True)
class BasketComponent:
    good_id: str
    weight: Fraction
    prices: tuple[tuple[int, Fraction], ...]

    def price_at(self, tick: int) -> Fraction:
        """Step series: the latest quoted price at or before ``tick``."""
        current = None
        for at, price in self.prices:
            if at <= tick:
                current = price
        if current is None:
            raise MissingPrice(self.good_id, tick)
        return current


@dataclass(frozen=True)
class BasketDefinition:
    basket_id: str
    components: tuple[BasketComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("basket needs at least one component")
        if any(c.weight <= 0 for c in self.components):
            raise ValueError("basket weights must be positive")
        if sum(c.weight for c in self.components) != 1:
            raise ValueError("basket weights must sum to 1")

    @classmethod
    def from_dict(cls, basket_id: str, data: Mapping) -> "BasketDefinition":
        comps = []
        for c in data["components"]:
            prices = tuple(sorted((int(t), _rational(str(p))) for t, p in c["prices"].items()))
            comps.append(BasketComponent(str(c["good_id"]), _rational(str(c["weight"])), prices))
        return cls(basket_id, tuple(comps))

    def to_dict(self) -> dict:
        return {
            "components": [
                {
                    "good_id": c.good_id,
                    "weight": str(c.weight),
                    "prices": {str(t): str(p) for t, p in c.prices},
                }
                for c in self.components
            ]
        }


def basket_value(basket: BasketDefinition, tick: int) -> Fraction:
    return sum((c.weight * c.price_at(tick) for c in basket.components), Fraction(0))


# -- accounts ------------------------------------------------------------------


@dataclass
class EscrowAccount:
    lc: str
    owner: str
    beneficiary_bank: str
    currency: str = BRL
    locked: int = 0
    released: bool = False

    def to_dict(self) -> dict:
        return {
            "lc": self.lc,
            "owner": self.owner,
            "beneficiary_bank": self.beneficiary_bank,
            "currency": self.currency,
            "locked": self.locked,
            "released": self.released,
        }


@dataclass
class SettlementTrigger:
    lc: str
    payer: str
    payee: str
    asset: str
    amount: int
    basket_id: str | None = None
    paid_usdc: int = 0
    outstanding: int = 0

    def __post_init__(self):
        if not self.outstanding and not self.paid_usdc:
            self.outstanding = self.amount

    def to_dict(self) -> dict:
        return {
            "lc": self.lc,
            "payer": self.payer,
            "payee": self.payee,
            "asset": self.asset,
            "amount": self.amount,
            "basket_id": self.basket_id,
            "paid_usdc": self.paid_usdc,
            "outstanding": self.outstanding,
        }


def _zero() -> dict[str, int]:
    return {asset: 0 for asset in DECIMALS}


@dataclass
class Accounts:
    balances: dict[str, dict[str, int]] = field(default_factory=dict)
    banks: set[str] = field(default_factory=set)
    minted: dict[str, int] = field(default_factory=_zero)
    burned: dict[str, int] = field(default_factory=_zero)
    fees: dict[str, dict[str, int]] = field(default_factory=dict)
    escrows: dict[str, EscrowAccount] = field(default_factory=dict)
    triggers: dict[str, SettlementTrigger] = field(default_factory=dict)
    baskets: dict[str, BasketDefinition] = field(default_factory=dict)
    hops: dict[str, dict] = field(default_factory=dict)

    # primitives
    def balance(self, owner: str, asset: str) -> int:
        return self.balances.get(owner, {}).get(asset, 0)

    def _check_wallet(self, owner: str, asset: str) -> None:
        if asset not in DECIMALS:
            raise InvalidWallet(f"unknown asset {asset}")
        if asset in BANK_ONLY and owner not in self.banks:
            raise InvalidWallet(f"{owner} may not hold {asset}")

    def _credit(self, owner: str, asset: str, amount: int) -> None:
        wallet = self.balances.setdefault(owner, {})
        wallet[asset] = wallet.get(asset, 0) + amount

    def _debit(self, owner: str, asset: str, amount: int) -> None:
        if amount < 0:
            raise InsufficientFunds("negative amount")
        if self.balance(owner, asset) < amount:
            raise InsufficientFunds(f"{owner} holds {self.balance(owner, asset)} {asset}, needs {amount}")
        if amount:
            self.balances[owner][asset] -= amount

    def _fee(self, owner: str, asset: str, amount: int) -> None:
        bucket = self.fees.setdefault(owner, {})
        bucket[asset] = bucket.get(asset, 0) + amount

    def _hop(self, lc: str | None, name: str, record: dict) -> None:
        if lc is not None:
            self.hops.setdefault(lc, {})[name] = record

    def fund(self, owner: str, asset: str, amount: int) -> None:
        """Genesis issuance of fiat or tokens."""
        self._check_wallet(owner, asset)
        if amount < 0:
            raise InsufficientFunds("cannot fund a negative amount")
        self._credit(owner, asset, amount)
        self.minted[asset] += amount

    # on-chain settlement
    def onramp(self, owner: str, amount_brl: int, quote: FxQuote, lc: str | None = None) -> int:
        if quote.pair != (BRL, USDC):
            raise QuotePairMismatch(f"on-ramp needs BRL/USDC, got {quote.base}/{quote.quote}")
        self._check_wallet(owner, USDC)
        if amount_brl < 0 or self.balance(owner, BRL) < amount_brl:
            raise InsufficientFunds(f"{owner} cannot on-ramp {amount_brl} BRL")
        if amount_brl == 0:
            return 0
        conv = convert(amount_brl, quote)
        self._debit(owner, BRL, amount_brl)
        self.burned[BRL] += amount_brl
        self.minted[USDC] += conv.gross
        self._credit(owner, USDC, conv.net)
        self._fee(owner, USDC, conv.fee)
        self._hop(lc, "onramp", {"brl_in": amount_brl, "usdc_out": conv.net, "fee_usdc": conv.fee, "rate": str(quote.rate)})
        return conv.net

    def add_trigger(self, trigger: SettlementTrigger) -> None:
        self.triggers[trigger.lc] = trigger

    def amount_due(self, lc: str, tick: int) -> int:
        """USDC owed right now on an accepted LC (basket LCs revalue at ``tick``)."""
        trigger = self.triggers.get(lc)
        if trigger is None:
            raise NoSettlementTrigger(lc)
        if trigger.asset == USDC:
            return trigger.outstanding
        if trigger.asset == BASKET:
            basket = self.baskets[trigger.basket_id]
            scale = Fraction(10) ** (DECIMALS[USDC] - DECIMALS[BASKET])
            return math.floor(trigger.outstanding * basket_value(basket, tick) * scale)
        raise NoSettlementTrigger(f"{lc} settles in {trigger.asset}, not USDC")

    def transfer(self, sender: str, to: str, amount_usdc: int, lc: str, tick: int) -> None:
        trigger = self.triggers.get(lc)
        if trigger is None or trigger.asset not in (USDC, BASKET):
            raise NoSettlementTrigger(lc)
        if sender != trigger.payer or to != trigger.payee:
            raise NoSettlementTrigger(f"{sender}->{to} does not match the trigger for {lc}")
        self._check_wallet(to, USDC)
        due = self.amount_due(lc, tick)
        if amount_usdc <= 0 or amount_usdc > due:
            raise NoSettlementTrigger(f"transfer of {amount_usdc} exceeds {due} due")
        if trigger.asset == BASKET and amount_usdc != due:
            raise NoSettlementTrigger("basket LCs settle in one transfer at the current basket value")
        self._debit(sender, USDC, amount_usdc)
        self._credit(to, USDC, amount_usdc)
        trigger.paid_usdc += amount_usdc
        if trigger.asset == BASKET:
            self._hop(lc, "basket", {"units": trigger.outstanding, "value_usdc": amount_usdc, "tick": tick})
            trigger.outstanding = 0
        else:
            trigger.outstanding -= amount_usdc
        self._hop(lc, "transfer", {"from": sender, "to": to, "usdc": trigger.paid_usdc})

    def offramp(self, owner: str, amount_usdc: int, quote: FxQuote, credit_to: str, lc: str | None = None) -> int:
        if quote.pair != (USDC, INR):
            raise QuotePairMismatch(f"off-ramp needs USDC/INR, got {quote.base}/{quote.quote}")
        if amount_usdc < 0 or self.balance(owner, USDC) < amount_usdc:
            raise InsufficientFunds(f"{owner} cannot off-ramp {amount_usdc} USDC")
        if lc is not None:
            trigger = self.triggers.get(lc)
            if trigger is None or trigger.payee != owner or trigger.outstanding or not trigger.paid_usdc:
                raise ConditionNotMet(f"{lc} has not been fully paid to {owner}")
        conv = convert(amount_usdc, quote)
        self._debit(owner, USDC, amount_usdc)
        self.burned[USDC] += amount_usdc
        self.minted[INR] += conv.gross
        self._credit(credit_to, INR, conv.net)
        self._fee(owner, INR, conv.fee)
        self._hop(lc, "offramp", {"usdc_in": amount_usdc, "inr_out": conv.net, "fee_inr": conv.fee, "credit_to": credit_to, "rate": str(quote.rate)})
        return conv.net

    # option 2: Reais escrow
    def escrow_fund(self, owner: str, amount_brl: int, beneficiary: str, lc: str) -> EscrowAccount:
        if amount_brl < 0 or self.balance(owner, BRL) < amount_brl:
            raise InsufficientFunds(f"{owner} cannot lock {amount_brl} BRL")
        existing = self.escrows.get(lc)
        if existing is not None and (existing.released or existing.owner != owner or existing.beneficiary_bank != beneficiary):
            raise ConditionNotMet(f"escrow for {lc} cannot take more funds")
        if amount_brl == 0:
            return existing or EscrowAccount(lc, owner, beneficiary)
        self._debit(owner, BRL, amount_brl)
        if existing is None:
            existing = self.escrows[lc] = EscrowAccount(lc, owner, beneficiary)
        existing.locked += amount_brl
        return existing

    def escrow_release(self, lc: str, accepted: bool, quote: FxQuote) -> int:
        escrow = self.escrows.get(lc)
        if escrow is None or escrow.released or not escrow.locked:
            raise ConditionNotMet(f"no funded escrow for {lc}")
        if not accepted:
            raise ConditionNotMet(f"{lc} has not been accepted")
        if quote.pair != (BRL, INR):
            raise QuotePairMismatch(f"escrow release needs BRL/INR, got {quote.base}/{quote.quote}")
        conv = convert(escrow.locked, quote)
        self.burned[BRL] += escrow.locked
        self.minted[INR] += conv.gross
        self._credit(escrow.beneficiary_bank, INR, conv.net)
        self._fee(escrow.beneficiary_bank, INR, conv.fee)
        self._hop(lc, "escrow", {"brl_locked": escrow.locked, "inr_out": conv.net, "fee_inr": conv.fee, "rate": str(quote.rate)})
        escrow.locked = 0
        escrow.released = True
        trigger = self.triggers.get(lc)
        if trigger is not None:
            trigger.outstanding = 0
        return conv.net

    # bookkeeping
    def supply(self) -> dict[str, dict[str, int]]:
        out = {}
        for asset in DECIMALS:
            out[asset] = {
                "minted": self.minted[asset],
                "burned": self.burned[asset],
                "balances": sum(w.get(asset, 0) for w in self.balances.values()),
                "escrow": sum(e.locked for e in self.escrows.values() if e.currency == asset),
                "fees": sum(f.get(asset, 0) for f in self.fees.values()),
            }
        return out

    def snapshot(self) -> dict:
        return {
            "balances": {o: {a: v for a, v in sorted(w.items()) if v} for o, w in sorted(self.balances.items()) if any(w.values())},
            "supply": self.supply(),
        }

    def conservation_violations(self) -> list[str]:
        return supply_violations(self.supply()) + [
            f"negative balance {owner}/{asset}"
            for owner, wallet in sorted(self.balances.items())
            for asset, value in sorted(wallet.items())
            if value < 0
        ]


def supply_violations(supply: Mapping[str, Mapping[str, int]]) -> list[str]:
    problems = []
    for asset, s in sorted(supply.items()):
        held = s["balances"] + s["escrow"] + s["fees"] + s["burned"]
        if held != s["minted"]:
            problems.append(f"{asset}: minted {s['minted']} != balances+escrow+fees+burned {held}")
    return problems
