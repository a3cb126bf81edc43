import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import BRL_INR, make_accounts, decimal_convert, random_operation
from supernet_lc.errors import (
    ConditionNotMet,
    InsufficientFunds,
    InvalidWallet,
    MissingPrice,
    NoSettlementTrigger,
    QuotePairMismatch,
    SupernetError,
)
from supernet_lc.settlement import (
    BasketComponent,
    BasketDefinition,
    FxQuote,
    SettlementTrigger,
    basket_value,
    convert,
)

BRL_USDC = FxQuote("BRL", "USDC", Fraction(1, 5), 50)
USDC_INR = FxQuote("USDC", "INR", Fraction(83), 25)


# -- worked examples ----------------------------------------------------------


def test_onramp_one_million_reais():
    acc = make_accounts()
    net = acc.onramp("bank_br", 100_000_000, BRL_USDC)
    assert net == 199_000_000_000
    assert acc.balance("bank_br", "USDC") == 199_000_000_000
    assert acc.fees["bank_br"]["USDC"] == 1_000_000_000
    assert acc.balance("bank_br", "BRL") == 0


def test_offramp_payout_and_fee():
    acc = make_accounts()
    acc.onramp("bank_br", 100_000_000, BRL_USDC)
    acc.add_trigger(SettlementTrigger("lc", "bank_br", "bank_in", "USDC", 199_000_000_000))
    acc.transfer("bank_br", "bank_in", 199_000_000_000, "lc", 5)
    paise = acc.offramp("bank_in", 199_000_000_000, USDC_INR, "exp_in", lc="lc")
    assert paise == 1_647_570_750
    assert acc.balance("exp_in", "INR") == 1_647_570_750
    assert acc.fees["bank_in"]["INR"] == 4_129_250
    assert acc.conservation_violations() == []


def test_basket_value_example():
    basket = BasketDefinition("b", (
        BasketComponent("machines", Fraction(1, 2), ((0, Fraction(200)),)),
        BasketComponent("soybeans", Fraction(1, 2), ((0, Fraction(40)),)),
    ))
    assert basket_value(basket, 0) == 120


def test_basket_price_steps_and_missing_price():
    comp = BasketComponent("m", Fraction(1), ((5, Fraction(10)), (10, Fraction(12))))
    assert comp.price_at(5) == 10 and comp.price_at(9) == 10 and comp.price_at(10) == 12
    with pytest.raises(MissingPrice):
        comp.price_at(4)


def test_basket_definition_round_trip_and_validation():
    data = {"components": [{"good_id": "a", "weight": "1/4", "prices": {"0": "8"}},
                           {"good_id": "b", "weight": "3/4", "prices": {"0": "4", "3": "5"}}]}
    basket = BasketDefinition.from_dict("x", data)
    assert BasketDefinition.from_dict("x", basket.to_dict()) == basket
    assert basket_value(basket, 3) == Fraction(2) + Fraction(15, 4)
    with pytest.raises(ValueError):
        BasketDefinition("y", (BasketComponent("a", Fraction(1, 2), ((0, Fraction(1)),)),))


def test_basket_lc_settles_at_current_value():
    acc = make_accounts()
    acc.onramp("bank_br", 100_000_000, BRL_USDC)
    acc.baskets["b"] = BasketDefinition("b", (
        BasketComponent("m", Fraction(1, 2), ((0, Fraction(200)), (10, Fraction(210)))),
        BasketComponent("s", Fraction(1, 2), ((0, Fraction(40)),)),
    ))
    acc.add_trigger(SettlementTrigger("lc", "bank_br", "bank_in", "BASKET", 1_000_000, basket_id="b"))
    assert acc.amount_due("lc", 9) == 120_000_000
    assert acc.amount_due("lc", 10) == 125_000_000
    with pytest.raises(NoSettlementTrigger):
        acc.transfer("bank_br", "bank_in", 1, "lc", 10)
    acc.transfer("bank_br", "bank_in", 125_000_000, "lc", 10)
    assert acc.triggers["lc"].outstanding == 0
    assert acc.hops["lc"]["basket"]["value_usdc"] == 125_000_000


def test_escrow_release_credits_advising_bank_in_rupees():
    acc = make_accounts(60_000_000)
    acc.escrow_fund("bank_br", 50_000_000, "bank_in", "lc")
    assert acc.supply()["BRL"]["escrow"] == 50_000_000
    with pytest.raises(ConditionNotMet):
        acc.escrow_release("lc", False, BRL_INR)
    inr = acc.escrow_release("lc", True, BRL_INR)
    gross, net = decimal_convert(50_000_000, "16.5", 2, 2, 30)
    assert inr == net and acc.balance("bank_in", "INR") == net
    assert acc.supply()["BRL"]["escrow"] == 0
    with pytest.raises(ConditionNotMet):
        acc.escrow_release("lc", True, BRL_INR)
    assert acc.conservation_violations() == []


# -- error paths -------------------------------------------------------------


def test_quote_pair_and_wallet_errors():
    acc = make_accounts()
    with pytest.raises(QuotePairMismatch):
        acc.onramp("bank_br", 1, USDC_INR)
    with pytest.raises(QuotePairMismatch):
        acc.offramp("bank_br", 0, BRL_USDC, "exp_in")
    with pytest.raises(InvalidWallet):
        acc.fund("exp_in", "USDC", 1)
    with pytest.raises(InsufficientFunds):
        acc.onramp("bank_br", 100_000_001, BRL_USDC)


def test_transfer_needs_a_matching_trigger():
    acc = make_accounts()
    acc.onramp("bank_br", 1_000, BRL_USDC)
    with pytest.raises(NoSettlementTrigger):
        acc.transfer("bank_br", "bank_in", 10, "lc", 1)
    acc.add_trigger(SettlementTrigger("lc", "bank_br", "bank_in", "USDC", 100))
    with pytest.raises(NoSettlementTrigger):
        acc.transfer("bank_in", "bank_br", 10, "lc", 1)
    with pytest.raises(NoSettlementTrigger):
        acc.transfer("bank_br", "bank_in", 101, "lc", 1)


def test_offramp_against_unpaid_lc_is_refused():
    acc = make_accounts()
    acc.onramp("bank_br", 1_000, BRL_USDC)
    acc.add_trigger(SettlementTrigger("lc", "bank_br", "bank_in", "USDC", 100))
    acc.transfer("bank_br", "bank_in", 50, "lc", 1)
    with pytest.raises(ConditionNotMet):
        acc.offramp("bank_in", 50, USDC_INR, "exp_in", lc="lc")


def test_quote_validation():
    with pytest.raises(ValueError):
        FxQuote("BRL", "USDC", Fraction(0))
    with pytest.raises(ValueError):
        FxQuote("BRL", "USDC", Fraction(1), 10001)
    assert FxQuote.from_dict(USDC_INR.to_dict()) == USDC_INR


# -- properties -----------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(
    amount=st.integers(0, 10**15),
    num=st.integers(1, 10**6),
    den=st.integers(1, 10**4),
    fee=st.integers(0, 10000),
)
def test_convert_matches_decimal_oracle(amount, num, den, fee):
    rate = Fraction(num, den)
    conv = convert(amount, FxQuote("USDC", "INR", rate, fee))
    gross = (Fraction(amount) * rate / 10**4).__floor__()
    assert conv.gross == gross
    assert conv.net == (gross * Fraction(10000 - fee, 10000)).__floor__()
    assert 0 <= conv.fee <= conv.gross


def test_convert_decimal_oracle_on_worked_examples():
    assert convert(100_000_000, BRL_USDC).net == decimal_convert(100_000_000, "0.20", 2, 6, 50)[1]
    assert convert(199_000_000_000, USDC_INR).net == decimal_convert(199_000_000_000, "83", 6, 2, 25)[1]


def test_conservation_over_random_operation_sequences():
    rng = random.Random(99)
    applied = 0
    for _ in range(1_000):
        acc = make_accounts(rng.choice([0, 10**6, 10**9]))
        for _ in range(rng.randint(1, 25)):
            try:
                random_operation(acc, rng)
                applied += 1
            except SupernetError:
                pass
            assert acc.conservation_violations() == []
            assert all(v >= 0 for w in acc.balances.values() for v in w.values())
    assert applied > 3_000
