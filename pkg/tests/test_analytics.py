from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supernet_lc.analytics import (
    DEFAULT_REQUESTS,
    TradeFlowTable,
    bundled_fixture,
    index_report,
    load_table,
    rca,
    round3,
    tii,
    tiva_shares,
)
from supernet_lc.errors import AllZero, MissingAggregate, NonPositiveInput, ParseError

positive = st.fractions(min_value=Fraction(1, 1000), max_value=10**12)


def close(value, target, tol):
    return abs(Fraction(value) - Fraction(target)) <= Fraction(tol)


# -- kernels ---------------------------------------------------------------------


def test_tii_published_value():
    value = tii(6.77e9, 403e9, 225e9, 21e12)
    assert close(value, "1.567", "0.001")
    assert value > 1


def test_tii_hand_example():
    assert tii(10, 100, 50, 1000) == 2


def test_tii_rejects_non_positive():
    with pytest.raises(NonPositiveInput):
        tii(0, 100, 50, 1000)
    with pytest.raises(NonPositiveInput):
        tii(1, 100, -50, 1000)


def test_rca_published_values():
    assert close(rca(21.7e9, 403e9, 806e9, 21e12), "1.40", "0.01")
    assert close(rca(1.36e9, 288e9, 806e9, 21e12), "0.12", "0.01")


def test_rca_neutral_and_zero_sector():
    assert rca(5, 50, 100, 1000) == 1
    assert rca(0, 50, 100, 1000) == 0
    with pytest.raises(NonPositiveInput):
        rca(1, 0, 100, 1000)


def test_tiva_examples():
    shares = tiva_shares({"IND": 10.2e9, "BRA": 6.4e9})
    assert close(shares["IND"], "61.4", "0.1") and close(shares["BRA"], "38.6", "0.1")
    assert tiva_shares({"A": 3, "B": 3}) == {"A": 50, "B": 50}
    assert tiva_shares({"A": 1, "B": 1, "C": 2}) == {"A": 25, "B": 25, "C": 50}
    with pytest.raises(AllZero):
        tiva_shares({"A": 0, "B": 0})
    with pytest.raises(NonPositiveInput):
        tiva_shares({"A": -1, "B": 2})


def test_round_half_even():
    assert round3(Fraction(1, 8000)) == Decimal("0.000")
    assert round3(Fraction(3, 2000)) == Decimal("0.002")
    assert round3(Fraction(2, 3)) == Decimal("0.667")


# -- properties ---------------------------------------------------------------


@settings(max_examples=200)
@given(st.tuples(positive, positive, positive, positive), positive)
def test_tii_scale_invariant(inputs, k):
    assert tii(*(v * k for v in inputs)) == tii(*inputs)


@settings(max_examples=200)
@given(st.tuples(positive, positive, positive, positive), positive)
def test_rca_scale_invariant(inputs, k):
    assert rca(*(v * k for v in inputs)) == rca(*inputs)


@settings(max_examples=200)
@given(st.dictionaries(st.text("ABCDEFG", min_size=1, max_size=3), st.integers(0, 10**12), min_size=1, max_size=8))
def test_tiva_shares_sum_to_hundred(values):
    if not any(values.values()):
        with pytest.raises(AllZero):
            tiva_shares(values)
        return
    shares = tiva_shares(values)
    assert sum(shares.values()) == 100
    rounded = sum(round3(v) for v in shares.values())
    assert abs(rounded - 100) <= Decimal("0.1")


# -- table and report -----------------------------------------------------


def test_bundled_fixture_report():
    report = index_report(load_table(bundled_fixture()), DEFAULT_REQUESTS)
    tii_row, rca_in, rca_br, tiva = report
    assert close(Fraction(tii_row["value"]), "1.567", "0.001")
    assert tii_row["reading"] == "more intensive than world average"
    assert close(Fraction(rca_in["value"]), "1.40", "0.01") and rca_in["reading"] == "comparative advantage"
    assert close(Fraction(rca_br["value"]), "0.12", "0.01") and rca_br["reading"] == "comparative disadvantage"
    assert close(Fraction(tiva["shares"]["IND"]), "61.4", "0.1")
    assert close(Fraction(tiva["shares"]["BRA"]), "38.6", "0.1")
    assert tii_row["inputs"]["x_ij"] == "6770000000"


def test_empty_request_gives_empty_report():
    assert index_report(TradeFlowTable(), []) == []


def test_missing_world_sector_total():
    table = TradeFlowTable()
    table.set_aggregate("x_is", 2021, 5, country="IND", sector="pharma")
    table.set_aggregate("x_i", 2021, 50, country="IND")
    table.set_aggregate("m_w", 2021, 1000)
    with pytest.raises(MissingAggregate):
        index_report(table, [{"index": "rca", "country": "IND", "sector": "pharma", "year": 2021}])


def test_aggregates_fall_back_to_flow_sums():
    table = TradeFlowTable()
    table.add_flow("IND", "BRA", "a", 2021, 10)
    table.add_flow("IND", "BRA", "b", 2021, 5)
    table.add_flow("BRA", "IND", "a", 2021, 20)
    assert table.aggregate("x_ij", 2021, country="IND", partner="BRA") == 15
    assert table.aggregate("m_wj", 2021, partner="IND") == 20
    assert table.aggregate("m_w", 2021) == 35
    assert table.aggregate("x_ws", 2021, sector="a") == 30
    table.set_aggregate("m_w", 2021, 100)
    assert table.aggregate("m_w", 2021) == 100
    assert TradeFlowTable.from_rows(table.to_rows()) == table


def test_csv_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("name,country\nx_i,IND\n")
    with pytest.raises(ParseError):
        load_table(bad_header)
    bad_value = tmp_path / "v.csv"
    bad_value.write_text("# c\nname,country,partner,sector,year,value\nx_i,IND,,,2021,abc\n")
    with pytest.raises(ParseError) as info:
        load_table(bad_value)
    assert info.value.line == 3
