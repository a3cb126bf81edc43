import pytest

from supernet_lc.workflow import LcBook, LcTerms, Money

PARTIES = (
    ("imp_br", "Importer", "BR"),
    ("exp_in", "Exporter", "IN"),
    ("bank_br", "IssuingBank", "BR"),
    ("bank_in", "AdvisingBank", "IN"),
    ("bank_br2", "IssuingBank", "BR"),
)


def make_terms(**overrides) -> LcTerms:
    fields = dict(
        trade_ref="TR-1",
        applicant="imp_br",
        beneficiary="exp_in",
        issuing_bank="bank_br",
        advising_bank="bank_in",
        amount=Money(1_000_000, "USDC"),
        expiry_tick=100,
        latest_shipment_tick=60,
        required_docs=frozenset({"Invoice", "BillOfLading", "PackingList"}),
    )
    fields.update(overrides)
    return LcTerms(**fields)


def make_book() -> LcBook:
    book = LcBook()
    for pid, role, country in PARTIES:
        book.onboard_party(pid, role, country)
    return book


@pytest.fixture
def book():
    return make_book()


@pytest.fixture
def terms():
    return make_terms()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
