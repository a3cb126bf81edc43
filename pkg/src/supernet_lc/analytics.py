"""Trade indices: trade intensity, revealed comparative advantage, TiVA shares.

All arithmetic is exact (``Fraction``); reports round half-even to three
decimals only at the edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .errors import AllZero, MissingAggregate, NonPositiveInput, ParseError, SchemaError

Number = int | float | str | Fraction | Decimal


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value)) if isinstance(value, (str, Decimal)) else Fraction(value)


def _positive(**values: Number) -> list[Fraction]:
    out = []
    for name, value in values.items():
        q = as_fraction(value)
        if q <= 0:
            raise NonPositiveInput(f"{name} must be > 0, got {value}")
        out.append(q)
    return out


def tii(x_ij: Number, x_i: Number, m_wj: Number, m_w: Number) -> Fraction:
    a, b, c, d = _positive(x_ij=x_ij, x_i=x_i, m_wj=m_wj, m_w=m_w)
    return (a / b) / (c / d)


def rca(
    country_sector_exports: Number,
    country_total_exports: Number,
    world_sector_exports: Number,
    world_total_exports: Number,
) -> Fraction:
    if as_fraction(country_sector_exports) < 0:
        raise NonPositiveInput("sector exports cannot be negative")
    ct, ws, wt = _positive(
        country_total_exports=country_total_exports,
        world_sector_exports=world_sector_exports,
        world_total_exports=world_total_exports,
    )
    return (as_fraction(country_sector_exports) / ct) / (ws / wt)


def tiva_shares(values: Mapping[str, Number]) -> dict[str, Fraction]:
    parsed = {k: as_fraction(v) for k, v in values.items()}
    if any(v < 0 for v in parsed.values()):
        raise NonPositiveInput("value added cannot be negative")
    total = sum(parsed.values(), Fraction(0))
    if total == 0:
        raise AllZero("at least one value must be positive")
    return {k: v / total * 100 for k, v in parsed.items()}


def round3(value: Fraction) -> Decimal:
    return (Decimal(value.numerator) / Decimal(value.denominator)).quantize(Decimal("0.001"), ROUND_HALF_EVEN)


# -- flow table ----------------------------------------------------------------

AGGREGATES = ("x_ij", "x_i", "m_wj", "m_w", "x_is", "x_ws", "va")
WORLD = "WLD"


@dataclass
class TradeFlowTable:
    """Bilateral sector flows plus headline aggregates that override summation.

    Keys: flows ``(origin, destination, sector, year)``; overrides
    ``(name, country, partner, sector, year)`` with empty strings for unused
    slots.
    """

    flows: dict[tuple[str, str, str, int], Fraction] = field(default_factory=dict)
    overrides: dict[tuple[str, str, str, str, int], Fraction] = field(default_factory=dict)

    def add_flow(self, origin: str, dest: str, sector: str, year: int, value: Number) -> None:
        v = as_fraction(value)
        if v < 0:
            raise NonPositiveInput("flows cannot be negative")
        self.flows[(origin, dest, sector, year)] = self.flows.get((origin, dest, sector, year), Fraction(0)) + v

    def set_aggregate(self, name: str, year: int, value: Number, country: str = "", partner: str = "", sector: str = "") -> None:
        if name not in AGGREGATES:
            raise SchemaError("name", f"unknown aggregate {name!r}")
        v = as_fraction(value)
        if v < 0:
            raise NonPositiveInput(f"{name} cannot be negative")
        self.overrides[(name, country, partner, sector, year)] = v

    def _sum(self, year: int, origin=None, dest=None, sector=None) -> Fraction | None:
        hits = [
            v
            for (o, d, s, y), v in self.flows.items()
            if y == year and (origin is None or o == origin) and (dest is None or d == dest) and (sector is None or s == sector)
        ]
        return sum(hits, Fraction(0)) if hits else None

    def aggregate(self, name: str, year: int, country: str = "", partner: str = "", sector: str = "") -> Fraction:
        key = (name, country, partner, sector, year)
        if key in self.overrides:
            return self.overrides[key]
        derived = {
            "x_ij": lambda: self._sum(year, origin=country, dest=partner),
            "x_i": lambda: self._sum(year, origin=country),
            "m_wj": lambda: self._sum(year, dest=partner),
            "m_w": lambda: self._sum(year),
            "x_is": lambda: self._sum(year, origin=country, sector=sector),
            "x_ws": lambda: self._sum(year, sector=sector),
        }.get(name, lambda: None)()
        if derived is None:
            label = "/".join(p for p in (name, country, partner, sector, str(year)) if p)
            raise MissingAggregate(label)
        return derived

    def to_rows(self) -> list[dict]:
        rows = [
            {"name": n, "country": c, "partner": p, "sector": s, "year": y, "value": str(v)}
            for (n, c, p, s, y), v in sorted(self.overrides.items())
        ]
        rows += [
            {"name": "flow", "country": o, "partner": d, "sector": s, "year": y, "value": str(v)}
            for (o, d, s, y), v in sorted(self.flows.items())
        ]
        return rows

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping]) -> "TradeFlowTable":
        table = cls()
        for row in rows:
            year = int(row["year"])
            if row["name"] == "flow":
                table.add_flow(row["country"], row["partner"], row["sector"], year, row["value"])
            else:
                table.set_aggregate(row["name"], year, row["value"], row.get("country", ""), row.get("partner", ""), row.get("sector", ""))
        return table


FIXTURE_COLUMNS = ("name", "country", "partner", "sector", "year", "value")


def load_table(path: str | Path) -> TradeFlowTable:
    """Read a comma-delimited aggregates table; ``#`` lines are comments."""
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [(i, line) for i, line in enumerate(handle, start=1) if line.strip() and not line.startswith("#")]
    if not lines:
        return TradeFlowTable()
    reader = csv.reader(line for _, line in lines)
    header = next(reader)
    if tuple(h.strip() for h in header) != FIXTURE_COLUMNS:
        raise ParseError(lines[0][0], f"expected header {','.join(FIXTURE_COLUMNS)}")
    for (lineno, _), record in zip(lines[1:], reader):
        if len(record) != len(FIXTURE_COLUMNS):
            raise ParseError(lineno, f"expected {len(FIXTURE_COLUMNS)} fields, got {len(record)}")
        row = dict(zip(FIXTURE_COLUMNS, (f.strip() for f in record)))
        try:
            int(row["year"])
            as_fraction(row["value"])
        except (ValueError, ZeroDivisionError):
            raise ParseError(lineno, "year must be an integer and value a number") from None
        rows.append(row)
    return TradeFlowTable.from_rows(rows)


def bundled_fixture() -> Path:
    return Path(__file__).parent / "data" / "trade_2021.csv"


# -- report ---------------------------------------------------------------------


def _interpret(index: str, value: Fraction) -> str:
    if index == "tii":
        if value > 1:
            return "more intensive than world average"
        return "less intensive than world average" if value < 1 else "at world average"
    if index == "rca":
        if value > 1:
            return "comparative advantage"
        return "comparative disadvantage" if value < 1 else "neutral"
    return ""


def index_report(table: TradeFlowTable, requests: Iterable[Mapping]) -> list[dict]:
    """Evaluate each requested index, echoing the inputs used."""
    report = []
    for req in requests:
        kind = req.get("index")
        year = int(req.get("year", 0))
        if kind == "tii":
            i, j = req["exporter"], req["partner"]
            inputs = {
                "x_ij": table.aggregate("x_ij", year, country=i, partner=j),
                "x_i": table.aggregate("x_i", year, country=i),
                "m_wj": table.aggregate("m_wj", year, partner=j),
                "m_w": table.aggregate("m_w", year),
            }
            value = tii(**inputs)
            entry = {"index": "tii", "exporter": i, "partner": j, "year": year, "value": str(round3(value))}
        elif kind == "rca":
            c, s = req["country"], req["sector"]
            inputs = {
                "x_is": table.aggregate("x_is", year, country=c, sector=s),
                "x_i": table.aggregate("x_i", year, country=c),
                "x_ws": table.aggregate("x_ws", year, sector=s),
                "m_w": table.aggregate("m_w", year),
            }
            value = rca(inputs["x_is"], inputs["x_i"], inputs["x_ws"], inputs["m_w"])
            entry = {"index": "rca", "country": c, "sector": s, "year": year, "value": str(round3(value))}
        elif kind == "tiva":
            s = req["sector"]
            inputs = {c: table.aggregate("va", year, country=c, sector=s) for c in req["countries"]}
            shares = tiva_shares(inputs)
            entry = {
                "index": "tiva",
                "sector": s,
                "year": year,
                "shares": {c: str(round3(v)) for c, v in shares.items()},
            }
            value = None
        else:
            raise SchemaError("index", f"unknown index {kind!r}")
        entry["inputs"] = {k: _fmt(v) for k, v in inputs.items()}
        if value is not None:
            entry["reading"] = _interpret(kind, value)
        report.append(entry)
    return report


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else str(round3(v))


DEFAULT_REQUESTS = (
    {"index": "tii", "exporter": "IND", "partner": "BRA", "year": 2021},
    {"index": "rca", "country": "IND", "sector": "pharmaceuticals", "year": 2021},
    {"index": "rca", "country": "BRA", "sector": "pharmaceuticals", "year": 2021},
    {"index": "tiva", "sector": "automotive_parts", "countries": ["IND", "BRA"], "year": 2016},
)
