"""Scenario files: JSON documents describing parties, LCs, scripts and faults.

``load_scenario`` parses, validates the structure against ``SCHEMA`` and then
checks every party reference so the driver never meets an undefined id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterator, Mapping

import jsonschema

from .errors import ParseError, SchemaError
from .workflow import DOC_KINDS, ROLES

ACTIONS = (
    "onboard",
    "agree_terms",
    "issue",
    "advise",
    "present",
    "examine",
    "forward",
    "accept",
    "onramp",
    "pay",
    "offramp",
    "escrow_fund",
    "escrow_release",
    "brc",
    "gr",
    "expire",
    "propose",
    "vote",
    "da_present",
    "da_accept",
    "da_paid",
)
SETTLEMENTS = ("usdc", "escrow", "basket", "none")

_ID = {"type": "string", "minLength": 1}
_TICK = {"type": "integer", "minimum": 0}
_MONEY = {
    "type": "object",
    "required": ["amount", "asset"],
    "properties": {"amount": {"type": "integer", "minimum": 1}, "asset": {"type": "string"}},
    "additionalProperties": False,
}
_RATE = {"type": "string", "pattern": r"^[0-9]+(\.[0-9]+)?(/[0-9]+)?$"}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["name", "seed", "parties", "validators"],
    "additionalProperties": False,
    "properties": {
        "name": _ID,
        "description": {"type": "string"},
        "seed": {"type": "integer"},
        "parties": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "role", "country"],
                "properties": {
                    "id": _ID,
                    "role": {"enum": list(ROLES)},
                    "country": {"type": "string", "minLength": 2, "maxLength": 2},
                    "onboard_at": _TICK,
                },
                "additionalProperties": False,
            },
        },
        "validators": {"type": "array", "minItems": 1, "items": _ID, "uniqueItems": True},
        "gas": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        "network": {
            "type": "object",
            "properties": {
                "delay": {"type": "array", "items": _TICK, "minItems": 2, "maxItems": 2},
                "drop_probability": _RATE,
                "round_timeout": {"type": "integer", "minimum": 1},
                "partitions": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["start", "end", "validators"],
                        "properties": {"start": _TICK, "end": _TICK, "validators": {"type": "array", "items": _ID}},
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "faults": {
            "type": "object",
            "properties": {
                "silent": {"type": "array", "items": _ID},
                "tamper": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["trade_ref", "kind"],
                        "properties": {
                            "trade_ref": _ID,
                            "kind": {"enum": list(DOC_KINDS)},
                            "presentation": {"type": "integer", "minimum": 1},
                        },
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "balances": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["owner", "asset", "amount"],
                "properties": {"owner": _ID, "asset": {"type": "string"}, "amount": {"type": "integer", "minimum": 0}},
                "additionalProperties": False,
            },
        },
        "fx": {
            "type": "object",
            "propertyNames": {"pattern": r"^[A-Z]+/[A-Z]+$"},
            "additionalProperties": {
                "type": "object",
                "required": ["rate"],
                "properties": {"rate": _RATE, "fee_bps": {"type": "integer", "minimum": 0, "maximum": 10000}},
                "additionalProperties": False,
            },
        },
        "baskets": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["components"],
                "properties": {
                    "components": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["good_id", "weight", "prices"],
                            "properties": {
                                "good_id": _ID,
                                "weight": _RATE,
                                "prices": {
                                    "type": "object",
                                    "propertyNames": {"pattern": r"^[0-9]+$"},
                                    "additionalProperties": _RATE,
                                },
                            },
                            "additionalProperties": False,
                        },
                    }
                },
                "additionalProperties": False,
            },
        },
        "compliance": {
            "type": "object",
            "properties": {"gr_deadline_ticks": _TICK},
            "additionalProperties": False,
        },
        "lcs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["terms"],
                "properties": {
                    "terms": {
                        "type": "object",
                        "required": [
                            "trade_ref",
                            "applicant",
                            "beneficiary",
                            "issuing_bank",
                            "advising_bank",
                            "amount",
                            "expiry_tick",
                            "latest_shipment_tick",
                            "required_docs",
                        ],
                        "properties": {
                            "trade_ref": _ID,
                            "applicant": _ID,
                            "beneficiary": _ID,
                            "issuing_bank": _ID,
                            "advising_bank": _ID,
                            "amount": _MONEY,
                            "expiry_tick": _TICK,
                            "latest_shipment_tick": _TICK,
                            "required_docs": {"type": "array", "items": {"enum": list(DOC_KINDS)}, "uniqueItems": True},
                            "tenor": {"type": "string"},
                            "amount_tolerance_bps": {"type": "integer", "minimum": 0},
                        },
                        "additionalProperties": False,
                    },
                    "start": _TICK,
                    "step_interval": {"type": "integer", "minimum": 1},
                    "settlement": {"enum": list(SETTLEMENTS)},
                    "basket_id": _ID,
                    "funding": {"type": "integer", "minimum": 0},
                    "documents": {"type": "object", "propertyNames": {"enum": list(DOC_KINDS)}, "additionalProperties": {"type": "object"}},
                    "script": {"type": "boolean"},
                },
                "additionalProperties": False,
            },
        },
        "da_trades": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["trade_ref", "exporter", "importer", "exporter_bank", "importer_bank", "amount"],
                "properties": {
                    "trade_ref": _ID,
                    "exporter": _ID,
                    "importer": _ID,
                    "exporter_bank": _ID,
                    "importer_bank": _ID,
                    "amount": _MONEY,
                    "start": _TICK,
                    "documents": {"type": "object", "propertyNames": {"enum": list(DOC_KINDS)}, "additionalProperties": {"type": "object"}},
                    "durations": {
                        "type": "object",
                        "properties": {
                            k: _TICK for k in ("docs_transit", "acceptance", "payment", "acceptance_delay", "fee_bps")
                        },
                        "additionalProperties": False,
                    },
                },
                "additionalProperties": False,
            },
        },
        "actions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tick", "actor", "action"],
                "properties": {
                    "tick": _TICK,
                    "actor": _ID,
                    "action": {"enum": list(ACTIONS)},
                    "trade_ref": _ID,
                    "party": _ID,
                    "amount": {"type": "integer", "minimum": 0},
                    "terms": {"type": "object"},
                    "documents": {"type": "object", "propertyNames": {"enum": list(DOC_KINDS)}, "additionalProperties": {"type": "object"}},
                    "omit": {"type": "array", "items": {"enum": list(DOC_KINDS)}},
                    "proposal_id": _ID,
                    "op": {"enum": ["Add", "Remove"]},
                    "subject": _ID,
                    "approve": {"type": "boolean"},
                },
                "additionalProperties": False,
            },
        },
        "baseline": {
            "type": "object",
            "properties": {
                k: _TICK for k in ("swift_issuance", "manual_exam", "courier", "issuing_exam", "swift_payment")
            },
            "additionalProperties": False,
        },
        "indices": {
            "type": "object",
            "properties": {"requests": {"type": "array", "items": {"type": "object"}}},
            "additionalProperties": False,
        },
        "manual_fee": {
            "type": "object",
            "required": ["amount", "asset"],
            "properties": {"amount": {"type": "integer", "minimum": 0}, "asset": {"enum": ["BRL", "INR", "USDC"]}},
            "additionalProperties": False,
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    """A validated scenario; ``data`` is the plain JSON document."""

    data: dict
    source: str = "<memory>"

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario({**self.data, "seed": int(seed)}, self.source)

    def party(self, party_id: str) -> dict:
        for p in self.data["parties"]:
            if p["id"] == party_id:
                return p
        raise KeyError(party_id)

    def genesis_parties(self) -> list[dict]:
        validators = set(self.data["validators"])
        return [p for p in self.data["parties"] if p["id"] in validators]

    def genesis_config(self) -> dict:
        parties = [{k: p[k] for k in ("id", "role", "country")} for p in self.genesis_parties()]
        config = {
            "name": self.name,
            "validators": list(self.data["validators"]),
            "parties": parties,
            "balances": list(self.data.get("balances", [])),
            "baskets": dict(self.data.get("baskets", {})),
            "gas": dict(self.data.get("gas", {})),
            "rules": dict(self.data.get("compliance", {})),
        }
        return json.loads(json.dumps(config, sort_keys=True))


def _field_path(error: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in error.absolute_path) or "<root>"


def _references(data: Mapping) -> Iterator[tuple[str, str]]:
    """Yield (field path, party id) for every id the scenario mentions."""
    for i, v in enumerate(data.get("validators", [])):
        yield f"validators/{i}", v
    for i, b in enumerate(data.get("balances", [])):
        yield f"balances/{i}/owner", b["owner"]
    for i, lc in enumerate(data.get("lcs", [])):
        for role in ("applicant", "beneficiary", "issuing_bank", "advising_bank"):
            yield f"lcs/{i}/terms/{role}", lc["terms"][role]
    for i, da in enumerate(data.get("da_trades", [])):
        for role in ("exporter", "importer", "exporter_bank", "importer_bank"):
            yield f"da_trades/{i}/{role}", da[role]
    for i, a in enumerate(data.get("actions", [])):
        for key in ("actor", "party", "subject"):
            if key in a:
                yield f"actions/{i}/{key}", a[key]
    faults = data.get("faults", {})
    for i, v in enumerate(faults.get("silent", [])):
        yield f"faults/silent/{i}", v
    for i, p in enumerate(data.get("network", {}).get("partitions", [])):
        for j, v in enumerate(p["validators"]):
            yield f"network/partitions/{i}/validators/{j}", v


def validate_scenario(data: Any) -> Scenario:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError(_field_path(errors[0]), errors[0].message)
    ids = [p["id"] for p in data["parties"]]
    dupes = sorted({x for x in ids if ids.count(x) > 1})
    if dupes:
        raise SchemaError("parties", f"duplicate party ids {dupes}")
    known = set(ids)
    for path, ref in _references(data):
        if ref not in known:
            raise SchemaError(path, f"undefined party id {ref!r}")
    roles = {p["id"]: p["role"] for p in data["parties"]}
    for i, v in enumerate(data["validators"]):
        if roles[v] not in ("IssuingBank", "AdvisingBank"):
            raise SchemaError(f"validators/{i}", f"{v} is not a bank")
    for i, lc in enumerate(data.get("lcs", [])):
        if lc.get("settlement") == "basket" and lc.get("basket_id") not in data.get("baskets", {}):
            raise SchemaError(f"lcs/{i}/basket_id", "basket settlement needs a defined basket")
    refs = [lc["terms"]["trade_ref"] for lc in data.get("lcs", [])] + [d["trade_ref"] for d in data.get("da_trades", [])]
    if len(set(refs)) != len(refs):
        raise SchemaError("lcs", "trade references must be unique; inject duplicates through actions")
    last: dict[str, int] = {}
    for i, a in enumerate(data.get("actions", [])):
        if a["tick"] < last.get(a["actor"], 0):
            raise SchemaError(f"actions/{i}/tick", f"ticks for {a['actor']} must not decrease")
        last[a["actor"]] = a["tick"]
    return Scenario(data)


def parse_scenario(text: str, source: str = "<memory>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"{source}: {exc.msg} (column {exc.colno})") from None
    scenario = validate_scenario(data)
    return Scenario(scenario.data, source)


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file; a bare name that is not a file selects a bundled scenario."""
    path = Path(path)
    if not path.exists() and path.suffix == "" and len(path.parts) == 1:
        candidate = bundled_dir() / f"{path.name}.json"
        if candidate.exists():
            path = candidate
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def bundled_dir() -> Path:
    return Path(str(resources.files("supernet_lc") / "data" / "scenarios"))


def bundled_scenarios() -> list[Path]:
    return sorted(bundled_dir().glob("*.json"))


def bundled(name: str) -> Scenario:
    return load_scenario(bundled_dir() / f"{name}.json")
