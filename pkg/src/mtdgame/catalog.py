"""Offline vulnerability catalog: CIA impact and access complexity per entry."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping


class AccessComplexity(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HIGH = "high"


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class VulnRecord:
    key: str
    cve: str
    vm: str
    service: str
    cia: float
    ac: AccessComplexity

    def __post_init__(self):
        if not 0.0 <= self.cia <= 10.0:
            raise CatalogError(f"{self.key}: cia {self.cia} outside [0, 10]")


Catalog = Mapping[str, VulnRecord]

DEFAULT_AC_MAP: Mapping[AccessComplexity, float] = MappingProxyType(
    {
        AccessComplexity.EASY: 0.9,
        AccessComplexity.MEDIUM: 0.66,
        AccessComplexity.HIGH: 0.35,
    }
)


def check_ac_map(ac_map: Mapping[AccessComplexity, float]) -> None:
    """Raise ``CatalogError`` unless the map covers all categories, in (0, 1], ordered."""
    missing = set(AccessComplexity) - set(ac_map)
    if missing:
        raise CatalogError(f"access-complexity map lacks {sorted(m.value for m in missing)}")
    for ac, p in ac_map.items():
        if not 0.0 < p <= 1.0:
            raise CatalogError(f"success probability for {ac.value} must be in (0, 1], got {p}")
    easy, medium, high = (ac_map[a] for a in AccessComplexity)
    if not easy >= medium >= high:
        raise CatalogError("access-complexity map must satisfy easy >= medium >= high")


def parse_ac_map(raw: Mapping[str, float]) -> dict[AccessComplexity, float]:
    out = {_parse_ac(k): float(v) for k, v in raw.items()}
    check_ac_map(out)
    return out


def ac_to_probability(
    ac: AccessComplexity, ac_map: Mapping[AccessComplexity, float] = DEFAULT_AC_MAP
) -> float:
    return ac_map[ac]


def _parse_ac(text) -> AccessComplexity:
    try:
        return AccessComplexity(str(text).lower())
    except ValueError:
        raise CatalogError(f"unknown access complexity {text!r}") from None


_FIELDS = ("key", "cve", "vm", "service", "cia", "ac")


def catalog_from_records(records) -> dict[str, VulnRecord]:
    out: dict[str, VulnRecord] = {}
    for rec in records:
        if rec.key in out:
            raise CatalogError(f"duplicate catalog key {rec.key!r}")
        out[rec.key] = rec
    return out


def catalog_from_list(items: list) -> dict[str, VulnRecord]:
    if not isinstance(items, list):
        raise CatalogError("catalog must be a JSON array")
    records = []
    for i, raw in enumerate(items):
        if not isinstance(raw, dict):
            raise CatalogError(f"entry {i}: expected an object")
        extra = set(raw) - set(_FIELDS)
        missing = set(_FIELDS) - set(raw)
        if extra or missing:
            raise CatalogError(f"entry {i}: unknown {sorted(extra)} / missing {sorted(missing)}")
        cia = raw["cia"]
        if isinstance(cia, bool) or not isinstance(cia, (int, float)):
            raise CatalogError(f"entry {i}: cia must be a number")
        records.append(
            VulnRecord(
                key=str(raw["key"]),
                cve=str(raw["cve"]),
                vm=str(raw["vm"]),
                service=str(raw["service"]),
                cia=float(cia),
                ac=_parse_ac(raw["ac"]),
            )
        )
    return catalog_from_records(records)


def catalog_to_list(cat: Catalog) -> list[dict]:
    return [
        {
            "key": r.key,
            "cve": r.cve,
            "vm": r.vm,
            "service": r.service,
            "cia": r.cia,
            "ac": r.ac.value,
        }
        for r in cat.values()
    ]


def load_catalog(path: str | Path) -> dict[str, VulnRecord]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CatalogError(f"{path}: {exc}") from exc
    return catalog_from_list(data)


def dump_catalog(cat: Catalog, path: str | Path) -> None:
    text = json.dumps(catalog_to_list(cat), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")
