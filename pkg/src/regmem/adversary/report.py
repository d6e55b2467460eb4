"""Fingerprints and witness reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from ..bounds import ProductForm
from ..encoding import digest, encode

PROBE_DISCLOSURE = (
    "Valency is probed with one canonical deterministic extension per point. "
    "A probe returning v_k certifies k-valency; 'not k-valent' is approximated by the same probe."
)


@dataclass(frozen=True)
class StateFingerprint:
    variant: str
    states: tuple[bytes, ...]
    changed: tuple[tuple[int, bytes], ...] = ()
    labels: tuple = ()

    @property
    def key(self) -> bytes:
        return encode((self.variant, self.labels, self.states, self.changed))

    def short(self) -> str:
        return digest(self.key)


@dataclass
class WitnessReport:
    theorem: str
    config: dict
    domain_size: int
    fingerprints: dict = field(default_factory=dict)
    state_counts: dict = field(default_factory=dict)
    product_form: Optional[ProductForm] = None
    collisions: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def distinct(self) -> int:
        return len({fp.key for fp in self.fingerprints.values()})

    @property
    def injective(self) -> bool:
        return not self.collisions

    @property
    def lhs(self) -> int:
        return self.product_form.lhs(list(self.state_counts.values()))

    @property
    def rhs(self) -> int:
        return self.product_form.rhs

    @property
    def product_holds(self) -> bool:
        return self.lhs >= self.rhs

    @property
    def ok(self) -> bool:
        return self.injective and self.product_holds and all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "config": self.config,
            "domain_size": self.domain_size,
            "fingerprints": len(self.fingerprints),
            "distinct_fingerprints": self.distinct,
            "injective": self.injective,
            "collisions": [[list(a), list(b)] for a, b in self.collisions],
            "state_counts": {f"s{n}": c for n, c in sorted(self.state_counts.items())},
            "product_form": {
                "template": self.product_form.template,
                "lhs": str(self.lhs),
                "rhs": str(self.rhs),
                "holds": self.product_holds,
            },
            "checks": dict(sorted(self.checks.items())),
            "details": self.details,
            "ok": self.ok,
            "probe_disclosure": PROBE_DISCLOSURE,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else list(obj)
    if isinstance(obj, bytes):
        return obj.hex()
    return str(obj)


def find_collisions(fingerprints: dict) -> list[tuple[Any, Any]]:
    seen: dict[bytes, Any] = {}
    out = []
    for key in sorted(fingerprints, key=repr):
        k = fingerprints[key].key
        if k in seen:
            out.append((seen[k], key))
        else:
            seen[k] = key
    return out
