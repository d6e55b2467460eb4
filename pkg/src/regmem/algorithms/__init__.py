"""Register-emulation protocols and the contract they implement."""

from __future__ import annotations

from typing import Optional

from ..errors import InvalidParams
from .abd import IGNORE_SECOND_WRITE, abd_spec
from .coded import FINALIZE_HASH, coded_spec
from .protocol import AlgorithmSpec, Phase, PhasePlan
from .xor_demo import sum_scenario, xor_demo_spec

ALGORITHMS = ("abd", "coded", "coded-gossip", "xor-demo")


def make_spec(name: str, n_servers: int, f: int, n_values: int, nu: int = 1,
              mutation: Optional[str] = None, allow_minority: bool = True) -> AlgorithmSpec:
    """Look a protocol up by name.  Minority quorums are admitted by default
    because the adversarial constructions confine executions to N - f servers."""
    if name == "abd":
        return abd_spec(n_servers, f, n_values, allow_minority=allow_minority, mutation=mutation)
    if name in ("coded", "coded-gossip"):
        return coded_spec(n_servers, f, nu, n_values, gossip=name == "coded-gossip", mutation=mutation)
    if name == "xor-demo":
        return xor_demo_spec()
    raise InvalidParams(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")


__all__ = ["ALGORITHMS", "AlgorithmSpec", "FINALIZE_HASH", "IGNORE_SECOND_WRITE", "Phase", "PhasePlan",
           "abd_spec", "coded_spec", "make_spec", "sum_scenario", "xor_demo_spec"]
