"""Edge activation and the time-indexed authorization graphs.

``active_edges`` gives the assignment pairs whose validity interval covers a
tick; ``active_st_edges`` further keeps only region-compatible pairs.  Region
compatibility does not depend on time, so it is memoized on the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import NotAssignedError, UnknownTokenError
from .model import FederationModel, Pair


class EdgeKind(str, Enum):
    TEMPORAL = "temporal-only"
    SPATIO_TEMPORAL = "spatio-temporal"


@dataclass(frozen=True)
class EdgeSet:
    edges: tuple[Pair, ...]  # sorted by (role, object)
    at: int
    kind: EdgeKind

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.edges

    def __iter__(self):
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "at": self.at,
            "kind": self.kind.value,
            "edges": [{"role": r, "object": o} for r, o in self.edges],
        }


def edge_active(model: FederationModel, r: str, o: str, t: int) -> bool:
    interval = model.tau.get((r, o))
    if interval is None:
        raise NotAssignedError(f"({r!r}, {o!r}) is not in the permission assignment")
    return interval.start <= t <= interval.end


def active_edges(model: FederationModel, t: int) -> EdgeSet:
    edges = sorted(e for e, iv in model.tau.items() if iv.start <= t <= iv.end)
    return EdgeSet(tuple(edges), t, EdgeKind.TEMPORAL)


def _check_tokens(model: FederationModel, r: str, o: str) -> None:
    if r not in model.roles:
        raise UnknownTokenError("role", r)
    if o not in model.objects:
        raise UnknownTokenError("object", o)


def region_allowed_uncached(model: FederationModel, r: str, o: str) -> bool:
    _check_tokens(model, r, o)
    object_labels = model.rho_o[o]
    return any(
        (lr, lo) in model.gamma
        for lr in model.rho_r[r]
        for lo in object_labels
    )


def region_allowed(model: FederationModel, r: str, o: str) -> bool:
    """True iff some role label reaches some object label through gamma.

    Gamma is used as given: no symmetric, reflexive or transitive closure.
    """
    cache = model.region_cache
    try:
        return cache[(r, o)]
    except KeyError:
        pass
    result = region_allowed_uncached(model, r, o)
    # concurrent writers store the same value, so no lock is needed
    cache[(r, o)] = result
    return result


def active_st_edges(model: FederationModel, t: int) -> EdgeSet:
    edges = sorted(
        e for e, iv in model.tau.items()
        if iv.start <= t <= iv.end and region_allowed(model, *e)
    )
    return EdgeSet(tuple(edges), t, EdgeKind.SPATIO_TEMPORAL)
