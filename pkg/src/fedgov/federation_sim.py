"""Deterministic staged simulation of distributed policy enforcement.

Each request passes two stages.  The network gate checks assignment,
validity interval and jurisdiction before anything reaches a provider; a
rejected request produces no event at any provider node.  Requests that pass
are routed to the provider hosting the object, whose decision point checks
purpose and minimisation.  Time is a virtual tick counter; nothing here
reads a clock or opens a socket.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .decision import AccessRequest, authorize
from .errors import (
    DuplicateHosting,
    NodeConfigError,
    UnboundStep,
    UnhostedObject,
    UnknownTokenError,
)
from .model import FederationModel
from .workflow import StepBinding, WorkflowSpec, dependency_levels

GATE_NODE = "network-gate"
GATE_CONJUNCTS = ("assignment", "temporal", "spatial")
PDP_CONJUNCTS = ("purpose", "minimisation")


class EventKind(str, Enum):
    REQUEST_ISSUED = "request_issued"
    GATE_PASS = "gate_pass"
    GATE_REJECT = "gate_reject"
    PDP_ALLOW = "pdp_allow"
    PDP_DENY = "pdp_deny"
    RESULT_RETURNED = "result_returned"


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: str  # "orchestrator" or "provider"
    jurisdiction: frozenset[str] = frozenset()
    hosted_objects: frozenset[str] = frozenset()

    @classmethod
    def from_dict(cls, raw: Mapping) -> NodeSpec:
        return cls(
            id=str(raw["id"]),
            kind=str(raw["kind"]),
            jurisdiction=frozenset(raw.get("jurisdiction", ())),
            hosted_objects=frozenset(raw.get("hosted_objects", ())),
        )


@dataclass(frozen=True)
class SimEvent:
    seq: int
    at: int
    kind: EventKind
    node: str
    request: AccessRequest
    request_index: int
    detail: tuple[str, ...] = ()
    step: str | None = None

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "at": self.at,
            "kind": self.kind.value,
            "node": self.node,
            "request_index": self.request_index,
            "request": self.request.to_dict(),
            "step": self.step,
            "detail": list(self.detail),
        }


def load_nodes(source: str | Path | Sequence[Mapping]) -> list[NodeSpec]:
    if isinstance(source, (str, Path)):
        source = json.loads(Path(source).read_text(encoding="utf-8"))
    return [NodeSpec.from_dict(n) for n in source]


def validate_nodes(model: FederationModel, nodes: Sequence[NodeSpec]) -> dict[str, str]:
    """Check the topology and return the object -> provider id routing table."""
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise NodeConfigError("node ids must be unique")
    if GATE_NODE in ids:
        raise NodeConfigError(f"node id {GATE_NODE!r} is reserved for the network gate")
    routing: dict[str, str] = {}
    for node in nodes:
        if node.kind not in ("orchestrator", "provider"):
            raise NodeConfigError(f"node {node.id!r} has unknown kind {node.kind!r}")
        if node.kind == "orchestrator" and node.hosted_objects:
            raise NodeConfigError(f"orchestrator {node.id!r} cannot host data")
        for o in sorted(node.hosted_objects):
            if o not in model.objects:
                raise UnknownTokenError("object", o)
            if o in routing:
                raise DuplicateHosting(f"object {o!r} is hosted by {routing[o]!r} and {node.id!r}")
            missing = node.jurisdiction - model.rho_o[o]
            if missing:
                raise NodeConfigError(
                    f"object {o!r} on {node.id!r} lacks the node's jurisdiction labels {sorted(missing)}")
            routing[o] = node.id
    return routing


def _orchestrator_id(nodes: Sequence[NodeSpec]) -> str:
    return next((n.id for n in nodes if n.kind == "orchestrator"), "orchestrator")


def run_simulation(
    model: FederationModel,
    nodes: Sequence[NodeSpec],
    requests: Sequence[AccessRequest],
    *,
    steps: Sequence[str | None] | None = None,
) -> list[SimEvent]:
    """Play requests through gate and provider stages; return the event trace.

    Requests run in order of their tick, ties broken by input position.
    ``steps`` optionally labels each request with the workflow step it
    came from.
    """
    routing = validate_nodes(model, nodes)
    for req in requests:
        if req.object not in routing:
            raise UnhostedObject(f"object {req.object!r} is not hosted by any provider")
    orchestrator = _orchestrator_id(nodes)
    labels = list(steps) if steps is not None else [None] * len(requests)

    trace: list[SimEvent] = []

    def emit(kind: EventKind, node: str, idx: int, detail: Iterable[str] = ()) -> None:
        req = requests[idx]
        trace.append(SimEvent(len(trace), req.at, kind, node, req, idx, tuple(detail), labels[idx]))

    for idx in sorted(range(len(requests)), key=lambda i: (requests[i].at, i)):
        req = requests[idx]
        emit(EventKind.REQUEST_ISSUED, orchestrator, idx)
        decision = authorize(model, req)
        gate_failed = [c for c in GATE_CONJUNCTS if not decision.conjuncts[c]]
        if gate_failed:
            emit(EventKind.GATE_REJECT, GATE_NODE, idx, gate_failed)
            continue
        emit(EventKind.GATE_PASS, GATE_NODE, idx)
        provider = routing[req.object]
        pdp_failed = [c for c in PDP_CONJUNCTS if not decision.conjuncts[c]]
        if pdp_failed:
            emit(EventKind.PDP_DENY, provider, idx, pdp_failed)
            continue
        emit(EventKind.PDP_ALLOW, provider, idx)
        emit(EventKind.RESULT_RETURNED, orchestrator, idx)
    return trace


def dispositions(trace: Sequence[SimEvent]) -> dict[int, bool]:
    """Final allow/deny per request index, read back from a trace."""
    final: dict[int, bool] = {}
    for ev in trace:
        if ev.kind == EventKind.REQUEST_ISSUED:
            final[ev.request_index] = False
        elif ev.kind == EventKind.RESULT_RETURNED:
            final[ev.request_index] = True
    return final


def simulate_workflow(
    model: FederationModel,
    nodes: Sequence[NodeSpec],
    spec: WorkflowSpec,
    binding: StepBinding,
    start: int,
) -> list[SimEvent]:
    """Issue the bound steps level by level: level k runs at tick ``start + k``.

    A step bound to several objects issues one request per object, in
    sorted object order.  Unbound steps are skipped unless they carry an
    enforced rule.
    """
    requests: list[AccessRequest] = []
    labels: list[str] = []
    for k, level in enumerate(dependency_levels(spec)):
        for step_id in level:
            access = binding.get(step_id)
            if access is None:
                if any(r.enforcement for r in spec.step(step_id).compliance):
                    raise UnboundStep(f"step {step_id!r} carries an enforced rule but has no binding")
                continue
            for o in sorted(access.objects):
                requests.append(AccessRequest(access.role, o, access.purpose, start + k))
                labels.append(step_id)
    return run_simulation(model, nodes, requests, steps=labels)


def trace_to_jsonl(trace: Sequence[SimEvent]) -> str:
    return "".join(json.dumps(ev.to_dict(), ensure_ascii=False) + "\n" for ev in trace)
