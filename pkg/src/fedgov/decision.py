"""The five-part authorization predicate, violation auditing and a literal oracle.

A request ``(role, object, purpose, tick)`` is allowed only if all of the
following hold: the pair is assigned, its interval covers the tick, some
jurisdiction pair admits it, the purpose is permitted for the pair, and the
object belongs to the minimal set for the purpose.  Every part is evaluated
and reported, even after an earlier one fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyRequestError, FedGovError, UnknownTokenError
from .model import FederationModel
from .temporal_graph import region_allowed

CONJUNCTS = ("assignment", "temporal", "spatial", "purpose", "minimisation")
SUBSTANTIVE = ("spatial", "purpose", "minimisation")


@dataclass(frozen=True)
class AccessRequest:
    role: str
    object: str
    purpose: str
    at: int

    def to_dict(self) -> dict:
        return {"role": self.role, "object": self.object,
                "purpose": self.purpose, "at": self.at}

    @classmethod
    def from_dict(cls, raw: dict) -> AccessRequest:
        return cls(str(raw["role"]), str(raw["object"]), str(raw["purpose"]), int(raw["at"]))


@dataclass(frozen=True)
class SetAccessRequest:
    role: str
    objects: frozenset[str]
    purpose: str
    at: int


@dataclass(frozen=True)
class Decision:
    allow: bool
    conjuncts: dict[str, bool]
    failed: tuple[str, ...] = ()
    explanation: tuple[str, ...] = ()

    @classmethod
    def build(cls, conjuncts: dict[str, bool], reasons: dict[str, str]) -> Decision:
        failed = tuple(name for name in CONJUNCTS if not conjuncts[name])
        return cls(
            allow=not failed,
            conjuncts={name: conjuncts[name] for name in CONJUNCTS},
            failed=failed,
            explanation=tuple(f"{name}: {reasons[name]}" for name in failed),
        )

    def to_dict(self) -> dict:
        return {
            "allow": self.allow,
            "conjuncts": dict(self.conjuncts),
            "failed": list(self.failed),
            "explanation": list(self.explanation),
        }


@dataclass(frozen=True)
class ViolationRecord:
    """An assigned, time-valid request that fails a substantive constraint."""

    request: AccessRequest
    failed_substantive: tuple[str, ...]
    at: int

    def to_dict(self) -> dict:
        return {
            "request": self.request.to_dict(),
            "failed_substantive": list(self.failed_substantive),
            "at": self.at,
        }


@dataclass(frozen=True)
class RequestError:
    """Per-request failure inside :func:`audit_violations`."""

    request: AccessRequest
    error: str

    def to_dict(self) -> dict:
        return {"request": self.request.to_dict(), "error": self.error}


def _resolve(model: FederationModel, role: str, objects: Iterable[str], purpose: str) -> None:
    if role not in model.roles:
        raise UnknownTokenError("role", role)
    for o in objects:
        if o not in model.objects:
            raise UnknownTokenError("object", o)
    if purpose not in model.purposes:
        raise UnknownTokenError("purpose", purpose)


def purpose_limited(model: FederationModel, r: str, o: str, p: str) -> bool:
    _resolve(model, r, (o,), p)
    return p in model.pi.get((r, o), ())


def min_data(model: FederationModel, objects: Iterable[str], p: str) -> bool:
    objects = set(objects)
    for o in objects:
        if o not in model.objects:
            raise UnknownTokenError("object", o)
    if p not in model.purposes:
        raise UnknownTokenError("purpose", p)
    return objects <= model.delta.get(p, frozenset())


def _single(model: FederationModel, r: str, o: str, p: str, t: int) -> tuple[dict, dict]:
    conj: dict[str, bool] = {}
    reasons: dict[str, str] = {}
    interval = model.tau.get((r, o))
    conj["assignment"] = (r, o) in model.pa
    if not conj["assignment"]:
        reasons["assignment"] = f"({r}, {o}) is not in the permission assignment"
        conj["temporal"] = False
        reasons["temporal"] = "no assignment"
    else:
        conj["temporal"] = interval.start <= t <= interval.end
        if not conj["temporal"]:
            reasons["temporal"] = f"tick {t} outside validity interval [{interval.start}, {interval.end}]"
    conj["spatial"] = region_allowed(model, r, o)
    if not conj["spatial"]:
        reasons["spatial"] = (
            f"no admissible jurisdiction pair from {sorted(model.rho_r[r])} "
            f"to {sorted(model.rho_o[o])}"
        )
    permitted = model.pi.get((r, o), frozenset())
    conj["purpose"] = p in permitted
    if not conj["purpose"]:
        reasons["purpose"] = f"purpose {p} not permitted for ({r}, {o}); permitted: {sorted(permitted)}"
    conj["minimisation"] = o in model.delta.get(p, frozenset())
    if not conj["minimisation"]:
        reasons["minimisation"] = f"object {o} is outside the minimal set for purpose {p}"
    return conj, reasons


def authorize(model: FederationModel, req: AccessRequest) -> Decision:
    _resolve(model, req.role, (req.object,), req.purpose)
    conj, reasons = _single(model, req.role, req.object, req.purpose, req.at)
    return Decision.build(conj, reasons)


def authorize_set(model: FederationModel, req: SetAccessRequest) -> Decision:
    """Authorize several objects under one purpose.

    Minimisation is judged on the whole set; the other four parts must hold
    for every object.  Explanations name the first failing object (in sorted
    order) for each failed part.
    """
    if not req.objects:
        raise EmptyRequestError("set request must name at least one object")
    _resolve(model, req.role, req.objects, req.purpose)
    conj = {name: True for name in CONJUNCTS}
    reasons: dict[str, str] = {}
    for o in sorted(req.objects):
        single, single_reasons = _single(model, req.role, o, req.purpose, req.at)
        for name in ("assignment", "temporal", "spatial", "purpose"):
            if not single[name] and conj[name]:
                conj[name] = False
                reasons[name] = f"[{o}] {single_reasons[name]}"
    outside = sorted(set(req.objects) - model.delta.get(req.purpose, frozenset()))
    if outside:
        conj["minimisation"] = False
        reasons["minimisation"] = (
            f"[{outside[0]}] object {outside[0]} is outside the minimal set "
            f"for purpose {req.purpose}"
        )
    return Decision.build(conj, reasons)


def audit_violations(
    model: FederationModel, requests: Sequence[AccessRequest]
) -> list[ViolationRecord | RequestError]:
    """Return the time-valid requests that fail region, purpose or minimisation.

    Requests denied by assignment or by their interval are not violations.
    Unresolvable requests produce a :class:`RequestError` entry in place.
    """
    found: list[ViolationRecord | RequestError] = []
    for req in requests:
        try:
            d = authorize(model, req)
        except FedGovError as exc:
            found.append(RequestError(req, str(exc)))
            continue
        if not (d.conjuncts["assignment"] and d.conjuncts["temporal"]):
            continue
        failed = tuple(n for n in SUBSTANTIVE if not d.conjuncts[n])
        if failed:
            found.append(ViolationRecord(req, failed, req.at))
    return found


def brute_force_authorize(model: FederationModel, req: AccessRequest) -> Decision:
    """Reference evaluation by direct enumeration of the model's relations.

    Uses no cache and none of the graph helpers; intended for tests.
    """
    r, o, p, t = req.role, req.object, req.purpose, req.at
    if not any(x == r for x in model.roles):
        raise UnknownTokenError("role", r)
    if not any(x == o for x in model.objects):
        raise UnknownTokenError("object", o)
    if not any(x == p for x in model.purposes):
        raise UnknownTokenError("purpose", p)

    assignment = any(pr == r and po == o for pr, po in model.pa)
    temporal = False
    if assignment:
        for (pr, po), iv in model.tau.items():
            if pr == r and po == o and iv.start <= t and t <= iv.end:
                temporal = True
    spatial = False
    for lr in model.labels:
        for lo in model.labels:
            if (lr in model.rho_r[r] and lo in model.rho_o[o]
                    and any(g == (lr, lo) for g in model.gamma)):
                spatial = True
    purpose = any(
        key == (r, o) and any(q == p for q in ps) for key, ps in model.pi.items()
    )
    minimisation = any(
        q == p and any(x == o for x in objs) for q, objs in model.delta.items()
    )
    conj = {"assignment": assignment, "temporal": temporal, "spatial": spatial,
            "purpose": purpose, "minimisation": minimisation}
    return Decision.build(conj, {name: "failed (reference evaluation)" for name in CONJUNCTS})
