"""Federation model: roles, objects, jurisdictions, purposes and their relations.

A :class:`FederationModel` bundles the permission assignment between roles
and data objects, the validity interval of each assignment, the
jurisdiction labels of roles and objects, the cross-jurisdiction access
relation, the permitted purposes per assignment and the minimal object set
per purpose.

Models are immutable once validated.  The on-disk form is one JSON
document; :func:`dumps_model` renders it canonically (sorted keys and
arrays) so that ``save -> load -> save`` is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import Issue, ModelIOError, ModelParseError, ModelValidationError

Pair = tuple[str, str]

MODEL_KEYS = (
    "roles", "objects", "labels", "purposes", "pa", "tau",
    "rho_r", "rho_o", "gamma", "pi", "delta",
)


@dataclass(frozen=True, order=True)
class ValidityInterval:
    """Closed interval ``[start, end]`` of integer ticks."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} > end {self.end}")

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class FederationModel:
    roles: frozenset[str] = frozenset()
    objects: frozenset[str] = frozenset()
    labels: frozenset[str] = frozenset()
    purposes: frozenset[str] = frozenset()
    pa: frozenset[Pair] = frozenset()
    tau: Mapping[Pair, ValidityInterval] = field(default_factory=dict)
    # rho_r/rho_o/pi/delta are total after validation; absent entries become empty sets.
    rho_r: Mapping[str, frozenset[str]] = field(default_factory=dict)
    rho_o: Mapping[str, frozenset[str]] = field(default_factory=dict)
    gamma: frozenset[Pair] = frozenset()
    pi: Mapping[Pair, frozenset[str]] = field(default_factory=dict)
    delta: Mapping[str, frozenset[str]] = field(default_factory=dict)
    # Memo used by temporal_graph.region_allowed; never part of equality.
    region_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def to_document(self) -> dict:
        """Return the canonical JSON-ready document for this model."""
        return {
            "roles": sorted(self.roles),
            "objects": sorted(self.objects),
            "labels": sorted(self.labels),
            "purposes": sorted(self.purposes),
            "pa": [list(p) for p in sorted(self.pa)],
            "tau": [
                {"role": r, "object": o, "start": iv.start, "end": iv.end}
                for (r, o), iv in sorted(self.tau.items())
            ],
            "rho_r": {k: sorted(v) for k, v in sorted(self.rho_r.items())},
            "rho_o": {k: sorted(v) for k, v in sorted(self.rho_o.items())},
            "gamma": [list(p) for p in sorted(self.gamma)],
            "pi": [
                {"role": r, "object": o, "purposes": sorted(ps)}
                for (r, o), ps in sorted(self.pi.items())
            ],
            "delta": {k: sorted(v) for k, v in sorted(self.delta.items())},
        }


# -- validation ----------------------------------------------------------------

class _Collector:
    def __init__(self):
        self.issues: list[Issue] = []

    def add(self, code: str, message: str) -> None:
        self.issues.append(Issue(code, message))


def _tokens(doc: Mapping, key: str, out: _Collector) -> list[str]:
    raw = doc.get(key, [])
    if not isinstance(raw, list) or not all(isinstance(x, str) and x for x in raw):
        out.add("MalformedDocument", f"{key!r} must be an array of non-empty strings")
        return []
    seen: set[str] = set()
    for tok in raw:
        if tok in seen:
            out.add("DuplicateSymbol", f"{key} declares {tok!r} twice")
        seen.add(tok)
    return raw


def _pair(raw: Any, where: str, out: _Collector) -> Pair | None:
    if (isinstance(raw, list) and len(raw) == 2
            and all(isinstance(x, str) for x in raw)):
        return (raw[0], raw[1])
    out.add("MalformedDocument", f"{where}: expected a two-element string array, got {raw!r}")
    return None


def _int_tick(raw: Any) -> bool:
    return isinstance(raw, int) and not isinstance(raw, bool) and raw >= 0


def _label_map(doc: Mapping, key: str, domain: set[str], domain_kind: str,
               labels: set[str], out: _Collector) -> dict[str, frozenset[str]]:
    raw = doc.get(key, {})
    result = {tok: frozenset() for tok in domain}
    if not isinstance(raw, dict):
        out.add("MalformedDocument", f"{key!r} must be an object")
        return result
    for tok, labs in raw.items():
        if tok not in domain:
            out.add("DanglingReference", f"{key} refers to undeclared {domain_kind} {tok!r}")
            continue
        if not isinstance(labs, list) or not all(isinstance(x, str) for x in labs):
            out.add("MalformedDocument", f"{key}[{tok!r}] must be an array of strings")
            continue
        for lab in labs:
            if lab not in labels:
                out.add("DanglingReference", f"{key}[{tok!r}] uses undeclared label {lab!r}")
        result[tok] = frozenset(labs)
    return result


def validate_model(candidate: Mapping | FederationModel) -> FederationModel:
    """Check a raw model document and build a :class:`FederationModel`.

    All issues found are reported together in one
    :class:`~fedgov.errors.ModelValidationError`.  Passing an existing model
    re-validates its canonical document, which yields an equal model.
    """
    if isinstance(candidate, FederationModel):
        candidate = candidate.to_document()
    out = _Collector()
    if not isinstance(candidate, Mapping):
        raise ModelValidationError([Issue("MalformedDocument", "model must be a JSON object")])
    for key in candidate:
        if key not in MODEL_KEYS:
            out.add("MalformedDocument", f"unexpected key {key!r}")

    roles = set(_tokens(candidate, "roles", out))
    objects = set(_tokens(candidate, "objects", out))
    labels = set(_tokens(candidate, "labels", out))
    purposes = set(_tokens(candidate, "purposes", out))

    pa: set[Pair] = set()
    raw_pa = candidate.get("pa", [])
    if not isinstance(raw_pa, list):
        out.add("MalformedDocument", "'pa' must be an array")
        raw_pa = []
    for i, item in enumerate(raw_pa):
        pair = _pair(item, f"pa[{i}]", out)
        if pair is None:
            continue
        r, o = pair
        if r not in roles:
            out.add("DanglingReference", f"pa[{i}] uses undeclared role {r!r}")
        if o not in objects:
            out.add("DanglingReference", f"pa[{i}] uses undeclared object {o!r}")
        pa.add(pair)

    tau: dict[Pair, ValidityInterval] = {}
    reported: set[Pair] = set()
    raw_tau = candidate.get("tau", [])
    if not isinstance(raw_tau, list):
        out.add("MalformedDocument", "'tau' must be an array")
        raw_tau = []
    for i, entry in enumerate(raw_tau):
        if not (isinstance(entry, dict) and set(entry) == {"role", "object", "start", "end"}):
            out.add("MalformedDocument", f"tau[{i}] must have exactly role, object, start, end")
            continue
        key = (entry["role"], entry["object"])
        start, end = entry["start"], entry["end"]
        if not (_int_tick(start) and _int_tick(end)):
            out.add("MalformedDocument", f"tau[{i}] bounds must be non-negative integers")
            continue
        if key not in pa:
            out.add("TauDomainMismatch", f"tau entry {key} is not in pa")
            continue
        if key in tau:
            out.add("TauDomainMismatch", f"tau entry {key} given twice")
            continue
        if start > end:
            out.add("InvalidInterval", f"tau{key} has start {start} > end {end}")
            reported.add(key)
            continue
        tau[key] = ValidityInterval(start, end)
    for pair in sorted(pa - set(tau) - reported):
        out.add("TauDomainMismatch", f"pa pair {pair} has no tau entry")

    rho_r = _label_map(candidate, "rho_r", roles, "role", labels, out)
    rho_o = _label_map(candidate, "rho_o", objects, "object", labels, out)

    gamma: set[Pair] = set()
    raw_gamma = candidate.get("gamma", [])
    if not isinstance(raw_gamma, list):
        out.add("MalformedDocument", "'gamma' must be an array")
        raw_gamma = []
    for i, item in enumerate(raw_gamma):
        pair = _pair(item, f"gamma[{i}]", out)
        if pair is None:
            continue
        for lab in pair:
            if lab not in labels:
                out.add("DanglingReference", f"gamma[{i}] uses undeclared label {lab!r}")
        gamma.add(pair)

    pi: dict[Pair, frozenset[str]] = {pair: frozenset() for pair in pa}
    raw_pi = candidate.get("pi", [])
    if not isinstance(raw_pi, list):
        out.add("MalformedDocument", "'pi' must be an array")
        raw_pi = []
    seen_pi: set[Pair] = set()
    for i, entry in enumerate(raw_pi):
        if not (isinstance(entry, dict) and set(entry) == {"role", "object", "purposes"}
                and isinstance(entry["purposes"], list)):
            out.add("MalformedDocument", f"pi[{i}] must have exactly role, object, purposes[]")
            continue
        key = (entry["role"], entry["object"])
        if key not in pa:
            out.add("PiDomainViolation", f"pi entry {key} is not in pa")
            continue
        if key in seen_pi:
            out.add("PiDomainViolation", f"pi entry {key} given twice")
            continue
        seen_pi.add(key)
        for p in entry["purposes"]:
            if p not in purposes:
                out.add("DanglingReference", f"pi{key} uses undeclared purpose {p!r}")
        pi[key] = frozenset(entry["purposes"])

    delta: dict[str, frozenset[str]] = {p: frozenset() for p in purposes}
    raw_delta = candidate.get("delta", {})
    if not isinstance(raw_delta, dict):
        out.add("MalformedDocument", "'delta' must be an object")
        raw_delta = {}
    for p, objs in raw_delta.items():
        if p not in purposes:
            out.add("DanglingReference", f"delta refers to undeclared purpose {p!r}")
            continue
        if not isinstance(objs, list) or not all(isinstance(x, str) for x in objs):
            out.add("MalformedDocument", f"delta[{p!r}] must be an array of strings")
            continue
        for o in objs:
            if o not in objects:
                out.add("DanglingReference", f"delta[{p!r}] uses undeclared object {o!r}")
        delta[p] = frozenset(objs)

    if out.issues:
        raise ModelValidationError(out.issues)
    return FederationModel(
        roles=frozenset(roles), objects=frozenset(objects),
        labels=frozenset(labels), purposes=frozenset(purposes),
        pa=frozenset(pa), tau=tau, rho_r=rho_r, rho_o=rho_o,
        gamma=frozenset(gamma), pi=pi, delta=delta,
    )


# -- serialization -------------------------------------------------------------

def dumps_model(model: FederationModel) -> str:
    return json.dumps(model.to_document(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def loads_model(text: str) -> FederationModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, exc.lineno, exc.colno) from exc
    return validate_model(doc)


def load_model(path: str | Path) -> FederationModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelIOError(f"cannot read model file {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ModelParseError(f"not UTF-8: {exc.reason}", 1, exc.start + 1) from exc
    return loads_model(text)


def save_model(model: FederationModel, path: str | Path) -> None:
    try:
        Path(path).write_text(dumps_model(model), encoding="utf-8")
    except OSError as exc:
        raise ModelIOError(f"cannot write model file {path}: {exc.strerror or exc}") from exc
