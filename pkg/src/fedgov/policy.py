"""Native policy engines: role table, attribute rules and location onboarding.

All engines deny by default.  String comparisons are exact and
case-sensitive; :func:`onboarding_allow_semantic` is the only path that
tolerates spelling variants, and it does so through a
:class:`LocationOntology` rather than fuzzy matching.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import FedGovError, MalformedPredicateError

_PREDICATE = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


def _data_path(name: str):
    return resources.files("fedgov") / "data" / name


def _read_json(source: str | Path | Mapping | None, default: str) -> Any:
    if source is None:
        return json.loads(_data_path(default).read_text(encoding="utf-8"))
    if isinstance(source, Mapping):
        return source
    return json.loads(Path(source).read_text(encoding="utf-8"))


# -- RBAC ----------------------------------------------------------------------

@dataclass(frozen=True)
class RbacEntry:
    resources: frozenset[str]
    actions: frozenset[str]


@dataclass(frozen=True)
class RbacTable:
    entries: Mapping[str, RbacEntry]

    @classmethod
    def from_dict(cls, raw: Mapping) -> RbacTable:
        entries = {}
        for role, perms in raw.items():
            resources_ = frozenset(perms.get("resources", ()))
            actions = frozenset(perms.get("actions", ()))
            if not resources_ or not actions:
                raise FedGovError(f"role {role!r} needs non-empty resources and actions")
            entries[role] = RbacEntry(resources_, actions)
        return cls(entries)

    @classmethod
    def load(cls, source: str | Path | Mapping | None = None) -> RbacTable:
        """Load a table; with no argument, the bundled pharma role mapping."""
        return cls.from_dict(_read_json(source, "pharma_rbac.json"))

    def to_dict(self) -> dict:
        return {
            role: {"resources": sorted(e.resources), "actions": sorted(e.actions)}
            for role, e in sorted(self.entries.items())
        }


def rbac_allow(table: RbacTable, role: str, action: str, resource: str) -> bool:
    perms = table.entries.get(role)
    if perms is None:
        return False
    return resource in perms.resources and action in perms.actions


# -- ABAC ----------------------------------------------------------------------

@dataclass(frozen=True)
class AbacRule:
    name: str
    user_attrs: Mapping[str, str] = field(default_factory=dict)
    resource_attrs: Mapping[str, str] = field(default_factory=dict)
    context_attrs: Mapping[str, str] = field(default_factory=dict)
    actions: frozenset[str] = frozenset()

    @classmethod
    def from_dict(cls, raw: Mapping) -> AbacRule:
        return cls(
            name=raw["name"],
            user_attrs={k: _attr_str(v) for k, v in raw.get("user", {}).items()},
            resource_attrs={k: _attr_str(v) for k, v in raw.get("resource", {}).items()},
            context_attrs={k: _attr_str(v) for k, v in raw.get("context", {}).items()},
            actions=frozenset(raw.get("actions", ())),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "user": dict(self.user_attrs),
            "resource": dict(self.resource_attrs),
            "context": dict(self.context_attrs),
            "actions": sorted(self.actions),
        }


@dataclass(frozen=True)
class AbacDecision:
    allow: bool
    matched_rule: str | None = None

    def to_dict(self) -> dict:
        return {"allow": self.allow, "matched_rule": self.matched_rule}


def _attr_str(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def load_abac_rules(source: str | Path | Sequence | None = None) -> list[AbacRule]:
    """Load a rule list; with no argument, the bundled pharma rules."""
    if source is None or isinstance(source, (str, Path)):
        raw = _read_json(source, "pharma_abac.json")
    else:
        raw = source
    rules = [AbacRule.from_dict(r) for r in raw]
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        raise FedGovError("ABAC rule names must be unique")
    return rules


def _match_value(expected: str, supplied: Any) -> bool:
    m = _PREDICATE.match(expected)
    if m is None:
        return supplied is not None and _attr_str(supplied) == expected
    name, args = m.group(1), m.group(2)
    if name != "in_window":
        raise MalformedPredicateError(f"unknown predicate {name!r} in {expected!r}")
    try:
        lo, hi = (int(a) for a in args.split(","))
    except ValueError:
        raise MalformedPredicateError(f"in_window needs two integer bounds: {expected!r}") from None
    if supplied is None or isinstance(supplied, bool):
        return False
    try:
        value = int(supplied)
    except (TypeError, ValueError):
        return False
    return lo <= value <= hi


def _satisfied(rule_attrs: Mapping[str, str], supplied: Mapping[str, Any]) -> bool:
    return all(_match_value(exp, supplied.get(key)) for key, exp in rule_attrs.items())


def abac_evaluate(
    rules: Sequence[AbacRule],
    user: Mapping[str, Any],
    resource: Mapping[str, Any],
    context: Mapping[str, Any],
    action: str,
) -> AbacDecision:
    """Allow via the first rule (declaration order) whose attributes all match."""
    for rule in rules:
        if action not in rule.actions:
            continue
        if (_satisfied(rule.user_attrs, user)
                and _satisfied(rule.resource_attrs, resource)
                and _satisfied(rule.context_attrs, context)):
            return AbacDecision(True, rule.name)
    return AbacDecision(False, None)


# -- onboarding ----------------------------------------------------------------

@dataclass(frozen=True)
class OnboardingPolicy:
    acceptable_locations: tuple[str, ...]

    def __post_init__(self):
        if not self.acceptable_locations:
            raise FedGovError("acceptable_locations must not be empty")

    @classmethod
    def from_dict(cls, raw: Mapping) -> OnboardingPolicy:
        locs = raw.get("acceptable_locations")
        if not isinstance(locs, list) or not all(isinstance(x, str) for x in locs):
            raise FedGovError("acceptable_locations must be an array of strings")
        return cls(tuple(locs))

    @classmethod
    def load(cls, source: str | Path | Mapping | None = None) -> OnboardingPolicy:
        """Load a policy; with no argument, the bundled EU/NL/BE/DE list."""
        return cls.from_dict(_read_json(source, "region_onboarding.json"))

    def to_dict(self) -> dict:
        return {"acceptable_locations": list(self.acceptable_locations)}


@dataclass(frozen=True)
class MatchPath:
    matched: str
    kind: str  # "equivalence" or "containment"
    path: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"matched": self.matched, "kind": self.kind, "path": list(self.path)}


@dataclass(frozen=True)
class OnboardingDecision:
    allow: bool
    via: MatchPath | None = None

    def to_dict(self, semantic: bool = False) -> dict:
        out: dict = {"allow": self.allow}
        if semantic:
            out["via"] = self.via.to_dict() if self.via else None
        return out


@dataclass(frozen=True)
class LocationOntology:
    equivalences: Mapping[str, str] = field(default_factory=dict)
    containments: frozenset[tuple[str, str]] = frozenset()  # (child, parent)

    def __post_init__(self):
        for alias, canon in self.equivalences.items():
            if self.equivalences.get(canon, canon) != canon:
                raise FedGovError(
                    f"equivalence {alias!r} -> {canon!r} is not idempotent: "
                    f"{canon!r} maps to {self.equivalences[canon]!r}"
                )
        for child, parent in self.containments:
            if self.canonical(child) != child or self.canonical(parent) != parent:
                raise FedGovError(f"containment ({child!r}, {parent!r}) must use canonical tokens")
        for child, _ in self.containments:
            if child in self.ancestors(child):
                raise FedGovError(f"containment cycle through {child!r}")

    @classmethod
    def from_dict(cls, raw: Mapping) -> LocationOntology:
        return cls(
            equivalences=dict(raw.get("equivalences", {})),
            containments=frozenset(tuple(pair) for pair in raw.get("containments", [])),
        )

    @classmethod
    def load(cls, source: str | Path | Mapping | None = None) -> LocationOntology:
        """Load an ontology; with no argument, the bundled seed ontology."""
        return cls.from_dict(_read_json(source, "seed_ontology.json"))

    def to_dict(self) -> dict:
        return {
            "equivalences": dict(sorted(self.equivalences.items())),
            "containments": [list(p) for p in sorted(self.containments)],
        }

    def canonical(self, token: str) -> str:
        return self.equivalences.get(token, token)

    def parents(self, token: str) -> list[str]:
        return sorted(p for c, p in self.containments if c == token)

    def ancestors(self, token: str) -> dict[str, tuple[str, ...]]:
        """Map each strict ancestor of ``token`` to one shortest path reaching it."""
        found: dict[str, tuple[str, ...]] = {}
        queue = deque([(token, (token,))])
        while queue:
            node, path = queue.popleft()
            for parent in self.parents(node):
                if parent not in found:
                    found[parent] = path + (parent,)
                    queue.append((parent, path + (parent,)))
        return found


def onboarding_allow(policy: OnboardingPolicy, location: str) -> OnboardingDecision:
    return OnboardingDecision(location in policy.acceptable_locations)


def onboarding_allow_semantic(
    policy: OnboardingPolicy, location: str, ontology: LocationOntology
) -> OnboardingDecision:
    """Accept a location equal to, an alias of, or contained in an acceptable one.

    Only the sub-region direction is followed: a region that contains an
    acceptable location is not itself accepted.
    """
    canon = ontology.canonical(location)
    ancestors = ontology.ancestors(canon)
    for acceptable in policy.acceptable_locations:
        target = ontology.canonical(acceptable)
        if canon == target:
            path = (location,) if location == canon else (location, canon)
            return OnboardingDecision(True, MatchPath(acceptable, "equivalence", path))
    for acceptable in policy.acceptable_locations:
        target = ontology.canonical(acceptable)
        if target in ancestors:
            path = ancestors[target]
            if location != canon:
                path = (location,) + path
            return OnboardingDecision(True, MatchPath(acceptable, "containment", path))
    return OnboardingDecision(False, None)
