"""Project registration, participant join requests and rectification.

Researchers register projects through the registration questionnaire;
data providers ask to join with the participant questionnaire.  A join
request is approved or rejected by the project's location policy, either by
exact matching or through a :class:`~fedgov.policy.LocationOntology`.

Participants may later correct their answers.  Each correction is written as
an immutable :class:`ChangeRecord` with a unique reference and its
processing latency, re-evaluates the request when the corrected field feeds
the policy, emits a notification, and is appended to a hash-chained audit
log.  Callers always pass the current tick; nothing here reads a clock.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema

from .errors import InvalidState, ProjectNotPublished, SchemaViolation, UnknownField
from .policy import (
    LocationOntology,
    OnboardingPolicy,
    onboarding_allow,
    onboarding_allow_semantic,
)

GENESIS_HASH = "0" * 64
EMAIL_PATTERN = r"^[^@\s]+@[^@\s]+\.[^@\s]+$"
POLICY_FIELDS = frozenset({"location"})
MODES = ("exact", "semantic")

_text = {"type": "string", "minLength": 1}
_free_text = {"type": "string"}
_email = {"type": "string", "pattern": EMAIL_PATTERN}
_tokens = {"type": "array", "items": _text, "uniqueItems": True}

RESEARCHER_SCHEMA: dict = {
    "type": "object",
    "properties": {
        "title": _text,
        "institution": _text,
        "contact_email": _email,
        "objective": _text,
        "data_required": _tokens,
        "sensitivity": {"enum": ["low", "medium", "high"]},
        "security_measures": _tokens,
        "result_sharing": _free_text,
        "participant_responsibilities": _free_text,
        "legal_basis": _text,
        "third_party": {"type": "boolean"},
        "onboarding_policy": {
            "type": "object",
            "properties": {"acceptable_locations": {"type": "array", "items": _text, "minItems": 1}},
            "required": ["acceptable_locations"],
            "additionalProperties": False,
        },
    },
    "required": [
        "title", "institution", "contact_email", "objective", "data_required",
        "sensitivity", "legal_basis", "third_party", "onboarding_policy",
    ],
}

PARTICIPANT_SCHEMA: dict = {
    "type": "object",
    "properties": {
        "organization": _text,
        "contact_person": _text,
        "contact_email": _email,
        "location": _text,
        "data_available": _tokens,
        "data_sharing_constraints": _free_text,
        "consent_obtained": {"type": "boolean"},
        "internal_review_required": {"type": "boolean"},
        "other_clauses": _free_text,
    },
    "required": [
        "organization", "contact_person", "contact_email", "location",
        "data_available", "consent_obtained", "internal_review_required",
    ],
}

SCHEMAS = {"researcher": RESEARCHER_SCHEMA, "participant": PARTICIPANT_SCHEMA}
PARTICIPANT_FIELDS = tuple(PARTICIPANT_SCHEMA["properties"])


# -- records -------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectDefinition:
    title: str
    institution: str
    contact_email: str
    objective: str
    data_required: tuple[str, ...]
    sensitivity: str
    legal_basis: str
    third_party: bool
    onboarding_policy: OnboardingPolicy
    security_measures: tuple[str, ...] = ()
    result_sharing: str = ""
    participant_responsibilities: str = ""
    id: str = ""
    status: str = "draft"  # draft -> published -> closed

    def to_dict(self) -> dict:
        out = asdict(self)
        out["onboarding_policy"] = self.onboarding_policy.to_dict()
        out["data_required"] = list(self.data_required)
        out["security_measures"] = list(self.security_measures)
        return out

    @classmethod
    def from_dict(cls, raw: Mapping) -> ProjectDefinition:
        raw = dict(raw)
        raw["onboarding_policy"] = OnboardingPolicy.from_dict(raw["onboarding_policy"])
        raw["data_required"] = tuple(raw.get("data_required", ()))
        raw["security_measures"] = tuple(raw.get("security_measures", ()))
        return cls(**raw)


@dataclass(frozen=True)
class ParticipantProfile:
    organization: str
    contact_person: str
    contact_email: str
    location: str
    data_available: tuple[str, ...]
    consent_obtained: bool
    internal_review_required: bool
    data_sharing_constraints: str = ""
    other_clauses: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        out["data_available"] = list(self.data_available)
        return out

    @classmethod
    def from_dict(cls, raw: Mapping) -> ParticipantProfile:
        raw = dict(raw)
        raw["data_available"] = tuple(raw.get("data_available", ()))
        return cls(**raw)


@dataclass(frozen=True)
class JoinRequest:
    id: str
    project: str
    profile: ParticipantProfile
    submitted_at: int
    state: str = "pending"  # pending -> approved | rejected | withdrawn
    decision_detail: dict | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "project": self.project, "profile": self.profile.to_dict(),
                "submitted_at": self.submitted_at, "state": self.state,
                "decision_detail": self.decision_detail}

    @classmethod
    def from_dict(cls, raw: Mapping) -> JoinRequest:
        return cls(raw["id"], raw["project"], ParticipantProfile.from_dict(raw["profile"]),
                   raw["submitted_at"], raw["state"], raw.get("decision_detail"))


@dataclass(frozen=True)
class ChangeRecord:
    reference: str
    subject: str
    field: str
    old_value: str
    new_value: str
    requested_at: int
    processed_at: int
    latency: int
    deadline_met: bool
    propagated_to: tuple[str, ...]
    notification_emitted: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["propagated_to"] = list(self.propagated_to)
        return out

    @classmethod
    def from_dict(cls, raw: Mapping) -> ChangeRecord:
        raw = dict(raw)
        raw["propagated_to"] = tuple(raw["propagated_to"])
        return cls(**raw)


@dataclass(frozen=True)
class Agreement:
    request: str
    region: str | None
    text: str
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"request": self.request, "region": self.region, "text": self.text,
                "warnings": list(self.warnings)}


# -- questionnaires ------------------------------------------------------------

def validate_questionnaire(document: Mapping, schema: str) -> ProjectDefinition | ParticipantProfile:
    """Validate a filled-in form and return the typed record.

    Raises :class:`SchemaViolation` listing a diagnostic per offending field.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown questionnaire schema {schema!r}")
    if not isinstance(document, Mapping):
        raise SchemaViolation({"(document)": "form must be a JSON object"})
    doc = dict(document)
    if schema == "researcher" and isinstance(doc.get("sensitivity"), str):
        doc["sensitivity"] = doc["sensitivity"].lower()
    spec = SCHEMAS[schema]
    diagnostics: dict[str, str] = {}
    for key in doc:
        if key not in spec["properties"]:
            diagnostics[str(key)] = "unknown field"
    validator = jsonschema.Draft202012Validator(spec)
    for err in validator.iter_errors(doc):
        if err.validator == "required" and not err.path:
            for name in err.validator_value:
                if name not in err.instance:
                    diagnostics.setdefault(name, "required field is missing")
            continue
        name = ".".join(str(p) for p in err.absolute_path) or "(document)"
        top = str(err.absolute_path[0]) if err.absolute_path else name
        if err.validator == "pattern" and top == "contact_email":
            diagnostics.setdefault(top, "not a valid email address")
        else:
            diagnostics.setdefault(top, err.message if top == name else f"{name}: {err.message}")
    if diagnostics:
        raise SchemaViolation(diagnostics)
    if schema == "researcher":
        return ProjectDefinition.from_dict(doc)
    return ParticipantProfile.from_dict(doc)


# -- audit chain ---------------------------------------------------------------

def _canonical(value: Any) -> bytes:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    kind: str
    payload_digest: str
    prev_hash: str
    hash: str
    payload: dict = field(default_factory=dict)

    @staticmethod
    def link_hash(seq: int, kind: str, payload_digest: str, prev_hash: str) -> str:
        return _sha256(_canonical([seq, kind, payload_digest, prev_hash]))

    def to_json(self) -> str:
        return json.dumps({
            "seq": self.seq, "kind": self.kind, "payload_digest": self.payload_digest,
            "prev_hash": self.prev_hash, "hash": self.hash, "payload": self.payload,
        }, sort_keys=False, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> AuditEvent:
        raw = json.loads(line)
        return cls(raw["seq"], raw["kind"], raw["payload_digest"], raw["prev_hash"],
                   raw["hash"], raw.get("payload", {}))


@dataclass(frozen=True)
class ChainCheck:
    ok: bool
    broken_at: int | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"valid": self.ok, "broken_at": self.broken_at}


def verify_audit_chain(log: Sequence[AuditEvent]) -> ChainCheck:
    """Recompute every digest and link; report the first broken index."""
    prev = GENESIS_HASH
    for i, ev in enumerate(log):
        if (ev.seq != i
                or ev.prev_hash != prev
                or ev.payload_digest != _sha256(_canonical(ev.payload))
                or ev.hash != AuditEvent.link_hash(ev.seq, ev.kind, ev.payload_digest, ev.prev_hash)):
            return ChainCheck(False, i)
        prev = ev.hash
    return ChainCheck(True)


def read_audit_log(path: str | Path) -> tuple[list[AuditEvent], int | None]:
    """Parse an audit JSONL file; also return the index of the first unparsable line."""
    events: list[AuditEvent] = []
    p = Path(path)
    if not p.exists():
        return events, None
    lines = p.read_bytes().split(b"\n")
    tail = lines.pop()  # empty when the file ends with a newline
    for i, line in enumerate(lines):
        try:
            ev = AuditEvent.from_json(line.decode("utf-8"))
        except (ValueError, KeyError, TypeError, UnicodeDecodeError):
            return events, i
        if ev.to_json().encode("utf-8") != line:
            # parses, but is not the bytes that were written
            return events, i
        events.append(ev)
    return events, (len(lines) if tail else None)


def verify_audit_file(path: str | Path) -> ChainCheck:
    events, bad_line = read_audit_log(path)
    check = verify_audit_chain(events)
    if bad_line is not None and check.ok:
        return ChainCheck(False, bad_line)
    return check


class AuditLog:
    def __init__(self, events: Iterable[AuditEvent] = ()):
        self.events: list[AuditEvent] = list(events)

    def append(self, kind: str, payload: Mapping) -> AuditEvent:
        payload = json.loads(_canonical(payload))  # detach and normalise
        seq = len(self.events)
        prev = self.events[-1].hash if self.events else GENESIS_HASH
        digest = _sha256(_canonical(payload))
        ev = AuditEvent(seq, kind, digest, prev, AuditEvent.link_hash(seq, kind, digest, prev), payload)
        self.events.append(ev)
        return ev

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)


# -- decisions -----------------------------------------------------------------

def _decide(project: ProjectDefinition, profile: ParticipantProfile,
            ontology: LocationOntology, mode: str) -> tuple[bool, dict]:
    if mode == "exact":
        d = onboarding_allow(project.onboarding_policy, profile.location)
    elif mode == "semantic":
        d = onboarding_allow_semantic(project.onboarding_policy, profile.location, ontology)
    else:
        raise ValueError(f"unknown evaluation mode {mode!r}")
    detail = {
        "mode": mode,
        "location": profile.location,
        "acceptable_locations": list(project.onboarding_policy.acceptable_locations),
        "allow": d.allow,
        "via": d.via.to_dict() if d.via else None,
    }
    return d.allow, detail


def evaluate_join(project: ProjectDefinition, request: JoinRequest,
                  ontology: LocationOntology, mode: str = "exact") -> JoinRequest:
    """Decide a pending request against the project's location policy."""
    if project.status != "published":
        raise ProjectNotPublished(f"project {project.id!r} is {project.status}, not published")
    if request.state != "pending":
        raise InvalidState(f"request {request.id!r} is {request.state}, not pending")
    allow, detail = _decide(project, request.profile, ontology, mode)
    return replace(request, state="approved" if allow else "rejected", decision_detail=detail)


def _resolve_region(location: str, ontology: LocationOntology,
                    regions: Mapping[str, str]) -> str | None:
    canon = ontology.canonical(location)
    if canon in regions:
        return canon
    ancestors = ontology.ancestors(canon)
    for region in sorted(ancestors, key=lambda a: (len(ancestors[a]), a)):
        if region in regions:
            return region
    return None


def load_agreement_templates(source: str | Path | None = None) -> dict:
    if source is None:
        return json.loads((resources.files("fedgov") / "data" / "agreement_templates.json")
                          .read_text(encoding="utf-8"))
    return json.loads(Path(source).read_text(encoding="utf-8"))


def generate_agreement(project: ProjectDefinition, request: JoinRequest,
                       ontology: LocationOntology, templates: Mapping | None = None) -> Agreement:
    """Render the data use agreement, with the clause block of the participant's region.

    The region is the canonical location or its nearest ancestor that has a
    clause block; otherwise the default block is used and a warning added.
    """
    if request.state != "approved":
        raise InvalidState(f"request {request.id!r} is {request.state}; agreements need approval")
    templates = templates or load_agreement_templates()
    profile = request.profile
    region = _resolve_region(profile.location, ontology, templates["regions"])
    warnings: tuple[str, ...] = ()
    if region is None:
        block = templates["default"]
        warnings = (f"NoTemplateForRegion: no clause block for location {profile.location!r}; "
                    f"default terms used",)
    else:
        block = templates["regions"][region]
    header = templates["header"].format(
        title=project.title,
        institution=project.institution,
        contact_email=project.contact_email,
        organization=profile.organization,
        contact_person=profile.contact_person,
        participant_email=profile.contact_email,
        region=region or ontology.canonical(profile.location),
        objective=project.objective,
        data_scope=", ".join(sorted(set(profile.data_available) & set(project.data_required))) or "none",
        legal_basis=project.legal_basis,
        sensitivity=project.sensitivity,
        security_measures=", ".join(project.security_measures) or "none declared",
        result_sharing=project.result_sharing or "not specified",
        participant_responsibilities=project.participant_responsibilities or "not specified",
        third_party="yes" if project.third_party else "no",
    )
    return Agreement(request.id, region, header + block + templates["footer"], warnings)


# -- store ---------------------------------------------------------------------

def _as_text(value: Any) -> str:
    return value if isinstance(value, str) else json.dumps(value, sort_keys=True)


def _coerce(field_name: str, value: Any) -> Any:
    kind = PARTICIPANT_SCHEMA["properties"][field_name].get("type")
    if not isinstance(value, str):
        return value
    if kind == "boolean" and value.lower() in ("true", "false"):
        return value.lower() == "true"
    if kind == "array":
        return [v.strip() for v in value.split(",") if v.strip()]
    return value


class OnboardingStore:
    """Projects, join requests, change records, audit log and notification outbox.

    With ``root`` set, every mutation is written through to a directory::

        root/projects/<id>.json   root/requests/<id>.json
        root/changes/<ref>.json   root/audit.jsonl   root/outbox.jsonl

    Mutations are meant to come from a single writer.
    """

    def __init__(self, root: str | Path | None = None, *,
                 ontology: LocationOntology | None = None,
                 rectification_deadline: int = 30):
        self.root = Path(root) if root is not None else None
        self.ontology = ontology or LocationOntology.load()
        self.rectification_deadline = rectification_deadline
        self.projects: dict[str, ProjectDefinition] = {}
        self.requests: dict[str, JoinRequest] = {}
        self.changes: dict[str, ChangeRecord] = {}
        self.audit = AuditLog()
        self.outbox: list[dict] = []
        if self.root is not None:
            self._load()

    # persistence

    def _load(self) -> None:
        for sub, target, cls in (("projects", self.projects, ProjectDefinition),
                                 ("requests", self.requests, JoinRequest),
                                 ("changes", self.changes, ChangeRecord)):
            d = self.root / sub
            if d.is_dir():
                for f in sorted(d.glob("*.json")):
                    rec = cls.from_dict(json.loads(f.read_text(encoding="utf-8")))
                    target[getattr(rec, "reference", None) or rec.id] = rec
        events, bad = read_audit_log(self.root / "audit.jsonl")
        if bad is not None:
            raise InvalidState(f"audit log line {bad} is unreadable")
        self.audit = AuditLog(events)
        outbox = self.root / "outbox.jsonl"
        if outbox.exists():
            self.outbox = [json.loads(line) for line in outbox.read_text(encoding="utf-8").splitlines()]

    def _write(self, sub: str, key: str, record: Any) -> None:
        if self.root is None:
            return
        d = self.root / sub
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{key}.json").write_text(
            json.dumps(record.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8")

    def _log(self, kind: str, payload: Mapping) -> AuditEvent:
        ev = self.audit.append(kind, payload)
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(self.root / "audit.jsonl", "a", encoding="utf-8") as fh:
                fh.write(ev.to_json() + "\n")
        return ev

    def _notify(self, to: str, subject: str, body: Mapping, now: int) -> dict:
        note = {"seq": len(self.outbox), "at": now, "to": to, "subject": subject, "body": dict(body)}
        self.outbox.append(note)
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(self.root / "outbox.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(note, sort_keys=True, ensure_ascii=False) + "\n")
        self._log("notification.emitted", note)
        return note

    # projects

    def register_project(self, document: Mapping, now: int, *, publish: bool = False) -> ProjectDefinition:
        project = validate_questionnaire(document, "researcher")
        pid = f"PRJ-{len(self.projects) + 1:06d}"
        project = replace(project, id=pid)
        self.projects[pid] = project
        self._write("projects", pid, project)
        self._log("project.registered", {"project": pid, "at": now, "title": project.title})
        if publish:
            project = self.publish_project(pid, now)
        return project

    def _project_transition(self, pid: str, to: str, allowed_from: str, now: int) -> ProjectDefinition:
        project = self.projects[pid]
        if project.status != allowed_from:
            raise InvalidState(f"project {pid!r} is {project.status}; cannot become {to}")
        project = replace(project, status=to)
        self.projects[pid] = project
        self._write("projects", pid, project)
        self._log("project.transition", {"project": pid, "from": allowed_from, "to": to, "at": now})
        return project

    def publish_project(self, pid: str, now: int) -> ProjectDefinition:
        return self._project_transition(pid, "published", "draft", now)

    def close_project(self, pid: str, now: int) -> ProjectDefinition:
        return self._project_transition(pid, "closed", "published", now)

    # join requests

    def submit_join(self, pid: str, profile_document: Mapping, now: int) -> JoinRequest:
        if pid not in self.projects:
            raise KeyError(f"unknown project {pid!r}")
        if self.projects[pid].status != "published":
            raise ProjectNotPublished(f"project {pid!r} is not open for join requests")
        profile = validate_questionnaire(profile_document, "participant")
        rid = f"JR-{len(self.requests) + 1:06d}"
        req = JoinRequest(rid, pid, profile, now)
        self.requests[rid] = req
        self._write("requests", rid, req)
        self._log("join.submitted", {"request": rid, "project": pid, "at": now,
                                     "profile": profile.to_dict()})
        self._notify(self.projects[pid].contact_email, "join request received",
                     {"request": rid, "organization": profile.organization}, now)
        return req

    def _transition(self, req: JoinRequest, updated: JoinRequest, now: int, cause: str) -> JoinRequest:
        self.requests[req.id] = updated
        self._write("requests", req.id, updated)
        if updated.state != req.state:
            self._log("join.transition", {"request": req.id, "from": req.state, "to": updated.state,
                                          "at": now, "cause": cause,
                                          "detail": updated.decision_detail})
        return updated

    def evaluate_join(self, rid: str, now: int, mode: str = "exact") -> JoinRequest:
        req = self.requests[rid]
        project = self.projects[req.project]
        try:
            updated = evaluate_join(project, req, self.ontology, mode)
        except (InvalidState, ProjectNotPublished) as exc:
            self._log("join.evaluation_refused", {"request": rid, "at": now, "reason": str(exc)})
            raise
        self._transition(req, updated, now, f"policy evaluation ({mode})")
        self._notify(req.profile.contact_email, f"join request {updated.state}",
                     {"request": rid, "detail": updated.decision_detail}, now)
        return updated

    def decide(self, rid: str, approve: bool, now: int, note: str = "") -> JoinRequest:
        """Record a manual researcher decision on a pending request."""
        req = self.requests[rid]
        if req.state != "pending":
            raise InvalidState(f"request {rid!r} is {req.state}, not pending")
        updated = replace(req, state="approved" if approve else "rejected",
                          decision_detail={"mode": "manual", "note": note, "allow": approve})
        self._transition(req, updated, now, "manual decision")
        self._notify(req.profile.contact_email, f"join request {updated.state}",
                     {"request": rid, "detail": updated.decision_detail}, now)
        return updated

    def withdraw(self, rid: str, now: int) -> JoinRequest:
        req = self.requests[rid]
        if req.state != "pending":
            raise InvalidState(f"request {rid!r} is {req.state}, not pending")
        return self._transition(req, replace(req, state="withdrawn"), now, "withdrawn by participant")

    def agreement(self, rid: str, templates: Mapping | None = None) -> Agreement:
        req = self.requests[rid]
        return generate_agreement(self.projects[req.project], req, self.ontology, templates)

    # rectification

    def rectify_field(self, rid: str, field_name: str, new_value: Any, now: int, *,
                      reevaluate: bool = True, requested_at: int | None = None) -> ChangeRecord:
        """Correct one participant answer and propagate the consequences.

        The new value is validated in the context of the whole profile before
        anything is written.  When ``reevaluate`` is set and the field feeds
        the location policy, an already decided request is decided again with
        the mode originally used.
        """
        req = self.requests[rid]
        if req.state == "withdrawn":
            raise InvalidState(f"request {rid!r} was withdrawn")
        if field_name not in PARTICIPANT_FIELDS:
            raise UnknownField(f"{field_name!r} is not a participant questionnaire field")
        requested_at = now if requested_at is None else requested_at
        if requested_at > now:
            raise ValueError("requested_at lies after the processing tick")

        doc = req.profile.to_dict()
        old = doc[field_name]
        doc[field_name] = _coerce(field_name, new_value)
        profile = validate_questionnaire(doc, "participant")

        updated = replace(req, profile=profile)
        propagated: list[str] = []
        if reevaluate and field_name in POLICY_FIELDS and req.state in ("approved", "rejected"):
            mode = (req.decision_detail or {}).get("mode", "exact")
            if mode not in MODES:
                mode = "exact"
            allow, detail = _decide(self.projects[req.project], profile, self.ontology, mode)
            updated = replace(updated, state="approved" if allow else "rejected",
                              decision_detail=detail)
            propagated.append(rid)
        ref = f"CHG-{len(self.changes) + 1:06d}"
        self._transition(req, updated, now, f"rectification {ref}")

        latency = now - requested_at
        record = ChangeRecord(
            reference=ref, subject=rid, field=field_name,
            old_value=_as_text(old), new_value=_as_text(doc[field_name]),
            requested_at=requested_at, processed_at=now, latency=latency,
            deadline_met=latency <= self.rectification_deadline,
            propagated_to=tuple(propagated), notification_emitted=True,
        )
        self.changes[ref] = record
        self._write("changes", ref, record)
        self._log("rectification.recorded", record.to_dict())
        self._notify(profile.contact_email, "rectification processed",
                     {"reference": ref, "field": field_name, "old_value": record.old_value,
                      "new_value": record.new_value, "request_state": updated.state}, now)
        return record

    def rectification_report(self) -> list[dict]:
        return [c.to_dict() for _, c in sorted(self.changes.items())]

    # deferred requirements

    def verify_identity(self, rid: str, method: str, now: int) -> dict:
        """Identity verification needs external infrastructure; logged only."""
        result = {"request": rid, "method": method, "at": now, "status": "not-implemented"}
        self._log("identity.verification_stub", result)
        return result

    def share_with_third_parties(self, reference: str, now: int) -> dict:
        """Third-party correction notices need external infrastructure; logged only."""
        if reference not in self.changes:
            raise KeyError(f"unknown change record {reference!r}")
        result = {"reference": reference, "at": now, "status": "not-implemented"}
        self._log("rectification.third_party_stub", result)
        return result

    def verify(self) -> ChainCheck:
        return verify_audit_chain(self.audit.events)
