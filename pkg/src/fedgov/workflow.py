"""Workflow specifications: parsing, dependency layering and compliance checks.

Two YAML dialects are read.  The *plain* job format lists ``inputs``,
``steps`` and ``outputs`` at the top level.  The *compliance-extended*
format is an Arazzo document whose steps carry ``x-compliance`` rules and
whose root carries an ``x-policy`` binding.  Both parse to the same
:class:`WorkflowSpec`.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping

import yaml

from .decision import Decision, SetAccessRequest, authorize_set
from .errors import (
    CycleDetected,
    DanglingDataRef,
    DuplicateStepId,
    UnboundStep,
    UnknownKey,
    WorkflowParseError,
)
from .model import FederationModel

PLAIN = "plain"
EXTENDED = "compliance-extended"

_PLAIN_TOP = {"name", "version", "description", "inputs", "steps", "outputs"}
_PLAIN_STEP = {"id", "name", "image", "command", "inputs", "outputs", "onError"}
_EXT_TOP = {"arazzo", "info", "x-policy", "workflows"}
_EXT_INFO = {"title", "version", "description", "summary"}
_EXT_WORKFLOW = {"workflowId", "summary", "description", "inputs", "steps", "outputs"}
_EXT_STEP = _PLAIN_STEP | {"stepId", "description", "x-compliance"}
_RULE_KEYS = {"id", "description", "requirement", "verifiedBy", "evidence", "enforcement"}


@dataclass(frozen=True)
class DataDecl:
    type: str | None = None
    description: str | None = None


@dataclass(frozen=True)
class StepOutput:
    name: str
    type: str | None = None
    description: str | None = None


@dataclass(frozen=True)
class OnError:
    action: str
    message: str


@dataclass(frozen=True)
class ComplianceRule:
    id: str
    description: str
    requirement: str
    verified_by: str
    evidence: str | None = None
    enforcement: bool = False  # advisory unless set


@dataclass(frozen=True)
class PolicyRef:
    id: str
    source: str


@dataclass(frozen=True)
class PolicyBinding:
    engine: str
    policy_refs: tuple[PolicyRef, ...] = ()

    def ref(self, ref_id: str) -> PolicyRef | None:
        return next((r for r in self.policy_refs if r.id == ref_id), None)


@dataclass(frozen=True)
class Step:
    id: str
    name: str = ""
    image: str | None = None
    command: tuple[str, ...] = ()
    inputs: tuple[str, ...] = ()
    outputs: tuple[StepOutput, ...] = ()
    on_error: OnError | None = None
    compliance: tuple[ComplianceRule, ...] = ()
    description: str | None = None

    @property
    def handler(self) -> bool:
        """A declarative error handler: nothing to run, no data, no rules."""
        return not (self.command or self.inputs or self.outputs or self.compliance)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.outputs)


@dataclass(frozen=True)
class WorkflowSpec:
    name: str
    version: str = ""
    description: str = ""
    inputs: Mapping[str, DataDecl] = field(default_factory=dict)
    steps: tuple[Step, ...] = ()
    outputs: Mapping[str, DataDecl] = field(default_factory=dict)
    format: str = PLAIN
    policy: PolicyBinding | None = None
    workflow_id: str | None = None
    workflow_description: str | None = None
    arazzo: str | None = None
    # True when no step declares data edges: steps then run in declaration order.
    implicit_chain: bool = False

    def step(self, step_id: str) -> Step:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(step_id)

    @property
    def work_steps(self) -> tuple[Step, ...]:
        return tuple(s for s in self.steps if not s.handler)

    def dependencies(self) -> dict[str, set[str]]:
        """Map each non-handler step id to the ids of the steps it waits on."""
        work = self.work_steps
        if self.implicit_chain:
            return {s.id: ({work[i - 1].id} if i else set()) for i, s in enumerate(work)}
        producer = {o: s.id for s in work for o in s.output_names}
        return {
            s.id: {producer[i] for i in s.inputs if i in producer}
            for s in work
        }


# -- parsing -------------------------------------------------------------------

def _load_yaml(document: str) -> Any:
    try:
        return yaml.safe_load(document)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise WorkflowParseError(f"invalid YAML: {exc.problem or exc}", line, col) from exc
    except yaml.YAMLError as exc:
        raise WorkflowParseError(f"invalid YAML: {exc}") from exc


def _check_keys(raw: Mapping, allowed: set[str], where: str, extensions: bool) -> None:
    for key in raw:
        if not isinstance(key, str):
            raise UnknownKey(f"{where}: non-string key {key!r}")
        if key in allowed:
            continue
        if extensions and key.startswith("x-"):
            continue
        raise UnknownKey(f"{where}: unknown key {key!r}")


def _mapping(raw: Any, where: str) -> Mapping:
    if not isinstance(raw, Mapping):
        raise WorkflowParseError(f"{where} must be a mapping")
    return raw


def _opt_str(raw: Any, where: str) -> str | None:
    if raw is None:
        return None
    if isinstance(raw, (dict, list)):
        raise WorkflowParseError(f"{where} must be a scalar")
    return str(raw)


def _str_list(raw: Any, where: str) -> tuple[str, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list) or not all(isinstance(x, (str, int, float)) for x in raw):
        raise WorkflowParseError(f"{where} must be a list of strings")
    return tuple(str(x) for x in raw)


def _decls(raw: Any, where: str) -> dict[str, DataDecl]:
    if raw is None:
        return {}
    out = {}
    for name, body in _mapping(raw, where).items():
        body = body or {}
        _mapping(body, f"{where}.{name}")
        _check_keys(body, {"type", "description"}, f"{where}.{name}", extensions=False)
        out[str(name)] = DataDecl(_opt_str(body.get("type"), "type"),
                                  _opt_str(body.get("description"), "description"))
    return out


def _outputs(raw: Any, where: str) -> tuple[StepOutput, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise WorkflowParseError(f"{where} must be a list")
    out = []
    for item in raw:
        if isinstance(item, Mapping):
            _check_keys(item, {"name", "type", "description"}, where, extensions=False)
            if "name" not in item:
                raise WorkflowParseError(f"{where}: typed output needs a name")
            out.append(StepOutput(str(item["name"]), _opt_str(item.get("type"), "type"),
                                  _opt_str(item.get("description"), "description")))
        else:
            out.append(StepOutput(str(item)))
    return tuple(out)


def _on_error(raw: Any, where: str) -> OnError | None:
    if raw is None:
        return None
    raw = _mapping(raw, where)
    _check_keys(raw, {"action", "message"}, where, extensions=False)
    action = str(raw.get("action", ""))
    if action != "fail":
        raise WorkflowParseError(f"{where}: unsupported action {action!r} (only 'fail')")
    return OnError(action, str(raw.get("message", "")))


def _rules(raw: Any, where: str) -> tuple[ComplianceRule, ...]:
    if raw is None:
        return ()
    raw = _mapping(raw, where)
    _check_keys(raw, {"rules"}, where, extensions=True)
    rules = raw.get("rules") or []
    if not isinstance(rules, list):
        raise WorkflowParseError(f"{where}.rules must be a list")
    out = []
    for i, item in enumerate(rules):
        item = _mapping(item, f"{where}.rules[{i}]")
        _check_keys(item, _RULE_KEYS, f"{where}.rules[{i}]", extensions=True)
        rid = _opt_str(item.get("id"), "id")
        requirement = _opt_str(item.get("requirement"), "requirement")
        if not rid or not requirement:
            raise WorkflowParseError(f"{where}.rules[{i}] needs non-empty id and requirement")
        enforcement = item.get("enforcement", False)
        if not isinstance(enforcement, bool):
            raise WorkflowParseError(f"{where}.rules[{i}].enforcement must be a boolean")
        out.append(ComplianceRule(
            id=rid,
            description=_opt_str(item.get("description"), "description") or "",
            requirement=requirement,
            verified_by=_opt_str(item.get("verifiedBy"), "verifiedBy") or "",
            evidence=_opt_str(item.get("evidence"), "evidence"),
            enforcement=enforcement,
        ))
    return tuple(out)


def _step(raw: Any, where: str, extended: bool) -> Step:
    raw = _mapping(raw, where)
    _check_keys(raw, _EXT_STEP if extended else _PLAIN_STEP, where, extensions=extended)
    sid = raw.get("id", raw.get("stepId")) if extended else raw.get("id")
    if sid is None or str(sid) == "":
        raise WorkflowParseError(f"{where} needs a non-empty id")
    return Step(
        id=str(sid),
        name=_opt_str(raw.get("name"), "name") or "",
        image=_opt_str(raw.get("image"), "image"),
        command=_str_list(raw.get("command"), f"{where}.command"),
        inputs=_str_list(raw.get("inputs"), f"{where}.inputs"),
        outputs=_outputs(raw.get("outputs"), f"{where}.outputs"),
        on_error=_on_error(raw.get("onError"), f"{where}.onError"),
        compliance=_rules(raw.get("x-compliance"), f"{where}.x-compliance") if extended else (),
        description=_opt_str(raw.get("description"), "description"),
    )


def _steps(raw: Any, where: str, extended: bool) -> tuple[Step, ...]:
    if not isinstance(raw, list):
        raise WorkflowParseError(f"{where} must be a list")
    return tuple(_step(s, f"{where}[{i}]", extended) for i, s in enumerate(raw))


def _parse_plain(doc: Mapping) -> WorkflowSpec:
    _check_keys(doc, _PLAIN_TOP, "workflow", extensions=False)
    if "name" not in doc or "steps" not in doc:
        raise WorkflowParseError("plain workflow needs 'name' and 'steps'")
    return WorkflowSpec(
        name=str(doc["name"]),
        version=_opt_str(doc.get("version"), "version") or "",
        description=_opt_str(doc.get("description"), "description") or "",
        inputs=_decls(doc.get("inputs"), "inputs"),
        steps=_steps(doc["steps"], "steps", extended=False),
        outputs=_decls(doc.get("outputs"), "outputs"),
        format=PLAIN,
    )


def _parse_policy(raw: Any) -> PolicyBinding | None:
    if raw is None:
        return None
    raw = _mapping(raw, "x-policy")
    _check_keys(raw, {"engine", "policyRefs"}, "x-policy", extensions=True)
    refs = []
    for i, item in enumerate(raw.get("policyRefs") or []):
        item = _mapping(item, f"x-policy.policyRefs[{i}]")
        _check_keys(item, {"id", "source"}, f"x-policy.policyRefs[{i}]", extensions=True)
        refs.append(PolicyRef(str(item.get("id", "")), str(item.get("source", ""))))
    ids = [r.id for r in refs]
    if len(set(ids)) != len(ids) or "" in ids:
        raise WorkflowParseError("x-policy.policyRefs ids must be unique and non-empty")
    return PolicyBinding(str(raw.get("engine", "")), tuple(refs))


def _parse_extended(doc: Mapping, workflow_id: str | None) -> WorkflowSpec:
    _check_keys(doc, _EXT_TOP, "document", extensions=True)
    if "arazzo" not in doc or "workflows" not in doc:
        raise WorkflowParseError("extended workflow needs 'arazzo' and 'workflows'")
    info = _mapping(doc.get("info") or {}, "info")
    _check_keys(info, _EXT_INFO, "info", extensions=True)
    workflows = _mapping(doc["workflows"], "workflows")
    if workflow_id is None:
        if len(workflows) != 1:
            raise WorkflowParseError(
                f"document holds {len(workflows)} workflows; choose one by id")
        workflow_id = next(iter(workflows))
    if workflow_id not in workflows:
        raise WorkflowParseError(f"no workflow named {workflow_id!r}")
    wf = _mapping(workflows[workflow_id], f"workflows.{workflow_id}")
    _check_keys(wf, _EXT_WORKFLOW, f"workflows.{workflow_id}", extensions=True)
    return WorkflowSpec(
        name=_opt_str(info.get("title"), "title") or str(workflow_id),
        version=_opt_str(info.get("version"), "version") or "",
        description=_opt_str(info.get("description"), "description") or "",
        inputs=_decls(wf.get("inputs"), "inputs"),
        steps=_steps(wf.get("steps") or [], f"workflows.{workflow_id}.steps", extended=True),
        outputs=_decls(wf.get("outputs"), "outputs"),
        format=EXTENDED,
        policy=_parse_policy(doc.get("x-policy")),
        workflow_id=str(workflow_id),
        workflow_description=_opt_str(wf.get("description"), "description"),
        arazzo=str(doc["arazzo"]),
    )


def _merge_twin(spec: WorkflowSpec, twin: WorkflowSpec) -> WorkflowSpec:
    by_id = {s.id: s for s in twin.steps}
    steps = []
    for s in spec.steps:
        t = by_id.get(s.id)
        if t is not None:
            s = replace(
                s,
                image=s.image or t.image,
                command=s.command or t.command,
                inputs=s.inputs or t.inputs,
                outputs=s.outputs or t.outputs,
                on_error=s.on_error or t.on_error,
            )
        steps.append(s)
    return replace(
        spec,
        steps=tuple(steps),
        inputs=spec.inputs or twin.inputs,
        outputs=spec.outputs or twin.outputs,
    )


def _validate(spec: WorkflowSpec) -> WorkflowSpec:
    seen: set[str] = set()
    for s in spec.steps:
        if s.id in seen:
            raise DuplicateStepId(f"step id {s.id!r} is declared more than once")
        seen.add(s.id)

    work = spec.work_steps
    has_edges = any(s.inputs or s.outputs for s in work)
    if not has_edges:
        return replace(spec, implicit_chain=bool(work))

    producer: dict[str, str] = {}
    for s in work:
        for name in s.output_names:
            if name in producer:
                raise WorkflowParseError(
                    f"data {name!r} is produced by both {producer[name]!r} and {s.id!r}")
            producer[name] = s.id
    for s in work:
        for name in s.inputs:
            if name not in producer and name not in spec.inputs:
                raise DanglingDataRef(
                    f"step {s.id!r} reads {name!r}, which is neither a workflow input "
                    f"nor a step output")
    for name in spec.outputs:
        if name not in producer:
            raise DanglingDataRef(f"workflow output {name!r} is not produced by any step")
    spec = replace(spec, implicit_chain=False)
    _layers(spec)  # raises CycleDetected
    return spec


def parse_workflow(
    document: str,
    format: str = PLAIN,
    *,
    twin: WorkflowSpec | None = None,
    workflow_id: str | None = None,
) -> WorkflowSpec:
    """Parse and validate a workflow document.

    For the extended format, ``twin`` may supply a plain-format spec of the
    same workflow; steps with matching ids take their data edges, command
    and image from it.  Without data edges the steps form a chain in
    declaration order.
    """
    doc = _load_yaml(document)
    if not isinstance(doc, Mapping):
        raise WorkflowParseError("workflow document must be a mapping")
    if format == PLAIN:
        spec = _parse_plain(doc)
    elif format == EXTENDED:
        spec = _parse_extended(doc, workflow_id)
        if twin is not None:
            spec = _merge_twin(spec, twin)
    else:
        raise ValueError(f"unknown workflow format {format!r}")
    return _validate(spec)


def detect_format(document: str) -> str:
    doc = _load_yaml(document)
    return EXTENDED if isinstance(doc, Mapping) and "arazzo" in doc else PLAIN


def load_workflow(path: str | Path, format: str | None = None, *,
                  twin: WorkflowSpec | None = None) -> WorkflowSpec:
    text = Path(path).read_text(encoding="utf-8")
    return parse_workflow(text, format or detect_format(text), twin=twin)


# -- serialization -------------------------------------------------------------

def _decls_doc(decls: Mapping[str, DataDecl]) -> dict:
    out = {}
    for name, d in decls.items():
        body = {}
        if d.type is not None:
            body["type"] = d.type
        if d.description is not None:
            body["description"] = d.description
        out[name] = body
    return out


def _step_doc(s: Step, extended: bool) -> dict:
    body: dict[str, Any] = {"id": s.id}
    if s.name:
        body["name"] = s.name
    if s.description is not None and extended:
        body["description"] = s.description
    if s.image is not None:
        body["image"] = s.image
    if s.command:
        body["command"] = list(s.command)
    if s.inputs:
        body["inputs"] = list(s.inputs)
    if s.outputs:
        body["outputs"] = [
            o.name if o.type is None and o.description is None
            else {k: v for k, v in (("name", o.name), ("type", o.type),
                                    ("description", o.description)) if v is not None}
            for o in s.outputs
        ]
    if s.on_error is not None:
        body["onError"] = {"action": s.on_error.action, "message": s.on_error.message}
    if s.compliance:
        rules = []
        for r in s.compliance:
            rule = {"id": r.id, "description": r.description,
                    "requirement": r.requirement, "verifiedBy": r.verified_by}
            if r.evidence is not None:
                rule["evidence"] = r.evidence
            if r.enforcement:
                rule["enforcement"] = True
            rules.append(rule)
        body["x-compliance"] = {"rules": rules}
    return body


def serialize_workflow(spec: WorkflowSpec) -> str:
    extended = spec.format == EXTENDED
    steps = [_step_doc(s, extended) for s in spec.steps]
    if not extended:
        doc: dict[str, Any] = {"name": spec.name, "version": spec.version,
                               "description": spec.description}
        if spec.inputs:
            doc["inputs"] = _decls_doc(spec.inputs)
        doc["steps"] = steps
        if spec.outputs:
            doc["outputs"] = _decls_doc(spec.outputs)
    else:
        doc = {"arazzo": spec.arazzo or "1.0.0",
               "info": {"title": spec.name, "version": spec.version,
                        "description": spec.description}}
        if spec.policy is not None:
            doc["x-policy"] = {
                "engine": spec.policy.engine,
                "policyRefs": [{"id": r.id, "source": r.source} for r in spec.policy.policy_refs],
            }
        wf: dict[str, Any] = {}
        if spec.workflow_description is not None:
            wf["description"] = spec.workflow_description
        if spec.inputs:
            wf["inputs"] = _decls_doc(spec.inputs)
        wf["steps"] = steps
        if spec.outputs:
            wf["outputs"] = _decls_doc(spec.outputs)
        doc["workflows"] = {spec.workflow_id or spec.name: wf}
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


# -- layering ------------------------------------------------------------------

def _layers(spec: WorkflowSpec) -> list[list[str]]:
    sorter = graphlib.TopologicalSorter(spec.dependencies())
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        raise CycleDetected(f"data dependency cycle: {' -> '.join(exc.args[1])}") from None
    levels = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        levels.append(ready)
        sorter.done(*ready)
    return levels


def dependency_levels(spec: WorkflowSpec) -> list[list[str]]:
    """Group steps so that each level depends only on earlier levels.

    Error-handler steps are left out.  Ids within a level are sorted.
    """
    return _layers(spec)


# -- compliance ----------------------------------------------------------------

@dataclass(frozen=True)
class BoundAccess:
    role: str
    objects: frozenset[str]
    purpose: str

    def to_dict(self) -> dict:
        return {"role": self.role, "objects": sorted(self.objects), "purpose": self.purpose}


StepBinding = Mapping[str, BoundAccess]


def binding_from_dict(raw: Mapping) -> dict[str, BoundAccess]:
    out = {}
    for step_id, body in raw.items():
        objects = body.get("objects")
        if objects is None and "object" in body:
            objects = [body["object"]]
        out[str(step_id)] = BoundAccess(str(body["role"]), frozenset(objects or ()),
                                        str(body["purpose"]))
    return out


@dataclass(frozen=True)
class VerifierContext:
    spec: WorkflowSpec
    step: Step
    rule: ComplianceRule
    decision: Decision | None
    at: int


Verifier = Callable[[VerifierContext], bool]


@dataclass(frozen=True)
class Finding:
    step: str
    rule: str
    requirement: str
    policy_refs: tuple[str, ...]
    conjunct: str | None
    severity: str  # "error" or "warning"
    verifier: str
    message: str

    def to_dict(self) -> dict:
        return {
            "step": self.step, "rule": self.rule, "requirement": self.requirement,
            "policy_refs": list(self.policy_refs), "conjunct": self.conjunct,
            "severity": self.severity, "verifier": self.verifier, "message": self.message,
        }


@dataclass(frozen=True)
class StepReport:
    step: str
    bound: bool
    rules: tuple[str, ...]
    decision: Decision | None

    def to_dict(self) -> dict:
        return {"step": self.step, "bound": self.bound, "rules": list(self.rules),
                "decision": self.decision.to_dict() if self.decision else None}


@dataclass(frozen=True)
class ComplianceReport:
    at: int
    steps: tuple[StepReport, ...]
    findings: tuple[Finding, ...]

    @property
    def compliant(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    @property
    def verdict(self) -> str:
        return "COMPLIANT" if self.compliant else "NON-COMPLIANT"

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "at": self.at,
                "steps": [s.to_dict() for s in self.steps],
                "findings": [f.to_dict() for f in self.findings]}


def _schema_matched_only(spec: WorkflowSpec, step: Step) -> str | None:
    """Downstream steps may read only data derived from ``step``'s outputs."""
    if spec.implicit_chain:
        return None
    deps = spec.dependencies()
    downstream: set[str] = set()
    frontier = {step.id}
    while frontier:
        frontier = {s for s, d in deps.items() if d & frontier} - downstream
        downstream |= frontier
    trusted = set(step.output_names)
    for sid in downstream:
        trusted |= set(spec.step(sid).output_names)
    for sid in sorted(downstream):
        for name in spec.step(sid).inputs:
            if name not in trusted:
                return f"step {sid!r} reads {name!r}, which bypasses {step.id!r}"
    return None


def _policy_refs(spec: WorkflowSpec, rule: ComplianceRule) -> tuple[str, ...]:
    if rule.verified_by.startswith("opa:"):
        return (rule.verified_by[4:].split("/", 1)[0],)
    if spec.policy is None:
        return ()
    return tuple(r.id for r in spec.policy.policy_refs)


def check_workflow_compliance(
    model: FederationModel,
    spec: WorkflowSpec,
    binding: StepBinding,
    at: int,
    verifiers: Mapping[str, Verifier] | None = None,
) -> ComplianceReport:
    """Evaluate every bound step and grade findings by their rules' enforcement.

    A failed access decision or a failed verifier on a rule with
    ``enforcement: true`` makes the workflow NON-COMPLIANT; the same failure
    on an advisory rule is a warning.  ``verifiers`` resolves
    ``opa:<ref>/<rule>`` references; unresolved ones yield a warning.
    """
    verifiers = verifiers or {}
    step_reports: list[StepReport] = []
    findings: list[Finding] = []
    for step in spec.steps:
        access = binding.get(step.id)
        if access is None:
            if any(r.enforcement for r in step.compliance):
                raise UnboundStep(f"step {step.id!r} carries an enforced rule but has no binding")
            step_reports.append(StepReport(step.id, False, tuple(r.id for r in step.compliance), None))
            for rule in step.compliance:
                findings.append(Finding(step.id, rule.id, rule.requirement, _policy_refs(spec, rule),
                                        None, "warning", rule.verified_by,
                                        "step is not bound to an access request; rule not evaluated"))
            continue

        decision = authorize_set(model, SetAccessRequest(access.role, access.objects,
                                                         access.purpose, at))
        step_reports.append(StepReport(step.id, True, tuple(r.id for r in step.compliance), decision))
        for rule in step.compliance:
            severity = "error" if rule.enforcement else "warning"
            refs = _policy_refs(spec, rule)
            for name, text in zip(decision.failed, decision.explanation):
                findings.append(Finding(step.id, rule.id, rule.requirement, refs,
                                        name, severity, rule.verified_by, text))
            verdict = _dispatch(spec, step, rule, decision, at, verifiers)
            if verdict is None:
                continue
            kind, message = verdict
            findings.append(Finding(step.id, rule.id, rule.requirement, refs, None,
                                    "warning" if kind == "unknown" else severity,
                                    rule.verified_by, message))
    return ComplianceReport(at, tuple(step_reports), tuple(findings))


def _dispatch(spec: WorkflowSpec, step: Step, rule: ComplianceRule, decision: Decision,
              at: int, verifiers: Mapping[str, Verifier]) -> tuple[str, str] | None:
    token = rule.verified_by
    if token == "system-policy":
        return None  # the access decision above is this verifier
    if token == "static-analysis":
        problem = _schema_matched_only(spec, step)
        return ("failed", f"static-analysis: {problem}") if problem else None
    if token.startswith("opa:"):
        key = token[4:]
        ref_id = key.split("/", 1)[0]
        if spec.policy is None or spec.policy.ref(ref_id) is None:
            return ("unknown", f"UnknownVerifier: policy ref {ref_id!r} is not declared in x-policy")
        fn = verifiers.get(key)
        if fn is None:
            return ("unknown", f"UnknownVerifier: no loaded policy rule {key!r}")
        ok = fn(VerifierContext(spec, step, rule, decision, at))
        return None if ok else ("failed", f"policy rule {key!r} denied")
    return ("unknown", f"UnknownVerifier: unrecognised verifier {token!r}")
