"""``fedgov`` command line: JSON in, JSON out.

Exit codes: 0 allow / valid / compliant, 1 deny / invalid / non-compliant /
violations found, 2 usage or input error, 3 internal error.  Structured
output goes to stdout; diagnostics go to stderr as a single line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import decision, federation_sim, model, onboarding, policy, temporal_graph, workflow
from .errors import FedGovError, ModelParseError, ModelValidationError

EXIT_OK, EXIT_DENY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _tick(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tick must be a non-negative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"tick must be a non-negative integer, got {text!r}")
    return value


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _emit(value: Any) -> None:
    sys.stdout.write(json.dumps(value, indent=2, ensure_ascii=False) + "\n")


def _exit(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_DENY


# -- model / authz -------------------------------------------------------------

def cmd_model_validate(args) -> int:
    try:
        m = model.load_model(args.file)
    except ModelValidationError as exc:
        _emit({"valid": False, "issues": [i.to_dict() for i in exc.issues]})
        return EXIT_DENY
    _emit({"valid": True, "issues": [], "counts": {
        "roles": len(m.roles), "objects": len(m.objects), "labels": len(m.labels),
        "purposes": len(m.purposes), "assignments": len(m.pa), "gamma": len(m.gamma)}})
    return EXIT_OK


def cmd_authz_eval(args) -> int:
    m = model.load_model(args.model)
    if len(args.object) == 1:
        d = decision.authorize(m, decision.AccessRequest(args.role, args.object[0], args.purpose, args.at))
    else:
        d = decision.authorize_set(m, decision.SetAccessRequest(
            args.role, frozenset(args.object), args.purpose, args.at))
    _emit(d.to_dict())
    return _exit(d.allow)


def cmd_authz_graph(args) -> int:
    m = model.load_model(args.model)
    edges = (temporal_graph.active_st_edges(m, args.at) if args.spatio_temporal
             else temporal_graph.active_edges(m, args.at))
    _emit(edges.to_dict())
    return EXIT_OK


def _requests(path: str) -> list[decision.AccessRequest]:
    raw = _read_json(path)
    if not isinstance(raw, list):
        raise UsageError(f"{path}: expected a JSON array of requests")
    try:
        return [decision.AccessRequest.from_dict(r) for r in raw]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed request ({exc})") from None


def cmd_authz_audit(args) -> int:
    m = model.load_model(args.model)
    found = decision.audit_violations(m, _requests(args.requests))
    _emit([f.to_dict() for f in found])
    return _exit(not found)


# -- policy --------------------------------------------------------------------

def cmd_policy_rbac(args) -> int:
    table = policy.RbacTable.load(args.table)
    allow = policy.rbac_allow(table, args.role, args.action, args.resource)
    _emit({"allow": allow})
    return _exit(allow)


def cmd_policy_abac(args) -> int:
    rules = policy.load_abac_rules(args.rules)
    raw = _read_json(args.input)
    d = policy.abac_evaluate(rules, raw.get("user", {}), raw.get("resource", {}),
                             raw.get("context", {}), raw.get("action", ""))
    _emit(d.to_dict())
    return _exit(d.allow)


def cmd_policy_onboard(args) -> int:
    location = args.location
    if args.input:
        raw = _read_json(args.input)
        location = raw.get("location", location)
        pol = policy.OnboardingPolicy.from_dict(raw) if "acceptable_locations" in raw else None
    else:
        pol = None
    if location is None:
        raise UsageError("policy onboard eval: a location is required (--location or --input)")
    if pol is None:
        pol = policy.OnboardingPolicy.load(args.policy)
    if args.semantic:
        d = policy.onboarding_allow_semantic(pol, location, policy.LocationOntology.load(args.ontology))
    else:
        d = policy.onboarding_allow(pol, location)
    _emit(d.to_dict(semantic=args.semantic))
    return _exit(d.allow)


# -- workflow ------------------------------------------------------------------

def _load_spec(args) -> workflow.WorkflowSpec:
    twin = workflow.load_workflow(args.twin) if getattr(args, "twin", None) else None
    return workflow.load_workflow(args.spec, args.format, twin=twin)


def _static_verifiers(path: str | None) -> dict:
    if path is None:
        return {}
    raw = _read_json(path)
    return {key: (lambda ctx, ok=bool(ok): ok) for key, ok in raw.items()}


def cmd_workflow_check(args) -> int:
    m = model.load_model(args.model)
    spec = _load_spec(args)
    binding = workflow.binding_from_dict(_read_json(args.binding))
    report = workflow.check_workflow_compliance(m, spec, binding, args.at,
                                                _static_verifiers(args.verifiers))
    _emit(report.to_dict())
    return _exit(report.compliant)


def cmd_workflow_levels(args) -> int:
    spec = _load_spec(args)
    _emit({"levels": workflow.dependency_levels(spec), "implicit_chain": spec.implicit_chain})
    return EXIT_OK


# -- simulation ----------------------------------------------------------------

def cmd_sim_run(args) -> int:
    m = model.load_model(args.model)
    nodes = federation_sim.load_nodes(args.nodes)
    if args.requests:
        trace = federation_sim.run_simulation(m, nodes, _requests(args.requests))
    elif args.workflow and args.binding:
        spec = workflow.load_workflow(args.workflow)
        binding = workflow.binding_from_dict(_read_json(args.binding))
        trace = federation_sim.simulate_workflow(m, nodes, spec, binding, args.start)
    else:
        raise UsageError("sim run: give --requests, or --workflow together with --binding")
    sys.stdout.write(federation_sim.trace_to_jsonl(trace))
    return EXIT_OK


# -- onboarding ----------------------------------------------------------------

def _store(args) -> onboarding.OnboardingStore:
    ontology = policy.LocationOntology.load(args.ontology) if getattr(args, "ontology", None) else None
    return onboarding.OnboardingStore(args.store, ontology=ontology)


def cmd_onboard_project(args) -> int:
    store = _store(args)
    project = store.register_project(_read_json(args.form), args.now, publish=args.publish)
    _emit(project.to_dict())
    return EXIT_OK


def cmd_onboard_submit(args) -> int:
    store = _store(args)
    req = store.submit_join(args.project, _read_json(args.form), args.now)
    _emit(req.to_dict())
    return EXIT_OK


def cmd_onboard_evaluate(args) -> int:
    store = _store(args)
    req = store.evaluate_join(args.request, args.now, args.mode)
    _emit(req.to_dict())
    return _exit(req.state == "approved")


def cmd_onboard_rectify(args) -> int:
    store = _store(args)
    record = store.rectify_field(args.request, args.field, args.value, args.now,
                                 reevaluate=not args.no_reevaluate, requested_at=args.requested_at)
    _emit({"change": record.to_dict(), "request": store.requests[args.request].to_dict()})
    return EXIT_OK


def cmd_onboard_agreement(args) -> int:
    store = _store(args)
    templates = _read_json(args.templates) if args.templates else None
    agreement = store.agreement(args.request, templates)
    for w in agreement.warnings:
        print(w, file=sys.stderr)
    _emit(agreement.to_dict())
    return EXIT_OK


def cmd_onboard_audit_verify(args) -> int:
    path = Path(args.store)
    if path.is_dir():
        path = path / "audit.jsonl"
    check = onboarding.verify_audit_file(path)
    _emit(check.to_dict())
    return _exit(check.ok)


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fedgov", description="Compliance checks for federated data processing.")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = groups.add_parser("model", help="federation model files").add_subparsers(dest="cmd", required=True)
    s = g.add_parser("validate", help="validate a model document")
    s.add_argument("file")
    s.set_defaults(func=cmd_model_validate)

    g = groups.add_parser("authz", help="authorization decisions").add_subparsers(dest="cmd", required=True)
    s = g.add_parser("eval", help="decide one request")
    s.add_argument("model")
    s.add_argument("--role", required=True)
    s.add_argument("--object", required=True, action="append",
                   help="repeat to request several objects under one purpose")
    s.add_argument("--purpose", required=True)
    s.add_argument("--at", required=True, type=_tick)
    s.set_defaults(func=cmd_authz_eval)
    s = g.add_parser("graph", help="active edges at a tick")
    s.add_argument("model")
    s.add_argument("--at", required=True, type=_tick)
    s.add_argument("--spatio-temporal", action="store_true", help="also apply the jurisdiction check")
    s.set_defaults(func=cmd_authz_graph)
    s = g.add_parser("audit", help="list violations in a request log")
    s.add_argument("model")
    s.add_argument("--requests", required=True)
    s.set_defaults(func=cmd_authz_audit)

    g = groups.add_parser("policy", help="native policy engines").add_subparsers(dest="engine", required=True)
    s = g.add_parser("rbac").add_subparsers(dest="cmd", required=True).add_parser("eval")
    s.add_argument("--role", required=True)
    s.add_argument("--action", required=True)
    s.add_argument("--resource", required=True)
    s.add_argument("--table", help="role mapping JSON (default: bundled pharma mapping)")
    s.set_defaults(func=cmd_policy_rbac)
    s = g.add_parser("abac").add_subparsers(dest="cmd", required=True).add_parser("eval")
    s.add_argument("--input", required=True, help="JSON with user, resource, context, action")
    s.add_argument("--rules", help="rule list JSON (default: bundled pharma rules)")
    s.set_defaults(func=cmd_policy_abac)
    s = g.add_parser("onboard").add_subparsers(dest="cmd", required=True).add_parser("eval")
    s.add_argument("--location")
    s.add_argument("--input", help="JSON with location and optionally acceptable_locations")
    s.add_argument("--policy", help="policy JSON (default: bundled EU/NL/BE/DE list)")
    s.add_argument("--semantic", action="store_true", help="match through the location ontology")
    s.add_argument("--ontology", help="ontology JSON (default: bundled seed ontology)")
    s.set_defaults(func=cmd_policy_onboard)

    g = groups.add_parser("workflow", help="workflow specifications").add_subparsers(dest="cmd", required=True)
    for name, func in (("check", cmd_workflow_check), ("levels", cmd_workflow_levels)):
        s = g.add_parser(name)
        s.add_argument("spec")
        s.add_argument("--format", choices=(workflow.PLAIN, workflow.EXTENDED))
        s.add_argument("--twin", help="plain workflow supplying the data edges of an extended one")
        s.set_defaults(func=func)
        if name == "check":
            s.add_argument("--model", required=True)
            s.add_argument("--binding", required=True)
            s.add_argument("--at", required=True, type=_tick)
            s.add_argument("--verifiers", help='JSON map of "ref/rule" to a fixed true/false outcome')

    g = groups.add_parser("sim", help="enforcement simulation").add_subparsers(dest="cmd", required=True)
    s = g.add_parser("run")
    s.add_argument("model")
    s.add_argument("--nodes", required=True)
    s.add_argument("--requests")
    s.add_argument("--workflow")
    s.add_argument("--binding")
    s.add_argument("--start", type=_tick, default=0)
    s.set_defaults(func=cmd_sim_run)

    g = groups.add_parser("onboard", help="project onboarding store").add_subparsers(dest="cmd", required=True)

    def store_cmd(name: str, func, *, now: bool = True):
        s = g.add_parser(name)
        s.add_argument("store", help="store directory")
        s.add_argument("--ontology", help="ontology JSON (default: bundled seed ontology)")
        if now:
            s.add_argument("--now", required=True, type=_tick)
        s.set_defaults(func=func)
        return s

    s = store_cmd("project", cmd_onboard_project)
    s.add_argument("--form", required=True)
    s.add_argument("--publish", action="store_true")
    s = store_cmd("submit", cmd_onboard_submit)
    s.add_argument("--project", required=True)
    s.add_argument("--form", required=True)
    s = store_cmd("evaluate", cmd_onboard_evaluate)
    s.add_argument("--request", required=True)
    s.add_argument("--mode", choices=onboarding.MODES, default="exact")
    s = store_cmd("rectify", cmd_onboard_rectify)
    s.add_argument("--request", required=True)
    s.add_argument("--field", required=True)
    s.add_argument("--value", required=True)
    s.add_argument("--requested-at", type=_tick)
    s.add_argument("--no-reevaluate", action="store_true")
    s = store_cmd("agreement", cmd_onboard_agreement, now=False)
    s.add_argument("--request", required=True)
    s.add_argument("--templates")
    s = g.add_parser("audit-verify")
    s.add_argument("store", help="store directory or audit.jsonl file")
    s.set_defaults(func=cmd_onboard_audit_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FedGovError, OSError, KeyError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
