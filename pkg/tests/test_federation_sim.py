from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from fedgov.decision import CONJUNCTS, AccessRequest, authorize
from fedgov.errors import DuplicateHosting, NodeConfigError, UnhostedObject
from fedgov.federation_sim import (
    GATE_CONJUNCTS,
    GATE_NODE,
    PDP_CONJUNCTS,
    EventKind,
    NodeSpec,
    dispositions,
    load_nodes,
    run_simulation,
    simulate_workflow,
    trace_to_jsonl,
)
from fedgov.model import load_model, validate_model
from fedgov.workflow import (
    BoundAccess,
    binding_from_dict,
    check_workflow_compliance,
    load_workflow,
    parse_workflow,
)

from _gen import random_model

CR, EHR = "ClinicalResearcher", "ehr_pseudonymized"


@pytest.fixture(scope="module")
def model(data_dir):
    return load_model(data_dir / "pharma.model.json")


@pytest.fixture(scope="module")
def nodes(data_dir):
    return load_nodes(data_dir / "pharma_nodes.json")


@pytest.fixture(scope="module")
def spec(data_dir):
    twin = load_workflow(data_dir / "federated_job.yaml")
    return load_workflow(data_dir / "federated_workflow_gdpr.yaml", twin=twin)


@pytest.fixture(scope="module")
def binding(data_dir):
    return binding_from_dict(json.loads((data_dir / "pharma_binding.json").read_text()))


def kinds(trace):
    return [e.kind for e in trace]


def test_gate_and_pdp_partition_the_conjuncts():
    assert set(GATE_CONJUNCTS) | set(PDP_CONJUNCTS) == set(CONJUNCTS)
    assert not set(GATE_CONJUNCTS) & set(PDP_CONJUNCTS)


def test_happy_path(model, nodes):
    trace = run_simulation(model, nodes, [AccessRequest(CR, EHR, "pkpd_modelling", 3)])
    assert kinds(trace) == [EventKind.REQUEST_ISSUED, EventKind.GATE_PASS,
                            EventKind.PDP_ALLOW, EventKind.RESULT_RETURNED]
    assert [e.node for e in trace] == ["central", GATE_NODE, "hospital-eu", "central"]


def test_region_failure_stops_at_gate(model, nodes):
    trace = run_simulation(model, nodes, [AccessRequest("EthicsOfficer", "consent_records",
                                                        "compliance_audit", 3)])
    assert kinds(trace) == [EventKind.REQUEST_ISSUED, EventKind.GATE_REJECT]
    assert trace[-1].detail == ("spatial",)
    providers = {n.id for n in nodes if n.kind == "provider"}
    assert not any(e.node in providers for e in trace)


def test_minimisation_failure_reaches_provider(model, nodes):
    # (EthicsOfficer, access_logs) is allowed for compliance_audit; narrow the purpose's object set
    doc = model.to_document()
    doc["delta"]["compliance_audit"] = ["consent_records"]
    narrowed = validate_model(doc)
    trace = run_simulation(narrowed, nodes, [AccessRequest("EthicsOfficer", "access_logs",
                                                           "compliance_audit", 3)])
    assert kinds(trace) == [EventKind.REQUEST_ISSUED, EventKind.GATE_PASS, EventKind.PDP_DENY]
    assert trace[-1].node == "hospital-eu" and trace[-1].detail == ("minimisation",)


def test_same_tick_keeps_input_order(model, nodes):
    reqs = [AccessRequest(CR, EHR, "pkpd_modelling", 5),
            AccessRequest("DataManager", "ehr_full", "dataset_preparation", 2),
            AccessRequest("EpidemiologyAnalyst", "aggregate_stats", "demand_assessment", 5)]
    issued = [e.request_index for e in run_simulation(model, nodes, reqs)
              if e.kind == EventKind.REQUEST_ISSUED]
    assert issued == [1, 0, 2]


def test_topology_errors(model):
    with pytest.raises(UnhostedObject):
        run_simulation(model, [NodeSpec("c", "orchestrator")], [AccessRequest(CR, EHR, "pkpd_modelling", 1)])
    twice = [NodeSpec("a", "provider", frozenset({"EU"}), frozenset({EHR})),
             NodeSpec("b", "provider", frozenset({"EU"}), frozenset({EHR}))]
    with pytest.raises(DuplicateHosting):
        run_simulation(model, twice, [])
    with pytest.raises(NodeConfigError):
        run_simulation(model, [NodeSpec(GATE_NODE, "provider")], [])
    with pytest.raises(NodeConfigError):
        # ehr_full carries only NL
        run_simulation(model, [NodeSpec("a", "provider", frozenset({"DE"}), frozenset({"ehr_full"}))], [])


def test_job_workflow_ticks(model, nodes, data_dir, binding):
    trace = simulate_workflow(model, nodes, load_workflow(data_dir / "federated_job.yaml"), binding, 7)
    issued = [e for e in trace if e.kind == EventKind.REQUEST_ISSUED]
    assert [(e.step, e.at) for e in issued] == [
        ("readData", 7), ("matchToSchema", 8), ("filterData", 9), ("performTest", 10)]
    assert all(dispositions(trace).values())


def test_empty_workflow(model, nodes):
    empty = parse_workflow("name: w\nsteps: []\n")
    assert simulate_workflow(model, nodes, empty, {}, 0) == []


def test_trace_is_byte_stable(model, nodes, spec, binding):
    a = trace_to_jsonl(simulate_workflow(model, nodes, spec, binding, 0))
    b = trace_to_jsonl(simulate_workflow(model, nodes, spec, binding, 0))
    assert a == b and a.count("\n") == 16


def _random_nodes(rng, m):
    objs = sorted(m.objects)
    rng.shuffle(objs)
    nodes = [NodeSpec("orch", "orchestrator")]
    for i in range(3):
        share = objs[i::3]
        if share:
            nodes.append(NodeSpec(f"prov{i}", "provider", frozenset(), frozenset(share)))
    return nodes


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_disposition_and_locality(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    nodes = _random_nodes(rng, m)
    providers = {n.id for n in nodes if n.kind == "provider"}
    reqs = [AccessRequest(rng.choice(sorted(m.roles)), rng.choice(sorted(m.objects)),
                          rng.choice(sorted(m.purposes)), rng.randrange(22)) for _ in range(5)]
    trace = run_simulation(m, nodes, reqs)
    final = dispositions(trace)
    rejected = {e.request_index for e in trace if e.kind == EventKind.GATE_REJECT}
    for i, req in enumerate(reqs):
        assert final[i] == authorize(m, req).allow
    assert not any(e.node in providers and e.request_index in rejected for e in trace)
    assert [e.seq for e in trace] == list(range(len(trace)))


bindings = st.fixed_dictionaries({
    sid: st.tuples(
        st.sampled_from(["ClinicalResearcher", "EthicsOfficer", "TrialCoordinator"]),
        st.sampled_from(["ehr_pseudonymized", "consent_records", "identifiable_records"]),
        st.sampled_from(["pkpd_modelling", "compliance_audit", "recruitment"]),
    )
    for sid in ("readData", "matchToSchema", "filterData", "performTest")
})


@settings(max_examples=100, deadline=None)
@given(bindings, st.integers(0, 130))
def test_enforced_gate_reject_implies_non_compliant(model, nodes, spec, raw, start):
    binding = {k: BoundAccess(r, frozenset({o}), p) for k, (r, o, p) in raw.items()}
    trace = simulate_workflow(model, nodes, spec, binding, start)
    enforced = {s.id for s in spec.steps if any(r.enforcement for r in s.compliance)}
    for ev in trace:
        if ev.kind == EventKind.GATE_REJECT and ev.step in enforced:
            report = check_workflow_compliance(model, spec, binding, ev.at)
            assert report.verdict == "NON-COMPLIANT"
