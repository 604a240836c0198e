from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from fedgov.errors import ModelIOError, ModelParseError, ModelValidationError
from fedgov.model import (
    FederationModel,
    ValidityInterval,
    dumps_model,
    load_model,
    loads_model,
    save_model,
    validate_model,
)

from _gen import random_document, random_model

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_interval_is_closed_and_ordered():
    iv = ValidityInterval(5, 10)
    assert 5 in iv and 10 in iv and 7 in iv
    assert 4 not in iv and 11 not in iv
    assert 5 in ValidityInterval(5, 5)
    assert ValidityInterval(1, 3) < ValidityInterval(2, 2)
    with pytest.raises(ValueError):
        ValidityInterval(3, 2)


def test_empty_model_is_valid():
    m = validate_model({})
    assert m == FederationModel()
    assert not m.pa


def test_tau_outside_pa_is_rejected():
    doc = {"roles": ["analyst"], "objects": ["stats"],
           "tau": [{"role": "analyst", "object": "stats", "start": 0, "end": 1}]}
    with pytest.raises(ModelValidationError) as exc:
        validate_model(doc)
    assert exc.value.codes == {"TauDomainMismatch"}


def test_pa_pair_without_tau_is_rejected():
    doc = {"roles": ["a"], "objects": ["x"], "pa": [["a", "x"]]}
    with pytest.raises(ModelValidationError) as exc:
        validate_model(doc)
    assert "TauDomainMismatch" in exc.value.codes


def test_all_issues_are_collected():
    doc = {
        "roles": ["a"], "objects": ["x"], "labels": ["EU"], "purposes": ["p"],
        "pa": [["a", "x"], ["ghost", "x"]],
        "tau": [{"role": "a", "object": "x", "start": 5, "end": 1}],
        "gamma": [["EU", "MARS"]],
        "pi": [{"role": "b", "object": "x", "purposes": ["p"]}],
        "delta": {"q": ["x"]},
    }
    with pytest.raises(ModelValidationError) as exc:
        validate_model(doc)
    assert exc.value.codes == {"DanglingReference", "InvalidInterval", "PiDomainViolation",
                               "TauDomainMismatch"}
    # the bad interval is reported once, not again as "missing tau"
    assert sum(i.code == "InvalidInterval" for i in exc.value.issues) == 1
    assert not any("no tau entry" in i.message and "'a'" in i.message for i in exc.value.issues)


def test_duplicate_symbols_are_rejected():
    with pytest.raises(ModelValidationError) as exc:
        validate_model({"roles": ["a", "a"]})
    assert "DuplicateSymbol" in exc.value.codes


def test_partial_pi_and_delta_default_to_empty():
    doc = {"roles": ["a"], "objects": ["x"], "purposes": ["p"], "pa": [["a", "x"]],
           "tau": [{"role": "a", "object": "x", "start": 0, "end": 3}]}
    m = validate_model(doc)
    assert m.pi[("a", "x")] == frozenset()
    assert m.delta["p"] == frozenset()
    assert m.rho_r["a"] == frozenset()


def test_gamma_is_not_closed_symmetrically_or_reflexively():
    doc = {"labels": ["EU", "US"], "gamma": [["EU", "US"]]}
    m = validate_model(doc)
    assert m.gamma == frozenset({("EU", "US")})


def test_pharma_fixture(pharma):
    assert len(pharma.roles) == 5
    assert len(pharma.objects) == 6
    assert pharma.tau[("ClinicalResearcher", "ehr_pseudonymized")] == ValidityInterval(0, 90)


def test_missing_file_raises_io_error(tmp_path):
    with pytest.raises(ModelIOError):
        load_model(tmp_path / "absent.json")


def test_truncated_file_raises_parse_error(tmp_path, data_dir):
    text = (data_dir / "pharma.model.json").read_text()
    bad = tmp_path / "cut.json"
    bad.write_text(text[: len(text) // 2])
    with pytest.raises(ModelParseError) as exc:
        load_model(bad)
    assert exc.value.line > 1


def test_save_load_save_is_byte_stable(tmp_path, pharma):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_model(pharma, a)
    save_model(load_model(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert load_model(a) == pharma


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_tau_domain_equals_pa(seed):
    m = random_model(random.Random(seed))
    assert set(m.tau) == set(m.pa)
    assert set(m.pi) == set(m.pa)
    assert set(m.delta) == set(m.purposes)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_validation_is_idempotent(seed):
    m = random_model(random.Random(seed))
    assert validate_model(m) == m
    assert loads_model(dumps_model(m)) == m


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_document_order_does_not_matter(seed):
    rng = random.Random(seed)
    doc = random_document(rng)
    shuffled = json.loads(json.dumps(doc))
    for key in ("roles", "objects", "labels", "purposes", "pa", "tau", "gamma", "pi"):
        rng.shuffle(shuffled[key])
    assert dumps_model(validate_model(doc)) == dumps_model(validate_model(shuffled))
