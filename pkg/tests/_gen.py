"""Seeded random federation models for sweeps and property tests."""

from __future__ import annotations

import random
from typing import Iterator

from fedgov.decision import AccessRequest
from fedgov.model import FederationModel, validate_model

HORIZON = 20  # interval bounds lie in [0, HORIZON]
TICKS = range(HORIZON)  # 20 probe ticks per (r, o, p)


def random_document(rng: random.Random, *, max_roles: int = 5, max_objects: int = 6,
                    max_labels: int = 4, max_purposes: int = 4) -> dict:
    roles = [f"r{i}" for i in range(rng.randint(1, max_roles))]
    objects = [f"o{i}" for i in range(rng.randint(1, max_objects))]
    labels = [f"L{i}" for i in range(rng.randint(1, max_labels))]
    purposes = [f"p{i}" for i in range(rng.randint(1, max_purposes))]

    pairs = [(r, o) for r in roles for o in objects]
    pa = [p for p in pairs if rng.random() < 0.5]
    tau = []
    for r, o in pa:
        a, b = rng.randint(0, HORIZON), rng.randint(0, HORIZON)
        tau.append({"role": r, "object": o, "start": min(a, b), "end": max(a, b)})

    def some(items, p):
        return [x for x in items if rng.random() < p]

    return {
        "roles": roles,
        "objects": objects,
        "labels": labels,
        "purposes": purposes,
        "pa": [list(p) for p in pa],
        "tau": tau,
        "rho_r": {r: some(labels, 0.5) for r in roles if rng.random() < 0.9},
        "rho_o": {o: some(labels, 0.5) for o in objects if rng.random() < 0.9},
        "gamma": [[a, b] for a in labels for b in labels if rng.random() < 0.4],
        "pi": [{"role": r, "object": o, "purposes": some(purposes, 0.5)}
               for r, o in pa if rng.random() < 0.85],
        "delta": {p: some(objects, 0.5) for p in purposes if rng.random() < 0.9},
    }


def random_model(rng: random.Random, **limits) -> FederationModel:
    return validate_model(random_document(rng, **limits))


def grid(model: FederationModel, ticks=TICKS) -> Iterator[AccessRequest]:
    for r in sorted(model.roles):
        for o in sorted(model.objects):
            for p in sorted(model.purposes):
                for t in ticks:
                    yield AccessRequest(r, o, p, t)


def restrict(rng: random.Random, model: FederationModel) -> tuple[str, FederationModel] | None:
    """Remove one element of gamma, pi or delta, or shrink one interval by a tick."""
    doc = model.to_document()
    options = []
    if doc["gamma"]:
        options.append("gamma")
    if any(e["purposes"] for e in doc["pi"]):
        options.append("pi")
    if any(doc["delta"].values()):
        options.append("delta")
    if any(e["start"] < e["end"] for e in doc["tau"]):
        options.append("tau")
    if not options:
        return None
    kind = rng.choice(options)
    if kind == "gamma":
        doc["gamma"].pop(rng.randrange(len(doc["gamma"])))
    elif kind == "pi":
        entry = rng.choice([e for e in doc["pi"] if e["purposes"]])
        entry["purposes"].pop(rng.randrange(len(entry["purposes"])))
    elif kind == "delta":
        key = rng.choice(sorted(k for k, v in doc["delta"].items() if v))
        doc["delta"][key].pop(rng.randrange(len(doc["delta"][key])))
    else:
        entry = rng.choice([e for e in doc["tau"] if e["start"] < e["end"]])
        if rng.random() < 0.5:
            entry["start"] += 1
        else:
            entry["end"] -= 1
    return kind, validate_model(doc)
