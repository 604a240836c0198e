"""Literal, test-local evaluation of the five access conditions.

Kept deliberately naive and independent of the package's own helpers.
"""

from __future__ import annotations

from fedgov.decision import CONJUNCTS


def conjuncts(model, r, o, p, t) -> dict[str, bool]:
    assigned = (r, o) in model.pa
    if assigned:
        iv = model.tau[(r, o)]
        timely = iv.start <= t <= iv.end
    else:
        timely = False
    spatial = False
    for a in model.rho_r.get(r, ()):
        for b in model.rho_o.get(o, ()):
            if (a, b) in model.gamma:
                spatial = True
    purpose = p in model.pi.get((r, o), ())
    minimal = o in model.delta.get(p, ())
    return dict(zip(CONJUNCTS, (assigned, timely, spatial, purpose, minimal)))


def allowed(model, r, o, p, t) -> bool:
    return all(conjuncts(model, r, o, p, t).values())


def is_violation(model, r, o, p, t) -> bool:
    c = conjuncts(model, r, o, p, t)
    return c["assignment"] and c["temporal"] and not (c["spatial"] and c["purpose"] and c["minimisation"])
