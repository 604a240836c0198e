"""Governance checks for federated data processing.

Spatio-temporal, purpose-aware role-based authorization over a federation
model, native policy engines, workflow compliance checking, a staged
enforcement simulator and the participant onboarding lifecycle.
"""

from .decision import (
    AccessRequest,
    Decision,
    SetAccessRequest,
    ViolationRecord,
    audit_violations,
    authorize,
    authorize_set,
    brute_force_authorize,
)
from .model import FederationModel, ValidityInterval, load_model, validate_model
from .temporal_graph import active_edges, active_st_edges, region_allowed

__all__ = [
    "AccessRequest",
    "Decision",
    "FederationModel",
    "SetAccessRequest",
    "ValidityInterval",
    "ViolationRecord",
    "active_edges",
    "active_st_edges",
    "audit_violations",
    "authorize",
    "authorize_set",
    "brute_force_authorize",
    "load_model",
    "region_allowed",
    "validate_model",
]
