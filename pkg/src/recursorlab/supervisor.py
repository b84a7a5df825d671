"""Budgeted supervisory loop, typed T3/T4 records, and the exhaustion audit."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

from . import confession
from .orientation import FailureCertificate
from .report import to_plain
from .rewrite import canonical_trace
from .terms import Term, Z, format_term
from .trs import Trs, format_trs, parse_term, parse_trs
from .witness_order import (
    UNDEFINED,
    Attempt,
    Catalog,
    CatalogEntry,
    EntryOutcome,
    exhaustion_gap,
    level_name,
    run_entry,
)

KINDS = ("T3", "T4")
BOUNDARY_CONDITION = "kappaStar > 0"
CONSTRUCTION_LICENSE = "construction-witness"
DIRECT_LICENSE = "direct-witness"
WHOLE_TERM = "whole-term"
VIOLATIONS = (
    "untyped-stop",
    "missing-license",
    "missing-dimension",
    "missing-residual",
    "residual-does-not-verify",
    "level-inconsistent",
    "insufficient-exhaustion",
    "missing-boundary-condition",
    "missing-unresolved-declaration",
    "internal-metahalt-claim",
    "budget-overrun",
)
_RESERVED = re.compile(r"\b(undecidable|impossible)\b", re.IGNORECASE)


class RecordError(ValueError):
    """The record cannot be read as a typed output."""


@dataclass(frozen=True)
class Obligation:
    trs: Trs
    a: Term = Z
    b: Term = Z
    K: int = 0

    def to_report(self) -> dict:
        return {
            "trs": self.trs.name,
            "trs_text": format_trs(self.trs),
            "input": {"a": self.a, "b": self.b, "K": self.K},
        }

    @classmethod
    def from_report(cls, data: Mapping) -> "Obligation":
        inp = data.get("input", {})
        return cls(parse_trs(data["trs_text"]), parse_term(inp.get("a", "Z")), parse_term(inp.get("b", "Z")), int(inp.get("K", 0)))


@dataclass(frozen=True)
class TypedOutputRecord:
    kind: str
    obligation: Obligation
    steps_consumed: int
    step_bound: int
    tried_languages: Mapping[str, Any]
    certificates: tuple[FailureCertificate, ...] = ()
    level: Optional[int] = None
    license_name: Optional[str] = None
    framework: Optional[str] = None
    dimension: Optional[str] = None
    residual: Optional[Mapping[str, Any]] = None
    boundary_condition: Optional[str] = None
    unresolved: Optional[bool] = None
    kappa_star: Union[int, str, None] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RecordError(f"typed output kind must be T3 or T4, got {self.kind!r}")

    def certificate_length(self) -> Optional[int]:
        account = (self.residual or {}).get("account")
        return None if account is None else account["certificate_length"]

    def to_report(self) -> dict:
        return {
            "kind": self.kind,
            "obligation": self.obligation,
            "level": self.level,
            "license_name": self.license_name,
            "framework": self.framework,
            "dimension": self.dimension,
            "residual": self.residual,
            "tried_languages": self.tried_languages,
            "boundary_condition": self.boundary_condition,
            "unresolved": self.unresolved,
            "kappa_star": self.kappa_star,
            "certificates": list(self.certificates),
            "steps_consumed": self.steps_consumed,
            "step_bound": self.step_bound,
        }

    @classmethod
    def from_report(cls, data: Mapping) -> "TypedOutputRecord":
        try:
            return cls(
                kind=data["kind"],
                obligation=Obligation.from_report(data["obligation"]),
                steps_consumed=data["steps_consumed"],
                step_bound=data["step_bound"],
                tried_languages=data["tried_languages"],
                certificates=tuple(FailureCertificate.from_report(c) for c in data.get("certificates", [])),
                level=data.get("level"),
                license_name=data.get("license_name"),
                framework=data.get("framework"),
                dimension=data.get("dimension"),
                residual=data.get("residual"),
                boundary_condition=data.get("boundary_condition"),
                unresolved=data.get("unresolved"),
                kappa_star=data.get("kappa_star"),
            )
        except (KeyError, TypeError) as exc:
            raise RecordError(f"malformed typed output record: {exc}") from exc


def _confession_residual(obligation: Obligation, entry: CatalogEntry, found: dict) -> dict:
    route = entry.attempt.params.get("route", "dp-projection")
    trace = canonical_trace(obligation.a, obligation.b, obligation.K)
    ranks = [confession.rank_of(route, step.term) for step in trace.steps]
    return to_plain(
        {
            "entry": entry.name,
            "attempt": entry.attempt,
            "route": route,
            "forgetting_witness": found["witness"],
            "dependency_pairs": found["problem"],
            "base_order": found["base_order"],
            "rank_table": ranks,
            "account": found["account"],
        }
    )


def _t3(obligation, catalog, level, entry, outcome: EntryOutcome, steps, tried, certs) -> TypedOutputRecord:
    if outcome.confession is not None:
        witness = outcome.confession["witness"]
        license_name = witness.license.name
        framework = f"dependency pairs with subterm base order [{witness.license.register_annotation}]"
        dimension = witness.dimension
        residual = _confession_residual(obligation, entry, outcome.confession)
    else:
        license_name = DIRECT_LICENSE if level == 0 else CONSTRUCTION_LICENSE
        framework = outcome.verdict.method if outcome.verdict is not None else entry.attempt.op
        dimension = WHOLE_TERM
        residual = to_plain({"entry": entry.name, "attempt": entry.attempt, "verdict": outcome.verdict})
    return TypedOutputRecord(
        "T3", obligation, steps, catalog.step_bound(), tried, tuple(certs),
        level=level, license_name=license_name, framework=framework,
        dimension=dimension, residual=residual, kappa_star=level,
    )


def supervise(
    trs: Trs, catalog: Catalog, K: int = 0, a: Term = Z, b: Term = Z
) -> TypedOutputRecord:
    """Walk the levels in order within budget; stop typed at the first success.

    One step per level entered and one per attempt, so a run never exceeds
    Σ(B_i + 1) steps.  Attempts past a level's budget are refused.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    obligation = Obligation(trs, a, b, K)
    steps = 0
    certs: list[FailureCertificate] = []
    tried: dict[str, dict] = {}
    for level in catalog.levels:
        steps += 1
        attempted: list[str] = []
        tried[str(level)] = {"name": level_name(level), "budget": catalog.budget(level), "entries": attempted}
        for entry in catalog.at(level)[: catalog.budget(level)]:
            steps += 1
            attempted.append(entry.name)
            outcome = run_entry(trs, entry, K)
            if outcome.succeeded:
                return _t3(obligation, catalog, level, entry, outcome, steps, tried, certs)
            certs.append(outcome.certificate)
    assert steps <= catalog.step_bound()
    return TypedOutputRecord(
        "T4", obligation, steps, catalog.step_bound(), tried, tuple(certs),
        boundary_condition=BOUNDARY_CONDITION, unresolved=True, kappa_star=UNDEFINED,
    )


# ------------------------------------------------------------------ audit


@dataclass(frozen=True)
class Violation:
    type: str
    detail: Optional[str] = None
    found: Optional[int] = None
    required: Optional[int] = None

    def to_report(self) -> dict:
        out: dict = {"type": self.type}
        for key in ("detail", "found", "required"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


@dataclass(frozen=True)
class AuditVerdict:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def types(self) -> list[str]:
        return [v.type for v in self.violations]

    def to_report(self) -> dict:
        return {"valid": self.valid, "violations": list(self.violations)}


def _strings(value):
    stack = [value]
    while stack:
        v = stack.pop()
        if isinstance(v, str):
            yield v
        elif isinstance(v, Mapping):
            stack.extend(v.keys())
            stack.extend(v.values())
        elif isinstance(v, (list, tuple)):
            stack.extend(v)


def _evidence_level(license_name: str) -> int:
    if license_name in confession.LICENSES.values():
        return 2
    return 0 if license_name == DIRECT_LICENSE else 1


def _reverify(data: Mapping) -> Optional[str]:
    """None when the T3 residual re-derives; otherwise the reason it does not."""
    residual = data["residual"]
    try:
        obligation = Obligation.from_report(data["obligation"])
        attempt = residual["attempt"]
        entry = CatalogEntry(
            int(data.get("level") or 0),
            str(residual["entry"]),
            Attempt(attempt["op"], dict(attempt.get("params", {}))),
            "succeeds",
        )
    except (KeyError, TypeError, ValueError) as exc:
        return f"residual unreadable: {exc}"
    if "base_order" in residual:
        problem = confession.extract_dependency_pairs(obligation.trs)
        verdict = confession.check_base_order(problem)
        if to_plain(verdict) != residual["base_order"]:
            return "base-order verdict does not re-derive"
        if not verdict.oriented:
            return "base order fails"
        account = confession.ag_account(obligation.trs, obligation.K)
        if to_plain(account) != residual.get("account"):
            return "cost account does not re-derive"
        return None
    if not run_entry(obligation.trs, entry, obligation.K).succeeded:
        return "witness does not orient the obligation"
    return None


def audit_record(
    record: Union[TypedOutputRecord, Mapping], catalog: Catalog, kappa_star: Union[int, str]
) -> AuditVerdict:
    data = to_plain(record) if isinstance(record, TypedOutputRecord) else record
    if not isinstance(data, Mapping):
        raise RecordError("record must be a JSON object")
    out: list[Violation] = []
    kind = data.get("kind")
    if kind not in KINDS:
        return AuditVerdict((Violation("untyped-stop", f"kind {kind!r} is neither T3 nor T4"),))

    if not data.get("certificate_reference"):
        for s in _strings(data):
            hit = _RESERVED.search(s)
            if hit:
                out.append(Violation("internal-metahalt-claim", f"verdict string {hit.group(0)!r} without a richer-language certificate"))
                break

    steps = data.get("steps_consumed")
    if not isinstance(steps, int) or steps > catalog.step_bound():
        out.append(Violation("budget-overrun", found=steps if isinstance(steps, int) else None, required=catalog.step_bound()))
    certs = data.get("certificates") or []
    per_level: dict[int, set] = {}
    for c in certs:
        per_level.setdefault(c.get("level"), set()).add(c.get("entry_name"))
    for level, names in sorted(per_level.items(), key=lambda kv: str(kv[0])):
        if isinstance(level, int) and len(names) > catalog.budget(level):
            out.append(Violation("budget-overrun", f"level {level}", len(names), catalog.budget(level)))

    listed = {e.name for e in catalog.entries}
    distinct = len({c.get("entry_name") for c in certs if c.get("entry_name") in listed})

    if kind == "T3":
        license_name = data.get("license_name")
        if not license_name:
            out.append(Violation("missing-license"))
        if not data.get("dimension"):
            out.append(Violation("missing-dimension"))
        if not data.get("residual"):
            out.append(Violation("missing-residual"))
        else:
            reason = _reverify(data)
            if reason is not None:
                out.append(Violation("residual-does-not-verify", reason))
        level = data.get("level")
        if not isinstance(level, int):
            out.append(Violation("level-inconsistent", "T3 without a claimed level"))
        else:
            if license_name and level < _evidence_level(license_name):
                out.append(Violation("level-inconsistent", f"claimed level {level} is below its evidence"))
            if isinstance(kappa_star, int) and level < kappa_star:
                out.append(Violation("level-inconsistent", f"claimed level {level} is below kappaStar {kappa_star}"))
            required = exhaustion_gap(catalog, level)
            if distinct < required:
                out.append(Violation("insufficient-exhaustion", found=distinct, required=required))
    else:
        required = exhaustion_gap(catalog, kappa_star)
        if distinct < required:
            out.append(Violation("insufficient-exhaustion", found=distinct, required=required))
        if BOUNDARY_CONDITION not in (data.get("boundary_condition") or ""):
            out.append(Violation("missing-boundary-condition"))
        if data.get("unresolved") is not True:
            out.append(Violation("missing-unresolved-declaration"))
    return AuditVerdict(tuple(out))


def load_record(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordError(f"record is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise RecordError("record must be a JSON object")
    return data


def payload_term(text: Optional[str]) -> Term:
    t = Z if text is None else parse_term(text)
    if not t.ground:
        raise ValueError(f"{format_term(t)} is not ground")
    return t
