"""Witness-language levels, catalogs, minimal witness order and the boundary flag."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping, Optional, Union

from . import confession
from .orientation import (
    DECLARED_LICENSE,
    DEFAULT_POLY,
    FailureCertificate,
    MeasureSpec,
    OrientationVerdict,
    PrecedenceSpec,
    certificate_from_verdict,
    declared_certificate,
    orient_linear,
    orient_mpo,
    orient_poly,
)
from .trs import Trs

LEVEL_NAMES = {0: "W0 direct-whole", 1: "W1 imported-whole", 2: "W2 transformed-call"}
UNDEFINED = "undefined-above-2"
OPS = ("additive", "transparent-compositional", "affine", "poly", "mpo", "confess", "declared")


class CatalogError(ValueError):
    pass


def level_name(level: int) -> str:
    return LEVEL_NAMES.get(level, f"W{level}")


@dataclass(frozen=True)
class Attempt:
    op: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_report(self) -> dict:
        return {"op": self.op, "params": dict(self.params)}


@dataclass(frozen=True)
class CatalogEntry:
    level: int
    name: str
    attempt: Attempt
    expected_outcome: Optional[str] = None

    def to_report(self) -> dict:
        out = {"level": self.level, "name": self.name, "attempt": self.attempt}
        if self.expected_outcome is not None:
            out["expectedOutcome"] = self.expected_outcome
        return out


@dataclass(frozen=True)
class Catalog:
    """Entries grouped by level with a per-level budget B_i."""

    name: str
    entries: tuple[CatalogEntry, ...]
    budgets: Mapping[int, int]
    required_order: int = 2

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "budgets", {int(k): v for k, v in dict(self.budgets).items()})
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise CatalogError(f"duplicate entry names: {', '.join(dupes)}")
        for e in self.entries:
            if not isinstance(e.level, int) or e.level < 0:
                raise CatalogError(f"entry {e.name}: level must be a nonnegative integer")
            if e.attempt.op not in OPS:
                raise CatalogError(f"entry {e.name}: unresolvable op {e.attempt.op!r}")
            if e.expected_outcome not in (None, "succeeds", "fails"):
                raise CatalogError(f"entry {e.name}: expectedOutcome must be succeeds or fails")
            if e.level not in self.budgets:
                raise CatalogError(f"entry {e.name}: level {e.level} has no budget")
        for level, budget in self.budgets.items():
            if level < 0:
                raise CatalogError(f"budget for negative level {level}")
            if not isinstance(budget, int) or budget < 0:
                raise CatalogError(f"budget of level {level} must be a nonnegative integer")
            if budget > len(self.at(level)):
                raise CatalogError(
                    f"budget {budget} of level {level} exceeds its {len(self.at(level))} entries"
                )
        if not isinstance(self.required_order, int) or self.required_order < 0:
            raise CatalogError("required_order must be a nonnegative integer")

    @property
    def levels(self) -> list[int]:
        return sorted(self.budgets)

    def at(self, level: int) -> list[CatalogEntry]:
        return [e for e in self.entries if e.level == level]

    def budget(self, level: int) -> int:
        return self.budgets.get(level, 0)

    def step_bound(self) -> int:
        return sum(b + 1 for b in self.budgets.values())

    def extended(self, extra: list[CatalogEntry], name: Optional[str] = None) -> "Catalog":
        entries = list(self.entries) + list(extra)
        budgets = dict(self.budgets)
        for e in extra:
            budgets[e.level] = budgets.get(e.level, 0) + 1
        return Catalog(name or self.name, tuple(entries), budgets, self.required_order)

    def to_report(self) -> dict:
        return {
            "name": self.name,
            "required_order": self.required_order,
            "levels": [{"level": lv, "budget": self.budgets[lv]} for lv in self.levels],
            "entries": list(self.entries),
        }

    @classmethod
    def from_data(cls, data: Union[list, Mapping], name: str = "catalog") -> "Catalog":
        """Accepts ``{"name", "required_order", "levels", "entries"}`` or a bare entry array
        (budgets then default to the entry counts)."""
        if isinstance(data, list):
            raw_entries, levels, req = data, None, 2
        elif isinstance(data, Mapping):
            raw_entries = data.get("entries", [])
            levels = data.get("levels")
            req = data.get("required_order", 2)
            name = data.get("name", name)
        else:
            raise CatalogError("catalog must be an object or an array")
        entries = []
        for raw in raw_entries:
            try:
                attempt = raw["attempt"]
                entries.append(
                    CatalogEntry(
                        int(raw["level"]),
                        str(raw["name"]),
                        Attempt(str(attempt["op"]), dict(attempt.get("params", {}))),
                        raw.get("expectedOutcome"),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise CatalogError(f"malformed catalog entry {raw!r}") from exc
        if levels is None:
            budgets: dict[int, int] = {}
            for e in entries:
                budgets[e.level] = budgets.get(e.level, 0) + 1
        else:
            try:
                budgets = {int(lv["level"]): int(lv["budget"]) for lv in levels}
            except (KeyError, TypeError) as exc:
                raise CatalogError("malformed levels list") from exc
        return cls(name, tuple(entries), budgets, int(req))


def load_catalog(path_or_name: str) -> Catalog:
    """A shipped catalog by name (``barrier-confined``, ``full``, ...) or a JSON file path."""
    shipped = resources.files("recursorlab") / "catalogs" / f"{path_or_name}.json"
    if shipped.is_file():
        text = shipped.read_text()
    else:
        with open(path_or_name, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    return Catalog.from_data(data, name=str(path_or_name))


SHIPPED_CATALOGS = ("barrier-confined", "full", "confined-below-w2", "non-duplicating")


# ---------------------------------------------------------------- attempts


@dataclass(frozen=True)
class EntryOutcome:
    entry: CatalogEntry
    succeeded: bool
    certificate: Optional[FailureCertificate] = None
    verdict: Optional[OrientationVerdict] = None
    confession: Optional[dict] = None

    def to_report(self) -> dict:
        out = {
            "entry": self.entry.name,
            "level": self.entry.level,
            "outcome": "succeeds" if self.succeeded else "fails",
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.entry_name
        return out


def _measure(params: Mapping, family: str) -> MeasureSpec:
    weights = params.get("weights")
    if weights is None:
        return MeasureSpec.uniform(family)
    return MeasureSpec(family, weights)


def confess(trs: Trs, route: str, K: int = 0) -> Optional[dict]:
    """The confession attempt: DP extraction and base order under the route's license."""
    witness = confession.build_forgetting_witness(route)
    problem = confession.extract_dependency_pairs(trs)
    verdict = confession.check_base_order(problem)
    if not verdict.oriented or not problem.pairs:
        return None
    return {
        "witness": witness,
        "problem": problem,
        "base_order": verdict,
        "account": confession.ag_account(trs, K),
    }


def run_entry(trs: Trs, entry: CatalogEntry, K: int = 0) -> EntryOutcome:
    op, params, level, name = entry.attempt.op, entry.attempt.params, entry.level, entry.name
    if op == "declared":
        ok = entry.expected_outcome == "succeeds"
        cert = None if ok else declared_certificate(name, level, params.get("license", DECLARED_LICENSE))
        return EntryOutcome(entry, ok, cert)
    if op in ("additive", "transparent-compositional", "affine"):
        family = "affine" if op == "affine" else "additive"
        verdict = orient_linear(trs, _measure(params, family))
    elif op == "poly":
        m = MeasureSpec("poly", params["weights"]) if "weights" in params else DEFAULT_POLY
        verdict = orient_poly(trs, m)
    elif op == "mpo":
        verdict = orient_mpo(trs, PrecedenceSpec.parse(params.get("precedence", "")))
    elif op == "confess":
        route = params.get("route", "dp-projection")
        found = confess(trs, route, K)
        if found is None:
            return EntryOutcome(
                entry,
                False,
                FailureCertificate(
                    name, level, "declared",
                    f"no strict subterm descent for the dependency pairs under {route}",
                    license=confession.LICENSES[route],
                ),
            )
        return EntryOutcome(entry, True, confession=found)
    else:
        raise CatalogError(f"unresolvable op {op!r}")
    if verdict.oriented:
        return EntryOutcome(entry, True, verdict=verdict)
    return EntryOutcome(entry, False, certificate_from_verdict(name, level, verdict), verdict)


@dataclass(frozen=True)
class KappaResult:
    kappa_star: Union[int, str]
    outcomes: Mapping[int, tuple[EntryOutcome, ...]]

    @property
    def ob(self) -> bool:
        return isinstance(self.kappa_star, int) and self.kappa_star > 0

    def to_report(self) -> dict:
        return {
            "kappa_star": self.kappa_star,
            "ob": self.ob,
            "per_level": {str(lv): list(outs) for lv, outs in sorted(self.outcomes.items())},
        }


def compute_kappa(trs: Trs, catalog: Catalog) -> KappaResult:
    """Run every entry; κ* is the least level with a success."""
    if not catalog.entries:
        raise CatalogError("catalog has no entries")
    outcomes: dict[int, list[EntryOutcome]] = {}
    for level in sorted({e.level for e in catalog.entries}):
        outcomes[level] = [run_entry(trs, e) for e in catalog.at(level)]
    winners = [lv for lv, outs in outcomes.items() if any(o.succeeded for o in outs)]
    kappa = min(winners) if winners else UNDEFINED
    return KappaResult(kappa, {lv: tuple(o) for lv, o in outcomes.items()})


def exhaustion_gap(catalog: Catalog, kappa_star: Union[int, str]) -> int:
    """E = Σ_{i<κ*} B_i; an undefined κ* falls back to the catalog's required order."""
    bound = catalog.required_order if kappa_star == UNDEFINED else kappa_star
    if not isinstance(bound, int) or bound < 0:
        raise ValueError(f"bad kappa {kappa_star!r}")
    return sum(catalog.budget(lv) for lv in range(bound))
