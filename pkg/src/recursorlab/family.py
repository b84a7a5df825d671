"""The six-member primitive-recursion family and its three-way classification."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .orientation import MeasureSpec, OrientationVerdict, orient_linear
from .terms import F, G, S, Z_SYMBOL, Term, Z
from .trs import Rule, Trs

STEP_KINDS = ("duplicating", "linear", "none")
CLASSES = ("duplicating-complete-blocked", "linear-complete-direct", "incomplete")

_x, _y, _n = Term("x"), Term("y"), Term("n")
BASE_RULE = Rule(Term(F, (_x, _y, Z)), _x, "base")
_STEP_LHS = Term(F, (_x, _y, Term(S, (_n,))))
STEP_RULES = {
    "duplicating": Rule(_STEP_LHS, Term(G, (_y, Term(F, (_x, _y, _n)))), "step"),
    "linear": Rule(_STEP_LHS, Term(F, (_x, _y, _n)), "step"),
}
SIGNATURE = (F, Z_SYMBOL, S, G)


@dataclass(frozen=True)
class FamilyMember:
    has_base: bool
    step_kind: str

    def __post_init__(self):
        if self.step_kind not in STEP_KINDS:
            raise ValueError(f"step kind must be one of {STEP_KINDS}")

    @property
    def name(self) -> str:
        base = "base" if self.has_base else "nobase"
        return f"{base}-{self.step_kind}"

    @property
    def complete(self) -> bool:
        return self.has_base and self.step_kind != "none"

    @property
    def trs(self) -> Trs:
        rules = ([BASE_RULE] if self.has_base else []) + (
            [STEP_RULES[self.step_kind]] if self.step_kind != "none" else []
        )
        return Trs(self.name.replace("-", "_"), tuple(rules), SIGNATURE)


MEMBERS = tuple(FamilyMember(b, k) for b in (True, False) for k in STEP_KINDS)


def sampled_weights(rng: random.Random, family: str, high: int = 9) -> MeasureSpec:
    if family == "additive":
        return MeasureSpec("additive", {s: rng.randint(0, high) for s in "FGSZ"})
    arity = {"F": 3, "G": 2, "S": 1, "Z": 0}
    return MeasureSpec(
        "affine",
        {s: {"c": rng.randint(0, high), "a": [rng.randint(1, 3) for _ in range(a)]} for s, a in arity.items()},
    )


@dataclass(frozen=True)
class MemberClassification:
    member: FamilyMember
    cls: str
    evidence: Optional[OrientationVerdict] = None
    refuted_samples: Optional[int] = None
    samples: Optional[int] = None

    def to_report(self) -> dict:
        out = {
            "member": self.member.name,
            "has_base": self.member.has_base,
            "step_kind": self.member.step_kind,
            "rules": [str(r) for r in self.member.trs.rules],
            "class": self.cls,
        }
        if self.evidence is not None:
            out["evidence"] = self.evidence
        if self.samples is not None:
            out["refuted_samples"] = self.refuted_samples
            out["samples"] = self.samples
        return out


def classify_member(member: FamilyMember, samples: int = 50, seed: int = 0) -> MemberClassification:
    if not member.complete:
        return MemberClassification(member, "incomplete")
    trs = member.trs
    direct = orient_linear(trs, MeasureSpec.uniform("additive"))
    if direct.oriented:
        return MemberClassification(member, "linear-complete-direct", direct)
    rng = random.Random(seed)
    refuted = 0
    for i in range(samples):
        verdict = orient_linear(trs, sampled_weights(rng, "additive" if i % 2 == 0 else "affine"))
        refuted += verdict.outcome == "refuted"
    cls = "duplicating-complete-blocked" if refuted == samples else "unclassified"
    return MemberClassification(member, cls, direct, refuted, samples)


def classify_family(samples: int = 50, seed: int = 0) -> dict[str, MemberClassification]:
    return {m.name: classify_member(m, samples, seed) for m in MEMBERS}


def member(has_base: bool, step_kind: str) -> FamilyMember:
    return FamilyMember(has_base, step_kind)
