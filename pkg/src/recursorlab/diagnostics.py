"""Closed-form quantitative laws of the canonical trace.

Polynomial quantities are exact ``Fraction``/``int`` values; only the
logarithmic ones (gauge entropy, inefficiency, channel bits) are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .terms import Term

WRAPPER_SIZE = 1
NORM_TAGS = {"dp": "l0", "coupled": "linf", "direct": "l1"}


def size2(n: int) -> int:
    """Bit length of n >= 1."""
    if n < 1:
        raise ValueError("size2 is defined for n >= 1")
    return n.bit_length()


def default_base_overhead(b: int, a: int = 1) -> int:
    """c_* = 1 (F node) + |a| + |b| + 1 (Z node)."""
    return 2 + a + b


def con(k: int, b: int) -> int:
    """Confessed burden Σ_{i=0..k} (i+1)|b|; (k+1)(k+2) is always even."""
    return (k + 1) * (k + 2) // 2 * b


def con_total(k: int, w: int) -> int:
    return (k + 1) * (k + 2) // 2 * w


def trace_size(i: int, k: int, b: int, c_star: int, g: int = WRAPPER_SIZE) -> int:
    """|t_i| = i(|G|+|b|) + (k-i) + c_*."""
    return i * (g + b) + (k - i) + c_star


def h_proof(i: int, k: int, b: int, c_star: int, g: int = WRAPPER_SIZE) -> Fraction:
    return Fraction(i * b, k + c_star + i * (g + b - 1))


def h_proof_curve(k: int, b: int, c_star: int, g: int = WRAPPER_SIZE) -> list[Fraction]:
    return [h_proof(i, k, b, c_star, g) for i in range(k + 1)]


def h_gauge(i: int) -> float:
    return math.log2(i + 1)


@dataclass(frozen=True)
class Inefficiency:
    k: int
    w: int
    eta: float
    lower_bound: Optional[int] = None

    @property
    def lower_bound_holds(self) -> Optional[bool]:
        return None if self.lower_bound is None else self.eta >= self.lower_bound

    def to_report(self) -> dict:
        return {
            "k": self.k,
            "w": self.w,
            "eta": self.eta,
            "lower_bound": self.lower_bound,
            "lower_bound_holds": self.lower_bound_holds,
        }


def eta(k: int, w: int) -> float:
    if k < 1:
        raise ValueError("inefficiency needs k >= 1 (ln 1 = 0)")
    if w < 1:
        raise ValueError("inefficiency needs w >= 1")
    return (k + 1) * (k + 2) * w / (2 * math.log(k + 1))


def inefficiency(k: int, w: int) -> Inefficiency:
    """η(k,w); for odd k = 2N+1 also the floor N it must clear."""
    value = eta(k, w)
    return Inefficiency(k, w, value, (k - 1) // 2 if k % 2 == 1 else None)


@dataclass(frozen=True)
class DescriptionModel:
    c0: int = 1
    g: int = WRAPPER_SIZE

    def explicit(self, i: int, b: int) -> int:
        return (i + 1) * (b + self.g)

    def compressed(self, i: int, b: int) -> int:
        return b + self.g + size2(i + 1) + self.c0


def description_gap(i: int, b: int, model: DescriptionModel = DescriptionModel()) -> int:
    if i < 0:
        raise ValueError("i must be nonnegative")
    gap = model.explicit(i, b) - model.compressed(i, b)
    closed = i * (b + model.g) - size2(i + 1) - model.c0
    if gap != closed:
        raise AssertionError(f"description gap mismatch at i={i}: {gap} != {closed}")
    return gap


@dataclass(frozen=True)
class NormTriple:
    l0: int
    linf: int
    l1: int
    tags: dict = field(default_factory=lambda: dict(NORM_TAGS))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.l0, self.linf, self.l1)


def norm_triple(i: int, b: int) -> NormTriple:
    if i < 1:
        raise ValueError("the wrapper stack exists only for i >= 1")
    if b < 0:
        raise ValueError("|b| must be nonnegative")
    return NormTriple(1, b, i * b)


@dataclass(frozen=True)
class ChannelCosts:
    K: int
    payload_size: int
    base_overhead: int
    history: int
    counting: int
    origin: int
    clocking: int
    hidden_progress_bits: float
    k_max: int
    mutual_information_floor: float


def channel_costs(K: int, b: int, c_star: Optional[int] = None, k_max: Optional[int] = None) -> ChannelCosts:
    if K < 1:
        raise ValueError("channel costs need K >= 1")
    c_star = default_base_overhead(b) if c_star is None else c_star
    k_max = K if k_max is None else k_max
    if k_max < 1:
        raise ValueError("K_max must be >= 1")
    history = sum(trace_size(j, K, b, c_star) for j in range(K + 1))
    bits = K.bit_length()  # == ceil(log2(K+1)) for K >= 1
    return ChannelCosts(
        K, b, c_star, history, bits, bits, bits, math.log2(K + 1), k_max, math.log2(k_max)
    )


@dataclass(frozen=True)
class DiagnosticsReport:
    k: int
    payload_size: int
    wrapper_symbol_size: int
    cell_weight: int
    base_overhead: int
    con: Fraction
    con_total: Fraction
    res: int
    con_over_res: Optional[Fraction]
    con_over_res_squared: Optional[Fraction]
    hproof_curve: tuple[Fraction, ...]
    hgauge: tuple[float, ...]
    eta: Optional[float]
    norms: tuple[Optional[tuple[int, int, int]], ...]
    description_gap: tuple[int, ...]
    hidden_progress_bits: float
    channel_costs: Optional[ChannelCosts]

    def to_report(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            out[name] = getattr(self, name)
        out["norm_tags"] = dict(NORM_TAGS)
        return out


def diagnose(k: int, b: int, c_star: Optional[int] = None, c0: int = 1) -> DiagnosticsReport:
    if k < 0 or b < 0:
        raise ValueError("k and |b| must be nonnegative")
    c_star = default_base_overhead(b) if c_star is None else c_star
    if c_star < 2:
        raise ValueError("c_* must be at least 2 (the F node and the Z node)")
    g = WRAPPER_SIZE
    w = g + b
    c = Fraction(con(k, b))
    ct = Fraction(con_total(k, w))
    model = DescriptionModel(c0, g)
    return DiagnosticsReport(
        k=k,
        payload_size=b,
        wrapper_symbol_size=g,
        cell_weight=w,
        base_overhead=c_star,
        con=c,
        con_total=ct,
        res=k,
        con_over_res=c / k if k else None,
        con_over_res_squared=c / k**2 if k else None,
        hproof_curve=tuple(h_proof_curve(k, b, c_star, g)),
        hgauge=tuple(h_gauge(i) for i in range(k + 1)),
        eta=eta(k, w) if k else None,
        norms=tuple(norm_triple(i, b).as_tuple() if i else None for i in range(k + 1)),
        description_gap=tuple(description_gap(i, b, model) for i in range(k + 1)),
        hidden_progress_bits=math.log2(k + 1),
        channel_costs=channel_costs(k, b, c_star) if k else None,
    )


# ------------------------------------------------------------ observables


@dataclass(frozen=True)
class ObservableSpec:
    """O(seed, multiplicity) on the diagonal tuple of ``multiplicity`` seed copies."""

    name: str
    evaluator: Callable[[Term, int], int]


SEED_OBSERVABLE = ObservableSpec("seed", lambda seed, mult: seed.size)
ADDITIVE_OBSERVABLE = ObservableSpec("additive", lambda seed, mult: mult * seed.size)
CONSTANT_OBSERVABLE = ObservableSpec("constant", lambda seed, mult: 0)
OBSERVABLES = {o.name: o for o in (SEED_OBSERVABLE, ADDITIVE_OBSERVABLE, CONSTANT_OBSERVABLE)}


@dataclass(frozen=True)
class ObservableVerdict:
    observable: str
    factors: bool
    witness: Optional[tuple[Term, int, int]] = None
    seed_map: Optional[dict] = None

    def to_report(self) -> dict:
        out = {"observable": self.observable, "factors": self.factors}
        if self.witness is not None:
            seed, i, j = self.witness
            out["witness"] = {"seed": seed, "i": i, "j": j}
        if self.seed_map is not None:
            out["seed_map"] = {str(s): v for s, v in self.seed_map.items()}
        return out


def classify_observable(o: ObservableSpec, seeds: Sequence[Term], max_multiplicity: int) -> ObservableVerdict:
    """Does O factor through the collapse-to-seed map on the sampled diagonals?

    Stack index i carries multiplicity i+1; a failure is reported as the
    first (seed, i, j) with O(seed, i+1) != O(seed, j+1).
    """
    if not seeds:
        raise ValueError("need at least one seed")
    if max_multiplicity < 2:
        raise ValueError("max_multiplicity must be >= 2")
    seed_map = {}
    for seed in seeds:
        if not seed.ground:
            raise ValueError("seeds must be ground")
        base = o.evaluator(seed, 1)
        for i in range(1, max_multiplicity):
            if o.evaluator(seed, i + 1) != base:
                return ObservableVerdict(o.name, False, (seed, 0, i))
        seed_map[seed] = base
    return ObservableVerdict(o.name, True, seed_map=seed_map)


SWEEP_COLUMNS = ("k", "|b|", "con", "res", "ratio", "eta", "hproof_max")


def sweep_rows(ks: Sequence[int], bs: Sequence[int]) -> list[tuple]:
    rows = []
    for b in bs:
        c_star = default_base_overhead(b)
        for k in ks:
            if k < 1:
                raise ValueError("sweep needs k >= 1")
            c = Fraction(con(k, b))
            rows.append(
                (k, b, c, k, c / k, eta(k, 1 + b), max(h_proof_curve(k, b, c_star)))
            )
    return rows
