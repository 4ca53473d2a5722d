"""Verified decision of the growth conditions on f over the prescribed boxes.

Each condition compares sup f or inf f over a box with a threshold of the form
(constant) * rho:

=========  =======================  =============================  ===========
kind       box (scalar)             threshold                      inequality
=========  =======================  =============================  ===========
I1         [0, rho]                 m * rho                        sup <  T
I0         [rho, rho/c]             M * rho                        inf >  T
I0star     [0, rho/c]^2 (systems)   M_i * rho                      inf >  T
K_upper    [0, rho]                 m * rho                        sup <= T
K_lower    [c*rho, rho]             M * rho                        inf >= T
=========  =======================  =============================  ===========

Bounds come from a best-first interval branch-and-bound; the verdict is PASS
only when a verified enclosure clears the threshold, FAIL only with a
re-evaluable witness point, and UNDECIDED when the box budget runs out.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .cone import Constants
from .expr import Box, Expr, evaluate, evaluate_interval
from .problem import Problem

DEFAULT_BUDGET = 100_000
# strict inequalities must clear the threshold by this relative amount;
# non-strict ones may miss it by the same amount
REL_MARGIN = 1e-12


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNDECIDED = "UNDECIDED"


class Kind(str, Enum):
    I1 = "I1"
    I0 = "I0"
    I0STAR = "I0star"
    K_UPPER = "K_upper"
    K_LOWER = "K_lower"

    @property
    def is_upper(self) -> bool:
        return self in (Kind.I1, Kind.K_UPPER)

    @property
    def strict(self) -> bool:
        return self not in (Kind.K_UPPER, Kind.K_LOWER)

    @property
    def krasnoselskii(self) -> bool:
        return self in (Kind.K_UPPER, Kind.K_LOWER)


@dataclass(frozen=True)
class Condition:
    """A condition kind at a radius; ``which`` picks the equation for I0star (None: either)."""

    kind: Kind
    rho: float
    which: int | None = None

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ValueError(f"radius must be positive, got {self.rho}")
        if self.which not in (None, 1, 2):
            raise ValueError("which must be 1, 2 or None")

    @property
    def name(self) -> str:
        return self.kind.value if self.which is None else f"{self.kind.value}:{self.which}"

    @property
    def label(self) -> str:
        return f"{self.name}(rho={self.rho:.17g})"

    @staticmethod
    def parse_kind(text: str) -> tuple[Kind, int | None]:
        """'I0star:1' -> (Kind.I0STAR, 1); names are case-insensitive."""
        name, _, which = text.strip().partition(":")
        lookup = {k.value.lower(): k for k in Kind}
        lookup.update({"i0*": Kind.I0STAR, "kupper": Kind.K_UPPER, "klower": Kind.K_LOWER})
        try:
            kind = lookup[name.lower()]
        except KeyError:
            raise ValueError(f"unknown condition {text!r}; expected one of {[k.value for k in Kind]}") from None
        if which and kind is not Kind.I0STAR:
            raise ValueError(f"only I0star takes an equation index, got {text!r}")
        return kind, (int(which) if which else None)


@dataclass
class ConditionResult:
    verdict: Verdict
    margin: float
    witness: dict[str, float] | None = None
    boxes_explored: int = 0
    label: str = ""
    bound: float | None = None
    threshold: float | None = None
    box: list[list[float]] | None = None
    parts: list[ConditionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "verdict": self.verdict.value,
            "margin": self.margin,
            "bound": self.bound,
            "threshold": self.threshold,
            "box": self.box,
            "witness": self.witness,
            "boxes_explored": self.boxes_explored,
            "parts": [p.to_dict() for p in self.parts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ConditionResult:
        return cls(
            verdict=Verdict(d["verdict"]),
            margin=d["margin"],
            witness=d.get("witness"),
            boxes_explored=d.get("boxes_explored", 0),
            label=d.get("label", ""),
            bound=d.get("bound"),
            threshold=d.get("threshold"),
            box=d.get("box"),
            parts=[cls.from_dict(p) for p in d.get("parts", [])],
        )


# --------------------------------------------------------------------------
# boxes and thresholds


def box_for(kind: Kind, rho: float, c: float, dims: int = 1, which_eq: int = 1) -> Box:
    """The domain over which ``kind`` constrains f (or f_which_eq for systems)."""
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    outer = rho / c
    if kind in (Kind.I1, Kind.K_UPPER):
        side = (0.0, rho)
        return Box.of(u=side) if dims == 1 else Box.of(u=side, v=side)
    if kind is Kind.K_LOWER:
        if dims != 1:
            raise ValueError("Krasnoselskii conditions are defined for scalar problems")
        return Box.of(u=(c * rho, rho))
    if kind is Kind.I0:
        if dims == 1:
            return Box.of(u=(rho, outer))
        if which_eq == 1:
            return Box.of(u=(rho, outer), v=(0.0, outer))
        return Box.of(u=(0.0, outer), v=(rho, outer))
    if dims != 2:
        raise ValueError("I0star is defined for systems only")
    return Box.of(u=(0.0, outer), v=(0.0, outer))


def threshold_for(kind: Kind, rho: float, constants: Constants) -> float:
    return (constants.m if kind.is_upper else constants.M) * rho


def comparison_thresholds(constants: Constants, rho: float) -> dict:
    """Lower-bound requirements on [rho, rho/c] under the index and the Krasnoselskii approach.

    The index condition I0 at rho needs f > M rho there; getting index 0 from
    ||Tu|| >= ||u|| on the sphere of radius rho/c needs f >= M rho / c on the
    same interval.
    """
    c = constants.c
    index_box = box_for(Kind.I0, rho, c)
    k_box = box_for(Kind.K_LOWER, rho / c, c)
    return {
        "index": {"box": index_box, "threshold": threshold_for(Kind.I0, rho, constants)},
        "krasnoselskii": {"box": k_box, "threshold": threshold_for(Kind.K_LOWER, rho / c, constants)},
    }


# --------------------------------------------------------------------------
# branch and bound


def _search(f: Expr, box: Box, threshold: float, strict: bool, budget: int,
            params: Mapping[str, float] | None, sense: int) -> ConditionResult:
    # sense=+1 decides sup f < T (or <=); sense=-1 decides inf f > T (or >=),
    # handled as sup(-f) < -T
    if budget < 1:
        raise ValueError("budget must be at least 1")
    tol = REL_MARGIN * abs(threshold)
    T = sense * threshold

    def upper(b: Box) -> float:
        enc = evaluate_interval(f, b, params)
        return enc.hi if sense > 0 else -enc.lo

    def value(p) -> float:
        return sense * evaluate(f, p, params)

    if strict:
        def clears(U):
            return U < T - tol

        def violates(y):
            return y >= T
    else:
        def clears(U):
            return U <= T + tol

        def violates(y):
            return y > T + tol

    def finish(verdict: Verdict, g: float, count: int, witness=None) -> ConditionResult:
        return ConditionResult(
            verdict=verdict,
            margin=T - g,
            witness=witness,
            boxes_explored=count,
            bound=sense * g,
            threshold=threshold,
            box=box.to_list(),
        )

    count = 1
    U0 = upper(box)
    worst = None
    for p in box.corners() + [box.midpoint()]:
        y = value(p)
        if violates(y) and (worst is None or y > worst[1]):
            worst = (p, y)
    if worst is not None:
        return finish(Verdict.FAIL, worst[1], count, dict(worst[0]))

    heap = [(-U0, 0, box)]
    seq = 1
    stuck = None  # best bound among boxes too thin to split
    while heap:
        negU, _, b = heapq.heappop(heap)
        U = -negU
        if stuck is not None and stuck >= U:
            return finish(Verdict.UNDECIDED, stuck, count)
        if clears(U):
            if stuck is not None:
                return finish(Verdict.UNDECIDED, stuck, count)
            return finish(Verdict.PASS, U, count)
        if b is not box:
            mid = b.midpoint()
            y = value(mid)
            if violates(y):
                return finish(Verdict.FAIL, y, count, mid)
        left, right = b.bisect()
        if left == b or right == b:
            stuck = U if stuck is None else max(stuck, U)
            continue
        if count + 2 > budget:
            return finish(Verdict.UNDECIDED, U, count)
        count += 2
        for child in (left, right):
            heapq.heappush(heap, (-upper(child), seq, child))
            seq += 1
    return finish(Verdict.UNDECIDED, stuck, count)


def bound_sup(f: Expr, box: Box, threshold: float, strict: bool = True, budget: int = DEFAULT_BUDGET,
              params: Mapping[str, float] | None = None) -> ConditionResult:
    """Decide sup of f over box < threshold (<= when not strict)."""
    return _search(f, box, threshold, strict, budget, params, +1)


def bound_inf(f: Expr, box: Box, threshold: float, strict: bool = True, budget: int = DEFAULT_BUDGET,
              params: Mapping[str, float] | None = None) -> ConditionResult:
    """Decide inf of f over box > threshold (>= when not strict)."""
    return _search(f, box, threshold, strict, budget, params, -1)


def check_nonnegativity(f: Expr, box: Box, budget: int = DEFAULT_BUDGET,
                        params: Mapping[str, float] | None = None) -> ConditionResult:
    res = bound_inf(f, box, 0.0, strict=False, budget=budget, params=params)
    res.label = f"f >= 0 on {box!r}"
    return res


# --------------------------------------------------------------------------
# combining per-equation checks


def conjunction(parts: list[ConditionResult], label: str = "") -> ConditionResult:
    if any(p.verdict is Verdict.FAIL for p in parts):
        verdict = Verdict.FAIL
    elif any(p.verdict is Verdict.UNDECIDED for p in parts):
        verdict = Verdict.UNDECIDED
    else:
        verdict = Verdict.PASS
    failing = next((p for p in parts if p.verdict is Verdict.FAIL), None)
    return ConditionResult(
        verdict=verdict,
        margin=min(p.margin for p in parts),
        witness=failing.witness if failing else None,
        boxes_explored=sum(p.boxes_explored for p in parts),
        label=label,
        parts=parts,
    )


def disjunction(parts: list[ConditionResult], label: str = "") -> ConditionResult:
    if any(p.verdict is Verdict.PASS for p in parts):
        verdict = Verdict.PASS
    elif all(p.verdict is Verdict.FAIL for p in parts):
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.UNDECIDED
    failing = next((p for p in parts if p.verdict is Verdict.FAIL), None)
    return ConditionResult(
        verdict=verdict,
        margin=max(p.margin for p in parts),
        witness=failing.witness if verdict is Verdict.FAIL else None,
        boxes_explored=sum(p.boxes_explored for p in parts),
        label=label,
        parts=parts,
    )


def _single(cond: Condition, problem: Problem, i: int, budget: int) -> ConditionResult:
    eq = problem.equations[i - 1]
    c = eq.constants.c if cond.kind.krasnoselskii else problem.c
    box = box_for(cond.kind, cond.rho, c, problem.dims, i)
    threshold = threshold_for(cond.kind, cond.rho, eq.constants)
    search = bound_sup if cond.kind.is_upper else bound_inf
    res = search(eq.f, box, threshold, cond.kind.strict, budget, problem.params)
    res.label = f"{cond.label} f{i}" if problem.is_system else cond.label
    return res


def check_condition(cond: Condition, problem: Problem, budget: int = DEFAULT_BUDGET) -> ConditionResult:
    """Decide ``cond`` for ``problem``.

    For systems, I1 and I0 need every component to clear its threshold, while
    I0star needs just one (the one named by ``cond.which`` if given).
    """
    if cond.kind.krasnoselskii and problem.is_system:
        raise ValueError("Krasnoselskii conditions are defined for scalar problems")
    if cond.kind is Kind.I0STAR:
        if not problem.is_system:
            raise ValueError("I0star is defined for systems only")
        which = [cond.which] if cond.which else [1, 2]
        parts = [_single(cond, problem, i, budget) for i in which]
        return parts[0] if len(parts) == 1 else disjunction(parts, cond.label)
    parts = [_single(cond, problem, i, budget) for i in range(1, problem.dims + 1)]
    return parts[0] if len(parts) == 1 else conjunction(parts, cond.label)


def hull_box(problem: Problem, radius: float) -> Box:
    """[0, radius]^d, the region a nonnegativity check must cover."""
    side = (0.0, radius)
    return Box.of(u=side) if problem.dims == 1 else Box.of(u=side, v=side)

