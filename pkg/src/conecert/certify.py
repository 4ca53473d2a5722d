"""Existence and multiplicity certificates from ladders of radii.

A ladder is an increasing list of radii, each carrying a condition. Index-mode
cases S1..S6 alternate I0 (index 0 on V_rho) and I1 (index 1 on K_rho); each
adjacent pair encloses one solution. Krasnoselskii-mode cases H1, H2 pair
K_upper with K_lower and give one solution between the two radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conditions import (
    DEFAULT_BUDGET,
    Condition,
    ConditionResult,
    Kind,
    Verdict,
    check_condition,
    check_nonnegativity,
    conjunction,
    hull_box,
)
from .cone import Constants
from .problem import Problem

I0, I1, KU, KL = Kind.I0, Kind.I1, Kind.K_UPPER, Kind.K_LOWER


@dataclass(frozen=True)
class Case:
    name: str
    kinds: tuple[Kind, ...]
    # gaps[i] True: rho_i / c < rho_{i+1}; False: rho_i < rho_{i+1}
    gaps: tuple[bool, ...]
    solutions: int

    @property
    def mode(self) -> str:
        return "krasnoselskii" if self.kinds[0].krasnoselskii else "index"


CASES: dict[str, Case] = {
    c.name: c
    for c in (
        Case("S1", (I0, I1), (True,), 1),
        Case("S2", (I1, I0), (False,), 1),
        Case("S3", (I0, I1, I0), (True, False), 2),
        Case("S4", (I1, I0, I1), (False, True), 2),
        Case("S5", (I0, I1, I0, I1), (True, False, True), 3),
        Case("S6", (I1, I0, I1, I0), (False, True, False), 3),
        # rho_1 < rho_2 / 4 in the Dirichlet setting, where c = 1/4
        Case("H1", (KU, KL), (True,), 1),
        Case("H2", (KL, KU), (False,), 1),
    )
}
INDEX_CASES = ("S1", "S2", "S3", "S4", "S5", "S6")
K_CASES = ("H1", "H2")


class NoCertificate(Exception):
    """A ladder did not yield a certificate; ``blocking`` names the offending condition."""

    def __init__(self, reason: str, blocking: ConditionResult | None = None):
        super().__init__(reason)
        self.reason = reason
        self.blocking = blocking


class Inconclusive(NoCertificate):
    """A required condition came out UNDECIDED."""


@dataclass(frozen=True)
class Ladder:
    case: str
    entries: tuple[Condition, ...]

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(e.rho for e in self.entries)

    def gap_violations(self, c: float) -> list[str]:
        """Gap and ordering constraints of the case that the radii break (empty when valid)."""
        pattern = CASES[self.case]
        out = []
        if len(self.entries) != len(pattern.kinds):
            return [f"{self.case} needs {len(pattern.kinds)} radii, got {len(self.entries)}"]
        for i, gap in enumerate(pattern.gaps):
            lo, hi = self.entries[i].rho, self.entries[i + 1].rho
            if gap and not lo / c < hi:
                out.append(f"rho{i + 1}/c = {lo / c:.17g} must be < rho{i + 2} = {hi:.17g}")
            if not gap and not lo < hi:
                out.append(f"rho{i + 1} = {lo:.17g} must be < rho{i + 2} = {hi:.17g}")
        return out

    def to_dict(self) -> dict:
        return {"case": self.case, "radii": list(self.radii), "kinds": [e.name for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> Ladder:
        entries = []
        for rho, name in zip(d["radii"], d["kinds"]):
            kind, which = Condition.parse_kind(name)
            entries.append(Condition(kind, float(rho), which))
        return cls(d["case"], tuple(entries))


def match_case(kinds: Sequence[Kind], system: bool) -> str:
    """Name of the case whose condition pattern is ``kinds`` (I0star counts as I0 in first place)."""
    normalized = list(kinds)
    if normalized and normalized[0] is Kind.I0STAR:
        if not system:
            raise ValueError("I0star applies to systems only")
        normalized[0] = I0
    if Kind.I0STAR in normalized:
        raise ValueError("I0star is allowed only at the smallest radius")
    for name, pattern in CASES.items():
        if tuple(normalized) == pattern.kinds:
            if pattern.mode == "krasnoselskii" and system:
                raise ValueError("Krasnoselskii cases apply to scalar problems only")
            return name
    raise ValueError(f"condition pattern {[k.value for k in kinds]} matches no case")


@dataclass
class Certificate:
    case: str
    system: bool
    ladder: Ladder
    solutions: int
    windows: list[tuple[float, float]]
    c: float
    constants: list[Constants]
    transcripts: list[ConditionResult]
    nonnegativity: ConditionResult | None = None

    @property
    def coverage(self) -> float:
        return sum(hi - lo for lo, hi in self.windows)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "system": self.system,
            "solutions": self.solutions,
            "ladder": self.ladder.to_dict(),
            "windows": [list(w) for w in self.windows],
            "c": self.c,
            "constants": [k.to_dict() for k in self.constants],
            "transcripts": [t.to_dict() for t in self.transcripts],
            "nonnegativity": self.nonnegativity.to_dict() if self.nonnegativity else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Certificate:
        return cls(
            case=d["case"],
            system=d["system"],
            ladder=Ladder.from_dict(d["ladder"]),
            solutions=d["solutions"],
            windows=[tuple(w) for w in d["windows"]],
            c=d["c"],
            constants=[Constants.from_dict(k) for k in d["constants"]],
            transcripts=[ConditionResult.from_dict(t) for t in d["transcripts"]],
            nonnegativity=ConditionResult.from_dict(d["nonnegativity"]) if d.get("nonnegativity") else None,
        )


def norm_windows(ladder: Ladder, c: float) -> list[tuple[float, float]]:
    """Sup-norm (max-norm for systems) windows, one per guaranteed solution, ordered by lower end.

    I0 at r below I1 at R gives [r, min(R, r/c)]; I1 at r below I0 at R gives
    [r, R/c], because V_R lies inside K_{R/c}. Krasnoselskii ladders give [r, R].
    """
    entries = ladder.entries
    if CASES[ladder.case].mode == "krasnoselskii":
        return [(entries[0].rho, entries[1].rho)]
    out = []
    for lower, upper in zip(entries, entries[1:]):
        if lower.kind is Kind.I1:
            out.append((lower.rho, upper.rho / c))
        else:
            out.append((lower.rho, min(upper.rho, lower.rho / c)))
    return sorted(out)


def assemble(ladder: Ladder, results: Sequence[ConditionResult], problem: Problem,
             nonnegativity: ConditionResult | None = None) -> Certificate:
    """Turn a ladder whose conditions all PASS into a certificate.

    Raises :class:`NoCertificate` on a FAIL or broken gap constraint and
    :class:`Inconclusive` when a required check is UNDECIDED.
    """
    pattern = CASES[ladder.case]
    if pattern.mode == "krasnoselskii" and problem.is_system:
        raise NoCertificate("Krasnoselskii cases apply to scalar problems only")
    kinds = [e.kind for e in ladder.entries]
    if match_case(kinds, problem.is_system) != ladder.case:
        raise NoCertificate(f"conditions {[e.name for e in ladder.entries]} do not fit case {ladder.case}")
    c = problem.c
    broken = ladder.gap_violations(c)
    if broken:
        raise NoCertificate(f"{ladder.case}: " + "; ".join(broken))
    if len(results) != len(ladder.entries):
        raise ValueError("one condition result per ladder entry is required")
    checks = list(results) + ([nonnegativity] if nonnegativity is not None else [])
    for res in checks:
        if res.verdict is Verdict.FAIL:
            raise NoCertificate(f"{res.label or 'condition'} fails", res)
    for res in checks:
        if res.verdict is Verdict.UNDECIDED:
            raise Inconclusive(f"{res.label or 'condition'} is undecided within the budget", res)
    windows = norm_windows(ladder, c)
    return Certificate(
        case=ladder.case,
        system=problem.is_system,
        ladder=ladder,
        solutions=pattern.solutions,
        windows=windows,
        c=c,
        constants=[eq.constants for eq in problem.equations],
        transcripts=list(results),
        nonnegativity=nonnegativity,
    )


# --------------------------------------------------------------------------
# automatic ladders


def log_grid(rho_min: float, rho_max: float, per_decade: int = 64) -> list[float]:
    """Points 10^(k/per_decade) inside [rho_min, rho_max]; anchored at 1 so sub-ranges share nodes."""
    if not 0.0 < rho_min < rho_max:
        raise ValueError("need 0 < rho_min < rho_max")
    k0 = math.ceil(math.log10(rho_min) * per_decade - 1e-9)
    k1 = math.floor(math.log10(rho_max) * per_decade + 1e-9)
    pts = [10.0 ** (k / per_decade) for k in range(k0, k1 + 1)]
    return [p for p in pts if rho_min <= p <= rho_max]


@dataclass
class Scan:
    """Condition verdicts at each radius of a grid, reused across cases."""

    problem: Problem
    radii: list[float]
    budget: int = DEFAULT_BUDGET
    results: dict[tuple[str, float], ConditionResult] = field(default_factory=dict)

    def result(self, cond: Condition) -> ConditionResult:
        key = (cond.name, cond.rho)
        if key not in self.results:
            self.results[key] = check_condition(cond, self.problem, self.budget)
        return self.results[key]

    def passes(self, cond: Condition) -> bool:
        return self.result(cond).passed


def _slot_options(pattern: Case, slot: int, system: bool) -> list[tuple[Kind, int | None]]:
    kind = pattern.kinds[slot]
    if kind is I0 and slot == 0 and system:
        return [(I0, None), (Kind.I0STAR, 1), (Kind.I0STAR, 2)]
    return [(kind, None)]


def _tightest(pattern: Case, scan: Scan, c: float) -> Ladder | None:
    """Ladder for ``pattern`` on the scan grid minimizing rho_last / rho_first.

    Dynamic programme over slots: best[j] is the largest feasible first radius
    of a partial ladder whose current slot sits at grid index j.
    """
    radii = scan.radii
    system = scan.problem.is_system
    n = len(radii)

    def condition_at(slot: int, j: int) -> Condition | None:
        for kind, which in _slot_options(pattern, slot, system):
            cond = Condition(kind, radii[j], which)
            if scan.passes(cond):
                return cond
        return None

    best: list[tuple[float, tuple[Condition, ...]] | None] = []
    for j in range(n):
        cond = condition_at(0, j)
        best.append((radii[j], (cond,)) if cond else None)
    for slot in range(1, len(pattern.kinds)):
        gap = pattern.gaps[slot - 1]
        new: list[tuple[float, tuple[Condition, ...]] | None] = [None] * n
        running = None  # best partial ladder among indices usable so far
        i = 0
        for j in range(n):
            while i < j and (radii[i] / c < radii[j] if gap else radii[i] < radii[j]):
                if best[i] is not None and (running is None or best[i][0] > running[0]):
                    running = best[i]
                i += 1
            if running is None:
                continue
            cond = condition_at(slot, j)
            if cond is not None:
                new[j] = (running[0], running[1] + (cond,))
        best = new
    done = [(radii[j] / b[0], radii[j], b[1]) for j, b in enumerate(best) if b is not None]
    if not done:
        return None
    _, _, entries = min(done, key=lambda x: (x[0], x[1]))
    return Ladder(pattern.name, entries)


def auto_ladder(problem: Problem, rho_range: tuple[float, float], cases: Iterable[str] | None = None,
                budget: int = DEFAULT_BUDGET, per_decade: int = 64, scan: Scan | None = None) -> list[Ladder]:
    """One tightest ladder per requested case that the grid supports, in case order."""
    cases = list(cases) if cases is not None else list(INDEX_CASES)
    if scan is None:
        scan = Scan(problem, log_grid(*rho_range, per_decade=per_decade), budget)
    c = problem.c
    out = []
    for name in cases:
        pattern = CASES[name]
        if pattern.mode == "krasnoselskii" and problem.is_system:
            continue
        ladder = _tightest(pattern, scan, c)
        if ladder is not None:
            out.append(ladder)
    return out


def best_certificate(candidates: Iterable[Certificate]) -> Certificate | None:
    """Most solutions first; ties go to the widest total norm coverage."""
    ranked = sorted(candidates, key=lambda cert: (-cert.solutions, -cert.coverage))
    return ranked[0] if ranked else None


# --------------------------------------------------------------------------
# end to end


def nonnegativity_for(ladder: Ladder, problem: Problem, budget: int = DEFAULT_BUDGET) -> ConditionResult:
    """Check f_i >= 0 on [0, R]^d, R the largest radius any condition of the ladder touches."""
    c = problem.c
    top = max(e.rho for e in ladder.entries)
    radius = top if CASES[ladder.case].mode == "krasnoselskii" else top / c
    parts = [check_nonnegativity(eq.f, hull_box(problem, radius), budget, problem.params) for eq in problem.equations]
    if len(parts) == 1:
        return parts[0]
    return conjunction(parts, f"f_i >= 0 on [0, {radius:.17g}]^2")


@dataclass
class Outcome:
    status: str  # "certified" | "inconclusive"
    certificate: Certificate | None = None
    reason: str = ""
    attempts: list[dict] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "certified" else 2


def certify_ladder(ladder: Ladder, problem: Problem, budget: int = DEFAULT_BUDGET,
                   scan: Scan | None = None) -> Certificate:
    results = [scan.result(e) if scan else check_condition(e, problem, budget) for e in ladder.entries]
    nonneg = nonnegativity_for(ladder, problem, budget)
    return assemble(ladder, results, problem, nonneg)


def certify(problem: Problem, ladder: Ladder | None = None, rho_range: tuple[float, float] | None = None,
            mode: str = "index", budget: int = DEFAULT_BUDGET, per_decade: int = 64) -> Outcome:
    """Certify with an explicit ladder, or search ``rho_range`` for the best one."""
    if ladder is not None:
        try:
            cert = certify_ladder(ladder, problem, budget)
        except NoCertificate as exc:
            return Outcome("inconclusive", reason=exc.reason, attempts=[_attempt(ladder, exc)])
        return Outcome("certified", cert, attempts=[_attempt(ladder, None)])
    if mode not in ("index", "krasnoselskii"):
        raise ValueError(f"mode must be 'index' or 'krasnoselskii', got {mode!r}")
    if rho_range is None:
        raise ValueError("need either a ladder or a search range")
    scan = Scan(problem, log_grid(*rho_range, per_decade=per_decade), budget)
    cases = K_CASES if mode == "krasnoselskii" else INDEX_CASES
    certs, attempts = [], []
    for cand in auto_ladder(problem, rho_range, cases, budget, per_decade, scan):
        try:
            certs.append(certify_ladder(cand, problem, budget, scan))
            attempts.append(_attempt(cand, None))
        except NoCertificate as exc:
            attempts.append(_attempt(cand, exc))
    best = best_certificate(certs)
    if best is None:
        reason = "no ladder found in the search range" if not attempts else "; ".join(
            a["reason"] for a in attempts if a["reason"]
        )
        return Outcome("inconclusive", reason=reason, attempts=attempts)
    return Outcome("certified", best, attempts=attempts)


def _attempt(ladder: Ladder, exc: NoCertificate | None) -> dict:
    return {"ladder": ladder.to_dict(), "certified": exc is None, "reason": exc.reason if exc else ""}


def revalidate(cert: Certificate, problem: Problem, budget: int = DEFAULT_BUDGET) -> bool:
    """Re-run every condition the certificate relies on; True when all still PASS and gaps hold."""
    if cert.ladder.gap_violations(problem.c):
        return False
    return all(check_condition(e, problem, budget).passed for e in cert.ladder.entries)
