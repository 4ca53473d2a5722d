"""Command line: constants, check, certify, solve and region on a JSON problem file.

Problem file::

    {
      "equations": [{"bc": "dirichlet-dirichlet", "f": "lambda*u^2", "window": [0.25, 0.75]}],
      "params": {"lambda": 256},
      "mode": "krasnoselskii",
      "ladder": {"radii": [0.03125, 1], "kinds": ["K_upper", "K_lower"]},
      "solver": {"n": 201, "tol": 1e-10, "max_iter": 10000, "relaxation": 0.5},
      "budget": 100000
    }

``ladder`` may instead be ``{"auto": [rho_min, rho_max]}``. Exit codes: 0 on
success (PASS, certificate, solution found), 2 when inconclusive or undecided,
3 when a checked condition fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .certify import CASES, Certificate, Ladder, NoCertificate, certify, match_case
from .cone import UnusableWindowError, constants_for, optimize_window
from .conditions import DEFAULT_BUDGET, Condition, ConditionResult, Kind, Verdict, check_condition
from .expr import ParseError, parse
from .kernel import KernelSpec
from .problem import Equation, Problem
from .solver import DiscreteSolution, NotFound, picard_solve, shoot_solve, verify_certificate

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_FAIL = 0, 1, 2, 3


class ProblemFileError(ValueError):
    """Invalid problem file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass
class SolverSettings:
    n: int = 201
    tol: float = 1e-10
    max_iter: int = 10_000
    relaxation: float = 0.5


@dataclass
class ProblemFile:
    problem: Problem
    mode: str = "index"
    ladder: Ladder | None = None
    auto: tuple[float, float] | None = None
    case: str | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    budget: int = DEFAULT_BUDGET


def _locate(text: str, needle: str, start: int = 0) -> tuple[int, int] | None:
    idx = text.find(needle, start)
    if idx < 0:
        return None
    line = text.count("\n", 0, idx) + 1
    return line, idx - (text.rfind("\n", 0, idx) + 1) + 1


def load_problem(text: str) -> ProblemFile:
    """Parse and validate a problem file held in ``text``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ProblemFileError("top level must be an object", 1, 1)

    def fail(message: str, key: str) -> ProblemFileError:
        pos = _locate(text, f'"{key}"')
        return ProblemFileError(message, *(pos or (None, None)))

    eqs = data.get("equations")
    if not isinstance(eqs, list) or len(eqs) not in (1, 2):
        raise fail("'equations' must list one or two entries", "equations")
    params = data.get("params", {})
    if not isinstance(params, dict) or not all(isinstance(v, (int, float)) for v in params.values()):
        raise fail("'params' must map names to numbers", "params")
    params = {k: float(v) for k, v in params.items()}

    equations = []
    cursor = text.find('"equations"')
    for i, entry in enumerate(eqs, 1):
        if not isinstance(entry, dict) or "f" not in entry or "bc" not in entry:
            raise fail(f"equation {i} needs 'bc' and 'f'", "equations")
        f_text = entry["f"]
        f_literal = json.dumps(f_text)
        pos = text.find(f_literal, cursor)
        cursor = max(cursor, pos)
        try:
            expr = parse(f_text)
        except ParseError as exc:
            if pos >= 0:
                line, col = _locate(text, f_literal, pos)
                col += 1 + exc.position
            else:
                line = col = None
            raise ProblemFileError(f"equation {i}: {exc}", line, col) from None
        try:
            kernel = KernelSpec.from_name(entry["bc"])
        except ValueError:
            raise fail(f"equation {i}: unknown bc {entry['bc']!r}", "bc") from None
        window = entry.get("window")
        try:
            consts = constants_for(kernel, *window) if window else constants_for(kernel)
        except (ValueError, TypeError) as exc:
            raise fail(f"equation {i}: bad window {window!r}: {exc}", "window") from None
        equations.append(Equation(expr, consts))
    try:
        problem = Problem(tuple(equations), params)
    except ValueError as exc:
        raise fail(str(exc), "equations") from None

    mode = data.get("mode", "index")
    if mode not in ("index", "krasnoselskii"):
        raise fail(f"mode must be 'index' or 'krasnoselskii', got {mode!r}", "mode")
    out = ProblemFile(problem, mode)

    budget = data.get("budget", DEFAULT_BUDGET)
    if not isinstance(budget, int) or budget < 1:
        raise fail("'budget' must be a positive integer", "budget")
    out.budget = budget

    solver = data.get("solver", {})
    try:
        out.solver = SolverSettings(**solver)
    except TypeError as exc:
        raise fail(f"bad solver settings: {exc}", "solver") from None

    ladder = data.get("ladder")
    if ladder is not None:
        out.ladder, out.auto, out.case = _read_ladder(ladder, problem, fail)
    return out


def _read_ladder(ladder, problem: Problem, fail):
    if not isinstance(ladder, dict):
        raise fail("'ladder' must be an object", "ladder")
    case = ladder.get("case")
    if case is not None and case not in CASES:
        raise fail(f"unknown case {case!r}", "case")
    if "auto" in ladder:
        rng = ladder["auto"]
        if not (isinstance(rng, list) and len(rng) == 2 and 0 < rng[0] < rng[1]):
            raise fail("'auto' must be [rho_min, rho_max] with 0 < rho_min < rho_max", "auto")
        return None, (float(rng[0]), float(rng[1])), case
    radii, kinds = ladder.get("radii"), ladder.get("kinds")
    if not isinstance(radii, list) or not isinstance(kinds, list) or len(radii) != len(kinds):
        raise fail("explicit ladders need 'radii' and 'kinds' of equal length", "ladder")
    if any(not isinstance(r, (int, float)) or r <= 0 for r in radii):
        raise fail("radii must be positive", "radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise fail("radii must be increasing", "radii")
    try:
        entries = []
        for r, k in zip(radii, kinds):
            kind, which = Condition.parse_kind(k)
            entries.append(Condition(kind, float(r), which))
    except ValueError as exc:
        raise fail(str(exc), "kinds") from None
    if case is None and entries:
        try:
            case = match_case([e.kind for e in entries], problem.is_system)
        except ValueError:
            case = None  # still usable by region
    return Ladder(case or "", tuple(entries)), None, case


def read_problem_file(path: str) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    return load_problem(text)


# --------------------------------------------------------------------------
# rendering helpers


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(text_lines))


def _result_lines(res: ConditionResult, indent: str = "") -> list[str]:
    lines = [f"{indent}{res.label}: {res.verdict.value} (margin {res.margin:.6g}, boxes {res.boxes_explored})"]
    if res.bound is not None:
        lines.append(f"{indent}  bound {res.bound:.17g} vs threshold {res.threshold:.17g}")
    if res.witness:
        point = ", ".join(f"{k}={v:.17g}" for k, v in res.witness.items())
        lines.append(f"{indent}  witness {point}")
    for part in res.parts:
        lines.extend(_result_lines(part, indent + "  "))
    return lines


def certificate_lines(cert: Certificate) -> list[str]:
    kind = "system" if cert.system else "scalar"
    lines = [
        f"certificate: case {cert.case} ({kind}), at least {cert.solutions} positive solution(s)",
        "ladder: " + ", ".join(f"{e.name} at {e.rho:.17g}" for e in cert.ladder.entries),
        f"c = {cert.c:.17g}",
    ]
    norm = "max-norm" if cert.system else "sup-norm"
    for lo, hi in cert.windows:
        lines.append(f"  {lo:.17g} <= {norm} <= {hi:.17g}")
    return lines


# --------------------------------------------------------------------------
# commands


def cmd_constants(args) -> int:
    pf = read_problem_file(args.problem)
    rows = []
    for i, eq in enumerate(pf.problem.equations, 1):
        consts = optimize_window(eq.kernel) if args.optimize else eq.constants
        rows.append({"equation": i, **consts.to_dict()})
    overall = min(r["c"] for r in rows)
    lines = [
        f"f{r['equation']} [{r['kernel']}]: m = {r['m']:.17g}, window ({r['a']:.17g}, {r['b']:.17g}), "
        f"c = {r['c']:.17g}, M = {r['M']:.17g}"
        for r in rows
    ]
    lines.append(f"overall c = {overall:.17g}")
    _emit(args, {"equations": rows, "c": overall}, lines)
    return EXIT_OK


def cmd_check(args) -> int:
    pf = read_problem_file(args.problem)
    if args.rho is None or args.condition is None:
        raise ProblemFileError("check needs --condition and --rho")
    kind, which = Condition.parse_kind(args.condition)
    budget = args.budget or pf.budget
    res = check_condition(Condition(kind, args.rho, which), pf.problem, budget)
    _emit(args, res.to_dict(), _result_lines(res))
    return {Verdict.PASS: EXIT_OK, Verdict.FAIL: EXIT_FAIL, Verdict.UNDECIDED: EXIT_INCONCLUSIVE}[res.verdict]


def _run_certify(pf: ProblemFile, budget: int):
    if pf.ladder is not None:
        if not pf.ladder.case:
            raise ProblemFileError("ladder kinds match no case")
        return certify(pf.problem, ladder=pf.ladder, budget=budget)
    if pf.auto is None:
        raise ProblemFileError('no ladder given; add "ladder": {"auto": [rho_min, rho_max]} or explicit radii')
    return certify(pf.problem, rho_range=pf.auto, mode=pf.mode, budget=budget)


def cmd_certify(args) -> int:
    pf = read_problem_file(args.problem)
    outcome = _run_certify(pf, args.budget or pf.budget)
    payload = {
        "status": outcome.status,
        "reason": outcome.reason,
        "certificate": outcome.certificate.to_dict() if outcome.certificate else None,
        "attempts": outcome.attempts,
    }
    if outcome.certificate:
        lines = certificate_lines(outcome.certificate)
    else:
        lines = [f"inconclusive: {outcome.reason}"]
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    _emit(args, payload, lines)
    return outcome.exit_code


def cmd_solve(args) -> int:
    pf = read_problem_file(args.problem)
    s = pf.solver
    outcome = None
    if pf.ladder is not None or pf.auto is not None:
        outcome = _run_certify(pf, args.budget or pf.budget)
    cert = outcome.certificate if outcome else None
    if cert is not None:
        check = verify_certificate(cert, pf.problem, n=s.n, tol=s.tol, max_iter=s.max_iter, relaxation=s.relaxation)
        solutions, report = check.solutions, check.to_dict()
    else:
        solutions = _plain_solve(pf)
        report = {"status": "no certificate", "windows": [], "solutions": [x.summary() for x in solutions]}
    chosen = _pick(solutions, cert)
    if chosen is not None and args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            chosen.to_csv(fh)
    lines = []
    if cert is not None:
        lines.extend(certificate_lines(cert))
        lines.append(f"cross-check: {report['status']}")
    elif outcome is not None:
        lines.append(f"no certificate: {outcome.reason}")
    for sol in solutions:
        norms = ", ".join(f"{x:.10g}" for x in sol.norms)
        lines.append(f"solution ({sol.method}): norm {sol.norm:.10g} [{norms}], residual {sol.residual:.3g}")
    if not solutions:
        lines.append("no nontrivial numerical solution found")
    _emit(args, report, lines)
    return EXIT_OK if chosen is not None else EXIT_INCONCLUSIVE


def _plain_solve(pf: ProblemFile) -> list[DiscreteSolution]:
    s = pf.solver
    found = []
    res = picard_solve(pf.problem, 1.0, n=s.n, tol=s.tol, max_iter=s.max_iter, relaxation=s.relaxation)
    if isinstance(res, DiscreteSolution):
        found.append(res)
    if not pf.problem.is_system:
        shot = shoot_solve(pf.problem, (0.0, 100.0), n=s.n, all_roots=True)
        if not isinstance(shot, NotFound):
            found.extend(x for x in shot if all(abs(x.norm - y.norm) > 1e-6 for y in found))
    return found


def _pick(solutions, cert) -> DiscreteSolution | None:
    if not solutions:
        return None
    if cert is not None:
        for sol in solutions:
            if any(lo - 1e-9 <= sol.norm <= hi + 1e-9 for lo, hi in cert.windows):
                return sol
    return solutions[0]


@dataclass(frozen=True)
class Band:
    band_id: int
    kind: str
    u_lo: float
    u_hi: float
    lower: float  # forbidden values of f lie in [lower, upper]
    upper: float


def region_bands(problem: Problem, entries) -> list[Band]:
    """Forbidden bands in the (u, f) plane implied by each condition of a scalar ladder."""
    if problem.is_system:
        raise ValueError("region plots are defined for scalar problems")
    consts = problem.equations[0].constants
    m, M, c = consts.m, consts.M, consts.c
    bands = []
    for i, e in enumerate(entries, 1):
        r = e.rho
        if e.kind in (Kind.I1, Kind.K_UPPER):
            bands.append(Band(i, e.kind.value, 0.0, r, m * r, math.inf))
        elif e.kind is Kind.I0:
            bands.append(Band(i, e.kind.value, r, r / c, 0.0, M * r))
        elif e.kind is Kind.K_LOWER:
            bands.append(Band(i, e.kind.value, c * r, r, 0.0, M * r))
        else:
            raise ValueError(f"{e.kind.value} has no scalar region")
    return bands


def region_csv(bands: list[Band], points: int = 201) -> str:
    if points < 2:
        raise ValueError("need at least 2 u samples")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["u", "band_id", "lower", "upper", "kind"])
    if bands:
        top = max(b.u_hi for b in bands)
        # uniform samples plus every band end, so each band shows its full extent
        us = {top * j / (points - 1) for j in range(points)}
        us.update(x for b in bands for x in (b.u_lo, b.u_hi))
        for u in sorted(us):
            for b in bands:
                if b.u_lo <= u <= b.u_hi:
                    writer.writerow([f"{u:.17g}", b.band_id, f"{b.lower:.17g}", f"{b.upper:.17g}", b.kind])
    return buf.getvalue()


def cmd_region(args) -> int:
    pf = read_problem_file(args.problem)
    if args.condition and args.rho is not None:
        kind, which = Condition.parse_kind(args.condition)
        entries = [Condition(kind, args.rho, which)]
    elif pf.ladder is not None:
        entries = list(pf.ladder.entries)
    elif pf.auto is not None:
        outcome = _run_certify(pf, args.budget or pf.budget)
        entries = list(outcome.certificate.ladder.entries) if outcome.certificate else []
    else:
        entries = []
    text = region_csv(region_bands(pf.problem, entries), args.points)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conecert", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", required=True, help="JSON problem file")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--budget", type=int, default=None, help="boxes per condition")
        return p

    p = common(sub.add_parser("constants", help="cone constants per equation"))
    p.add_argument("--optimize", action="store_true", help="search for the window with the smallest M")
    p.set_defaults(func=cmd_constants)

    p = common(sub.add_parser("check", help="decide one condition at one radius"))
    p.add_argument("--condition", required=True, help="I1, I0, I0star[:i], K_upper or K_lower")
    p.add_argument("--rho", type=float, required=True)
    p.set_defaults(func=cmd_check)

    p = common(sub.add_parser("certify", help="existence and multiplicity certificate"))
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_certify)

    p = common(sub.add_parser("solve", help="numerical solutions and certificate cross-check"))
    p.add_argument("--out", help="write the solution CSV here")
    p.set_defaults(func=cmd_solve)

    p = common(sub.add_parser("region", help="forbidden-region bands as CSV"))
    p.add_argument("--condition", help="single condition instead of the file's ladder")
    p.add_argument("--rho", type=float)
    p.add_argument("--points", type=int, default=201, help="u samples")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_region)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFileError, NoCertificate, UnusableWindowError, ValueError, ArithmeticError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
