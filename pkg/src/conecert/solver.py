"""Numerical companions to a certificate: Picard iteration on the discretized
Hammerstein operator, a shooting oracle for scalar problems, and cone checks.

Nothing here proves anything. Solutions found numerically either confirm a
certified norm window or leave it unconfirmed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, TextIO, Union

import numpy as np
from scipy.optimize import brentq

from .cone import ConeWindow, Constants
from .expr import Expr, compile_expr, parse
from .kernel import DIRICHLET, KernelSpec, green_matrix
from .problem import Problem

MIN_NODES = 33


@dataclass
class DiscreteSolution:
    t: np.ndarray
    values: tuple[np.ndarray, ...]  # one array per component
    residual: float  # max-norm of u - Tu over all components
    iterations: int
    method: str = "picard"
    slope: float | None = None  # u'(0), shooting only

    @property
    def norms(self) -> tuple[float, ...]:
        return tuple(float(np.max(np.abs(v))) for v in self.values)

    @property
    def norm(self) -> float:
        """Sup-norm for a scalar problem, max of the component sup-norms for a system."""
        return max(self.norms)

    @property
    def n(self) -> int:
        return len(self.t)

    def to_csv(self, out: TextIO | None = None) -> str:
        """Write columns t, u[, v] with 17 significant digits; returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "u", "v"][: 1 + len(self.values)])
        for row in zip(self.t, *self.values):
            writer.writerow([f"{x:.17g}" for x in row])
        text = buf.getvalue()
        if out is not None:
            out.write(text)
        return text

    def summary(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "norms": list(self.norms),
            "norm": self.norm,
            "residual": self.residual,
            "iterations": self.iterations,
            "slope": self.slope,
        }


@dataclass
class NonConvergence:
    """Picard stopped without meeting the tolerance; carries the last iterate."""

    last: DiscreteSolution
    reason: str

    @property
    def residual(self) -> float:
        return self.last.residual


@dataclass
class NotFound:
    """Shooting found no admissible sign change in the slope bracket."""

    reason: str


Nonlinearity = Union[Expr, str]


@lru_cache(maxsize=16)
def _green(k: KernelSpec, n: int) -> np.ndarray:
    return green_matrix(k, n)


def _vector_fn(f: Nonlinearity, params):
    expr = parse(f) if isinstance(f, str) else f
    return compile_expr(expr, params, vectorized=True)


def apply_T(f: Nonlinearity, k: KernelSpec, u: np.ndarray, params=None, v: np.ndarray | None = None) -> np.ndarray:
    """Quadrature of the Hammerstein operator at the grid nodes of ``u``.

    The nonlinearity is evaluated at max(u, 0), its natural extension to
    negative arguments. For a system component pass the partner values as ``v``.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    if not np.all(np.isfinite(u)):
        raise ValueError("values must be finite")
    fn = _vector_fn(f, params or {})
    if v is None:
        fu = fn(np.maximum(u, 0.0))
    else:
        fu = fn(np.maximum(u, 0.0), np.maximum(np.asarray(v, dtype=float), 0.0))
    fu = np.broadcast_to(np.asarray(fu, dtype=float), u.shape)
    return _green(k, n) @ fu


def _operator(problem: Problem, n: int):
    fns = [compile_expr(eq.f, problem.params, vectorized=True) for eq in problem.equations]
    mats = [_green(eq.kernel, n) for eq in problem.equations]

    def T(values: Sequence[np.ndarray]) -> list[np.ndarray]:
        pos = [np.maximum(x, 0.0) for x in values]
        out = []
        for fn, mat in zip(fns, mats):
            fu = np.broadcast_to(np.asarray(fn(*pos), dtype=float), pos[0].shape)
            out.append(mat @ fu)
        return out

    return T


def _initial(problem: Problem, u0, n: int) -> list[np.ndarray]:
    if isinstance(u0, (int, float)):
        u0 = [u0] * problem.dims
    elif isinstance(u0, np.ndarray) and u0.ndim == 1:
        u0 = [u0]
    guesses = list(u0)
    if len(guesses) != problem.dims:
        raise ValueError(f"need {problem.dims} initial guesses, got {len(guesses)}")
    out = []
    for g in guesses:
        arr = np.full(n, float(g)) if np.ndim(g) == 0 else np.asarray(g, dtype=float).copy()
        if arr.shape != (n,):
            raise ValueError(f"initial guess has shape {arr.shape}, expected ({n},)")
        out.append(arr)
    return out


def residual_of(problem: Problem, values: Sequence[np.ndarray]) -> float:
    """max over components of the sup-norm of u - Tu, recomputed from scratch."""
    T = _operator(problem, len(values[0]))
    return max(float(np.max(np.abs(x - tx))) for x, tx in zip(values, T(values)))


def picard_solve(problem: Problem, u0=1.0, n: int = 201, tol: float = 1e-10, max_iter: int = 10_000,
                 relaxation: float = 0.5, blowup: float = 1e12) -> DiscreteSolution | NonConvergence:
    """Damped fixed-point iteration u <- (1 - w) u + w T(u), all components jointly.

    ``u0`` is a constant, an array, or one of those per component. The
    iteration count is the number of updates made before the residual check
    succeeded.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if not 0.0 < relaxation <= 1.0:
        raise ValueError("relaxation must lie in (0, 1]")
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    t = np.linspace(0.0, 1.0, n)
    T = _operator(problem, n)
    values = _initial(problem, u0, n)
    res = math.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(max_iter + 1):
            images = T(values)
            res = max(float(np.max(np.abs(x - tx))) for x, tx in zip(values, images))
            if not math.isfinite(res) or max(float(np.max(np.abs(x))) for x in images) > blowup:
                sol = DiscreteSolution(t, tuple(values), res, it)
                return NonConvergence(sol, f"iterates blew up after {it} updates")
            if res < tol:
                return DiscreteSolution(t, tuple(values), res, it)
            if it == max_iter:
                break
            values = [(1.0 - relaxation) * x + relaxation * tx for x, tx in zip(values, images)]
    return NonConvergence(DiscreteSolution(t, tuple(values), res, max_iter), f"residual {res:.3g} after {max_iter} updates")


# --------------------------------------------------------------------------
# shooting


def _integrate(fn, slope: float, step: float, record: bool = False):
    """RK4 for u'' = -f(max(u, 0)), u(0) = 0, u'(0) = slope, up to t = 1."""
    steps = max(1, round(1.0 / step))
    h = 1.0 / steps
    u, p = 0.0, slope
    trace = [0.0] if record else None
    lowest = 0.0
    for _ in range(steps):
        k1u, k1p = p, -fn(max(u, 0.0))
        k2u, k2p = p + 0.5 * h * k1p, -fn(max(u + 0.5 * h * k1u, 0.0))
        k3u, k3p = p + 0.5 * h * k2p, -fn(max(u + 0.5 * h * k2u, 0.0))
        k4u, k4p = p + h * k3p, -fn(max(u + h * k3u, 0.0))
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        lowest = min(lowest, u)
        if record:
            trace.append(u)
    return u, p, lowest, trace


def _scan_points(lo: float, hi: float, count: int) -> list[float]:
    if lo > 0.0:
        return np.geomspace(lo, hi, count).tolist()
    # a zero slope is the trivial solution; start the geometric scan just above it
    return np.geomspace(hi * 1e-6, hi, count).tolist()


def shoot_solve(problem: Problem, slope_range: tuple[float, float] = (0.0, 100.0), tol: float = 1e-13,
                step: float = 1e-4, n: int = 201, scan: int = 64, neg_tol: float = 1e-9,
                all_roots: bool = False):
    """Shooting on u'(0) for a scalar problem.

    The right-end mismatch is u(1) for Dirichlet data and u'(1) for the
    mixed kernel. The bracket is scanned geometrically; every sign change is
    refined with Brent's method, and the first root whose trajectory stays
    nonnegative (to ``neg_tol``) is returned, or all of them with ``all_roots``.
    """
    if problem.is_system:
        raise ValueError("shooting handles scalar problems only")
    lo, hi = slope_range
    if not 0.0 <= lo < hi:
        raise ValueError("slope range needs 0 <= lo < hi")
    eq = problem.equations[0]
    fn = compile_expr(eq.f, problem.params)
    dirichlet = eq.kernel is DIRICHLET

    def mismatch(s: float) -> float:
        u1, p1, _, _ = _integrate(fn, s, step)
        return u1 if dirichlet else p1

    slopes = _scan_points(lo, hi, scan)
    values = [mismatch(s) for s in slopes]
    roots = []
    for (s0, g0), (s1, g1) in zip(zip(slopes, values), zip(slopes[1:], values[1:])):
        if g0 == 0.0:
            roots.append(s0)
        elif g0 * g1 < 0.0:
            roots.append(brentq(mismatch, s0, s1, xtol=tol * max(1.0, s1), rtol=4 * np.finfo(float).eps))
    if values and values[-1] == 0.0:
        roots.append(slopes[-1])
    found = []
    for s in roots:
        _, _, lowest, trace = _integrate(fn, s, step, record=True)
        if lowest < -neg_tol:
            continue
        fine = np.linspace(0.0, 1.0, len(trace))
        t = np.linspace(0.0, 1.0, n)
        u = np.interp(t, fine, np.asarray(trace))
        res = residual_of(problem, [u]) if n >= MIN_NODES else math.nan
        found.append(DiscreteSolution(t, (u,), res, 0, method="shooting", slope=s))
        if not all_roots:
            break
    if not found:
        return NotFound(f"no admissible sign change of the right-end mismatch for slopes in [{lo}, {hi}]")
    return found if all_roots else found[0]


# --------------------------------------------------------------------------
# diagnostics


@dataclass
class ConeReport:
    passed: bool
    components: list[dict]


def cone_check(sol: DiscreteSolution, windows: Sequence[ConeWindow | Constants] | ConeWindow | Constants,
               tol: float = 1e-9) -> ConeReport:
    """Check min over grid nodes in [a, b] of each component against c times its sup-norm."""
    if isinstance(windows, (ConeWindow, Constants)):
        windows = [windows]
    if len(windows) != len(sol.values):
        raise ValueError("one window per component is required")
    parts = []
    for values, w in zip(sol.values, windows):
        w = w.window if isinstance(w, Constants) else w
        inside = (sol.t >= w.a - 1e-12) & (sol.t <= w.b + 1e-12)
        if not np.any(inside):
            raise ValueError(f"grid has no node in [{w.a}, {w.b}]")
        low = float(np.min(values[inside]))
        need = w.c * float(np.max(np.abs(values)))
        parts.append({"a": w.a, "b": w.b, "c": w.c, "min_on_window": low, "required": need,
                      "passed": low >= need - tol})
    return ConeReport(all(p["passed"] for p in parts), parts)


def _bump(k: KernelSpec, t: np.ndarray) -> np.ndarray:
    # unit-height profiles matching each kernel's boundary behaviour
    return np.sin(np.pi * t) if k is DIRICHLET else np.sin(0.5 * np.pi * t)


@dataclass
class CrossCheck:
    status: str  # "confirmed" | "unconfirmed"
    windows: list[dict]
    solutions: list[DiscreteSolution] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": self.status, "windows": self.windows, "solutions": [s.summary() for s in self.solutions]}


def find_solutions(problem: Problem, radii: Sequence[float], c: float, n: int = 201, tol: float = 1e-10,
                   max_iter: int = 10_000, relaxation: float = 0.5, slope_max: float | None = None) -> list[DiscreteSolution]:
    """Multistart search: Picard from bump profiles of height rho*c, rho and rho/c for each
    radius, plus shooting for scalar problems. Returns the distinct nontrivial solutions."""
    t = np.linspace(0.0, 1.0, n)
    out: list[DiscreteSolution] = []

    def keep(sol: DiscreteSolution) -> None:
        if sol.norm <= 1e-8:
            return
        if any(abs(sol.norm - o.norm) <= 1e-6 * max(1.0, o.norm) for o in out):
            return
        out.append(sol)

    heights = sorted({h for r in radii for h in (r * c, r, r / c)})
    for height in heights:
        guess = [height * _bump(eq.kernel, t) for eq in problem.equations]
        res = picard_solve(problem, guess, n=n, tol=tol, max_iter=max_iter, relaxation=relaxation)
        if isinstance(res, DiscreteSolution):
            keep(res)
    if not problem.is_system:
        top = slope_max if slope_max is not None else 16.0 * max(radii) / c
        shot = shoot_solve(problem, (0.0, top), n=n, scan=128, all_roots=True)
        if not isinstance(shot, NotFound):
            for sol in shot:
                keep(sol)
    return sorted(out, key=lambda s: s.norm)


def verify_certificate(cert, problem: Problem, solutions: Sequence[DiscreteSolution] | None = None,
                       n: int = 201, **solver_options) -> CrossCheck:
    """Does some numerical solution's norm fall inside each certified window?

    ``solutions`` defaults to a multistart search around the certificate's
    radii. A window with no hit is unconfirmed, which is not a refutation.
    """
    if solutions is None:
        radii = sorted({x for w in cert.windows for x in w})
        solutions = find_solutions(problem, radii, cert.c, n=n, **solver_options)
    rows = []
    for lo, hi in cert.windows:
        hits = [s.norm for s in solutions if lo - 1e-9 <= s.norm <= hi + 1e-9]
        rows.append({"window": [lo, hi], "norms": hits, "confirmed": bool(hits)})
    status = "confirmed" if rows and all(r["confirmed"] for r in rows) else "unconfirmed"
    return CrossCheck(status, rows, list(solutions))
