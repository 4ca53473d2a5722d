"""Cone data for a window [a, b]: the kernel majorant Phi, the constant c, and m, M(a, b)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import DIRICHLET, KernelSpec, eval_kernel, kernel_row_integral

DEFAULT_WINDOWS = {
    KernelSpec.DIRICHLET_DIRICHLET: (0.25, 0.75),
    KernelSpec.DIRICHLET_NEUMANN: (0.5, 1.0),
}

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class UnusableWindowError(ValueError):
    """The window gives c = 0 or a vanishing M-integral, so no cone can be built on it."""


def phi_upper(k: KernelSpec, s):
    """Majorant Phi with k(t, s) <= Phi(s) for all t."""
    s = np.asarray(s, dtype=float)
    out = s * (1.0 - s) if k is DIRICHLET else s
    return float(out) if out.ndim == 0 else out


def cone_constant(k: KernelSpec, a: float, b: float) -> float:
    """c with c * Phi(s) <= k(t, s) on [a, b] x [0, 1]; 0 marks an unusable window."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"window needs 0 <= a < b <= 1, got ({a}, {b})")
    if k is DIRICHLET:
        return min(a, 1.0 - b)
    return a


def golden_section(fn, lo: float, hi: float, maximize: bool = False, tol: float = 1e-13) -> tuple[float, float]:
    """Golden-section search for a unimodal ``fn`` on [lo, hi]; returns (x, fn(x))."""
    sign = -1.0 if maximize else 1.0
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = sign * fn(x1), sign * fn(x2)
    while hi - lo > tol * (1.0 + abs(lo) + abs(hi)):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = sign * fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = sign * fn(x2)
    x = x1 if f1 <= f2 else x2
    return x, fn(x)


def _extremum_on_grid(fn, lo: float, hi: float, grid: int, maximize: bool) -> float:
    """Grid scan followed by golden-section refinement around the best node."""
    ts = np.linspace(lo, hi, grid)
    vals = fn(ts)
    i = int(np.argmax(vals) if maximize else np.argmin(vals))
    best = float(vals[i])
    left, right = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
    if right > left:
        _, refined = golden_section(fn, float(left), float(right), maximize=maximize)
        best = max(best, refined) if maximize else min(best, refined)
    return best


def sup_row_integral(k: KernelSpec, grid: int = 1001) -> float:
    """sup over t of the integral of k(t, s) over [0, 1] (that is, 1/m)."""
    return _extremum_on_grid(lambda t: kernel_row_integral(k, t, 0.0, 1.0), 0.0, 1.0, grid, maximize=True)


def inf_row_integral(k: KernelSpec, a: float, b: float, grid: int = 1001) -> float:
    """inf over t in [a, b] of the integral of k(t, s) over [a, b] (that is, 1/M(a, b))."""
    return _extremum_on_grid(lambda t: kernel_row_integral(k, t, a, b), a, b, grid, maximize=False)


def m_constant(k: KernelSpec, grid: int = 1001) -> float:
    return 1.0 / sup_row_integral(k, grid)


def M_constant(k: KernelSpec, a: float, b: float, grid: int = 1001) -> float:
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"window needs 0 <= a < b <= 1, got ({a}, {b})")
    low = inf_row_integral(k, a, b, grid)
    if low <= 1e-300:
        raise UnusableWindowError(f"integral over window ({a}, {b}) vanishes")
    return 1.0 / low


@dataclass(frozen=True)
class ConeWindow:
    kernel: KernelSpec
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not 0.0 <= self.a < self.b <= 1.0:
            raise ValueError(f"window needs 0 <= a < b <= 1, got ({self.a}, {self.b})")
        if not 0.0 < self.c <= 1.0:
            raise UnusableWindowError(f"cone constant c={self.c} outside (0, 1] for window ({self.a}, {self.b})")

    @classmethod
    def for_window(cls, k: KernelSpec, a: float, b: float) -> ConeWindow:
        return cls(k, a, b, cone_constant(k, a, b))

    def sandwich_violation(self, samples: int = 101) -> float:
        """Largest violation of c*Phi(s) <= k(t, s) <= Phi(s) on a sample grid (0 when it holds)."""
        s = np.linspace(0.0, 1.0, samples)
        t_all = np.linspace(0.0, 1.0, samples)
        t_win = np.linspace(self.a, self.b, samples)
        phi = phi_upper(self.kernel, s)
        upper = np.max(eval_kernel(self.kernel, t_all[:, None], s[None, :]) - phi[None, :])
        lower = np.max(self.c * phi[None, :] - eval_kernel(self.kernel, t_win[:, None], s[None, :]))
        return max(float(upper), float(lower), 0.0)


@dataclass(frozen=True)
class Constants:
    m: float
    M: float
    window: ConeWindow

    @property
    def c(self) -> float:
        return self.window.c

    @property
    def kernel(self) -> KernelSpec:
        return self.window.kernel

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.value,
            "m": self.m,
            "M": self.M,
            "a": self.window.a,
            "b": self.window.b,
            "c": self.c,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Constants:
        k = KernelSpec(d["kernel"])
        return cls(d["m"], d["M"], ConeWindow(k, d["a"], d["b"], d["c"]))


def constants_for(k: KernelSpec, a: float | None = None, b: float | None = None) -> Constants:
    """Constants on the given window, defaulting to (1/4, 3/4) for Dirichlet and (1/2, 1) for mixed BCs."""
    if a is None or b is None:
        a, b = DEFAULT_WINDOWS[k]
    window = ConeWindow.for_window(k, a, b)
    return Constants(m_constant(k), M_constant(k, a, b), window)


def optimize_window(k: KernelSpec, resolution: int = 201, grid: int = 1001, refine: int = 16) -> Constants:
    """Exhaustive search over grid windows for the smallest M(a, b).

    Every window is scored by a vectorized grid scan of its row integral; the
    ``refine`` best are then re-scored with golden-section refinement. Ties (to
    1e-12 relative) go to the larger c, then the smaller a. Windows with c = 0
    are skipped.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    nodes = np.linspace(0.0, 1.0, resolution)
    frac = np.linspace(0.0, 1.0, grid)
    scored = []  # (grid inf, a, b)
    for i, a in enumerate(nodes[:-1]):
        bs = nodes[i + 1 :]
        ts = a + (bs[:, None] - a) * frac[None, :]
        vals = kernel_row_integral(k, np.clip(ts, 0.0, 1.0), float(a), 1.0)
        # integral over [a, b] = integral over [a, 1] minus integral over [b, 1]
        vals = vals - _tail_integral(k, ts, bs[:, None])
        lows = vals.min(axis=1)
        scored.extend(zip(lows.tolist(), [float(a)] * len(bs), bs.tolist()))
    usable = [(low, a, b) for low, a, b in scored if low > 1e-300 and cone_constant(k, a, b) > 0.0]
    usable.sort(key=lambda x: -x[0])
    best = None  # (M, -c, a, b, c)
    for _, a, b in usable[:refine]:
        c = cone_constant(k, a, b)
        M = M_constant(k, a, b, grid)
        if best is None or _better(M, c, a, best):
            best = (M, -c, a, b, c)
    assert best is not None
    M, _, a, b, c = best
    return Constants(m_constant(k, grid), M, ConeWindow(k, a, b, c))


def _tail_integral(k: KernelSpec, t: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integral of k(t, s) over s in [b, 1], vectorized over both t and b."""
    x = np.maximum(t, b)  # s in [b, x] lies below t, s in [x, 1] above it
    if k is DIRICHLET:
        below = (1.0 - t) * (x * x - b * b) / 2.0
        above = t * (0.5 - (x - x * x / 2.0))
    else:
        below = (x * x - b * b) / 2.0
        above = t * (1.0 - x)
    return below + above


def _better(M: float, c: float, a: float, best) -> bool:
    bM, neg_bc, ba = best[0], best[1], best[2]
    if not math.isclose(M, bM, rel_tol=1e-12, abs_tol=0.0):
        return M < bM
    if not math.isclose(c, -neg_bc, rel_tol=1e-12, abs_tol=0.0):
        return c > -neg_bc
    return a < ba
