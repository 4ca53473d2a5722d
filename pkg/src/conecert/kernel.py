"""Green's kernels of u'' + y = 0 on [0, 1] and a finite-difference check that they invert it."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .expr import Expr, compile_expr, parse


class KernelSpec(Enum):
    """Boundary-condition pair, which fixes the Green's kernel."""

    DIRICHLET_DIRICHLET = "dirichlet-dirichlet"  # u(0) = u(1) = 0
    DIRICHLET_NEUMANN = "dirichlet-neumann"  # u(0) = u'(1) = 0

    @classmethod
    def from_name(cls, name: str) -> KernelSpec:
        aliases = {"dirichlet": cls.DIRICHLET_DIRICHLET, "robin": cls.DIRICHLET_NEUMANN, "mixed": cls.DIRICHLET_NEUMANN}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


DIRICHLET = KernelSpec.DIRICHLET_DIRICHLET
ROBIN = KernelSpec.DIRICHLET_NEUMANN


def _check_unit(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0.0)) or np.any(~(arr <= 1.0)):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def eval_kernel(k: KernelSpec, t, s):
    """k(t, s); scalars give a float, arrays broadcast."""
    _check_unit("t", t)
    _check_unit("s", s)
    t_arr, s_arr = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    if k is DIRICHLET:
        out = np.where(s_arr <= t_arr, s_arr * (1.0 - t_arr), t_arr * (1.0 - s_arr))
    else:
        out = np.minimum(s_arr, t_arr)
    return float(out) if out.ndim == 0 else out


def kernel_row_integral(k: KernelSpec, t, a: float, b: float):
    """Closed form of the integral of k(t, s) over s in [a, b]."""
    if a > b:
        raise ValueError(f"empty interval: a={a} > b={b}")
    _check_unit("t", t)
    _check_unit("a", a)
    _check_unit("b", b)
    t_arr = np.asarray(t, dtype=float)
    # s <= t part covers [a, x], s > t part covers [x, b], with x = t clipped into [a, b]
    x = np.clip(t_arr, a, b)
    if k is DIRICHLET:
        below = (1.0 - t_arr) * (x * x - a * a) / 2.0
        above = t_arr * ((b - b * b / 2.0) - (x - x * x / 2.0))
    else:
        below = (x * x - a * a) / 2.0
        above = t_arr * (b - x)
    out = below + above
    return float(out) if out.ndim == 0 else out


def segment_weights(m: int, h: float) -> np.ndarray:
    """Newton-Cotes weights for m equal panels of width h.

    Composite Simpson when m is even; Simpson plus a closing 3/8 rule when m
    is odd; the trapezoid rule when m == 1.
    """
    w = np.zeros(m + 1)
    if m == 0:
        return w
    if m == 1:
        w[:] = h / 2.0
        return w
    even = m if m % 2 == 0 else m - 3
    if even > 0:
        w[0 : even + 1 : 2] += 2.0 * h / 3.0
        w[1:even:2] += 4.0 * h / 3.0
        w[0] -= h / 3.0
        w[even] -= h / 3.0
    if m % 2 == 1:
        w[even : even + 4] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def split_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature weights for the parts s <= t_j and s >= t_j of the integral over [0, 1].

    Row j of the first matrix integrates over [0, t_j], row j of the second over
    [t_j, 1], so the kernel's kink at s = t_j always sits on a panel boundary. A
    lone panel uses the 3-point rule through one extra node, which is exact for
    quadratics; it must be paired with the smooth continuation of the kernel
    branch, not the kernel itself (see :func:`green_matrix`).
    """
    if n < 4:
        raise ValueError("need at least 4 nodes")
    h = 1.0 / (n - 1)
    lone = h * np.array([5.0, 8.0, -1.0]) / 12.0
    below = np.zeros((n, n))
    above = np.zeros((n, n))
    for j in range(n):
        if j == 1:
            below[j, 0:3] = lone
        else:
            below[j, : j + 1] = segment_weights(j, h)
        if n - 1 - j == 1:
            above[j, n - 3 :] = lone[::-1]
        else:
            above[j, j:] = segment_weights(n - 1 - j, h)
    return below, above


def _branches(k: KernelSpec, t: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two closed-form pieces of k, each continued smoothly to all of [0, 1]^2."""
    if k is DIRICHLET:
        return s * (1.0 - t), t * (1.0 - s)
    return np.broadcast_to(s, np.broadcast(t, s).shape), np.broadcast_to(t, np.broadcast(t, s).shape)


def green_matrix(k: KernelSpec, n: int) -> np.ndarray:
    """Matrix A with (A @ y)_j approximating the integral of k(t_j, s) y(s) ds."""
    t = np.linspace(0.0, 1.0, n)
    below, above = split_weights(n)
    k_below, k_above = _branches(k, t[:, None], t[None, :])
    return below * k_below + above * k_above


Source = Union[Callable[[np.ndarray], np.ndarray], Expr, str]


def _sampler(y: Source) -> Callable[[np.ndarray], np.ndarray]:
    if callable(y) and not isinstance(y, Expr):
        return y
    expr = parse(y) if isinstance(y, str) else y

    def sample(s):
        fn = compile_expr(expr, {"s": s}, vectorized=True)
        return np.broadcast_to(np.asarray(fn(), dtype=float), s.shape)

    return sample


@dataclass
class GreenReport:
    """Residuals of u = integral of k * y against u'' + y = 0 and the boundary conditions."""

    kernel: KernelSpec
    n: int
    interior: float
    left_bc: float
    right_bc: float
    t: np.ndarray
    u: np.ndarray

    @property
    def worst(self) -> float:
        return max(self.interior, self.left_bc, self.right_bc)


def verify_green(k: KernelSpec, y: Source, n: int = 201) -> GreenReport:
    """Apply the kernel to ``y`` by quadrature and measure how well the result solves the BVP.

    ``y`` is a vectorized callable of s, or an expression in the name ``s``.
    """
    if n < 16:
        raise ValueError("grid needs at least 16 nodes")
    t = np.linspace(0.0, 1.0, n)
    h = 1.0 / (n - 1)
    yv = np.asarray(_sampler(y)(t), dtype=float)
    u = green_matrix(k, n) @ yv
    upp = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    interior = float(np.max(np.abs(upp + yv[1:-1])))
    left = abs(float(u[0]))
    if k is DIRICHLET:
        right = abs(float(u[-1]))
    else:
        # second-order one-sided difference for u'(1)
        right = abs(float((3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)))
    return GreenReport(k, n, interior, left, right, t, u)
