from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from conecert.kernel import (
    DIRICHLET,
    ROBIN,
    KernelSpec,
    eval_kernel,
    green_matrix,
    kernel_row_integral,
    segment_weights,
    verify_green,
)


def test_kernel_values():
    assert eval_kernel(DIRICHLET, 0.5, 0.25) == 0.125
    assert eval_kernel(ROBIN, 0.3, 0.7) == 0.3
    assert eval_kernel(ROBIN, 0.7, 0.3) == 0.3
    for t in np.linspace(0.0, 1.0, 11):
        assert eval_kernel(DIRICHLET, t, 0.0) == 0.0
        assert eval_kernel(DIRICHLET, t, 1.0) == 0.0


@pytest.mark.parametrize("t,s", [(-0.1, 0.5), (0.5, 1.2), (math.nan, 0.2)])
def test_out_of_domain_rejected(t, s):
    with pytest.raises(ValueError):
        eval_kernel(DIRICHLET, t, s)


def test_names_and_aliases():
    assert KernelSpec.from_name("dirichlet-dirichlet") is DIRICHLET
    assert KernelSpec.from_name("Robin") is ROBIN
    assert KernelSpec.from_name("dirichlet-neumann") is ROBIN
    with pytest.raises(ValueError):
        KernelSpec.from_name("periodic")


def test_dirichlet_symmetry_on_grid():
    g = np.linspace(0.0, 1.0, 101)
    k = eval_kernel(DIRICHLET, g[:, None], g[None, :])
    assert np.array_equal(k, k.T)


@pytest.mark.parametrize("kernel", [DIRICHLET, ROBIN])
def test_nonnegative_on_grid(kernel):
    g = np.linspace(0.0, 1.0, 101)
    assert np.all(eval_kernel(kernel, g[:, None], g[None, :]) >= 0.0)


@pytest.mark.parametrize("kernel", [DIRICHLET, ROBIN])
def test_kink_continuity(kernel):
    t = 0.37
    gaps = [abs(eval_kernel(kernel, t, t - eps) - eval_kernel(kernel, t, t + eps)) for eps in (1e-2, 1e-4, 1e-6)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 2e-6


def test_row_integral_closed_forms():
    t = np.linspace(0.0, 1.0, 21)
    assert np.allclose(kernel_row_integral(DIRICHLET, t, 0.0, 1.0), t * (1 - t) / 2, atol=1e-15)
    assert np.allclose(kernel_row_integral(ROBIN, t, 0.0, 1.0), t - t * t / 2, atol=1e-15)
    assert kernel_row_integral(ROBIN, 0.5, 0.5, 1.0) == 0.25


@pytest.mark.parametrize("kernel", [DIRICHLET, ROBIN])
def test_row_integral_matches_adaptive_quadrature(kernel):
    rng = np.random.default_rng(20240611)
    for _ in range(100):
        t = rng.uniform()
        a, b = sorted(rng.uniform(size=2))
        exact = kernel_row_integral(kernel, t, a, b)
        points = [t] if a < t < b else None
        ref, _ = quad(lambda s: eval_kernel(kernel, t, s), a, b, points=points, epsabs=1e-14, epsrel=1e-14)
        assert exact == pytest.approx(ref, abs=1e-10)


def test_row_integral_rejects_reversed_limits():
    with pytest.raises(ValueError):
        kernel_row_integral(DIRICHLET, 0.5, 0.7, 0.2)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 8, 9])
def test_segment_weights_integrate_cubics(m):
    h = 0.1
    x = np.arange(m + 1) * h
    w = segment_weights(m, h)
    exact_deg = 1 if m == 1 else 3
    for p in range(exact_deg + 1):
        assert w @ x**p == pytest.approx((m * h) ** (p + 1) / (p + 1), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("kernel", [DIRICHLET, ROBIN])
def test_green_matrix_reproduces_row_integrals(kernel):
    n = 201
    t = np.linspace(0.0, 1.0, n)
    assert np.allclose(green_matrix(kernel, n) @ np.ones(n), kernel_row_integral(kernel, t, 0.0, 1.0), atol=1e-14)


def test_verify_green_constant_load():
    rep = verify_green(DIRICHLET, "1", n=201)
    assert np.allclose(rep.u, rep.t * (1 - rep.t) / 2, atol=1e-14)
    assert rep.left_bc == 0.0 and rep.right_bc < 1e-15
    rep = verify_green(ROBIN, "1", n=201)
    assert np.allclose(rep.u, rep.t - rep.t**2 / 2, atol=1e-14)
    assert rep.left_bc == 0.0 and rep.right_bc < 1e-10


@pytest.mark.parametrize("kernel", [DIRICHLET, ROBIN])
def test_verify_green_smooth_load_is_second_order(kernel):
    # y = pi^2 sin(pi s) gives u = sin(pi t) for the Dirichlet kernel
    res = [verify_green(kernel, "pi^2*sin(pi*s)", n=n).interior for n in (101, 201, 401)]
    order = math.log(res[0] / res[2]) / math.log(4.0)
    assert order == pytest.approx(2.0, abs=0.2)


def test_verify_green_eigenfunction():
    rep = verify_green(DIRICHLET, lambda s: np.pi**2 * np.sin(np.pi * s), n=201)
    assert np.max(np.abs(rep.u - np.sin(np.pi * rep.t))) < 1e-5
    assert rep.worst < 1e-3


def test_verify_green_minimum_grid():
    with pytest.raises(ValueError):
        verify_green(DIRICHLET, "1", n=15)
