"""Limiting edge kernels: the interpolating double-contour kernel, its
Airy-type degeneration, and the Poisson (Kronecker-delta) variants.

The interpolating kernel is evaluated by factorized quadrature: the double
integral separates into two one-dimensional node sets coupled only through
1/(i(u+v)), so a kernel matrix over N points costs two thin matrix products
instead of N^2 double integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .finite import Point2
from .specfun import ContourSpec, airy_kernel, airy_kernel_matrix

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class SigmaRescale:
    """Rescaling constants carrying the interpolating process to Gumbel."""

    a_sigma: float
    b_sigma: float
    c_sigma: float


def interp_rescale(sigma) -> SigmaRescale:
    """a, b, c with a = sigma/sqrt(6 log sigma), b = sigma^(3/2)/(6 log sigma)^(1/4),
    c = a (3 log sigma - (5/4) log(6 log sigma) - log 2 pi).  Needs sigma > 1."""
    if sigma <= 1.0:
        raise ContractError(f"rescaling constants need sigma > 1, got {sigma}")
    ls = math.log(sigma)
    a = sigma / math.sqrt(6.0 * ls)
    b = sigma ** 1.5 / (6.0 * ls) ** 0.25
    c = a * (3.0 * ls - 1.25 * math.log(6.0 * ls) - math.log(2.0 * math.pi))
    return SigmaRescale(a_sigma=a, b_sigma=b, c_sigma=c)


# ---------------------------------------------------------------------------
# interpolating kernel M_sigma
# ---------------------------------------------------------------------------

def default_interp_contour(sigma, eta_max=6.0, xi_min=-10.0) -> ContourSpec:
    """Contour t + i*delta and truncation for the interpolating kernel.

    delta = 1/(1+sigma) keeps the e^{(sigma delta)^2/2} cancellation factor
    of the Gaussian part O(1) at every sigma; the half-width is grown until
    the integrand envelope exp(-delta t^2 - (sigma|t| - eta)^2/2) is below
    1e-18 of its peak.
    """
    delta = 1.0 / (1.0 + sigma)
    T = 4.0
    def log_env(t):
        gauss = max(sigma * t - abs(eta_max), 0.0)
        return -delta * t * t - 0.5 * gauss * gauss + delta * abs(xi_min)
    log_peak = delta * abs(xi_min)
    while log_env(T) - log_peak > math.log(1e-18) and T < 400.0:
        T *= 1.2
    nodes = max(240, int(math.ceil(24.0 * T)), int(math.ceil(7.0 * T / delta)))
    return ContourSpec(delta=delta, half_width=T, nodes=nodes)


def _interp_factors(sigma, pts, spec, sign):
    """exp factors of the u (sign=+1) or v (sign=-1) integral at all nodes.

    Returns (weighted factor matrix of shape (m, N), per-point log peak).
    The u-factor at point (xi, eta) is exp(-(sigma u + eta)^2/2 + i u^3/3
    + i xi u); the v-factor has (sigma v - eta).
    """
    t = np.linspace(-spec.half_width, spec.half_width, spec.nodes)
    w = np.full(spec.nodes, t[1] - t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    u = t + 1j * spec.delta
    xi = pts[:, 0]
    eta = pts[:, 1]
    expo = (-0.5 * (sigma * u[:, None] + sign * eta[None, :]) ** 2
            + (1j / 3.0) * (u ** 3)[:, None]
            + 1j * u[:, None] * xi[None, :])
    peak = np.max(expo.real, axis=0)
    fac = np.exp(expo - peak[None, :]) * w[:, None]
    return u, fac, peak


def kernel_interp_matrix(sigma, points_a, points_b=None, spec=None):
    """M_sigma on the grid points_a x points_b (each an (N, 2) array)."""
    if sigma < 0:
        raise ContractError(f"sigma must be non-negative, got {sigma}")
    pa = np.atleast_2d(np.asarray(points_a, dtype=float))
    pb = pa if points_b is None else np.atleast_2d(np.asarray(points_b, dtype=float))
    if spec is None:
        eta_max = float(max(np.max(np.abs(pa[:, 1])), np.max(np.abs(pb[:, 1])), 1.0))
        xi_min = float(min(np.min(pa[:, 0]), np.min(pb[:, 0]), 0.0))
        spec = default_interp_contour(sigma, eta_max=eta_max, xi_min=xi_min)
    if spec.delta <= 0:
        raise ContractError("contour offset must be positive")
    u, fa, peak_a = _interp_factors(sigma, pa, spec, +1)
    v, fb, peak_b = _interp_factors(sigma, pb, spec, -1)
    # 1/(i(u+v)) taken with the orientation that makes the diagonal a
    # positive intensity: the coupling is int_0^inf e^{is(u+v)} ds, which
    # equals -1/(i(u+v)) since Im(u+v) = 2 delta > 0
    coupling = -1.0 / (1j * (u[:, None] + v[None, :]))
    core = fa.T @ coupling @ fb
    scale = np.exp(peak_a[:, None] + peak_b[None, :] - math.log(4.0 * math.pi ** 2.5))
    return core * scale


def kernel_interp(sigma, z1: Point2, z2: Point2, spec=None) -> complex:
    """Interpolating kernel M_sigma(z1, z2); Hermitian, Airy-type at sigma=0."""
    m = kernel_interp_matrix(sigma, np.array([[z1.xi, z1.eta]]),
                             np.array([[z2.xi, z2.eta]]), spec=spec)
    return complex(m[0, 0])


def interp_diag_bound(sigma, xi, eta, delta=None):
    """Integrable majorant of M_sigma(z, z) on right half-planes.

    exp(delta^2 sigma^2 + (2/3) delta^3 - 2 delta eta^2/(sigma^2 + 2 delta)
        - 2 delta xi) / (4 pi^(3/2) delta (sigma^2 + 2 delta)),
    valid for every delta > 0.
    """
    if delta is None:
        delta = 1.0 / (1.0 + sigma)
    expo = (delta * delta * sigma * sigma + (2.0 / 3.0) * delta ** 3
            - 2.0 * delta * eta * eta / (sigma * sigma + 2.0 * delta)
            - 2.0 * delta * xi)
    return np.exp(expo) / (4.0 * math.pi ** 1.5 * delta * (sigma * sigma + 2.0 * delta))


# ---------------------------------------------------------------------------
# Airy-type and Poisson-type limit kernels
# ---------------------------------------------------------------------------

def kernel_airy2d(z1: Point2, z2: Point2) -> float:
    """Airy-type plane kernel e^{-(eta1^2+eta2^2)/2}/sqrt(pi) K_A(xi1, xi2)."""
    gauss = math.exp(-0.5 * (z1.eta ** 2 + z2.eta ** 2)) / SQRT_PI
    return gauss * airy_kernel(z1.xi, z2.xi)


def kernel_airy2d_matrix(points_a, points_b=None):
    pa = np.atleast_2d(np.asarray(points_a, dtype=float))
    pb = pa if points_b is None else np.atleast_2d(np.asarray(points_b, dtype=float))
    ka = airy_kernel_matrix(pa[:, 0], pb[:, 0])
    g1 = np.exp(-0.5 * pa[:, 1] ** 2)
    g2 = np.exp(-0.5 * pb[:, 1] ** 2)
    return ka * np.outer(g1, g2) / SQRT_PI


_POISSON_VARIANTS = ("P", "P1", "P2")


def kernel_poisson(variant, z1: Point2, z2: Point2) -> float:
    """Poisson-process kernels with exact-equality Kronecker semantics.

    These are degenerate (a.e.-diagonal) kernels for analytic use only:
    gap probabilities reduce to the diagonal closed form and are never fed
    to a generic discretized determinant.
    """
    if variant not in _POISSON_VARIANTS:
        raise ContractError(f"unknown Poisson variant {variant!r}")
    if variant == "P":
        if z1 == z2:
            return math.exp(-z1.xi - z1.eta ** 2) / SQRT_PI
        return 0.0
    if variant == "P1":
        if z1.xi == z2.xi:
            return math.exp(-0.5 * (z1.eta ** 2 + z2.eta ** 2)) / SQRT_PI * math.exp(-z1.xi)
        return 0.0
    if z1.eta == z2.eta:
        return math.exp(-z1.eta ** 2 - 0.5 * (z1.xi ** 2 + z2.xi ** 2)) / SQRT_PI
    return 0.0


def poisson_diag_density(variant, z: Point2) -> float:
    """1-point intensity of the Poisson kernels (their common diagonal)."""
    if variant not in _POISSON_VARIANTS:
        raise ContractError(f"unknown Poisson variant {variant!r}")
    return math.exp(-z.xi - z.eta ** 2) / SQRT_PI
