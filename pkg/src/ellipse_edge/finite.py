"""Finite-n correlation kernels of the ellipse and Ginibre ensembles.

The ellipse-ensemble kernel is a weighted Hermite sum with a Gaussian
prefactor; the weight is folded into the scaled recurrence (per-point
log-offsets) because the raw summands overflow doubles already at n of a few
hundred.  A dual representation through a double contour integral is kept as
an independent cross-check, with contour radii steered by the two real
saddle points of f_n(w) = n log w + w^2 - c_n w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import AccuracyError, AdmissibilityError, ContractError, DegenerateSaddleError
from .scaled import LN2
from .specfun import ContourSpec, weighted_hermite_sum, weighted_hermite_chain

SQRT_PI = math.sqrt(math.pi)


class Point2(NamedTuple):
    """A point of the plane: real / imaginary part of an eigenvalue."""

    xi: float
    eta: float

    def as_complex(self):
        return complex(self.xi, self.eta)


class Regime(Enum):
    GUMBEL = "gumbel"
    INTERPOLATING = "interp"


@dataclass(frozen=True)
class EnsembleParams:
    """Matrix dimension n and non-Hermiticity parameter tau in [0, 1)."""

    n: int
    tau: float

    def __post_init__(self):
        if self.n < 1 or self.n != int(self.n):
            raise ContractError(f"n must be a positive integer, got {self.n}")
        if not (0.0 <= self.tau < 1.0):
            raise ContractError(f"tau must lie in [0, 1), got {self.tau}")

    @property
    def sigma_n(self):
        """Critical edge parameter n^(1/6) sqrt(1 - tau)."""
        return self.n ** (1.0 / 6.0) * math.sqrt(1.0 - self.tau)


@dataclass(frozen=True)
class ScalingParams:
    """Edge-scaling constants: horizontal scale a, vertical scale b, shift c."""

    a: float
    b: float
    c: float
    sigma_n: float
    regime: Regime

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ContractError("scales must be positive")


@dataclass(frozen=True)
class SaddleData:
    """The two real saddle points of f_n(w) = n log w + w^2 - c_n w."""

    w_minus: float
    w_plus: float
    c_n: float
    delta_n: float  # c_n - sqrt(2n/tau)(1+tau); NaN when tau was not supplied

    def fprime(self, n, w):
        return n / w + 2.0 * w - self.c_n


def scaling_params(p: EnsembleParams, regime: Regime) -> ScalingParams:
    """Edge-scaling constants for the rescaled point process.

    Gumbel regime (sigma_n -> infinity):
        a = sqrt(th) sigma n^(-2/3) / sqrt(6 log sigma)
        b = th^(-1/4) sigma^(5/2) n^(-2/3) / (6 log sigma)^(1/4)
        c = 2 th + a (3 log sigma - (5/4) log(6 log sigma) - log(2 pi th^(3/4)))
    with th = (1 + tau)/2; requires sigma_n > 1.

    Interpolating regime (sigma_n -> sigma finite):
        a = n^(-2/3),  b = sigma_n n^(-2/3),  c = 1 + tau.
    """
    regime = Regime(regime)
    sig = p.sigma_n
    n23 = p.n ** (-2.0 / 3.0)
    if regime is Regime.GUMBEL:
        if sig <= 1.0:
            raise ContractError(f"Gumbel regime needs sigma_n > 1, got {sig:.4g}")
        th = (1.0 + p.tau) / 2.0
        ls6 = 6.0 * math.log(sig)
        a = math.sqrt(th) * sig * n23 / math.sqrt(ls6)
        b = th ** (-0.25) * sig ** 2.5 * n23 / ls6 ** 0.25
        c = 2.0 * th + a * (3.0 * math.log(sig) - 1.25 * math.log(ls6)
                            - math.log(2.0 * math.pi * th ** 0.75))
        return ScalingParams(a=a, b=b, c=c, sigma_n=sig, regime=regime)
    return ScalingParams(a=n23, b=sig * n23, c=1.0 + p.tau, sigma_n=sig, regime=regime)


def tau_for_sigma(n, sigma):
    """tau_n with sigma_n = n^(1/6) sqrt(1 - tau_n) equal to sigma."""
    tau = 1.0 - sigma * sigma * n ** (-1.0 / 3.0)
    if not 0.0 <= tau < 1.0:
        raise ContractError(f"sigma={sigma} is unreachable at n={n}")
    return tau


def saddle_points(n, c_n, tau=None) -> SaddleData:
    """Closed-form saddle points w+- = c_n/4 (1 +- sqrt(1 - 8n/c_n^2))."""
    if c_n * c_n <= 8.0 * n:
        raise DegenerateSaddleError(f"c_n^2 = {c_n * c_n:.6g} <= 8n = {8 * n}")
    root = math.sqrt(1.0 - 8.0 * n / (c_n * c_n))
    w_plus = 0.25 * c_n * (1.0 + root)
    w_minus = 0.25 * c_n * (1.0 - root)
    delta = c_n - math.sqrt(2.0 * n / tau) * (1.0 + tau) if tau else math.nan
    return SaddleData(w_minus=w_minus, w_plus=w_plus, c_n=c_n, delta_n=delta)


# ---------------------------------------------------------------------------
# ellipse kernel, Hermite-sum representation
# ---------------------------------------------------------------------------

def _log_weight(p, xi, eta):
    # per-point half of the Gaussian prefactor of the correlation kernel
    return -(p.n / 2.0) * (xi * xi / (1.0 + p.tau) + eta * eta / (1.0 - p.tau))


def _kernel_prefactor(p):
    return p.n / math.sqrt(math.pi * (1.0 - p.tau * p.tau))


def kernel_finite_scaled(p: EnsembleParams, z1: Point2, z2: Point2):
    """K_n^tau(z1, z2) as a ScaledArray (mantissa, base-2 exponent)."""
    if not (0.0 < p.tau < 1.0):
        raise ContractError("kernel_finite needs tau in (0,1); use kernel_ginibre at tau=0")
    scale = math.sqrt(p.n / (2.0 * p.tau))
    zz1 = scale * complex(z1.xi, z1.eta)
    zz2 = scale * complex(z2.xi, -z2.eta)  # conjugate of the second argument
    lw = _log_weight(p, z1.xi, z1.eta) + _log_weight(p, z2.xi, z2.eta)
    s = weighted_hermite_sum(p.n, p.tau, zz1, zz2, lw)
    mant = s.mantissa * _kernel_prefactor(p)
    return type(s)(mant, s.exp2)


def kernel_finite(p: EnsembleParams, z1: Point2, z2: Point2) -> complex:
    """Finite-n ellipse-ensemble correlation kernel; Hermitian in (z1, z2).

    Values below the double range collapse to exact 0 (see
    ``kernel_finite_scaled`` when the underflow flag matters).
    """
    return complex(kernel_finite_scaled(p, z1, z2).to_complex())


def kernel_finite_matrix(p: EnsembleParams, points):
    """K_n^tau on all pairs of ``points`` (array shape (N, 2)) at once.

    Builds the chain matrix H[k, p] = tau^(k/2) h_k(z_p) w_p and returns the
    Gram product H^T conj(H) with per-column binary exponents folded back in,
    which keeps the matrix exactly Hermitian PSD.
    """
    if not (0.0 < p.tau < 1.0):
        raise ContractError("kernel_finite needs tau in (0,1)")
    pts = np.asarray(points, dtype=float)
    scale = math.sqrt(p.n / (2.0 * p.tau))
    z = scale * (pts[:, 0] + 1j * pts[:, 1])
    lw = _log_weight(p, pts[:, 0], pts[:, 1])
    H, col = weighted_hermite_chain(p.n, p.tau, z, lw)
    gram = H.T @ np.conj(H)
    expo = col[:, None] + col[None, :] + math.log2(_kernel_prefactor(p))
    return gram * np.exp2(np.clip(expo, -1070.0, 1020.0))


def kernel_rescaled(p: EnsembleParams, s: ScalingParams, z1: Point2, z2: Point2) -> complex:
    """Kernel of the rescaled edge process: a b K_n^tau at the unscaled points."""
    u1 = Point2(s.c + s.a * z1.xi, s.b * z1.eta)
    u2 = Point2(s.c + s.a * z2.xi, s.b * z2.eta)
    return s.a * s.b * kernel_finite(p, u1, u2)


def kernel_rescaled_matrix(p: EnsembleParams, s: ScalingParams, points):
    """Rescaled-process kernel on all pairs of rescaled-coordinate points."""
    pts = np.asarray(points, dtype=float)
    unscaled = np.column_stack((s.c + s.a * pts[:, 0], s.b * pts[:, 1]))
    return (s.a * s.b) * kernel_finite_matrix(p, unscaled)


# ---------------------------------------------------------------------------
# Ginibre kernel (tau = 0)
# ---------------------------------------------------------------------------

def kernel_ginibre(n, z1: Point2, z2: Point2) -> complex:
    """Ginibre correlation kernel (n/pi) e^{-(n/2)(|z1|^2+|z2|^2)} sum (n z1 conj(z2))^k / k!.

    The Gaussian weight is folded into the term recurrence, which keeps every
    partial term at most 1 in magnitude; no overflow up to n of several
    thousand.
    """
    if n < 1 or n != int(n):
        raise ContractError(f"n must be a positive integer, got {n}")
    w = n * complex(z1.xi, z1.eta) * complex(z2.xi, -z2.eta)
    lw = -(n / 2.0) * (z1.xi ** 2 + z1.eta ** 2 + z2.xi ** 2 + z2.eta ** 2)
    # term_k = e^{lw} w^k / k!, carried as mantissa * 2^e
    mant, e = 1.0 + 0.0j, lw / LN2
    acc, eacc = mant, e
    for k in range(1, int(n)):
        mant *= w / k
        a = abs(mant)
        if a != 0.0 and not 0.5 <= a <= 2.0:
            shift = math.frexp(a)[1]
            mant = mant * 2.0 ** (-shift)
            e += shift
        acc += mant * 2.0 ** max(min(e - eacc, 300.0), -1070.0)
        if abs(acc) > 2.0 ** 52:
            acc *= 2.0 ** -52
            eacc += 52
    expo = eacc + math.log2(n / math.pi)
    if expo < -1060.0:
        return 0.0j
    return acc * 2.0 ** expo


# ---------------------------------------------------------------------------
# contour-integral representation of the ellipse kernel
# ---------------------------------------------------------------------------

def default_contour_radii(p: EnsembleParams):
    """r1, r2 straddling the saddle points at the spectrum's right edge.

    At delta_n = 0 the admissibility gap tau w+ - w- vanishes, so the radii
    are separated -- but only by a fraction of the local Gaussian widths
    1/sqrt(|f_n''(w+-)|), else the integrand grows as e^{(1-tau) d^2} off the
    saddle and the quadrature cancels catastrophically.
    """
    c_n = math.sqrt(2.0 * p.n / p.tau) * (1.0 + p.tau)
    sd = saddle_points(p.n, c_n, tau=p.tau)
    width_plus = 1.0 / math.sqrt(2.0 * (1.0 - p.tau))
    width_minus = math.sqrt(p.tau / (2.0 * (1.0 - p.tau)))
    r2 = sd.w_plus + 0.7 * width_plus
    r1 = max(sd.w_minus - 0.7 * width_minus, 0.25 * sd.w_minus)
    return r1, r2


def kernel_finite_contour(p: EnsembleParams, z1: Point2, z2: Point2,
                          r1=None, r2=None, spec: ContourSpec | None = None) -> complex:
    """K_n^tau via the double contour integral (circle gamma_r1, line Gamma_r2).

    Independent of ``kernel_finite`` (no Hermite recurrence); agreement of
    the two representations is the primary cross-validation of the kernel.
    """
    if not (0.0 < p.tau < 1.0):
        raise ContractError("contour kernel needs tau in (0,1)")
    n, tau = p.n, p.tau
    if r1 is None or r2 is None:
        d1, d2 = default_contour_radii(p)
        r1 = d1 if r1 is None else r1
        r2 = d2 if r2 is None else r2
    if not 0.0 < r1 < tau * r2:
        raise AdmissibilityError(f"need 0 < r1 < tau*r2, got r1={r1}, tau*r2={tau * r2}")

    zc1 = complex(z1.xi, z1.eta)
    zc2bar = complex(z2.xi, -z2.eta)
    coef = math.sqrt(2.0 * n / tau)

    if spec is None:
        T = 3.0 * math.sqrt(n) + 10.0
        m2 = max(200, int(math.ceil(20.0 * T)))
        spec = ContourSpec(delta=r2, half_width=T, nodes=m2)
    T, m2 = spec.half_width, spec.nodes

    m1 = max(512, 8 * n, n + int(math.ceil(3.0 * abs(zc1) * coef * r1 / n)) + 64)
    theta = -math.pi + 2.0 * math.pi * np.arange(m1) / m1
    w1 = r1 * np.exp(1j * theta)
    d1 = (2.0 * math.pi / m1) * (1j * w1)
    t = np.linspace(-T, T, m2)
    w2 = r2 + 1j * t
    wt = np.full(m2, t[1] - t[0])
    wt[0] *= 0.5
    wt[-1] *= 0.5
    d2 = 1j * wt

    # integrand exponent f_n(w2) - f_n(w1) with complex linear coefficients
    le1 = -(n * np.log(w1) + w1 * w1 - coef * zc1 * w1)
    le2 = n * np.log(w2) + w2 * w2 - coef * zc2bar * w2
    lpref = (math.log(n) + n * math.log(tau)
             - math.log(2.0 * math.pi ** 2.5 * math.sqrt(1.0 - tau * tau))
             - (n / 2.0) * (-zc2bar * zc2bar / tau
                            + (z1.xi ** 2 + z2.xi ** 2) / (1.0 + tau)
                            + (z1.eta ** 2 + z2.eta ** 2) / (1.0 - tau)))
    peak2 = float(np.max(le2.real))
    boundary_ratio = math.exp(min(float(max(le2.real[0], le2.real[-1])) - peak2, 50.0))
    if boundary_ratio > 1e-12:
        raise AccuracyError(
            f"line truncation T={T:.3g} insufficient: boundary/peak {boundary_ratio:.3g}",
            certificate=boundary_ratio)
    shift = float(np.max(le1.real) + peak2 + lpref.real)
    if shift < -745.0:
        return 0.0j

    f1 = np.exp(le1 + (lpref - shift)) * d1
    f2 = np.exp(le2) * d2
    denom = w1[:, None] - tau * w2[None, :]
    total = f1 @ (1.0 / denom) @ f2
    return complex(total * math.exp(min(shift, 709.0)))


# ---------------------------------------------------------------------------
# trace of the kernel diagonal over the plane
# ---------------------------------------------------------------------------

def kernel_trace(p: EnsembleParams, nodes_per_axis=400, pad=2.0):
    """Quadrature of K_n^tau(z, z) over the plane; equals n exactly.

    Tensor Gauss-Legendre on the bounding box of the spectral ellipse plus
    ``pad`` on each side; the density decays super-Gaussianly outside.
    """
    ax = (1.0 + p.tau) + pad
    ay = (1.0 - p.tau) + pad
    x, wx = np.polynomial.legendre.leggauss(nodes_per_axis)
    xi = ax * x
    eta = ay * x
    wxi = ax * wx
    weta = ay * wx
    scale = math.sqrt(p.n / (2.0 * p.tau))
    XI, ETA = np.meshgrid(xi, eta, indexing="ij")
    z = scale * (XI + 1j * ETA)
    lw = 2.0 * _log_weight(p, XI, ETA)
    s = weighted_hermite_sum(p.n, p.tau, z, np.conj(z), lw)
    diag = s.to_complex().real * _kernel_prefactor(p)
    return float(np.einsum("i,j,ij->", wxi, weta, diag))
