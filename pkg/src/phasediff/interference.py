"""Statistics of the normalized integral interference signal of pulse pairs.

The signal model for two interfering laser pulses is

    S = s1 + s2 + 2*eta*sqrt(s1*s2)*cos(dphi) + zeta

with pulse-energy factors s1, s2 ~ N(mean, sigma_s^2), detector noise
zeta ~ N(0, sigma_zeta^2), and a phase difference dphi that is either
uniform (fully randomized phase) or Gaussian N(delta_theta, sigma_phi^2).
This module provides the analytic densities on the support
[S_min, S_max] = [s1+s2 -+ 2*eta*sqrt(s1*s2)], their CDFs and medians,
deterministic Monte-Carlo sampling, and closed-form fringe moments.

All Gaussian-phase densities reduce to rapidly converging Jacobi theta
series with nome q = exp(-sigma_phi^2/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams

# Theta series are truncated at the first term with q^(j^2) below this;
# the neglected tail is smaller than 2*q^(J^2)/(1 - q) in absolute value.
THETA_FLOOR = 1e-16

_SAMPLE_CHUNK = 1 << 16


@dataclass(frozen=True)
class InterferenceParams:
    """Parameters of the interference-signal statistics."""

    sigma_phi: float            # phase-diffusion std [rad]
    delta_theta: float = 0.0    # interferometer phase omega0*DT [rad]
    sigma_s: float = 0.0        # std of the pulse-energy factors
    sigma_zeta: float = 0.0     # std of additive detector noise
    eta: float = 1.0            # visibility
    s1_mean: float = 1.0
    s2_mean: float = 1.0
    jitter_phase_std: float = 0.0  # optional per-sample phase jitter, 0 = off

    def __post_init__(self):
        if self.sigma_phi < 0:
            raise ValueError("sigma_phi must be >= 0")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must be in [0, 1]")
        if self.sigma_s < 0 or self.sigma_zeta < 0 or self.jitter_phase_std < 0:
            raise ValueError("noise widths must be >= 0")
        if self.s1_mean < 0 or self.s2_mean < 0:
            raise ValueError("mean pulse energies must be >= 0")

    @property
    def s_min(self) -> float:
        return self.s1_mean + self.s2_mean - 2.0 * self.eta * math.sqrt(
            self.s1_mean * self.s2_mean)

    @property
    def s_max(self) -> float:
        return self.s1_mean + self.s2_mean + 2.0 * self.eta * math.sqrt(
            self.s1_mean * self.s2_mean)


def integral_signal(s1: float, s2: float, eta: float, delta_phi):
    """Noise-free integral interference signal for given pulse energies."""
    if np.any(np.asarray(s1) < 0) or np.any(np.asarray(s2) < 0):
        raise ValueError("pulse energies must be >= 0")
    if not (0.0 <= eta <= 1.0):
        raise ValueError("eta must be in [0, 1]")
    return s1 + s2 + 2.0 * eta * np.sqrt(s1 * s2) * np.cos(delta_phi)


def visibility_from_jitter(delta_t: float, w: float) -> float:
    """Interference visibility for pulse overlap jitter delta_t, rms width w."""
    if w <= 0:
        raise ValueError("pulse width w must be positive")
    return math.exp(-delta_t ** 2 / (8.0 * w ** 2))


def jacobi_theta(u, q: float, tol: float = THETA_FLOOR):
    """Theta sum 1 + 2*sum_j q^(j^2) cos(2*j*u), truncated adaptively.

    Terms are added until q^(j^2) < tol * |current sum|; each term is
    bounded by 2*q^(j^2), so the discarded tail is below
    2*q^(J^2)/(1 - q^(2J+1)).
    """
    if not (0.0 <= q < 1.0):
        raise ValueError("q must be in [0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = np.asarray(u, dtype=float)
    total = np.ones_like(u)
    j = 1
    while True:
        term = q ** (j * j)
        if term < tol * max(float(np.max(np.abs(total))), 1.0):
            break
        total = total + 2.0 * term * np.cos(2.0 * j * u)
        j += 1
    return total if total.ndim else float(total)


def _nome(sigma_phi: float) -> float:
    return math.exp(-0.5 * sigma_phi * sigma_phi)


def _theta_coeffs(sigma_phi: float, delta_theta: float,
                  floor: float = THETA_FLOOR) -> np.ndarray:
    """Coefficients c_j = q^(j^2) cos(j*delta_theta), j = 1..J."""
    if sigma_phi <= 0:
        raise ValueError("sigma_phi must be positive for the theta series")
    q = _nome(sigma_phi)
    coeffs = []
    j = 1
    while True:
        term = q ** (j * j)
        if term < floor:
            break
        coeffs.append(term * math.cos(j * delta_theta))
        j += 1
    return np.asarray(coeffs)


def _support(s1: float, s2: float, eta: float) -> tuple[float, float]:
    cross = 2.0 * eta * math.sqrt(s1 * s2)
    return s1 + s2 - cross, s1 + s2 + cross


def quantum_pdf(y, s1: float = 1.0, s2: float = 1.0, eta: float = 1.0):
    """Arcsine density of the signal under fully randomized phase."""
    s_min, s_max = _support(s1, s2, eta)
    y = np.asarray(y, dtype=float)
    if np.any(y <= s_min) or np.any(y >= s_max):
        raise ValueError("y outside the open support (S_min, S_max)")
    out = 1.0 / (math.pi * np.sqrt((y - s_min) * (s_max - y)))
    return out if out.ndim else float(out)


def phase_diff_pdf(x, sigma_phi: float, delta_theta: float):
    """Density on [0, pi) of the folded Gaussian phase difference.

    Folding wraps the N(delta_theta, sigma_phi^2) phase into the argument
    range that matters under a cosine; the result is a two-term theta sum,
    zero outside [0, pi).
    """
    coeffs = _theta_coeffs(sigma_phi, delta_theta)
    x = np.asarray(x, dtype=float)
    inside = (x >= 0.0) & (x < math.pi)
    val = np.ones_like(x)
    for j, c in enumerate(coeffs, start=1):
        val += 2.0 * c * np.cos(j * x)
    out = np.where(inside, val / math.pi, 0.0)
    return out if out.ndim else float(out)


def gaussian_phase_pdf(y, ip: InterferenceParams):
    """Signal density for Gaussian phase, via the theta-series closed form."""
    if ip.sigma_phi <= 0:
        raise ValueError("sigma_phi = 0 is a point mass; density undefined")
    s_min, s_max = ip.s_min, ip.s_max
    y = np.asarray(y, dtype=float)
    if np.any(y <= s_min) or np.any(y >= s_max):
        raise ValueError("y outside the open support (S_min, S_max)")
    a_y = np.arccos((2.0 * y - s_max - s_min) / (s_max - s_min))
    coeffs = _theta_coeffs(ip.sigma_phi, ip.delta_theta)
    series = np.ones_like(y)
    for j, c in enumerate(coeffs, start=1):
        series += 2.0 * c * np.cos(j * a_y)
    out = series / (math.pi * np.sqrt((y - s_min) * (s_max - y)))
    return out if out.ndim else float(out)


def _t_of_y(y, s_min: float, s_max: float):
    """Singularity-removing coordinate: y = s_min + (s_max-s_min)*sin^2(t/2)."""
    frac = np.clip((np.asarray(y, dtype=float) - s_min) / (s_max - s_min), 0.0, 1.0)
    return 2.0 * np.arcsin(np.sqrt(frac))


def signal_cdf(y, ip: InterferenceParams):
    """Closed-form CDF of the Gaussian-phase signal density."""
    coeffs = _theta_coeffs(ip.sigma_phi, ip.delta_theta)
    t = _t_of_y(y, ip.s_min, ip.s_max)
    val = np.asarray(t, dtype=float).copy()
    for j, c in enumerate(coeffs, start=1):
        sign = -1.0 if j % 2 else 1.0
        val += 2.0 * c * sign * np.sin(j * t) / j
    out = val / math.pi
    return out if out.ndim else float(out)


def quantum_cdf(y, s1: float = 1.0, s2: float = 1.0, eta: float = 1.0):
    """CDF of the arcsine (uniform-phase) density."""
    s_min, s_max = _support(s1, s2, eta)
    out = _t_of_y(y, s_min, s_max) / math.pi
    return out if out.ndim else float(out)


def threshold_s(ip: InterferenceParams, tol: float = 1e-8) -> float:
    """Median of the Gaussian-phase signal distribution, by bisection."""
    if ip.sigma_phi <= 0:
        raise ValueError("sigma_phi must be positive")
    lo, hi = ip.s_min, ip.s_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if signal_cdf(mid, ip) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sample_signal(ip: InterferenceParams, n: int, seed: int) -> np.ndarray:
    """Draw n deterministic signal samples from the full noise model.

    Sampling is chunked over counter-based substreams keyed by
    (seed, chunk index); the result is independent of chunking and safe
    to produce in parallel. Negative pulse-energy draws clamp to zero
    (probability < 1e-80 at sigma_s = 0.05).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n)
    for chunk, start in enumerate(range(0, n, _SAMPLE_CHUNK)):
        m = min(_SAMPLE_CHUNK, n - start)
        z = streams.substream(seed, chunk).standard_normal((5, m))
        dphi = (ip.delta_theta + ip.jitter_phase_std * z[4]
                + ip.sigma_phi * z[0])
        s1 = np.maximum(ip.s1_mean + ip.sigma_s * z[1], 0.0)
        s2 = np.maximum(ip.s2_mean + ip.sigma_s * z[2], 0.0)
        zeta = ip.sigma_zeta * z[3]
        out[start:start + m] = (s1 + s2 + 2.0 * ip.eta * np.sqrt(s1 * s2)
                                * np.cos(dphi) + zeta)
    return out


def sample_signal_uniform_phase(sigma_s: float, sigma_zeta: float, eta: float,
                                n: int, seed: int, s1_mean: float = 1.0,
                                s2_mean: float = 1.0) -> np.ndarray:
    """Signal samples with fully randomized (uniform) phase difference."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n)
    for chunk, start in enumerate(range(0, n, _SAMPLE_CHUNK)):
        m = min(_SAMPLE_CHUNK, n - start)
        rng = streams.substream(seed, chunk)
        z = rng.standard_normal((3, m))
        dphi = 2.0 * math.pi * rng.random(m)
        s1 = np.maximum(s1_mean + sigma_s * z[0], 0.0)
        s2 = np.maximum(s2_mean + sigma_s * z[1], 0.0)
        zeta = sigma_zeta * z[2]
        out[start:start + m] = (s1 + s2 + 2.0 * eta * np.sqrt(s1 * s2)
                                * np.cos(dphi) + zeta)
    return out


def fringe_moments(ip: InterferenceParams, delta_theta=None):
    """Mean and standard deviation of the signal versus interferometer phase.

    Gaussian moment algebra to second order in sigma_s, using
    E[cos dphi] = eta_phi cos(delta_theta) and
    E[cos 2 dphi] = eta_phi^4 cos(2 delta_theta) with
    eta_phi = exp(-sigma_eff^2/2); per-sample jitter widens sigma_eff.
    Validated against sample_signal Monte-Carlo (see tests).
    """
    theta = np.asarray(ip.delta_theta if delta_theta is None else delta_theta,
                       dtype=float)
    sig2 = ip.sigma_phi ** 2 + ip.jitter_phase_std ** 2
    eta_phi = math.exp(-0.5 * sig2)
    mu_c = eta_phi * np.cos(theta)
    e_c2 = 0.5 * (1.0 + eta_phi ** 4 * np.cos(2.0 * theta))
    s1m, s2m = ip.s1_mean, ip.s2_mean
    rbar = math.sqrt(s1m * s2m)
    mean = s1m + s2m + 2.0 * ip.eta * rbar * mu_c
    ss2 = ip.sigma_s ** 2
    if rbar > 0:
        corr = 0.25 * ss2 * (1.0 / s1m ** 2 + 1.0 / s2m ** 2)
        var_rc = s1m * s2m * (e_c2 - mu_c ** 2 * (1.0 - corr))
        cov = 2.0 * ip.eta * mu_c * rbar * ss2 * (1.0 / s1m + 1.0 / s2m)
    else:
        var_rc = e_c2 * ss2  # degenerate zero-mean pulses
        cov = 0.0
    var = 2.0 * ss2 + 4.0 * ip.eta ** 2 * var_rc + cov + ip.sigma_zeta ** 2
    std = np.sqrt(var)
    if np.ndim(theta) == 0:
        return float(mean), float(std)
    return mean, std


@dataclass
class PdfCurve:
    """Tabulated density with analytic masses for the cut endpoint regions."""

    grid: np.ndarray
    density: np.ndarray
    s_min: float
    s_max: float
    tail_lo: float = 0.0
    tail_hi: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.density.shape:
            raise ValueError("grid and density must be matching 1-d arrays")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.density < 0):
            raise ValueError("density must be non-negative")
        if not (self.s_min <= self.grid[0] and self.grid[-1] <= self.s_max):
            raise ValueError("grid must lie within [s_min, s_max]")

    def total_mass(self) -> float:
        return float(np.trapezoid(self.density, self.grid)
                     + self.tail_lo + self.tail_hi)

    def partial_mass(self, lo: float, hi: float) -> float:
        """Trapezoidal mass on [lo, hi] intersected with the grid range."""
        lo = max(lo, self.grid[0])
        hi = min(hi, self.grid[-1])
        if hi <= lo:
            return 0.0
        pts = self.grid[(self.grid > lo) & (self.grid < hi)]
        xs = np.concatenate(([lo], pts, [hi]))
        ys = np.interp(xs, self.grid, self.density)
        return float(np.trapezoid(ys, xs))


# Interior grids for analytic curves cut this far (in the t coordinate)
# from the singular support tips; the cut mass goes to the tail fields.
_T_EDGE = 0.02


def gaussian_phase_curve(ip: InterferenceParams, n: int = 4001) -> PdfCurve:
    """Tabulate the Gaussian-phase density on a singularity-adapted grid."""
    t = np.linspace(_T_EDGE, math.pi - _T_EDGE, n)
    d = ip.s_max - ip.s_min
    y = ip.s_min + d * np.sin(0.5 * t) ** 2
    density = gaussian_phase_pdf(y, ip)
    return PdfCurve(grid=y, density=density, s_min=ip.s_min, s_max=ip.s_max,
                    tail_lo=signal_cdf(y[0], ip),
                    tail_hi=1.0 - signal_cdf(y[-1], ip))


def quantum_curve(s1: float = 1.0, s2: float = 1.0, eta: float = 1.0,
                  n: int = 4001) -> PdfCurve:
    """Tabulate the arcsine density on the same adapted grid."""
    s_min, s_max = _support(s1, s2, eta)
    t = np.linspace(_T_EDGE, math.pi - _T_EDGE, n)
    y = s_min + (s_max - s_min) * np.sin(0.5 * t) ** 2
    density = quantum_pdf(y, s1, s2, eta)
    tail = _T_EDGE / math.pi
    return PdfCurve(grid=y, density=density, s_min=s_min, s_max=s_max,
                    tail_lo=tail, tail_hi=tail)


def curve_from_samples(x: np.ndarray, bins: int = 1024,
                       smooth: float | None = None) -> PdfCurve:
    """Histogram density of samples, optionally Gaussian-kernel smoothed.

    ``smooth`` is the kernel bandwidth in signal units.
    """
    x = np.asarray(x, dtype=float)
    counts, edges = np.histogram(x, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    density = counts / (x.size * width)
    if smooth is not None and smooth > 0:
        from scipy.ndimage import gaussian_filter1d

        density = gaussian_filter1d(density, sigma=smooth / width,
                                    mode="constant")
    return PdfCurve(grid=centers, density=density,
                    s_min=float(edges[0]), s_max=float(edges[-1]))
