"""Parameter extraction from conventional and statistical interference fringes.

Conventional fringes are the mean signal versus interferometer phase;
statistical fringes are its standard deviation versus phase. A mean-only
fringe can identify only the composite eta_eff = eta * exp(-sigma_phi^2/2)
(visibility and phase diffusion enter the mean identically); the joint fit
of both fringes against the closed-form moment model separates sigma_phi,
sigma_s, eta, and the detector noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc, t as student_t

from .interference import InterferenceParams, fringe_moments

_PARAM_NAMES = ("sigma_phi", "sigma_s", "eta", "phi0", "sigma_zeta")
_FIT_LO = np.array([1e-3, 0.0, 0.3, -math.pi, 0.0])
_FIT_HI = np.array([10.0, 0.3, 1.0, math.pi, 0.3])
# multi-start hypercube (narrower than the hard fit bounds)
_START_LO = np.array([0.1, 0.0, 0.5, -math.pi, 0.0])
_START_HI = np.array([6.0, 0.2, 1.0, math.pi, 0.2])


@dataclass(frozen=True)
class FringeDataset:
    """Fringe scan: phase (or temperature shift), mean, and std columns."""

    x: np.ndarray                      # delta_theta [rad] or shift [K]
    mean: np.ndarray
    std: np.ndarray | None = None
    x_unit: str = "rad"                # "rad" or "K"
    phase_per_kelvin: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        if self.std is not None:
            object.__setattr__(self, "std", np.asarray(self.std, dtype=float))
            if self.std.shape != self.x.shape:
                raise ValueError("std column must match x")
            if np.any(self.std < 0):
                raise ValueError("std values must be >= 0")
        if self.x.ndim != 1 or self.mean.shape != self.x.shape:
            raise ValueError("x and mean must be matching 1-d arrays")
        if self.x.size < 8:
            raise ValueError("fringe datasets need at least 8 points")
        if self.x_unit not in ("rad", "K"):
            raise ValueError("x_unit must be 'rad' or 'K'")

    def needs_slope_fit(self) -> bool:
        return self.x_unit == "K" and self.phase_per_kelvin is None

    def phase(self, slope: float | None = None) -> np.ndarray:
        """x column converted to radians."""
        if self.x_unit == "rad":
            return self.x
        k = self.phase_per_kelvin if slope is None else slope
        if k is None:
            raise ValueError("temperature data needs a phase_per_kelvin slope")
        return k * self.x


@dataclass(frozen=True)
class ConventionalFit:
    eta_eff: float
    phi0: float
    phi0_identifiable: bool
    residual_rms: float
    phase_per_kelvin: float | None = None


@dataclass
class FitResult:
    """Joint-fit output; covariance spans the free parameters only."""

    sigma_phi: float
    sigma_s: float
    eta: float
    phi0: float
    sigma_zeta: float
    residual_rms: float
    covariance: np.ndarray
    free_names: tuple[str, ...]
    stderr: dict = field(default_factory=dict)
    at_bounds: tuple[str, ...] = ()
    phase_per_kelvin: float | None = None

    def value(self, name: str) -> float:
        return getattr(self, name)


def sigma_from_visibility(eta: float) -> float:
    """Phase-diffusion spread sqrt(-2 ln eta) implied by a visibility."""
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must be in (0, 1]")
    return math.sqrt(-2.0 * math.log(eta))


def _fft_phase_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Initial rad-per-unit-x slope from the dominant fringe frequency."""
    y0 = y - np.mean(y)
    n = 8 * x.size
    spacing = float(np.mean(np.diff(x)))
    spec = np.abs(np.fft.rfft(y0, n))
    freqs = np.fft.rfftfreq(n, d=spacing)
    k = freqs[1 + int(np.argmax(spec[1:]))] * 2.0 * math.pi
    return max(k, 1e-6)


def _cosine_lsq(theta: np.ndarray, mean: np.ndarray):
    """Exact linear LSQ of mean = 2 + a cos(theta) + b sin(theta)."""
    design = np.column_stack([np.cos(theta), np.sin(theta)])
    coef, *_ = np.linalg.lstsq(design, mean - 2.0, rcond=None)
    a, b = coef
    resid = mean - 2.0 - design @ coef
    return a, b, float(np.sqrt(np.mean(resid ** 2)))


def fit_conventional(data: FringeDataset) -> ConventionalFit:
    """Fit mean(theta) = 2[1 + eta_eff cos(theta + phi0)].

    The amplitude/phase pair enters linearly once the abscissa is in
    radians, so the solve is exact; a temperature axis without a supplied
    slope adds one nonlinear parameter, seeded from the FFT of the fringe.
    """
    if data.needs_slope_fit():
        k0 = _fft_phase_slope(data.x, data.mean)

        def cost(log_k):
            _, _, rms = _cosine_lsq(math.exp(log_k[0]) * data.x, data.mean)
            return [rms]

        best = min(
            (least_squares(cost, [math.log(k0 * s)], method="lm")
             for s in (0.5, 1.0, 2.0)),
            key=lambda r: r.cost)
        slope = math.exp(best.x[0])
        theta = slope * data.x
    else:
        slope = data.phase_per_kelvin if data.x_unit == "K" else None
        theta = data.phase()
    a, b, rms = _cosine_lsq(theta, data.mean)
    amp = math.hypot(a, b)
    eta_eff = 0.5 * amp
    identifiable = amp > max(10.0 * rms / math.sqrt(data.x.size), 1e-12)
    phi0 = math.atan2(-b, a) if identifiable else 0.0
    return ConventionalFit(eta_eff=eta_eff, phi0=phi0,
                           phi0_identifiable=identifiable, residual_rms=rms,
                           phase_per_kelvin=slope)


def _moment_model(theta_fit: np.ndarray, x_phase: np.ndarray):
    sigma_phi, sigma_s, eta, phi0, sigma_zeta = theta_fit
    ip = InterferenceParams(sigma_phi=sigma_phi, sigma_s=sigma_s, eta=eta,
                            sigma_zeta=sigma_zeta)
    return fringe_moments(ip, delta_theta=x_phase + phi0)


def fit_joint(data: FringeDataset, fixed: dict | None = None,
              n_starts: int = 8, seed: int = 0) -> FitResult:
    """Joint least-squares fit of mean and std fringes to the moment model.

    Free parameters are (sigma_phi, sigma_s, eta, phi0, sigma_zeta) minus
    any pinned in ``fixed``; the statistical-fringe surface is multimodal,
    so the best of ``n_starts`` Latin-hypercube starts wins. Residual
    blocks are scaled by the RMS of their data column so neither fringe
    dominates. Parameters that finish on a bound are reported, not hidden.
    """
    if data.std is None:
        raise ValueError("joint fit needs the std column")
    fixed = dict(fixed or {})
    for name in fixed:
        if name not in _PARAM_NAMES:
            raise ValueError(f"unknown parameter {name!r}")
    free = [n for n in _PARAM_NAMES if n not in fixed]
    idx_free = [_PARAM_NAMES.index(n) for n in free]

    fit_slope = data.needs_slope_fit()
    k0 = _fft_phase_slope(data.x, data.mean) if fit_slope else None
    w_mean = max(float(np.sqrt(np.mean(data.mean ** 2))), 1e-12)
    w_std = max(float(np.sqrt(np.mean(data.std ** 2))), 1e-12)

    def unpack(vec):
        full = np.empty(5)
        for name, value in fixed.items():
            full[_PARAM_NAMES.index(name)] = value
        full[idx_free] = vec[:len(free)]
        slope = vec[len(free)] if fit_slope else data.phase_per_kelvin
        return full, slope

    def residuals(vec):
        full, slope = unpack(vec)
        phase = data.phase(slope) if data.x_unit == "K" else data.x
        mean, std = _moment_model(full, phase)
        return np.concatenate([(mean - data.mean) / w_mean,
                               (std - data.std) / w_std])

    lo = _FIT_LO[idx_free]
    hi = _FIT_HI[idx_free]
    s_lo = _START_LO[idx_free]
    s_hi = _START_HI[idx_free]
    if fit_slope:
        lo = np.append(lo, 0.2 * k0)
        hi = np.append(hi, 5.0 * k0)
        s_lo = np.append(s_lo, 0.7 * k0)
        s_hi = np.append(s_hi, 1.5 * k0)
    starts = qmc.LatinHypercube(d=len(s_lo), seed=seed).random(n_starts)
    starts = s_lo + starts * (s_hi - s_lo)

    best = None
    for x0 in starts:
        try:
            res = least_squares(residuals, x0, bounds=(lo, hi), method="trf",
                                xtol=1e-14, ftol=1e-14, gtol=1e-14,
                                max_nfev=4000)
        except ValueError:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not best.success and best.cost > 1e6:
        raise RuntimeError("joint fringe fit did not converge from any start")

    full, slope = unpack(best.x)
    n_res = 2 * data.x.size
    dof = max(n_res - best.x.size, 1)
    s2 = 2.0 * best.cost / dof
    jtj = best.jac.T @ best.jac
    cov = np.linalg.pinv(jtj) * s2
    stderr = {}
    names = list(free) + (["phase_per_kelvin"] if fit_slope else [])
    for i, name in enumerate(names):
        stderr[name] = float(np.sqrt(max(cov[i, i], 0.0)))
    span = hi - lo
    at_bounds = tuple(
        name for i, name in enumerate(names)
        if best.x[i] - lo[i] < 1e-8 * span[i] or hi[i] - best.x[i] < 1e-8 * span[i])
    return FitResult(
        sigma_phi=full[0], sigma_s=full[1], eta=full[2], phi0=full[3],
        sigma_zeta=full[4],
        residual_rms=float(np.sqrt(np.mean(residuals(best.x) ** 2))),
        covariance=cov, free_names=tuple(names), stderr=stderr,
        at_bounds=at_bounds,
        phase_per_kelvin=slope if data.x_unit == "K" else None)


@dataclass(frozen=True)
class LinearExtrapolation:
    """OLS line sigma(i_b_exp) with prediction band and regime crossings."""

    slope: float
    intercept: float
    residual_std: float
    n_points: int
    crossing_pi: float | None
    crossing_2pi: float | None
    x: np.ndarray
    y: np.ndarray
    band: np.ndarray                   # half-width of the 95% interval

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def extrapolate_sigma(i_b_exp, sigma, target_range=None) -> LinearExtrapolation:
    """Linear extrapolation of a sigma-versus-bias trend.

    Reports where the line crosses sigma = pi and 2*pi, plus a 95%
    prediction band over ``target_range`` (defaults to the data span
    stretched by half on both sides). Needs at least 3 points.
    """
    xv = np.asarray(i_b_exp, dtype=float)
    yv = np.asarray(sigma, dtype=float)
    if xv.size < 3 or xv.shape != yv.shape:
        raise ValueError("need at least 3 (i_b_exp, sigma) points")
    n = xv.size
    slope, intercept = np.polyfit(xv, yv, 1)
    resid = yv - (intercept + slope * xv)
    dof = n - 2
    s = math.sqrt(float(np.sum(resid ** 2)) / dof) if dof > 0 else 0.0
    sxx = float(np.sum((xv - xv.mean()) ** 2))
    if target_range is None:
        span = xv.max() - xv.min()
        target_range = (xv.min() - 0.5 * span, xv.max() + 0.5 * span)
    xs = np.linspace(target_range[0], target_range[1], 101)
    tq = float(student_t.ppf(0.975, dof)) if dof > 0 else 0.0
    band = tq * s * np.sqrt(1.0 + 1.0 / n + (xs - xv.mean()) ** 2 / sxx)

    def crossing(level):
        if slope == 0.0:
            return None
        return (level - intercept) / slope

    return LinearExtrapolation(
        slope=float(slope), intercept=float(intercept), residual_std=s,
        n_points=n, crossing_pi=crossing(math.pi),
        crossing_2pi=crossing(2.0 * math.pi),
        x=xs, y=intercept + slope * xs, band=band)


def ip_from_bend(i_b_exp_at_bend: float, i_th: float) -> float:
    """Peak-to-peak modulation current from the fringe-curve bend position.

    The bend sits where the minimum pump current equals threshold, so
    i_p_exp = 2 * (i_b_exp_at_bend - i_th).
    """
    result = 2.0 * (i_b_exp_at_bend - i_th)
    if result <= 0 and i_b_exp_at_bend != i_th:
        raise ValueError("bend current must exceed the threshold current")
    return max(result, 0.0)
