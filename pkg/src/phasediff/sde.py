"""Monte-Carlo integration of the stochastic laser rate equations.

Estimates the phase-diffusion standard deviation sigma_phi over one pulse
period of a gain-switched laser. Trajectories are embarrassingly parallel;
each owns a counter-based noise substream keyed by (master_seed, index), so
estimates are bit-identical for a given backend regardless of worker count
or chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, streams
from .params import ELEMENTARY_CHARGE, LaserParams, PumpWaveform, SimGrid, \
    gamma_q_from_gamma_p

# Trajectories are integrated in fixed-size blocks to bound the memory of
# the pregenerated noise arrays; the block size cannot affect results.
_BLOCK = 512

# A warmed-up period counts as pulsed when max(Q)/min(Q) exceeds this.
PULSE_CONTRAST_MIN = 10.0


@dataclass(frozen=True)
class LaserState:
    """Instantaneous state of one trajectory."""

    n: float      # carrier number
    q: float      # normalized intracavity intensity
    phi: float    # optical phase [rad], never wrapped
    t: float = 0.0  # time [s]

    def __post_init__(self):
        if not (math.isfinite(self.n) and math.isfinite(self.q)
                and math.isfinite(self.phi) and math.isfinite(self.t)):
            raise ValueError("state fields must be finite")
        if self.n < 0 or self.q < 0:
            raise ValueError("n and q must be non-negative")


@dataclass(frozen=True)
class SigmaPhiEstimate:
    """Ensemble estimate of the one-period phase spread."""

    sigma_phi: float   # std of phi(T_p) - phi(0) [rad]
    std_err: float     # standard error of sigma_phi [rad]
    n_samples: int
    mean_phi: float    # ensemble mean drift [rad]

    def __post_init__(self):
        if self.sigma_phi < 0 or self.std_err < 0:
            raise ValueError("sigma_phi and std_err must be non-negative")


class WarmupError(RuntimeError):
    """Raised when noiseless warm-up fails to reach a periodic orbit."""


def _phys(p: LaserParams) -> tuple:
    return (p.tau_ph, p.tau_e, p.n_tr, p.n_th, p.c_sp, p.gamma_conf,
            p.alpha_henry, gamma_q_from_gamma_p(p))


def step(state: LaserState, p: LaserParams, pump_current: float, dt: float,
         xi1: float, xi2: float) -> LaserState:
    """One Euler-Maruyama update; the scalar reference for the kernels."""
    if not all(map(math.isfinite, (pump_current, dt, xi1, xi2))):
        raise ValueError("inputs must be finite")
    if dt <= 0 or dt >= 0.1 * p.tau_ph:
        raise ValueError("dt must satisfy 0 < dt < 0.1*tau_ph")
    gl = (state.n - p.n_tr) / (p.n_th - p.n_tr)
    gamma_q = gamma_q_from_gamma_p(p)
    g = gl / math.sqrt(1.0 + 2.0 * gamma_q * state.q)
    sqdt = math.sqrt(dt)
    sq = math.sqrt(state.q)
    a = math.sqrt(p.c_sp * state.n / (2.0 * p.tau_e))
    c = math.cos(state.phi)
    s = math.sin(state.phi)
    dq = ((g - 1.0) * state.q / p.tau_ph * dt + p.c_sp * state.n / p.tau_e * dt
          + 2.0 * a * sq * (xi1 * c + xi2 * s) * sqdt)
    dphi = 0.5 * p.alpha_henry / p.tau_ph * (gl - 1.0) * dt
    if sq > 0.0:
        dphi += (a / sq) * (xi2 * c - xi1 * s) * sqdt
    dn = (pump_current / ELEMENTARY_CHARGE - state.n / p.tau_e
          - state.q * g / (p.gamma_conf * p.tau_ph)) * dt
    return LaserState(n=max(state.n + dn, 0.0), q=max(state.q + dq, 0.0),
                      phi=state.phi + dphi, t=state.t + dt)


def steps_per_period(w: PumpWaveform, g: SimGrid) -> int:
    """Number of dt steps per period, with T_p snapped to the grid."""
    n = int(round(w.period / g.dt))
    if n < 2:
        raise ValueError("period shorter than two integration steps")
    if abs(n * g.dt - w.period) > 0.5 * g.dt:
        raise ValueError("period does not align with the integration grid")
    return n


def pump_trace(w: PumpWaveform, g: SimGrid) -> np.ndarray:
    """Per-step pump current over one period, rising edge at step 0."""
    n = steps_per_period(w, g)
    n_high = int(round(w.duty * n))
    pump = np.full(n, w.i_b)
    pump[:n_high] += w.i_p
    return pump


def simulate_period(initial: LaserState, p: LaserParams, w: PumpWaveform,
                    g: SimGrid, rng: np.random.Generator) -> LaserState:
    """Advance one trajectory by one pump period with spontaneous noise."""
    g.check_step(p)
    pump = pump_trace(w, g)
    n_steps = pump.shape[0]
    xi = rng.standard_normal((2, n_steps))
    n_tr_, q_tr_, phi_tr_ = kernels.em_trace(
        (initial.n, initial.q, initial.phi), pump, g.dt, _phys(p), xi[0], xi[1])
    return LaserState(n=n_tr_[-1], q=q_tr_[-1], phi=phi_tr_[-1],
                      t=initial.t + n_steps * g.dt)


def warmup(p: LaserParams, w: PumpWaveform, g: SimGrid,
           tol: float = 1e-6) -> tuple[LaserState, bool]:
    """Noiseless integration from a cold start to a periodic orbit.

    Runs g.n_periods_warmup periods with the stochastic terms off (the
    deterministic spontaneous seed stays on, otherwise the field never
    builds). Returns the warmed state and a pulse-contrast flag from the
    final period. Raises WarmupError if the period map has not converged
    to ``tol`` relative change in (N, Q).
    """
    g.check_step(p)
    pump = pump_trace(w, g)
    phys = _phys(p)
    state = (0.0, 0.0, 0.0)
    prev = state
    for _ in range(g.n_periods_warmup):
        prev = state
        n_tr_, q_tr_, phi_tr_ = kernels.em_trace(state, pump, g.dt, phys)
        state = (n_tr_[-1], q_tr_[-1], phi_tr_[-1])
    change = max(
        abs(state[0] - prev[0]) / max(abs(state[0]), 1.0),
        abs(state[1] - prev[1]) / max(abs(state[1]), 1e-30),
    )
    if change > tol:
        raise WarmupError(
            f"warm-up not periodic after {g.n_periods_warmup} periods "
            f"(relative change {change:.3g} > {tol:g})")
    q_min = float(np.min(q_tr_))
    q_max = float(np.max(q_tr_))
    pulsed = q_max > PULSE_CONTRAST_MIN * max(q_min, 1e-300)
    return LaserState(n=state[0], q=state[1], phi=state[2], t=0.0), pulsed


def _phase_increments(initial: LaserState, pump: np.ndarray, dt: float,
                      phys: tuple, n_iterations: int, master_seed: int) -> np.ndarray:
    """phi(T_p) - phi(0) for n_iterations independent trajectories."""
    n_steps = pump.shape[0]
    dphi = np.empty(n_iterations)
    for start in range(0, n_iterations, _BLOCK):
        count = min(_BLOCK, n_iterations - start)
        xi = streams.normal_block(master_seed, start, count, 2 * n_steps)
        xi1 = xi[:, :n_steps]
        xi2 = xi[:, n_steps:]
        final = kernels.em_ensemble(
            (initial.n, initial.q, initial.phi), pump, dt, phys, xi1, xi2)
        dphi[start:start + count] = final[:, 2] - initial.phi
    return dphi


def estimate_sigma_phi(p: LaserParams, w: PumpWaveform,
                       g: SimGrid) -> SigmaPhiEstimate:
    """Monte-Carlo estimate of the one-period phase diffusion spread.

    Warm-up removes transients; each trajectory then integrates a single
    noisy period from the common warmed state using its own substream.
    """
    initial, _ = warmup(p, w, g)
    pump = pump_trace(w, g)
    dphi = _phase_increments(initial, pump, g.dt, _phys(p),
                             g.n_iterations, g.master_seed)
    n = dphi.size
    if n < 2:
        return SigmaPhiEstimate(0.0, 0.0, n, float(np.mean(dphi)))
    sigma = float(np.std(dphi, ddof=1))
    std_err = sigma / math.sqrt(2.0 * (n - 1))
    return SigmaPhiEstimate(sigma, std_err, n, float(np.mean(dphi)))


@dataclass(frozen=True)
class SweepPoint:
    """One completed (or failed) bias point of a sigma_phi sweep."""

    i_b: float
    estimate: SigmaPhiEstimate | None
    pulses_detected: bool
    error: str | None = None


def sweep_bias(p: LaserParams, i_b_range, w_template: PumpWaveform,
               g: SimGrid) -> list[SweepPoint]:
    """Estimate sigma_phi for each bias current, ordered by i_b.

    Per-point failures (warm-up not periodic, invalid waveform) are
    recorded in the returned rows instead of aborting the sweep.
    """
    points = []
    for i_b in sorted(float(v) for v in i_b_range):
        w = PumpWaveform(i_b=i_b, i_p=w_template.i_p, f_p=w_template.f_p,
                         duty=w_template.duty)
        try:
            _, pulsed = warmup(p, w, g)
            est = estimate_sigma_phi(p, w, g)
            points.append(SweepPoint(i_b, est, pulsed))
        except (WarmupError, ValueError) as exc:
            points.append(SweepPoint(i_b, None, False, error=str(exc)))
    return points


def steady_state_oracle(p: LaserParams, i_const: float) -> tuple[float, float]:
    """Algebraic fixed point of the noiseless (c_sp = 0) rate equations.

    Solves G(N, Q) = 1 together with the carrier balance
    I/e = N/tau_e + Q G/(gamma_conf tau_ph) with a scalar root finder.
    Only valid above threshold, where the lasing fixed point exists.
    """
    from scipy.optimize import brentq

    gamma_q = gamma_q_from_gamma_p(p)

    def n_of_q(q):
        return p.n_tr + (p.n_th - p.n_tr) * math.sqrt(1.0 + 2.0 * gamma_q * q)

    def residual(q):
        return (i_const / ELEMENTARY_CHARGE - n_of_q(q) / p.tau_e
                - q / (p.gamma_conf * p.tau_ph))

    q_hi = p.gamma_conf * p.tau_ph * i_const / ELEMENTARY_CHARGE
    if residual(0.0) <= 0.0:
        raise ValueError("no lasing fixed point: current below threshold")
    q_ss = brentq(residual, 0.0, q_hi, xtol=1e-18, rtol=1e-15)
    return n_of_q(q_ss), q_ss
