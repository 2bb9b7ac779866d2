"""Euler-Maruyama kernels for the stochastic laser rate equations.

Two interchangeable backends integrate the same difference scheme: numba
compiled per-trajectory loops (default whenever numba imports) and a pure
numpy path vectorized across trajectories. Set PHASEDIFF_DISABLE_NUMBA=1,
or call :func:`set_backend`, to force the numpy path. Backends agree to
float rounding per step; see benchmarks/bench_sde_kernels.py for timings.

One step, with every right-hand-side quantity taken at step n:

    G_L = (N - n_tr) / (n_th - n_tr)
    G   = G_L / sqrt(1 + 2*gamma_q*Q)
    Q'   = Q + (G - 1)*Q*dt/tau_ph + c_sp*N*dt/tau_e
             + 2*sqrt(c_sp*N*Q/(2*tau_e)) * (xi1*cos(phi) + xi2*sin(phi)) * sqrt(dt)
    phi' = phi + (alpha/(2*tau_ph))*(G_L - 1)*dt
             + sqrt(c_sp*N/(2*tau_e*Q)) * (xi2*cos(phi) - xi1*sin(phi)) * sqrt(dt)
    N'   = N + (I/e - N/tau_e - G*Q/(gamma_conf*tau_ph))*dt

then N' and Q' are clamped at zero. The phase drift uses the uncompressed
G_L. While Q == 0 the phase noise term is suppressed (no field, no phase),
which also keeps the 1/sqrt(Q) coefficient finite.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .params import ELEMENTARY_CHARGE

try:
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


def _initial_backend() -> str:
    flag = os.environ.get("PHASEDIFF_DISABLE_NUMBA", "").strip().lower()
    if flag not in ("", "0", "false"):
        return "numpy"
    return "numba" if HAS_NUMBA else "numpy"


_BACKEND = _initial_backend()


def backend() -> str:
    """Currently selected kernel backend, "numba" or "numpy"."""
    return _BACKEND


def set_backend(name: str) -> None:
    """Select the kernel backend at runtime (overrides the env flag)."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


# physics parameters travel as a flat tuple of floats:
# (tau_ph, tau_e, n_tr, n_th, c_sp, gamma_conf, alpha, gamma_q)
_INV_E = 1.0 / ELEMENTARY_CHARGE


def _em_trace_py(n0, q0, phi0, pump, dt,
                 tau_ph, tau_e, n_tr, n_th, c_sp, gamma_conf, alpha, gamma_q,
                 xi1, xi2, n_out, q_out, phi_out):
    n_steps = pump.shape[0]
    sqdt = math.sqrt(dt)
    inv_dn = 1.0 / (n_th - n_tr)
    inv_tauph = 1.0 / tau_ph
    inv_taue = 1.0 / tau_e
    half_alpha = 0.5 * alpha * inv_tauph
    inv_gtph = 1.0 / (gamma_conf * tau_ph)
    half_inv_taue = 0.5 * inv_taue
    n = n0
    q = q0
    phi = phi0
    n_out[0] = n
    q_out[0] = q
    phi_out[0] = phi
    for k in range(n_steps):
        gl = (n - n_tr) * inv_dn
        g = gl / math.sqrt(1.0 + 2.0 * gamma_q * q)
        sq = math.sqrt(q)
        a = math.sqrt(c_sp * n * half_inv_taue)
        c = math.cos(phi)
        s = math.sin(phi)
        x1 = xi1[k]
        x2 = xi2[k]
        dq = ((g - 1.0) * q * inv_tauph * dt + c_sp * n * inv_taue * dt
              + 2.0 * a * sq * (x1 * c + x2 * s) * sqdt)
        dphi = half_alpha * (gl - 1.0) * dt
        if sq > 0.0:
            dphi += (a / sq) * (x2 * c - x1 * s) * sqdt
        dn = (pump[k] * _INV_E - n * inv_taue - q * g * inv_gtph) * dt
        n += dn
        q += dq
        phi += dphi
        if n < 0.0:
            n = 0.0
        if q < 0.0:
            q = 0.0
        n_out[k + 1] = n
        q_out[k + 1] = q
        phi_out[k + 1] = phi


_em_trace_nb = njit(cache=True)(_em_trace_py)


@njit(cache=True, parallel=True)
def _em_ensemble_nb(n0, q0, phi0, pump, dt,
                    tau_ph, tau_e, n_tr, n_th, c_sp, gamma_conf, alpha, gamma_q,
                    xi1, xi2, out):
    n_traj = xi1.shape[0]
    n_steps = pump.shape[0]
    sqdt = math.sqrt(dt)
    inv_dn = 1.0 / (n_th - n_tr)
    inv_tauph = 1.0 / tau_ph
    inv_taue = 1.0 / tau_e
    half_alpha = 0.5 * alpha * inv_tauph
    inv_gtph = 1.0 / (gamma_conf * tau_ph)
    half_inv_taue = 0.5 * inv_taue
    for i in prange(n_traj):
        n = n0
        q = q0
        phi = phi0
        for k in range(n_steps):
            gl = (n - n_tr) * inv_dn
            g = gl / math.sqrt(1.0 + 2.0 * gamma_q * q)
            sq = math.sqrt(q)
            a = math.sqrt(c_sp * n * half_inv_taue)
            c = math.cos(phi)
            s = math.sin(phi)
            x1 = xi1[i, k]
            x2 = xi2[i, k]
            dq = ((g - 1.0) * q * inv_tauph * dt + c_sp * n * inv_taue * dt
                  + 2.0 * a * sq * (x1 * c + x2 * s) * sqdt)
            dphi = half_alpha * (gl - 1.0) * dt
            if sq > 0.0:
                dphi += (a / sq) * (x2 * c - x1 * s) * sqdt
            dn = (pump[k] * _INV_E - n * inv_taue - q * g * inv_gtph) * dt
            n += dn
            q += dq
            phi += dphi
            if n < 0.0:
                n = 0.0
            if q < 0.0:
                q = 0.0
        out[i, 0] = n
        out[i, 1] = q
        out[i, 2] = phi


def _em_ensemble_np(n0, q0, phi0, pump, dt,
                    tau_ph, tau_e, n_tr, n_th, c_sp, gamma_conf, alpha, gamma_q,
                    xi1, xi2, out):
    n_traj, n_steps = xi1.shape
    sqdt = math.sqrt(dt)
    inv_dn = 1.0 / (n_th - n_tr)
    inv_tauph = 1.0 / tau_ph
    inv_taue = 1.0 / tau_e
    half_alpha = 0.5 * alpha * inv_tauph
    inv_gtph = 1.0 / (gamma_conf * tau_ph)
    half_inv_taue = 0.5 * inv_taue
    n = np.full(n_traj, float(n0))
    q = np.full(n_traj, float(q0))
    phi = np.full(n_traj, float(phi0))
    zeros = np.zeros(n_traj)
    for k in range(n_steps):
        gl = (n - n_tr) * inv_dn
        g = gl / np.sqrt(1.0 + 2.0 * gamma_q * q)
        sq = np.sqrt(q)
        a = np.sqrt(c_sp * n * half_inv_taue)
        c = np.cos(phi)
        s = np.sin(phi)
        x1 = xi1[:, k]
        x2 = xi2[:, k]
        dq = ((g - 1.0) * q * inv_tauph * dt + c_sp * n * inv_taue * dt
              + 2.0 * a * sq * (x1 * c + x2 * s) * sqdt)
        coeff = np.divide(a, sq, out=zeros.copy(), where=sq > 0.0)
        dphi = half_alpha * (gl - 1.0) * dt + coeff * (x2 * c - x1 * s) * sqdt
        dn = (pump[k] * _INV_E - n * inv_taue - q * g * inv_gtph) * dt
        n = np.maximum(n + dn, 0.0)
        q = np.maximum(q + dq, 0.0)
        phi = phi + dphi
    out[:, 0] = n
    out[:, 1] = q
    out[:, 2] = phi


def em_ensemble(initial, pump, dt, phys, xi1, xi2) -> np.ndarray:
    """Integrate an ensemble sharing one initial state and pump trace.

    Parameters
    ----------
    initial : (n0, q0, phi0) floats shared by all trajectories.
    pump : (n_steps,) pump current per step [A].
    dt : step [s].
    phys : flat tuple (tau_ph, tau_e, n_tr, n_th, c_sp, gamma_conf,
        alpha, gamma_q).
    xi1, xi2 : (n_traj, n_steps) standard-normal deviates.

    Returns (n_traj, 3) final [N, Q, phi] per trajectory.
    """
    xi1 = np.ascontiguousarray(xi1)
    xi2 = np.ascontiguousarray(xi2)
    if xi1.shape != xi2.shape or xi1.shape[1] != pump.shape[0]:
        raise ValueError("noise arrays must be (n_traj, n_steps) matching pump")
    out = np.empty((xi1.shape[0], 3))
    fn = _em_ensemble_nb if _BACKEND == "numba" else _em_ensemble_np
    fn(float(initial[0]), float(initial[1]), float(initial[2]),
       np.ascontiguousarray(pump, dtype=np.float64), float(dt), *map(float, phys),
       xi1, xi2, out)
    return out


def em_trace(initial, pump, dt, phys, xi1=None, xi2=None):
    """Integrate one trajectory, recording the state after every step.

    xi1/xi2 default to zeros (noiseless run). Returns (n, q, phi) arrays
    of length n_steps + 1; entry 0 is the initial state.
    """
    n_steps = pump.shape[0]
    if xi1 is None:
        xi1 = np.zeros(n_steps)
    if xi2 is None:
        xi2 = np.zeros(n_steps)
    xi1 = np.ascontiguousarray(xi1, dtype=np.float64)
    xi2 = np.ascontiguousarray(xi2, dtype=np.float64)
    if xi1.shape != (n_steps,) or xi2.shape != (n_steps,):
        raise ValueError("noise arrays must be (n_steps,) matching pump")
    n_out = np.empty(n_steps + 1)
    q_out = np.empty(n_steps + 1)
    phi_out = np.empty(n_steps + 1)
    fn = _em_trace_nb if _BACKEND == "numba" else _em_trace_py
    fn(float(initial[0]), float(initial[1]), float(initial[2]),
       np.ascontiguousarray(pump, dtype=np.float64), float(dt), *map(float, phys),
       xi1, xi2, n_out, q_out, phi_out)
    return n_out, q_out, phi_out
