"""Gaussian-pulse propagation through the on-chip interferometer cascade.

The chip chains four balanced Mach-Zehnder couplers (phases phi_c, set by
thermo-optic heaters) with three unbalanced stages whose delay lines are
200, 400, and 800 ps. Propagation applies the stage recursion literally on
a sampled complex field; delays must be integer multiples of the sample
step so time shifts are exact and the named phase recipes match their
closed forms to double precision.

Output ports are labeled so that the all-phases-zero configuration exits
on "+"; reported intensities are normalized to the peak of the
all-delay-lines-closed configuration (the 1/4 input-stage prefactor makes
the absolute scale arbitrary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_DEFAULT_DELAYS = (200e-12, 400e-12, 800e-12)

# |closed-config field|^2 peaks at |E_in|^2/4; reported intensities divide
# that out.
_INTENSITY_NORM = 4.0


@dataclass(frozen=True)
class CascadeConfig:
    """Heater phases, delay-line values, and the input pulse width."""

    phi_c: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    phi_u: tuple[float, float, float] = (0.0, 0.0, 0.0)
    delays: tuple[float, float, float] = _DEFAULT_DELAYS
    pulse_width_w: float = 20e-12

    def __post_init__(self):
        if len(self.phi_c) != 4 or len(self.phi_u) != 3 or len(self.delays) != 3:
            raise ValueError("need 4 balanced phases, 3 unbalanced, 3 delays")
        if any(d <= 0 for d in self.delays):
            raise ValueError("delays must be positive")
        if list(self.delays) != sorted(self.delays):
            raise ValueError("delays must be ordered ascending")
        if self.pulse_width_w <= 0:
            raise ValueError("pulse width must be positive")


@dataclass
class FieldTrace:
    """Sampled complex fields at the two output ports."""

    t: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray

    def intensities(self, normalized: bool = True):
        scale = _INTENSITY_NORM if normalized else 1.0
        return (scale * np.abs(self.e_plus) ** 2,
                scale * np.abs(self.e_minus) ** 2)

    def energy(self) -> float:
        dt = self.t[1] - self.t[0]
        return float(np.sum(np.abs(self.e_plus) ** 2
                            + np.abs(self.e_minus) ** 2) * dt)


def make_time_grid(cfg: CascadeConfig, dt: float | None = None,
                   pad: float = 6.0) -> np.ndarray:
    """Sampling grid covering the input pulse and all delayed copies.

    dt defaults to w/20 and is refined so every delay is an integer
    number of samples (exact shifts keep the recipe checks at double
    precision).
    """
    w = cfg.pulse_width_w
    if dt is None:
        dt = w / 20.0
    base = min(cfg.delays)
    dt = base / math.ceil(base / dt)
    for d in cfg.delays:
        if abs(d / dt - round(d / dt)) > 1e-6:
            raise ValueError(
                f"delay {d:g} s is not an integer multiple of dt={dt:g} s; "
                "pass a commensurate dt")
    t_lo = -pad * w
    t_hi = sum(cfg.delays) + pad * w
    n = int(math.ceil((t_hi - t_lo) / dt)) + 1
    return t_lo + dt * np.arange(n)


def _shift(e: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(e)
    if k == 0:
        out[:] = e
    else:
        out[k:] = e[:-k]
    return out


def _couple(a: np.ndarray, b: np.ndarray, phase: float):
    """Lossless 2x2 coupler: (a +- b e^{i phase}) / sqrt(2)."""
    rot = b * np.exp(1j * phase)
    inv = 1.0 / math.sqrt(2.0)
    return inv * (a + rot), inv * (a - rot)


def input_field(t: np.ndarray, w: float) -> np.ndarray:
    """Gaussian input with |E|^2 = exp(-t^2 / (2 w^2))."""
    return np.exp(-t ** 2 / (4.0 * w ** 2)).astype(complex)


def propagate(cfg: CascadeConfig, t: np.ndarray | None = None) -> FieldTrace:
    """Run the seven-stage recursion for one input pulse."""
    if t is None:
        t = make_time_grid(cfg)
    t = np.asarray(t, dtype=float)
    dt = t[1] - t[0]
    w = cfg.pulse_width_w
    if t[0] > -5.0 * w or t[-1] < sum(cfg.delays) + 5.0 * w:
        raise ValueError("time grid must extend 5 pulse widths past the "
                         "input pulse and the largest cumulative delay")
    shifts = []
    for d in cfg.delays:
        k = round(d / dt)
        if abs(d / dt - k) > 1e-6:
            raise ValueError(f"delay {d:g} s is not a multiple of the grid step")
        shifts.append(int(k))

    e_in = input_field(t, w)
    pc, pu = cfg.phi_c, cfg.phi_u
    e12p = 0.25 * e_in * (1.0 + np.exp(1j * pc[0]))
    e12m = 0.25 * e_in * (1.0 - np.exp(1j * pc[0]))
    e23p, e23m = _couple(_shift(e12m, shifts[0]), e12p, pu[0])
    e34p, e34m = _couple(e23m, e23p, pc[1])
    e45p, e45m = _couple(_shift(e34m, shifts[1]), e34p, pu[1])
    e56p, e56m = _couple(e45m, e45p, pc[2])
    e67p, e67m = _couple(_shift(e56m, shifts[2]), e56p, pu[2])
    outp, outm = _couple(e67m, e67p, pc[3])
    # port labels follow the detector convention (all-zero config -> "+")
    return FieldTrace(t=t, e_plus=outm, e_minus=outp)


_RECIPES = {
    "closed": (0.0, math.pi, math.pi, 0.0),
    "d800": (0.0, math.pi, 0.5 * math.pi, 0.5 * math.pi),
    "d400": (0.0, 0.5 * math.pi, 0.5 * math.pi, 0.0),
}


def delay_line_config(selection: str, delays=_DEFAULT_DELAYS,
                      pulse_width_w: float = 20e-12) -> CascadeConfig:
    """Balanced-phase recipe selecting a delay line (or closing them all)."""
    if selection not in _RECIPES:
        raise ValueError(f"unknown selection {selection!r}; "
                         f"choose from {sorted(_RECIPES)}")
    return CascadeConfig(phi_c=_RECIPES[selection], delays=tuple(delays),
                         pulse_width_w=pulse_width_w)


def closed_form_intensities(selection: str, t: np.ndarray, w: float,
                            delays=_DEFAULT_DELAYS):
    """Normalized output intensities predicted for a named recipe."""
    t = np.asarray(t, dtype=float)
    _, dt2, dt3 = delays

    def g(shift):
        return np.exp(-(t - shift) ** 2 / (4.0 * w ** 2))

    if selection == "closed":
        return np.exp(-t ** 2 / (2.0 * w ** 2)), np.zeros_like(t)
    if selection == "d800":
        pair = 0.25 * (g(0.0) + g(dt3)) ** 2
        return pair, pair
    if selection == "d400":
        return (0.25 * (g(0.0) + g(dt2)) ** 2,
                0.25 * (g(dt3) + g(dt2 + dt3)) ** 2)
    raise ValueError(f"no closed form for {selection!r}")


def verify_closed_form(cfg: CascadeConfig, t: np.ndarray | None = None) -> float:
    """Max |simulated - closed-form| normalized intensity for a recipe."""
    for name, phases in _RECIPES.items():
        if np.allclose(cfg.phi_c, phases, atol=1e-12) and \
                not np.any(np.asarray(cfg.phi_u)):
            break
    else:
        raise ValueError("config does not match a named recipe")
    trace = propagate(cfg, t)
    ip, im = trace.intensities()
    ref_p, ref_m = closed_form_intensities(name, trace.t, cfg.pulse_width_w,
                                           cfg.delays)
    return float(max(np.max(np.abs(ip - ref_p)), np.max(np.abs(im - ref_m))))
