"""Physical parameters, unit conventions, and derived quantities.

All internal quantities are strict SI (amperes, seconds, rad/s). The CLI
accepts the usual lab units (mA, GHz, ps, THz) and converts at the boundary;
nothing below this module ever sees a non-SI number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, replace
from pathlib import Path

# 2019 SI exact / defined values
ELEMENTARY_CHARGE = 1.602176634e-19  # C
HBAR = 1.054571817e-34               # J s


@dataclass(frozen=True)
class LaserParams:
    """Physical constants of a single-mode laser diode.

    Defaults reproduce a 1550 nm DFB device with ~10 mA threshold.
    """

    tau_ph: float = 1.0e-12      # photon lifetime [s]
    tau_e: float = 1.0e-9        # electron lifetime [s]
    eta_d: float = 0.3           # differential quantum output
    n_tr: float = 6.0e7          # transparency carrier number
    n_th: float = 6.5e7          # threshold carrier number
    c_sp: float = 1.0e-5         # spontaneous emission coupling factor
    gamma_conf: float = 0.12     # confinement factor
    alpha_henry: float = 6.0     # linewidth enhancement factor
    omega0: float = 2.0 * math.pi * 193.548e12  # central angular frequency [rad/s]
    gamma_p: float = 20.0        # gain compression w.r.t. output power [1/W]

    def __post_init__(self):
        if not (self.tau_ph > 0 and self.tau_e > 0):
            raise ValueError("lifetimes must be strictly positive")
        if not (self.n_tr > 0 and self.n_th > 0 and self.n_th > self.n_tr):
            raise ValueError("carrier numbers must be positive with n_th > n_tr")
        # c_sp = 0 is admitted so noise-free integrations are expressible
        if not (0 <= self.c_sp <= 1):
            raise ValueError("c_sp must be in [0, 1]")
        if not (0 < self.gamma_conf <= 1):
            raise ValueError("gamma_conf must be in (0, 1]")
        if not (0 < self.eta_d <= 1):
            raise ValueError("eta_d must be in (0, 1]")
        if self.gamma_p < 0:
            raise ValueError("gamma_p must be >= 0")
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")


@dataclass(frozen=True)
class PumpWaveform:
    """Square-wave pump: I(t) steps between i_b and i_b + i_p.

    The period starts at the rising edge; the high level lasts duty * T_p.
    ``i_b`` is the minimum of the pump current. The experimental midpoint
    convention i_b_exp = i_b + i_p/2 is handled by :func:`bias_from_midpoint`.
    """

    i_b: float                   # bias current [A]
    i_p: float                   # modulation peak-to-peak current [A]
    f_p: float                   # pulse repetition frequency [Hz]
    duty: float = 0.5            # fraction of the period at the high level

    def __post_init__(self):
        if self.i_b < 0 or self.i_p < 0:
            raise ValueError("currents must be non-negative")
        if self.f_p <= 0:
            raise ValueError("f_p must be positive")
        if not (0 < self.duty < 1):
            raise ValueError("duty must be in (0, 1)")

    @property
    def period(self) -> float:
        return 1.0 / self.f_p


@dataclass(frozen=True)
class SimGrid:
    """Integration step, warm-up policy, and Monte-Carlo ensemble settings."""

    dt: float = 5.0e-14          # integration step [s]
    n_periods_warmup: int = 10   # discarded noiseless warm-up periods
    n_iterations: int = 50_000   # Monte-Carlo ensemble size
    master_seed: int = 12345     # 64-bit seed

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if self.n_periods_warmup < 1:
            raise ValueError("n_periods_warmup must be >= 1")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValueError("master_seed must fit in 64 bits")

    def check_step(self, p: LaserParams) -> None:
        """Enforce the stability bound dt < 0.1 * tau_ph."""
        if self.dt >= 0.1 * p.tau_ph:
            raise ValueError(
                f"dt={self.dt:g} s violates the step bound dt < 0.1*tau_ph "
                f"({0.1 * p.tau_ph:g} s)"
            )


def threshold_current(p: LaserParams) -> float:
    """Threshold current I_th = n_th * e / tau_e in amperes."""
    return p.n_th * ELEMENTARY_CHARGE / p.tau_e


def gamma_q_from_gamma_p(p: LaserParams) -> float:
    """Dimensionless gain compression factor from the per-watt one.

    gamma_q = gamma_p * eta_d * hbar * omega0 / (2 * gamma_conf * tau_ph).
    """
    return p.gamma_p * p.eta_d * HBAR * p.omega0 / (2.0 * p.gamma_conf * p.tau_ph)


def gamma_p_from_gamma_q(gamma_q: float, p: LaserParams) -> float:
    """Inverse of :func:`gamma_q_from_gamma_p` for the same laser."""
    if gamma_q < 0:
        raise ValueError("gamma_q must be >= 0")
    return gamma_q * 2.0 * p.gamma_conf * p.tau_ph / (p.eta_d * HBAR * p.omega0)


def bias_from_midpoint(i_b_exp: float, i_p: float) -> float:
    """Convert the midpoint bias convention to the minimum-current one."""
    return i_b_exp - 0.5 * i_p


# JSON parameter files use boundary units matching the data-sheet habit:
# ps and ns lifetimes, THz optical frequency, 1/W compression.
_JSON_FIELDS = {
    "tau_ph_ps": ("tau_ph", 1e-12),
    "tau_e_ns": ("tau_e", 1e-9),
    "eta_d": ("eta_d", 1.0),
    "n_tr": ("n_tr", 1.0),
    "n_th": ("n_th", 1.0),
    "c_sp": ("c_sp", 1.0),
    "gamma_conf": ("gamma_conf", 1.0),
    "alpha_henry": ("alpha_henry", 1.0),
    "nu0_thz": ("omega0", 2.0 * math.pi * 1e12),
    "gamma_p_per_w": ("gamma_p", 1.0),
}


def load_laser_params(path: str | Path, overrides: dict | None = None) -> LaserParams:
    """Load a LaserParams JSON file, applying optional field overrides.

    The file holds boundary-unit keys (see :data:`_JSON_FIELDS`); overrides
    use the same keys and win over file values. Unknown keys are an error.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a JSON object")
    if overrides:
        raw = {**raw, **overrides}
    kwargs = {}
    for key, value in raw.items():
        if key not in _JSON_FIELDS:
            raise ValueError(f"unknown laser parameter {key!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"laser parameter {key!r} must be a number")
        field, scale = _JSON_FIELDS[key]
        kwargs[field] = float(value) * scale
    return replace(LaserParams(), **kwargs)


def dump_laser_params(p: LaserParams) -> dict:
    """Render LaserParams back into the boundary-unit JSON schema."""
    si = asdict(p)
    out = {}
    for key, (field, scale) in _JSON_FIELDS.items():
        out[key] = si[field] / scale
    return out
