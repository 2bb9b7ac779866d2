"""Phase-diffusion laboratory for gain-switched semiconductor lasers.

Simulates phase diffusion with stochastic rate equations, provides the
analytic and Monte-Carlo statistics of the pulse-interference signal,
quantifies the quantum randomness budget, and fits interference fringes.
"""

from .params import (ELEMENTARY_CHARGE, HBAR, LaserParams, PumpWaveform,
                     SimGrid, gamma_p_from_gamma_q, gamma_q_from_gamma_p,
                     load_laser_params, threshold_current)
from .sde import (LaserState, SigmaPhiEstimate, estimate_sigma_phi,
                  simulate_period, step, sweep_bias)
from .interference import (InterferenceParams, PdfCurve, fringe_moments,
                           gaussian_phase_pdf, integral_signal, jacobi_theta,
                           phase_diff_pdf, quantum_pdf, sample_signal,
                           threshold_s, visibility_from_jitter)
from .entropy import (EntropyReport, UniformPhaseSignal, epsilon_q,
                      gamma_vs_b, lhl_epsilon_from_reduction,
                      lhl_output_length, min_entropy, qrf, qrf_corrected,
                      qrf_dispatch, statistical_distance,
                      statistical_distance_via_pdfs)
from .fringefit import (FitResult, FringeDataset, extrapolate_sigma,
                        fit_conventional, fit_joint, ip_from_bend,
                        sigma_from_visibility)
from .cascade import (CascadeConfig, FieldTrace, delay_line_config,
                      propagate, verify_closed_form)
from .ingest import Histogram, NormalizationRef, insertion_loss, \
    load_histogram, normalize

__version__ = "0.1.0"
