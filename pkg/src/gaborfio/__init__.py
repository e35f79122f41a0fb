"""Finite-dimensional Gabor frames, FIOs, and warped Gabor multipliers."""

from .core import (Grid, Signal, PhasePoint, Weight, translate, modulate,
                   tf_shift, tf_shift_inverse, commutation_phase, stft,
                   weight_eval, inner, random_signal,
                   GridRepresentabilityError)
from .frames import (Lattice, GaborFrameSpec, enumerate_lattice,
                     separable_lattice, frame_operator, frame_bounds,
                     canonical_tight_window, dual_window, tighten, analysis,
                     synthesis, gabor_mod_norm, warped_frame_check,
                     LatticeError, NotAFrameError, is_frame, is_parseval)
from .phases import (TamePhase, CanonicalMap, linear_phase, dilation_phase,
                     chirp_phase, perturbed_phase, canonical_map,
                     tameness_audit, symplectic_audit, chi_prime,
                     chi_prime_table, chi_prime_displacement_bound,
                     weight_transport_audit, NewtonDivergenceError)
from .fio import (SymbolTable, FioOperator, GaborMatrix, make_fio, apply_fio,
                  fio_matrix, gabor_matrix, decay_envelope_fit,
                  envelope_function_audit, transport_argmax_check,
                  constant_symbol, bandlimited_symbol, weighted_symbol,
                  InsufficientDecayRangeError)
from .multiplier import (GaborMultiplier, MultiplierSymbolTable,
                         apply_multiplier, multiplier_matrix,
                         multiplier_norm_check, extract_symbols,
                         assemble_truncated, truncation_error_curve,
                         full_nu_radius, warp_indices,
                         ExtractionRadiusError)
from .diagnostics import (DecayReport, NormEstimate, loglog_fit,
                          operator_norm, moderate_audit, write_report)
from .windows import make_window, gaussian_window, bspline_window, box_window

__version__ = "0.1.0"
