"""Delay-Doppler pulse-shaping lab: C-PS OTFS, L-PS OTFS and ODDM under
one modem, with an LTV channel, MMSE detection and PSD/BER tooling."""

from .channel import (ChannelMatrix, PathSet, add_awgn, apply_ltv, build_effective_matrix,
                      gen_eva, max_doppler)
from .equalizer import MMSEEqualizer, SingularChannelError, mmse_equalize
from .framing import (BasebandSignal, DelayDopplerFrame, GridGeometry, insert_zero_guards,
                      qam_demap, qam_map)
from .metrics import (BerPoint, ChannelSpec, OobReport, ebn0_to_noise_var, measure_oob,
                      run_ber_curve, run_ber_point, transmit_psd)
from .modem import ModemConfig, demodulate, modulate
from .pulses import Pulse, PulseSpec, check_nyquist, design_pulse

__version__ = "0.1.0"

__all__ = [
    "BasebandSignal", "BerPoint", "ChannelMatrix", "ChannelSpec", "DelayDopplerFrame",
    "GridGeometry", "MMSEEqualizer", "ModemConfig", "OobReport", "PathSet", "Pulse",
    "PulseSpec", "SingularChannelError", "add_awgn", "apply_ltv", "build_effective_matrix",
    "check_nyquist", "demodulate", "design_pulse", "ebn0_to_noise_var", "gen_eva",
    "insert_zero_guards", "max_doppler", "measure_oob", "mmse_equalize", "modulate",
    "qam_demap", "qam_map", "run_ber_curve", "run_ber_point", "transmit_psd",
]
