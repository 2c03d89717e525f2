from hcm_modem.aco_ofdm import aco_demodulate, aco_frame, aco_map, aco_modulate, qam_demap, qam_map
from hcm_modem.channel import AwgnSource, FirChannel, HardLimiter, hard_limit, power_normalize
from hcm_modem.config import ModemConfig, Scheme, SweepSpec
from hcm_modem.hcm import (Interleaver, add_cyclic_prefix, dcr_encode, deinterleave, hcm_decode, hcm_encode,
                           interleave, pam_demap, pam_map, strip_cyclic_prefix)
from hcm_modem.interleaver_opt import (BerDesign, design_gain, isi_cost, load_interleaver, optimize_interleaver,
                                       save_interleaver)
from hcm_modem.sim import BerCurve, BerPoint, Simulator
from hcm_modem.transforms import build_binary_hadamard, dft, fwht, idft, ifwht

__version__ = "0.1.0"

__all__ = [
    "Scheme", "ModemConfig", "SweepSpec",
    "build_binary_hadamard", "fwht", "ifwht", "dft", "idft",
    "pam_map", "pam_demap", "hcm_encode", "hcm_decode", "dcr_encode",
    "Interleaver", "interleave", "deinterleave", "add_cyclic_prefix", "strip_cyclic_prefix",
    "qam_map", "qam_demap", "aco_map", "aco_frame", "aco_modulate", "aco_demodulate",
    "HardLimiter", "power_normalize", "hard_limit", "FirChannel", "AwgnSource",
    "isi_cost", "optimize_interleaver", "BerDesign", "design_gain", "save_interleaver", "load_interleaver",
    "Simulator", "BerPoint", "BerCurve",
]
