"""Hadamard coded modulation: PAM mapping, HCM / DC-removed HCM encoding, decoding, interleaving and cyclic prefix.

Every function works on the last axis, so a (symbols, N) array encodes or decodes a whole batch at once.
Waveforms are produced at unit amplitude scale; `hcm_modem.channel.power_normalize` scales them to a target average
optical power and reports the gain the receiver divides out before slicing.
"""
import functools
import logging
import math
import typing

import numpy as np

from hcm_modem import transforms
from hcm_modem.errors import (AmplitudeRangeError, BitCountError, CyclicPrefixError, InvalidLengthError,
                              InvalidPermutationError, ReservedSlotError)
from hcm_modem.utils import is_power_of_two

LOG = logging.getLogger(__name__)

DataVector = np.ndarray
Waveform = np.ndarray


def gray_encode(index):
    return index ^ (index >> 1)


class PamConstellation(typing.NamedTuple('PamConstellation', [
    ('m', int),
    ('levels', np.ndarray),
    ('labels', np.ndarray),
])):
    """M equally spaced levels spanning [0, 1]; labels[i] is the Gray label carried by levels[i]."""

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.m))

    @property
    def label_to_index(self) -> np.ndarray:
        result = np.empty(self.m, dtype=np.int64)
        result[self.labels] = np.arange(self.m)
        return result


@functools.lru_cache(maxsize=None)
def pam_constellation(m: int) -> PamConstellation:
    if not is_power_of_two(m) or m < 2:
        raise BitCountError("PAM order must be a power of two, got %r" % (m,))
    index = np.arange(m)
    return PamConstellation(m, index / (m - 1), gray_encode(index))


def _unpack_labels(labels: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    bits = (labels[..., np.newaxis] >> shifts) & 1
    return bits.reshape(labels.shape[:-1] + (labels.shape[-1] * width,)).astype(np.uint8)


def _pack_labels(bits: np.ndarray, width: int) -> np.ndarray:
    grouped = bits.reshape(bits.shape[:-1] + (bits.shape[-1] // width, width)).astype(np.int64)
    return grouped @ (1 << np.arange(width - 1, -1, -1))


def pam_map(bits, m: int) -> DataVector:
    """Maps (N-1) log2 M bits to a data vector u with u[0] = 0 and Gray-labelled PAM levels elsewhere."""
    constellation = pam_constellation(m)
    width = constellation.bits_per_symbol
    bits = np.asarray(bits)

    if bits.ndim == 0 or bits.shape[-1] % width:
        raise BitCountError("%s bits is not a multiple of log2(%i)" % (bits.shape[-1:], m))

    components = bits.shape[-1] // width
    if not is_power_of_two(components + 1) or components < 1:
        raise BitCountError("%i bits do not fill N-1 components for a power-of-two N" % bits.shape[-1])

    levels = constellation.levels[constellation.label_to_index[_pack_labels(bits, width)]]
    u = np.zeros(bits.shape[:-1] + (components + 1,))
    u[..., 1:] = levels
    return u


def pam_demap(soft, m: int, gain: float = 1.0) -> np.ndarray:
    """Slices decoder output v back to bits; component 0 carries no data and is discarded.

    Noiseless v[k] = gain * (u[k] - 1/2), so v / gain + 1/2 is compared against the midpoints between levels."""
    constellation = pam_constellation(m)
    soft = np.asarray(soft, dtype=np.float64)
    position = (soft[..., 1:] / gain + 0.5) * (m - 1)
    index = np.clip(np.rint(position), 0, m - 1).astype(np.int64)
    return _unpack_labels(constellation.labels[index], constellation.bits_per_symbol)


def _check_data(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 0:
        raise InvalidLengthError("a data vector needs N components")
    transforms.check_order(u.shape[-1])
    if np.any(u[..., 0] != 0):
        raise ReservedSlotError()
    if np.any(u < 0) or np.any(u > 1):
        raise AmplitudeRangeError()
    return u


def hcm_encode(u, cfg=None) -> Waveform:
    """x = (uH + (1-u)complement(H)) / sqrt(N), computed as fwht(u) / sqrt(N) + (sqrt(N)/2) [0, 1, ..., 1]."""
    u = _check_data(u)
    n = u.shape[-1]
    if cfg is not None and cfg.n != n:
        raise InvalidLengthError("data vector has %i components, modem is configured for %i" % (n, cfg.n))

    offset = np.full(n, math.sqrt(n) / 2)
    offset[0] = 0.0
    return transforms.fwht(u) / math.sqrt(n) + offset


def hcm_encode_direct(u) -> Waveform:
    """Reference form of the encoder, straight from the matrix definition. O(N^2)."""
    u = _check_data(u)
    hadamard = transforms.build_binary_hadamard(u.shape[-1])
    return (u @ hadamard.rows + (1 - u) @ hadamard.complement) / math.sqrt(u.shape[-1])


def hcm_decode(y, cfg=None) -> np.ndarray:
    """v = y S^T / sqrt(N). A DC level b added to y only moves v[0], by sqrt(N) b."""
    y = np.asarray(y, dtype=np.float64)
    if cfg is not None and y.shape[-1] != cfg.n:
        raise InvalidLengthError("received %i chips, expected %i" % (y.shape[-1], cfg.n))
    return transforms.fwht(y) / math.sqrt(y.shape[-1])


def dcr_encode(u, cfg=None) -> Waveform:
    """HCM with each symbol's minimum chip subtracted, so every symbol has a zero chip."""
    x = hcm_encode(u, cfg)
    return x - x.min(axis=-1, keepdims=True)


def hcm_mean_chip(n: int) -> float:
    """Ensemble mean chip of unit-scale HCM for uniform data; every level set symmetric about 1/2 gives this."""
    return (n - 1) / (2 * math.sqrt(n))


@functools.lru_cache(maxsize=None)
def dcr_mean_chip(n: int, m: int, symbols: int = 8192, seed: int = 0x5EED) -> float:
    """Ensemble mean chip of unit-scale DC-removed HCM, measured on a fixed-seed ensemble.

    The minimum chip has no closed form, so this is a calibration; the fixed seed keeps it identical across runs."""
    rng = np.random.Generator(np.random.Philox(seed))
    bits = rng.integers(0, 2, size=(symbols, (n - 1) * pam_constellation(m).bits_per_symbol), dtype=np.uint8)
    mean = float(dcr_encode(pam_map(bits, m)).mean())
    LOG.debug("DCR-HCM mean chip for N=%i, M=%i: %.6f (HCM: %.6f)", n, m, mean, hcm_mean_chip(n))
    return mean


class Interleaver(typing.NamedTuple('Interleaver', [
    ('perm', np.ndarray),
    ('inverse', np.ndarray),
])):
    """Intra-symbol chip permutation; `x[perm]` is transmitted instead of x."""

    @classmethod
    def from_perm(cls, perm: typing.Sequence[int]) -> "Interleaver":
        perm = np.array(perm, dtype=np.int64)
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise InvalidPermutationError("%r" % (perm.tolist(),))
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        perm.setflags(write=False)
        inverse.setflags(write=False)
        return cls(perm, inverse)

    @classmethod
    def identity(cls, n: int) -> "Interleaver":
        return cls.from_perm(np.arange(n))

    @property
    def n(self) -> int:
        return self.perm.size

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(self.n)))


def interleave(x, interleaver: Interleaver) -> Waveform:
    x = np.asarray(x)
    if x.shape[-1] != interleaver.n:
        raise InvalidLengthError("waveform has %i chips, interleaver %i" % (x.shape[-1], interleaver.n))
    return x[..., interleaver.perm]


def deinterleave(x, interleaver: Interleaver) -> Waveform:
    x = np.asarray(x)
    if x.shape[-1] != interleaver.n:
        raise InvalidLengthError("waveform has %i chips, interleaver %i" % (x.shape[-1], interleaver.n))
    return x[..., interleaver.inverse]


def add_cyclic_prefix(x, length: int) -> Waveform:
    x = np.asarray(x)
    n = x.shape[-1]
    if not 0 <= length < n:
        raise CyclicPrefixError("L=%r for N=%i" % (length, n))
    return np.concatenate((x[..., n - length:], x), axis=-1)


def strip_cyclic_prefix(y, length: int) -> Waveform:
    y = np.asarray(y)
    if length < 0 or 2 * length >= y.shape[-1]:
        raise CyclicPrefixError("L=%r for %i received chips" % (length, y.shape[-1]))
    return y[..., length:]
