"""ACO-OFDM baseline: square QAM on the odd subcarriers with Hermitian symmetry, negative clipping, FFT receiver."""
import functools
import logging
import math
import typing

import numpy as np

from hcm_modem import transforms
from hcm_modem.errors import BitCountError, InvalidLengthError
from hcm_modem.hcm import gray_encode

LOG = logging.getLogger(__name__)


class QamConstellation(typing.NamedTuple('QamConstellation', [
    ('m', int),
    ('axis_levels', np.ndarray),
    ('axis_labels', np.ndarray),
    ('points', np.ndarray),
])):
    """Square M-QAM with unit average energy, Gray labelled per axis.

    The first half of each symbol's bits selects the in-phase level, the second half the quadrature level;
    points[label] is the point carrying `label`."""

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.m))

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def side(self) -> int:
        return self.axis_levels.size


@functools.lru_cache(maxsize=None)
def qam_constellation(m: int) -> QamConstellation:
    side = int(round(math.sqrt(m)))
    if side * side != m or side < 2 or side & (side - 1):
        raise BitCountError("QAM order must be a square power of two, got %r" % (m,))

    index = np.arange(side)
    axis_levels = (2 * index - (side - 1)) / math.sqrt(2 * (m - 1) / 3)
    axis_labels = gray_encode(index)

    label_to_level = np.empty(side)
    label_to_level[axis_labels] = axis_levels
    labels = np.arange(m)
    points = label_to_level[labels >> int(math.log2(side))] + 1j * label_to_level[labels & (side - 1)]
    return QamConstellation(m, axis_levels, axis_labels, points)


def qam_map(bits, m: int) -> np.ndarray:
    constellation = qam_constellation(m)
    width = constellation.bits_per_symbol
    bits = np.asarray(bits)
    if bits.ndim == 0 or bits.shape[-1] % width:
        raise BitCountError("%s bits is not a multiple of log2(%i)" % (bits.shape[-1:], m))

    grouped = bits.reshape(bits.shape[:-1] + (bits.shape[-1] // width, width)).astype(np.int64)
    labels = grouped @ (1 << np.arange(width - 1, -1, -1))
    return constellation.points[labels]


def _slice_axis(values: np.ndarray, constellation: QamConstellation) -> np.ndarray:
    levels = constellation.axis_levels
    step = levels[1] - levels[0]
    index = np.clip(np.rint((values - levels[0]) / step), 0, constellation.side - 1).astype(np.int64)
    return constellation.axis_labels[index]


def qam_demap(softs, m: int) -> np.ndarray:
    """Minimum-distance slicing, which for a square grid separates into two per-axis slicers."""
    constellation = qam_constellation(m)
    softs = np.asarray(softs)
    width = constellation.bits_per_axis
    labels = (_slice_axis(softs.real, constellation) << width) | _slice_axis(softs.imag, constellation)

    shifts = np.arange(2 * width - 1, -1, -1)
    bits = (labels[..., np.newaxis] >> shifts) & 1
    return bits.reshape(labels.shape[:-1] + (labels.shape[-1] * 2 * width,)).astype(np.uint8)


class OfdmFrame(typing.NamedTuple('OfdmFrame', [
    ('data', np.ndarray),
    ('spectrum', np.ndarray),
    ('time', np.ndarray),
    ('sigma', float),
    ('scale', float),
])):
    """One (or a batch of) ACO-OFDM symbols before clipping.

    `time` is the real transmit signal with pre-clipping standard deviation `sigma` watts, `scale` the factor
    applied to idft(spectrum) to get there."""


def aco_map(data) -> np.ndarray:
    """[0, d0, 0, d1, ..., d(N/4-1), 0, conj(d(N/4-1)), ..., 0, conj(d0)]: odd subcarriers, Hermitian symmetric."""
    data = np.asarray(data, dtype=np.complex128)
    if data.ndim == 0 or data.shape[-1] < 1:
        raise InvalidLengthError("ACO-OFDM needs at least one QAM symbol per frame")

    quarter = data.shape[-1]
    n = 4 * quarter
    spectrum = np.zeros(data.shape[:-1] + (n,), dtype=np.complex128)
    spectrum[..., 1:n // 2:2] = data
    spectrum[..., n - 1:n // 2:-2] = np.conj(data)
    return spectrum


def aco_scale(n: int, sigma: float) -> float:
    """Factor turning idft of a unit-energy ACO spectrum into a signal of standard deviation sigma.

    Half of the N bins are loaded, so idft output has variance (N/2) / N^2 = 1 / (2N)."""
    return sigma * math.sqrt(2 * n)


def aco_frame(data, sigma: float) -> OfdmFrame:
    spectrum = aco_map(data)
    n = spectrum.shape[-1]
    scale = aco_scale(n, sigma)
    time = transforms.idft(spectrum)
    residue = float(np.max(np.abs(time.imag))) if time.size else 0.0
    if residue > 1e-9:
        LOG.warning("ACO-OFDM time signal has imaginary residue %g", residue)
    return OfdmFrame(np.asarray(data), spectrum, time.real * scale, float(sigma), scale)


def aco_modulate(frame: OfdmFrame) -> np.ndarray:
    """Clips the negative half-waves; the clipping distortion lands on the even subcarriers only."""
    return np.maximum(frame.time, 0.0)


def one_tap_equalizer(taps: typing.Sequence[float], n: int) -> np.ndarray:
    """Channel frequency response on the data subcarriers, for optional one-tap equalization."""
    response = transforms.dft(np.concatenate((np.asarray(taps, dtype=np.float64), np.zeros(n - len(taps)))))
    return response[1:n // 2:2]


def aco_demodulate(y, gain: float, equalizer: typing.Optional[np.ndarray] = None) -> np.ndarray:
    """Recovers the N/4 soft QAM symbols from a received (prefix-stripped) symbol.

    Clipping halves the odd-bin content, hence the factor 2 / gain."""
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[-1]
    if n % 4 or n < 4:
        raise InvalidLengthError("ACO-OFDM symbol length must be a multiple of 4, got %i" % n)

    softs = transforms.dft(y)[..., 1:n // 2:2] * (2.0 / gain)
    if equalizer is not None:
        softs = softs / equalizer
    return softs
