"""Optical channel: power normalization, the ideal peak-limited LED, FIR dispersion and AWGN.

Electrical amplitude is read directly as optical power in watts (unit LED slope, unit responsivity, unit path
gain). Noise is added after the channel, y = h * x + n.
"""
import logging
import typing

import numpy as np
import scipy.signal

from hcm_modem.errors import InvalidParameterError, ZeroSignalError

LOG = logging.getLogger(__name__)


class HardLimiter(typing.NamedTuple('HardLimiter', [('p0', float)])):
    """Ideal source emitting 0 .. p0 watts."""

    @classmethod
    def create(cls, p0: float) -> "HardLimiter":
        if not p0 > 0:
            raise InvalidParameterError("peak power must be positive, got %r" % (p0,))
        return cls(float(p0))


def power_normalize(x, target_avg: float,
                    ensemble_mean: typing.Optional[float] = None) -> typing.Tuple[np.ndarray, float]:
    """Scales x so its long-run mean equals target_avg.

    With `ensemble_mean` given (the analytic or calibrated mean of the unit-scale waveform) the gain does not depend
    on the particular symbols in x; otherwise the sample mean of x is used. Returns the scaled waveform and the
    gain, which the receiver needs to undo."""
    x = np.asarray(x, dtype=np.float64)
    mean = float(x.mean()) if ensemble_mean is None else float(ensemble_mean)
    if mean <= 0 or not np.any(x):
        raise ZeroSignalError()
    gain = target_avg / mean
    return x * gain, gain


def hard_limit(x, limiter: HardLimiter) -> np.ndarray:
    return np.clip(x, 0.0, limiter.p0)


class FirChannel:
    """Discrete-time impulse response h(k) with a delay line carried across calls.

    Feeding a transmission in pieces gives the same output as feeding it at once, so the tail of one symbol leaks
    into the cyclic prefix of the next."""

    def __init__(self, taps: typing.Sequence[float]) -> None:
        taps = np.array(taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size == 0 or not np.all(np.isfinite(taps)):
            raise InvalidParameterError("channel taps must be a nonempty finite vector, got %r" % (taps,))
        self.taps = taps
        self._state = np.zeros(taps.size - 1)

    @property
    def is_ideal(self) -> bool:
        return self.taps.size == 1 and self.taps[0] == 1.0

    def reset(self):
        self._state[:] = 0.0

    def __call__(self, stream) -> np.ndarray:
        stream = np.asarray(stream, dtype=np.float64)
        if self.is_ideal:
            return stream.copy()
        if self.taps.size == 1:
            return stream * self.taps[0]
        result, self._state = scipy.signal.lfilter(self.taps, [1.0], stream, zi=self._state)
        return result


def fir_convolve(stream, channel: FirChannel) -> np.ndarray:
    return channel(stream)


class AwgnSource:
    """Reproducible white Gaussian noise with variance sigma_n^2 per sample.

    Draws come from a Philox counter-based generator keyed by `seed` (an int or a tuple such as (base seed, point,
    trial)), so distinct keys never share a stream."""

    def __init__(self, variance: float, seed: typing.Union[int, typing.Sequence[int]] = 0) -> None:
        if variance < 0:
            raise InvalidParameterError("noise variance must be nonnegative, got %r" % (variance,))
        self.variance = float(variance)
        self.seed = seed
        self._rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    def sample(self, shape) -> np.ndarray:
        """The next draws, in C order; zeros when the variance is zero."""
        if self.variance == 0:
            return np.zeros(shape)
        return self._rng.normal(0.0, self.std, size=shape)

    def __call__(self, stream) -> np.ndarray:
        stream = np.asarray(stream, dtype=np.float64)
        return stream + self.sample(stream.shape)


def add_awgn(stream, source: AwgnSource) -> np.ndarray:
    return source(stream)
