"""The shared transmission chain every scheme's trial runs through.

A trial draws `symbols_per_trial` symbols worth of bits, encodes them into a (symbols, N) waveform at the target
average power and hands it to `transmit`, which prepends the cyclic prefix, applies the peak limiter, sends the
serialized stream through the FIR channel, adds noise, and returns the prefix-stripped (symbols, N) receive array.

Noise is drawn per framed chip in data chip order. An interleaved trial permutes the noise with the chips, so chip j
of a decoded symbol sees the same noise sample in plain and interleaved HCM for the same (point seed, trial).
"""
import abc
import logging
import typing

import numpy as np

from hcm_modem import hcm
from hcm_modem.channel import AwgnSource, FirChannel, HardLimiter, hard_limit
from hcm_modem.config import SweepSpec

LOG = logging.getLogger(__name__)
LOG_TRIALS = LOG.getChild('trials')

# Substreams of one trial's key
BITS_STREAM = 0
NOISE_STREAM = 1

TrialContext = typing.NamedTuple('TrialContext', [
    ('spec', SweepSpec),
    ('power_dbm', float),
    ('point_seed', int),
    ('perm', typing.Optional[typing.Tuple[int, ...]]),
])

TrialResult = typing.NamedTuple('TrialResult', [
    ('bits', int),
    ('errors', int),
])


class SchemeInterface(abc.ABC):
    def __init__(self, context: TrialContext) -> None:
        super().__init__()
        self.context = context
        self.spec = context.spec
        self.modem = context.spec.modem_config(context.power_dbm)

    @property
    def power_w(self) -> float:
        return self.modem.avg_power

    @abc.abstractmethod
    def make_rng(self, trial: int, stream: int) -> np.random.Generator:
        """Generator keyed by (point seed, trial, stream)."""

    @abc.abstractmethod
    def random_bits(self, trial: int, bits_per_symbol: int) -> np.ndarray:
        """(symbols_per_trial, bits_per_symbol) uniform bits for one trial."""

    @abc.abstractmethod
    def transmit(self, x: np.ndarray, trial: int, interleaver: typing.Optional[hcm.Interleaver] = None) -> np.ndarray:
        """Sends a (symbols, N) waveform through prefix, limiter, channel and noise; an interleaver permutes the
        chips before the prefix and restores their order after it is stripped."""


class Chain(SchemeInterface):
    """Concrete chain plus the per-scheme dispatch.

    A trial of scheme S runs the method `_trial_<s>`, provided by one of the scheme mixins."""

    def __init__(self, context: TrialContext) -> None:
        super().__init__(context)
        self.limiter = HardLimiter.create(self.spec.p0)

    def make_rng(self, trial: int, stream: int) -> np.random.Generator:
        key = np.random.SeedSequence([self.context.point_seed, trial, stream])
        return np.random.Generator(np.random.Philox(key))

    def random_bits(self, trial: int, bits_per_symbol: int) -> np.ndarray:
        rng = self.make_rng(trial, BITS_STREAM)
        return rng.integers(0, 2, size=(self.spec.symbols_per_trial, bits_per_symbol), dtype=np.uint8)

    def transmit(self, x: np.ndarray, trial: int, interleaver: typing.Optional[hcm.Interleaver] = None) -> np.ndarray:
        cp_len = self.spec.cp_len
        if interleaver is not None:
            x = hcm.interleave(x, interleaver)
        framed = hcm.add_cyclic_prefix(x, cp_len)
        emitted = hard_limit(framed, self.limiter)

        # The delay line starts empty at every trial, so trials stay independent
        channel = FirChannel(self.spec.taps)
        noise = AwgnSource(self.spec.noise_var, [self.context.point_seed, trial, NOISE_STREAM]).sample(framed.shape)
        if interleaver is not None:
            noise[..., cp_len:] = hcm.interleave(noise[..., cp_len:], interleaver)
        received = channel(emitted.reshape(-1)).reshape(framed.shape) + noise

        y = hcm.strip_cyclic_prefix(received, cp_len)
        if interleaver is not None:
            y = hcm.deinterleave(y, interleaver)
        return y

    def run_trial(self, trial: int) -> TrialResult:
        handler = getattr(self, "_trial_%s" % self.spec.scheme.name.lower(), None)
        if handler is None:
            raise NotImplementedError("no trial handler for %s" % self.spec.scheme.value)

        result = handler(trial)
        LOG_TRIALS.debug("%s %.3f dBm trial %i: %i errors in %i bits", self.spec.scheme.value,
                         self.context.power_dbm, trial, result.errors, result.bits)
        return result
