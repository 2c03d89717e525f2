import logging
import typing

import numpy as np

from hcm_modem import hcm
from hcm_modem.chain import SchemeInterface, TrialContext, TrialResult
from hcm_modem.channel import power_normalize

LOG = logging.getLogger(__name__)


class HcmSchemeMixin(SchemeInterface):
    def __init__(self, context: TrialContext) -> None:
        super().__init__(context)
        self._interleaver = None  # type: typing.Optional[hcm.Interleaver]
        if context.perm is not None:
            self._interleaver = hcm.Interleaver.from_perm(context.perm)
        self._limiter_warned = False

    def _hcm_trial(self, trial: int, encoder: typing.Callable, mean_chip: float,
                   interleaver: typing.Optional[hcm.Interleaver] = None) -> TrialResult:
        spec = self.spec
        bits = self.random_bits(trial, spec.bits_per_symbol)
        u = hcm.pam_map(bits, spec.m)
        x, gain = power_normalize(encoder(u, self.modem), self.power_w, ensemble_mean=mean_chip)

        if not self._limiter_warned and self.power_w <= self.modem.p0 / 2 and np.any(x > self.modem.p0):
            LOG.warning("%s at %.3f dBm hits the %g W limiter below p0/2", spec.scheme.value,
                        self.context.power_dbm, self.modem.p0)
            self._limiter_warned = True

        y = self.transmit(x, trial, interleaver)
        decided = hcm.pam_demap(hcm.hcm_decode(y, self.modem), spec.m, gain)
        return TrialResult(int(bits.size), int(np.count_nonzero(decided != bits)))

    def _trial_hcm(self, trial: int) -> TrialResult:
        return self._hcm_trial(trial, hcm.hcm_encode, hcm.hcm_mean_chip(self.spec.n))

    def _trial_dcr_hcm(self, trial: int) -> TrialResult:
        """DC-removed HCM; the gain comes from the calibrated DCR mean chip."""
        return self._hcm_trial(trial, hcm.dcr_encode, hcm.dcr_mean_chip(self.spec.n, self.spec.m))

    def _trial_interleaved_hcm(self, trial: int) -> TrialResult:
        interleaver = self._interleaver or hcm.Interleaver.identity(self.spec.n)
        return self._hcm_trial(trial, hcm.hcm_encode, hcm.hcm_mean_chip(self.spec.n), interleaver)
