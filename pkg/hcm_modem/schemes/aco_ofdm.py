import logging

import numpy as np

from hcm_modem import aco_ofdm, analysis
from hcm_modem.chain import SchemeInterface, TrialContext, TrialResult
from hcm_modem.config import Scheme

LOG = logging.getLogger(__name__)


class AcoOfdmSchemeMixin(SchemeInterface):
    def __init__(self, context: TrialContext) -> None:
        super().__init__(context)
        self._aco_sigma = None
        self._aco_equalizer = None
        if context.spec.scheme is Scheme.ACO_OFDM:
            self._aco_sigma = analysis.aco_sigma_for_power(self.power_w, self.modem.p0)
            LOG.info("ACO-OFDM at %.3f dBm: sigma %.6g W", context.power_dbm, self._aco_sigma)
            if context.spec.equalize:
                self._aco_equalizer = aco_ofdm.one_tap_equalizer(context.spec.taps, context.spec.n)

    def _trial_aco_ofdm(self, trial: int) -> TrialResult:
        spec = self.spec
        bits = self.random_bits(trial, spec.bits_per_symbol)
        data = aco_ofdm.qam_map(bits, spec.m)
        frame = aco_ofdm.aco_frame(data, self._aco_sigma)

        y = self.transmit(aco_ofdm.aco_modulate(frame), trial)

        softs = aco_ofdm.aco_demodulate(y, frame.scale, self._aco_equalizer)
        decided = aco_ofdm.qam_demap(softs, spec.m)
        return TrialResult(int(bits.size), int(np.count_nonzero(decided != bits)))

