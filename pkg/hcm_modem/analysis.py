"""Closed-form performance expressions for ACO-OFDM and HCM, plus the ensemble statistics used to check them.

Gain conventions used when comparing these with simulation:

* `ber_hcm_analytic` keeps its printed prefactor (M-1)/(M log2 M). An M-PAM slicer with Gray labels makes twice
  that many nearest-neighbour errors; `ber_pam_gray` is that curve, and it is what the simulator reproduces.
  Its sigma is the RMS of the data part of the decoder output, see `hcm_sigma`.
* `aco_snr` is the printed SNR. Negative clipping halves every data subcarrier, so the FFT receiver sees
  `aco_subcarrier_snr` = aco_snr / 2; that is the SNR to feed to `ber_ofdm_analytic` when comparing with simulation.
"""
import logging
import math
import typing

import numpy as np
import scipy.optimize
import scipy.special

from hcm_modem import hcm
from hcm_modem.errors import InvalidParameterError

LOG = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2 * math.pi)

AcoStats = typing.NamedTuple('AcoStats', [
    ('sigma', float),
    ('p0', float),
    ('p_avg', float),
    ('var_uc', float),
])


def q_function(x):
    """Gaussian tail probability P(Z > x)."""
    result = 0.5 * scipy.special.erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2))
    return float(result) if np.ndim(result) == 0 else result


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise InvalidParameterError("%s must be positive, got %r" % (name, value))


def aco_average_power(sigma: float, p0: float) -> float:
    """Mean of a zero-mean Gaussian (std sigma) clipped to [0, p0]."""
    _check_positive(sigma=sigma, p0=p0)
    return (sigma / _SQRT_2PI * -math.expm1(-p0 ** 2 / (2 * sigma ** 2)) +
            p0 * q_function(p0 / sigma))


def aco_clip_variance(sigma: float, p0: float) -> float:
    """Variance of the upper-clipping noise; negative clipping is orthogonal to the data and contributes nothing."""
    _check_positive(sigma=sigma)
    if p0 < 0:
        raise InvalidParameterError("p0 must be nonnegative, got %r" % (p0,))
    ratio = p0 / sigma
    value = ((p0 ** 2 + sigma ** 2) * q_function(ratio) -
             p0 * sigma / _SQRT_2PI * math.exp(-ratio ** 2 / 2))
    return max(value, 0.0)


def aco_stats(sigma: float, p0: float) -> AcoStats:
    return AcoStats(sigma, p0, aco_average_power(sigma, p0), aco_clip_variance(sigma, p0))


def aco_sigma_for_power(p_avg: float, p0: float) -> float:
    """Pre-clipping standard deviation giving average optical power p_avg; P_ACO is increasing in sigma."""
    _check_positive(p_avg=p_avg, p0=p0)
    if p_avg >= p0 / 2:
        raise InvalidParameterError("ACO-OFDM average power must stay below p0/2 = %g W, got %g W" % (p0 / 2, p_avg))

    low, high = p_avg, p_avg * _SQRT_2PI
    while aco_average_power(high, p0) < p_avg:
        low, high = high, high * 2

    sigma = scipy.optimize.bisect(lambda s: aco_average_power(s, p0) - p_avg, low, high,
                                  xtol=1e-300, rtol=1e-12, maxiter=200)
    LOG.debug("ACO-OFDM sigma for %.6g W (p0 %.3g W): %.9g", p_avg, p0, sigma)
    return sigma


def aco_snr(sigma: float, p0: float, noise_var: float) -> float:
    return sigma ** 2 / (noise_var + aco_clip_variance(sigma, p0))


def aco_subcarrier_snr(sigma: float, p0: float, noise_var: float) -> float:
    return aco_snr(sigma, p0, noise_var) / 2


def ber_ofdm_analytic(m: int, snr):
    side = math.sqrt(m)
    if side != int(side) or m < 4:
        raise InvalidParameterError("QAM order must be a square, got %r" % (m,))
    prefactor = 2 * (side - 1) / (side * math.log2(side))
    return prefactor * q_function(np.sqrt(3 * np.asarray(snr, dtype=np.float64) / (m - 1)))


def _pam_argument(m: int, sigma, noise_std):
    if m < 2 or m & (m - 1):
        raise InvalidParameterError("PAM order must be a power of two, got %r" % (m,))
    with np.errstate(divide='ignore'):
        ratio = np.divide(np.asarray(sigma, dtype=np.float64), noise_std)
    return math.sqrt(3 / (m ** 2 - 1)) * ratio


def ber_hcm_analytic(m: int, sigma, noise_std):
    return (m - 1) / (m * math.log2(m)) * q_function(_pam_argument(m, sigma, noise_std))


def ber_pam_gray(m: int, sigma, noise_std):
    return 2 * (m - 1) / (m * math.log2(m)) * q_function(_pam_argument(m, sigma, noise_std))


def hcm_sigma(avg_power: float, n: int, m: int, mean_chip: typing.Optional[float] = None) -> float:
    """RMS of the data part of the HCM decoder output at a given average optical power.

    The amplitude scale is avg_power / mean_chip (the unit-scale ensemble mean, HCM's by default); the decoder
    returns scale * (u - 1/2), and M uniform levels on [0, 1] have variance (M + 1) / (12 (M - 1))."""
    if mean_chip is None:
        mean_chip = hcm.hcm_mean_chip(n)
    scale = avg_power / mean_chip
    return scale * math.sqrt((m + 1) / (12 * (m - 1)))


def hcm_rate(n: int, m: int) -> float:
    """Bits per chip."""
    return (n - 1) / n * math.log2(m)


def aco_rate(n: int, m: int) -> float:
    return (n // 4) * math.log2(m) / n


def papr(ensemble) -> float:
    """Peak chip over the ensemble mean chip."""
    ensemble = np.asarray(ensemble, dtype=np.float64)
    if ensemble.size == 0:
        raise InvalidParameterError("PAPR of an empty ensemble")
    mean = ensemble.mean()
    if mean <= 0:
        raise InvalidParameterError("PAPR needs a positive mean")
    return float(ensemble.max() / mean)


def symbol_paprs(ensemble) -> np.ndarray:
    """Per-symbol peak over the ensemble mean, one value per row."""
    ensemble = np.atleast_2d(np.asarray(ensemble, dtype=np.float64))
    return ensemble.max(axis=-1) / ensemble.mean()


def papr_ccdf(ensemble, thresholds) -> np.ndarray:
    """P(symbol PAPR > t) for every threshold t."""
    values = symbol_paprs(ensemble)
    return np.array([(values > t).mean() for t in thresholds])


def papr_percentiles(ensemble, percentiles=(50, 90, 99, 99.9, 100)) -> typing.Dict[str, float]:
    values = symbol_paprs(ensemble)
    return {"p%s" % ("%g" % q): float(np.percentile(values, q)) for q in percentiles}


def dcr_saving_bound(n: int) -> float:
    """Upper bound on mean(P_DCR) / mean(P_HCM): DC removal saves at least a factor N / (2(N-1))."""
    return 1 - n / (2 * (n - 1))


def dcr_power_ratio(n: int, m: int = 2, symbols: int = 10000, seed: int = 0) -> float:
    rng = np.random.Generator(np.random.Philox(seed))
    bits = rng.integers(0, 2, size=(symbols, (n - 1) * int(math.log2(m))), dtype=np.uint8)
    u = hcm.pam_map(bits, m)
    return float(hcm.dcr_encode(u).mean() / hcm.hcm_encode(u).mean())


def crossover_dbm(curve_a: typing.Sequence[typing.Tuple[float, float]],
                  curve_b: typing.Sequence[typing.Tuple[float, float]]) -> typing.Optional[float]:
    """Power at which curve_a first drops below curve_b, interpolating log10(BER) linearly in dB.

    Curves are (power_dbm, ber) pairs on the same grid; points where either BER is zero are skipped."""
    b_by_power = dict(curve_b)
    previous = None
    for power, ber_a in curve_a:
        ber_b = b_by_power.get(power)
        if not ber_a or not ber_b:
            continue
        gap = math.log10(ber_a) - math.log10(ber_b)
        if previous is not None and previous[1] > 0 >= gap:
            p_prev, g_prev = previous
            return p_prev + (power - p_prev) * g_prev / (g_prev - gap)
        if previous is None and gap <= 0:
            return power
        previous = (power, gap)
    return None
