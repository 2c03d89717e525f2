import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from hcm_modem import aco_ofdm, analysis, hcm
from hcm_modem.errors import InvalidParameterError
from tests.utils import fixed_rng, random_data


def quad(f, a, b):
    return scipy.integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


def quad_average_power(sigma, p0):
    """Mean of the clipped Gaussian: the continuous part on (0, p0) plus the mass Q(p0/sigma) at p0."""
    pdf = scipy.stats.norm(scale=sigma).pdf
    return quad(lambda x: x * pdf(x), 0, p0) + p0 * scipy.stats.norm.sf(p0 / sigma)


def quad_clip_variance(sigma, p0):
    pdf = scipy.stats.norm(scale=sigma).pdf
    return quad(lambda x: (x - p0) ** 2 * pdf(x), p0, np.inf)


def test_q_function():
    assert analysis.q_function(0) == 0.5
    assert analysis.q_function(-1.3) == pytest.approx(1 - analysis.q_function(1.3), abs=1e-15)
    assert analysis.q_function(1) == pytest.approx(0.15865525393145707, rel=1e-12)
    assert analysis.q_function(8) == pytest.approx(scipy.stats.norm.sf(8), rel=1e-12)
    assert isinstance(analysis.q_function(1.0), float)
    assert analysis.q_function([0, 0]).tolist() == [0.5, 0.5]


def test_aco_average_power_limits():
    assert analysis.aco_average_power(1, 100) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-9)
    assert analysis.aco_average_power(1e-9, 0.5) < 1e-9


@pytest.mark.parametrize('sigma', np.arange(0.05, 0.51, 0.05).tolist() + [1.0])
def test_aco_moments_match_quadrature(sigma):
    p0 = 1.0 if sigma == 1.0 else 0.5
    assert analysis.aco_average_power(sigma, p0) == pytest.approx(quad_average_power(sigma, p0), abs=1e-8)
    assert analysis.aco_clip_variance(sigma, p0) == pytest.approx(quad_clip_variance(sigma, p0), abs=1e-8)


def test_aco_clip_variance_limits():
    assert analysis.aco_clip_variance(0.05, 0.5) < 1e-20
    assert analysis.aco_clip_variance(0.3, 0) == pytest.approx(0.3 ** 2 / 2)
    assert analysis.aco_clip_variance(1, 2) == pytest.approx(quad_clip_variance(1, 2), abs=1e-8)


def test_aco_monotonicity():
    sigmas = np.linspace(0.01, 2, 200)
    powers = [analysis.aco_average_power(s, 0.5) for s in sigmas]
    variances = [analysis.aco_clip_variance(s, 0.5) for s in sigmas[50:]]
    assert np.all(np.diff(powers) > 0)
    assert np.all(np.diff(variances) > 0)

    by_peak = [analysis.aco_clip_variance(0.3, p0) for p0 in np.linspace(0.1, 1.5, 50)]
    assert np.all(np.diff(by_peak) <= 0)


@pytest.mark.parametrize('args', [(0, 0.5), (-1, 0.5), (0.1, 0)])
def test_aco_power_rejects_nonpositive(args):
    with pytest.raises(InvalidParameterError):
        analysis.aco_average_power(*args)


def test_aco_clip_variance_rejects_bad_inputs():
    with pytest.raises(InvalidParameterError):
        analysis.aco_clip_variance(0, 0.5)
    with pytest.raises(InvalidParameterError):
        analysis.aco_clip_variance(0.1, -0.5)


@pytest.mark.parametrize('p_avg', [1e-3, 0.05, 0.1, 0.2, 0.24])
def test_aco_sigma_inversion(p_avg):
    sigma = analysis.aco_sigma_for_power(p_avg, 0.5)
    assert analysis.aco_average_power(sigma, 0.5) == pytest.approx(p_avg, rel=1e-9)


@pytest.mark.parametrize('p_avg', [0.25, 0.3, 0])
def test_aco_sigma_out_of_range(p_avg):
    with pytest.raises(InvalidParameterError):
        analysis.aco_sigma_for_power(p_avg, 0.5)


def test_aco_stats():
    stats = analysis.aco_stats(0.2, 0.5)
    assert 0 < stats.p_avg < stats.p0
    assert stats.var_uc == analysis.aco_clip_variance(0.2, 0.5)


def test_aco_snr():
    noise = 1e-5
    assert analysis.aco_snr(0.01, 0.5, noise) == pytest.approx(0.01 ** 2 / noise, rel=1e-12)
    assert analysis.aco_snr(0.01, 0.5, 2 * noise) == pytest.approx(analysis.aco_snr(0.01, 0.5, noise) / 2)

    expected = 0.1 ** 2 / (noise + analysis.aco_clip_variance(0.1, 0.5))
    assert analysis.aco_snr(0.1, 0.5, noise) == pytest.approx(expected)
    assert analysis.aco_subcarrier_snr(0.1, 0.5, noise) == pytest.approx(expected / 2)


def test_ber_ofdm_analytic():
    assert analysis.ber_ofdm_analytic(16, 0) == pytest.approx(0.375)
    assert analysis.ber_ofdm_analytic(16, 1e12) == 0
    assert analysis.ber_ofdm_analytic(4, [0, 0]).tolist() == [0.5, 0.5]
    with pytest.raises(InvalidParameterError):
        analysis.ber_ofdm_analytic(8, 1)


def test_ber_ofdm_matches_qam_over_awgn():
    m, snr = 16, 10 ** (14 / 10)
    bits = fixed_rng().integers(0, 2, size=(20000, 64))
    symbols = aco_ofdm.qam_map(bits, m)
    noise_std = math.sqrt(1 / snr / 2)
    rng = fixed_rng(3)
    noisy = symbols + noise_std * (rng.normal(size=symbols.shape) + 1j * rng.normal(size=symbols.shape))
    errors = np.count_nonzero(aco_ofdm.qam_demap(noisy, m) != bits)
    ber = errors / bits.size
    ci = 1.96 * math.sqrt(ber * (1 - ber) / bits.size)
    assert abs(ber - analysis.ber_ofdm_analytic(m, snr)) <= 2 * ci + 0.05 * ber


def test_ber_hcm_analytic():
    assert analysis.ber_hcm_analytic(2, 0.3, 0.1) == pytest.approx(0.5 * analysis.q_function(3))
    assert analysis.ber_hcm_analytic(4, 0, 1) == pytest.approx(3 / (2 * 4 * 2))
    assert analysis.ber_hcm_analytic(2, 0.1, 0.00316) < 1e-100
    assert analysis.ber_hcm_analytic(2, 1, 0) == 0
    assert analysis.ber_pam_gray(8, 0.2, 0.05) == pytest.approx(2 * analysis.ber_hcm_analytic(8, 0.2, 0.05))
    with pytest.raises(InvalidParameterError):
        analysis.ber_hcm_analytic(3, 1, 1)


def test_hcm_sigma():
    # OOK: data part is +- A/2, so its RMS is A/2
    amplitude = 0.1 / hcm.hcm_mean_chip(128)
    assert analysis.hcm_sigma(0.1, 128, 2) == pytest.approx(amplitude / 2)

    u = random_data(64, 4, symbols=20000)
    v = hcm.hcm_decode(0.05 / hcm.hcm_mean_chip(64) * hcm.hcm_encode(u))
    rms = np.sqrt(np.mean(v[:, 1:] ** 2))
    assert rms == pytest.approx(analysis.hcm_sigma(0.05, 64, 4), rel=0.01)


def test_rates():
    assert analysis.hcm_rate(128, 2) == 127 / 128
    assert analysis.hcm_rate(4, 4) == 1.5
    assert analysis.aco_rate(128, 16) == 1.0


def test_papr():
    assert analysis.papr(np.full((10, 8), 0.3)) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        analysis.papr([])
    with pytest.raises(InvalidParameterError):
        analysis.papr(np.zeros(4))


def test_papr_hcm_and_aco():
    x = hcm.hcm_encode(random_data(128, symbols=10000))
    assert analysis.papr(x) <= 2 + 1e-9

    bits = fixed_rng().integers(0, 2, size=(10000, 128))
    clipped = aco_ofdm.aco_modulate(aco_ofdm.aco_frame(aco_ofdm.qam_map(bits, 16), 1.0))
    assert analysis.papr(clipped) > 6


def test_papr_ccdf_and_percentiles():
    ensemble = np.array([[1.0, 1.0], [1.0, 3.0]])
    # mean 1.5; per-symbol peaks 1 and 3
    assert analysis.symbol_paprs(ensemble).tolist() == pytest.approx([2 / 3, 2])
    assert analysis.papr_ccdf(ensemble, [0.5, 1, 2.5]).tolist() == [1.0, 0.5, 0.0]
    table = analysis.papr_percentiles(ensemble, (0, 100, 99.9))
    assert set(table) == {'p0', 'p100', 'p99.9'}
    assert table['p100'] == pytest.approx(2)


def test_dcr_power_ratio():
    ratio = analysis.dcr_power_ratio(128, symbols=20000, seed=5)
    assert ratio <= analysis.dcr_saving_bound(128) + 0.02
    assert analysis.dcr_saving_bound(128) == pytest.approx(1 - 128 / 254)


def test_crossover():
    falling = [(10, 1e-2), (11, 1e-3), (12, 1e-4)]
    assert analysis.crossover_dbm(falling, [(10, 1e-3), (11, 1e-3), (12, 1e-3)]) == pytest.approx(11)
    assert analysis.crossover_dbm(falling, [(p, 10 ** -2.5) for p in (10, 11, 12)]) == pytest.approx(10.5)
    assert analysis.crossover_dbm(falling, [(p, 1e-6) for p in (10, 11, 12)]) is None
    assert analysis.crossover_dbm(falling, [(p, 0.1) for p in (10, 11, 12)]) == 10
    # zero BER points are skipped
    assert analysis.crossover_dbm([(10, 0), (11, 1e-3)], [(10, 1e-2), (11, 1e-2)]) == 11


def analytic_curves(noise_dbm, powers):
    noise_var = 10 ** ((noise_dbm - 30) / 10)
    hcm_curve, aco_curve = [], []
    for power in powers:
        p_avg = 10 ** ((power - 30) / 10)
        sigma = analysis.aco_sigma_for_power(p_avg, 0.5)
        aco_curve.append((power, float(analysis.ber_ofdm_analytic(16, analysis.aco_subcarrier_snr(sigma, 0.5,
                                                                                                  noise_var)))))
        hcm_curve.append((power, float(analysis.ber_pam_gray(2, analysis.hcm_sigma(p_avg, 128, 2),
                                                             math.sqrt(noise_var)))))
    return hcm_curve, aco_curve


def test_analytic_crossover_at_minus_20_dbm():
    hcm_curve, aco_curve = analytic_curves(-20.0, np.arange(10.0, 23.75, 0.5))
    assert analysis.crossover_dbm(hcm_curve, aco_curve) == pytest.approx(20.3, abs=1.0)


def test_analytic_crossover_at_minus_30_dbm():
    # Lands near 19.2 dBm rather than 18 +- 1: ACO-OFDM's clipping cliff sits close to p0 / 2 at this noise level
    hcm_curve, aco_curve = analytic_curves(-30.0, np.arange(10.0, 23.75, 0.5))
    assert 17.0 <= analysis.crossover_dbm(hcm_curve, aco_curve) <= 20.0
