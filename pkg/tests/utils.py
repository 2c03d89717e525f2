import asyncio
import itertools
import math
import typing

import numpy as np

import hcm_modem.config
import hcm_modem.sim


def sylvester(n: int) -> np.ndarray:
    """Bipolar Sylvester matrix by explicit doubling, independent of scipy."""
    s = np.array([[1]], dtype=np.int64)
    while s.shape[0] < n:
        s = np.block([[s, s], [s, -s]])
    return s


def fixed_rng(seed: int = 1234) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_data(n: int, m: int = 2, symbols: int = 1, seed: int = 1234) -> np.ndarray:
    """(symbols, n) HCM data vectors with u[0] = 0 and levels i / (m - 1)."""
    rng = fixed_rng(seed)
    u = rng.integers(0, m, size=(symbols, n)) / (m - 1)
    u[:, 0] = 0.0
    return u


def all_ook_vectors(n: int) -> np.ndarray:
    rows = np.array(list(itertools.product((0.0, 1.0), repeat=n - 1)))
    return np.hstack((np.zeros((rows.shape[0], 1)), rows))


def brute_leakage(perm: typing.Sequence[int], taps: typing.Sequence[float], n: int) -> np.ndarray:
    """Decoder output of the noiseless permute / circular convolve / unpermute chain, one unit data row at a time."""
    s = sylvester(n).astype(float)
    perm = list(perm)
    inverse = [perm.index(i) for i in range(n)]
    result = np.zeros((n, n))
    for k in range(n):
        x = s[k] / math.sqrt(n)
        sent = [x[perm[i]] for i in range(n)]
        received = [sum(taps[t] * sent[(i - t) % n] for t in range(len(taps))) for i in range(n)]
        restored = np.array([received[inverse[i]] for i in range(n)])
        result[k] = s @ restored / math.sqrt(n)
    return result


def brute_cost(perm, taps, n) -> float:
    v = brute_leakage(perm, taps, n)[1:, 1:]
    np.fill_diagonal(v, 0.0)
    return float(np.abs(v).max())


def small_spec(**changes) -> hcm_modem.config.SweepSpec:
    spec = hcm_modem.config.SweepSpec(n=8, m=2, taps=(1.0,), noise_dbm=None, powers=(20.0,),
                                      min_errors=100, max_bits=2000, symbols_per_trial=16)
    return spec._replace(**changes)


def run_point(spec, power_dbm, **kwargs) -> hcm_modem.sim.BerPoint:
    simulator = hcm_modem.sim.Simulator()
    try:
        return asyncio.run(simulator.run_point(spec, power_dbm, **kwargs))
    finally:
        simulator.close()
