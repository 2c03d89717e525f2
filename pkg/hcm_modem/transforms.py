"""Hadamard matrices and the fast transforms shared by both modems.

Row order is Sylvester (natural) order throughout. The Walsh-Hadamard kernel is unnormalized; the modems apply
their own 1/sqrt(N) factors. All transforms act on the last axis, so a batch of symbols is a 2-D array with one
symbol per row.
"""
import functools
import logging
import typing

import numpy as np
import scipy.linalg

from hcm_modem.errors import InvalidLengthError, InvalidOrderError
from hcm_modem.utils import is_power_of_two

LOG = logging.getLogger(__name__)

HadamardOrder = typing.NewType('HadamardOrder', int)


def check_order(n: int) -> HadamardOrder:
    if int(n) != n or not is_power_of_two(int(n)) or n < 2:
        raise InvalidOrderError("got %r" % (n,))
    return HadamardOrder(int(n))


class BinaryHadamard(typing.NamedTuple('BinaryHadamard', [
    ('order', HadamardOrder),
    ('rows', np.ndarray),
])):
    """The {0,1} Hadamard matrix H, obtained from the Sylvester matrix by replacing -1 by 0."""

    @property
    def complement(self) -> np.ndarray:
        return 1 - self.rows

    @property
    def bipolar(self) -> np.ndarray:
        """S = H - complement(H), satisfying S S^T = N I."""
        return 2 * self.rows - 1


@functools.lru_cache(maxsize=None)
def build_binary_hadamard(order: int) -> BinaryHadamard:
    n = check_order(order)
    rows = (scipy.linalg.hadamard(n, dtype=np.int64) + 1) // 2
    rows.setflags(write=False)
    return BinaryHadamard(n, rows)


def bipolar_hadamard(order: int) -> np.ndarray:
    return build_binary_hadamard(order).bipolar


def _as_transform_input(v) -> np.ndarray:
    result = np.array(v, copy=True)
    if not np.issubdtype(result.dtype, np.integer):
        result = result.astype(np.float64)

    if result.ndim == 0 or not is_power_of_two(result.shape[-1]) or result.shape[-1] < 2:
        raise InvalidLengthError("transform length must be a power of two, got shape %s" % (result.shape,))
    return result


def fwht(v) -> np.ndarray:
    """Returns v S for the bipolar Sylvester matrix S, in N log2 N butterflies.

    Integer input stays integer (and therefore exact)."""
    a = _as_transform_input(v)
    shape = a.shape
    n = shape[-1]

    span = 1
    while span < n:
        a = a.reshape(shape[:-1] + (n // (2 * span), 2, span))
        upper = a[..., 0, :]
        lower = a[..., 1, :]
        a = np.stack((upper + lower, upper - lower), axis=-2)
        span *= 2

    return a.reshape(shape)


def ifwht(v) -> np.ndarray:
    a = _as_transform_input(v)
    return fwht(a) / a.shape[-1]


def idft(u) -> np.ndarray:
    """x = (1/N) u W with W[n, k] = exp(2j pi k n / N)."""
    u = np.asarray(u)
    if u.ndim == 0 or u.shape[-1] < 1:
        raise InvalidLengthError("idft needs at least one sample")
    return np.fft.ifft(u, axis=-1)


def dft(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise InvalidLengthError("dft needs at least one sample")
    return np.fft.fft(x, axis=-1)
