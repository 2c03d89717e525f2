"""Search for the chip permutation that best protects interleaved HCM against intra-symbol ISI.

The cost of a permutation is the largest magnitude of off-diagonal leakage at the decoder output, over all pairs of
data rows (k, j), k != j, k, j >= 1, for the noiseless chain permute -> circular convolution with h -> inverse
permute -> decode.

Minimax leakage alone does not rank permutations by error rate: evenly spread leakage behaves like extra Gaussian
noise, and each row's own gain moves with the permutation too. Given a `BerDesign` (noise level relative to the chip
amplitude at the sweep's operating points), the search minimizes a semi-analytic BER estimate instead, over the
permutations whose minimax cost does not exceed the identity's.
"""
import itertools
import logging
import math
import typing

import numpy as np

from hcm_modem import analysis, hcm, transforms
from hcm_modem.errors import ConfigError, InvalidParameterError, InvalidPermutationError
from hcm_modem.hcm import Interleaver

LOG = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 8
COOLING = 0.995
TEMPERATURE_SAMPLES = 100
REHEAT_FLOOR = 1e-4

DESIGN_SAMPLES = 256
VALIDATION_SAMPLES = 1024
DESIGN_POINTS = 6
_CHUNK_ELEMENTS = 1 << 22  # per temporary array in the BER estimate

IsiCostReport = typing.NamedTuple('IsiCostReport', [
    ('perm', Interleaver),
    ('cost', float),
    ('leakage', np.ndarray),  # (N-1, N-1), zero diagonal
])

BerDesign = typing.NamedTuple('BerDesign', [
    ('m', int),  # PAM order
    ('noise_ratios', typing.Tuple[float, ...]),  # noise std over chip amplitude, one per operating point
    ('floor', float),  # points where the identity's BER is below this do not steer the search
])


def _as_interleaver(perm) -> Interleaver:
    if isinstance(perm, Interleaver):
        return perm
    return Interleaver.from_perm(perm)


class _LeakageEvaluator:
    """Decoder response of one or many permutations for a fixed channel and order.

    Tap t moves chip i of the deinterleaved symbol onto chip perm[(inverse[i] - t) mod N]."""

    def __init__(self, taps: typing.Sequence[float], n: int, hadamard: typing.Optional[np.ndarray] = None) -> None:
        self.n = transforms.check_order(n)
        self.taps = np.asarray(taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size == 0:
            raise InvalidParameterError("channel taps must be a nonempty vector")
        if self.taps.size > n:
            raise InvalidParameterError("%i taps do not fit a circular channel of order %i" % (self.taps.size, n))
        self.bipolar = (np.asarray(hadamard, dtype=np.float64) if hadamard is not None
                        else transforms.bipolar_hadamard(n).astype(np.float64))

    def responses(self, perms: np.ndarray) -> np.ndarray:
        """perms: (P, N) integer array; returns (P, N, N), row k the decoder output for a unit on data row k."""
        perms = np.atleast_2d(perms)
        inverses = np.empty_like(perms)
        np.put_along_axis(inverses, perms, np.arange(self.n)[np.newaxis, :], axis=-1)

        mixed = np.zeros((perms.shape[0], self.n, self.n))
        for delay, tap in enumerate(self.taps):
            if tap == 0:
                continue
            columns = np.take_along_axis(perms, (inverses - delay) % self.n, axis=-1)
            mixed += tap * self.bipolar[:, columns].transpose(1, 0, 2)
        return mixed @ self.bipolar.T / self.n

    @staticmethod
    def leakage(responses: np.ndarray) -> np.ndarray:
        """(P, N-1, N-1) off-diagonal part between data rows."""
        leakage = responses[:, 1:, 1:].copy()
        diagonal = np.arange(leakage.shape[-1])
        leakage[:, diagonal, diagonal] = 0.0
        return leakage

    def matrices(self, perms: np.ndarray) -> np.ndarray:
        return self.leakage(self.responses(perms))

    def costs(self, perms: np.ndarray) -> np.ndarray:
        return np.abs(self.matrices(perms)).max(axis=(-2, -1))

    def __call__(self, perm: np.ndarray) -> float:
        return float(self.costs(perm[np.newaxis, :])[0])


class _BerEstimator:
    """Estimated BER of the interleaved chain at a set of noise ratios.

    Noise enters in closed form through Q(.); the data vectors are a fixed seeded sample, so the estimate is a
    deterministic function of the permutation. A symbol error is counted as one bit error (Gray labels)."""

    def __init__(self, evaluator: _LeakageEvaluator, m: int, ratios: typing.Sequence[float], seed: int = 0,
                 samples: int = DESIGN_SAMPLES) -> None:
        self.evaluator = evaluator
        self.m = m
        self.ratios = np.asarray(ratios, dtype=np.float64)
        constellation = hcm.pam_constellation(m)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, samples])))

        self.u = constellation.levels[rng.integers(0, m, size=(samples, evaluator.n - 1))]
        self.w = np.concatenate([np.zeros((samples, 1)), self.u - 0.5], axis=1)  # row 0 never leaks into data rows
        self.half_spacing = 0.5 / (m - 1)
        self.bits = constellation.bits_per_symbol
        self.identity = self.from_responses(evaluator.responses(np.arange(evaluator.n)))[0]

    @property
    def chunk(self) -> int:
        """Permutations per batch."""
        return max(1, _CHUNK_ELEMENTS // (self.w.size * self.ratios.size))

    @classmethod
    def for_design(cls, evaluator: _LeakageEvaluator, design: BerDesign, seed: int = 0) -> '_BerEstimator':
        """Keeps the design points the sweep can measure, at most DESIGN_POINTS of them."""
        if design.m < 2 or not design.noise_ratios or min(design.noise_ratios) <= 0:
            raise InvalidParameterError("BER design needs M >= 2 and positive noise ratios, got %r" % (design,))
        ratios = np.asarray(design.noise_ratios, dtype=np.float64)
        estimator = cls(evaluator, design.m, ratios, seed)
        keep = np.flatnonzero((estimator.identity >= design.floor) & (estimator.identity > 0))
        if keep.size == 0:
            keep = np.array([int(np.argmax(ratios))])
        if keep.size > DESIGN_POINTS:
            keep = keep[np.linspace(0, keep.size - 1, DESIGN_POINTS).round().astype(int)]
        return cls(evaluator, design.m, ratios[keep], seed)

    def from_responses(self, responses: np.ndarray) -> np.ndarray:
        """(P, R) estimated BER."""
        result = np.empty((responses.shape[0], self.ratios.size))
        scale = self.ratios[:, np.newaxis, np.newaxis]
        for start in range(0, responses.shape[0], self.chunk):
            distortion = (self.w @ responses[start:start + self.chunk])[..., 1:] - self.w[:, 1:]
            distortion = distortion[:, np.newaxis]
            up = np.where(self.u < 1, analysis.q_function((self.half_spacing - distortion) / scale), 0.0)
            down = np.where(self.u > 0, analysis.q_function((self.half_spacing + distortion) / scale), 0.0)
            result[start:start + self.chunk] = (up + down).mean(axis=(-2, -1)) / self.bits
        return result

    def relative(self, perms: np.ndarray) -> np.ndarray:
        """(P, R) estimated BER over the identity's."""
        return self.from_responses(self.evaluator.responses(perms)) / self.identity

    def resampled(self, seed: int) -> '_BerEstimator':
        """Same operating points on an independent, larger data sample."""
        return _BerEstimator(self.evaluator, self.m, self.ratios, seed, VALIDATION_SAMPLES)


class _Objective:
    """Energy minimized by the search: minimax leakage, or the log worst-case relative BER of a design.

    With a design, permutations whose minimax leakage exceeds the identity's are infeasible (infinite energy)."""

    def __init__(self, taps: typing.Sequence[float], n: int, design: typing.Optional[BerDesign] = None,
                 seed: int = 0) -> None:
        self.evaluator = _LeakageEvaluator(taps, n)
        identity = np.arange(n)[np.newaxis, :]
        self.identity_cost = float(self.evaluator.costs(identity)[0])
        self.estimator = (_BerEstimator.for_design(self.evaluator, design, seed)
                          if design is not None else None)

    def __call__(self, perms: np.ndarray) -> np.ndarray:
        perms = np.atleast_2d(perms)
        energies = np.empty(perms.shape[0])
        chunk = self.estimator.chunk if self.estimator is not None else perms.shape[0]
        for start in range(0, perms.shape[0], chunk):
            responses = self.evaluator.responses(perms[start:start + chunk])
            costs = np.abs(self.evaluator.leakage(responses)).max(axis=(-2, -1))
            if self.estimator is None:
                energies[start:start + chunk] = costs
                continue
            relative = self.estimator.from_responses(responses) / self.estimator.identity
            energy = np.log(relative.max(axis=-1))
            energies[start:start + chunk] = np.where(costs <= self.identity_cost * (1 + 1e-12), energy, np.inf)
        return energies


def isi_cost(perm, taps: typing.Sequence[float],
             hadamard: typing.Optional[transforms.BinaryHadamard] = None) -> IsiCostReport:
    interleaver = _as_interleaver(perm)
    bipolar = hadamard.bipolar if hadamard is not None else None
    if hadamard is not None and hadamard.order != interleaver.n:
        raise InvalidPermutationError("permutation of %i chips for a Hadamard matrix of order %i" % (
            interleaver.n, hadamard.order))
    evaluator = _LeakageEvaluator(taps, interleaver.n, bipolar)
    leakage = evaluator.matrices(interleaver.perm[np.newaxis, :])[0]
    return IsiCostReport(interleaver, float(np.abs(leakage).max()), leakage)


def design_gain(perm, taps: typing.Sequence[float], design: BerDesign, seed: int = 0) -> np.ndarray:
    """Estimated BER of `perm` over the identity's at the measurable design points, on a fresh data sample."""
    interleaver = _as_interleaver(perm)
    evaluator = _LeakageEvaluator(taps, interleaver.n)
    estimator = _BerEstimator.for_design(evaluator, design, seed).resampled(seed + 1)
    return estimator.relative(interleaver.perm)[0]


def exhaustive_interleaver(taps: typing.Sequence[float], n: int,
                           design: typing.Optional[BerDesign] = None) -> IsiCostReport:
    """Best permutation over all N!; ties keep the lexicographically first, so identity wins when nothing beats it."""
    if n > EXHAUSTIVE_LIMIT:
        raise InvalidParameterError("exhaustive search is limited to N <= %i, got %i" % (EXHAUSTIVE_LIMIT, n))
    objective = _Objective(taps, n, design)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)

    # Many permutations share a decoder response; score each response once
    responses = objective.evaluator.responses(perms).reshape(perms.shape[0], -1)
    _, first, inverse = np.unique(np.round(responses, 12) + 0.0, axis=0, return_index=True, return_inverse=True)
    energies = objective(perms[first])[inverse.reshape(-1)]
    LOG.debug("%i permutations, %i distinct responses", perms.shape[0], first.size)
    best = int(np.argmin(energies))
    return isi_cost(perms[best], taps)


def anneal_interleaver(taps: typing.Sequence[float], n: int, budget: int, seed: int = 0,
                       design: typing.Optional[BerDesign] = None) -> IsiCostReport:
    """Simulated annealing over random transpositions, starting from the identity.

    The initial temperature is the energy spread of random permutations; the temperature cools geometrically and is
    reset to its initial value, restarting from the best permutation so far, once it falls below a small fraction
    of it."""
    if budget < 1:
        raise InvalidParameterError("annealing budget must be at least 1, got %r" % (budget,))
    objective = _Objective(taps, n, design, seed)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    current = np.arange(n)
    current_energy = float(objective(current)[0])
    best, best_energy = current.copy(), current_energy
    if design is None and best_energy == 0:
        return isi_cost(best, taps)

    samples = objective(np.array([rng.permutation(n) for _ in range(TEMPERATURE_SAMPLES)]))
    samples = samples[np.isfinite(samples)]
    initial_temperature = float(np.std(samples)) if samples.size > 1 else 0.0
    initial_temperature = initial_temperature or abs(best_energy) or 1.0
    temperature = initial_temperature

    for _ in range(budget):
        i, j = rng.choice(n, size=2, replace=False)
        candidate = current.copy()
        candidate[i], candidate[j] = candidate[j], candidate[i]
        candidate_energy = float(objective(candidate)[0])

        delta = candidate_energy - current_energy
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            current, current_energy = candidate, candidate_energy
            if current_energy < best_energy:
                best, best_energy = current.copy(), current_energy

        temperature *= COOLING
        if temperature < initial_temperature * REHEAT_FLOOR:
            temperature = initial_temperature
            current, current_energy = best.copy(), best_energy

    return isi_cost(best, taps)


def optimize_interleaver(taps: typing.Sequence[float], n: int, budget: int = 20000, seed: int = 0,
                         design: typing.Optional[BerDesign] = None) -> Interleaver:
    """Exhaustive search up to N = 8, annealing above; never worse than the identity.

    With a design, the result must also beat the identity's estimated BER on an independent data sample at every
    design point, otherwise the identity is returned."""
    identity = Interleaver.identity(n)
    identity_cost = isi_cost(identity, taps).cost
    if identity_cost == 0:
        LOG.info("channel %s causes no leakage at N=%i, keeping the identity", list(taps), n)
        return identity

    if n <= EXHAUSTIVE_LIMIT:
        report = exhaustive_interleaver(taps, n, design)
    else:
        report = anneal_interleaver(taps, n, budget, seed, design)

    if report.cost > identity_cost:
        report = isi_cost(identity, taps)
    if design is not None:
        gain = design_gain(report.perm, taps, design, seed)
        if gain.max() > 1:
            LOG.info("searched interleaver does not lower the estimated BER (%s), keeping the identity",
                     np.round(gain, 3).tolist())
            report = isi_cost(identity, taps)
        else:
            LOG.info("estimated BER relative to the identity: %s", np.round(gain, 3).tolist())
    LOG.info("interleaver for N=%i, channel %s: leakage %.6g (identity %.6g)",
             n, list(taps), report.cost, identity_cost)
    return report.perm


def save_interleaver(path: str, interleaver: Interleaver) -> None:
    """First line N, second line the permutation indices separated by spaces."""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("%i\n" % interleaver.n)
        f.write(" ".join(str(int(i)) for i in interleaver.perm))
        f.write("\n")


def load_interleaver(path: str, n: typing.Optional[int] = None) -> Interleaver:
    try:
        with open(path, encoding='utf-8') as f:
            lines = [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise ConfigError("cannot read interleaver %s: %s" % (path, e.strerror))

    if len(lines) != 2:
        raise ConfigError("interleaver file %s must have two lines, got %i" % (path, len(lines)))
    try:
        declared = int(lines[0])
        perm = [int(part) for part in lines[1].split()]
    except ValueError:
        raise ConfigError("interleaver file %s is not made of integers" % path)

    if len(perm) != declared:
        raise InvalidPermutationError("file declares N=%i but lists %i indices" % (declared, len(perm)))
    if n is not None and declared != n:
        raise InvalidPermutationError("interleaver has N=%i, modem is configured for N=%i" % (declared, n))
    return Interleaver.from_perm(perm)
