"""Monte Carlo BER engine.

Each power point runs trials 0, 1, 2, ... until the stop rule holds. Trial t of a point is fully determined by
(point seed, t), trials are reduced in index order, and the point ends at the first trial that satisfies the stop rule;
trials computed past it by a parallel batch are discarded. The result therefore does not depend on the worker count.
"""
import asyncio
import concurrent.futures
import functools
import logging
import math
import typing

from hcm_modem import hcm
from hcm_modem.chain import Chain, TrialContext, TrialResult
from hcm_modem.config import Scheme, SweepSpec
from hcm_modem.event import Event
from hcm_modem.interleaver_opt import BerDesign, load_interleaver, optimize_interleaver
from hcm_modem.utils import dbm_to_watts
from hcm_modem.schemes.aco_ofdm import AcoOfdmSchemeMixin
from hcm_modem.schemes.hcm import HcmSchemeMixin

LOG = logging.getLogger(__name__)

Z95 = 1.959963984540054


class TrialRunner(HcmSchemeMixin, AcoOfdmSchemeMixin, Chain):
    # All of the per-scheme work is delegated to the mixins and Chain.
    pass


@functools.lru_cache(maxsize=8)
def _runner_for(context: TrialContext) -> TrialRunner:
    return TrialRunner(context)


def run_trial(context: TrialContext, trial: int) -> TrialResult:
    """Module level so worker processes can unpickle it; runners are cached per process."""
    return _runner_for(context).run_trial(trial)


class BerPoint(typing.NamedTuple('BerPoint', [
    ('power_dbm', float),
    ('ber', float),
    ('ci95', float),
    ('bits', int),
    ('errors', int),
    ('flagged', bool),  # bit budget exhausted before the error target
])):
    @classmethod
    def from_counts(cls, power_dbm: float, bits: int, errors: int, flagged: bool = False) -> "BerPoint":
        ber = errors / bits if bits else 0.0
        return cls(power_dbm, ber, wald_ci95(errors, bits), bits, errors, flagged)


BerCurve = typing.NamedTuple('BerCurve', [
    ('label', str),
    ('spec', SweepSpec),
    ('points', typing.Tuple[BerPoint, ...]),
    ('interleaver', typing.Optional[hcm.Interleaver]),
])


def wald_ci95(errors: int, bits: int) -> float:
    if not bits:
        return 0.0
    p = errors / bits
    return Z95 * math.sqrt(p * (1 - p) / bits)


def point_seed(base_seed: int, index: int) -> int:
    return base_seed + index


def stop_rule_met(spec: SweepSpec, bits: int, errors: int) -> bool:
    return errors >= spec.min_errors or bits >= spec.max_bits


def interleaver_design(spec: SweepSpec) -> typing.Optional[BerDesign]:
    """Operating points of the sweep as seen by the decoder: noise std over the chip amplitude P / E[x] per power.

    None for a noiseless sweep. BERs under min_errors / max_bits cannot be measured, so they do not steer the search."""
    if not spec.noise_var:
        return None
    noise_std = math.sqrt(spec.noise_var)
    mean_chip = hcm.hcm_mean_chip(spec.n)
    ratios = tuple(noise_std * mean_chip / dbm_to_watts(p) for p in spec.powers)
    return BerDesign(spec.m, ratios, spec.min_errors / spec.max_bits)


def resolve_interleaver(spec: SweepSpec) -> typing.Optional[hcm.Interleaver]:
    """The interleaver an interleaved-HCM sweep uses: loaded from spec.interleaver, or searched with the sweep seed
    for the sweep's own operating points."""
    if spec.scheme is not Scheme.INTERLEAVED_HCM:
        return None
    if spec.interleaver:
        return load_interleaver(spec.interleaver, spec.n)
    return optimize_interleaver(spec.taps, spec.n, budget=spec.anneal_budget, seed=spec.seed,
                                design=interleaver_design(spec))


class Simulator:
    """Runs BER points and sweeps; `on_point` fires for every completed point.

    With more than one worker, trials are spread over a process pool in batches of `workers` trials."""

    on_point = Event()  # type: Event[BerPoint]

    def __init__(self, workers: typing.Optional[int] = None) -> None:
        self.workers = workers
        self._executor = None  # type: typing.Optional[concurrent.futures.Executor]

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def _worker_count(self, spec: SweepSpec) -> int:
        return self.workers if self.workers is not None else spec.workers

    def _get_executor(self, workers: int) -> concurrent.futures.Executor:
        if self._executor is None:
            self._executor = concurrent.futures.ProcessPoolExecutor(max_workers=workers)
        return self._executor

    async def _run_batch(self, context: TrialContext, first: int, workers: int) -> typing.List[TrialResult]:
        if workers == 1:
            result = run_trial(context, first)
            await asyncio.sleep(0)
            return [result]

        loop = asyncio.get_running_loop()
        executor = self._get_executor(workers)
        futures = [loop.run_in_executor(executor, run_trial, context, first + offset) for offset in range(workers)]
        return list(await asyncio.gather(*futures))

    async def run_point(self, spec: SweepSpec, power_dbm: float, seed: typing.Optional[int] = None,
                        interleaver: typing.Optional[hcm.Interleaver] = None) -> BerPoint:
        """BER at one average optical power; `seed` defaults to the sweep's base seed."""
        spec.validate()
        if interleaver is None and spec.scheme is Scheme.INTERLEAVED_HCM:
            interleaver = resolve_interleaver(spec)
        perm = None if interleaver is None else tuple(int(i) for i in interleaver.perm)
        context = TrialContext(spec, float(power_dbm), spec.seed if seed is None else seed, perm)

        workers = self._worker_count(spec)
        bits = errors = trial = 0
        done = False
        while not done:
            for result in await self._run_batch(context, trial, workers):
                bits += result.bits
                errors += result.errors
                trial += 1
                if stop_rule_met(spec, bits, errors):
                    done = True
                    break

        flagged = errors < spec.min_errors
        point = BerPoint.from_counts(float(power_dbm), bits, errors, flagged)
        if flagged:
            LOG.warning("%s at %s dBm: only %i errors in %i bits (target %i), point flagged",
                        spec.scheme.value, power_dbm, errors, bits, spec.min_errors)
        LOG.info("%s at %s dBm: BER %.4g +- %.2g (%i/%i)", spec.scheme.value, power_dbm, point.ber, point.ci95,
                 errors, bits)
        self.on_point(point)
        return point

    async def run_sweep(self, spec: SweepSpec, label: typing.Optional[str] = None,
                        interleaver: typing.Optional[hcm.Interleaver] = None) -> BerCurve:
        spec.validate()
        label = label or spec.scheme.value
        if interleaver is None:
            interleaver = resolve_interleaver(spec)

        LOG.info("sweep %s: %i points from %s to %s dBm", label, len(spec.powers), spec.powers[0], spec.powers[-1])
        points = []
        for index, power in enumerate(spec.powers):
            points.append(await self.run_point(spec, power, point_seed(spec.seed, index), interleaver))
        LOG.info("sweep %s done, %i point(s) flagged", label, sum(point.flagged for point in points))
        return BerCurve(label, spec, tuple(points), interleaver)
