import math
import numbers
import typing

from hcm_modem.errors import ConfigError


def dbm_to_watts(value: float) -> float:
    # Noise variances quoted in dBm use the same scale (W² treated like W).
    return 10.0 ** ((value - 30.0) / 10.0)


def watts_to_dbm(value: float) -> float:
    return 10.0 * math.log10(value) + 30.0


def parse_power_grid(value: typing.Union[str, typing.Sequence[float]]) -> typing.List[float]:
    """Turns `start:stop:step` (inclusive) or a comma separated list into an ascending dBm grid."""
    if not isinstance(value, str):
        grid = [float(v) for v in value]
    elif ':' in value:
        try:
            start, stop, step = (float(part) for part in value.split(':'))
        except ValueError:
            raise ConfigError("power grid %r is not start:stop:step" % value)
        if step <= 0 or stop < start:
            raise ConfigError("power grid %r is empty or descending" % value)
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        # Rounding keeps 14 + 3 * 0.1 from printing as 14.300000000000001
        grid = [round(start + i * step, 10) for i in range(count)]
    else:
        try:
            grid = [float(part) for part in value.split(',') if part.strip()]
        except ValueError:
            raise ConfigError("power grid %r is not a list of numbers" % value)

    if not grid:
        raise ConfigError("power grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("power grid must be strictly ascending")
    return grid


def format_number(value: typing.Union[int, float]) -> str:
    """Shortest round-trip decimal, locale independent."""
    if isinstance(value, (int, numbers.Integral)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0
