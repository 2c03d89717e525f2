"""Modem and sweep configuration: typed records, the INI-style config file and the built-in presets.

Config files are flat key-value text in four sections::

    [modem]
    scheme = hcm
    n = 128
    m = 2
    cp_len = 0
    p0 = 0.5

    [channel]
    taps = 1.0
    noise_dbm = -20

    [sweep]
    powers = 14:24:0.5
    min_errors = 200
    max_bits = 20000000
    symbols_per_trial = 64

    [run]
    seed = 20130501
    workers = 1

Every value is parsed according to the annotated type of the matching `SweepSpec` field.
"""
import configparser
import enum
import inspect
import logging
import math
import typing

from hcm_modem.errors import ConfigError, SpecError, UnsupportedFeature
from hcm_modem.utils import dbm_to_watts, format_number, is_power_of_two, parse_power_grid

LOG = logging.getLogger(__name__)

DEFAULT_SEED = 20130501
PowerGrid = typing.NewType('PowerGrid', tuple)
Taps = typing.NewType('Taps', tuple)


class Scheme(str, enum.Enum):
    HCM = 'hcm'
    DCR_HCM = 'dcr-hcm'
    INTERLEAVED_HCM = 'interleaved-hcm'
    ACO_OFDM = 'aco-ofdm'

    @property
    def is_hcm(self) -> bool:
        return self is not Scheme.ACO_OFDM

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        try:
            return cls(text.strip().lower())
        except ValueError:
            pass
        if text.strip().lower() == 'dco-ofdm':
            raise UnsupportedFeature("DCO-OFDM")
        raise ConfigError("unknown scheme %r, expected one of %s" % (text, ", ".join(s.value for s in cls)))


ModemConfig = typing.NamedTuple('ModemConfig', [
    ('scheme', Scheme),
    ('n', int),
    ('m', int),
    ('cp_len', int),
    ('avg_power', float),  # target average optical power, W
    ('p0', float),  # LED peak power, W
])


class SweepSpec(typing.NamedTuple('SweepSpec', [
    ('scheme', Scheme),
    ('n', int),
    ('m', int),
    ('cp_len', int),
    ('p0', float),
    ('taps', Taps),
    ('noise_dbm', typing.Optional[float]),
    ('powers', PowerGrid),
    ('min_errors', int),
    ('max_bits', int),
    ('symbols_per_trial', int),
    ('equalize', bool),
    ('seed', int),
    ('workers', int),
    ('interleaver', typing.Optional[str]),
    ('anneal_budget', int),
    ('data_rate', float),  # metadata only; the simulation is discrete time
])):
    __slots__ = ()

    @property
    def noise_var(self) -> float:
        return 0.0 if self.noise_dbm is None else dbm_to_watts(self.noise_dbm)

    @property
    def bits_per_symbol(self) -> int:
        per_component = int(math.log2(self.m))
        if self.scheme is Scheme.ACO_OFDM:
            return self.n // 4 * per_component
        return (self.n - 1) * per_component

    def modem_config(self, power_dbm: float) -> ModemConfig:
        return ModemConfig(self.scheme, self.n, self.m, self.cp_len, dbm_to_watts(power_dbm), self.p0)

    def validate(self) -> "SweepSpec":
        if not is_power_of_two(self.n) or self.n < 4:
            raise SpecError("n must be a power of two >= 4, got %r" % self.n)
        if self.scheme is Scheme.ACO_OFDM:
            side = int(round(math.sqrt(self.m)))
            if side * side != self.m or not is_power_of_two(side) or side < 2:
                raise SpecError("ACO-OFDM needs a square QAM order, got %r" % self.m)
            too_high = [p for p in self.powers if dbm_to_watts(p) >= self.p0 / 2]
            if too_high:
                raise SpecError("ACO-OFDM cannot reach %s dBm with p0 = %g W (limit p0/2)" % (
                    ", ".join(format_number(p) for p in too_high), self.p0))
        elif not is_power_of_two(self.m) or self.m < 2:
            raise SpecError("HCM needs a power-of-two PAM order, got %r" % self.m)
        if not 0 <= self.cp_len < self.n:
            raise SpecError("cp_len must be in [0, n), got %r" % self.cp_len)
        if self.p0 <= 0:
            raise SpecError("p0 must be positive")
        if not self.taps or any(not math.isfinite(t) for t in self.taps):
            raise SpecError("channel taps must be finite, got %r" % (self.taps,))
        if not self.powers or any(b <= a for a, b in zip(self.powers, self.powers[1:])):
            raise SpecError("power grid must be nonempty and ascending")
        if self.min_errors < 1 or self.max_bits < 1 or self.symbols_per_trial < 1:
            raise SpecError("stop rule and trial size must be positive")
        if self.workers < 1:
            raise SpecError("workers must be at least 1")
        if self.seed < 0:
            raise SpecError("seed must be nonnegative")
        if self.min_errors < 100:
            LOG.warning("min_errors=%i: points are not publishable below 100 errors", self.min_errors)
        return self


SweepSpec.__new__.__defaults__ = (  # type: ignore
    Scheme.HCM, 128, 2, 0, 0.5, Taps((1.0,)), -20.0, PowerGrid((20.0,)), 200, 20000000, 64, False, DEFAULT_SEED, 1,
    None, 20000, 100e6)


def read_value(text: str, the_type: typing.Any) -> typing.Any:
    """Parses one config value into the given annotated field type."""
    text = text.strip()

    origin = getattr(the_type, '__origin__', None)
    if origin is typing.Union:
        # Optionals: an empty value or "none" means None
        if not text or text.lower() == 'none':
            return None
        the_type, = set(the_type.__args__).difference({type(None)})

    if the_type is PowerGrid:
        return PowerGrid(tuple(parse_power_grid(text)))

    if the_type is Taps:
        try:
            return Taps(tuple(float(part) for part in text.split(',') if part.strip()))
        except ValueError:
            raise ConfigError("taps %r are not a comma separated list of numbers" % text)

    if inspect.isclass(the_type) and issubclass(the_type, Scheme):
        return Scheme.parse(text)

    if the_type is bool:
        lowered = text.lower()
        if lowered in ('1', 'true', 'yes', 'on'):
            return True
        if lowered in ('0', 'false', 'no', 'off'):
            return False
        raise ConfigError("%r is not a boolean" % text)

    if the_type in (int, float, str):
        try:
            if the_type is int:
                return int(float(text)) if 'e' in text.lower() else int(text)
            return the_type(text)
        except ValueError:
            raise ConfigError("%r is not a valid %s" % (text, the_type.__name__))

    raise ConfigError('unsupported type: %s' % the_type)


def write_value(value: typing.Any) -> str:
    if value is None:
        return 'none'
    if isinstance(value, Scheme):
        return value.value
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ",".join(format_number(v) for v in value)
    if isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


_SECTIONS = (
    ('modem', ('scheme', 'n', 'm', 'cp_len', 'p0')),
    ('channel', ('taps', 'noise_dbm')),
    ('sweep', ('powers', 'min_errors', 'max_bits', 'symbols_per_trial', 'equalize')),
    ('run', ('seed', 'workers', 'interleaver', 'anneal_budget', 'data_rate')),
)


def _field_types() -> typing.Dict[str, typing.Any]:
    return typing.get_type_hints(SweepSpec)


def apply_overrides(spec: SweepSpec, overrides: typing.Dict[str, typing.Any]) -> SweepSpec:
    """Replaces fields of spec; string values are parsed by field type, other values are taken as they are."""
    types = _field_types()
    changes = {}
    for name, value in overrides.items():
        if value is None:
            continue
        if name not in types:
            raise ConfigError("unknown setting %r" % name)
        changes[name] = read_value(value, types[name]) if isinstance(value, str) else value
    return spec._replace(**changes)


def parse_config_text(text: str, base: SweepSpec = SweepSpec()) -> SweepSpec:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e).splitlines()[0])

    known = dict(_SECTIONS)
    values = {}
    for section in parser.sections():
        if section not in known:
            raise ConfigError("unknown section [%s]" % section)
        for key, value in parser.items(section):
            if key not in known[section]:
                raise ConfigError("unknown key %r in [%s]" % (key, section))
            values[key] = value

    return apply_overrides(base, values)


def load_config(path: str, base: SweepSpec = SweepSpec()) -> SweepSpec:
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("cannot read %s: %s" % (path, e.strerror))
    return parse_config_text(text, base)


def config_text(spec: SweepSpec) -> str:
    """Canonical config text: fixed section and key order, shortest round-trip numbers, `\\n` line ends."""
    lines = []
    for section, keys in _SECTIONS:
        lines.append("[%s]" % section)
        lines.extend("%s = %s" % (key, write_value(getattr(spec, key))) for key in keys)
        lines.append("")
    return "\n".join(lines)


# ---- Presets ----

def _preset_fig6() -> typing.List[typing.Tuple[str, SweepSpec]]:
    result = []
    for noise in (-30.0, -20.0):
        base = SweepSpec(n=128, p0=0.5, taps=Taps((1.0,)), noise_dbm=noise, cp_len=0,
                         powers=PowerGrid(tuple(parse_power_grid("10:23.5:0.5"))))
        result.append(("aco-ofdm_%g" % noise, base._replace(scheme=Scheme.ACO_OFDM, m=16)))
        result.append(("hcm_%g" % noise, base._replace(scheme=Scheme.HCM, m=2,
                                                       powers=PowerGrid(tuple(parse_power_grid("10:26:0.5"))))))
        result.append(("dcr-hcm_%g" % noise, base._replace(scheme=Scheme.DCR_HCM, m=2,
                                                           powers=PowerGrid(tuple(parse_power_grid("7:26:0.5"))))))
    return result


def _preset_fig7() -> typing.List[typing.Tuple[str, SweepSpec]]:
    base = SweepSpec(n=128, p0=0.5, taps=Taps((0.9, 0.1)), noise_dbm=-20.0, cp_len=4,
                     powers=PowerGrid(tuple(parse_power_grid("14:23.5:0.5"))))
    return [
        ("aco-ofdm", base._replace(scheme=Scheme.ACO_OFDM, m=16)),
        ("hcm", base._replace(scheme=Scheme.HCM, m=2)),
        ("interleaved-hcm", base._replace(scheme=Scheme.INTERLEAVED_HCM, m=2)),
        ("hcm-ideal", base._replace(scheme=Scheme.HCM, m=2, taps=Taps((1.0,)))),
    ]


# fig6: AWGN comparison at two noise levels; fig7: dispersive channel with a cyclic prefix
PRESETS = {
    'fig6': _preset_fig6,
    'fig7': _preset_fig7,
}
PRESET_ALIASES = {
    'awgn': 'fig6',
    'dispersive': 'fig7',
}


def preset(name: str) -> typing.List[typing.Tuple[str, SweepSpec]]:
    try:
        return PRESETS[PRESET_ALIASES.get(name, name)]()
    except KeyError:
        raise ConfigError("unknown preset %r, expected one of %s" % (
            name, ", ".join(sorted(PRESETS) + sorted(PRESET_ALIASES))))
