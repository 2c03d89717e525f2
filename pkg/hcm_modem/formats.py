"""On-disk formats: the BER curve CSV and the run manifest sidecar."""
import datetime
import hashlib
import json
import logging
import os
import tempfile
import typing

from hcm_modem import config
from hcm_modem.errors import ConfigError
from hcm_modem.utils import format_number

LOG = logging.getLogger(__name__)

CSV_FORMAT_VERSION = 1
CSV_HEADER = ('power_dbm', 'ber', 'ci95', 'bits', 'errors')
MANIFEST_SUFFIX = '.manifest.json'


def csv_text(points: typing.Iterable[typing.Any]) -> str:
    """One row per BerPoint, shortest round-trip numbers, `\\n` line ends."""
    lines = [",".join(CSV_HEADER)]
    for point in points:
        lines.append(",".join(format_number(getattr(point, field)) for field in CSV_HEADER))
    return "\n".join(lines) + "\n"


def read_csv(path: str) -> typing.List[typing.Dict[str, float]]:
    try:
        with open(path, encoding='utf-8') as f:
            rows = [line.rstrip('\n') for line in f if line.strip()]
    except OSError as e:
        raise ConfigError("cannot read %s: %s" % (path, e.strerror))
    if not rows or tuple(rows[0].split(',')) != CSV_HEADER:
        raise ConfigError("%s is not a BER curve CSV" % path)

    result = []
    for row in rows[1:]:
        values = row.split(',')
        try:
            result.append({name: (int(value) if name in ('bits', 'errors') else float(value))
                           for name, value in zip(CSV_HEADER, values)})
        except ValueError:
            raise ConfigError("%s: malformed row %r" % (path, row))
    return result


def write_atomic(path: str, text: str) -> None:
    """Writes to a temporary sibling and renames, so the target is either complete or untouched."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, temporary = tempfile.mkstemp(prefix='.%s.' % os.path.basename(path), dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(temporary, path)
    except BaseException:
        os.unlink(temporary)
        raise


def config_hash(spec: config.SweepSpec) -> str:
    return hashlib.sha256(config.config_text(spec).encode('utf-8')).hexdigest()


RunManifest = typing.NamedTuple('RunManifest', [
    ('label', str),
    ('config', str),  # canonical config text
    ('config_sha256', str),
    ('version', str),
    ('created', str),  # UTC, metadata only
    ('seeds', typing.List[int]),
    ('csv_format', int),
    ('data_rate', float),
    ('interleaver', typing.Optional[typing.List[int]]),
    ('flagged', typing.List[float]),
])


def build_manifest(label: str, spec: config.SweepSpec, version: str,
                   interleaver: typing.Optional[typing.Sequence[int]] = None,
                   flagged: typing.Sequence[float] = ()) -> RunManifest:
    return RunManifest(
        label=label,
        config=config.config_text(spec),
        config_sha256=config_hash(spec),
        version=version,
        created=datetime.datetime.now(datetime.timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ'),
        seeds=[spec.seed + index for index in range(len(spec.powers))],
        csv_format=CSV_FORMAT_VERSION,
        data_rate=spec.data_rate,
        interleaver=None if interleaver is None else [int(i) for i in interleaver],
        flagged=list(flagged),
    )


def manifest_text(manifest: RunManifest) -> str:
    return json.dumps(manifest._asdict(), indent=2, sort_keys=True) + "\n"


def load_manifest(path: str) -> RunManifest:
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError("cannot read manifest %s: %s" % (path, e.strerror))
    except ValueError as e:
        raise ConfigError("manifest %s is not JSON: %s" % (path, e))

    missing = set(RunManifest._fields).difference(data)
    if missing:
        raise ConfigError("manifest %s lacks %s" % (path, ", ".join(sorted(missing))))
    if data['csv_format'] != CSV_FORMAT_VERSION:
        raise ConfigError("manifest %s uses CSV format %r, this version writes %i" % (
            path, data['csv_format'], CSV_FORMAT_VERSION))

    manifest = RunManifest(**{name: data[name] for name in RunManifest._fields})
    if hashlib.sha256(manifest.config.encode('utf-8')).hexdigest() != manifest.config_sha256:
        raise ConfigError("manifest %s: config does not match its hash" % path)
    return manifest


def manifest_spec(manifest: RunManifest) -> config.SweepSpec:
    return config.parse_config_text(manifest.config)


def manifest_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + MANIFEST_SUFFIX
