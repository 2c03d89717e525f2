import json
import os

import pytest

from hcm_modem import config, formats
from hcm_modem.errors import ConfigError
from hcm_modem.sim import BerPoint


POINTS = [
    BerPoint.from_counts(14.0, 100000, 250),
    BerPoint.from_counts(14.5, 2000000, 0, flagged=True),
]


def test_csv_golden():
    text = formats.csv_text(POINTS)
    lines = text.split('\n')
    assert lines[0] == 'power_dbm,ber,ci95,bits,errors'
    assert lines[1].startswith('14.0,0.0025,')
    assert lines[1].endswith(',100000,250')
    assert lines[2] == '14.5,0.0,0.0,2000000,0'
    assert lines[3] == ''
    assert '\r' not in text


def test_csv_round_trip(tmp_path):
    path = str(tmp_path / 'curve.csv')
    formats.write_atomic(path, formats.csv_text(POINTS))
    rows = formats.read_csv(path)
    assert [row['power_dbm'] for row in rows] == [14.0, 14.5]
    assert rows[0]['errors'] == 250
    assert rows[0]['ci95'] == POINTS[0].ci95


def test_read_csv_rejects_other_files(tmp_path):
    path = tmp_path / 'other.csv'
    path.write_text('a,b\n1,2\n')
    with pytest.raises(ConfigError):
        formats.read_csv(str(path))


def test_write_atomic_leaves_no_temporaries(tmp_path):
    path = str(tmp_path / 'out.csv')
    formats.write_atomic(path, 'first\n')
    formats.write_atomic(path, 'second\n')
    assert os.listdir(str(tmp_path)) == ['out.csv']
    with open(path) as f:
        assert f.read() == 'second\n'


def test_manifest(tmp_path):
    spec = config.SweepSpec(scheme=config.Scheme.INTERLEAVED_HCM, n=8, powers=(14.0, 15.0, 16.0), seed=40)
    manifest = formats.build_manifest('interleaved', spec, '1.2.3', interleaver=[1, 0, 2, 3, 4, 5, 6, 7],
                                      flagged=[16.0])
    assert manifest.seeds == [40, 41, 42]
    assert manifest.csv_format == formats.CSV_FORMAT_VERSION
    assert manifest.data_rate == 100e6
    assert manifest.config_sha256 == formats.config_hash(spec)

    path = formats.manifest_path(str(tmp_path / 'interleaved.csv'))
    assert path.endswith('interleaved.manifest.json')
    formats.write_atomic(path, formats.manifest_text(manifest))

    loaded = formats.load_manifest(path)
    assert loaded == manifest
    assert formats.manifest_spec(loaded) == spec


def test_config_hash_ignores_timestamp():
    spec = config.SweepSpec()
    first = formats.build_manifest('a', spec, '1')
    second = formats.build_manifest('a', spec, '1')._replace(created='2000-01-01T00:00:00Z')
    assert first.config_sha256 == second.config_sha256
    assert formats.config_hash(spec) != formats.config_hash(spec._replace(seed=1))


def test_tampered_manifest(tmp_path):
    manifest = formats.build_manifest('a', config.SweepSpec(), '1')
    data = manifest._asdict()
    data['config'] = data['config'].replace('n = 128', 'n = 64')
    path = tmp_path / 'a.manifest.json'
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        formats.load_manifest(str(path))


@pytest.mark.parametrize('content', ['not json', '{}', json.dumps({'csv_format': 99})])
def test_bad_manifests(tmp_path, content):
    path = tmp_path / 'bad.manifest.json'
    path.write_text(content)
    with pytest.raises(ConfigError):
        formats.load_manifest(str(path))
