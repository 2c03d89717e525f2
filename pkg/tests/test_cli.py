import json
import os

import pytest

from hcm_modem import cli, formats
from hcm_modem.interleaver_opt import load_interleaver

GOLDEN_CSV = ("power_dbm,ber,ci95,bits,errors\n"
              "14.0,0.0,0.0,1050,0\n"
              "15.0,0.0,0.0,1050,0\n"
              "16.0,0.0,0.0,1050,0\n")

NOISELESS_HCM = ['simulate', '--scheme', 'hcm', '--n', '8', '--m', '2', '--noise-dbm', 'none', '--power', '14:16:1',
                 '--max-bits', '1000', '--symbols-per-trial', '10']


def run_json(capsys, *argv):
    assert cli.main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def read_text(path):
    with open(str(path), encoding='utf-8', newline='') as f:
        return f.read()


def test_analyze(capsys):
    assert run_json(capsys, 'analyze', 'rate', '--n', '128', '--m', '2') == {'rate': 0.9921875}
    assert run_json(capsys, 'analyze', 'rate', '--n', '128', '--m', '16', '--scheme', 'aco-ofdm') == {'rate': 1.0}
    assert run_json(capsys, 'analyze', 'aco-power', '--sigma', '1', '--p0', '100')['p_aco'] == pytest.approx(
        0.398942, abs=1e-6)
    assert run_json(capsys, 'analyze', 'q', '--x', '0')['q'] == pytest.approx(0.5)

    result = run_json(capsys, 'analyze', 'ber-hcm', '--m', '2', '--sigma', '0.01', '--noise-std', '0.005')
    assert result['ber_pam_gray'] == pytest.approx(2 * result['ber'])


def test_simulate_golden_csv(tmp_path, capsys):
    out_dir = tmp_path / 'out'
    # Noiseless points never reach the error target, so they are flagged
    assert cli.main(NOISELESS_HCM + ['--out-dir', str(out_dir)]) == 3

    assert read_text(out_dir / 'hcm.csv') == GOLDEN_CSV
    manifest = formats.load_manifest(str(out_dir / 'hcm.manifest.json'))
    assert manifest.label == 'hcm'
    assert manifest.flagged == [14.0, 15.0, 16.0]
    assert manifest.seeds == [manifest.seeds[0] + i for i in range(3)]

    summary = json.loads(capsys.readouterr().out)
    assert summary['curves']['hcm']['config_sha256'] == manifest.config_sha256


def test_manifest_rerun_is_byte_identical(tmp_path):
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert cli.main(NOISELESS_HCM + ['--seed', '11', '--out-dir', str(first)]) == 3
    assert cli.main(['simulate', '--manifest', str(first / 'hcm.manifest.json'), '--out-dir', str(second)]) == 3
    assert read_text(first / 'hcm.csv') == read_text(second / 'hcm.csv')


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / 'run.ini'
    path.write_text("[modem]\nscheme = dcr-hcm\nn = 16\n\n[channel]\nnoise_dbm = none\n")
    out_dir = tmp_path / 'out'
    assert cli.main(['simulate', '--config', str(path), '--n', '8', '--power', '14', '--max-bits', '500',
                     '--out-dir', str(out_dir)]) == 3

    spec = formats.manifest_spec(formats.load_manifest(str(out_dir / 'dcr-hcm.manifest.json')))
    assert spec.n == 8
    assert spec.powers == (14.0,)


def test_malformed_config(tmp_path):
    path = tmp_path / 'bad.ini'
    path.write_text("[modem]\nn = sixteen\n")
    out_dir = tmp_path / 'out'
    assert cli.main(['simulate', '--config', str(path), '--out-dir', str(out_dir)]) == 1
    assert not os.path.exists(str(out_dir / 'hcm.csv'))


def test_invalid_spec(tmp_path):
    out_dir = tmp_path / 'out'
    assert cli.main(['simulate', '--n', '6', '--out-dir', str(out_dir)]) == 2
    assert not os.path.exists(str(out_dir))


def test_unsupported_scheme(tmp_path):
    out_dir = tmp_path / 'out'
    assert cli.main(['simulate', '--scheme', 'dco-ofdm', '--out-dir', str(out_dir)]) == 2
    assert cli.main(['papr', '--scheme', 'dco-ofdm']) == 2
    assert cli.main(['simulate', '--scheme', 'qpsk', '--out-dir', str(out_dir)]) == 1
    assert not os.path.exists(str(out_dir))


@pytest.mark.parametrize('argv', [
    ['simulate', '--n', 'abc'],
    ['simulate', '--taps', '0.9,x'],
    ['simulate', '--preset', 'fig9'],
    ['analyze', 'q'],
    ['frobnicate'],
])
def test_usage_errors_are_config_errors(argv, capsys):
    assert cli.main(argv) == 1
    assert 'usage' in capsys.readouterr().err


def test_version_exits_cleanly(capsys):
    assert cli.main(['--version']) == 0
    assert capsys.readouterr().out.startswith('hcm-modem ')


def test_optimize_interleaver(tmp_path, capsys):
    path = str(tmp_path / 'perm.txt')
    result = run_json(capsys, 'optimize-interleaver', '--taps', '1', '--n', '16', '--out', path)
    assert result['cost'] == result['identity_cost'] == 0
    assert load_interleaver(path, 16).perm.tolist() == list(range(16))

    result = run_json(capsys, 'optimize-interleaver', '--taps', '0.9,0.1', '--n', '8', '--out', path)
    assert result['cost'] <= result['identity_cost']
    assert 'relative_ber' not in result
    assert load_interleaver(path).n == 8

    result = run_json(capsys, 'optimize-interleaver', '--taps', '0.9,0.1', '--n', '8', '--out', path,
                      '--noise-dbm', '-20', '--power', '4:8:1')
    assert result['cost'] <= result['identity_cost']
    assert all(0 < r <= 1 for r in result['relative_ber'])


def test_papr(capsys):
    hcm = run_json(capsys, 'papr', '--scheme', 'hcm', '--n', '16', '--symbols', '2000')
    assert 1 < hcm['max_papr'] <= 2.05
    assert hcm['ccdf']['3'] == 0.0

    aco = run_json(capsys, 'papr', '--scheme', 'aco-ofdm', '--n', '64', '--m', '16', '--symbols', '2000')
    assert aco['max_papr'] > hcm['max_papr']


@pytest.mark.parametrize('name', ['fig7', 'dispersive'])
def test_dispersive_preset_resolves(name):
    args = cli.build_parser().parse_args(['simulate', '--preset', name, '--max-bits', '1000'])
    runs = cli._resolve_runs(args)
    assert [label for label, _, _ in runs] == ['aco-ofdm', 'hcm', 'interleaved-hcm', 'hcm-ideal']
    assert all(spec.max_bits == 1000 for _, spec, _ in runs)
    assert runs[3][1].taps == (1.0,)


@pytest.mark.parametrize('name', ['fig6', 'awgn'])
def test_awgn_preset_resolves(name):
    args = cli.build_parser().parse_args(['simulate', '--preset', name])
    assert len(cli._resolve_runs(args)) == 6


def test_analyze_crossover(tmp_path, capsys):
    curve, reference = tmp_path / 'hcm.csv', tmp_path / 'aco.csv'
    curve.write_text("power_dbm,ber,ci95,bits,errors\n18.0,0.01,0.0,1000,10\n19.0,0.001,0.0,10000,10\n")
    reference.write_text("power_dbm,ber,ci95,bits,errors\n18.0,0.001,0.0,10000,10\n19.0,0.01,0.0,1000,10\n")
    result = run_json(capsys, 'analyze', 'crossover', '--curve', str(curve), '--reference', str(reference))
    assert result['crossover_dbm'] == pytest.approx(18.5)

    reference.write_text("power_dbm,ber\n18.0,0.001\n")
    assert cli.main(['analyze', 'crossover', '--curve', str(curve), '--reference', str(reference)]) == 1
    assert cli.main(['analyze', 'crossover', '--curve', str(tmp_path / 'missing.csv'),
                     '--reference', str(curve)]) == 1
