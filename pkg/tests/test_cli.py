import json

import pytest

from app.config import settings
from app.tools import cli


@pytest.fixture
def klein(tmp_path):
    path = tmp_path / 'klein.json'
    path.write_text(json.dumps({'base': {'kind': 'free', 'rank': 1}, 'epsilon': {'x': -1}}), encoding='utf-8')
    return str(path)


@pytest.fixture
def genus2_mod2(tmp_path):
    path = tmp_path / 'genus2.json'
    path.write_text(
        json.dumps({'base': {'kind': 'surface', 'genus': 2}, 'euler_degree': 1, 'fiber_modulus': 2}),
        encoding='utf-8',
    )
    return str(path)


def test_conj_reports_negative_decision(klein, capsys):
    code = cli.main(['conj', '--group', klein, 'x', 'x h'])

    assert code == cli.EXIT_NEGATIVE
    assert 'not conjugate' in capsys.readouterr().out


def test_conj_json_output_with_global_options(klein, capsys):
    code = cli.main(['--json', '--group', klein, 'conj', 'x', 'x h^2'])

    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['conjugate'] is True
    assert payload['fiber_offset'] == 2
    assert payload['witness']


def test_normalize_and_lambda(klein, capsys):
    assert cli.main(['normalize', '--group', klein, 'h x h']) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == 'x'

    assert cli.main(['lambda', '--group', klein, 'x']) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == 'lambda=2 lambda0=0'


def test_equal_uses_relator_bookkeeping(genus2_mod2, capsys):
    assert cli.main(['equal', '--group', genus2_mod2, 'a1 b1 A1 B1 a2 b2 A2 B2', 'h']) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == 'equal'
    assert cli.main(['equal', '--group', genus2_mod2, 'a1', 'a1 h']) == cli.EXIT_NEGATIVE


def test_lambda_on_finite_fiber_is_an_input_error(genus2_mod2, capsys):
    assert cli.main(['lambda', '--group', genus2_mod2, 'a1']) == cli.EXIT_INPUT
    assert 'error:' in capsys.readouterr().err


def test_order_witness_json(capsys):
    code = cli.main(['order-witness', 'x y X Y', '--prime', '3', '--k', '2', '--json'])

    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['verified_order'] == 9
    assert payload['degree_class'] == 2


def test_order_witness_for_composite_order(capsys):
    assert cli.main(['order-witness', 'x', '--n', '6']) == cli.EXIT_OK
    assert 'order 6' in capsys.readouterr().out


def test_split_validates_samples(genus2_mod2, capsys):
    code = cli.main(['split', '--group', genus2_mod2, '--samples', '50', '--json'])

    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['relator_order'] == 2
    assert payload['violations'] == 0


def test_verify_finite_dumps_catalog(tmp_path, capsys):
    dump = tmp_path / 'catalog.json'

    code = cli.main(['verify-finite', '--json', '--dump', str(dump)])

    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['passed'] is True
    assert len(payload['catalog']) == 15
    entries = json.loads(dump.read_text(encoding='utf-8'))
    assert len(entries) == 15
    assert {'group', 'subgroup', 't', 'automorphism'} <= set(entries[0])


def test_verify_finite_reads_a_dumped_catalog(tmp_path, capsys):
    dump = tmp_path / 'catalog.json'
    cli.main(['verify-finite', '--dump', str(dump)])
    capsys.readouterr()

    code = cli.main(['verify-finite', '--json', '--catalog', str(dump)])

    assert code == cli.EXIT_OK
    assert len(json.loads(capsys.readouterr().out)['catalog']) == 15


def test_verify_finite_rejects_a_broken_catalog(tmp_path, capsys):
    broken = tmp_path / 'catalog.json'
    broken.write_text('[{"name": "bad"}]', encoding='utf-8')

    assert cli.main(['verify-finite', '--catalog', str(broken)]) == cli.EXIT_INPUT
    assert 'error:' in capsys.readouterr().err


def test_witness_certificate_exit_code(klein, capsys):
    code = cli.main(['witness', '--group', klein, '--json', 'x', 'x h'])

    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload['status'] == 'certificate'
    assert payload['certificate']['stage1_modulus'] == 2


def test_witness_conjugate_and_budget_exit_codes(klein, genus2_mod2, tmp_path):
    assert cli.main(['witness', '--group', klein, 'x', 'x h^2']) == cli.EXIT_NEGATIVE

    genus2 = tmp_path / 'genus2_infinite.json'
    genus2.write_text('{"base": {"kind": "surface", "genus": 2}, "euler_degree": 1}', encoding='utf-8')
    code = cli.main(['witness', '--group', str(genus2), '--max-order', '2', '--max-candidates', '3', 'a1', 'a1 h'])
    assert code == cli.EXIT_BUDGET


def test_witness_schema(capsys):
    assert cli.main(['witness', '--schema']) == cli.EXIT_OK
    assert 'stage1_modulus' in json.loads(capsys.readouterr().out)['properties']


@pytest.mark.parametrize(
    'argv',
    [
        [],
        ['conj', 'x', 'x h'],
        ['bogus'],
        ['witness', 'x'],
        ['split', '--samples', 'many'],
    ],
)
def test_input_errors_exit_with_code_three(argv):
    assert cli.main(argv) == cli.EXIT_INPUT


def test_unknown_generator_suggests_a_name(genus2_mod2, capsys):
    code = cli.main(['normalize', '--group', genus2_mod2, 'a1 a11'])

    assert code == cli.EXIT_INPUT
    assert "did you mean 'a1'" in capsys.readouterr().err


def test_malformed_descriptor_is_an_input_error(tmp_path, capsys):
    path = tmp_path / 'bad.json'
    path.write_text('{"base": {"kind": "torus"}, "euler_degree": 1, "epsilon": {"x": -1}}', encoding='utf-8')

    assert cli.main(['conj', '--group', str(path), 'x', 'y']) == cli.EXIT_INPUT
    assert 'euler_degree' in capsys.readouterr().err


def test_closure_limit_maps_to_budget_exit(genus2_mod2, monkeypatch, capsys):
    monkeypatch.setattr(settings, 'surface_closure_limit', 1)

    code = cli.main(['conj', '--group', genus2_mod2, 'a1 b1 A1 B1', 'b1 A1 B1 a1'])

    assert code == cli.EXIT_BUDGET
    assert 'exceeded' in capsys.readouterr().err
