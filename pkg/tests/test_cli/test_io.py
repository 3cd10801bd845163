import logging

import numpy as np
import pytest

from multiband_bcs.exceptions import OutputNotWritable
from multiband_bcs.numerics.gap import GapSolution
from multiband_bcs.numerics.kernels import build_grid
from multiband_bcs.schemas.models import SweepRecord
from multiband_bcs.utils.io import (
    atomic_write,
    emit_csv,
    format_value,
    gap_csv,
    parse_csv,
    prepare_output,
    sweep_csv,
    write_plot_data,
)


logger = logging.getLogger(__name__)

HEADER = 'run_id,dimension,n_bands,lambda,kappa,tc,tc_found,min_eig_at_tc,channel,grid_points,iterations,log_ratio\n'


def record(**kwargs):
    fields = {
        'run_id': 'test',
        'dimension': 3,
        'n_bands': 2,
        'lambda_': 0.3,
        'kappa': 0.1,
        'tc': 1.0 / 3.0,
        'tc_found': True,
        'min_eig_at_tc': -1.0000000000000002,
        'channel': 0,
        'grid_points': 256,
        'iterations': 41,
        'log_ratio': 0.1 + 0.2,
    }
    return SweepRecord(**{**fields, **kwargs})


def test_header_only_for_no_records():
    assert sweep_csv([]) == HEADER


@pytest.mark.parametrize(
    'value,text', [(None, ''), (True, 'true'), (False, 'false'), (0.1, '0.10000000000000001'), (3, '3')]
)
def test_format_value(value, text):
    assert format_value(value) == text


def test_failed_point_row():
    text = sweep_csv([record(tc=None, tc_found=False, min_eig_at_tc=None, channel=None, log_ratio=None)])
    assert text.splitlines()[1] == 'test,3,2,0.29999999999999999,0.10000000000000001,,false,,,256,41,'


def test_csv_round_trip_is_bit_exact(tmp_path):
    records = [record(), record(kappa=-0.1, tc=np.nextafter(1.0 / 3.0, 1.0)), record(tc=None, tc_found=False)]
    path = emit_csv(records, tmp_path / 'sweep.csv')
    parsed = parse_csv(path)
    columns = ['run_id', 'dimension', 'n_bands', 'lambda_', 'kappa', 'tc', 'tc_found', 'min_eig_at_tc', 'log_ratio']
    assert [[getattr(r, c) for c in columns] for r in parsed] == [[getattr(r, c) for c in columns] for r in records]
    assert path.read_text().startswith(HEADER)


def test_atomic_write_leaves_no_temporary_files(tmp_path):
    path = atomic_write(tmp_path / 'a.txt', 'first\n')
    atomic_write(path, 'second\n')
    assert path.read_text() == 'second\n'
    assert [p.name for p in tmp_path.iterdir()] == ['a.txt']


def test_output_must_be_a_directory(tmp_path):
    path = tmp_path / 'file'
    path.write_text('')
    with pytest.raises(OutputNotWritable):
        prepare_output(path)
    with pytest.raises(OutputNotWritable):
        atomic_write(path / 'sweep.csv', '')
    assert prepare_output(tmp_path / 'new' / 'dir').is_dir()


def test_gap_csv(single_model, fast_opts):
    grid = build_grid(single_model, 0.05, fast_opts)
    solution = GapSolution(
        T=0.01,
        lam=0.4,
        kappa=0.0,
        grid=grid,
        delta=np.full(grid.size, 0.02),
        residual=1e-12,
        iterations=12,
        converged=True,
    )
    lines = gap_csv(single_model, solution).splitlines()
    assert lines[:6] == [
        '# T=0.01',
        '# lambda=0.40000000000000002',
        '# kappa=0',
        '# residual=9.9999999999999998e-13',
        '# iterations=12',
        'band,p,delta,epsilon,E',
    ]
    assert len(lines) == 6 + grid.size
    band, p, delta, epsilon, energy = lines[6].split(',')
    assert band == '1'
    assert float(delta) == 0.02
    assert float(energy) == pytest.approx(np.hypot(float(epsilon), 0.02))


def test_plot_data(tmp_path):
    path = write_plot_data(tmp_path / 'plot.dat', ('kappa', 'tc'), [0.0, 0.5], [1.0, 0.25])
    assert path.read_text() == '# kappa tc\n0 1\n0.5 0.25\n'
