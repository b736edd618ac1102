# Copyright 2022 DeepMind Technologies Limited. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

"""Unit tests for `output.py`."""

import json
import os

from absl.testing import absltest

from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import gauges
from gncdg._src import output
from gncdg._src import timestepper
import numpy as np

_FROZEN_GAUGES = os.path.join(os.path.dirname(__file__), 'testdata',
                              'trapezoid_bar_at_rest_gauges.csv')


def _series(x, values):
  series = gauges.GaugeSeries(x=x, y=0., cell=(0, 0), table=np.ones(3))
  for n, v in enumerate(values):
    series.append(0.1 * n, v)
  return series


class TableTest(absltest.TestCase):

  def test_csv_keeps_full_precision(self):
    path = os.path.join(self.create_tempdir().full_path, 'table.csv')
    rows = [(0.1, 1. / 3.), (2., np.float64(np.pi))]
    output.write_table_csv(('a', 'b'), rows, path)
    header, data = output.read_table_csv(path)
    self.assertEqual(header, ['a', 'b'])
    np.testing.assert_array_equal(data, np.array(rows))

  def test_unwritable_path(self):
    path = os.path.join(self.create_tempdir().full_path, 'missing', 't.csv')
    with self.assertRaises(errors.OutputError) as cm:
      output.write_table_csv(('a',), [(1.,)], path)
    self.assertEqual(cm.exception.path, path)
    self.assertIsInstance(cm.exception.__cause__, OSError)


class GaugeFileTest(absltest.TestCase):

  def test_layout_and_comparison(self):
    directory = self.create_tempdir().full_path
    series = [_series(5.9, [0., 0.01, 0.02]), _series(7.6, [0., 0., 0.03])]
    path = output.write_gauge_csv(series, os.path.join(directory, 'a.csv'),
                                  time_offset=2.)
    header, data = output.read_table_csv(path)
    self.assertEqual(header, ['t', 't_shifted', 'eta(5.9 0.0)',
                              'eta(7.6 0.0)'])
    np.testing.assert_allclose(data[:, 1] - data[:, 0], 2.)
    self.assertEqual(output.compare_gauge_series(path, path), 0.)

    shifted = [_series(5.9, [0., 0.01, 0.025]), _series(7.6, [0., 0., 0.03])]
    other = output.write_gauge_csv(shifted, os.path.join(directory, 'b.csv'),
                                   time_offset=2.)
    self.assertAlmostEqual(output.compare_gauge_series(other, path), 0.005)

    fewer = output.write_gauge_csv(series[:1],
                                   os.path.join(directory, 'c.csv'))
    with self.assertRaises(ValueError):
      output.compare_gauge_series(fewer, path)

  def test_trapezoid_bar_at_rest_matches_frozen_gauges(self):
    config = config_lib.default_config('trapezoid_bar_at_rest',
                                       fixed_dt=2.**-10)
    outputs = timestepper.run_simulation(config)
    self.assertEqual(outputs.summary['steps'], 4)
    path = output.write_gauge_csv(
        outputs.gauges,
        os.path.join(self.create_tempdir().full_path, 'gauges.csv'),
        time_offset=config.time_offset)
    self.assertLessEqual(output.compare_gauge_series(path, _FROZEN_GAUGES),
                         1e-8)


class VTKTest(absltest.TestCase):

  def test_structured_grid(self):
    path = os.path.join(self.create_tempdir().full_path, 'f.vtk')
    xs, ys = np.meshgrid([0., 1., 2.], [0., 0.5], indexing='ij')
    output.write_vtk(path, xs, ys, dict(h=xs + ys))
    with open(path) as f:
      lines = f.read().splitlines()
    self.assertEqual(lines[0], '# vtk DataFile Version 2.0')
    self.assertIn('DIMENSIONS 3 2 1', lines)
    self.assertIn('POINTS 6 double', lines)
    self.assertIn('POINT_DATA 6', lines)
    start = lines.index('SCALARS h double 1') + 2
    np.testing.assert_array_equal([float(v) for v in lines[start:start + 6]],
                                  [0., 1., 2., 0.5, 1.5, 2.5])


class WriteOutputsTest(absltest.TestCase):

  def _run(self, **overrides):
    config = config_lib.default_config(
        'solitary_accuracy', nx=16, ny=2, t_final=0.01, fixed_dt=0.01,
        **overrides)
    return timestepper.run_simulation(config)

  def test_all_artifacts(self):
    outputs = self._run(gauges=((0., 0.),), snapshot_times=(0., 0.01))
    directory = os.path.join(self.create_tempdir().full_path, 'out')
    written = output.write_outputs(outputs, directory)
    names = sorted(os.path.basename(p) for p in written)
    self.assertEqual(names, ['config.ini', 'gauges.csv', 'snapshot_0.01.vtk',
                             'snapshot_0.vtk', 'summary.json'])
    with open(os.path.join(directory, 'summary.json')) as f:
      summary = json.load(f)
    self.assertEqual(summary['steps'], 1)
    self.assertIn('l2_h', summary)
    with open(os.path.join(directory, 'config.ini')) as f:
      self.assertEqual(config_lib.parse_config(f.read()), outputs.config)

  def test_no_gauge_file_without_gauges(self):
    outputs = self._run()
    directory = self.create_tempdir().full_path
    written = output.write_outputs(outputs, directory)
    self.assertFalse(os.path.exists(os.path.join(directory, 'gauges.csv')))
    self.assertLen(written, 2)

  def test_snapshot_fields(self):
    outputs = self._run()
    fields = output.snapshot_fields(outputs.state, outputs.solver)
    self.assertEqual(sorted(fields), ['b', 'eta', 'h', 'u', 'v'])
    np.testing.assert_allclose(fields['eta'], fields['h'] + fields['b'])
    self.assertEqual(fields['h'].shape, (16, 2))


if __name__ == '__main__':
  absltest.main()
