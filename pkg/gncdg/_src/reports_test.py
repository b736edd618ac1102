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

"""Unit tests for `reports.py`."""

import math

from absl.testing import absltest

from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import reports
import numpy as np


class ObservedOrdersTest(absltest.TestCase):

  def test_second_order(self):
    orders = reports.observed_orders([1., 0.5, 0.25], [1., 0.25, 0.0625])
    self.assertTrue(math.isnan(orders[0]))
    np.testing.assert_allclose(orders[1:], [2., 2.])

  def test_zero_error(self):
    orders = reports.observed_orders([1., 0.5], [1e-3, 0.])
    self.assertTrue(math.isnan(orders[1]))


class DispersionReportTest(absltest.TestCase):

  def test_layout(self):
    table = reports.dispersion_report(num=41)
    self.assertEqual(table.header, (
        'k', 'omega_airy', 'omega_1', 'deviation_1', 'group_velocity_1',
        'omega_1.159', 'deviation_1.159', 'group_velocity_1.159'))
    self.assertLen(table.rows, 41)
    np.testing.assert_allclose(table.column('k')[[0, -1]], [0., 4.])

  def test_long_wave_row(self):
    table = reports.dispersion_report(num=5)
    first = dict(zip(table.header, table.rows[0]))
    self.assertEqual(first['omega_airy'], 0.)
    self.assertEqual(first['omega_1'], 0.)
    self.assertEqual(first['deviation_1'], 0.)
    self.assertAlmostEqual(first['group_velocity_1'], 1., places=12)
    self.assertAlmostEqual(first['group_velocity_1.159'], 1., places=12)

  def test_enhanced_model_is_closer_to_airy(self):
    table = reports.dispersion_report(num=41)
    standard = np.abs(table.column('deviation_1'))
    enhanced = np.abs(table.column('deviation_1.159'))
    self.assertLess(enhanced[-1], standard[-1])
    self.assertLess(reports.dispersion_deviation(1.159),
                    reports.dispersion_deviation(1.))

  def test_invalid_depth(self):
    with self.assertRaises(ValueError):
      reports.dispersion_report(h0=0.)


class ConvergenceReportTest(absltest.TestCase):

  def test_requires_exact_solution(self):
    with self.assertRaises(errors.ConfigError):
      reports.convergence_report(config_lib.default_config('seawall'))

  def test_coarse_sequence(self):
    base = config_lib.default_config('solitary_accuracy', t_final=0.02)
    table = reports.convergence_report(base, spacings=(1., 0.5),
                                       dt_factor=0.02)
    self.assertEqual(table.header, ('dx', 'nx', 'ny', 'l2_h', 'order_h',
                                    'l2_u', 'order_u'))
    np.testing.assert_array_equal(table.column('nx'), [80., 160.])
    self.assertTrue(np.all(np.isfinite(table.column('l2_h'))))
    self.assertTrue(math.isnan(table.column('order_h')[0]))


if __name__ == '__main__':
  absltest.main()
