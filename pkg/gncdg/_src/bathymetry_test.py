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

"""Unit tests for `bathymetry.py`."""

from absl.testing import absltest
from absl.testing import parameterized

from gncdg._src import basis
from gncdg._src import bathymetry
from gncdg._src import errors
from gncdg._src import mesh
import numpy as np


class CatalogTest(parameterized.TestCase):

  @parameterized.parameters(
      ('caseA_bump', 0., 0., 0.2),
      ('caseA_bump', 0.4, 0., 0.1),
      ('caseA_bump', 0., 0.6, 0.),
      ('caseB_block', 0.2, -0.3, 0.5),
      ('caseB_block', 0.7, 0., 0.),
      ('trapezoid_bar', 13., 0., -0.1),
      ('trapezoid_bar', 9., 0.1, -0.25),
      ('trapezoid_bar', 15., 0., -0.2),
      ('trapezoid_bar', 20., 0., -0.4),
      ('elliptic_bar', 12.5, 0., -0.1),
      ('elliptic_bar', 1., 0., -0.4),
      ('composite_beach', 10., 0., 0.),
      ('composite_beach', 22.33, 0., 4.36 / 53. + 2.93 / 150.),
      ('seawall', 0., 0., 0.),
      ('seawall', 10., 0., 0.26),
  )
  def test_values(self, name, x, y, expected):
    field = bathymetry.bathymetry_catalog(name)
    self.assertAlmostEqual(float(field.values(x, y)), expected, places=12)

  def test_derivatives(self):
    field = bathymetry.bathymetry_catalog('trapezoid_bar')
    d = field.derivatives(np.array([8., 15.5]), np.zeros(2))
    np.testing.assert_allclose(d.b_x, [0.05, -0.1], atol=1e-14)
    np.testing.assert_allclose(d.b_y, 0., atol=1e-14)
    np.testing.assert_allclose(d.b_xx, 0., atol=1e-14)
    bump = bathymetry.bathymetry_catalog('caseA_bump')
    d = bump.derivatives(np.array([0.4]), np.array([0.]))
    np.testing.assert_allclose(d.b_x, [-1.], atol=1e-12)

  def test_parameters(self):
    field = bathymetry.bathymetry_catalog('caseA_bump', dict(height=0.25))
    self.assertAlmostEqual(float(field.values(0., 0.)), 0.25)
    with self.assertRaises(errors.ConfigError):
      bathymetry.bathymetry_catalog('caseA_bump', dict(depth=1.))
    with self.assertRaises(errors.ConfigError):
      bathymetry.bathymetry_catalog('volcano')


class ProjectionTest(absltest.TestCase):

  def test_shapes_and_averages(self):
    pair = mesh.build_overlapping_meshes(
        (0., 25., -0.2, 0.2), 50, 2,
        dict(left='outgoing', right='outgoing', bottom='periodic',
             top='periodic'))
    field = bathymetry.bathymetry_catalog('trapezoid_bar')
    fields = bathymetry.project_bathymetry(field, pair, 2)
    nb = basis.num_basis(2)
    self.assertEqual(fields.primal.shape, (50, 2, nb))
    self.assertEqual(fields.dual.shape, (51, 2, nb))
    self.assertIs(fields.on(mesh.MeshKind.DUAL), fields.dual)
    # Cell [12.5, 13] lies on the plateau.
    np.testing.assert_allclose(fields.primal[25, :, 0], -0.1, atol=1e-14)
    # The slope is linear inside primal cell [7, 7.5].
    np.testing.assert_allclose(fields.primal[14, :, 0], -0.3375, atol=1e-14)


if __name__ == '__main__':
  absltest.main()
