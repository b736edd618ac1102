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

"""Surface-elevation gauges on the primal mesh."""

from typing import List, Sequence, Tuple

import attr
from gncdg._src import basis as basis_lib
from gncdg._src import mesh as mesh_lib
import numpy as np

_Array = np.ndarray


@attr.define
class GaugeSeries:
  """Time series of eta = h + b at one point.

  Attributes:
    x: gauge x position.
    y: gauge y position.
    cell: owning primal cell.
    table: basis values at the gauge's reference point, (nb,).
    times: strictly increasing sample times.
    eta: surface elevation samples.
  """
  x: float
  y: float
  cell: Tuple[int, int]
  table: _Array
  times: List[float] = attr.Factory(list)
  eta: List[float] = attr.Factory(list)

  def sample(self, coeffs: _Array, bottom: _Array) -> float:
    i, j = self.cell
    return float((coeffs[i, j, basis_lib.H] + bottom[i, j]) @ self.table)

  def append(self, t: float, value: float) -> bool:
    """Adds a sample unless `t` does not advance the series."""
    if self.times and t <= self.times[-1]:
      return False
    self.times.append(float(t))
    self.eta.append(float(value))
    return True

  def as_arrays(self) -> Tuple[_Array, _Array]:
    return np.asarray(self.times), np.asarray(self.eta)


def make_gauges(points: Sequence[Tuple[float, float]], grid: mesh_lib.CellGrid,
                k: int) -> List[GaugeSeries]:
  """Maps gauge positions to their primal cells."""
  basis = basis_lib.get_basis(k)
  out = []
  for x, y in points:
    i, j = grid.locate(x, y)
    xi, eta = grid.to_reference(i, j, x, y)
    out.append(GaugeSeries(x=float(x), y=float(y), cell=(i, j),
                           table=basis.values(np.array([[xi, eta]]))[0]))
  return out


def record_gauges(gauges: Sequence[GaugeSeries], coeffs: _Array,
                  bottom: _Array, t: float) -> None:
  """Appends eta(x_g, y_g, t) to every series.

  Args:
    gauges: the gauge series.
    coeffs: primal coefficients (nx, ny, 3, nb).
    bottom: primal bottom coefficients (nx, ny, nb).
    t: sample time.
  """
  for gauge in gauges:
    gauge.append(t, gauge.sample(coeffs, bottom))
