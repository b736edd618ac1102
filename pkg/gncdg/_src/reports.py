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

"""Mesh-convergence and linear-dispersion tables."""

import math
from typing import List, Sequence, Tuple

from absl import logging
import attr
from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
from gncdg._src import timestepper
import numpy as np
from scipy import integrate

DEFAULT_SPACINGS = (1., 0.5, 0.25, 0.125)
DEFAULT_DT_FACTOR = 0.1
DEFAULT_ALPHAS = (model.ALPHA_STANDARD, model.ALPHA_ENHANCED)


@attr.define(frozen=True)
class Table:
  """Named columns; `rows` holds one tuple per line."""
  header: Tuple[str, ...]
  rows: Tuple[Tuple[float, ...], ...]

  def column(self, name: str) -> np.ndarray:
    idx = self.header.index(name)
    return np.array([row[idx] for row in self.rows], dtype=float)


def observed_orders(spacings: Sequence[float],
                    norms: Sequence[float]) -> List[float]:
  """log(e_coarse / e_fine) / log(dx_coarse / dx_fine) per refinement."""
  orders = [math.nan]
  for n in range(1, len(norms)):
    ratio = spacings[n - 1] / spacings[n]
    if norms[n] > 0. and norms[n - 1] > 0.:
      orders.append(math.log(norms[n - 1] / norms[n]) / math.log(ratio))
    else:
      orders.append(math.nan)
  return orders


def convergence_report(base: config_lib.RunConfig,
                       spacings: Sequence[float] = DEFAULT_SPACINGS,
                       dt_factor: float = DEFAULT_DT_FACTOR) -> Table:
  """L2 errors of (h, u) and observed orders over a mesh sequence.

  Every run uses square cells of the given spacing and dt = dt_factor * dx.

  Args:
    base: configuration of a scenario with an exact solution.
    spacings: cell sizes, coarsest first.
    dt_factor: ratio dt / dx.

  Returns:
    Columns dx, nx, ny, l2_h, order_h, l2_u, order_u.
  """
  sc = base.scenario_def
  if not sc.has_exact:
    raise errors.ConfigError(
        f'Scenario {base.scenario!r} has no exact solution to converge to.')
  x_min, x_max, y_min, y_max = sc.domain
  results = []
  for dx in spacings:
    nx = mesh_lib.cells_for_spacing(x_min, x_max, dx)
    ny = mesh_lib.cells_for_spacing(y_min, y_max, dx)
    config = base.replace(nx=nx, ny=ny, fixed_dt=dt_factor * dx, gauges=(),
                          snapshot_times=(), output_dir=None)
    summary = timestepper.run_simulation(config).summary
    logging.info('dx=%g: L2(h)=%.3e L2(u)=%.3e', dx, summary['l2_h'],
                 summary['l2_u'])
    results.append((dx, nx, ny, summary['l2_h'], summary['l2_u']))
  order_h = observed_orders(spacings, [r[3] for r in results])
  order_u = observed_orders(spacings, [r[4] for r in results])
  rows = tuple((dx, nx, ny, eh, oh, eu, ou)
               for (dx, nx, ny, eh, eu), oh, ou in zip(results, order_h,
                                                       order_u))
  return Table(header=('dx', 'nx', 'ny', 'l2_h', 'order_h', 'l2_u',
                       'order_u'), rows=rows)


def _alpha_label(alpha: float) -> str:
  return f'{alpha:g}'


def dispersion_report(alphas: Sequence[float] = DEFAULT_ALPHAS,
                      h0: float = 1.,
                      g: float = 1.,
                      k_max: float = 4.,
                      num: int = 81) -> Table:
  """Model and Airy frequencies over |k| in [0, k_max].

  Per alpha the table carries omega, omega / omega_airy - 1 (zero at |k| = 0)
  and the group velocity.

  Args:
    alphas: dispersion parameters to tabulate.
    h0: still-water depth.
    g: gravity.
    k_max: largest wavenumber.
    num: number of wavenumbers.

  Returns:
    The table.
  """
  if not (h0 > 0. and g > 0.):
    raise ValueError(f'h0 and g must be positive, got {h0}, {g}.')
  ks = np.linspace(0., k_max, num)
  airy = model.airy_omega(ks, h0, g)
  header = ['k', 'omega_airy']
  columns = [ks, airy]
  for alpha in alphas:
    p = model.PhysParams(g=g, alpha=alpha)
    omega = model.dispersion_omega(ks, h0, p)
    with np.errstate(divide='ignore', invalid='ignore'):
      deviation = np.where(airy > 0., omega / airy - 1., 0.)
    label = _alpha_label(alpha)
    header += [f'omega_{label}', f'deviation_{label}',
               f'group_velocity_{label}']
    columns += [omega, deviation, model.group_velocity(ks, h0, p)]
  rows = tuple(tuple(float(c[n]) for c in columns) for n in range(num))
  return Table(header=tuple(header), rows=rows)


def dispersion_deviation(alpha: float, h0: float = 1., g: float = 1.,
                         k_max: float = 4.) -> float:
  """L2 norm over (0, k_max] of omega / omega_airy - 1."""
  p = model.PhysParams(g=g, alpha=alpha)

  def squared(k):
    ratio = model.dispersion_omega(k, h0, p) / model.airy_omega(k, h0, g)
    return float(ratio - 1.)**2

  value, _ = integrate.quad(squared, 0., k_max, limit=200)
  return math.sqrt(value)
