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

"""Ghost-cell realisation of the boundary conditions.

Every per-cell array (DG coefficients, projected bottoms, cell-local velocity
nodes) is padded with one layer of ghost cells on each side:

  * periodic: wrap-around copy;
  * outgoing / absorbing: zero-order extrapolation (copy of the edge cell);
  * wall: mirror image of the cell across the wall, with the normal momentum
    and normal velocity negated;
  * inflow (left side only): the incident Stokes wave, depth `eta - b`,
    velocity `eta * sqrt(g / h0)` and momentum `h u`.

On the dual mesh the boundary cell is centred on the wall, so its mirror
ghost is the reflection of the second cell.
"""

from typing import Callable, Mapping, Optional

import attr
from gncdg._src import basis as basis_lib
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
import numpy as np

_Array = np.ndarray
_Kind = mesh_lib.BoundaryKind

# Payload layouts.
STATE = 'state'        # (nx, ny, 3, nb)
SCALAR = 'scalar'      # (nx, ny, nb)
VELOCITY = 'velocity'  # (nx, ny, k+1, k+1, 2)


@attr.define(frozen=True)
class IncidentWave:
  """Third-order Stokes wave entering through the left boundary."""
  period: float
  amplitude: float
  wavelength: float
  depth: float

  def eta(self, x, t) -> _Array:
    return np.asarray(model.stokes_incident_eta(
        np.asarray(x, float), t, self.period, self.amplitude, self.wavelength))

  def velocity(self, eta: _Array, g: float) -> _Array:
    return eta * np.sqrt(g / self.depth)


@attr.define(frozen=True)
class BoundaryConditions:
  """Per-side boundary kinds plus the data an inflow side needs."""
  sides: Mapping[str, str]
  k: int
  g: float = 9.81
  incident: Optional[IncidentWave] = None

  def __attrs_post_init__(self):
    for side in ('right', 'bottom', 'top'):
      if self.sides[side] == _Kind.INFLOW:
        raise errors.ConfigError(
            f'Inflow is only supported on the left side, got {side}.')
    if self.sides['left'] == _Kind.INFLOW and self.incident is None:
      raise errors.ConfigError('Inflow boundary needs an incident wave.')

  # -- mirrors ---------------------------------------------------------------

  def _mirror(self, payload: str, cells: _Array, axis: int) -> _Array:
    out = np.array(cells, copy=True)
    if payload == VELOCITY:
      out = np.flip(out, axis=2 + axis).copy()
      out[..., axis] *= -1.
      return out
    parity = basis_lib.get_basis(self.k).parity(axis)
    out = out * parity
    if payload == STATE:
      out[..., basis_lib.HP + axis, :] *= -1.
    return out

  # -- inflow ----------------------------------------------------------------

  def _inflow(self, payload: str, grid: mesh_lib.CellGrid, edge: _Array,
              t: float, bottom_ghost: Optional[_Array]) -> _Array:
    """Ghost column left of `grid` (shape of `edge`)."""
    if payload == SCALAR:
      return np.array(edge, copy=True)
    yc = grid.y0 + grid.dy * np.arange(edge.shape[0])
    xg = grid.x0 - grid.dx
    if payload == VELOCITY:
      nodes = _lagrange_nodes(self.k)
      xs = xg + grid.dx * nodes
      eta = self.incident.eta(xs, t)
      u = self.incident.velocity(eta, self.g)
      out = np.zeros_like(edge)
      out[..., 0] = u[None, :, None]
      return out
    points, _ = basis_lib.projection_quadrature(self.k)
    xs = xg + grid.dx * points[:, 0]
    eta = np.broadcast_to(self.incident.eta(xs, t), (yc.size, xs.size))
    b = basis_lib.evaluate(bottom_ghost, basis_lib.get_basis(self.k).values(
        points))
    h = np.maximum(eta - b, 0.)
    hu = h * self.incident.velocity(eta, self.g)
    out = np.zeros_like(edge)
    out[:, basis_lib.H] = basis_lib.project_values(h, self.k)
    out[:, basis_lib.HP] = basis_lib.project_values(hu, self.k)
    return out

  # -- padding ---------------------------------------------------------------

  def _pad_axis(self, arr: _Array, axis: int, payload: str,
                grid: mesh_lib.CellGrid,
                inflow: Optional[Callable[[_Array], _Array]]) -> _Array:
    lo_side, hi_side = (('left', 'right') if axis == 0 else ('bottom', 'top'))
    lo_kind, hi_kind = self.sides[lo_side], self.sides[hi_side]
    take = lambda i: np.take(arr, [i], axis=axis)
    n = arr.shape[axis]
    if lo_kind == _Kind.PERIODIC:
      return np.concatenate([take(n - 1), arr, take(0)], axis=axis)
    mirror_offset = 1 if grid.kind == mesh_lib.MeshKind.DUAL else 0
    ghosts = []
    for kind, edge, inner in ((lo_kind, 0, mirror_offset),
                              (hi_kind, n - 1, n - 1 - mirror_offset)):
      if kind in (_Kind.OUTGOING, _Kind.ABSORBING):
        ghosts.append(take(edge))
      elif kind == _Kind.WALL:
        ghosts.append(self._mirror(payload, take(inner), axis))
      elif kind == _Kind.INFLOW:
        ghosts.append(inflow(take(edge)))
      else:
        raise errors.ConfigError(f'Unknown boundary condition {kind!r}.')
    return np.concatenate([ghosts[0], arr, ghosts[1]], axis=axis)

  def pad(self, arr: _Array, grid: mesh_lib.CellGrid, payload: str,
          t: float = 0., bottom_padded: Optional[_Array] = None) -> _Array:
    """Adds one ghost layer on every side; x is padded before y.

    Args:
      arr: per-cell array of the given payload layout.
      grid: mesh the array lives on.
      payload: `STATE`, `SCALAR` or `VELOCITY`.
      t: time, for the incident wave.
      bottom_padded: padded bottom of the same mesh; required for `STATE`
        payloads with an inflow side.

    Returns:
      Array of shape (nx + 2, ny + 2, ...).
    """
    def inflow(edge):
      ghost_bottom = None
      if payload == STATE:
        ghost_bottom = bottom_padded[0, 1:-1]
      return self._inflow(payload, grid, edge[0], t, ghost_bottom)[None]

    out = self._pad_axis(arr, 0, payload, grid, inflow)
    return self._pad_axis(out, 1, payload, grid, None)


def _lagrange_nodes(k: int) -> _Array:
  return mesh_lib.lobatto_points(k + 1).points


def apply_boundary_conditions(coeffs: _Array, grid: mesh_lib.CellGrid,
                              bcs: BoundaryConditions, t: float,
                              bottom_padded: _Array) -> _Array:
  """Ghost-padded conserved state of one mesh."""
  return bcs.pad(coeffs, grid, STATE, t, bottom_padded)
