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

"""Overlapping primal/dual Cartesian meshes and their quadrature tables.

The primal mesh C has `nx * ny` cells centred at `x_min + (i + 1/2) dx`. The
dual mesh D is shifted by half a cell in each direction, so its cells are
centred on the primal cell corners. Along a periodic direction both meshes
have the same number of cells; along a non-periodic direction the dual mesh
has one more cell and its first and last cells straddle the domain boundary,
their outer halves lying over the primal ghost layer.

Every cell of either mesh is the union of four quarter-cells, each of which
is also a quarter of a cell of the other mesh. All tables below are stored in
reference coordinates on the square [-1/2, 1/2]^2.
"""

import functools
import math
from typing import Mapping, Optional, Sequence, Tuple

import attr
from gncdg._src import errors
import numpy as np

_Array = np.ndarray


class MeshKind:
  PRIMAL = 'C'
  DUAL = 'D'


class BoundaryKind:
  PERIODIC = 'periodic'
  OUTGOING = 'outgoing'
  ABSORBING = 'absorbing'
  WALL = 'wall'
  INFLOW = 'inflow'


BOUNDARY_KINDS = (
    BoundaryKind.PERIODIC,
    BoundaryKind.OUTGOING,
    BoundaryKind.ABSORBING,
    BoundaryKind.WALL,
    BoundaryKind.INFLOW,
)

SIDES = ('left', 'right', 'bottom', 'top')

# Quarter (l, m) of the reference square has its centre at these offsets.
QUARTERS = ((0, 0), (0, 1), (1, 0), (1, 1))


def quarter_centre(l: int, m: int) -> Tuple[float, float]:
  return (2 * l - 1) / 4., (2 * m - 1) / 4.


@attr.define(frozen=True)
class QuadRule:
  """One-dimensional quadrature rule on [-1/2, 1/2]; weights sum to 1."""
  points: _Array
  weights: _Array

  @property
  def size(self) -> int:
    return self.points.shape[0]

  @property
  def first_weight(self) -> float:
    return float(self.weights[0])

  def integrate(self, f) -> float:
    return float(np.sum(self.weights * f(self.points)))


@functools.lru_cache(maxsize=None)
def gauss_points(n: int) -> QuadRule:
  """n-point Gauss-Legendre rule mapped to [-1/2, 1/2]."""
  if n < 1:
    raise ValueError(f'Gauss rule needs at least one point, got {n}.')
  x, w = np.polynomial.legendre.leggauss(n)
  return QuadRule(points=x / 2., weights=w / 2.)


@functools.lru_cache(maxsize=None)
def lobatto_points(n: int) -> QuadRule:
  """n-point Gauss-Lobatto rule mapped to [-1/2, 1/2]."""
  if n < 2:
    raise ValueError(f'Lobatto rule needs at least two points, got {n}.')
  legendre = np.polynomial.legendre.Legendre.basis(n - 1)
  interior = np.sort(np.real(legendre.deriv().roots()))
  x = np.concatenate([[-1.], interior, [1.]])
  w = 2. / (n * (n - 1) * legendre(x)**2)
  return QuadRule(points=x / 2., weights=w / 2.)


def gauss_rule(k: int) -> QuadRule:
  """Gauss rule exact for univariate polynomials of degree 2k+1."""
  if k < 0:
    raise ValueError(f'Polynomial degree must be non-negative, got {k}.')
  return gauss_points(k + 1)


def lobatto_rule(k: int) -> QuadRule:
  """Smallest Gauss-Lobatto rule with 2N-3 >= k."""
  if k < 1:
    raise ValueError(f'Lobatto rule needs degree >= 1, got {k}.')
  return lobatto_points(max(2, math.ceil((k + 3) / 2)))


@attr.define(frozen=True)
class CellGrid:
  """A uniform array of rectangular cells; cell (0, 0) sits at (x0, y0)."""
  kind: str
  x0: float
  y0: float
  nx: int
  ny: int
  dx: float
  dy: float
  periodic_x: bool
  periodic_y: bool

  @property
  def shape(self) -> Tuple[int, int]:
    return self.nx, self.ny

  @property
  def area(self) -> float:
    return self.dx * self.dy

  def centres(self) -> Tuple[_Array, _Array]:
    x = self.x0 + self.dx * np.arange(self.nx)
    y = self.y0 + self.dy * np.arange(self.ny)
    return np.meshgrid(x, y, indexing='ij')

  def physical(self, xi: _Array, eta: _Array) -> Tuple[_Array, _Array]:
    """Maps reference points to every cell; returns arrays (nx, ny, npts)."""
    xc, yc = self.centres()
    xs = xc[..., None] + self.dx * np.asarray(xi)
    ys = yc[..., None] + self.dy * np.asarray(eta)
    return xs, ys

  def locate(self, x: float, y: float) -> Tuple[int, int]:
    """Index of the cell holding (x, y); shared edges go left and below."""
    idx = []
    for coord, origin, h, n, periodic in (
        (x, self.x0, self.dx, self.nx, self.periodic_x),
        (y, self.y0, self.dy, self.ny, self.periodic_y)):
      s = (coord - origin) / h + 0.5
      i = int(np.floor(s))
      if periodic:
        i %= n
      elif i == n and abs(s - n) < 1e-12:
        i = n - 1
      if not 0 <= i < n:
        raise errors.CellLookupError(
            f'Point ({x}, {y}) lies outside the {self.kind} mesh.')
      idx.append(i)
    return idx[0], idx[1]

  def to_reference(self, i: int, j: int, x: float,
                   y: float) -> Tuple[float, float]:
    """Reference coordinates of (x, y) in cell (i, j); checks membership."""
    xi = (x - (self.x0 + i * self.dx)) / self.dx
    eta = (y - (self.y0 + j * self.dy)) / self.dy
    if self.periodic_x:
      xi -= self.nx * np.round(xi / self.nx)
    if self.periodic_y:
      eta -= self.ny * np.round(eta / self.ny)
    if abs(xi) > 0.5 + 1e-12 or abs(eta) > 0.5 + 1e-12:
      raise errors.CellLookupError(
          f'Point ({x}, {y}) is not inside {self.kind} cell ({i}, {j}).')
    return xi, eta


@attr.define(frozen=True)
class MeshPair:
  """The primal mesh C and the dual mesh D over one rectangular domain."""
  x_min: float
  x_max: float
  y_min: float
  y_max: float
  nx: int
  ny: int
  bcs: Mapping[str, str]

  @property
  def dx(self) -> float:
    return (self.x_max - self.x_min) / self.nx

  @property
  def dy(self) -> float:
    return (self.y_max - self.y_min) / self.ny

  @property
  def periodic_x(self) -> bool:
    return self.bcs['left'] == BoundaryKind.PERIODIC

  @property
  def periodic_y(self) -> bool:
    return self.bcs['bottom'] == BoundaryKind.PERIODIC

  @property
  def primal(self) -> CellGrid:
    return CellGrid(
        kind=MeshKind.PRIMAL,
        x0=self.x_min + self.dx / 2, y0=self.y_min + self.dy / 2,
        nx=self.nx, ny=self.ny, dx=self.dx, dy=self.dy,
        periodic_x=self.periodic_x, periodic_y=self.periodic_y)

  @property
  def dual(self) -> CellGrid:
    return CellGrid(
        kind=MeshKind.DUAL,
        x0=self.x_min, y0=self.y_min,
        nx=self.nx if self.periodic_x else self.nx + 1,
        ny=self.ny if self.periodic_y else self.ny + 1,
        dx=self.dx, dy=self.dy,
        periodic_x=self.periodic_x, periodic_y=self.periodic_y)

  def grid(self, kind: str) -> CellGrid:
    if kind == MeshKind.PRIMAL:
      return self.primal
    if kind == MeshKind.DUAL:
      return self.dual
    raise ValueError(f'Unknown mesh kind {kind}.')

  def contains(self, x: float, y: float) -> bool:
    return (self.x_min <= x <= self.x_max) and (self.y_min <= y <= self.y_max)


def _check_bcs(bcs: Optional[Mapping[str, str]]) -> Mapping[str, str]:
  bcs = dict(bcs or {})
  for side in SIDES:
    bcs.setdefault(side, BoundaryKind.PERIODIC)
  for side, kind in bcs.items():
    if side not in SIDES:
      raise errors.ConfigError(f'Unknown boundary side {side!r}.')
    if kind not in BOUNDARY_KINDS:
      raise errors.ConfigError(f'Unknown boundary condition {kind!r}.')
  for lo, hi in (('left', 'right'), ('bottom', 'top')):
    if (bcs[lo] == BoundaryKind.PERIODIC) != (bcs[hi] == BoundaryKind.PERIODIC):
      raise errors.ConfigError(
          f'Periodic boundaries come in pairs: {lo}={bcs[lo]}, '
          f'{hi}={bcs[hi]}.')
  return bcs


def build_overlapping_meshes(
    domain_bounds: Sequence[float],
    nx: int,
    ny: int,
    bcs: Optional[Mapping[str, str]] = None) -> MeshPair:
  """Builds the primal/dual mesh pair.

  Args:
    domain_bounds: `(x_min, x_max, y_min, y_max)`.
    nx: number of primal cells along x.
    ny: number of primal cells along y.
    bcs: boundary condition per side (`left`, `right`, `bottom`, `top`);
      missing sides default to periodic.

  Returns:
    The mesh pair.
  """
  x_min, x_max, y_min, y_max = (float(v) for v in domain_bounds)
  if not x_max > x_min or not y_max > y_min:
    raise errors.ConfigError(
        f'Invalid domain bounds {tuple(domain_bounds)}.')
  if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
    raise errors.ConfigError(
        f'Need at least two cells per direction, got nx={nx}, ny={ny}.')
  return MeshPair(x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max,
                  nx=int(nx), ny=int(ny), bcs=_check_bcs(bcs))


def cells_for_spacing(lo: float, hi: float, spacing: float) -> int:
  """Cell count giving `spacing` on [lo, hi]; the spacing must divide evenly."""
  if spacing <= 0:
    raise errors.ConfigError(f'Mesh spacing must be positive, got {spacing}.')
  n = int(round((hi - lo) / spacing))
  if n < 1 or abs(n * spacing - (hi - lo)) > 1e-9 * (hi - lo):
    raise errors.ConfigError(
        f'Spacing {spacing} does not divide the interval [{lo}, {hi}].')
  return n


@attr.define(frozen=True)
class PositivityPointSet:
  """Points on which the limited depth must be non-negative.

  The set is the same for every element of both meshes: a dual element
  gathers the quarter-cell sets of its four neighbouring primal cells, which in
  its own reference coordinates reproduce the pattern of a primal element.

  Attributes:
    ref_points: deduplicated points, shape (npts, 2).
    raw_count: number of points before deduplication.
  """
  ref_points: _Array
  raw_count: int

  def physical(self, grid: CellGrid) -> Tuple[_Array, _Array]:
    return grid.physical(self.ref_points[:, 0], self.ref_points[:, 1])


def quarter_points(k: int) -> _Array:
  """Gauss-x (x) Lobatto-y union Lobatto-x (x) Gauss-y on each quarter."""
  gauss = gauss_rule(k).points
  lobatto = lobatto_rule(k).points
  pts = []
  for l, m in QUARTERS:
    cx, cy = quarter_centre(l, m)
    for px, py in ((gauss, lobatto), (lobatto, gauss)):
      gx, gy = np.meshgrid(cx + px / 2, cy + py / 2, indexing='ij')
      pts.append(np.stack([gx.ravel(), gy.ravel()], axis=-1))
  return np.concatenate(pts, axis=0)


def positivity_point_set(k: int) -> PositivityPointSet:
  """The shared positivity points of degree k, deduplicated."""
  raw = quarter_points(k)
  unique = np.unique(np.round(raw, 14), axis=0)
  return PositivityPointSet(ref_points=unique, raw_count=raw.shape[0])
