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

"""Bottom topographies and their polynomial projections.

Each entry of the catalog is a scalar `jax.numpy` function of `(x, y)`.
Derivatives come from `jax.grad`; at slope breaks `jnp.where` selects the
branch whose condition holds at the point, which gives one-sided values. The
solver itself only consumes the projected polynomials `b^C`, `b^D` and their
in-cell derivatives.
"""

import functools
import types
from typing import Any, Callable, Dict, Mapping, Optional

import attr
import chex
from gncdg._src import basis as basis_lib
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
import jax
import jax.numpy as jnp
import numpy as np

_Array = np.ndarray


def _safe_sqrt(x):
  """sqrt with a finite derivative where its argument is clipped."""
  positive = x > 0
  return jnp.where(positive, jnp.sqrt(jnp.where(positive, x, 1.)), 0.)


def flat(x, y, level=0.):
  return level + 0. * x * y


def case_a_bump(x, y, height=0.2, plateau=0.3, foot=0.5):
  r = _safe_sqrt(x**2 + y**2)
  return jnp.where(r <= plateau, height,
                   jnp.where(r <= foot, foot - r, 0.))


def case_b_block(x, y, height=0.5, half_width=0.5):
  inside = (jnp.abs(x) <= half_width) & (jnp.abs(y) <= half_width)
  return jnp.where(inside, height, 0.) + 0. * x * y


def seawall(x, y, toe=5.6, slope=0.05, wall_start=9.644, crest_start=9.944,
            crest_end=10.162, wall_end=10.462, crest=0.26):
  """A plane beach with a trapezoidal wall standing on it."""
  beach = slope * jnp.maximum(x - toe, 0.)
  rise = crest * (x - wall_start) / (crest_start - wall_start)
  fall = crest * (wall_end - x) / (wall_end - crest_end)
  wall = jnp.where(
      (x < wall_start) | (x > wall_end), 0.,
      jnp.where(x < crest_start, rise,
                jnp.where(x <= crest_end, crest, fall)))
  return jnp.maximum(beach, wall) + 0. * y


def trapezoid_bar(x, y):
  b = jnp.where(
      (x >= 6.) & (x <= 12.), -0.4 + 0.05 * (x - 6.),
      jnp.where((x > 12.) & (x <= 14.), -0.1,
                jnp.where((x > 14.) & (x <= 17.), -0.1 - 0.1 * (x - 14.),
                          -0.4)))
  return b + 0. * y


def elliptic_bar(x, y):
  r = (x - 12.5)**2 / 100. + y**2 / 16.
  return jnp.where(r < 47. / 576., -0.1,
                   jnp.where(r <= 287. / 576.,
                             1.2 * _safe_sqrt(1. - r) - 1.25, -0.4))


def composite_beach(x, y, start=15.04):
  """Three plane slopes (1/53, 1/150, 1/13) rising from `start`."""
  breaks = (start, 19.4, 22.33)
  slopes = (1. / 53., 1. / 150., 1. / 13.)
  b = 0. * x * y
  for i, (x0, s) in enumerate(zip(breaks, slopes)):
    x1 = breaks[i + 1] if i + 1 < len(breaks) else jnp.inf
    b = b + s * jnp.clip(x - x0, 0., x1 - x0)
  return b


CATALOG = types.MappingProxyType({
    'flat': flat,
    'caseA_bump': case_a_bump,
    'caseB_block': case_b_block,
    'seawall': seawall,
    'trapezoid_bar': trapezoid_bar,
    'elliptic_bar': elliptic_bar,
    'composite_beach': composite_beach,
})


@attr.define(frozen=True)
class BathymetryField:
  """An analytic bottom b(x, y) with autodiff derivatives."""
  name: str
  params: Mapping[str, float]
  fn: Callable[..., Any]

  def __call__(self, x, y):
    return self.fn(x, y)

  def values(self, xs, ys) -> _Array:
    return model.sample(self.fn, xs, ys)

  def derivatives(self, xs, ys) -> model.BottomDerivatives:
    grad = jax.grad(self.fn, argnums=(0, 1))
    hess = jax.hessian(self.fn, argnums=(0, 1))

    def all_derivatives(x, y):
      bx, by = grad(x, y)
      (bxx, bxy), (_, byy) = hess(x, y)
      return jnp.stack([bx, by, bxx, bxy, byy])

    xs, ys = np.broadcast_arrays(np.asarray(xs, float), np.asarray(ys, float))
    out = np.asarray(jax.vmap(all_derivatives)(xs.ravel(), ys.ravel()))
    out = out.T.reshape((5,) + xs.shape)
    return model.BottomDerivatives(b_x=out[0], b_y=out[1], b_xx=out[2],
                                   b_xy=out[3], b_yy=out[4])


def bathymetry_catalog(name: str,
                       params: Optional[Mapping[str, float]] = None
                      ) -> BathymetryField:
  """Looks up a bottom by name, binding optional keyword parameters."""
  if name not in CATALOG:
    raise errors.ConfigError(
        f'Unknown bathymetry {name!r}; choose from {sorted(CATALOG)}.')
  params = dict(params or {})
  fn = CATALOG[name]
  known = fn.__code__.co_varnames[2:fn.__code__.co_argcount]
  for key in params:
    if key not in known:
      raise errors.ConfigError(f'Bathymetry {name!r} has no parameter {key!r}.')
  return BathymetryField(name=name, params=types.MappingProxyType(params),
                         fn=functools.partial(fn, **params) if params else fn)


@chex.dataclass
class BottomFields:
  """Projected bottoms on both meshes, each (nx, ny, nb)."""
  primal: chex.Array
  dual: chex.Array

  def on(self, kind: str) -> _Array:
    return self.primal if kind == mesh_lib.MeshKind.PRIMAL else self.dual


def project_bathymetry(bathy: BathymetryField, mesh: mesh_lib.MeshPair,
                       k: int) -> BottomFields:
  """L2 projections b^C and b^D."""
  projections: Dict[str, _Array] = {}
  for kind in (mesh_lib.MeshKind.PRIMAL, mesh_lib.MeshKind.DUAL):
    projections[kind] = basis_lib.project_l2(bathy.values, mesh.grid(kind), k)
  return BottomFields(primal=projections[mesh_lib.MeshKind.PRIMAL],
                      dual=projections[mesh_lib.MeshKind.DUAL])
