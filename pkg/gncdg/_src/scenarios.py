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

"""Catalog of benchmark scenarios.

Each scenario fixes a domain, a default mesh, boundary conditions, a bottom,
initial data and the gauges to record. Everything a user may change lives in
`RunConfig`; the values here are its defaults.
"""

import types
from typing import Callable, Mapping, Optional, Tuple

import attr
from gncdg._src import boundary
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import model

_Kind = mesh_lib.BoundaryKind


class Initial:
  """Kinds of initial data."""
  SOLITARY = 'solitary'
  STILL = 'still'


@attr.define(frozen=True)
class Scenario:
  """Defaults of one benchmark.

  Attributes:
    name: catalog key.
    description: one line for `scenarios` listings.
    domain: (x_min, x_max, y_min, y_max).
    nx: default primal cells along x.
    ny: default primal cells along y.
    bcs: boundary kind per side.
    bathymetry: name in the bathymetry catalog.
    t_final: default final time.
    initial: `Initial.SOLITARY` or `Initial.STILL`.
    initial_params: `h1, h2, x0` for a solitary wave, `level` for still water.
    incident: (T0, a0, wavelength) of the Stokes wave entering on the left.
    still_depth: depth used by the inflow velocity `eta sqrt(g / h0)`.
    gauges: gauge positions.
    snapshot_times: times at which field snapshots are written.
    fixed_dt_factor: if set, dt = factor * dx.
    has_exact: whether the solitary wave is an exact solution here.
    bathymetry_params: keyword overrides for the bottom.
    g: gravity.
    limiters: default limiter toggles.
  """
  name: str
  description: str
  domain: Tuple[float, float, float, float]
  nx: int
  ny: int
  bcs: Mapping[str, str]
  bathymetry: str
  t_final: float
  initial: str
  initial_params: Mapping[str, float]
  incident: Optional[Tuple[float, float, float]] = None
  still_depth: float = 0.4
  gauges: Tuple[Tuple[float, float], ...] = ()
  snapshot_times: Tuple[float, ...] = ()
  fixed_dt_factor: Optional[float] = None
  has_exact: bool = False
  bathymetry_params: Mapping[str, float] = types.MappingProxyType({})
  g: float = 9.81
  limiters: Mapping[str, bool] = types.MappingProxyType({})

  def initial_condition(self) -> Tuple[Callable, Callable, Callable]:
    """Surface elevation and velocity at t = 0 as jnp functions of (x, y)."""
    params = dict(self.initial_params)
    if self.initial == Initial.SOLITARY:
      g = self.g

      def eta(x, y):
        h, _, _ = model.solitary_wave(x, 0., params['h1'], params['h2'], g,
                                      params.get('x0', 0.))
        return h + 0. * y

      def u(x, y):
        _, vel, _ = model.solitary_wave(x, 0., params['h1'], params['h2'], g,
                                        params.get('x0', 0.))
        return vel + 0. * y

      return eta, u, model.zero_field
    if self.initial == Initial.STILL:
      level = params['level']

      def flat_surface(x, y):
        return level + 0. * x * y

      return flat_surface, model.zero_field, model.zero_field
    raise errors.ConfigError(f'Unknown initial data {self.initial!r}.')

  def exact_solution(self, t: float) -> Tuple[Callable, Callable]:
    """Exact depth and x-velocity at time t, for scenarios that have one."""
    if not self.has_exact:
      raise errors.ConfigError(f'Scenario {self.name!r} has no exact solution.')
    params = dict(self.initial_params)
    args = (params['h1'], params['h2'], self.g, params.get('x0', 0.))

    def h(x, y):
      return model.solitary_wave(x, t, *args)[0] + 0. * y

    def u(x, y):
      return model.solitary_wave(x, t, *args)[1] + 0. * y

    return h, u

  def incident_wave(self) -> Optional[boundary.IncidentWave]:
    if self.incident is None:
      return None
    period, amplitude, wavelength = self.incident
    return boundary.IncidentWave(period=period, amplitude=amplitude,
                                 wavelength=wavelength, depth=self.still_depth)


def _sides(left, right, bottom, top):
  return types.MappingProxyType(
      dict(left=left, right=right, bottom=bottom, top=top))


_OUT_X_PERIODIC_Y = _sides(_Kind.OUTGOING, _Kind.OUTGOING, _Kind.PERIODIC,
                           _Kind.PERIODIC)
_PERIODIC = _sides(*(_Kind.PERIODIC,) * 4)
_OUTGOING = _sides(*(_Kind.OUTGOING,) * 4)

_SOLITARY_ACCURACY = types.MappingProxyType(dict(h1=1., h2=2.25, x0=0.))
_STILL_WATER = types.MappingProxyType(dict(level=0.50001))

SCENARIOS = types.MappingProxyType({
    'solitary_accuracy': Scenario(
        name='solitary_accuracy',
        description='Solitary wave on a flat bottom, convergence study.',
        domain=(-30., 50., -1., 1.), nx=160, ny=4,
        bcs=_OUT_X_PERIODIC_Y, bathymetry='flat', t_final=1.,
        initial=Initial.SOLITARY, initial_params=_SOLITARY_ACCURACY,
        fixed_dt_factor=0.1, has_exact=True),
    'solitary_periodic': Scenario(
        name='solitary_periodic',
        description='Solitary wave in a periodic box, mass conservation.',
        domain=(-30., 50., -1., 1.), nx=160, ny=4,
        bcs=_PERIODIC, bathymetry='flat', t_final=1.,
        initial=Initial.SOLITARY, initial_params=_SOLITARY_ACCURACY),
    'still_water_case_a': Scenario(
        name='still_water_case_a',
        description='Lake at rest over a smooth bump.',
        domain=(-1., 1., -1., 1.), nx=20, ny=20,
        bcs=_OUTGOING, bathymetry='caseA_bump', t_final=10.,
        initial=Initial.STILL, initial_params=_STILL_WATER),
    'still_water_case_b': Scenario(
        name='still_water_case_b',
        description='Lake at rest over a discontinuous block, near dry.',
        domain=(-1., 1., -1., 1.), nx=20, ny=20,
        bcs=_OUTGOING, bathymetry='caseB_block', t_final=10.,
        initial=Initial.STILL, initial_params=_STILL_WATER,
        limiters=types.MappingProxyType(
            dict(bottom_limiter=True, modify_bottom=True))),
    'seawall': Scenario(
        name='seawall',
        description='Solitary wave overtopping a seawall.',
        domain=(-5., 20., -0.2, 0.2), nx=500, ny=8,
        bcs=_OUT_X_PERIODIC_Y, bathymetry='seawall', t_final=20.,
        initial=Initial.SOLITARY,
        initial_params=types.MappingProxyType(dict(h1=0.2, h2=0.27, x0=0.)),
        gauges=((5.9, 0.), (7.6, 0.), (9.644, 0.), (10.462, 0.),
                (10.732, 0.), (11.12, 0.)),
        snapshot_times=(5., 7.5, 12.5, 20.)),
    'trapezoid_bar': Scenario(
        name='trapezoid_bar',
        description='Periodic waves over a submerged trapezoidal bar.',
        domain=(0., 25., -0.2, 0.2), nx=500, ny=8,
        bcs=_sides(_Kind.INFLOW, _Kind.ABSORBING, _Kind.PERIODIC,
                   _Kind.PERIODIC),
        bathymetry='trapezoid_bar', t_final=40.,
        initial=Initial.STILL,
        initial_params=types.MappingProxyType(dict(level=0.)),
        incident=(2.02, 0.01, 3.73), still_depth=0.4,
        gauges=tuple((x, 0.) for x in (2., 4., 10.5, 12.5, 13.5, 14.5, 15.7,
                                       17.3, 19., 21.))),
    'trapezoid_bar_at_rest': Scenario(
        name='trapezoid_bar_at_rest',
        description='Lake at rest over the trapezoidal bar, gauge fixture.',
        domain=(0., 25., -0.2, 0.2), nx=100, ny=2,
        bcs=_OUT_X_PERIODIC_Y, bathymetry='trapezoid_bar', t_final=2.**-8,
        initial=Initial.STILL,
        initial_params=types.MappingProxyType(dict(level=0.)),
        gauges=tuple((x, 0.) for x in (2., 4., 10.5, 12.5, 13.5, 14.5, 15.7,
                                       17.3, 19., 21.))),
    'elliptic_bar': Scenario(
        name='elliptic_bar',
        description='Periodic waves over a bar with elliptic slope.',
        domain=(0., 25., -1., 1.), nx=125, ny=20,
        bcs=_sides(_Kind.INFLOW, _Kind.ABSORBING, _Kind.WALL, _Kind.WALL),
        bathymetry='elliptic_bar', t_final=30.,
        initial=Initial.STILL,
        initial_params=types.MappingProxyType(dict(level=0.)),
        incident=(3., 0.01, 3.73), still_depth=0.4,
        gauges=((8., 0.), (9., 0.5), (21., 0.), (18., 0.), (19., 0.5),
                (22., 0.5)),
        snapshot_times=(30.,)),
    'composite_beach': Scenario(
        name='composite_beach',
        description='Solitary wave over a composite beach ending in a wall.',
        domain=(-5., 23.23, -0.2, 0.2), nx=500, ny=8,
        bcs=_sides(_Kind.OUTGOING, _Kind.WALL, _Kind.PERIODIC,
                   _Kind.PERIODIC),
        bathymetry='composite_beach', t_final=30.,
        initial=Initial.SOLITARY,
        initial_params=types.MappingProxyType(
            dict(h1=0.22, h2=1.73 * 0.22, x0=0.)),
        gauges=((15.04, 0.), (19.4, 0.), (22.33, 0.))),
})


def get_scenario(name: str) -> Scenario:
  if name not in SCENARIOS:
    raise errors.ConfigError(
        f'Unknown scenario {name!r}; choose from {sorted(SCENARIOS)}.')
  return SCENARIOS[name]


def describe() -> str:
  """One line per scenario, for the command line."""
  lines = []
  for name, sc in SCENARIOS.items():
    x0, x1, y0, y1 = sc.domain
    lines.append(f'{name:20s} [{x0:g},{x1:g}]x[{y0:g},{y1:g}] '
                 f'{sc.nx}x{sc.ny} t={sc.t_final:g}  {sc.description}')
  return '\n'.join(lines)
