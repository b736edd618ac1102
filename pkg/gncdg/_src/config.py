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

"""Run configuration: an INI file layered over the scenario defaults.

Example:

    [run]
    scenario = seawall
    t_final = 20
    k = 1

    [physics]
    alpha = 1.159

    [gauges]
    points = 5.9 0; 7.6 0
"""

import configparser
import io
import types
from typing import Any, Dict, Mapping, Optional, Tuple

import attr
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import scenarios as scenarios_lib

_Points = Tuple[Tuple[float, float], ...]


def _check(condition: bool, field: str, message: str):
  if not condition:
    raise errors.ConfigError(f'{field}: {message}')


@attr.define(frozen=True)
class RunConfig:
  """Fully resolved settings of one run.

  Attributes:
    scenario: scenario name.
    t_final: final time.
    k: polynomial degree, 1 or 2.
    log_every: steps between progress log lines.
    g: gravity.
    alpha: dispersion-enhancement parameter.
    nx: primal cells along x.
    ny: primal cells along y.
    cfl: stability constant of the adaptive step.
    fixed_dt: fixed time step, or None.
    tvb: TVB minmod limiting on (h + b, hP, hQ).
    tvb_m: TVB constant.
    positivity: positivity limiter and its time-step bound.
    well_balanced: well-balanced stage instead of the standard one.
    bottom_limiter: TVB limiting of the projected bottoms.
    modify_bottom: bottom modification (only with positivity).
    gauges: gauge positions.
    time_offset: added to gauge times in the shifted column.
    gauge_every: steps between gauge samples.
    output_dir: output directory, or None for no files.
    snapshot_times: times of field snapshots.
  """
  scenario: str
  t_final: float
  k: int = 1
  log_every: int = 100
  g: float = 9.81
  alpha: float = 1.0
  nx: int = 0
  ny: int = 0
  cfl: float = 0.2
  fixed_dt: Optional[float] = None
  tvb: bool = True
  tvb_m: float = 10.
  positivity: bool = True
  well_balanced: bool = True
  bottom_limiter: bool = False
  modify_bottom: bool = True
  gauges: _Points = ()
  time_offset: float = 0.
  gauge_every: int = 1
  output_dir: Optional[str] = None
  snapshot_times: Tuple[float, ...] = ()

  def __attrs_post_init__(self):
    sc = scenarios_lib.get_scenario(self.scenario)
    _check(self.k in (1, 2), 'k', f'must be 1 or 2, got {self.k}')
    _check(self.t_final > 0., 't_final',
           f'must be positive, got {self.t_final}')
    _check(self.g > 0., 'g', f'must be positive, got {self.g}')
    _check(self.alpha > 0., 'alpha', f'must be positive, got {self.alpha}')
    _check(self.nx >= 2 and self.ny >= 2, 'nx/ny',
           f'need at least two cells, got {self.nx}x{self.ny}')
    _check(self.cfl > 0., 'cfl', f'must be positive, got {self.cfl}')
    _check(self.fixed_dt is None or self.fixed_dt > 0., 'fixed_dt',
           f'must be positive, got {self.fixed_dt}')
    _check(self.tvb_m >= 0., 'tvb_m', f'must be non-negative, got {self.tvb_m}')
    _check(self.log_every >= 1, 'log_every', 'must be at least 1')
    _check(self.gauge_every >= 1, 'gauge_every', 'must be at least 1')
    x0, x1, y0, y1 = sc.domain
    for x, y in self.gauges:
      _check(x0 <= x <= x1 and y0 <= y <= y1, 'gauges',
             f'gauge ({x}, {y}) lies outside the domain {sc.domain}')
    for t in self.snapshot_times:
      _check(0. <= t <= self.t_final, 'snapshot_times',
             f'{t} is outside [0, {self.t_final}]')

  @property
  def scenario_def(self) -> scenarios_lib.Scenario:
    return scenarios_lib.get_scenario(self.scenario)

  def replace(self, **changes) -> 'RunConfig':
    return attr.evolve(self, **changes)


def default_config(scenario: str, **overrides) -> RunConfig:
  """Scenario defaults, optionally overridden field by field."""
  sc = scenarios_lib.get_scenario(scenario)
  fields: Dict[str, Any] = dict(
      scenario=scenario, t_final=sc.t_final, g=sc.g, nx=sc.nx, ny=sc.ny,
      gauges=tuple(sc.gauges), snapshot_times=tuple(sc.snapshot_times))
  fields.update(sc.limiters)
  fields.update(overrides)
  if sc.fixed_dt_factor is not None and 'fixed_dt' not in overrides:
    fields['fixed_dt'] = sc.fixed_dt_factor * (
        sc.domain[1] - sc.domain[0]) / fields['nx']
  return RunConfig(**fields)


################################################################################
# INI format.
################################################################################

# section -> key -> (field, parser)
_SCHEMA = types.MappingProxyType({
    'run': {'scenario': ('scenario', str), 't_final': ('t_final', float),
            'k': ('k', int), 'log_every': ('log_every', int)},
    'physics': {'g': ('g', float), 'alpha': ('alpha', float)},
    'mesh': {'nx': ('nx', int), 'ny': ('ny', int), 'dx': ('dx', float),
             'dy': ('dy', float)},
    'time': {'cfl': ('cfl', float), 'fixed_dt': ('fixed_dt', float),
             'fixed_dt_factor': ('fixed_dt_factor', float)},
    'limiters': {'tvb': ('tvb', bool), 'tvb_m': ('tvb_m', float),
                 'positivity': ('positivity', bool),
                 'well_balanced': ('well_balanced', bool),
                 'bottom_limiter': ('bottom_limiter', bool),
                 'modify_bottom': ('modify_bottom', bool)},
    'gauges': {'points': ('gauges', 'points'),
               'time_offset': ('time_offset', float),
               'every': ('gauge_every', int)},
    'output': {'directory': ('output_dir', str),
               'snapshot_times': ('snapshot_times', 'floats')},
})

_BOOLEANS = types.MappingProxyType({
    'true': True, 'yes': True, 'on': True, '1': True,
    'false': False, 'no': False, 'off': False, '0': False})


def _parse_points(text: str) -> _Points:
  points = []
  for chunk in text.split(';'):
    chunk = chunk.strip()
    if not chunk:
      continue
    parts = chunk.replace(',', ' ').split()
    if len(parts) != 2:
      raise ValueError(f'expected "x y", got {chunk!r}')
    points.append((float(parts[0]), float(parts[1])))
  return tuple(points)


def _parse_floats(text: str) -> Tuple[float, ...]:
  return tuple(float(t) for t in text.replace(';', ',').split(',') if t.strip())


def _parse_value(kind, text: str):
  if kind is bool:
    if text.lower() not in _BOOLEANS:
      raise ValueError(f'expected a boolean, got {text!r}')
    return _BOOLEANS[text.lower()]
  if kind == 'points':
    return _parse_points(text)
  if kind == 'floats':
    return _parse_floats(text)
  return kind(text)


def _line_numbers(text: str) -> Dict[Tuple[str, Optional[str]], int]:
  """Line of every section header and key, for error messages."""
  lines: Dict[Tuple[str, Optional[str]], int] = {}
  section = None
  for number, raw in enumerate(text.splitlines(), start=1):
    line = raw.strip()
    if not line or line[0] in '#;':
      continue
    if line.startswith('[') and line.endswith(']'):
      section = line[1:-1].strip()
      lines.setdefault((section, None), number)
    elif section is not None:
      for sep in ('=', ':'):
        if sep in line:
          key = line.split(sep, 1)[0].strip().lower()
          lines.setdefault((section, key), number)
          break
  return lines


def parse_config(text: str,
                 overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
  """Parses INI text; `overrides` (config field names) win over the file.

  Args:
    text: INI contents.
    overrides: values that replace file values, e.g. from command-line flags.

  Returns:
    The validated configuration.
  """
  parser = configparser.ConfigParser(interpolation=None)
  try:
    parser.read_string(text)
  except configparser.ParsingError as e:
    line = e.errors[0][0] if e.errors else None
    raise errors.ConfigError('could not parse the file', line=line) from e
  except configparser.DuplicateOptionError as e:
    raise errors.ConfigError(f'duplicate key {e.option!r}',
                             line=e.lineno) from e
  except configparser.DuplicateSectionError as e:
    raise errors.ConfigError(f'duplicate section {e.section!r}',
                             line=e.lineno) from e
  except configparser.MissingSectionHeaderError as e:
    raise errors.ConfigError('key outside any section', line=e.lineno) from e

  lines = _line_numbers(text)
  values: Dict[str, Any] = {}
  for section in parser.sections():
    if section not in _SCHEMA:
      raise errors.ConfigError(f'unknown section [{section}]',
                               line=lines.get((section, None)))
    for key, raw in parser.items(section):
      line = lines.get((section, key))
      if key not in _SCHEMA[section]:
        raise errors.ConfigError(f'unknown key {key!r} in [{section}]',
                                 line=line)
      field, kind = _SCHEMA[section][key]
      try:
        values[field] = _parse_value(kind, raw.strip())
      except ValueError as e:
        raise errors.ConfigError(f'[{section}] {key}: {e}', line=line) from e

  values.update(overrides or {})
  if 'scenario' not in values:
    raise errors.ConfigError('[run] scenario is required')
  sc = scenarios_lib.get_scenario(values['scenario'])
  x_min, x_max, y_min, y_max = sc.domain
  dx, dy = values.pop('dx', None), values.pop('dy', None)
  if dx is not None and 'nx' not in values:
    values['nx'] = mesh_lib.cells_for_spacing(x_min, x_max, dx)
  if dy is not None and 'ny' not in values:
    values['ny'] = mesh_lib.cells_for_spacing(y_min, y_max, dy)
  factor = values.pop('fixed_dt_factor', None)
  if factor is not None and 'fixed_dt' not in values:
    values['fixed_dt'] = factor * (x_max - x_min) / values.get('nx', sc.nx)
  scenario = values.pop('scenario')
  return default_config(scenario, **values)


def load_config(path: str,
                overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
  """Reads and validates a configuration file."""
  try:
    with open(path, 'r') as f:
      text = f.read()
  except OSError as e:
    raise errors.ConfigError(f'cannot read {path}: {e}') from e
  return parse_config(text, overrides)


def _format_value(value) -> str:
  if isinstance(value, bool):
    return 'true' if value else 'false'
  if isinstance(value, float):
    return repr(value)
  return str(value)


def config_to_ini(config: RunConfig) -> str:
  """Serialises every field; `parse_config` of the result gives `config`."""
  parser = configparser.ConfigParser(interpolation=None)
  for section, keys in _SCHEMA.items():
    entries = {}
    for key, (field, kind) in keys.items():
      if field in ('dx', 'dy', 'fixed_dt_factor'):
        continue
      value = getattr(config, field)
      if value is None:
        continue
      if kind == 'points':
        text = '; '.join(f'{x!r} {y!r}' for x, y in value)
      elif kind == 'floats':
        text = ', '.join(repr(float(t)) for t in value)
      else:
        text = _format_value(value)
      entries[key] = text
    parser[section] = entries
  out = io.StringIO()
  parser.write(out)
  return out.getvalue()
