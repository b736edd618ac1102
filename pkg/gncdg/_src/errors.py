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

"""Exceptions raised by the solver.

Everything derives from `GNError` so callers can catch the whole family. The
command-line driver maps the three branches (configuration, numerical, output)
onto distinct exit codes.
"""

from typing import Optional


class GNError(Exception):
  pass


class ConfigError(GNError, ValueError):
  """Invalid configuration; optionally points at a line of the config file."""

  def __init__(self, message: str, line: Optional[int] = None):
    if line is not None:
      message = f'line {line}: {message}'
    super().__init__(message)
    self.line = line


class NumericalError(GNError):
  """A numerical failure, tagged with the step and stage it happened in."""

  def __init__(self, message: str, step: Optional[int] = None,
               stage: Optional[int] = None):
    tags = []
    if step is not None:
      tags.append(f'step {step}')
    if stage is not None:
      tags.append(f'stage {stage}')
    if tags:
      message = f'{message} ({", ".join(tags)})'
    super().__init__(message)
    self.step = step
    self.stage = stage


class BlowUpError(NumericalError):
  pass


class PositivityError(NumericalError):
  pass


class SolverError(NumericalError):
  pass


class BottomModificationError(NumericalError):
  pass


class TimeStepError(NumericalError):
  pass


class EvaluationError(GNError, ValueError):
  pass


class ProjectionError(GNError, ValueError):
  pass


class CellLookupError(GNError, LookupError):
  pass


class OutputError(GNError):
  """I/O failure while writing results."""

  def __init__(self, message: str, path: str):
    super().__init__(f'{message}: {path}')
    self.path = path
