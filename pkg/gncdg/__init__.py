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

"""Central DG solver for the dispersion-enhanced Green-Naghdi equations."""

from gncdg._src import bathymetry
from gncdg._src import boundary
from gncdg._src import cdg
from gncdg._src import fe
from gncdg._src import limiters
from gncdg._src import model
from gncdg._src.basis import DGField
from gncdg._src.basis import eval_basis
from gncdg._src.basis import eval_field
from gncdg._src.basis import project_l2
from gncdg._src.bathymetry import bathymetry_catalog
from gncdg._src.bathymetry import project_bathymetry
from gncdg._src.boundary import apply_boundary_conditions
from gncdg._src.boundary import BoundaryConditions
from gncdg._src.cdg import euler_stage_standard
from gncdg._src.cdg import euler_stage_wellbalanced
from gncdg._src.cdg import max_timestep
from gncdg._src.config import config_to_ini
from gncdg._src.config import default_config
from gncdg._src.config import load_config
from gncdg._src.config import parse_config
from gncdg._src.config import RunConfig
from gncdg._src.errors import BlowUpError
from gncdg._src.errors import BottomModificationError
from gncdg._src.errors import CellLookupError
from gncdg._src.errors import ConfigError
from gncdg._src.errors import EvaluationError
from gncdg._src.errors import GNError
from gncdg._src.errors import NumericalError
from gncdg._src.errors import OutputError
from gncdg._src.errors import PositivityError
from gncdg._src.errors import ProjectionError
from gncdg._src.errors import SolverError
from gncdg._src.errors import TimeStepError
from gncdg._src.fe import FEVelocityField
from gncdg._src.fe import recover_velocity
from gncdg._src.gauges import GaugeSeries
from gncdg._src.gauges import make_gauges
from gncdg._src.gauges import record_gauges
from gncdg._src.limiters import modify_bathymetry
from gncdg._src.limiters import positivity_limit
from gncdg._src.limiters import tvb_minmod_limit
from gncdg._src.mesh import build_overlapping_meshes
from gncdg._src.mesh import MeshPair
from gncdg._src.mesh import positivity_point_set
from gncdg._src.model import PhysParams
from gncdg._src.output import compare_gauge_series
from gncdg._src.output import summary_json
from gncdg._src.output import write_outputs
from gncdg._src.output import write_table_csv
from gncdg._src.reports import convergence_report
from gncdg._src.reports import dispersion_report
from gncdg._src.reports import Table
from gncdg._src.scenarios import describe as describe_scenarios
from gncdg._src.scenarios import get_scenario
from gncdg._src.scenarios import SCENARIOS
from gncdg._src.timestepper import run_simulation
from gncdg._src.timestepper import SchemeOptions
from gncdg._src.timestepper import Solver
from gncdg._src.timestepper import SolverState
from gncdg._src.timestepper import ssp_rk3_step

__version__ = "0.1.0"

__all__ = (
    "apply_boundary_conditions",
    "bathymetry_catalog",
    "BlowUpError",
    "BottomModificationError",
    "BoundaryConditions",
    "build_overlapping_meshes",
    "CellLookupError",
    "compare_gauge_series",
    "config_to_ini",
    "ConfigError",
    "convergence_report",
    "default_config",
    "describe_scenarios",
    "DGField",
    "dispersion_report",
    "euler_stage_standard",
    "euler_stage_wellbalanced",
    "eval_basis",
    "eval_field",
    "EvaluationError",
    "FEVelocityField",
    "GaugeSeries",
    "get_scenario",
    "GNError",
    "load_config",
    "make_gauges",
    "max_timestep",
    "MeshPair",
    "modify_bathymetry",
    "NumericalError",
    "OutputError",
    "parse_config",
    "PhysParams",
    "positivity_limit",
    "positivity_point_set",
    "project_bathymetry",
    "project_l2",
    "ProjectionError",
    "record_gauges",
    "recover_velocity",
    "run_simulation",
    "RunConfig",
    "SCENARIOS",
    "SchemeOptions",
    "Solver",
    "SolverError",
    "SolverState",
    "ssp_rk3_step",
    "summary_json",
    "Table",
    "TimeStepError",
    "tvb_minmod_limit",
    "write_outputs",
    "write_table_csv",
)
