"""Fractional-order reset control: simulation, describing functions and stability tests."""

from .describing import (describing_function, df_ci, df_fci, df_fi, df_fore, numerical_df,
                         phase_lead)
from .errors import FracResetError
from .fode import MemoryMode, gl_step, gl_weights, reset_history
from .models import (ClosedLoopResetSystem, ResetElement, ResetRule, StateSpaceModel,
                     assemble_closed_loop, augment_integer_order, tf_to_ss, to_order)
from .numcore import lyapunov_solve, matrix_fractional_power
from .scenario import Scenario, load_scenario, parse_scenario
from .simreset import SimulationConfig, Sinusoid, simulate, step_metrics
from .stability import beta_interval, build_h_beta, spr_check, stability_report

__version__ = "0.1.0"
