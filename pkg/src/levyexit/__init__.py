"""levyexit: exit-time machinery for Levy-driven SDEs.

Cadlag path functionals, Skorohod J1 metrics, entrance times and their
continuity classification, jump-diffusion simulation with exit
detection, Monte Carlo value estimation, and nonlocal-operator
quadrature, with a registry of deterministic desk-scale experiments.
"""

__version__ = "0.1.0"

from .cadlag import (CadlagPath, compose_scalar, constant, dump_path,
                     from_grid, indicator, load_path, lower_envelope,
                     path_add, path_sub, piecewise, running_inf, sup_norm)
from .domain import Ball, Box, Interval, Polygon, make_domain
from .entrance import (classify_gamma, classify_gamma_skeleton,
                       continuity_probe, entrance_point, entrance_record,
                       entrance_time, scalar_entrance_time)
from .levy import (AlphaStable, CompoundPoisson, NoJumps, TruncatedStable,
                   levy_constant, make_levy_model, stable_positive,
                   stable_symmetric)
from .nonlocal_op import (QuadratureSpec, candidate, eval_F_residual,
                          eval_H, eval_I, eval_I_split, inf_H,
                          operator_continuity_probe)
from .sde import (Coefficients, ExitArchive, ExitSample, Policy,
                  SimulationSpec, batch_simulate, boundary_exit_probe,
                  coupled_sup_gap, simulate)
from .skorohod import (MetricResult, SearchBudget, TimeChange,
                       apply_timechange, d_inf_upper, identity_timechange,
                       metric_finite, metric_infinite, timechange_seminorm,
                       two_piece_warp, window_path)
from .value import ValueEstimate, continuity_scan, estimate, resolve_cost

__all__ = [n for n in dir() if not n.startswith("_")]
