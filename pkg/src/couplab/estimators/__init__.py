"""Statistical verification of coupling, contraction, growth and Lyapunov estimates."""

from .checks import (LyapunovReport, Report, calibrate_budget, calibrate_scheduler, contraction_flags,
                     ctrl_h_by_l2_verify, drift_estimate_verify, foias_prodi_verify, growth_tail_verify, hs_tail_verify,
                     lyapunov_verify, run_pairs, run_paths)
from .curves import (DecayCurve, TestFunctional, default_panel, lipb_curve_from_episodes, lipb_decay_curve,
                     sobolev_panel, tv_curve_from_episodes, tv_decay_curve)
from .stats import FitDegenerateError, exp_fit, exp_fit_full, mean_se, wilson
from .batteries import (girsanov_battery, meet_bound_battery, measure_battery, torus_block_battery,
                        torus_block_oracle)
