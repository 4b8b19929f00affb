"""Two-hop SWIPT interference network with interference alignment at the
sources and power-splitting amplify-and-forward relays."""

from .channel_model import (
    ChannelRealization,
    ConfigError,
    NetworkConfig,
    path_loss,
    sample_channels,
)
from .ia_alignment import (
    AlignmentSolution,
    feasible_streams,
    run_iterative_ia,
    verify_alignment,
)
from .swipt_relay import (
    LinkAggregates,
    PsVector,
    amplification_coeff,
    compute_aggregates,
    harvested_energy,
    link_rate,
    sinr_destination,
    sinr_high_snr,
    sum_rate,
)
from .ps_optimizer import (
    DegenerateScenarioError,
    OptimizerSettings,
    OptimizerTrace,
    grid_oracle,
    init_ps_high_snr,
    newton_root,
    optimize_ps,
    sinr_derivative,
)
from .sim_harness import SweepSpec, TrialReport, emit_csv, no_ia_baseline, run_sweep, run_trial, run_trials

__version__ = "0.1.0"
