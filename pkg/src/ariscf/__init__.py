"""Active-RIS aided cell-free massive MIMO uplink toolkit."""

from .scenario import (
    NetworkRealization,
    Scenario,
    build_correlation_matrix,
    dbm_to_watt,
    large_scale_gain,
    load_scenario,
    sample_layout,
)
from .ris import RisState, amplitude_gain, aris_output_power, reflection_matrix
from .channel import (
    ChannelSample,
    SecondOrderStats,
    compute_stats,
    cross_moment_cyclic,
    cross_moments,
    fourth_moment,
    sample_channels,
    sample_correlated_vector,
)
from .estimation import (
    EstimationStats,
    PilotPlan,
    assign_pilots,
    compute_estimation_stats,
    estimate_channels,
    lmmse_coefficient,
    nmse,
)
from .perf import (
    SinrBreakdown,
    energy_efficiency,
    evaluate_phases,
    per_user_se,
    se_per_user,
    sinr_closed_form,
    sum_se,
)

__version__ = "0.1.0"
