"""Uplink transmit-power minimization for RIS-aided IoT networks.

Riemannian conjugate gradient over the product of the unit-modulus phase
manifold and the unit-column-norm beamforming manifold, plus channel
synthesis, low-rank channel estimation, baselines and a sweep harness.
"""

from .baselines import baseline_no_ris, baseline_random_phase_mrt
from .channel import (
    ChannelSet,
    ConfigError,
    SystemConfig,
    draw_channels,
    effective_channel,
    load_config,
    path_loss,
    steering_bs,
    steering_ris,
)
from .estimation import (
    CompletionError,
    SampleMask,
    SampledMatrix,
    apply_mask,
    complete_low_rank,
    ls_sampled_estimate,
    make_mask,
    reconstruct_channel_set,
    sample_and_reconstruct,
)
from .manifold import (
    ProductPoint,
    RetractionError,
    TangentVector,
    inner_product,
    point_difference_sq,
    project_tangent,
    random_point,
    random_tangent,
    retract,
    riemannian_gradient,
)
from .power import (
    InfeasiblePowerError,
    SolveReport,
    achievable_rate,
    coupling_gain,
    coupling_matrix,
    euclidean_grad_beams,
    euclidean_grad_phases,
    lagrangian_objective,
    lagrangian_value,
    min_power,
    mrt_beams,
    optimize_phase_beam,
    rcg_jo,
    subgradient_step,
)
from .rcg import (
    InvalidDirectionError,
    LineSearchError,
    Objective,
    RcgOptions,
    RcgTrace,
    SolverStalledError,
    check_gradient,
    rcg_minimize,
    strong_wolfe_search,
)

__version__ = "0.1.0"
