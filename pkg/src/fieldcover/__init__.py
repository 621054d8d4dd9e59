"""Variance-bounded measurement planning for spatial field estimation."""

from .errors import (
    DegenerateDataError,
    GridTooLargeError,
    NumericalError,
    VerificationError,
)
from .geometry import (
    Disk,
    Environment,
    cover_disk_lawnmower,
    cover_environment,
    disks_intersect,
    greedy_mis,
    lawnmower_rows,
    mis_tour_lower_bound,
)
from .gp import (
    Hyperparameters,
    HyperparameterGrid,
    MeasurementMultiset,
    Observation,
    Posterior,
    fit_hyperparameters,
    kernel,
    kernel_matrix,
    nlml,
    posterior_mean,
    posterior_variance,
    posterior_variance_batch,
    repeated_measurement_variance,
)
from .placement import (
    AccuracySpec,
    MeasurementPlan,
    VerificationReport,
    default_grid_spacing,
    disk_cover_placement,
    necessary_radius,
    prune_redundant,
    required_measurements,
    sufficient_radius,
    verify_plan,
)
from .routing import (
    TimeModel,
    Tour,
    cumulative_times,
    disk_cover_tour,
    intra_disk_travel,
    tour_from_plan,
    tour_time,
    tsp_heuristic,
)
from .fleet import (
    MakespanCertificate,
    SplitParameters,
    SubtourSet,
    farthest_dwell_distance,
    makespan,
    makespan_certificate,
    split_tour,
)
from .fields import FieldGrid, sample_gp_field
from .baselines import (
    SensorModel,
    TrialReport,
    baseline_candidates,
    convergence_study,
    entropy_greedy,
    lawnmower_plan,
    mi_greedy,
    ordered_tour,
    simulate_trial,
    single_trial_mse_over_time,
    survey_rows,
    variance_over_time,
)

__version__ = "0.1.0"
