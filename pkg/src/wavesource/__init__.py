"""Numerical laboratory for an inverse acoustic source problem: retarded
potential forward solver, temporal-Fourier boundary data, Green's-identity
source reconstruction, and a stability sweep harness."""

from .errors import (
    ConfigError,
    DeconvolutionError,
    DomainError,
    InputError,
    PreconditionError,
)
from .forward import (
    CHANNELS,
    BoundaryDataset,
    exponential_decay_check,
    forward_sweep,
    probe_channels,
    retarded_potential,
    saturation_time,
)
from .geometry import (
    BallGrid,
    FrequencyGrid,
    SphereGrid,
    TimeGrid,
    WaveVectorGrid,
    make_ball_grid,
    make_sphere_grid,
    surface_integrate,
    volume_integrate,
)
from .sources import (
    ExponentialProfile,
    GaussianBlob,
    RickerProfile,
    SourceModel,
    eval_f,
    f_hat_analytic,
    f_l2_norm,
    f_l2_norm_analytic,
    g_derivatives,
    g_eval,
    g_hat,
    shell_moments,
)
from .spectral import (
    SpectralData,
    halfline_parseval_residual,
    helmholtz_oracle,
    helmholtz_oracle_dn,
    parseval_residual,
    temporal_fourier,
)

from .config import (
    RunConfig,
    config_digest,
    config_from_dict,
    default_config_path,
    load_config,
)
from .inversion import (
    FourierField,
    ReconstructionResult,
    reconstruct_fhat,
    reconstruct_field,
    select_band_limit,
    synthesize_f,
)
from .persist import (
    read_boundary,
    read_reconstruction,
    read_spectral,
    read_sweep_csv,
    write_boundary,
    write_line_chart,
    write_reconstruction,
    write_spectral,
    write_sweep_csv,
)
from .stability import (
    ExperimentRecord,
    StabilityConfig,
    TailIntegrals,
    add_noise,
    bound_rhs,
    continuation_bound_check,
    energy_ratio,
    epsilon_of,
    fit_verify_bound,
    mu,
    random_source_model,
    run_sweep,
    sweep_summary,
    tail_integrals,
)
from .verification import CheckResult, format_report, run_checks

__version__ = "0.1.0"
