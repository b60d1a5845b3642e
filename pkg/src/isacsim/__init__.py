"""Bistatic OFDM ISAC simulation library."""

__version__ = "0.1.0"

from .scenario import (  # noqa: F401
    ConfigurationError,
    Path,
    PathSet,
    ScenarioConfig,
    TargetSpec,
    WaveformConfig,
    derive_paths,
    load_scenario,
    noise_variance,
    reference_scenario,
    save_scenario,
    snap_to_grid,
)
from .ofdm import (  # noqa: F401
    Constellation,
    PilotPattern,
    TxFrame,
    build_tx_frame,
    demap_hard,
    generate_pilot_pattern,
    make_constellation,
)
from .channel import (  # noqa: F401
    ChannelMatrix,
    RxFrame,
    apply_channel,
    read_grid,
    steering_freq,
    steering_time,
    synthesize_channel,
    write_grid,
)
from .detect import (  # noqa: F401
    CfarConfig,
    Detection,
    DetectionList,
    associate,
    cfar_2d,
    cfar_alpha,
)
from .receiver import (  # noqa: F401
    ChannelEstimate,
    EmptyPilotSetError,
    PipelineOutput,
    ReceiverConfig,
    delay_doppler_image,
    lmmse_demod,
    ls_gains,
    reconstruct_channel,
    refine_channel,
    run_pipeline,
    stage1_pilot_estimate,
)
from .metrics import (  # noqa: F401
    RateResult,
    achievable_rate,
    empirical_pd,
    mutual_information,
    mutual_information_gauss_hermite,
    range_profile,
)
from .harness import (  # noqa: F401
    ExperimentSpec,
    load_spec,
    oracle_check,
    run_experiment,
    spec_from_dict,
    spec_to_dict,
    validate_spec,
)
