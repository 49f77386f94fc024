"""Circuit models, calibration and link-budget tools for sub-THz chip-to-package transitions."""
from ._backend import BACKEND
from .calibration import (
    CalibrationError,
    ErrorBoxes,
    RippleReport,
    TrlStandards,
    apply_cal,
    deembed_line,
    ripple_amplitude,
    ripple_spacing_diagnostic,
    trl_calibrate,
)
from .linkbudget import (
    CapacityPoint,
    ConfigError,
    LinkBudgetConfig,
    capacity,
    capacity_sweep,
    reference_config,
    sensitivity,
    snr,
)
from .netcore import (
    FrequencyGrid,
    GainProfile,
    NetworkError,
    OnePortNetwork,
    SingularPointError,
    TwoPortNetwork,
    abcd_to_s,
    cascade,
    gmax,
    make_network,
    renormalize,
    s_to_abcd,
    s_to_t,
    s_to_z,
    series_connect,
    stability_k,
    t_to_s,
    thru,
    z_to_s,
)
from .tline import (
    HurayParams,
    PropagationConstant,
    UnwrapError,
    apply_roughness,
    average_gamma,
    extract_gamma,
    huray_factor,
    ideal_line,
    lossy_line,
    skin_depth,
)
from .touchstone import (
    TouchstoneError,
    TouchstoneOptions,
    parse_touchstone,
    read_touchstone,
    save_touchstone,
    write_touchstone,
)
from .transitions import (
    GsgGeometry,
    GsgParams,
    SeriesLineMatch,
    SiwGeometry,
    StriplineTransitionParams,
    apply_series_match,
    design_series_match,
    gsg_model,
    gsg_notch_freq,
    loop_radiation_freq,
    pitch_notch_estimate,
    siw_effective_width,
    siw_te10_cutoff,
    stripline_transition_model,
)

__version__ = "0.1.0"
