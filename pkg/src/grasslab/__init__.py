"""Digital twin of a pin-actuated two-color grass display.

Simulates the full chain from 8-bit levels to perceived color: per-pixel
correspondence tables, PD-controlled drivetrains with encoder quantization,
a linear camera model with gray-card normalization, and the CIEDE2000-based
calibration and evaluation pipeline.
"""

from .analysis import (
    SWEEP_LEVELS,
    MeasurementDataset,
    RegressionResult,
    TrialSeries,
    center_and_regress,
    characteristic_linearity,
    linear_fit,
    run_sweep,
)
from .appearance import (
    DEFAULT_OPTICS,
    ENVIRONMENT_PRESETS,
    CameraConfig,
    CropRect,
    Environment,
    GrassOptics,
    GrayCardBoard,
    auto_expose,
    measure_grass_color,
    mixing_fraction,
    render_pixel_surface,
)
from .calibration import (
    CalibrationSet,
    CorrespondenceTable,
    OgcdCharacteristic,
    apply_table,
    build_table,
    calibrate_multi,
    load_calibration,
    sample_characteristic,
    save_calibration,
)
from .color import (
    D50,
    Lab,
    LinearRgb,
    WhitePoint,
    Xyz,
    ciede2000,
    ciede2000_many,
    rgb_to_xyz,
    xyz_to_lab,
)
from .config import SceneConfig, load_config, save_config
from .display import (
    Animation,
    Display,
    Frame,
    GrassModule,
    assemble,
    load_animation,
    make_module,
    play,
    present,
    save_animation,
)
from .motor import (
    DrivetrainParams,
    MotorState,
    PdGains,
    Setpoint,
    count_to_mm,
    home,
    mm_to_count,
    pd_step,
    ramp_tracking_test,
)
from .pixel import PixelSim, SettleParams, make_pixel

__version__ = "0.1.0"
