"""Python bindings for the wavelet-target masked image modeling core.

Images are float64 numpy arrays shaped (channels, rows, cols); a 2D array is
treated as one channel. Masks are square uint8 arrays with 1 = masked.
"""

from ._core import (
    ConfigError,
    DegenerateError,
    DimensionError,
    Error,
    FormatError,
    GradientError,
    InputError,
    IoError,
    Model,
    StructureError,
    build_targets,
    cli_dwt,
    cli_pretrain,
    cli_synth,
    cli_targets,
    config_ini,
    derive_seed,
    dwt,
    dwt_level,
    gen_block_mask,
    idwt,
    mask_target_count,
    masked_distance,
    rescale_mask,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
