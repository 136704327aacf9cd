"""2D Navier-Stokes pseudo-spectral solver with continuous data assimilation.

Spectral fields are complex128 arrays of shape (N, N) in FFT order
(row ky, column kx) holding the coefficients of the stream function.
"""

from ._core import (
    AdaptiveController,
    BlowUpError,
    CdasimError,
    Config,
    ConfigError,
    FormatError,
    __version__,
    energy_report,
    error_metrics,
    forcing,
    forward,
    hermitian_defect,
    inverse,
    load_snapshot,
    nonlinear_term,
    observe,
    project_low,
    run_twin,
    save_snapshot,
    spinup,
    step,
    sweep_mu_infinite,
    sweep_mu_zero,
    velocity_h1_norm,
    velocity_l2_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
