"""Low-tubal-rank tensor recovery with reweighted nonconvex spectral penalties.

The package covers t-SVD algebra (:mod:`tnnr.tensor`, :mod:`tnnr.tsvd`),
scalar penalties and their proximal maps (:mod:`tnnr.penalty`), weighted
tensor singular value thresholding (:mod:`tnnr.wtsvt`), an inertial
proximal gradient solver (:mod:`tnnr.solver`) and a completion benchmark
harness (:mod:`tnnr.completion`, :mod:`tnnr.cli`).
"""

from .completion import LossModel, ObservationMask, structured_mask, synth_instance
from .estimator import TNNRCompleter
from .exceptions import (ConfigError, DivergenceError, DomainError, NumericalError,
                         ShapeError, SpectralConsistencyError, TNNRError)
from .metrics import psnr, relative_error, ssim
from .penalty import identity, power, smoothed_power
from .solver import SolverConfig, monitor_check, solve
from .tensor import t_product
from .tsvd import t_svd, tubal_nuclear_norm
from .wtsvt import WeightScheme, adaptive_weights, preset_scheme, weighted_norm, weighted_tsvt

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DivergenceError", "DomainError", "LossModel", "NumericalError",
    "ObservationMask", "ShapeError", "SolverConfig", "SpectralConsistencyError",
    "TNNRCompleter", "TNNRError", "WeightScheme", "adaptive_weights", "identity",
    "monitor_check", "power", "psnr", "relative_error", "smoothed_power", "solve",
    "ssim", "structured_mask", "synth_instance", "t_product", "t_svd", "preset_scheme",
    "tubal_nuclear_norm", "weighted_norm", "weighted_tsvt",
]
