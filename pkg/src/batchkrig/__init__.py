"""Simple Kriging with corrected batch-sequential updates."""
from .kernels import Kernel, cross, evaluate, gram
from .kriging import (
    ConditionalBlock,
    DegenerateNewPoint,
    KrigingState,
    Prediction,
    UpdateBatch,
    assimilate,
    conditional_block,
    fit,
    predict,
    predict_cov,
    predict_mean,
    predict_variance,
    single_point_update,
    update_cov_corrected,
    update_cov_emery,
    update_mean,
    update_predict,
    update_variance_corrected,
    update_variance_emery,
    weights_new,
)
from .linalg import CholeskyFactor, NotPositiveDefinite, block_extend, cholesky, solve

__version__ = "0.1.0"
