"""t-product tensor algebra and t-Q-DEIM sparse interpolation.

Tensors are numpy arrays of shape (m, l, q): rows, lateral slices, frontal slices.
"""

from ._tqdeim import (
    ConfigError,
    DimensionError,
    Error,
    FormatError,
    IoError,
    NumericalError,
    QDeimModel,
    TQDeimModel,
    apriori_estimate,
    fit_qdeim,
    fit_tqdeim,
    frobenius_norm,
    gen_burgers,
    gen_fhn,
    load_model,
    read_t3b,
    set_num_threads,
    t_identity,
    t_inverse,
    t_product,
    t_spectral_norm,
    t_svd,
    t_transpose,
    vectorize,
    write_t3b,
)

__all__ = [name for name in dir() if not name.startswith("_")]
