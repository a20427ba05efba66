"""Network initializations: the SVD scheme (regress, truncate, split the
factors across the two layers) and a fan-scaled uniform random baseline."""

import warnings

import numpy as np

from .errors import DegenerateFitWarning, InvalidInputError
from .linalg import as_matrix, svd_decompose, truncate
from .network import SYMMETRIC_SIGMOID, MlpParams
from .regress import fit_least_squares


def svd_initialize(x, y, hidden_width, prescale=1.0, activation=SYMMETRIC_SIGMOID):
    """Build network parameters from the rank-truncated regression of y on x.

    The affine fit y ~ B x + a is decomposed; the top *hidden_width* right
    singular vectors become the hidden weights (rows orthonormal up to the
    prescale factor), the matching left vectors scaled by their singular
    values become the output weights, and the fit bias lands in the output
    layer.  Hidden biases start at zero.  With prescale < 1 the hidden
    pre-activations shrink into the near-linear band of the sigmoid while
    the output layer compensates exactly; the composed linear map does not
    depend on prescale.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    m, n = y.shape[0], x.shape[0]
    hidden_width = int(hidden_width)
    if hidden_width < 1 or hidden_width > min(m, n):
        raise InvalidInputError(
            f"hidden width {hidden_width} outside [1, min(m, n) = {min(m, n)}]"
        )
    if not prescale > 0.0:
        raise InvalidInputError("prescale must be positive")

    fit = fit_least_squares(x, y, with_bias=True)
    if not np.any(fit.weights):
        warnings.warn(
            "regression produced an all-zero weight matrix; "
            "initializing all weights to zero",
            DegenerateFitWarning,
            stacklevel=2,
        )
        return MlpParams(
            np.zeros((hidden_width, n)),
            np.zeros(hidden_width),
            np.zeros((m, hidden_width)),
            fit.bias,
            activation,
        )

    top = truncate(svd_decompose(fit.weights), hidden_width)
    w_hidden = prescale * top.v.T
    w_out = (top.u * top.s) / prescale
    return MlpParams(w_hidden, np.zeros(hidden_width), w_out, fit.bias, activation)


def random_initialize(n, p, m, seed, activation=SYMMETRIC_SIGMOID):
    """Fan-scaled uniform weights, zero biases, reproducible per seed.

    Each layer draws from [-L, L] with L = sqrt(6 / (fan_in + fan_out)),
    the common framework default for dense layers.
    """
    n, p, m = int(n), int(p), int(m)
    if min(n, p, m) < 1:
        raise InvalidInputError("all dimensions must be positive")
    rng = np.random.default_rng(seed)
    limit_hidden = np.sqrt(6.0 / (n + p))
    w_hidden = rng.uniform(-limit_hidden, limit_hidden, size=(p, n))
    limit_out = np.sqrt(6.0 / (p + m))
    w_out = rng.uniform(-limit_out, limit_out, size=(m, p))
    return MlpParams(w_hidden, np.zeros(p), w_out, np.zeros(m), activation)
