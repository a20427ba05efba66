"""Linear least squares through the SVD pseudo-inverse.

One code path serves both regimes: with more examples than input dimensions
the fit is the least-squares optimum, with fewer it is the minimum-norm
exact interpolant.  Examples are stored as matrix columns throughout.
"""

import numpy as np

from .errors import InvalidInputError
from .linalg import (
    as_matrix,
    numerical_rank,
    pseudo_inverse,
    pseudo_inverse_factors,
    svd_decompose,
)


class AffineMap:
    """Affine regression result ``y ~ weights @ x + bias``.

    ``rank_used`` records the numerical rank of the design matrix so callers
    can detect effective under-determination.
    """

    __slots__ = ("weights", "bias", "rank_used")

    def __init__(self, weights, bias, rank_used):
        self.weights = as_matrix(weights)
        bias = np.asarray(bias, dtype=np.float64)
        if bias.ndim != 1 or bias.shape[0] != self.weights.shape[0]:
            raise InvalidInputError("bias length must match the weight row count")
        if not np.all(np.isfinite(bias)):
            raise InvalidInputError("bias contains NaN or Inf entries")
        self.bias = bias
        self.rank_used = int(rank_used)

    @property
    def shape(self):
        """(output dimension, input dimension)."""
        return self.weights.shape


def fit_least_squares(x, y, with_bias=False, rank_tol=None):
    """Fit ``y ~ B x (+ a)`` over example columns via the SVD pseudo-inverse.

    The bias is obtained by augmenting the inputs with a constant unit row;
    the extra column of the extended solution becomes the bias vector.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    n, n_examples = x.shape
    if y.shape[1] != n_examples:
        raise InvalidInputError(
            f"x has {n_examples} example columns but y has {y.shape[1]}"
        )
    design = np.vstack([x, np.ones((1, n_examples))]) if with_bias else x
    factors = svd_decompose(design)
    b_full = y @ pseudo_inverse_factors(factors, rank_tol)
    rank_used = numerical_rank(factors, rank_tol)
    if with_bias:
        return AffineMap(b_full[:, :n], b_full[:, n], rank_used)
    return AffineMap(b_full, np.zeros(y.shape[0]), rank_used)


def predict(affine, x):
    """Apply the fitted map column-wise: ``weights @ x + bias``."""
    x = as_matrix(x)
    if x.shape[0] != affine.weights.shape[1]:
        raise InvalidInputError(
            f"input rows {x.shape[0]} do not match fitted input dimension "
            f"{affine.weights.shape[1]}"
        )
    return affine.weights @ x + affine.bias[:, None]


def project_onto_span(x_train, x_new, rank_tol=None):
    """Project *x_new* onto the span of the training columns: ``X X^+ x``."""
    x_train = as_matrix(x_train)
    x_new = np.asarray(x_new, dtype=np.float64)
    if x_new.ndim != 1 or x_new.shape[0] != x_train.shape[0]:
        raise InvalidInputError(
            f"vector length {x_new.shape} does not match training dimension "
            f"{x_train.shape[0]}"
        )
    if not np.all(np.isfinite(x_new)):
        raise InvalidInputError("vector contains NaN or Inf entries")
    return x_train @ (pseudo_inverse(x_train, rank_tol) @ x_new)
