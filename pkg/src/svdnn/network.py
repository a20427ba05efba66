"""One-hidden-layer perceptron: symmetric sigmoid, batched forward pass,
mean-square loss, exact backpropagation gradient, and the flat parameter
vector used by the optimizers.

The symmetric sigmoid 2 / (1 + exp(-2x)) - 1 is evaluated as tanh(x), which
is the same function written differently and saturates to +-1 without
overflow.  Its slope at the origin is exactly 1, which is what makes the
linear-map initialization carry over to the nonlinear network.
"""

import json

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix

SYMMETRIC_SIGMOID = "symmetric_sigmoid"
LINEAR = "linear"
ACTIVATIONS = (SYMMETRIC_SIGMOID, LINEAR)


def _as_vector(v, length, label):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != length:
        raise InvalidInputError(f"{label} must be a vector of length {length}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{label} contains NaN or Inf entries")
    return v


class MlpParams:
    """Parameters of an n -> p -> m perceptron with biases in both layers."""

    __slots__ = ("w_hidden", "b_hidden", "w_out", "b_out", "activation")

    def __init__(self, w_hidden, b_hidden, w_out, b_out, activation=SYMMETRIC_SIGMOID):
        self.w_hidden = as_matrix(w_hidden)
        self.w_out = as_matrix(w_out)
        p, n = self.w_hidden.shape
        m = self.w_out.shape[0]
        if self.w_out.shape[1] != p:
            raise InvalidInputError(
                f"w_out has {self.w_out.shape[1]} columns but the hidden width is {p}"
            )
        self.b_hidden = _as_vector(b_hidden, p, "b_hidden")
        self.b_out = _as_vector(b_out, m, "b_out")
        if activation not in ACTIVATIONS:
            raise InvalidInputError(f"unknown activation {activation!r}")
        self.activation = activation

    @property
    def n_in(self):
        return self.w_hidden.shape[1]

    @property
    def p_hidden(self):
        return self.w_hidden.shape[0]

    @property
    def m_out(self):
        return self.w_out.shape[0]

    @property
    def size(self):
        """Total number of scalar parameters: (n+1)p + (p+1)m."""
        return param_count(self.n_in, self.p_hidden, self.m_out)


def param_count(n, p, m):
    """Scalar parameter count of an n -> p -> m network with biases."""
    return (n + 1) * p + (p + 1) * m


def activation_eval(kind, x):
    """Evaluate the activation elementwise (scalars pass through)."""
    if kind == SYMMETRIC_SIGMOID:
        return np.tanh(x)
    if kind == LINEAR:
        return np.asarray(x, dtype=np.float64) + 0.0
    raise InvalidInputError(f"unknown activation {kind!r}")


def activation_derivative(kind, x):
    """Derivative of the activation at *x*; for the sigmoid, 1 - f(x)^2."""
    if kind == SYMMETRIC_SIGMOID:
        f = np.tanh(x)
        return 1.0 - f * f
    if kind == LINEAR:
        return np.ones_like(np.asarray(x, dtype=np.float64))
    raise InvalidInputError(f"unknown activation {kind!r}")


def _hidden(params, x):
    x = as_matrix(x)
    if x.shape[0] != params.n_in:
        raise InvalidInputError(
            f"input rows {x.shape[0]} do not match network input size {params.n_in}"
        )
    z = params.w_hidden @ x + params.b_hidden[:, None]
    return activation_eval(params.activation, z)


def forward(params, x):
    """Batched forward pass over example columns: returns an m-by-N matrix."""
    h = _hidden(params, x)
    return params.w_out @ h + params.b_out[:, None]


def mse_loss(params, x, y):
    """Mean of squared output errors, averaged over every entry of y."""
    y = as_matrix(y)
    pred = forward(params, x)
    if pred.shape != y.shape:
        raise InvalidInputError(f"prediction shape {pred.shape} != target shape {y.shape}")
    diff = pred - y
    return float(np.mean(diff * diff))


def loss_gradient(params, x, y):
    """Exact gradient of mse_loss with respect to every parameter, flattened.

    Layout matches flatten(): w_hidden row-major, b_hidden, w_out row-major,
    b_out.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    h = _hidden(params, x)
    pred = params.w_out @ h + params.b_out[:, None]
    if pred.shape != y.shape:
        raise InvalidInputError(f"prediction shape {pred.shape} != target shape {y.shape}")
    m, n_examples = y.shape

    g_out = (2.0 / (m * n_examples)) * (pred - y)
    d_w_out = g_out @ h.T
    d_b_out = g_out.sum(axis=1)
    g_hidden = params.w_out.T @ g_out
    if params.activation == SYMMETRIC_SIGMOID:
        g_hidden = g_hidden * (1.0 - h * h)
    d_w_hidden = g_hidden @ x.T
    d_b_hidden = g_hidden.sum(axis=1)
    return np.concatenate([d_w_hidden.ravel(), d_b_hidden, d_w_out.ravel(), d_b_out])


def flatten(params):
    """Pack parameters into one vector: w_hidden, b_hidden, w_out, b_out."""
    return np.concatenate(
        [params.w_hidden.ravel(), params.b_hidden, params.w_out.ravel(), params.b_out]
    )


def unflatten(values, n, p, m, activation=SYMMETRIC_SIGMOID):
    """Rebuild MlpParams from a flat vector with layout (n, p, m)."""
    values = np.asarray(values, dtype=np.float64)
    expected = param_count(n, p, m)
    if values.ndim != 1 or values.shape[0] != expected:
        raise InvalidInputError(
            f"flat vector has length {values.shape}, expected ({expected},) for "
            f"layout (n={n}, p={p}, m={m})"
        )
    w_hidden, rest = values[: p * n].reshape(p, n), values[p * n :]
    b_hidden, rest = rest[:p], rest[p:]
    w_out, b_out = rest[: m * p].reshape(m, p), rest[m * p :]
    return MlpParams(w_hidden, b_hidden, w_out, b_out, activation)


def _fmt(x):
    return format(float(x), ".17g")


def _json_vector(v):
    return "[" + ", ".join(_fmt(x) for x in v) + "]"


def _json_matrix(a):
    rows = ",\n    ".join("[" + ", ".join(_fmt(x) for x in row) + "]" for row in a)
    return "[\n    " + rows + "\n  ]"


def save_params_json(path, params):
    """Write parameters as a JSON document with 17-significant-digit decimals.

    The explicit decimal formatting makes the file byte-stable and the
    values round-trip exact for 64-bit floats.
    """
    doc = (
        "{\n"
        f'  "n_in": {params.n_in},\n'
        f'  "p_hidden": {params.p_hidden},\n'
        f'  "m_out": {params.m_out},\n'
        f'  "activation": {json.dumps(params.activation)},\n'
        f'  "w_hidden": {_json_matrix(params.w_hidden)},\n'
        f'  "b_hidden": {_json_vector(params.b_hidden)},\n'
        f'  "w_out": {_json_matrix(params.w_out)},\n'
        f'  "b_out": {_json_vector(params.b_out)}\n'
        "}\n"
    )
    with open(path, "w") as fh:
        fh.write(doc)


def load_params_json(path):
    """Read parameters written by save_params_json."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        params = MlpParams(
            doc["w_hidden"], doc["b_hidden"], doc["w_out"], doc["b_out"], doc["activation"]
        )
    except KeyError as exc:
        raise InvalidInputError(f"{path}: missing field {exc}") from exc
    declared = (doc["n_in"], doc["p_hidden"], doc["m_out"])
    actual = (params.n_in, params.p_hidden, params.m_out)
    if tuple(declared) != actual:
        raise InvalidInputError(
            f"{path}: declared shape {declared} does not match arrays {actual}"
        )
    return params
