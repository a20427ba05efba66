"""Deterministic full-batch optimizers over a flat parameter vector.

Four algorithms: plain gradient descent ("sgd"), RMSprop, Adadelta, and
nonlinear conjugate gradient with Polak-Ribiere+ directions and a strong
Wolfe line search.  Every invocation of the gradient callback is counted,
line-search trials included, so methods can be compared by gradient calls.
"""

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

SGD = "sgd"
RMSPROP = "rmsprop"
ADADELTA = "adadelta"
CG = "cg"
ALGORITHMS = (SGD, RMSPROP, ADADELTA, CG)

TERMINATED_BUDGET = "budget"
TERMINATED_GRAD_TOL = "grad_tol"
TERMINATED_LINE_SEARCH = "line_search_failure"

_DEFAULTS = {
    SGD: {"learning_rate": 0.01},
    RMSPROP: {"learning_rate": 0.001, "rho": 0.9},
    ADADELTA: {"learning_rate": 1.0, "rho": 0.95},
    CG: {"learning_rate": 1.0},  # unused by cg; kept positive for validation
}

_LINE_SEARCH_TRIALS = 20


class OptimizerSpec:
    """Algorithm choice plus hyper-parameters, validated on construction."""

    __slots__ = (
        "algorithm",
        "learning_rate",
        "rho",
        "epsilon",
        "max_iterations",
        "grad_tol",
        "wolfe_c1",
        "wolfe_c2",
    )

    def __init__(
        self,
        algorithm,
        learning_rate,
        rho=0.0,
        epsilon=1e-7,
        max_iterations=2000,
        grad_tol=1e-5,
        wolfe_c1=1e-4,
        wolfe_c2=0.1,
    ):
        if algorithm not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {algorithm!r}")
        if not learning_rate > 0.0:
            raise InvalidInputError("learning_rate must be positive")
        if not 0.0 <= rho < 1.0:
            raise InvalidInputError("rho must lie in [0, 1)")
        if not epsilon > 0.0:
            raise InvalidInputError("epsilon must be positive")
        if int(max_iterations) < 1:
            raise InvalidInputError("max_iterations must be at least 1")
        if not 0.0 < wolfe_c1 < wolfe_c2 < 1.0:
            raise InvalidInputError("wolfe constants must satisfy 0 < c1 < c2 < 1")
        self.algorithm = algorithm
        self.learning_rate = float(learning_rate)
        self.rho = float(rho)
        self.epsilon = float(epsilon)
        self.max_iterations = int(max_iterations)
        self.grad_tol = float(grad_tol)
        self.wolfe_c1 = float(wolfe_c1)
        self.wolfe_c2 = float(wolfe_c2)

    @classmethod
    def defaults(cls, algorithm, **overrides):
        """Spec with the framework-default hyper-parameters per algorithm."""
        if algorithm not in _DEFAULTS:
            raise InvalidInputError(f"unknown algorithm {algorithm!r}")
        kwargs = dict(_DEFAULTS[algorithm])
        kwargs.update(overrides)
        return cls(algorithm, **kwargs)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__slots__}


class RunTrace:
    """Outcome of one optimizer run."""

    __slots__ = (
        "final_params",
        "final_loss",
        "iterations_used",
        "gradient_calls",
        "loss_history",
        "terminated_by",
    )

    def __init__(
        self, final_params, final_loss, iterations_used, gradient_calls, loss_history, terminated_by
    ):
        self.final_params = final_params
        self.final_loss = final_loss
        self.iterations_used = iterations_used
        self.gradient_calls = gradient_calls
        self.loss_history = np.asarray(loss_history, dtype=np.float64)
        self.terminated_by = terminated_by


class _Objective:
    """Counts gradient calls and turns NaN/Inf into explicit failures."""

    def __init__(self, loss_fn, grad_fn):
        self._loss_fn = loss_fn
        self._grad_fn = grad_fn
        self.gradient_calls = 0
        self.iteration = 0

    def loss(self, w):
        value = float(self._loss_fn(w))
        if not np.isfinite(value):
            raise NumericalFailureError(
                f"loss became non-finite at iteration {self.iteration}",
                iteration=self.iteration,
            )
        return value

    def grad(self, w):
        self.gradient_calls += 1
        g = np.asarray(self._grad_fn(w), dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise NumericalFailureError(
                f"gradient became non-finite at iteration {self.iteration}",
                iteration=self.iteration,
            )
        return g


def sgd_step(w, g, lr):
    """Plain full-batch descent step."""
    return w - lr * g


def rmsprop_step(state, w, g, lr, rho, eps):
    """RMSprop update; *state* is the running mean of squared gradients."""
    v = rho * state + (1.0 - rho) * g * g
    return v, w - lr * g / np.sqrt(v + eps)


def adadelta_step(state, w, g, lr, rho, eps):
    """Adadelta update; *state* is (grad accumulator, update accumulator)."""
    v, u = state
    v = rho * v + (1.0 - rho) * g * g
    delta = -(np.sqrt(u + eps) / np.sqrt(v + eps)) * g
    u = rho * u + (1.0 - rho) * delta * delta
    return (v, u), w + lr * delta


def optimize(spec, loss_fn, grad_fn, x0):
    """Run the algorithm selected by *spec* from x0 and return a RunTrace."""
    if not isinstance(spec, OptimizerSpec):
        raise InvalidInputError("spec must be an OptimizerSpec")
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1:
        raise InvalidInputError("x0 must be a 1-D parameter vector")
    if not np.all(np.isfinite(x0)):
        raise InvalidInputError("x0 contains NaN or Inf entries")
    if spec.algorithm == CG:
        return cg_run(loss_fn, grad_fn, x0, spec)
    return _first_order_run(spec, loss_fn, grad_fn, x0)


def _first_order_run(spec, loss_fn, grad_fn, x0):
    objective = _Objective(loss_fn, grad_fn)
    w = x0.copy()
    history = [objective.loss(w)]
    if spec.algorithm == RMSPROP:
        state = np.zeros_like(w)
    elif spec.algorithm == ADADELTA:
        state = (np.zeros_like(w), np.zeros_like(w))
    else:
        state = None

    for k in range(spec.max_iterations):
        objective.iteration = k
        g = objective.grad(w)
        if spec.algorithm == SGD:
            w = sgd_step(w, g, spec.learning_rate)
        elif spec.algorithm == RMSPROP:
            state, w = rmsprop_step(state, w, g, spec.learning_rate, spec.rho, spec.epsilon)
        else:
            state, w = adadelta_step(state, w, g, spec.learning_rate, spec.rho, spec.epsilon)
        history.append(objective.loss(w))

    return RunTrace(
        w,
        history[-1],
        spec.max_iterations,
        objective.gradient_calls,
        history,
        TERMINATED_BUDGET,
    )


def _wolfe_line_search(evaluate, f0, dphi0, alpha_first, c1, c2):
    """Strong Wolfe search along a descent direction.

    *evaluate* maps a step length to (loss, gradient, directional derivative).
    Returns (alpha, loss, gradient) or None after the trial budget runs out.
    Interpolation is a secant step on the directional derivative, which hits
    the exact minimizer of a quadratic, with a bisection safeguard.
    """
    trials = 0
    alpha_prev, f_prev, dphi_prev = 0.0, f0, dphi0
    alpha = alpha_first
    bracket = None
    while trials < _LINE_SEARCH_TRIALS:
        f_a, g_a, dphi_a = evaluate(alpha)
        trials += 1
        if f_a > f0 + c1 * alpha * dphi0 or (trials > 1 and f_a >= f_prev):
            bracket = ((alpha_prev, f_prev, dphi_prev), (alpha, f_a, dphi_a))
            break
        if abs(dphi_a) <= -c2 * dphi0:
            return alpha, f_a, g_a
        if dphi_a >= 0.0:
            bracket = ((alpha, f_a, dphi_a), (alpha_prev, f_prev, dphi_prev))
            break
        alpha_prev, f_prev, dphi_prev = alpha, f_a, dphi_a
        alpha *= 2.0

    if bracket is None:
        return None
    (a_lo, f_lo, d_lo), (a_hi, f_hi, d_hi) = bracket

    while trials < _LINE_SEARCH_TRIALS:
        span = a_hi - a_lo
        denom = d_hi - d_lo
        alpha = a_lo - d_lo * span / denom if denom != 0.0 else a_lo + 0.5 * span
        low, high = (a_lo, a_hi) if a_lo < a_hi else (a_hi, a_lo)
        margin = 0.05 * (high - low)
        alpha = min(max(alpha, low + margin), high - margin)
        f_a, g_a, dphi_a = evaluate(alpha)
        trials += 1
        if f_a > f0 + c1 * alpha * dphi0 or f_a >= f_lo:
            a_hi, f_hi, d_hi = alpha, f_a, dphi_a
        else:
            if abs(dphi_a) <= -c2 * dphi0:
                return alpha, f_a, g_a
            if dphi_a * (a_hi - a_lo) >= 0.0:
                a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
            a_lo, f_lo, d_lo = alpha, f_a, dphi_a
    return None


def cg_run(loss_fn, grad_fn, x0, spec):
    """Nonlinear conjugate gradient with Polak-Ribiere+ direction updates.

    The direction restarts to steepest descent whenever it stops being a
    descent direction and on a schedule of every len(x0) iterations.  A run
    whose line search exhausts its trial budget ends with the best point
    reached so far rather than an exception.
    """
    if spec.algorithm != CG:
        raise InvalidInputError("cg_run requires an OptimizerSpec with algorithm 'cg'")
    objective = _Objective(loss_fn, grad_fn)
    x = np.asarray(x0, dtype=np.float64).copy()
    dim = x.shape[0]
    f = objective.loss(x)
    g = objective.grad(x)
    history = [f]

    if np.max(np.abs(g)) < spec.grad_tol:
        return RunTrace(x, f, 0, objective.gradient_calls, history, TERMINATED_GRAD_TOL)

    d = -g
    since_restart = 0
    alpha_prev = None
    dphi0_prev = None
    iterations = 0
    terminated_by = TERMINATED_BUDGET

    for k in range(spec.max_iterations):
        objective.iteration = k
        if since_restart >= dim:
            d = -g
            since_restart = 0
        dphi0 = float(g @ d)
        if dphi0 >= 0.0:
            d = -g
            since_restart = 0
            dphi0 = float(g @ d)

        if alpha_prev is None or not dphi0 < 0.0:
            alpha_first = 1.0
        else:
            alpha_first = alpha_prev * dphi0_prev / dphi0
            if not np.isfinite(alpha_first) or alpha_first <= 0.0:
                alpha_first = 1.0
            alpha_first = min(max(alpha_first, 1e-12), 1e12)

        def evaluate(alpha, _d=d, _x=x):
            w = _x + alpha * _d
            f_w = objective.loss(w)
            g_w = objective.grad(w)
            return f_w, g_w, float(g_w @ _d)

        found = _wolfe_line_search(evaluate, f, dphi0, alpha_first, spec.wolfe_c1, spec.wolfe_c2)
        if found is None:
            terminated_by = TERMINATED_LINE_SEARCH
            break

        alpha, f_new, g_new = found
        x = x + alpha * d
        history.append(f_new)
        iterations = k + 1
        since_restart += 1
        alpha_prev, dphi0_prev = alpha, dphi0

        if np.max(np.abs(g_new)) < spec.grad_tol:
            f, g = f_new, g_new
            terminated_by = TERMINATED_GRAD_TOL
            break

        beta = float(g_new @ (g_new - g)) / float(g @ g)
        beta = max(0.0, beta)
        if beta == 0.0:
            since_restart = 0
        d = -g_new + beta * d
        f, g = f_new, g_new

    return RunTrace(x, f, iterations, objective.gradient_calls, history, terminated_by)
