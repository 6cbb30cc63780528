"""SDMM solver for compressive deconvolution.

Minimizes::

    ||Psi^-1 H x||_1 + alpha ||x||_p^p + 1/(2 mu) ||y - Phi H x||_2^2

by splitting ``v1 = x``, ``v2 = Psi^-1 H x``, ``v3 = H x`` with scaled
multipliers ``b1..b3`` and a common penalty ``beta``. One iteration runs
the x-update (Fourier-domain normal equations), the three v-updates
(lp prox, soft threshold, data-fidelity resolvent) and the multiplier step.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.fft

from . import prox as _prox
from .errors import DimensionError, DivergedError, NumericalError, ParameterError, StrategyError
from .linops import ConvolutionOperator, MeasurementOperator, SparsifyingTransform
from .metrics import nmse as _nmse

log = logging.getLogger(__name__)

V3_STRATEGIES = ("auto", "orthogonal", "newton")


@dataclass
class Problem:
    H: ConvolutionOperator
    Psi: SparsifyingTransform
    Phi: MeasurementOperator
    y: np.ndarray
    alpha: float
    mu: float
    p: float = 1.0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        n = self.H.rows * self.H.cols
        if (self.Psi.rows, self.Psi.cols) != (self.H.rows, self.H.cols):
            raise DimensionError("Psi and H grids differ")
        if self.Phi.n != n:
            raise DimensionError(f"Phi acts on R^{self.Phi.n}, image has {n} pixels")
        if self.y.size != self.Phi.m:
            raise DimensionError(f"y has length {self.y.size}, Phi has {self.Phi.m} rows")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not self.mu > 0:
            raise ParameterError(f"mu must be > 0, got {self.mu}")
        _prox.check_params(0.0, self.p)

    @property
    def shape(self):
        return (self.H.rows, self.H.cols)

    @cached_property
    def phi_t_y(self):
        return self.Phi.adjoint(self.y)


@dataclass
class SolverConfig:
    beta: float = 1.0
    tol: float = 5e-4
    max_iters: int = 1000
    v3_strategy: str = "auto"
    newton_inner_tol: float = 1e-8
    newton_max_inner: int = 50
    # objective costs one extra Phi product per iteration; NaN in the trace when off
    track_objective: bool = True

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.v3_strategy not in V3_STRATEGIES:
            raise ParameterError(f"v3_strategy must be one of {V3_STRATEGIES}")
        if not self.newton_inner_tol > 0 or self.newton_max_inner < 0:
            raise ParameterError("invalid Newton inner-loop settings")


class TraceEntry(NamedTuple):
    iter: int
    objective: float
    rel_change: float
    nmse: float
    seconds: float


@dataclass
class SolverState:
    x: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    iter: int = 0
    trace: list = field(default_factory=list)
    # Phi^T Phi v3, carried between Newton v3-updates when available
    v3_gram: np.ndarray = field(default=None, repr=False)

    def snapshot(self):
        """Shallow copy; iterates are never modified in place."""
        return replace(self, trace=list(self.trace))


@dataclass
class SolveResult:
    x: np.ndarray
    trace: list
    converged: bool
    iterations: int
    state: SolverState

    def __iter__(self):
        # allows ``x, trace = solve(...)``
        return iter((self.x, self.trace))


def back_projection(problem):
    """``H^T Phi^T y`` reshaped to the image grid."""
    return problem.H.adjoint(problem.phi_t_y.reshape(problem.shape))


def initial_state(problem, x0=None):
    """Start at ``x0`` (default: back-projection) with ``v_i = C_i x0``, ``b_i = 0``."""
    x = back_projection(problem) if x0 is None else np.asarray(x0, dtype=np.float64)
    if x.shape != problem.shape:
        x = x.reshape(problem.shape)
    hx = problem.H.apply(x)
    v1 = x.ravel().copy()
    v2 = problem.Psi.analyze(hx)
    v3 = hx.ravel().copy()
    zeros = np.zeros_like(v1)
    return SolverState(x, v1, v2, v3, zeros, zeros.copy(), zeros.copy())


def _x_step(state, problem):
    H, Psi = problem.H, problem.Psi
    shape = problem.shape
    r1 = (state.v1 - state.b1).reshape(shape)
    r23 = Psi.synthesize(state.v2 - state.b2) + (state.v3 - state.b3).reshape(shape)
    lam = H.eigenvalues[:, : H.cols // 2 + 1]
    rhs = scipy.fft.rfft2(r1) + np.conj(lam) * scipy.fft.rfft2(r23)
    X = rhs / (1.0 + 2.0 * (lam.real ** 2 + lam.imag ** 2))
    x = scipy.fft.irfft2(X, s=shape)
    hx = scipy.fft.irfft2(lam * X, s=shape)
    return x, hx


def x_update_rhs(state, problem):
    """Right-hand side ``(v1-b1) + H^T Psi (v2-b2) + H^T (v3-b3)``."""
    shape = problem.shape
    return ((state.v1 - state.b1).reshape(shape)
            + problem.H.adjoint(problem.Psi.synthesize(state.v2 - state.b2))
            + problem.H.adjoint((state.v3 - state.b3).reshape(shape)))


def update_x(state, problem, config=None):
    """Exact minimizer of the stacked least-squares x-subproblem.

    Solves ``(I + 2 H^T H) x = rhs`` by pointwise division in the Fourier
    domain; valid because ``Psi`` is orthonormal.
    """
    return _x_step(state, problem)[0]


def update_v1(state, problem, config):
    return _prox.prox_lp(state.b1 + state.x.ravel(), problem.alpha * config.beta, problem.p)


def update_v2(state, problem, config, hx=None):
    if hx is None:
        hx = problem.H.apply(state.x)
    return _prox.prox_l1(state.b2 + problem.Psi.analyze(hx), config.beta)


def _v3_target(state, problem, hx):
    if hx is None:
        hx = problem.H.apply(state.x)
    return state.b3 + np.asarray(hx).ravel()


def update_v3_orthogonal(state, problem, config, hx=None):
    """Closed-form v3 via Sherman-Morrison-Woodbury (requires ``Phi Phi^T = I``)."""
    Phi = problem.Phi
    if not Phi.orthogonal:
        raise StrategyError(f"{Phi.kind} measurement operator is not row-orthonormal")
    beta, mu = config.beta, problem.mu
    r = _v3_target(state, problem, hx)
    return r + (beta / (beta + mu)) * Phi.adjoint(problem.y - Phi.forward(r))


def update_v3_newton(state, problem, config, hx=None):
    """Steepest descent with exact line search on the v3 normal equations.

    Residual ``h(v) = (beta Phi^T Phi + mu I) v - (beta Phi^T y + mu (b3 + Hx))``,
    step ``h'h / (beta |Phi h|^2 + mu h'h)``, warm-started at the current v3.
    """
    return _newton_v3(state, problem, config, hx)[0]


def _newton_v3(state, problem, config, hx=None):
    Phi = problem.Phi
    beta, mu = config.beta, problem.mu
    rhs = beta * problem.phi_t_y + mu * _v3_target(state, problem, hx)
    rhs_norm = np.linalg.norm(rhs) or 1.0
    v = state.v3
    gram = state.v3_gram
    if gram is None:
        gram = Phi.adjoint(Phi.forward(v))
    for inner in range(config.newton_max_inner):
        h = beta * gram + mu * v - rhs
        hh = float(h @ h)
        if not math.isfinite(hh):
            raise NumericalError(
                f"non-finite v3 residual (outer {state.iter}, inner {inner})",
                iteration=state.iter)
        if math.sqrt(hh) <= config.newton_inner_tol * rhs_norm:
            break
        ph = Phi.forward(h)
        stp = hh / (beta * float(ph @ ph) + mu * hh)
        v = v - stp * h
        gram = gram - stp * Phi.adjoint(ph)
    return v, gram


def resolve_strategy(problem, config):
    strategy = config.v3_strategy
    if strategy == "auto":
        return "orthogonal" if problem.Phi.orthogonal else "newton"
    if strategy == "orthogonal" and not problem.Phi.orthogonal:
        raise StrategyError(f"{problem.Phi.kind} measurement operator is not row-orthonormal")
    return strategy


def update_v3(state, problem, config, hx=None):
    if resolve_strategy(problem, config) == "orthogonal":
        return update_v3_orthogonal(state, problem, config, hx)
    return update_v3_newton(state, problem, config, hx)


def update_multipliers(state, problem, hx=None, whx=None):
    """``b_i + C_i x - v_i`` for the three constraints."""
    if hx is None:
        hx = problem.H.apply(state.x)
    if whx is None:
        whx = problem.Psi.analyze(hx)
    b1 = state.b1 + state.x.ravel() - state.v1
    b2 = state.b2 + whx - state.v2
    b3 = state.b3 + np.asarray(hx).ravel() - state.v3
    return b1, b2, b3


def objective(problem, x, hx=None, whx=None):
    x = np.asarray(x, dtype=np.float64)
    if hx is None:
        hx = problem.H.apply(x.reshape(problem.shape))
    if whx is None:
        whx = problem.Psi.analyze(hx)
    resid = problem.y - problem.Phi.forward(hx)
    return float(np.sum(np.abs(whx))
                 + problem.alpha * np.sum(np.abs(x) ** problem.p)
                 + float(resid @ resid) / (2.0 * problem.mu))


def _trace_nmse(ground_truth, x):
    if ground_truth is None or not np.any(x):
        return math.nan
    return _nmse(np.reshape(ground_truth, x.shape), x)


def _finite(state):
    return all(np.all(np.isfinite(a)) for a in
               (state.x, state.v1, state.v2, state.v3, state.b1, state.b2, state.b3))


def solve(problem, config=None, x0=None, ground_truth=None, callback=None):
    """Run SDMM until ``||x_k - x_{k-1}|| / ||x_{k-1}|| < tol`` or ``max_iters``.

    Returns a :class:`SolveResult`; ``converged`` is False when the iteration
    budget ran out. Raises :class:`DivergedError` carrying the last finite
    state if an iterate becomes non-finite.
    """
    config = config or SolverConfig()
    strategy = resolve_strategy(problem, config)
    newton = strategy == "newton"
    state = initial_state(problem, x0)
    if not _finite(state):
        raise DivergedError("non-finite initial state", iteration=0, state=None)
    Psi = problem.Psi
    t0 = time.perf_counter()
    converged = False
    for k in range(1, config.max_iters + 1):
        prev = state
        x_prev = state.x
        x, hx = _x_step(state, problem)
        state = SolverState(x, prev.v1, prev.v2, prev.v3, prev.b1, prev.b2, prev.b3,
                            iter=k, trace=prev.trace, v3_gram=prev.v3_gram)
        whx = Psi.analyze(hx)
        v1 = update_v1(state, problem, config)
        v2 = _prox.prox_l1(state.b2 + whx, config.beta)
        try:
            if newton:
                v3, state.v3_gram = _newton_v3(state, problem, config, hx)
            else:
                v3 = update_v3_orthogonal(state, problem, config, hx)
        except NumericalError as exc:
            raise DivergedError(str(exc), iteration=k, state=prev) from exc
        state.v1, state.v2, state.v3 = v1, v2, v3
        state.b1, state.b2, state.b3 = update_multipliers(state, problem, hx, whx)
        if not _finite(state):
            raise DivergedError(f"non-finite iterate at iteration {k}", iteration=k, state=prev)

        dx = float(np.linalg.norm(x - x_prev))
        px = float(np.linalg.norm(x_prev))
        rel = dx / px if px > 0 else (math.inf if dx > 0 else 0.0)
        obj = objective(problem, x, hx, whx) if config.track_objective else math.nan
        err = _trace_nmse(ground_truth, x)
        state.trace.append(TraceEntry(k, obj, rel, err, time.perf_counter() - t0))
        if callback is not None:
            callback(state)
        # x^1 == x^0 by construction of the initial state, so the relative
        # change only becomes informative from the second iteration
        if math.isinf(config.tol) or (k > 1 and rel < config.tol):
            converged = True
            break
    log.debug("SDMM stopped after %d iterations (converged=%s)", state.iter, converged)
    return SolveResult(state.x, state.trace, converged, state.iter, state)
