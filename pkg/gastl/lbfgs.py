# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Limited-memory BFGS minimizer with a strong Wolfe line search
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import Callable, Iterable, Optional

import numpy as np
from loguru import logger

from .exceptions.invalidinputerror import InvalidInputError
from .numerics import ArrayModel
from .settings.lbfgs import LbfgsOptions


# Logging context for the module
log = logger.bind(subsystem="lbfgs")

# Objective callback: parameter vector -> (value, gradient)
Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]

# Curvature pairs with s.y at or below this fraction of |s||y| are skipped
CURVATURE_THRESHOLD = 1e-10


class Termination(str, Enum):
    """
    Reason a minimization stopped
    """

    GRADIENT_SMALL = "gradient-small"
    VALUE_STALLED = "value-stalled"
    MAX_ITERATIONS = "max-iterations"
    LINE_SEARCH_FAILED = "line-search-failed"


class CurvaturePair(ArrayModel):
    """
    Step s, gradient change y and rho = 1 / s.y of one accepted iteration
    """

    s: np.ndarray
    y: np.ndarray
    rho: float


class LbfgsResult(ArrayModel):
    """
    Outcome of a minimization
    """

    x: np.ndarray
    value: float
    values: list[float]
    iterations: int
    evaluations: int
    reason: Termination

    @property
    def converged(self) -> bool:
        """True when the minimization stopped on a tolerance rather than a limit or failure"""
        return self.reason in (Termination.GRADIENT_SMALL, Termination.VALUE_STALLED)


def two_loop_direction(gradient: np.ndarray, history: Iterable[CurvaturePair]) -> np.ndarray:
    """Compute the quasi-Newton search direction with the two-loop recursion.

    The initial inverse Hessian is scaled by s.y / y.y of the most recent pair.

    Args:
        gradient (np.ndarray): The current gradient
        history (Iterable[CurvaturePair]): The stored pairs, oldest first

    Returns:
        np.ndarray: The search direction; -gradient for an empty history
    """
    pairs = list(history)
    q = np.array(gradient, dtype=np.float64, copy=True)
    if not pairs:
        return -q

    # Newest to oldest
    alphas = []
    for pair in reversed(pairs):
        alpha = pair.rho * float(np.dot(pair.s, q))
        q -= alpha * pair.y
        alphas.append(alpha)

    # Initial Hessian scaling from the latest pair
    last = pairs[-1]
    q *= float(np.dot(last.s, last.y)) / float(np.dot(last.y, last.y))

    # Oldest to newest
    for pair, alpha in zip(pairs, reversed(alphas)):
        beta = pair.rho * float(np.dot(pair.y, q))
        q += (alpha - beta) * pair.s

    return -q


def cubic_step(a_lo: float, f_lo: float, g_lo: float, a_hi: float, f_hi: float, g_hi: float) -> float:
    """
    Minimizer of the cubic through two points with known slopes, safeguarded to the inner
    80% of the interval; the midpoint when the cubic has no usable minimizer
    """
    left, right = min(a_lo, a_hi), max(a_lo, a_hi)
    margin = 0.1 * (right - left)
    midpoint = (left + right) / 2.0

    # Slopes or values are unusable at points where the objective failed
    if not all(np.isfinite([f_lo, g_lo, f_hi, g_hi])) or a_lo == a_hi:
        return midpoint

    d1 = g_lo + g_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    radicand = d1 * d1 - g_lo * g_hi
    if radicand < 0:
        return midpoint
    d2 = np.sign(a_hi - a_lo) * np.sqrt(radicand)
    denominator = g_hi - g_lo + 2.0 * d2
    if denominator == 0:
        return midpoint
    step = a_hi - (a_hi - a_lo) * (g_hi + d2 - d1) / denominator
    if not np.isfinite(step) or step < left + margin or step > right - margin:
        return midpoint
    return float(step)


class _LineSearch:
    """
    Strong Wolfe line search along a fixed direction: bracketing followed by zoom
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        fun: Objective,
        x: np.ndarray,
        value: float,
        gradient: np.ndarray,
        direction: np.ndarray,
        opts: LbfgsOptions,
    ):
        self.fun = fun
        self.x = x
        self.direction = direction
        self.value = value
        self.slope = float(np.dot(gradient, direction))
        self.opts = opts
        self.evaluations = 0

        # Lowest value seen below the starting value: (step, value, gradient)
        self.best: Optional[tuple[float, float, np.ndarray]] = None

    def _evaluate(self, step: float) -> tuple[float, np.ndarray, float]:
        """
        Evaluate value, gradient and directional derivative at a trial step
        """
        self.evaluations += 1
        value, gradient = self.fun(self.x + step * self.direction)
        value = float(value)
        gradient = np.asarray(gradient, dtype=np.float64)
        if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
            return np.inf, gradient, np.nan
        if value < self.value and (self.best is None or value < self.best[1]):
            self.best = (step, value, gradient)
        return value, gradient, float(np.dot(gradient, self.direction))

    def _sufficient(self, step: float, value: float) -> bool:
        """Armijo condition"""
        return value <= self.value + self.opts.c1 * step * self.slope

    def _curvature(self, slope: float) -> bool:
        """Strong curvature condition"""
        return abs(slope) <= -self.opts.c2 * self.slope

    def search(self) -> Optional[tuple[float, float, np.ndarray]]:
        """
        Return (step, value, gradient) at a strong Wolfe point, or None when the budget runs out
        """
        prev_step, prev_value, prev_slope = 0.0, self.value, self.slope
        step = 1.0

        while self.evaluations < self.opts.max_line_search:
            value, gradient, slope = self._evaluate(step)

            if not self._sufficient(step, value) or (prev_step > 0 and value >= prev_value):
                return self._zoom(prev_step, prev_value, prev_slope, step, value, slope)

            if self._curvature(slope):
                return step, value, gradient

            if slope >= 0:
                return self._zoom(step, value, slope, prev_step, prev_value, prev_slope)

            # Still descending; extrapolate
            prev_step, prev_value, prev_slope = step, value, slope
            step *= 2.0

        return None

    # pylint: disable=too-many-arguments
    def _zoom(
        self,
        lo: float,
        f_lo: float,
        g_lo: float,
        hi: float,
        f_hi: float,
        g_hi: float,
    ) -> Optional[tuple[float, float, np.ndarray]]:
        """
        Shrink a bracket known to contain a strong Wolfe point
        """
        while self.evaluations < self.opts.max_line_search:
            step = cubic_step(lo, f_lo, g_lo, hi, f_hi, g_hi)
            if step == lo or step == hi:
                return None

            value, gradient, slope = self._evaluate(step)

            if not self._sufficient(step, value) or value >= f_lo:
                hi, f_hi, g_hi = step, value, slope
                continue

            if self._curvature(slope):
                return step, value, gradient

            if slope * (hi - lo) >= 0:
                hi, f_hi, g_hi = lo, f_lo, g_lo
            lo, f_lo, g_lo = step, value, slope

        return None


def minimize(fun: Objective, x0: np.ndarray, opts: LbfgsOptions = LbfgsOptions()) -> LbfgsResult:
    """Minimize a smooth function with L-BFGS.

    Every accepted step lowers the value, so the recorded value history is non-increasing.
    The iteration limit counts accepted steps, not function evaluations.

    Args:
        fun (Objective): Maps a parameter vector to (value, gradient)
        x0 (np.ndarray): The starting point
        opts (LbfgsOptions): The minimizer options

    Returns:
        LbfgsResult: The best point found and the reason for stopping
    """
    x = np.array(x0, dtype=np.float64, copy=True).ravel()
    value, gradient = fun(x)
    value = float(value)
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
        raise InvalidInputError("The objective is not finite at the starting point")

    values = [value]
    evaluations = 1
    history: deque[CurvaturePair] = deque(maxlen=opts.memory)
    reason = Termination.MAX_ITERATIONS
    iterations = 0

    if np.max(np.abs(gradient), initial=0.0) <= opts.gradient_tolerance:
        reason = Termination.GRADIENT_SMALL

    while reason == Termination.MAX_ITERATIONS and iterations < opts.max_iterations:
        direction = two_loop_direction(gradient, history)

        # Fall back to steepest descent when the quasi-Newton direction is not downhill
        if not np.dot(direction, gradient) < 0:
            log.bind(event="debug").debug("Resetting curvature history at iteration {i}", i=iterations)
            history.clear()
            direction = -gradient

        line_search = _LineSearch(fun, x, value, gradient, direction, opts)
        found = line_search.search()
        evaluations += line_search.evaluations

        if found is None:
            reason = Termination.LINE_SEARCH_FAILED
            found = line_search.best
            if found is None:
                break

        step, new_value, new_gradient = found
        s = step * direction
        y = new_gradient - gradient
        sy = float(np.dot(s, y))
        if sy > CURVATURE_THRESHOLD * np.linalg.norm(s) * np.linalg.norm(y):
            history.append(CurvaturePair(s=s, y=y, rho=1.0 / sy))

        previous = value
        x, value, gradient = x + s, new_value, new_gradient
        values.append(value)
        iterations += 1

        log.bind(event="progress").trace(
            "Iteration {i}: value {value:.10g}, step {step:.3g}, gradient {g:.3g}",
            i=iterations,
            value=value,
            step=step,
            g=float(np.max(np.abs(gradient), initial=0.0)),
        )

        if reason == Termination.LINE_SEARCH_FAILED:
            break
        if np.max(np.abs(gradient), initial=0.0) <= opts.gradient_tolerance:
            reason = Termination.GRADIENT_SMALL
        elif abs(previous - value) <= opts.relative_value_tolerance * max(1.0, abs(previous)):
            reason = Termination.VALUE_STALLED

    log.bind(event="debug").debug(
        "Minimization stopped after {i} iterations ({reason}), value {value:.10g}",
        i=iterations,
        reason=reason.value,
        value=value,
    )

    return LbfgsResult(
        x=x,
        value=value,
        values=values,
        iterations=iterations,
        evaluations=evaluations,
        reason=reason,
    )
