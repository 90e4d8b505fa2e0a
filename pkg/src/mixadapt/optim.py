"""Optimization primitives.

A limited-memory BFGS minimizer with backtracking Armijo line search, a
bounded quadratic stationarity solver, golden-section search, and a central
finite-difference gradient checker. Objectives are callables returning
(value, gradient); value-only callables are accepted where the gradient is
not needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_LINE_SEARCH_FAILED = "line_search_failed"

# Curvature pairs with s.y at or below this are dropped to keep the inverse
# Hessian approximation positive definite.
CURVATURE_DAMPING = 1e-10


class NumericError(RuntimeError):
    """Raised when a numeric routine cannot proceed (non-finite values)."""


class NoRealRootError(NumericError):
    """The quadratic has no real root; callers fall back to a line search."""


@dataclass
class LbfgsConfig:
    memory: int = 10
    max_iterations: int = 200
    gradient_tolerance: float = 1e-6
    # Relative progress floor: stop once an accepted step decreases the value
    # by no more than value_tolerance * (1 + |value|). Without it the search
    # grinds at the float noise floor when the gradient tolerance is tighter
    # than the objective's resolution.
    value_tolerance: float = 1e-12
    armijo_contraction: float = 0.5
    armijo_slope: float = 1e-4
    max_backtracks: int = 60


@dataclass
class LbfgsTrace:
    values: list[float] = field(default_factory=list)
    gradient_norms: list[float] = field(default_factory=list)
    status: str = STATUS_MAX_ITERATIONS
    iterations: int = 0


def _value_of(objective: Callable, x: np.ndarray) -> float:
    out = objective(x)
    return float(out[0]) if isinstance(out, tuple) else float(out)


def lbfgs_minimize(
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]],
    start: np.ndarray,
    config: LbfgsConfig | None = None,
) -> tuple[np.ndarray, LbfgsTrace]:
    """Minimize a smooth objective from `start`.

    Stops when the gradient norm falls to the tolerance, an accepted step no
    longer makes relative progress, the iteration budget runs out, or
    backtracking cannot find a decrease (status flags tell which). Accepted
    values are strictly non-increasing.
    """
    cfg = config or LbfgsConfig()
    x = np.asarray(start, dtype=float).copy()
    f, g = objective(x)
    f = float(f)
    g = np.asarray(g, dtype=float)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise NumericError("objective not finite at start")

    trace = LbfgsTrace()
    trace.values.append(f)
    trace.gradient_norms.append(float(np.linalg.norm(g)))
    pairs: list[tuple[np.ndarray, np.ndarray, float]] = []  # (s, y, rho)

    for iteration in range(cfg.max_iterations):
        if np.linalg.norm(g) <= cfg.gradient_tolerance:
            trace.status = STATUS_CONVERGED
            break

        d = _two_loop_direction(g, pairs)
        slope = float(np.dot(g, d))
        if slope >= 0.0:
            pairs.clear()
            d = -g
            slope = -float(np.dot(g, g))

        step = 1.0
        accepted = False
        f_new = f
        g_new = g
        for _ in range(cfg.max_backtracks):
            out = objective(x + step * d)
            f_new = float(out[0])
            g_new = np.asarray(out[1], dtype=float)
            if math.isfinite(f_new) and f_new <= f + cfg.armijo_slope * step * slope:
                accepted = True
                break
            step *= cfg.armijo_contraction
        if not accepted:
            trace.status = STATUS_LINE_SEARCH_FAILED
            break
        if not np.all(np.isfinite(g_new)):
            trace.status = STATUS_LINE_SEARCH_FAILED
            break

        x_new = x + step * d
        s = x_new - x
        y = g_new - g
        sy = float(np.dot(s, y))
        if sy > CURVATURE_DAMPING:
            pairs.append((s, y, 1.0 / sy))
            if len(pairs) > cfg.memory:
                pairs.pop(0)

        stalled = (f - f_new) <= cfg.value_tolerance * (1.0 + abs(f))
        x, f, g = x_new, f_new, g_new
        trace.values.append(f)
        trace.gradient_norms.append(float(np.linalg.norm(g)))
        trace.iterations = iteration + 1
        if stalled:
            trace.status = STATUS_CONVERGED
            break
    else:
        trace.status = STATUS_MAX_ITERATIONS

    if np.linalg.norm(g) <= cfg.gradient_tolerance:
        trace.status = STATUS_CONVERGED
    return x, trace


def _two_loop_direction(g: np.ndarray, pairs: Sequence[tuple[np.ndarray, np.ndarray, float]]) -> np.ndarray:
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= float(np.dot(s, y) / np.dot(y, y))
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return -q


def solve_bounded_quadratic(
    c2: float,
    c1: float,
    c0: float,
    lo: float,
    hi: float,
    objective: Callable[[float], float] | None = None,
    eps: float = 1e-6,
) -> float:
    """Root of c2 t^2 + c1 t + c0 = 0 on [lo, hi], clamped to
    [lo + eps, hi - eps].

    A root inside [lo, hi] is preferred; otherwise roots are clamped in.
    When two candidates remain, the caller-supplied objective picks the
    larger one (ties go to the smaller t). Raises NoRealRootError when the
    discriminant is negative or the equation is degenerate, so callers can
    fall back to a direct search.
    """
    if hi <= lo:
        raise ValueError("empty interval")
    if c2 == 0.0:
        if c1 == 0.0:
            raise NoRealRootError("degenerate equation")
        roots = [-c0 / c1]
    else:
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            raise NoRealRootError("negative discriminant")
        sq = math.sqrt(disc)
        # Citardauq-style pairing avoids cancellation for small roots.
        q = -0.5 * (c1 + math.copysign(sq, c1)) if c1 != 0.0 else 0.5 * sq
        roots = []
        if q != 0.0:
            roots = [q / c2, c0 / q]
        else:  # c1 == 0 and disc == 0, double root at zero
            roots = [0.0]
    roots = [r for r in roots if math.isfinite(r)]
    if not roots:
        raise NoRealRootError("no finite root")
    inside = [r for r in roots if lo <= r <= hi]
    pool = inside if inside else roots
    clamped = sorted({min(max(r, lo + eps), hi - eps) for r in pool})
    if len(clamped) == 1:
        return clamped[0]
    if objective is None:
        raise ValueError("two candidate roots but no objective to pick one")
    values = [objective(t) for t in clamped]
    best = int(np.argmax(values))
    return clamped[best]


def golden_section_maximize(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
) -> float:
    """Golden-section search for a maximum on [lo, hi]; returns the midpoint
    of the final bracket (within tol of the maximizer for unimodal
    objectives, and at the better end for monotone ones)."""
    if hi <= lo:
        raise ValueError("empty interval")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = objective(c)
    fd = objective(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)


def finite_difference_gradient(
    objective: Callable,
    point: np.ndarray,
    step: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient estimate; objective may return a bare
    value or a (value, gradient) pair."""
    x = np.asarray(point, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        forward = x.copy()
        backward = x.copy()
        forward.flat[i] += step
        backward.flat[i] -= step
        grad.flat[i] = (_value_of(objective, forward) - _value_of(objective, backward)) / (2.0 * step)
    return grad
