"""Riemannian conjugate gradient with Fletcher-Reeves updates and strong Wolfe steps.

The solver works on any objective over the phase/beam product manifold exposed
as a value callable plus an ambient Euclidean-gradient callable. Each accepted
step satisfies the strong Wolfe conditions

    L(R_x(a d)) <= L(x) + c1 a <grad, d>          (sufficient decrease)
    |<grad at R_x(a d), d>|  <= -c2 <grad, d>     (curvature)

and the trace records the diagnostics used by the convergence analysis:
the Zoutendijk partial sum of <grad, D>^2 / ||D||^2 and the per-iteration
ratio <grad, D> / ||grad||^2, which with c2 < 1/2 must stay inside
[-1/(1-c2), (2 c2 - 1)/(1 - c2)].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .manifold import (
    ProductPoint,
    RetractionError,
    TangentVector,
    inner_product,
    point_difference_sq,
    project_tangent,
    random_tangent,
    retract,
)


class InvalidDirectionError(ValueError):
    """The supplied search direction is not a descent direction."""


class LineSearchError(RuntimeError):
    """Bisection budget exhausted before both Wolfe conditions held.

    ``best_alpha`` carries the best Armijo-only step found, or None.
    """

    def __init__(self, message: str, best_alpha: float | None = None):
        super().__init__(message)
        self.best_alpha = best_alpha


class SolverStalledError(RuntimeError):
    """Line search failed on a steepest-descent direction; ``trace`` is attached."""

    def __init__(self, message: str, trace: "RcgTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class Objective:
    """Objective handle: scalar value and ambient Euclidean gradient pair."""

    value: Callable[[ProductPoint], float]
    euclidean_gradient: Callable[[ProductPoint], tuple[np.ndarray, np.ndarray]]

    def riemannian_gradient(self, x: ProductPoint) -> TangentVector:
        gp, gb = self.euclidean_gradient(x)
        return project_tangent(x, gp, gb)


@dataclass(frozen=True)
class RcgOptions:
    max_iters: int = 200
    tol: float = 1e-10            # on ||x_{i+1} - x_i||^2
    grad_tol: float = 1e-6        # on the Riemannian gradient norm
    c1: float = 1e-4
    c2: float = 0.1
    line_search_max_bisections: int = 50
    initial_step: float = 1.0
    force_steepest: bool = False  # debug/regression switch: beta = 0 every step

    def validate(self) -> None:
        if not (0.0 < self.c1 < self.c2 < 0.5):
            raise ValueError("need 0 < c1 < c2 < 1/2")
        if self.max_iters < 1 or self.line_search_max_bisections < 1:
            raise ValueError("iteration budgets must be positive")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")


@dataclass
class RcgTrace:
    """Per-iteration solver diagnostics."""

    values: list[float] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)
    wolfe_ok: list[bool] = field(default_factory=list)
    zoutendijk: list[float] = field(default_factory=list)   # running partial sums
    direction_ratio: list[float] = field(default_factory=list)  # <grad,D>/||grad||^2
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class _WolfeResult:
    alpha: float
    point: ProductPoint
    value: float
    dir_derivative: float          # <grad at point, direction> (ambient form)
    gradient: TangentVector        # Riemannian gradient at point
    wolfe_ok: bool


def _eval_step(obj: Objective, x: ProductPoint, d: TangentVector, alpha: float):
    """Value at the retracted point; inf when the retraction degenerates."""
    try:
        pt = retract(x, d, alpha)
    except RetractionError:
        return np.inf, None
    return obj.value(pt), pt


def _eval_slope(obj: Objective, pt: ProductPoint, d: TangentVector):
    """<grad at pt, d> via the ambient metric (equals the projected-direction form)."""
    g = obj.riemannian_gradient(pt)
    slope = inner_product(g, TangentVector(d.d_phases, d.d_beams, pt))
    return slope, g


def _wolfe_search(
    obj: Objective,
    x: ProductPoint,
    d: TangentVector,
    f0: float,
    slope0: float,
    opts: RcgOptions,
) -> _WolfeResult:
    """Bracket-and-bisect strong Wolfe search along the retracted ray.

    Grows the step while the sufficient-decrease condition holds and the slope
    stays negative, then bisects inside the bracket. Raises LineSearchError with
    the best Armijo-only step if the bisection budget runs out.
    """
    if slope0 >= 0.0:
        raise InvalidDirectionError("search direction is not a descent direction")
    c1, c2 = opts.c1, opts.c2
    best_armijo: tuple[float, float, ProductPoint] | None = None

    def armijo(alpha: float, fa: float) -> bool:
        return fa <= f0 + c1 * alpha * slope0

    def record_best(alpha: float, fa: float, pt: ProductPoint) -> None:
        nonlocal best_armijo
        if armijo(alpha, fa) and (best_armijo is None or fa < best_armijo[1]):
            best_armijo = (alpha, fa, pt)

    def finish(alpha: float, fa: float, pt: ProductPoint, slope: float, g: TangentVector):
        return _WolfeResult(alpha, pt, fa, slope, g, True)

    # bracketing phase
    alpha_prev, f_prev = 0.0, f0
    alpha = opts.initial_step
    lo = hi = None
    f_lo = f0
    for it in range(60):
        fa, pt = _eval_step(obj, x, d, alpha)
        if not armijo(alpha, fa) or (it > 0 and fa >= f_prev):
            lo, hi, f_lo = alpha_prev, alpha, f_prev
            break
        record_best(alpha, fa, pt)
        slope, g = _eval_slope(obj, pt, d)
        if abs(slope) <= -c2 * slope0:
            return finish(alpha, fa, pt, slope, g)
        if slope >= 0.0:
            lo, hi, f_lo = alpha, alpha_prev, fa
            break
        alpha_prev, f_prev = alpha, fa
        alpha *= 2.0
    else:
        raise LineSearchError(
            "step growth exhausted without bracketing a Wolfe point",
            best_alpha=best_armijo[0] if best_armijo else None,
        )

    # zoom phase: bisection inside [lo, hi] (order conveys which side decreases)
    for _ in range(opts.line_search_max_bisections):
        alpha = 0.5 * (lo + hi)
        fa, pt = _eval_step(obj, x, d, alpha)
        if not armijo(alpha, fa) or fa >= f_lo:
            hi = alpha
            continue
        record_best(alpha, fa, pt)
        slope, g = _eval_slope(obj, pt, d)
        if abs(slope) <= -c2 * slope0:
            return finish(alpha, fa, pt, slope, g)
        if slope * (hi - lo) >= 0.0:
            hi = lo
        lo, f_lo = alpha, fa
    raise LineSearchError(
        "bisection budget exhausted in the Wolfe zoom",
        best_alpha=best_armijo[0] if best_armijo else None,
    )


def strong_wolfe_search(
    obj: Objective, x: ProductPoint, d: TangentVector, opts: RcgOptions | None = None
) -> tuple[float, ProductPoint]:
    """Find a step along ``d`` satisfying both strong Wolfe conditions.

    Returns (alpha, retracted point). Raises InvalidDirectionError when ``d``
    is not a descent direction and LineSearchError when the budget runs out.
    """
    opts = opts or RcgOptions()
    opts.validate()
    if inner_product(d, d) == 0.0:
        raise InvalidDirectionError("zero search direction")
    f0 = obj.value(x)
    grad = obj.riemannian_gradient(x)
    slope0 = inner_product(grad, d)
    res = _wolfe_search(obj, x, d, f0, slope0, opts)
    return res.alpha, res.point


def rcg_minimize(
    obj: Objective, x0: ProductPoint, opts: RcgOptions | None = None
) -> tuple[ProductPoint, RcgTrace]:
    """Fletcher-Reeves RCG: project, combine, Wolfe-search, retract, repeat.

    The first direction is steepest descent; a computed direction that fails to
    descend triggers a steepest-descent restart. Stops when the squared point
    move falls below ``opts.tol``, the gradient norm below ``opts.grad_tol``,
    or the iteration budget is hit.
    """
    opts = opts or RcgOptions()
    opts.validate()
    trace = RcgTrace()

    x = x0
    grad = obj.riemannian_gradient(x)
    grad_sq = inner_product(grad, grad)
    fx = obj.value(x)
    direction = TangentVector(-grad.d_phases, -grad.d_beams, x)
    beta = 0.0
    zsum = 0.0

    for _ in range(opts.max_iters):
        if np.sqrt(grad_sq) <= opts.grad_tol:
            trace.stop_reason = "gradient"
            break

        slope0 = inner_product(grad, direction)
        if slope0 >= 0.0:
            direction = TangentVector(-grad.d_phases, -grad.d_beams, x)
            beta = 0.0
            slope0 = -grad_sq
        steepest = beta == 0.0

        try:
            res = _wolfe_search(obj, x, direction, fx, slope0, opts)
        except LineSearchError:
            if steepest:
                trace.stop_reason = "stalled"
                raise SolverStalledError(
                    "line search failed on a steepest-descent direction", trace
                ) from None
            direction = TangentVector(-grad.d_phases, -grad.d_beams, x)
            beta = 0.0
            slope0 = -grad_sq
            try:
                res = _wolfe_search(obj, x, direction, fx, slope0, opts)
            except LineSearchError:
                trace.stop_reason = "stalled"
                raise SolverStalledError(
                    "line search failed on a steepest-descent restart", trace
                ) from None

        zsum += slope0 * slope0 / inner_product(direction, direction)
        trace.values.append(fx)
        trace.grad_norms.append(np.sqrt(grad_sq))
        trace.alphas.append(res.alpha)
        trace.betas.append(beta)
        trace.wolfe_ok.append(res.wolfe_ok)
        trace.zoutendijk.append(zsum)
        trace.direction_ratio.append(slope0 / grad_sq if grad_sq > 0 else 0.0)

        moved_sq = point_difference_sq(res.point, x)
        grad_new = res.gradient
        grad_new_sq = inner_product(grad_new, grad_new)
        beta = 0.0 if opts.force_steepest else (grad_new_sq / grad_sq if grad_sq > 0 else 0.0)
        carried = project_tangent(res.point, direction.d_phases, direction.d_beams)
        direction = TangentVector(
            -grad_new.d_phases + beta * carried.d_phases,
            -grad_new.d_beams + beta * carried.d_beams,
            res.point,
        )
        x, fx, grad, grad_sq = res.point, res.value, grad_new, grad_new_sq

        if moved_sq <= opts.tol:
            trace.stop_reason = "step"
            break
    else:
        trace.stop_reason = "max_iters"

    trace.values.append(fx)
    trace.grad_norms.append(np.sqrt(grad_sq))
    return x, trace


def check_gradient(
    obj: Objective,
    x: ProductPoint,
    trials: int = 10,
    h: float = 1e-5,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst relative error of <grad, v> against central finite differences.

    Directions are random unit tangents; the finite difference runs through the
    retraction, whose first-order property makes the two sides agree.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng or np.random.default_rng(0)
    grad = obj.riemannian_gradient(x)
    worst = 0.0
    for _ in range(trials):
        v = random_tangent(x, rng)
        fp = obj.value(retract(x, v, h))
        fm = obj.value(retract(x, v, -h))
        fd = (fp - fm) / (2.0 * h)
        ip = inner_product(grad, v)
        scale = max(abs(fd), abs(ip))
        if scale == 0.0:
            continue
        worst = max(worst, abs(fd - ip) / scale)
    return worst
