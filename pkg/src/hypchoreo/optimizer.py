"""Two-phase minimization of the discretized action.

Phase 1 runs BFGS with the exact gradient on a moderate number of
coefficients until the relative gradient norm reaches a few digits.
Phase 2 pads the coefficient vector (typically doubling the bandwidth)
and runs Newton's method with the exact Hessian, which converges
quadratically to near machine precision in a handful of steps.

Because the action is invariant under rotations of the disk and time
shifts of the path (and under boosts for some configurations), its
Hessian is singular along those directions at every minimizer.  Newton
steps therefore solve (H + eps I) s = -g through an eigendecomposition,
with eps lifted to 1e-8 ||H|| whenever the shifted spectrum would still
be ill-conditioned; the lift only damps the pure-symmetry components of
the step and leaves quadratic convergence in the remaining directions
intact.

Infeasible trajectories (a node outside the disk, a collision) make the
action non-finite, which the Armijo backtracking line search rejects
like any other failed decrease; no constraint handling is needed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .action import Configuration, action_value, evaluate
from .trigpath import TrigPath, nodes, pack_vars, unpack_vars
from .verify import PhaseRecord, SolveReport, coefficient_decay, path_residual

__all__ = [
    "Phase1Options",
    "Phase2Options",
    "PhaseResult",
    "Choreography",
    "InfeasibleSeedError",
    "SolveFailure",
    "minimize_bfgs",
    "phase1_bfgs",
    "phase2_newton",
    "random_seed",
    "solve",
]


class InfeasibleSeedError(ValueError):
    """Starting path is infeasible (collision or outside the disk)."""


class SolveFailure(RuntimeError):
    """A phase failed; the best result found so far rides along.

    Attributes
    ----------
    choreography : Choreography
        Partial result with the report filled in up to the failure.
    """

    def __init__(self, message: str, choreography: "Choreography"):
        super().__init__(message)
        self.choreography = choreography


@dataclass(frozen=True)
class Phase1Options:
    """BFGS controls: iteration cap, relative gradient tolerance, Armijo line search."""

    max_iterations: int = 500
    gradient_tolerance: float = 1e-7
    armijo_c1: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60

    def __post_init__(self):
        if self.gradient_tolerance <= 0.0 or self.armijo_c1 <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")


@dataclass(frozen=True)
class Phase2Options:
    """Newton controls; K2 is the padded bandwidth (None means 2 K1).

    epsilon is the absolute part of the eigenvalue floor protecting the
    gauge null modes; a relative part 1e-12 |H| is always added.
    """

    max_iterations: int = 10
    gradient_tolerance: float = 1e-13
    K2: int | None = None
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.gradient_tolerance <= 0.0 or self.epsilon <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass
class PhaseResult:
    """Outcome of one optimization phase.

    values and gradient_norms log every accepted iterate, starting with
    the initial point; failed marks line-search failure (Phase 1) or
    divergence (Phase 2), with the best iterate returned either way.
    """

    x: np.ndarray
    value: float
    gradient_rel_norm: float
    iterations: int
    converged: bool
    failed: bool = False
    message: str = ""
    values: list[float] = field(default_factory=list)
    gradient_norms: list[float] = field(default_factory=list)


@dataclass
class Choreography:
    """A solved (or partially solved) orbit with its diagnostics."""

    config: Configuration
    path: TrigPath
    report: SolveReport

    @property
    def action(self) -> float:
        final = self.report.final
        if final is not None:
            return final.action
        return action_value(pack_vars(self.path), self.config)


def _rel_gradient_norm(g: np.ndarray, x: np.ndarray) -> float:
    return float(np.linalg.norm(g)) / max(float(np.linalg.norm(x)), 1e-300)


def minimize_bfgs(fun, grad, x0, options: Phase1Options | None = None) -> PhaseResult:
    """Dense inverse-BFGS with Armijo backtracking.

    fun may return +inf to mark infeasible points; such trial steps are
    backtracked past.  The inverse Hessian approximation is rescaled to
    (s.y / y.y) I after the first accepted step and updates are skipped
    when the curvature s.y is too small to be trustworthy.
    """
    opts = options if options is not None else Phase1Options()
    x = np.array(x0, dtype=float)
    f = float(fun(x))
    if not math.isfinite(f):
        raise InfeasibleSeedError("starting point is infeasible")
    g = np.asarray(grad(x), dtype=float)
    dim = x.size
    identity = np.eye(dim)
    Hinv = identity.copy()
    first_update = True
    values = [f]
    gnorms = [_rel_gradient_norm(g, x)]

    iteration = 0
    while iteration < opts.max_iterations:
        grel = _rel_gradient_norm(g, x)
        if grel <= opts.gradient_tolerance:
            return PhaseResult(x, f, grel, iteration, True, values=values, gradient_norms=gnorms)

        p = Hinv @ g
        p = -p
        slope = float(g @ p)
        if slope >= 0.0:
            # Update went bad; fall back to steepest descent.
            Hinv = identity.copy()
            first_update = True
            p = -g
            slope = float(g @ p)

        step = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            x_new = x + step * p
            f_new = float(fun(x_new))
            if math.isfinite(f_new) and f_new <= f + opts.armijo_c1 * step * slope:
                accepted = True
                break
            step *= opts.backtrack_factor
        if not accepted:
            if opts.armijo_c1 * step * abs(slope) < 8.0 * np.finfo(float).eps * max(1.0, abs(f)):
                # The smallest trial demanded less decrease than fun can
                # resolve: the iterate sits at the rounding floor.  Stop
                # here; a second-order method can still make progress.
                break
            return PhaseResult(
                x, f, grel, iteration, False,
                failed=True, message="line search found no feasible decrease",
                values=values, gradient_norms=gnorms,
            )

        s = x_new - x
        if not np.any(s):
            # Accepted step too small to move x at float resolution.
            break
        g_new = np.asarray(grad(x_new), dtype=float)
        y = g_new - g
        sy = float(s @ y)
        if first_update and sy > 0.0:
            Hinv = (sy / float(y @ y)) * identity
            first_update = False
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            Hy = Hinv @ y
            yHy = float(y @ Hy)
            Hinv += ((sy + yHy) / sy ** 2) * np.outer(s, s)
            cross = np.outer(Hy, s) / sy
            Hinv -= cross + cross.T
        x, f, g = x_new, f_new, g_new
        values.append(f)
        gnorms.append(_rel_gradient_norm(g, x))
        iteration += 1

    grel = _rel_gradient_norm(g, x)
    return PhaseResult(
        x, f, grel, iteration, grel <= opts.gradient_tolerance,
        values=values, gradient_norms=gnorms,
    )


def phase1_bfgs(x0, config: Configuration, options: Phase1Options | None = None) -> PhaseResult:
    """BFGS on the action at the configuration's own bandwidth."""
    return minimize_bfgs(
        lambda x: evaluate(x, config, order=0).value,
        lambda x: evaluate(x, config, order=1).gradient,
        x0,
        options,
    )


def phase2_newton(x0, config: Configuration, options: Phase2Options | None = None) -> PhaseResult:
    """Regularized Newton iteration with the exact Hessian.

    Diverging runs (relative gradient norm growing on two consecutive
    steps) stop early and return the best iterate seen.
    """
    opts = options if options is not None else Phase2Options()
    x = np.array(x0, dtype=float)
    f = float(action_value(x, config))
    if not math.isfinite(f):
        raise InfeasibleSeedError("starting point is infeasible")
    g = evaluate(x, config, order=1, precise=True).gradient
    grel = _rel_gradient_norm(g, x)
    values = [f]
    gnorms = [grel]
    best = (grel, x.copy(), f)
    growth_streak = 0

    for iteration in range(opts.max_iterations):
        if grel <= opts.gradient_tolerance:
            return PhaseResult(x, f, grel, iteration, True, values=values, gradient_norms=gnorms)

        H = evaluate(x, config, order=2).hessian
        lam, vecs = np.linalg.eigh(H)
        h_norm = float(np.max(np.abs(lam)))
        # Saddle-free step: descend along negative-curvature directions by
        # their magnitude, and floor the gauge-symmetry null modes so their
        # noise components produce no step to speak of.
        lam_eff = np.maximum(np.abs(lam), opts.epsilon + 1e-12 * h_norm)
        step = -vecs @ ((vecs.T @ g) / lam_eff)

        # Halve the step while it leaves the feasible region or increases
        # the value; the tolerance leaves endgame steps alone, which reduce
        # the gradient without a measurable change of the value.
        x_new = x + step
        f_new = float(action_value(x_new, config))
        f_tol = 64.0 * np.finfo(float).eps * max(1.0, abs(f))
        for _ in range(60):
            if math.isfinite(f_new) and f_new <= f + f_tol:
                break
            step *= 0.5
            x_new = x + step
            f_new = float(action_value(x_new, config))
        else:
            return PhaseResult(
                best[1], best[2], best[0], iteration, False,
                failed=True, message="Newton step found no feasible decrease at any damping",
                values=values, gradient_norms=gnorms,
            )

        g_new = evaluate(x_new, config, order=1, precise=True).gradient
        grel_new = _rel_gradient_norm(g_new, x_new)
        x, f, g = x_new, f_new, g_new
        values.append(f)
        gnorms.append(grel_new)
        growth_streak = growth_streak + 1 if grel_new > grel else 0
        grel = grel_new
        if grel < best[0]:
            best = (grel, x.copy(), f)
        if growth_streak >= 2:
            return PhaseResult(
                best[1], best[2], best[0], iteration + 1, False,
                failed=True, message="gradient norm grew on two consecutive Newton steps",
                values=values, gradient_norms=gnorms,
            )

    converged = grel <= opts.gradient_tolerance
    if not converged and best[0] < grel:
        grel, x, f = best
    return PhaseResult(x, f, grel, opts.max_iterations, converged, values=values, gradient_norms=gnorms)


def random_seed(config: Configuration, modes: int = 5, rng_seed: int = 0) -> TrigPath:
    """Deterministic low-bandwidth random starting path.

    Coefficients are nonzero for |k| <= modes, complex Gaussian with
    magnitude decaying like 2^(-|k|), scaled so the trajectory stays well
    inside the disk (max |q| = 0.6 R) and redrawn until all bodies keep a
    mutual chordal separation of at least 0.05 R.  The flat problem has
    no disk to scale against, so it uses a unit reference length instead
    of R.
    """
    if modes > config.K:
        raise ValueError("seed bandwidth exceeds the configuration bandwidth")
    if modes < 1:
        raise ValueError("need at least one seed mode")
    rng = np.random.default_rng(rng_seed)
    scale_ref = 1.0 if config.is_planar else config.R
    k = np.arange(-modes, modes + 1)
    t = nodes(1024)
    shifts = 2.0 * np.pi * np.arange(1, config.n) / config.n

    for _ in range(100):
        c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * 2.0 ** (-np.abs(k))
        path = TrigPath(c)
        q = path.eval(t)
        peak = float(np.max(np.abs(q)))
        if peak == 0.0:
            continue
        c = c * (0.6 * scale_ref / peak)
        path = TrigPath(c)
        q = path.eval(t)
        feasible = True
        for tau in shifts:
            qj = path.eval(t + tau)
            w = np.abs(q - qj)
            if config.is_planar:
                sep = w
            else:
                R2 = config.R * config.R
                s0 = R2 - np.abs(q) ** 2
                sj = R2 - np.abs(qj) ** 2
                sep = 2.0 * R2 * w / np.sqrt(s0 * sj)
            if float(np.min(sep)) < 0.05 * scale_ref:
                feasible = False
                break
        if feasible:
            return path.pad(config.K)
    raise InfeasibleSeedError("no feasible random seed found in 100 draws")


def _phase_record(result: PhaseResult, path: TrigPath, config: Configuration, seconds: float) -> PhaseRecord:
    return PhaseRecord(
        action=result.value,
        coefficient_count=path.coeffs.size,
        wall_time_seconds=seconds,
        iterations=result.iterations,
        gradient_rel_norm=result.gradient_rel_norm,
        smallest_coefficient=coefficient_decay(path),
        residual_rel_norm=path_residual(path, config),
        converged=result.converged,
    )


def solve(
    config: Configuration,
    seed: TrigPath,
    options1: Phase1Options | None = None,
    options2: Phase2Options | None = None,
) -> Choreography:
    """Run the full two-phase pipeline from a feasible seed.

    Phase 1 works at the configuration's bandwidth K; Phase 2 pads to
    options2.K2 (default 2 K).  Raises SolveFailure, with the partial
    result attached, when a phase reports failure.
    """
    opts1 = options1 if options1 is not None else Phase1Options()
    opts2 = options2 if options2 is not None else Phase2Options()
    K2 = opts2.K2 if opts2.K2 is not None else 2 * config.K
    if K2 < config.K:
        raise ValueError("padded bandwidth K2 must be at least the Phase 1 bandwidth")
    if seed.K > config.K:
        raise ValueError("seed bandwidth exceeds the configuration bandwidth")

    x0 = pack_vars(seed.pad(config.K))
    if not math.isfinite(action_value(x0, config)):
        raise InfeasibleSeedError("seed path is infeasible")

    t0 = time.perf_counter()
    result1 = phase1_bfgs(x0, config, opts1)
    path1 = unpack_vars(result1.x)
    record1 = _phase_record(result1, path1, config, time.perf_counter() - t0)
    if result1.failed and not result1.converged:
        partial = Choreography(config, path1, SolveReport(phase1=record1))
        raise SolveFailure(f"phase 1 failed: {result1.message}", partial)

    config2 = replace(config, K=K2)
    t1 = time.perf_counter()
    result2 = phase2_newton(pack_vars(path1.pad(K2)), config2, opts2)
    path2 = unpack_vars(result2.x)
    record2 = _phase_record(result2, path2, config2, time.perf_counter() - t1)

    choreo = Choreography(config2, path2, SolveReport(phase1=record1, phase2=record2))
    if result2.failed and not result2.converged:
        raise SolveFailure(f"phase 2 failed: {result2.message}", choreo)
    return choreo
