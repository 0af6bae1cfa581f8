"""Curvature sweeps: families of orbits followed from the flat limit inward.

As the curvature radius R grows, orbits on the disk shrink toward the
center and, once doubled, converge to flat-space orbits at a rate
proportional to 1/R^2.  Sweeps exploit this: the flat solution halved
seeds the largest-R solve, and each converged member seeds the next,
which keeps the whole family on one solution branch and preserves its
rotation and phase gauge along the way.

The distance between a disk orbit and its flat counterpart is measured
as the infinity-norm of 2 q_R(t) - q_flat(t) on a dense time grid, after
aligning the free gauges: the time shift s and rotation angle theta are
optimized by nested one-dimensional minimizations, seeded by a coarse
scan with the closed-form best rotation for each candidate shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .action import Configuration
from .optimizer import (
    Choreography,
    InfeasibleSeedError,
    Phase1Options,
    Phase2Options,
    SolveFailure,
    solve,
)
from .trigpath import TrigPath, nodes
from .verify import VerificationThresholds, verify_all

__all__ = [
    "FamilyMember",
    "ContinuationResult",
    "solve_planar",
    "continue_in_R",
    "planar_limit_diff",
    "convergence_rate",
    "center_planar",
]


@dataclass
class FamilyMember:
    """One solved curvature value of a family and its distance to the flat limit."""

    R: float
    choreo: Choreography
    diff_to_planar: float


@dataclass
class ContinuationResult:
    """Members solved so far; failed_at records where a sweep stopped early."""

    members: list[FamilyMember]
    failed_at: float | None = None

    @property
    def complete(self) -> bool:
        return self.failed_at is None


def solve_planar(
    config: Configuration,
    seed: TrigPath,
    options1: Phase1Options | None = None,
    options2: Phase2Options | None = None,
) -> Choreography:
    """Two-phase solve of the flat problem (R must be infinite)."""
    if not config.is_planar:
        raise ValueError("solve_planar requires a planar configuration")
    return solve(config, seed, options1, options2)


def center_planar(choreo: Choreography) -> Choreography:
    """Move a flat non-rotating solution so its center of mass sits at 0.

    For a flat choreography the center of mass equals the mean
    coefficient c_0, and with omega = 0 translations leave the action
    invariant, so zeroing c_0 picks the representative that disk
    solutions converge to.  Rotating-frame and disk solutions have no
    translation freedom and are returned unchanged.
    """
    if not choreo.config.is_planar or choreo.config.omega != 0.0:
        return choreo
    c = choreo.path.coeffs.copy()
    c[choreo.path.K] = 0.0
    return replace(choreo, path=TrigPath(c))


def _fit_bandwidth(path: TrigPath, K: int) -> TrigPath:
    """Pad or truncate the centered coefficient vector to bandwidth K."""
    if path.K == K:
        return path
    if path.K < K:
        return path.pad(K)
    mid = path.K
    return TrigPath(path.coeffs[mid - K : mid + K + 1])


def planar_limit_diff(hyperbolic: Choreography, planar: Choreography) -> float:
    """Aligned infinity-norm distance between a disk orbit and its flat limit.

    Computes max_t |2 q_R(t) - q_flat(t)| over a 10x oversampled grid,
    minimized over a time shift and a rotation of the disk orbit.  The
    doubling applies only to genuinely hyperbolic input; comparing two
    flat solutions uses factor 1 (so a solution against itself gives 0).
    """
    if hyperbolic.config.n != planar.config.n:
        raise ValueError("families have different body counts")
    factor = 1.0 if hyperbolic.config.is_planar else 2.0
    count = 10 * max(hyperbolic.path.coeffs.size, planar.path.coeffs.size)
    K_common = max(hyperbolic.path.K, planar.path.K)
    reference = planar.path.pad(K_common).coeffs
    moving = hyperbolic.path.pad(K_common)

    # Work on the coefficient-space difference, formed in extended precision:
    # the difference path is O(diff) while the orbits are O(1), so double
    # rounding in the subtraction would put a noise floor of eps * |orbit|
    # on every evaluation and dominate gauge-invariance comparisons.
    wavenumbers = moving.wavenumbers
    c_ext = moving.coeffs.astype(np.clongdouble)
    p_ext = reference.astype(np.clongdouble)
    factor_ext = np.clongdouble(factor)

    def aligned_diff(s: float, theta: float) -> float:
        arg = np.longdouble(theta) + wavenumbers * np.longdouble(s)
        phase = np.cos(arg) + 1j * np.sin(arg)
        d = (factor_ext * phase * c_ext - p_ext).astype(complex)
        return float(np.max(np.abs(TrigPath(d).at_nodes(count).values)))

    def best_theta_l2(s: float) -> float:
        shifted = factor * moving.shift(s).coeffs
        overlap = complex(np.sum(shifted * np.conj(reference)))
        if overlap == 0.0:
            return 0.0
        return float(-np.angle(overlap))

    # Coarse scan over the shift with the closed-form 2-norm rotation.
    scan = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    best = (math.inf, 0.0, 0.0)
    for s in scan:
        theta = best_theta_l2(float(s))
        d = aligned_diff(float(s), theta)
        if d < best[0]:
            best = (d, float(s), theta)

    def inner(s: float) -> float:
        theta0 = best_theta_l2(s)
        res = minimize_scalar(
            lambda th: aligned_diff(s, th),
            bounds=(theta0 - 0.5, theta0 + 0.5),
            method="bounded",
            options={"xatol": 1e-10},
        )
        return float(res.fun)

    spacing = float(scan[1] - scan[0])
    outer = minimize_scalar(
        inner,
        bounds=(best[1] - spacing, best[1] + spacing),
        method="bounded",
        options={"xatol": 1e-10},
    )
    s_hat = float(outer.x)
    theta_hat = best_theta_l2(s_hat)
    theta_refine = minimize_scalar(
        lambda th: aligned_diff(s_hat, th),
        bounds=(theta_hat - 0.5, theta_hat + 0.5),
        method="bounded",
        options={"xatol": 1e-10},
    )
    theta_hat = float(theta_refine.x)

    # Polish the alignment to machine resolution.  The sup-norm objective is
    # kinked at its minimum, so the bounded searches above stop near their
    # xatol; golden-section contraction on the located bracket removes the
    # remaining wobble, which would otherwise dominate gauge-invariance
    # comparisons of the diff.
    def _golden(f, lo: float, hi: float, iterations: int) -> tuple[float, float]:
        ratio = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c, d = b - ratio * (b - a), a + ratio * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(iterations):
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - ratio * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + ratio * (b - a)
                fd = f(d)
        return (c, fc) if fc <= fd else (d, fd)

    def polished(s: float) -> float:
        return _golden(lambda th: aligned_diff(s, th), theta_hat - 1e-6, theta_hat + 1e-6, 50)[1]

    _, value = _golden(polished, s_hat - 1e-9, s_hat + 1e-9, 50)
    return min(value, float(outer.fun), best[0])


def continue_in_R(
    family_config: Configuration,
    R_list,
    planar_start: Choreography,
    options1: Phase1Options | None = None,
    options2: Phase2Options | None = None,
    thresholds: VerificationThresholds | None = None,
) -> ContinuationResult:
    """Warm-started sweep over descending curvature radii.

    The first (largest) R is seeded by half the flat solution; each later
    R by the previous member.  A member must both solve and pass
    verify_all; the sweep stops at the first failure and returns the
    prefix with failed_at set.
    """
    radii = [float(R) for R in R_list]
    if not radii:
        raise ValueError("empty R list")
    if any(not 0.0 < R < math.inf for R in radii):
        raise ValueError("sweep radii must be positive and finite")
    if any(a <= b for a, b in zip(radii, radii[1:])):
        raise ValueError("sweep radii must be strictly descending")
    if not planar_start.config.is_planar:
        raise ValueError("planar_start must be a flat solution")

    reference = center_planar(planar_start)
    seed = _fit_bandwidth(TrigPath(reference.path.coeffs * 0.5), family_config.K)
    members: list[FamilyMember] = []
    for R in radii:
        config = replace(family_config, R=R)
        try:
            choreo = solve(config, seed, options1, options2)
        except (SolveFailure, InfeasibleSeedError):
            return ContinuationResult(members, failed_at=R)
        if not verify_all(choreo, thresholds).passed:
            return ContinuationResult(members, failed_at=R)
        diff = planar_limit_diff(choreo, reference)
        members.append(FamilyMember(R=R, choreo=choreo, diff_to_planar=diff))
        seed = _fit_bandwidth(choreo.path, family_config.K)
    return ContinuationResult(members)


def convergence_rate(members) -> float:
    """Least-squares slope of log diff against log R over a family."""
    pairs = [(float(m.R), float(m.diff_to_planar)) for m in members]
    if len(pairs) < 3:
        raise ValueError("need at least three members to fit a rate")
    if any(d <= 0.0 for _, d in pairs):
        raise ValueError("diffs must be positive to fit a log-log slope")
    logs_R = np.log([R for R, _ in pairs])
    logs_d = np.log([d for _, d in pairs])
    return float(np.polyfit(logs_R, logs_d, 1)[0])
