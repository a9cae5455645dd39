"""Least-favorable Gaussian priors on ellipsoids by waterfilling.

The minimax predictive problem over {sum a_i^2 theta_i^2 <= C} is solved by a
centered Gaussian prior whose variances theta2_i fill up coordinates with
small weights first.  The water level lambda solves

    sum_i a_i^2 [ d sqrt(1 + 4 lambda / (a_i^2 d)) - (v_n + v_nm) ]_+ = 2 C,

with d = v_n - v_nm, and then

    theta2_i = (1/2) [ d sqrt(1 + 4 lambda / (a_i^2 d)) - (v_n + v_nm) ]_+.

The bracket is positive iff a_i^2 < m lambda (note v_n v_nm / d = 1/m), so
with nondecreasing weights the active set is a prefix.
"""

from dataclasses import dataclass

import numpy as np

from .core import DesignSizes, EllipsoidSpec
from .risks import gaussian_prior_bayes_risk, predictive_params

_MAX_DOUBLINGS = 200
_MAX_BISECT = 200


class SolverError(RuntimeError):
    """Waterfilling bracket search failed to enclose the target."""


@dataclass(frozen=True, eq=False)
class WaterfillSolution:
    lam: float
    theta2: np.ndarray
    cutoff: int
    risk: float


def _check_solvable(spec):
    if spec.weights[0] == 0.0:
        raise ValueError(
            "zero ellipsoid weights leave coordinates unconstrained; the "
            "least-favorable variance there is unbounded"
        )


def _lhs(lam, a2, sizes):
    # active set {a_i^2 < m lam} is a prefix of the sorted weights
    cut = np.searchsorted(a2, sizes.m * lam, side="left")
    if cut == 0:
        return 0.0
    head = a2[:cut]
    d = sizes.v_n - sizes.v_nm
    bracket = d * np.sqrt(1.0 + 4.0 * lam / (head * d)) - (sizes.v_n + sizes.v_nm)
    return float(np.maximum(bracket, 0.0) @ head)


def waterfill_lhs(lam, spec: EllipsoidSpec, sizes: DesignSizes) -> float:
    """Budget used at water level lam (the constraint LHS)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    _check_solvable(spec)
    if spec.n != sizes.n:
        raise ValueError(f"spec has {spec.n} coordinates, expected {sizes.n}")
    return _lhs(lam, spec.weights**2, sizes)


def solve_lambda(spec: EllipsoidSpec, sizes: DesignSizes, tol: float = 1e-12) -> float:
    """Bisect for the water level with budget 2C, to relative residual tol.

    The LHS is continuous, nondecreasing, and unbounded in lam, so a bracket
    always exists.  For radii near the double-precision floor the residual
    test can be unreachable; bisection then runs the bracket down to machine
    width and returns the midpoint.
    """
    _check_solvable(spec)
    if spec.n != sizes.n:
        raise ValueError(f"spec has {spec.n} coordinates, expected {sizes.n}")
    if not (tol > 0):
        raise ValueError("tol must be positive")
    a2 = spec.weights**2
    target = 2.0 * spec.radius

    hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if _lhs(hi, a2, sizes) >= target:
            break
        hi *= 2.0
    else:
        raise SolverError(f"no bracket: LHS({hi}) < {target} after {_MAX_DOUBLINGS} doublings")

    lo = 0.0
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        val = _lhs(mid, a2, sizes)
        if abs(val - target) <= tol * target:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).eps * hi:
            break
    return 0.5 * (lo + hi)


def least_favorable(
    spec: EllipsoidSpec,
    sizes: DesignSizes,
    tol: float = 1e-12,
    closed_form: bool = True,
) -> WaterfillSolution:
    """Least-favorable prior variances, cutoff index and minimax risk R_L.

    For the L2 ball with n = m the solution is closed form
    (theta2_i = C/n, lam = (1+C)(1+2C)/n) and the bisection is skipped
    unless closed_form=False.
    """
    _check_solvable(spec)
    if spec.n != sizes.n:
        raise ValueError(f"spec has {spec.n} coordinates, expected {sizes.n}")
    C = spec.radius
    if closed_form and spec.family == "l2ball" and sizes.n == sizes.m:
        lam = (1.0 + C) * (1.0 + 2.0 * C) / sizes.n
        theta2 = np.full(sizes.n, C / sizes.n)
    else:
        lam = solve_lambda(spec, sizes, tol=tol)
        d = sizes.v_n - sizes.v_nm
        a2 = spec.weights**2
        bracket = d * np.sqrt(1.0 + 4.0 * lam / (a2 * d)) - (sizes.v_n + sizes.v_nm)
        theta2 = np.maximum(0.5 * bracket, 0.0)
    # ties a_i^2 = m lam get theta2 = 0 but still count toward the cutoff
    cutoff = int(np.searchsorted(spec.weights**2, sizes.m * lam, side="right"))
    risk = gaussian_prior_bayes_risk(theta2, sizes)
    return WaterfillSolution(lam=float(lam), theta2=theta2, cutoff=cutoff, risk=risk)


def minimax_predictive(x, solution: WaterfillSolution, sizes: DesignSizes):
    """Posterior predictive of the least-favorable prior at observed x."""
    return predictive_params(x, solution.theta2, sizes)


def pinsker_estimation_baseline(spec: EllipsoidSpec, noise_var: float, tol: float = 1e-12):
    """Minimax linear *estimation* problem on the same ellipsoid.

    Least-favorable variances theta*_i^2 = v (mu/a_i - 1)_+ with mu solving
    v sum_i a_i (mu - a_i)_+ = C; returns (theta_star2, est_risk) with
    est_risk = sum_i v theta*_i^2 / (v + theta*_i^2).  For the L2 ball this
    collapses to est_risk = C/(1+C) at v = 1/n.
    """
    _check_solvable(spec)
    if not (noise_var > 0):
        raise ValueError("noise_var must be positive")
    a = spec.weights
    C = spec.radius
    cum_a = np.cumsum(a)
    cum_a2 = np.cumsum(a * a)

    def budget(mu):
        cut = np.searchsorted(a, mu, side="left")
        if cut == 0:
            return 0.0
        return noise_var * (mu * cum_a[cut - 1] - cum_a2[cut - 1])

    hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if budget(hi) >= C:
            break
        hi *= 2.0
    else:
        raise SolverError("no bracket for the estimation water level")

    lo = 0.0
    for _ in range(_MAX_BISECT):
        mu = 0.5 * (lo + hi)
        val = budget(mu)
        if abs(val - C) <= tol * C:
            break
        if val < C:
            lo = mu
        else:
            hi = mu
        if hi - lo <= np.finfo(float).eps * hi:
            break
    mu = 0.5 * (lo + hi)

    theta_star2 = noise_var * np.maximum(mu / a - 1.0, 0.0)
    est_risk = float(np.sum(noise_var * theta_star2 / (noise_var + theta_star2)))
    return theta_star2, est_risk
