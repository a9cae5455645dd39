"""Asymptotic minimax constants and the lower-bound machinery.

Over an L2 ball with m = n the minimax risk converges to the dimension-free
constant (1/2) log((1+2C)/(1+C)).  Over a Sobolev ellipsoid the risk decays
at rate n^{-2 alpha/(2 alpha+1)}; the constant is pinned between K M/4 and
K M/2 where M and K come from a closed-form alternating series.

The lower-bound route constructs a shrunken version of the least-favorable
prior that concentrates on the ellipsoid, and bounds the minimax risk below
by that prior's Bayes risk.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import DesignSizes, EllipsoidSpec, as_variances
from .risks import gaussian_prior_bayes_risk
from .waterfill import WaterfillSolution, least_favorable

_SERIES_TAIL_TOL = 1e-14


def l2ball_limit_constant(C: float) -> float:
    """Limit of R_L over the radius-C L2 ball with m = n:
    (1/2) log((1+2C)/(1+C)).  This value is exact at every finite n."""
    if not (C > 0):
        raise ValueError("C must be positive")
    return 0.5 * (math.log1p(2.0 * C) - math.log1p(C))


def sobolev_series_term(k: int, alpha: float) -> float:
    """Term k of the alternating series behind the Sobolev constants:

        2 sqrt(2) (-1)^k (2k)! / ((1-2k) (k!)^2 32^k) / ((2k+1) alpha + 1).

    The coefficient equals 2 sqrt(2) C(2k,k) / ((1-2k) 32^k); successive
    terms shrink by a factor approaching 1/8.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if not (alpha > 0):
        raise ValueError("alpha must be positive")
    coef = 2.0 * math.sqrt(2.0) * (-1) ** k * math.comb(2 * k, k) / ((1 - 2 * k) * 32.0**k)
    return coef / ((2 * k + 1) * alpha + 1)


def _series_sum(alpha, kmax):
    if kmax < 20:
        raise ValueError(f"kmax must be >= 20, got {kmax}")
    total = 0.0
    for k in range(kmax + 1):
        total += sobolev_series_term(k, alpha)
    # geometric tail bound with observed ratio < 1/4
    tail = abs(sobolev_series_term(kmax, alpha)) / 3.0
    if tail > _SERIES_TAIL_TOL:
        raise ValueError(f"series tail {tail:.3e} above {_SERIES_TAIL_TOL} at kmax={kmax}")
    return total


def sobolev_M(alpha: float, C: float, kmax: int = 40) -> float:
    """Scaling constant M in the cutoff law N ~ M n^{1/(2 alpha + 1)}.

    M = (4 C / (S - 3/(2 alpha + 1)))^{1/(2 alpha + 1)} with S the series
    sum; scales as C^{1/(2 alpha + 1)}.
    """
    if not (C > 0):
        raise ValueError("C must be positive")
    S = _series_sum(alpha, kmax)
    denom = S - 3.0 / (2.0 * alpha + 1.0)
    if denom <= 0:
        raise ValueError(f"series sum gives nonpositive denominator {denom}")
    return (4.0 * C / denom) ** (1.0 / (2.0 * alpha + 1.0))


def sobolev_K(alpha: float, kmax: int = 40) -> float:
    """Risk constant K = 1 + 1/(2(2 alpha + 1)) - S/2, independent of C."""
    S = _series_sum(alpha, kmax)
    return 1.0 + 0.5 / (2.0 * alpha + 1.0) - 0.5 * S


@dataclass(frozen=True)
class SobolevConstants:
    alpha: float
    C: float
    M: float
    K: float
    rate_exponent: float
    bracket: tuple

    def __post_init__(self):
        if not (0.0 < self.K < 2.0):
            raise ValueError(f"K out of range (0, 2): {self.K}")


def sobolev_constants(alpha: float, C: float = 1.0, kmax: int = 40) -> SobolevConstants:
    """Bundle (M, K, rate exponent, constant bracket) for one (alpha, C)."""
    M = sobolev_M(alpha, C, kmax=kmax)
    K = sobolev_K(alpha, kmax=kmax)
    rate = 2.0 * alpha / (2.0 * alpha + 1.0)
    return SobolevConstants(
        alpha=float(alpha),
        C=float(C),
        M=M,
        K=K,
        rate_exponent=rate,
        bracket=(0.25 * K * M, 0.5 * K * M),
    )


def rate_constant_extract(alpha, C, n_list, m_ratio: int = 1, tol: float = 1e-12):
    """Scaled risks n^{2a/(2a+1)} R_L(n) along a ladder of sample sizes.

    Returns a list of (n, scaled) pairs; the scaled values settle inside the
    bracket (K M/4, K M/2) as n grows.
    """
    rate = 2.0 * alpha / (2.0 * alpha + 1.0)
    out = []
    for n in n_list:
        n = int(n)
        spec = EllipsoidSpec.sobolev(n, alpha, C)
        sizes = DesignSizes(n, m_ratio * n)
        sol = least_favorable(spec, sizes, tol=tol)
        out.append((n, float(n**rate * sol.risk)))
    return out


def check_prior_condition(s2, spec: EllipsoidSpec, sizes: DesignSizes, alpha_cond: float = 1.5) -> bool:
    """Concentration condition on prior variances s2:

    sum a_i^2 s_i + sqrt(8 alpha_cond log(1/v_n) sum a_i^4 s_i^2) <= C.

    Priors passing it put all but O(v_n^alpha_cond) mass on the ellipsoid.
    gamma_shrink output lands exactly on the boundary, so a relative 1e-10
    slack absorbs rounding there.
    """
    s2 = as_variances(s2, n=spec.n)
    if not (alpha_cond > 1):
        raise ValueError("alpha_cond must exceed 1")
    a2 = spec.weights**2
    lin = float(a2 @ s2)
    quad = float((a2 * a2) @ (s2 * s2))
    lhs = lin + math.sqrt(8.0 * alpha_cond * quad * math.log(1.0 / sizes.v_n))
    return lhs <= spec.radius * (1.0 + 1e-10)


def gamma_shrink(solution: WaterfillSolution, spec: EllipsoidSpec, sizes: DesignSizes,
                 alpha_cond: float = 1.5):
    """Shrink the least-favorable variances onto the concentration condition.

    gamma = sqrt(8 alpha_cond log(1/v_n) sum a_i^4 theta2_i^2) / C and
    b2_i = theta2_i / (1 + gamma); returns (gamma, b2).  Since the
    least-favorable prior saturates sum a_i^2 theta2_i = C, the shrunken b2
    satisfies check_prior_condition by construction.
    """
    if not (alpha_cond > 1):
        raise ValueError("alpha_cond must exceed 1")
    t2 = as_variances(solution.theta2, n=spec.n, name="theta2")
    a2 = spec.weights**2
    quad = float((a2 * a2) @ (t2 * t2))
    gamma = math.sqrt(8.0 * alpha_cond * quad * math.log(1.0 / sizes.v_n)) / spec.radius
    return gamma, t2 / (1.0 + gamma)


def kl_lower_bound(s2, sizes: DesignSizes) -> float:
    """Main term of the minimax lower bound from a concentrated prior: the
    prior's Bayes risk.  The neglected remainder is O(v_n^alpha_cond); see
    lower_bound_remainder."""
    return gaussian_prior_bayes_risk(s2, sizes)


def lower_bound_remainder(sizes: DesignSizes, alpha_cond: float = 1.5) -> float:
    """Order of the terms dropped from kl_lower_bound."""
    return sizes.v_n**alpha_cond


def gaussian_quadratic_tail_bound(sigma2, Q: float) -> float:
    """Upper bound on P(sum sigma_i^2 Z_i^2 > Q) for independent standard
    normals: exp(-(Q - s1)^2 / (4 s2)) with s1 = sum sigma_i^2,
    s2 = sum sigma_i^4, valid for Q > s1 (returns 1 otherwise).

    Only a genuine bound in the sub-Gaussian regime
    (Q - s1) * max(sigma_i^2) << s2; beyond it the exact tail decays at the
    slower exp(-x / (4 max sigma^2)) rate and can exceed this expression by
    orders of magnitude.  For gamma_shrink priors the regime ratio shrinks
    like sqrt(log(n) / N), so the bound is asymptotic in n.
    """
    sig2 = as_variances(sigma2, name="sigma2")
    s1 = float(sig2.sum())
    if Q <= s1:
        return 1.0
    s2 = float(sig2 @ sig2)
    if s2 == 0.0:
        return 0.0
    return math.exp(-((Q - s1) ** 2) / (4.0 * s2))
