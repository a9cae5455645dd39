"""Exact KL risks of Gaussian predictive rules in the sequence model.

All risks are per-future-observation Kullback-Leibler values in nats: the
joint KL between the true density of the future block and the predictive
density, divided by m.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import DesignSizes, as_coefficients, as_variances


@dataclass(frozen=True, eq=False)
class PredictiveGaussian:
    """Diagonal Gaussian predictive density N(mean_i, var_i) per coordinate."""

    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        mean = as_coefficients(self.mean, name="mean")
        var = as_coefficients(self.var, n=mean.size, name="var")
        if np.any(var <= 0):
            raise ValueError("predictive variances must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)


def uniform_prior_risk(sizes: DesignSizes) -> float:
    """Risk of the flat-prior rule N(x, (v_n + v_m) I): (n/2m) log(v_n/v_nm).

    Constant in theta.  Note (v_n+v_m)/v_m = v_n/v_nm, so this also reads as
    the normalized log variance ratio of the posterior predictive under an
    improper uniform prior.
    """
    return sizes.n / (2.0 * sizes.m) * math.log1p(sizes.m / sizes.n)


def linear_risk(theta, s2, sizes: DesignSizes) -> float:
    """Exact risk of the Bayes predictive rule for the prior N(0, diag(s2)).

    R(theta) = (n/2m) log(v_n/v_nm)
             + (1/2m) sum_i [ log((v_nm+s_i)/(v_n+s_i))
                              + (v_nm+theta_i^2)/(v_nm+s_i)
                              - (v_n+theta_i^2)/(v_n+s_i) ].
    """
    th = as_coefficients(theta, n=sizes.n)
    s2 = as_variances(s2, n=sizes.n)
    vn, vnm = sizes.v_n, sizes.v_nm
    t2 = th * th
    terms = (
        np.log((vnm + s2) / (vn + s2))
        + (vnm + t2) / (vnm + s2)
        - (vn + t2) / (vn + s2)
    )
    return uniform_prior_risk(sizes) + float(terms.sum()) / (2.0 * sizes.m)


def gaussian_prior_bayes_risk(s2, sizes: DesignSizes) -> float:
    """Bayes risk of the N(0, diag(s2)) prior: its rule's risk averaged over
    theta ~ N(0, diag(s2)).

    Equals (n/2m) log(v_n/v_nm) + (1/2m) sum_i log((v_nm+s_i)/(v_n+s_i)),
    evaluated in the cancellation-free form
    (1/2m) sum_i log1p((v_n-v_nm) s_i / (v_nm (v_n+s_i))), so zero entries
    contribute exactly 0.  Also the value of oracle_risk at theta_i^2 = s_i.
    """
    s2 = as_variances(s2, n=sizes.n)
    vn, vnm = sizes.v_n, sizes.v_nm
    x = (vn - vnm) * s2 / (vnm * (vn + s2))
    return float(np.log1p(x).sum()) / (2.0 * sizes.m)


def oracle_risk(theta, sizes: DesignSizes) -> float:
    """Infimum over priors of linear_risk at fixed theta, attained at
    s_i = theta_i^2."""
    th = as_coefficients(theta, n=sizes.n)
    return gaussian_prior_bayes_risk(th * th, sizes)


def plugin_risk(theta, shrink, sizes: DesignSizes) -> float:
    """Risk of the plug-in rule N(c_i x_i, v_m):
    (1/(2 m v_m)) sum_i [c_i^2 v_n + (1-c_i)^2 theta_i^2].

    shrink coefficients must lie in [0, 1].
    """
    th = as_coefficients(theta, n=sizes.n)
    c = as_coefficients(shrink, n=sizes.n, name="shrink")
    if np.any(c < 0) or np.any(c > 1):
        raise ValueError("shrink coefficients must lie in [0, 1]")
    val = c * c * sizes.v_n + (1.0 - c) ** 2 * th * th
    return float(val.sum()) / (2.0 * sizes.m * sizes.v_m)


def predictive_params(x, s2, sizes: DesignSizes) -> PredictiveGaussian:
    """Posterior predictive N(mean, var) for the prior N(0, diag(s2)) given
    observed coefficients x.

    mean_i = s_i/(s_i+v_n) x_i,  var_i = s_i v_n/(s_i+v_n) + v_m >= v_m.
    """
    x = as_coefficients(x, n=sizes.n, name="x")
    s2 = as_variances(s2, n=sizes.n)
    shrink = s2 / (s2 + sizes.v_n)
    return PredictiveGaussian(shrink * x, shrink * sizes.v_n + sizes.v_m)


def kl_true_vs_predictive(theta, pred: PredictiveGaussian, sizes: DesignSizes) -> float:
    """Per-observation KL between the true future law N(theta, v_m I) and a
    diagonal Gaussian predictive:

    (1/m) sum_i [ log sqrt(var_i/v_m)
                  + (v_m + (theta_i-mean_i)^2)/(2 var_i) - 1/2 ].
    """
    th = as_coefficients(theta, n=sizes.n)
    if pred.mean.size != sizes.n:
        raise ValueError(f"predictive has {pred.mean.size} coordinates, expected {sizes.n}")
    vm = sizes.v_m
    dev = th - pred.mean
    terms = 0.5 * np.log(pred.var / vm) + (vm + dev * dev) / (2.0 * pred.var) - 0.5
    return float(terms.sum()) / sizes.m
