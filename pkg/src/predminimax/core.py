"""Gaussian sequence model primitives.

Regression observations y_i = f(t_i) + e_i on the uniform grid t_i = i/n,
i = 1..n, are mapped to sequence-space coefficients x = (1/n) Phi_A' y in the
trigonometric basis.  A future sample of size m >= n lives on its own grid
u_j = j/m.  Coordinate-wise the model is

    x_i ~ N(theta_i, v_n),   xtilde_i ~ N(theta_i, v_m),

with v_n = 1/n, v_m = 1/m and pooled variance v_nm = 1/(n+m).

Smoothness classes are ellipsoids {theta : sum_i a_i^2 theta_i^2 <= C} with
nonnegative nondecreasing weights a_i.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = math.sqrt(2.0)


def as_coefficients(theta, n=None, name="theta"):
    """Validate and return a 1-d float coefficient vector."""
    th = np.asarray(theta, dtype=float)
    if th.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {th.shape}")
    if not np.all(np.isfinite(th)):
        raise ValueError(f"{name} must be finite")
    if n is not None and th.size != n:
        raise ValueError(f"{name} has length {th.size}, expected {n}")
    return th


def as_variances(s2, n=None, name="s2"):
    """Validate a vector of per-coordinate variances (zeros allowed)."""
    v = as_coefficients(s2, n=n, name=name)
    if np.any(v < 0):
        raise ValueError(f"{name} must be nonnegative")
    return v


@dataclass(frozen=True)
class DesignSizes:
    """Past/future sample sizes with the derived noise variances."""

    n: int
    m: int
    v_n: float = field(init=False, repr=False)
    v_m: float = field(init=False, repr=False)
    v_nm: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.m < self.n:
            raise ValueError(f"m must be >= n, got m={self.m} < n={self.n}")
        object.__setattr__(self, "v_n", 1.0 / self.n)
        object.__setattr__(self, "v_m", 1.0 / self.m)
        object.__setattr__(self, "v_nm", 1.0 / (self.n + self.m))


@dataclass(frozen=True, eq=False)
class EllipsoidSpec:
    """Ellipsoid {theta : sum a_i^2 theta_i^2 <= radius}.

    weights must be nonnegative and nondecreasing; family is one of
    "l2ball", "sobolev", "custom" (alpha is set for the Sobolev family).
    """

    weights: np.ndarray
    radius: float
    family: str = "custom"
    alpha: float | None = None

    def __post_init__(self):
        w = as_coefficients(self.weights, name="weights")
        if w.size == 0:
            raise ValueError("weights must be nonempty")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diff(w) < 0):
            raise ValueError("weights must be nondecreasing")
        if not (self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.family not in ("l2ball", "sobolev", "custom"):
            raise ValueError(f"unknown family {self.family!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.size

    @classmethod
    def l2ball(cls, n, radius):
        return cls(np.ones(n), radius, family="l2ball")

    @classmethod
    def sobolev(cls, n, alpha, radius):
        """Trigonometric Sobolev weights: a_1 = 1 (constant function),
        a_{2k} = a_{2k+1} = (2k)^alpha for the sin/cos pair at frequency k."""
        if not (alpha > 0):
            raise ValueError(f"alpha must be positive, got {alpha}")
        k = (np.arange(n) + 1) // 2
        w = (2.0 * k) ** alpha
        w[0] = 1.0
        return cls(w, radius, family="sobolev", alpha=float(alpha))


def trig_basis(j, t):
    """Evaluate the j-th trigonometric basis function at points t.

    phi_0 = 1, phi_{2k-1}(t) = sqrt(2) sin(2 pi k t),
    phi_{2k}(t) = sqrt(2) cos(2 pi k t).
    """
    if j < 0:
        raise ValueError("basis index must be >= 0")
    t = np.asarray(t, dtype=float)
    if j == 0:
        return np.ones_like(t)
    k = (j + 1) // 2
    if j % 2:
        return _SQRT2 * np.sin(2.0 * np.pi * k * t)
    return _SQRT2 * np.cos(2.0 * np.pi * k * t)


def design_matrix(points, n_funcs):
    """Matrix with entries phi_j(points_i), j = 0..n_funcs-1."""
    pts = np.asarray(points, dtype=float)
    out = np.empty((pts.size, n_funcs))
    for j in range(n_funcs):
        out[:, j] = trig_basis(j, pts)
    return out


def sample_grid(n):
    """The design grid t_i = i/n, i = 1..n."""
    return np.arange(1, n + 1) / n


def sequence_transform(y, sizes):
    """Map regression observations y on the grid t_i = i/n to coefficients
    x = (1/n) Phi_A' y.

    Requires odd n: for even n the top sine column of Phi_A vanishes on the
    grid (Nyquist), Phi_A' Phi_A = n I fails and the map is not invertible.
    Computed via an FFT on the cyclically aligned grid (t_i = i/n are the
    n-th roots of unity, with t_n identified with 0), which agrees with the
    direct matrix product to rounding and costs O(n log n).
    """
    n = sizes.n
    if n % 2 == 0:
        raise ValueError(f"sequence_transform requires odd n, got {n}")
    y = as_coefficients(y, n=n, name="y")
    half = (n - 1) // 2
    # index r of the DFT grid r/n corresponds to observation at t = r/n,
    # i.e. y[r-1] for r >= 1 and y[n-1] for r = 0
    coef = np.fft.rfft(np.roll(y, 1))
    x = np.empty(n)
    x[0] = coef[0].real / n
    x[1::2] = -_SQRT2 * coef[1 : half + 1].imag / n
    x[2::2] = _SQRT2 * coef[1 : half + 1].real / n
    return x


def synthesize_function(theta, t):
    """Evaluate f = sum_j theta_j phi_j at points t."""
    th = as_coefficients(theta)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for j, c in enumerate(th):
        if c != 0.0:
            out = out + c * trig_basis(j, t)
    return out


def truncation_bias(theta_tail, m):
    """KL contribution (1/2m) sum theta_tail^2 of coefficients dropped
    beyond the first n."""
    tail = as_coefficients(theta_tail, name="theta_tail")
    if m < 1:
        raise ValueError("m must be >= 1")
    return float(tail @ tail) / (2.0 * m)


def ellipsoid_contains(theta, spec):
    """Whether sum a_i^2 theta_i^2 <= radius (boundary included)."""
    th = as_coefficients(theta, n=spec.n)
    return bool((spec.weights**2) @ (th**2) <= spec.radius)
