"""Monte Carlo validation of the closed-form risks.

Sampling design
---------------
Replicates are partitioned into fixed-size chunks of 4096; chunk j of an
operation draws from an independent Philox substream keyed by
SeedSequence([seed, stream_id, j]) (plus a coordinate key where noted), and
per-chunk sums are accumulated in chunk order.  The partition and key layout
do not depend on scheduling, so results are bitwise reproducible for a given
seed, and a parallel driver combining per-chunk partial sums in chunk order
would produce identical output.  Normal variates come from numpy's
Generator.standard_normal (ziggurat).

Estimators are Rao-Blackwellized by default: the KL integrand is averaged in
closed form over the future block given the past, so only past draws are
simulated.  The raw two-sample form is available via rao_blackwell=False.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DesignSizes,
    EllipsoidSpec,
    as_coefficients,
    as_variances,
    design_matrix,
    sample_grid,
)
from .risks import uniform_prior_risk

_CHUNK = 4096

_STREAM_SIMULATE = 1
_STREAM_LINEAR = 2
_STREAM_RULE = 3
_STREAM_EQ_REGRESSION = 4
_STREAM_EQ_SEQUENCE = 5
_STREAM_TAIL = 6
_STREAM_PLUGIN_SIM = 7
_STREAM_PLUGIN_IND = 8


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with std_error = sample sd / sqrt(replicates)."""

    mean: float
    std_error: float
    replicates: int
    seed: int


@dataclass(frozen=True, eq=False)
class EquivalenceResult:
    """Regression-space and sequence-space estimates of the same risk.

    ztilde_gap is the largest absolute difference between the log densities
    assigned to the orthogonal-complement block by the true and predictive
    joint laws; the factor is common to both, so the gap is exactly 0.
    """

    regression: McEstimate
    sequence: McEstimate
    closed_form: float
    ztilde_gap: float


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def _chunk_gen(keys):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(keys)))


def _mc_run(chunk_fn, replicates, seed, stream, coord_key=None):
    """Drive chunk_fn(gen, k) -> (k,) values over the fixed chunk partition.

    Args:
        chunk_fn: draws and evaluates one chunk of replicates.
        replicates: total number of replicates (>= 2 for a std error).
        seed: base seed recorded in the estimate.
        stream: per-operation stream id keyed into the substreams.
        coord_key: optional extra key for per-coordinate substreams.

    Returns:
        McEstimate over all replicates.
    """
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    seed = _check_seed(seed)
    base = [seed, stream] if coord_key is None else [seed, stream, coord_key]
    total = 0.0
    total_sq = 0.0
    done = 0
    index = 0
    while done < replicates:
        k = min(_CHUNK, replicates - done)
        vals = chunk_fn(_chunk_gen(base + [index]), k)
        total += float(vals.sum())
        total_sq += float(vals @ vals)
        done += k
        index += 1
    mean = total / replicates
    var = max(total_sq - replicates * mean * mean, 0.0) / (replicates - 1)
    return McEstimate(
        mean=mean,
        std_error=math.sqrt(var / replicates),
        replicates=replicates,
        seed=seed,
    )


def _check_grid(sizes):
    if sizes.n % 2 == 0:
        raise ValueError(f"grid mode requires odd n (Nyquist), got n={sizes.n}")
    if sizes.m % sizes.n != 0:
        raise ValueError(f"grid mode requires m to be a multiple of n, got {sizes.m}/{sizes.n}")


def simulate_pair(theta, sizes: DesignSizes, seed: int = 0):
    """Draw one regression-space pair (y, ytilde) with unit noise.

    y_i = f(t_i) + e_i on t_i = i/n and ytilde_j = f(u_j) + etilde_j on
    u_j = j/m, where f = sum theta_j phi_j.  Requires odd n and m a
    multiple of n.
    """
    _check_grid(sizes)
    th = as_coefficients(theta, n=sizes.n)
    gen = _chunk_gen([_check_seed(seed), _STREAM_SIMULATE, 0])
    f_a = design_matrix(sample_grid(sizes.n), sizes.n) @ th
    f_b = design_matrix(sample_grid(sizes.m), sizes.n) @ th
    y = f_a + gen.standard_normal(sizes.n)
    ytilde = f_b + gen.standard_normal(sizes.m)
    return y, ytilde


def mc_rule_risk(theta, coef, var, sizes: DesignSizes, replicates: int = 10000,
                 seed: int = 0, rao_blackwell: bool = True,
                 _stream: int = _STREAM_RULE) -> McEstimate:
    """Monte Carlo risk of the diagonal rule N(coef_i x_i, var_i).

    Args:
        theta: true coefficients.
        coef: per-coordinate mean multipliers.
        var: per-coordinate predictive variances (must be > 0).
        rao_blackwell: average over the future block in closed form given
            each past draw (default) rather than sampling it.

    Returns:
        McEstimate of the per-observation KL risk.
    """
    th = as_coefficients(theta, n=sizes.n)
    coef = as_coefficients(coef, n=sizes.n, name="coef")
    var = as_coefficients(var, n=sizes.n, name="var")
    if np.any(var <= 0):
        raise ValueError("predictive variances must be positive")
    vn, vm, m, n = sizes.v_n, sizes.v_m, sizes.m, sizes.n
    rt_vn = math.sqrt(vn)
    log_term = 0.5 * float(np.log(var / vm).sum())

    if rao_blackwell:

        def chunk(gen, k):
            x = th + rt_vn * gen.standard_normal((k, n))
            dev = th - coef * x
            return (log_term + ((vm + dev * dev) / (2.0 * var)).sum(axis=1) - 0.5 * n) / m

    else:
        rt_vm = math.sqrt(vm)

        def chunk(gen, k):
            x = th + rt_vn * gen.standard_normal((k, n))
            xt = th + rt_vm * gen.standard_normal((k, n))
            dev = xt - coef * x
            quad = (dev * dev / (2.0 * var)).sum(axis=1)
            true_quad = ((xt - th) ** 2).sum(axis=1) / (2.0 * vm)
            return (log_term + quad - true_quad) / m

    return _mc_run(chunk, replicates, seed, _stream)


def mc_linear_risk(theta, s2, sizes: DesignSizes, replicates: int = 10000,
                   seed: int = 0, rao_blackwell: bool = True) -> McEstimate:
    """Monte Carlo check of linear_risk for the prior N(0, diag(s2))."""
    s2 = as_variances(s2, n=sizes.n)
    shrink = s2 / (s2 + sizes.v_n)
    var = shrink * sizes.v_n + sizes.v_m
    return mc_rule_risk(theta, shrink, var, sizes, replicates=replicates,
                        seed=seed, rao_blackwell=rao_blackwell,
                        _stream=_STREAM_LINEAR)


def mc_equivalence_check(theta, sizes: DesignSizes, replicates: int = 10000,
                         seed: int = 0) -> EquivalenceResult:
    """Same flat-prior risk estimated in regression space and sequence space.

    Regression space: y and ytilde are simulated on their grids, mapped to
    (x, xtilde, ztilde) where ztilde collects the m-n directions of ytilde
    orthogonal to the function space.  The ztilde factor of the joint true
    and predictive densities is identical and cancels; it is computed on
    both sides anyway and the (exactly zero) gap is reported.

    Sequence space: x and xtilde are drawn directly per coordinate.

    Both estimate (n/2m) log(v_n/v_nm), returned as closed_form.
    """
    _check_grid(sizes)
    th = as_coefficients(theta, n=sizes.n)
    n, m = sizes.n, sizes.m
    vn, vm = sizes.v_n, sizes.v_m
    pvar = vn + vm

    phi_a = design_matrix(sample_grid(n), n)
    phi_b = design_matrix(sample_grid(m), n)
    f_a = phi_a @ th
    f_b = phi_b @ th
    # orthonormal basis of the complement of col(phi_b) in R^m
    comp = np.linalg.svd(phi_b, full_matrices=True)[0][:, n:]
    rt_m = math.sqrt(m)

    log_norm_true = -0.5 * n * math.log(2.0 * math.pi * vm)
    log_norm_pred = -0.5 * n * math.log(2.0 * math.pi * pvar)
    log_norm_z = -0.5 * (m - n) * math.log(2.0 * math.pi * vm)
    gap = [0.0]

    def chunk_regression(gen, k):
        y = f_a + gen.standard_normal((k, n))
        yt = f_b + gen.standard_normal((k, m))
        x = y @ phi_a / n
        xt = yt @ phi_b / m
        zt = yt @ comp / rt_m
        z_quad = (zt * zt).sum(axis=1)
        logp_true = log_norm_true - ((xt - th) ** 2).sum(axis=1) / (2.0 * vm)
        logp_pred = log_norm_pred - ((xt - x) ** 2).sum(axis=1) / (2.0 * pvar)
        logz_true = log_norm_z - z_quad / (2.0 * vm)
        logz_pred = log_norm_z - z_quad / (2.0 * vm)
        z_gap = logz_true - logz_pred
        gap[0] = max(gap[0], float(np.abs(z_gap).max()))
        return ((logp_true - logp_pred) + z_gap) / m

    def chunk_sequence(gen, k):
        x = th + math.sqrt(vn) * gen.standard_normal((k, n))
        xt = th + math.sqrt(vm) * gen.standard_normal((k, n))
        quad_pred = ((xt - x) ** 2).sum(axis=1) / (2.0 * pvar)
        quad_true = ((xt - th) ** 2).sum(axis=1) / (2.0 * vm)
        return (0.5 * n * math.log(pvar / vm) + quad_pred - quad_true) / m

    reg = _mc_run(chunk_regression, replicates, seed, _STREAM_EQ_REGRESSION)
    seq = _mc_run(chunk_sequence, replicates, seed, _STREAM_EQ_SEQUENCE)
    return EquivalenceResult(
        regression=reg,
        sequence=seq,
        closed_form=uniform_prior_risk(sizes),
        ztilde_gap=gap[0],
    )


def mc_prior_tail(s2, spec: EllipsoidSpec, replicates: int = 100000,
                  seed: int = 0) -> McEstimate:
    """Monte Carlo P(theta outside the ellipsoid) for theta ~ N(0, diag(s2))."""
    s2 = as_variances(s2, n=spec.n)
    scale = np.sqrt(s2)
    a2 = spec.weights**2
    C = spec.radius

    def chunk(gen, k):
        th = scale * gen.standard_normal((k, spec.n))
        return ((th * th) @ a2 > C).astype(float)

    return _mc_run(chunk, replicates, seed, _STREAM_TAIL)


def individual_vs_simultaneous_plugin(theta, shrink, sizes: DesignSizes,
                                      replicates: int = 10000, seed: int = 0):
    """Plug-in risk estimated jointly versus coordinate by coordinate.

    The simultaneous estimator draws full vectors and averages the joint
    normalized squared-error gap; the individual estimator runs an
    independent scalar estimate per coordinate (own substream) and sums,
    with std_error = sqrt(sum of per-coordinate variances), valid because
    coordinates are independent.  Both target plugin_risk(theta, shrink).

    Returns:
        (individual, simultaneous) McEstimates.
    """
    th = as_coefficients(theta, n=sizes.n)
    c = as_coefficients(shrink, n=sizes.n, name="shrink")
    if np.any(c < 0) or np.any(c > 1):
        raise ValueError("shrink coefficients must lie in [0, 1]")
    n, m = sizes.n, sizes.m
    vn, vm = sizes.v_n, sizes.v_m
    rt_vn, rt_vm = math.sqrt(vn), math.sqrt(vm)
    scale = 2.0 * m * vm

    def chunk_sim(gen, k):
        x = th + rt_vn * gen.standard_normal((k, n))
        xt = th + rt_vm * gen.standard_normal((k, n))
        dev = xt - c * x
        true_dev = xt - th
        return ((dev * dev).sum(axis=1) - (true_dev * true_dev).sum(axis=1)) / scale

    sim = _mc_run(chunk_sim, replicates, seed, _STREAM_PLUGIN_SIM)

    means = np.empty(n)
    variances = np.empty(n)
    for j in range(n):

        def chunk_one(gen, k, j=j):
            x = th[j] + rt_vn * gen.standard_normal(k)
            xt = th[j] + rt_vm * gen.standard_normal(k)
            return ((xt - c[j] * x) ** 2 - (xt - th[j]) ** 2) / scale

        est = _mc_run(chunk_one, replicates, seed, _STREAM_PLUGIN_IND, coord_key=j)
        means[j] = est.mean
        variances[j] = est.std_error**2

    ind = McEstimate(
        mean=float(means.sum()),
        std_error=math.sqrt(float(variances.sum())),
        replicates=replicates,
        seed=_check_seed(seed),
    )
    return ind, sim
