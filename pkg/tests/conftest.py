import numpy as np

from predminimax import EllipsoidSpec


def random_spec(rng, n=None, family=None):
    """Random ellipsoid with a sane radius range for solver tests."""
    if n is None:
        n = int(rng.integers(3, 10001))
    if family is None:
        family = str(rng.choice(["l2ball", "sobolev", "custom"]))
    C = float(10.0 ** rng.uniform(-1.5, 1.0))
    if family == "l2ball":
        return EllipsoidSpec.l2ball(n, C)
    if family == "sobolev":
        return EllipsoidSpec.sobolev(n, float(rng.uniform(0.3, 3.0)), C)
    w = np.sort(rng.uniform(0.2, 5.0, n))
    return EllipsoidSpec(w, C)
