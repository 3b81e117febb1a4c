"""Synthetic manifolds for evaluation."""

import numpy as np


def swiss_roll_arclength(t):
    """Arc length of the spiral ``(t cos t, t sin t)`` measured from ``t = 0``."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (t * np.sqrt(1.0 + t * t) + np.arcsinh(t))


def synth_swiss_roll(n, noise=0.0, seed=0):
    """Sample a Swiss roll.

    Returns ``(X, intrinsic)``: ``X`` is 3 x n with columns
    ``(t cos t, h, t sin t)`` plus Gaussian noise, ``t ~ U[1.5 pi, 4.5 pi]``
    and ``h ~ U[0, 21]``; ``intrinsic`` is 2 x n holding the arc length of
    ``t`` and ``h``.
    """
    if n < 10:
        raise ValueError("swiss roll needs n >= 10")
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi + 3.0 * np.pi * rng.random(n)
    h = 21.0 * rng.random(n)
    X = np.vstack([t * np.cos(t), h, t * np.sin(t)])
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    return X, np.vstack([swiss_roll_arclength(t), h])
