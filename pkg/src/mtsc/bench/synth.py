"""Synthetic market generators used as experiment oracles.

Real minute-level market data is not redistributable, so the experiment
drivers and the acceptance tests run on constructed series with known
structure: a planted linear signal with tuned class separability, the same
signal with a mid-series regime change, and a pure random walk.
"""

import numpy as np

from .. import errors
from ..frame import Frame

# weight of the white-noise term relative to the unit-variance planted
# signal; sigma = 0.35 puts the best achievable three-class accuracy of
# the tercile labels near 0.8
NOISE_SIGMA = 0.35
RETURN_SCALE = 0.01

KINDS = ("planted_signal", "regime_shift", "random_walk")


def gen_synthetic(kind, n, d, seed, shift_at=400):
    """Frame of n rows with d feature columns plus close and returns.

    planted_signal: the return at row t+1 is a noisy linear read of the
    features at row t, so tercile labels are predictable with accuracy
    around 0.8 at best. regime_shift: identical until `shift_at`, after
    which the signal flips sign and keeps only 0.3 of its amplitude.
    random_walk: returns are independent of every feature.
    """
    if kind not in KINDS:
        raise errors.ConfigError(f"unknown synthetic kind {kind!r}")
    if n < 50 or d < 1:
        raise errors.InvalidParams("need n >= 50 rows and d >= 1 features")
    w_rng = np.random.default_rng([seed, 40])
    x_rng = np.random.default_rng([seed, 41])
    e_rng = np.random.default_rng([seed, 42])

    x = x_rng.standard_normal((n, d))
    w = w_rng.standard_normal(d)
    w /= np.linalg.norm(w)
    noise = e_rng.standard_normal(n)

    if kind == "random_walk":
        signal = np.zeros(n)
    else:
        signal = x @ w
        if kind == "regime_shift":
            signal[shift_at:] *= -0.3
    scale = RETURN_SCALE / np.sqrt(1.0 + NOISE_SIGMA ** 2)
    step = scale * (signal + NOISE_SIGMA * noise)

    returns = np.zeros(n)
    returns[1:] = step[:-1]                  # row t's features drive r_{t+1}
    prices = 100.0 * np.cumprod(1.0 + returns)
    columns = {"close": prices}
    for j in range(d):
        columns[f"f{j}"] = x[:, j]
    return Frame(np.arange(n, dtype=np.int64) * 10 ** 9, columns, returns)
