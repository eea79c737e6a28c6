"""GARCH conditional-variance features and GARCH(1,1) maximum likelihood.

The recursion produces, at output index k, the variance forecast for period
k+1 given information through k:

    out[k] = alpha0 + sum_i alpha_i * eps^2(k+1-i) + sum_j beta_j * sig2(k+1-j)

with pre-sample squared residuals taken as 0 and pre-sample variances as
``initial_variance``. Fitting maximizes the Gaussian log-likelihood of the
residuals under that recursion with Nelder-Mead direct search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import DegenerateInput, DidNotConverge, InvalidParams, TooFewSamples


@dataclass(frozen=True)
class GarchParams:
    """GARCH(q, p) coefficients plus the pre-sample variance seed."""

    alpha0: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    initial_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if not self.alpha0 > 0:
            raise InvalidParams(f"alpha0 must be > 0, got {self.alpha0}")
        if any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise InvalidParams("alpha and beta coefficients must be >= 0")
        if sum(self.alpha) + sum(self.beta) >= 1.0:
            raise InvalidParams(
                "sum(alpha) + sum(beta) must be < 1 for stationarity")
        if not self.initial_variance > 0:
            raise InvalidParams("initial_variance must be > 0")

    @property
    def unconditional_variance(self) -> float:
        return self.alpha0 / (1.0 - sum(self.alpha) - sum(self.beta))


def garch_variance(residuals, params: GarchParams) -> np.ndarray:
    """Run the variance recursion over a residual series.

    out[k] forecasts period k+1; the first alpha lag therefore reads
    residuals[k] itself, and the first beta lag reads out[k-1] (or the
    initial variance when k = 0).
    """
    eps2 = np.asarray(residuals, dtype=np.float64) ** 2
    n = len(eps2)
    alpha, beta = params.alpha, params.beta
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        acc = params.alpha0
        for i, a in enumerate(alpha, start=1):
            m = k + 1 - i
            if m >= 0:
                acc += a * eps2[m]
        for j, b in enumerate(beta, start=1):
            m = k + 1 - j
            acc += b * (out[m - 1] if m >= 1 else params.initial_variance)
        out[k] = acc
    return out


def _garch11_path(eps2: np.ndarray, a0: float, a1: float, b1: float,
                  v0: float) -> np.ndarray:
    # same recursion as garch_variance for (q=1, p=1), as one IIR filter pass
    c = a0 + a1 * eps2
    out, _ = lfilter([1.0], [1.0, -b1], c, zi=np.array([b1 * v0]))
    return out


def _neg_log_likelihood(theta: np.ndarray, eps2: np.ndarray, v0: float) -> float:
    a0, a1, b1 = theta
    # hard penalty keeps the direct search inside the stationary region
    violation = (max(0.0, 1e-12 - a0) + max(0.0, -a1) + max(0.0, -b1)
                 + max(0.0, a1 + b1 - (1.0 - 1e-9)))
    if violation > 0:
        return 1e12 * (1.0 + violation)
    out = _garch11_path(eps2, a0, a1, b1, v0)
    sig2 = np.concatenate(([v0], out[:-1]))  # variance paired with its own eps
    return float(0.5 * np.sum(np.log(2.0 * np.pi * sig2) + eps2 / sig2))


def fit_garch11(residuals, maxiter: int = 10000) -> GarchParams:
    """Fit GARCH(1,1) by Nelder-Mead on the Gaussian likelihood.

    Starts from the moment-based guess (0.1 * var(eps), 0.1, 0.8) and seeds
    the recursion with the sample variance. Note the model is weakly
    identified on serially independent data: alpha0 and beta1 trade off
    along a near-flat likelihood ridge, so individual coefficients are only
    meaningful when real volatility clustering is present.
    """
    eps = np.asarray(residuals, dtype=np.float64)
    if len(eps) < 50:
        raise TooFewSamples(f"need at least 50 residuals, got {len(eps)}")
    v0 = float(eps.var())
    if not v0 > 0:
        raise DegenerateInput("residuals have zero variance")
    eps2 = eps ** 2
    x0 = np.array([0.1 * v0, 0.1, 0.8])
    res = minimize(_neg_log_likelihood, x0, args=(eps2, v0),
                   method="Nelder-Mead",
                   options={"maxiter": maxiter, "maxfev": maxiter,
                            "xatol": 1e-8, "fatol": 1e-8})
    if not res.success:
        raise DidNotConverge(f"Nelder-Mead stopped: {res.message}")
    a0, a1, b1 = (float(v) for v in res.x)
    a1, b1 = max(a1, 0.0), max(b1, 0.0)
    return GarchParams(a0, (a1,), (b1,), initial_variance=v0)


def simulate_garch11(params: GarchParams, n: int, seed: int,
                     burn_in: int = 500) -> np.ndarray:
    """Draw a residual series eps_t = sigma_t * z_t from the model."""
    if len(params.alpha) != 1 or len(params.beta) != 1:
        raise InvalidParams("simulator is GARCH(1,1) only")
    rng = np.random.default_rng(seed)
    a0, a1, b1 = params.alpha0, params.alpha[0], params.beta[0]
    z = rng.standard_normal(n + burn_in)
    eps = np.empty(n + burn_in)
    sig2 = params.unconditional_variance
    for t in range(n + burn_in):
        eps[t] = np.sqrt(sig2) * z[t]
        sig2 = a0 + a1 * eps[t] ** 2 + b1 * sig2
    return eps[burn_in:]
