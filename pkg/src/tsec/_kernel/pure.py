"""Pure-numpy Gibbs sweep: the import-time fallback for the compiled kernel."""

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtr, ndtri

from ..errors import SamplerError

name = "python"

TAIL_CUTOFF = 5.0
JITTER = 1e-10


def _truncated_latents(m, rng):
    """w ~ N(m, 1) conditioned on w > 0, elementwise.

    Inverse-CDF in the body of the distribution; for truncation points past
    TAIL_CUTOFF standard deviations (m < -TAIL_CUTOFF) an exponential-proposal
    rejection sampler keeps the tails exact.
    """
    w = np.empty_like(m)
    u = rng.random(m.size)
    body = m >= -TAIL_CUTOFF
    mb = m[body]
    w[body] = mb - ndtri(np.maximum(u[body] * ndtr(mb), 1e-300))
    idx = np.flatnonzero(~body)
    while idx.size:
        a = -m[idx]
        alpha = 0.5 * (a + np.sqrt(a * a + 4.0))
        xi = a + rng.standard_exponential(idx.size) / alpha
        accept = rng.standard_exponential(idx.size) >= 0.5 * (xi - alpha) ** 2
        w[idx[accept]] = m[idx[accept]] + xi[accept]
        idx = idx[~accept]
    return w


def gibbs_sweep(x_arms, trial_arm, y, xtx, prior_prec, beta, z_out, rng):
    eta = x_arms @ beta
    signs = np.where(y == 1, 1.0, -1.0)
    m = signs * eta[trial_arm]
    z = signs * _truncated_latents(m, rng)
    z_out[:] = z

    per_arm = np.bincount(trial_arm, weights=z, minlength=x_arms.shape[0])
    xtz = x_arms.T @ per_arm
    a = xtx + np.diag(prior_prec)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        try:
            chol = np.linalg.cholesky(a + JITTER * np.eye(a.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SamplerError(
                f"beta precision matrix not positive definite (p={a.shape[0]}, "
                f"min prior precision {prior_prec.min():.3g})"
            ) from exc
    half = solve_triangular(chol, xtz, lower=True)
    mean = solve_triangular(chol.T, half, lower=False)
    noise = solve_triangular(chol.T, rng.standard_normal(beta.size), lower=False)
    beta[:] = mean + noise
