"""Bayesian probit interaction model with effect-hierarchy priors.

Reward probability of arm a is Phi(x_a . beta), x_a the baseline-coded
feature row. Coefficients get independent normal priors whose variance
shrinks geometrically with effect order: tau^2 for the intercept,
tau^2 r for main effects, tau^2 r^2 for two-factor interactions, with
hyperpriors [tau^2] ~ 1/tau^2 and r ~ Unif(0, 1).

Posterior sampling is a data-augmentation Gibbs sampler: one truncated
normal latent per Bernoulli trial, a joint Gaussian update for beta, an
inverse-gamma draw for tau^2, and a grid draw for r. The latent-and-beta
sweep is the hot kernel; a compiled version is used when available (see
tsec._kernel).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from ._kernel import get_backend
from .arms import TIER_ME, TIER_TFI, Arm, DesignLayout
from .errors import SamplerError

TAU2_FALLBACK_RANGE = (1e-6, 1e6)


@dataclass(frozen=True)
class Hyperparams:
    tau2: float
    r: float

    def __post_init__(self):
        if not self.tau2 > 0:
            raise ValueError("tau2 must be positive")
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")


@dataclass(frozen=True)
class PriorMultipliers:
    """Per-column variance multipliers c_j(r) = r^tier, tier in {0, 1, 2}."""

    tiers: np.ndarray

    @classmethod
    def for_layout(cls, layout: DesignLayout) -> "PriorMultipliers":
        return cls(tiers=layout.tiers())

    @property
    def dimension(self) -> int:
        return self.tiers.size

    @property
    def n_me(self) -> int:
        return int(np.sum(self.tiers == TIER_ME))

    @property
    def n_tfi(self) -> int:
        return int(np.sum(self.tiers == TIER_TFI))

    def evaluate(self, r: float) -> np.ndarray:
        return np.power(float(r), self.tiers.astype(float))

    def variances(self, tau2: float, r: float) -> np.ndarray:
        return tau2 * self.evaluate(r)


class TrialLedger:
    """Every Bernoulli observation with its arm, switch s, and period t."""

    def __init__(self):
        self.arm_index: list[int] = []
        self.s: list[int] = []
        self.t: list[int] = []
        self.y: list[int] = []
        self._successes: dict[int, int] = {}
        self._failures: dict[int, int] = {}

    def append(self, arm_index: int, s: int, t: int, y: int) -> None:
        if y not in (0, 1):
            raise ValueError("reward must be 0 or 1")
        self.arm_index.append(arm_index)
        self.s.append(s)
        self.t.append(t)
        self.y.append(y)
        if y:
            self._successes[arm_index] = self._successes.get(arm_index, 0) + 1
        else:
            self._failures[arm_index] = self._failures.get(arm_index, 0) + 1

    def __len__(self) -> int:
        return len(self.y)

    def counts(self, arm_index: int) -> tuple[int, int]:
        """(successes, failures) on one arm."""
        return self._successes.get(arm_index, 0), self._failures.get(arm_index, 0)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.arm_index, dtype=np.int64), np.asarray(self.y, dtype=np.int8)


@dataclass(frozen=True)
class ChainSettings:
    iterations: int = 2000
    burnin: int = 500
    stride: int = 3
    r_grid: int = 200
    init: Hyperparams = Hyperparams(tau2=1.0, r=0.5)
    fix_tau2: float | None = None
    fix_r: float | None = None
    backend: str = "auto"

    def __post_init__(self):
        if not self.iterations > self.burnin >= 0:
            raise ValueError("need iterations > burnin >= 0")
        if self.stride < 1 or self.r_grid < 1:
            raise ValueError("stride and r_grid must be >= 1")
        if self.backend not in ("auto", "python", "cython"):
            raise ValueError(f"unknown kernel backend {self.backend!r}")

    @property
    def retained(self) -> int:
        return (self.iterations - self.burnin) // self.stride


@dataclass
class PosteriorChain:
    """Retained draws of (beta, tau2, r) plus thinning metadata."""

    betas: np.ndarray  # (retained, p)
    tau2s: np.ndarray
    rs: np.ndarray
    iterations: int
    burnin: int
    stride: int

    def __post_init__(self):
        want = (self.iterations - self.burnin) // self.stride
        if self.betas.shape[0] != want:
            raise ValueError("retained draw count does not match (P - B) / stride")

    @property
    def retained(self) -> int:
        return self.betas.shape[0]

    def posterior_mean(self) -> np.ndarray:
        return self.betas.mean(axis=0)


def mu_of_arm(beta: np.ndarray, row: np.ndarray) -> float:
    """Phi(row . beta)."""
    beta = np.asarray(beta, dtype=float)
    row = np.asarray(row, dtype=float)
    if beta.shape != row.shape:
        raise ValueError(f"dimension mismatch: row {row.shape} vs beta {beta.shape}")
    return float(ndtr(row @ beta))


def sample_tau2(beta: np.ndarray, priors: PriorMultipliers, r: float, rng: np.random.Generator) -> float:
    """Inverse-gamma full conditional: shape p/2, rate sum_j beta_j^2 / (2 c_j(r)).

    An all-zero beta gives rate 0 (improper conditional); that degenerate case
    falls back to a draw from the scale prior truncated to [1e-6, 1e6].
    """
    beta = np.asarray(beta, dtype=float)
    c = priors.evaluate(r)
    rate = float(np.sum(beta * beta / c)) / 2.0
    shape = priors.dimension / 2.0
    if rate <= 0.0:
        warnings.warn("degenerate tau2 conditional (all-zero beta); drawing from truncated prior", RuntimeWarning)
        lo, hi = TAU2_FALLBACK_RANGE
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return rate / float(rng.standard_gamma(shape))


def sample_r(
    beta: np.ndarray,
    priors: PriorMultipliers,
    tau2: float,
    grid_size: int,
    rng: np.random.Generator,
) -> float:
    """Grid-Gibbs draw of the hierarchy decay r on (0, 1).

    The log full conditional at a midpoint r is
        -(n_me/2) log r - n_tfi log r - A/(2 tau2 r) - B/(2 tau2 r^2)
    with A, B the squared-coefficient sums of the ME and 2FI blocks.
    """
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    beta = np.asarray(beta, dtype=float)
    me = priors.tiers == TIER_ME
    tfi = priors.tiers == TIER_TFI
    a = float(np.sum(beta[me] ** 2))
    b = float(np.sum(beta[tfi] ** 2))
    grid = (np.arange(grid_size) + 0.5) / grid_size
    logf = (
        -(priors.n_me / 2.0 + priors.n_tfi) * np.log(grid)
        - a / (2.0 * tau2 * grid)
        - b / (2.0 * tau2 * grid * grid)
    )
    if not np.any(np.isfinite(logf)):
        raise SamplerError("r conditional is non-finite at every grid point")
    logf -= logf.max()
    w = np.exp(logf)
    cdf = np.cumsum(w)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return float(grid[min(k, grid_size - 1)])


def run_chain(
    ledger: TrialLedger,
    space,
    layout: DesignLayout,
    settings: ChainSettings,
    rng: np.random.Generator,
    init: np.ndarray | None = None,
    latent_monitor=None,
) -> PosteriorChain:
    """Run the data-augmentation Gibbs sampler on the full trial ledger.

    Each iteration sweeps (latents, beta) through the active kernel backend,
    then updates tau2 and r from their full conditionals unless fixed in the
    settings. `init` warm-starts beta (defaults to zero). `latent_monitor`,
    if given, is called with (iteration, z) after every latent sweep.
    """
    if len(ledger) == 0:
        raise ValueError("ledger is empty; nothing to fit")
    backend = get_backend(settings.backend)
    priors = PriorMultipliers.for_layout(layout)
    p = layout.dimension

    trial_arm_raw, y = ledger.arrays()
    distinct = np.unique(trial_arm_raw)
    slot = {int(a): i for i, a in enumerate(distinct)}
    trial_arm = np.array([slot[int(a)] for a in trial_arm_raw], dtype=np.int64)
    x_arms = layout.encode_all([space.arm_at(int(a)) for a in distinct])
    counts = np.bincount(trial_arm, minlength=distinct.size).astype(float)
    xtx = x_arms.T @ (x_arms * counts[:, None])
    xtx = np.ascontiguousarray(xtx)

    beta = np.zeros(p) if init is None else np.array(init, dtype=float)
    if beta.shape != (p,):
        raise ValueError("init beta has wrong dimension")
    tau2 = settings.init.tau2 if settings.fix_tau2 is None else float(settings.fix_tau2)
    r = settings.init.r if settings.fix_r is None else float(settings.fix_r)

    tiers_f = priors.tiers.astype(float)
    n_ret = settings.retained
    betas = np.empty((n_ret, p))
    tau2s = np.empty(n_ret)
    rs = np.empty(n_ret)
    z_buf = np.empty(len(ledger))

    kept = 0
    for it in range(1, settings.iterations + 1):
        prior_prec = 1.0 / (tau2 * np.power(r, tiers_f))
        backend.gibbs_sweep(x_arms, trial_arm, y, xtx, prior_prec, beta, z_buf, rng)
        if latent_monitor is not None:
            latent_monitor(it, z_buf)
        if settings.fix_tau2 is None:
            tau2 = sample_tau2(beta, priors, r, rng)
        if settings.fix_r is None:
            r = sample_r(beta, priors, tau2, settings.r_grid, rng)
        if it > settings.burnin and (it - settings.burnin) % settings.stride == 0 and kept < n_ret:
            betas[kept] = beta
            tau2s[kept] = tau2
            rs[kept] = r
            kept += 1

    return PosteriorChain(
        betas=betas,
        tau2s=tau2s,
        rs=rs,
        iterations=settings.iterations,
        burnin=settings.burnin,
        stride=settings.stride,
    )


def thin(chain: PosteriorChain, n: int, rng: np.random.Generator) -> np.ndarray:
    """n beta draws at evenly spaced retained positions, order randomized.

    With fewer retained draws than n, positions wrap around and repeat.
    """
    retained = chain.retained
    if retained < 1:
        raise ValueError("chain has no retained draws")
    if n < 1:
        raise ValueError("n must be >= 1")
    if retained >= n:
        positions = np.arange(n) * (retained // n)
    else:
        positions = np.arange(n) % retained
    return chain.betas[positions][rng.permutation(n)]


def posterior_mu_matrix(betas: np.ndarray, arms: list[Arm], layout: DesignLayout) -> np.ndarray:
    """[num_arms x num_draws] matrix of Phi(x_a . beta_d)."""
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    if len(arms) == 0 or betas.shape[0] == 0:
        raise ValueError("need at least one arm and one draw")
    if betas.shape[1] != layout.dimension:
        raise ValueError("draw dimension does not match layout")
    rows = layout.encode_all(arms)
    return ndtr(rows @ betas.T)


def chain_to_csv(chain: PosteriorChain, path) -> None:
    """Diagnostic dump: (iteration, tau2, r, beta_0, ..., beta_{p-1})."""
    p = chain.betas.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "tau2", "r"] + [f"beta_{j}" for j in range(p)])
        for i in range(chain.retained):
            it = chain.burnin + (i + 1) * chain.stride
            w.writerow([it, repr(chain.tau2s[i]), repr(chain.rs[i])] + [repr(v) for v in chain.betas[i]])
