"""Compare the compiled and pure-numpy Gibbs-sweep backends.

Times the raw per-sweep kernel and a full posterior fit at study-like sizes,
then prints a table with the speedup of the compiled extension over the
fallback. Run from a checkout with the package installed:

    python benchmarks/bench_kernels.py [--repeats N] [--sweeps N]
"""

import argparse
import time

import numpy as np
from scipy.special import ndtr

from tsec._kernel import available_backends, get_backend
from tsec.arms import DesignLayout, FactorSpace
from tsec.probit import ChainSettings, PriorMultipliers, TrialLedger, run_chain


def synthetic_ledger(space, layout, num_active, trials, rng):
    """A random probit truth observed on a random subset of arms."""
    beta = 0.4 * rng.standard_normal(layout.dimension)
    active = rng.choice(space.num_arms, size=num_active, replace=False)
    rows = layout.encode_all([space.arm_at(int(a)) for a in active])
    mu = ndtr(rows @ beta)
    ledger = TrialLedger()
    for n in range(trials):
        pick = int(rng.integers(num_active))
        y = int(rng.random() < mu[pick])
        ledger.append(int(active[pick]), 1, 1 + n // 50, y)
    return ledger


def sweep_inputs(space, layout, ledger, rng):
    """Preassembled arrays matching what run_chain hands the kernel."""
    trial_arm_raw, y = ledger.arrays()
    distinct = np.unique(trial_arm_raw)
    slot = {int(a): i for i, a in enumerate(distinct)}
    trial_arm = np.array([slot[int(a)] for a in trial_arm_raw], dtype=np.int64)
    x_arms = layout.encode_all([space.arm_at(int(a)) for a in distinct])
    counts = np.bincount(trial_arm, minlength=distinct.size).astype(float)
    xtx = np.ascontiguousarray(x_arms.T @ (x_arms * counts[:, None]))
    priors = PriorMultipliers.for_layout(layout)
    prior_prec = 1.0 / (0.5 ** priors.tiers.astype(float))
    beta = 0.1 * rng.standard_normal(layout.dimension)
    z_out = np.empty(len(ledger))
    return x_arms, trial_arm, y, xtx, prior_prec, beta, z_out


def time_sweeps(backend, inputs, sweeps, repeats, seed):
    x_arms, trial_arm, y, xtx, prior_prec, beta0, z_out = inputs
    best = np.inf
    for rep in range(repeats):
        beta = beta0.copy()
        rng = np.random.default_rng(seed + rep)
        start = time.perf_counter()
        for _ in range(sweeps):
            backend.gibbs_sweep(x_arms, trial_arm, y, xtx, prior_prec, beta, z_out, rng)
        best = min(best, (time.perf_counter() - start) / sweeps)
    return best


def time_chain(name, space, layout, ledger, settings, repeats, seed):
    best = np.inf
    chain_settings = ChainSettings(
        iterations=settings.iterations,
        burnin=settings.burnin,
        stride=settings.stride,
        backend=name,
    )
    for rep in range(repeats):
        rng = np.random.default_rng(seed + rep)
        start = time.perf_counter()
        run_chain(ledger, space, layout, chain_settings, rng)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="repeats per timing; best is kept")
    parser.add_argument("--sweeps", type=int, default=300, help="kernel calls per micro-repeat")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled extension missing; timing the fallback only")

    workloads = [
        ("6 factors, 64 arms, 2000 trials", FactorSpace((2,) * 6), 8, 2000),
        ("10 factors, 1024 arms, 4000 trials", FactorSpace((2,) * 10), 16, 4000),
    ]
    chain = ChainSettings(iterations=600, burnin=100, stride=1)

    rows = []
    for label, space, num_active, trials in workloads:
        layout = DesignLayout(space)
        rng = np.random.default_rng(args.seed)
        ledger = synthetic_ledger(space, layout, num_active, trials, rng)
        inputs = sweep_inputs(space, layout, ledger, rng)
        for kind in ("sweep", "chain"):
            times = {}
            for name in backends:
                if kind == "sweep":
                    times[name] = time_sweeps(
                        get_backend(name), inputs, args.sweeps, args.repeats, args.seed
                    )
                else:
                    times[name] = time_chain(
                        name, space, layout, ledger, chain, args.repeats, args.seed
                    )
            rows.append((label, kind, times))

    unit = {"sweep": ("ms/sweep", 1e3), "chain": ("s/fit", 1.0)}
    print()
    print(f"{'workload':38} {'measure':10} {'python':>12} {'cython':>12} {'speedup':>8}")
    for label, kind, times in rows:
        suffix, scale = unit[kind]
        py = times["python"] * scale
        if "cython" in times:
            cy = times["cython"] * scale
            ratio = f"{times['python'] / times['cython']:7.2f}x"
            print(f"{label:38} {suffix:10} {py:12.3f} {cy:12.3f} {ratio:>8}")
        else:
            print(f"{label:38} {suffix:10} {py:12.3f} {'-':>12} {'-':>8}")
    print(f"\n(best of {args.repeats}; chain fit = {chain.iterations} iterations, "
          f"burnin {chain.burnin}, stride {chain.stride})")


if __name__ == "__main__":
    main()
