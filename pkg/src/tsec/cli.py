"""Command-line front end: replicated studies, sweeps, and the backtest.

Subcommands: simulate (website-style study, four methods on shared truths),
sweep (budget or factor-count sweep of simulate), backtest (portfolio
study on price fixtures), truth-gen (dump one sampled truth).

All randomness flows from the master seed: replicate r and method id m use
a generator seeded with SeedSequence([master, r, m]). Method ids are
TSEC=0, B1=1, B2=2, B3=3; the shared truth of replicate r uses id 100 and
its shared initial design (the same starting arms for all methods) id 50.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .arms import FactorSpace, random_arm_subset, random_regular_fraction
from .bandit import regret_rows, write_regret_csv
from .benchmarks import BenchmarkConfig, run_benchmark
from .engine import TsecConfig, armset_rows, run, write_armsets_csv
from .errors import IngestionError, SamplerError
from .portfolio import (
    BacktestConfig,
    backtest,
    load_prices,
    write_rewards_csv,
    write_wealth_csv,
)
from .probit import ChainSettings, Hyperparams
from .truth import SpikeSlabSpec, TierSpec, build_env, sample_truth, truth_to_csv

METHOD_IDS = {"TSEC": 0, "B1": 1, "B2": 2, "B3": 3}
TRUTH_STREAM_ID = 100
DESIGN_STREAM_ID = 50

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def method_rng(master_seed: int, replicate: int, method_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, replicate, method_id]))


def shared_initial_design(
    space: FactorSpace,
    num_active: int,
    fraction_power: int | None,
    master_seed: int,
    replicate: int,
) -> tuple[int, ...]:
    """One starting arm set per replicate, shared by all methods.

    Drawn from the replicate's own design stream so every method starts from
    the same arms and pairwise regret differences reflect policy, not
    initial-design luck. A regular fraction when one exists, else a random
    subset.
    """
    rng = method_rng(master_seed, replicate, DESIGN_STREAM_ID)
    if fraction_power is not None:
        arms = random_regular_fraction(space, fraction_power, rng)
    else:
        arms = random_arm_subset(space, num_active, rng)
    return tuple(sorted(arm.index for arm in arms))


def read_config(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if path is not None:
        found = parser.read(path)
        if not found:
            raise ValueError(f"config file not found: {path}")
    return parser


def chain_settings_from(config: configparser.ConfigParser) -> ChainSettings:
    section = config["chain"] if config.has_section("chain") else {}
    get = lambda key, default: section.get(key, default) if section else default
    return ChainSettings(
        iterations=int(get("iterations", 2000)),
        burnin=int(get("burnin", 500)),
        stride=int(get("stride", 3)),
        r_grid=int(get("r_grid", 200)),
        init=Hyperparams(
            tau2=float(get("init_tau2", 1.0)),
            r=float(get("init_r", 0.5)),
        ),
        backend=str(get("backend", "auto")),
    )


def truth_spec_from(config: configparser.ConfigParser) -> SpikeSlabSpec:
    if not config.has_section("truth"):
        return SpikeSlabSpec()
    section = config["truth"]
    base = SpikeSlabSpec()
    return SpikeSlabSpec(
        me=TierSpec(
            section.getfloat("me_sigma_spike", base.me.sigma_spike),
            section.getfloat("me_sigma_slab", base.me.sigma_slab),
        ),
        tfi=TierSpec(
            section.getfloat("tfi_sigma_spike", base.tfi.sigma_spike),
            section.getfloat("tfi_sigma_slab", base.tfi.sigma_slab),
        ),
        thfi=TierSpec(
            section.getfloat("thfi_sigma_spike", base.thfi.sigma_spike),
            section.getfloat("thfi_sigma_slab", base.thfi.sigma_slab),
        ),
        intercept=section.getfloat("intercept", base.intercept),
        effect_scale=section.getfloat("effect_scale", base.effect_scale),
    )


def study_params_from(config: configparser.ConfigParser) -> dict:
    """Desk-scale defaults, overridable section by section."""
    study = config["study"] if config.has_section("study") else {}
    tsec = config["tsec"] if config.has_section("tsec") else {}
    bench = config["benchmarks"] if config.has_section("benchmarks") else {}
    sget = lambda key, default: study.get(key, default) if study else default
    tget = lambda key, default: tsec.get(key, default) if tsec else default
    bget = lambda key, default: bench.get(key, default) if bench else default
    return {
        "num_factors": int(sget("num_factors", 6)),
        "replicates": int(sget("replicates", 20)),
        "num_active": int(tget("num_active", 8)),
        "runs_per_period": int(tget("runs_per_period", 50)),
        "periods_per_switch": int(tget("periods_per_switch", 10)),
        "num_switches": int(tget("num_switches", 4)),
        "alpha": float(tget("alpha", 0.05)),
        "init_design": str(tget("init_design", "regular_fraction")),
        "discard_threshold": float(bget("discard_threshold", 0.05)),
        "prob_best_rounds": int(bget("prob_best_rounds", 1000)),
    }


def fraction_power_for(num_factors: int, num_active: int) -> int | None:
    """q with 2^(M-q) = K, when a regular fraction of that size exists.

    Besides K being a power of two, the M-q basic factors must admit q
    distinct generator words of size >= 2, else no regular fraction exists
    and the caller falls back to a random subset.
    """
    power = int(math.log2(num_active))
    if 2**power != num_active or not 1 <= num_factors - power < num_factors:
        return None
    q = num_factors - power
    if (1 << power) - power - 1 < q:
        return None
    return q


def run_replicate(task: dict) -> dict:
    """One replicate: shared truth, then all four methods on it."""
    params = task["params"]
    master = task["seed"]
    replicate = task["replicate"]
    chain = ChainSettings(**task["chain_kwargs"])
    spec = SpikeSlabSpec(**task["truth_kwargs"]) if task["truth_kwargs"] else SpikeSlabSpec()

    m_count = params["num_factors"]
    space = FactorSpace((2,) * m_count)
    truth_rng = method_rng(master, replicate, TRUTH_STREAM_ID)
    truth = sample_truth(space, spec, truth_rng)
    env = build_env(truth, space)

    q = fraction_power_for(m_count, params["num_active"])
    init_design = params["init_design"]
    if init_design == "regular_fraction" and q is None:
        init_design = "random_subset"
    design = shared_initial_design(space, params["num_active"], q, master, replicate)

    tsec_config = TsecConfig(
        num_active=params["num_active"],
        runs_per_period=params["runs_per_period"],
        periods_per_switch=params["periods_per_switch"],
        num_switches=params["num_switches"],
        alpha=params["alpha"],
        init_design=init_design,
        initial_active=design,
        chain=chain,
    )
    result = run(space, env, tsec_config, method_rng(master, replicate, METHOD_IDS["TSEC"]))
    regret = list(regret_rows("TSEC", replicate, env, result.records))
    armsets = list(armset_rows(replicate, result.history))

    for variant in ("B1", "B2", "B3"):
        config = BenchmarkConfig(
            variant=variant,
            num_active=params["num_active"],
            runs_per_period=params["runs_per_period"],
            periods_per_switch=params["periods_per_switch"],
            num_switches=params["num_switches"],
            fraction_power=q,
            initial_active=design,
            discard_threshold=params["discard_threshold"],
            prob_best_rounds=params["prob_best_rounds"],
        )
        records = run_benchmark(space, env, config, method_rng(master, replicate, METHOD_IDS[variant]))
        regret.extend(regret_rows(variant, replicate, env, records))

    return {
        "replicate": replicate,
        "regret": regret,
        "armsets": armsets,
        "truth": truth,
    }


def _execute_replicates(tasks: list[dict], workers: int) -> list[dict]:
    if workers <= 1 or len(tasks) <= 1:
        return [run_replicate(task) for task in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return list(pool.imap_unordered(run_replicate, tasks))


def _chain_kwargs(settings: ChainSettings) -> dict:
    return {
        "iterations": settings.iterations,
        "burnin": settings.burnin,
        "stride": settings.stride,
        "r_grid": settings.r_grid,
        "init": settings.init,
        "backend": settings.backend,
    }


def _truth_kwargs(spec: SpikeSlabSpec) -> dict:
    return {
        "me": spec.me,
        "tfi": spec.tfi,
        "thfi": spec.thfi,
        "intercept": spec.intercept,
        "effect_scale": spec.effect_scale,
    }


def cmd_simulate(args, config: configparser.ConfigParser) -> int:
    params = study_params_from(config)
    chain = chain_settings_from(config)
    spec = truth_spec_from(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tasks = [
        {
            "params": params,
            "seed": args.seed,
            "replicate": replicate,
            "chain_kwargs": _chain_kwargs(chain),
            "truth_kwargs": _truth_kwargs(spec),
        }
        for replicate in range(params["replicates"])
    ]
    results = sorted(_execute_replicates(tasks, args.workers), key=lambda r: r["replicate"])

    regret = [row for result in results for row in result["regret"]]
    write_regret_csv(out / "regret.csv", regret)
    with open(out / "armsets.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["replicate", "s", "arm_index", "action"])
        for result in results:
            writer.writerows(result["armsets"])
    for result in results:
        truth_to_csv(result["truth"], out / f"truth_{result['replicate']}.csv")
    print(f"simulate: wrote {len(regret)} regret rows for "
          f"{len(results)} replicates to {out}")
    return EXIT_OK


def cmd_sweep(args, config: configparser.ConfigParser) -> int:
    if not config.has_section("sweep"):
        raise ValueError("sweep needs a [sweep] section with kind and values")
    section = config["sweep"]
    kind = section.get("kind", "budget").strip()
    if kind not in ("budget", "factors"):
        raise ValueError("sweep kind must be 'budget' or 'factors'")
    try:
        values = [int(v.strip()) for v in section.get("values", "").split(",") if v.strip()]
    except ValueError:
        raise ValueError("sweep values must be a comma-separated integer list") from None
    if not values:
        raise ValueError("sweep values list is empty")

    base = study_params_from(config)
    chain = chain_settings_from(config)
    spec = truth_spec_from(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary_rows = []
    for value in values:
        params = dict(base)
        if kind == "budget":
            params["num_active"] = value
        else:
            params["num_factors"] = value
        tasks = [
            {
                "params": params,
                "seed": args.seed,
                "replicate": replicate,
                "chain_kwargs": _chain_kwargs(chain),
                "truth_kwargs": _truth_kwargs(spec),
            }
            for replicate in range(params["replicates"])
        ]
        results = _execute_replicates(tasks, args.workers)
        finals: dict[str, dict[int, float]] = {}
        for result in results:
            for row in result["regret"]:
                # rows arrive in (s, t) order per method; the last row of a
                # method within a replicate carries the final cumulative value
                finals.setdefault(row[0], {})
                finals[row[0]][result["replicate"]] = float(row[5])
        sub = sorted(finals)
        for method in sub:
            per_rep = np.array(list(finals[method].values()))
            mean = float(per_rep.mean())
            if per_rep.size > 1:
                half = 1.96 * float(per_rep.std(ddof=1)) / math.sqrt(per_rep.size)
            else:
                half = 0.0
            summary_rows.append([value, method, repr(mean), repr(half)])

    with open(out / "summary.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sweep_value", "method", "mean_final_cum_regret", "ci_half_width"])
        writer.writerows(summary_rows)
    print(f"sweep: wrote {len(summary_rows)} summary rows to {out / 'summary.csv'}")
    return EXIT_OK


def cmd_backtest(args, config: configparser.ConfigParser) -> int:
    section = config["backtest"] if config.has_section("backtest") else {}
    get = lambda key, default: section.get(key, default) if section else default
    prices_path = get("prices", "fixtures/prices.csv")
    industries_path = get("industries", "fixtures/industries.csv")

    bt_config = BacktestConfig(
        num_active=int(get("num_active", 75)),
        num_switches=int(get("num_switches", 20)),
        rebalance_days=int(get("rebalance_days", 30)),
        sharpe_threshold=float(get("sharpe_threshold", 0.05)),
        estimation_window=int(get("estimation_window", 60)),
        risk_aversion=float(get("risk_aversion", 1.0)),
        capital_units=int(get("capital_units", 100)),
        alpha=float(get("alpha", 0.05)),
        chain=chain_settings_from(config),
    )
    table = load_prices(prices_path, industries_path)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0, METHOD_IDS["TSEC"]]))
    result = backtest(table, bt_config, rng)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_wealth_csv(out / "wealth.csv", result)
    write_rewards_csv(out / "rewards.csv", result)
    print(f"backtest: wrote wealth.csv and rewards.csv to {out}")
    return EXIT_OK


def cmd_truth_gen(args, config: configparser.ConfigParser) -> int:
    study = config["study"] if config.has_section("study") else {}
    m_count = int(study.get("num_factors", 10)) if study else 10
    spec = truth_spec_from(config)
    space = FactorSpace((2,) * m_count)
    rng = method_rng(args.seed, 0, TRUTH_STREAM_ID)
    truth = sample_truth(space, spec, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    truth_to_csv(truth, out / "truth.csv")
    print(f"truth-gen: wrote truth.csv for {m_count} factors to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsec",
        description="Constrained Thompson sampling: simulation studies and backtests.",
    )
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--seed", type=int, default=20260815, help="master seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="replicate worker processes")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="replicated factorial study, four methods")
    sub.add_parser("sweep", help="budget or factor sweep of simulate")
    sub.add_parser("backtest", help="portfolio backtest on price fixtures")
    sub.add_parser("truth-gen", help="dump one sampled ground truth")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "backtest": cmd_backtest,
    "truth-gen": cmd_truth_gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config)
        return COMMANDS[args.command](args, config)
    except (SamplerError, IngestionError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
