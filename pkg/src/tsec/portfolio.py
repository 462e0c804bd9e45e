"""Industry-strategy portfolio backtest with Sharpe-threshold rewards.

The arm space assigns one of four strategies to each industry sleeve:
mean-variance (long-only quadratic utility), sold-all (cash), equally
weighted, and value weighted. Each sleeve holds five tickers and gets an
equal share of capital. An arm's period reward is 1 when the Sharpe ratio
of its daily return series clears a threshold; those binary outcomes drive
the same probit engine used in simulation, while wealth compounds the
realized returns of whatever the engine played.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .arms import Arm, DesignLayout, FactorSpace, enumerate_arms, make_arm, random_arm_subset
from .engine import SwitchHistory, top_k_by_quantile
from .errors import IngestionError
from .probit import ChainSettings, TrialLedger, posterior_mu_matrix, run_chain, thin

MEAN_VARIANCE = 1
SOLD_ALL = 2
EQUALLY_WEIGHTED = 3
VALUE_WEIGHTED = 4

STRATEGY_NAMES = {
    MEAN_VARIANCE: "MeanVariance",
    SOLD_ALL: "SoldAll",
    EQUALLY_WEIGHTED: "EquallyWeighted",
    VALUE_WEIGHTED: "ValueWeighted",
}

TICKERS_PER_INDUSTRY = 5
MAX_MISSING_FRACTION = 0.02


@dataclass(frozen=True)
class PriceTable:
    """Validated adjusted-close prices on a common trading calendar.

    Factor m of the arm space is industries[m-1]; each industry has exactly
    five member tickers, in industry-file order. `report` lists the cells
    that were forward-filled during validation.
    """

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    industries: tuple[str, ...]
    members: dict[str, tuple[str, ...]]
    prices: np.ndarray  # (num_dates, num_tickers)
    report: tuple[str, ...] = ()

    @property
    def num_industries(self) -> int:
        return len(self.industries)

    def column(self, ticker: str) -> int:
        return self.tickers.index(ticker)

    def sleeve_columns(self, industry: str) -> list[int]:
        return [self.column(t) for t in self.members[industry]]

    def date_index(self, date: str) -> int:
        try:
            return self.dates.index(date)
        except ValueError:
            raise IngestionError(f"date {date} not in the price calendar") from None


def load_prices(prices_path, industries_path) -> PriceTable:
    """Read and validate the two input CSVs.

    Prices land on the union calendar of all tickers. Isolated single-day
    gaps are forward-filled and noted in the report; a ticker missing more
    than 2% of days, or with any unfillable gap, is rejected.
    """
    industry_of: dict[str, str] = {}
    industry_order: list[str] = []
    with open(industries_path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["ticker", "industry"]:
            raise IngestionError(f"{industries_path}: expected header ticker,industry")
        for lineno, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise IngestionError(f"{industries_path} row {lineno}: expected 2 fields")
            ticker, industry = row[0].strip(), row[1].strip()
            if not ticker or not industry:
                raise IngestionError(f"{industries_path} row {lineno}: empty field")
            if ticker in industry_of:
                raise IngestionError(f"{industries_path} row {lineno}: duplicate ticker {ticker}")
            industry_of[ticker] = industry
            if industry not in industry_order:
                industry_order.append(industry)

    members: dict[str, list[str]] = {name: [] for name in industry_order}
    for ticker, industry in industry_of.items():
        members[industry].append(ticker)
    for name, group in members.items():
        if len(group) != TICKERS_PER_INDUSTRY:
            raise IngestionError(
                f"industry {name} has {len(group)} tickers, need {TICKERS_PER_INDUSTRY}"
            )

    cells: dict[tuple[str, str], float] = {}
    dates_seen: set[str] = set()
    with open(prices_path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["date", "ticker", "adj_close"]:
            raise IngestionError(f"{prices_path}: expected header date,ticker,adj_close")
        for lineno, row in enumerate(reader, start=2):
            if len(row) < 3:
                raise IngestionError(f"{prices_path} row {lineno}: expected 3 fields")
            date, ticker, raw = row[0].strip(), row[1].strip(), row[2].strip()
            if ticker not in industry_of:
                raise IngestionError(f"{prices_path} row {lineno}: unknown ticker {ticker}")
            try:
                price = float(raw)
            except ValueError:
                raise IngestionError(
                    f"{prices_path} row {lineno}: bad price {raw!r}"
                ) from None
            if not np.isfinite(price) or price <= 0:
                raise IngestionError(f"{prices_path} row {lineno}: non-positive price {raw}")
            if (date, ticker) in cells:
                raise IngestionError(
                    f"{prices_path} row {lineno}: duplicate ({date}, {ticker})"
                )
            cells[(date, ticker)] = price
            dates_seen.add(date)

    if not dates_seen:
        raise IngestionError(f"{prices_path}: no data rows")
    dates = tuple(sorted(dates_seen))
    tickers = tuple(t for name in industry_order for t in members[name])
    grid = np.full((len(dates), len(tickers)), np.nan)
    for (date, ticker), price in cells.items():
        grid[dates.index(date), tickers.index(ticker)] = price

    report: list[str] = []
    for j, ticker in enumerate(tickers):
        col = grid[:, j]
        missing = np.flatnonzero(np.isnan(col))
        if missing.size > MAX_MISSING_FRACTION * len(dates):
            raise IngestionError(
                f"ticker {ticker}: {missing.size} of {len(dates)} days missing "
                f"(limit {MAX_MISSING_FRACTION:.0%})"
            )
        for i in missing:
            isolated = (
                0 < i < len(dates) - 1
                and not np.isnan(col[i - 1])
                and not np.isnan(col[i + 1])
            )
            if not isolated:
                raise IngestionError(
                    f"ticker {ticker}: unfillable gap at {dates[i]}"
                )
            col[i] = col[i - 1]
            report.append(f"forward-filled {ticker} on {dates[i]}")

    return PriceTable(
        dates=dates,
        tickers=tickers,
        industries=tuple(industry_order),
        members={name: tuple(group) for name, group in members.items()},
        prices=grid,
        report=tuple(report),
    )


def mean_variance_weights(mu: np.ndarray, sigma: np.ndarray, risk_aversion: float) -> np.ndarray:
    """Exact long-only maximizer of w'mu - lambda w'Sigma w on the simplex.

    Enumerates every nonempty support set, solves its equality-constrained
    system, and keeps solutions that satisfy the sign conditions on both the
    kept and excluded assets. Degenerate inputs fall back to equal weights.
    """
    n = mu.shape[0]
    sigma = sigma + 1e-8 * np.trace(sigma) * np.eye(n)
    best_w = None
    best_value = -np.inf
    tol = 1e-9
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            s = list(support)
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = 2.0 * risk_aversion * sigma[np.ix_(s, s)]
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.append(mu[s], 1.0)
            try:
                solution = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(solution)):
                continue
            w_s, nu = solution[:size], solution[size]
            if np.any(w_s < -tol):
                continue
            w = np.zeros(n)
            w[s] = np.clip(w_s, 0.0, None)
            # Excluded assets must not want in: mu_j <= 2*lambda*(Sigma w)_j + nu.
            gradient = mu - 2.0 * risk_aversion * (sigma @ w) - nu
            excluded = [j for j in range(n) if j not in support]
            if excluded and np.any(gradient[excluded] > 1e-7):
                continue
            value = float(mu @ w - risk_aversion * w @ sigma @ w)
            if value > best_value:
                best_value = value
                best_w = w
    if best_w is None:
        return np.full(n, 1.0 / n)
    total = best_w.sum()
    return best_w / total if total > 0 else np.full(n, 1.0 / n)


def industry_weights(
    strategy: int,
    sleeve_prices: np.ndarray,
    as_of: int,
    window: int,
    risk_aversion: float,
) -> tuple[np.ndarray, float]:
    """Asset weights and cash weight for one sleeve at a period start.

    `sleeve_prices` is (num_dates, 5); `as_of` indexes the period-start day.
    Estimation uses the `window` daily returns ending at as_of.
    """
    num_assets = sleeve_prices.shape[1]
    if strategy == SOLD_ALL:
        return np.zeros(num_assets), 1.0
    if strategy == EQUALLY_WEIGHTED:
        return np.full(num_assets, 1.0 / num_assets), 0.0
    if as_of < window:
        raise IngestionError(
            f"need {window} days of history; first usable date index is {window}"
        )
    block = sleeve_prices[as_of - window : as_of + 1]
    returns = block[1:] / block[:-1] - 1.0
    if strategy == VALUE_WEIGHTED:
        trailing = sleeve_prices[as_of] / sleeve_prices[as_of - window] - 1.0
        clamped = np.clip(trailing, 0.0, None)
        total = clamped.sum()
        if total <= 0:
            return np.full(num_assets, 1.0 / num_assets), 0.0
        return clamped / total, 0.0
    if strategy == MEAN_VARIANCE:
        mu = returns.mean(axis=0)
        sigma = np.cov(returns, rowvar=False, ddof=1)
        return mean_variance_weights(mu, sigma, risk_aversion), 0.0
    raise ValueError(f"unknown strategy code {strategy}")


def sleeve_return_matrix(
    table: PriceTable,
    start: int,
    length: int,
    window: int,
    risk_aversion: float,
) -> np.ndarray:
    """Daily sleeve returns for every (industry, strategy) pair in one period.

    Returns shape (M, 4, length): weights are fixed at `start`, applied to
    the simple returns of days start+1 .. start+length.
    """
    m_count = table.num_industries
    out = np.zeros((m_count, 4, length))
    for m, industry in enumerate(table.industries):
        cols = table.sleeve_columns(industry)
        sleeve_prices = table.prices[:, cols]
        block = sleeve_prices[start : start + length + 1]
        if block.shape[0] != length + 1:
            raise IngestionError("period window runs past the end of the calendar")
        daily = block[1:] / block[:-1] - 1.0
        for code in STRATEGY_NAMES:
            weights, _cash = industry_weights(
                code, sleeve_prices, start, window, risk_aversion
            )
            out[m, code - 1] = daily @ weights
    return out


def arm_return_series(arm: Arm, sleeve_returns: np.ndarray) -> np.ndarray:
    """Equal-capital mean of the arm's chosen sleeve return series."""
    rows = [sleeve_returns[m, level - 1] for m, level in enumerate(arm.levels)]
    return np.mean(rows, axis=0)


def sharpe(returns: np.ndarray) -> float:
    """Mean over sample standard deviation, with a sold-all zero convention."""
    values = np.asarray(returns, dtype=float)
    if values.size < 2:
        raise ValueError("sharpe needs at least 2 observations")
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    if std == 0.0:
        if mean > 0:
            return float("inf")
        if mean < 0:
            return float("-inf")
        return 0.0
    return mean / std


def period_reward(sharpe_ratio: float, threshold: float, strict: bool = False) -> int:
    if strict:
        return int(sharpe_ratio > threshold)
    return int(sharpe_ratio >= threshold)


@dataclass(frozen=True)
class BacktestConfig:
    num_active: int = 75
    num_switches: int = 20
    rebalance_days: int = 30
    sharpe_threshold: float = 0.05
    estimation_window: int = 60
    risk_aversion: float = 1.0
    capital_units: int = 100
    alpha: float = 0.05
    strict_threshold: bool = False
    chain: ChainSettings = field(default_factory=ChainSettings)

    def validate(self) -> None:
        if self.estimation_window < 2:
            raise ValueError("estimation_window must be >= 2")
        if self.rebalance_days < 1:
            raise ValueError("rebalance_days must be >= 1")
        if self.num_active < 1 or self.capital_units < self.num_active:
            raise ValueError("need 1 <= num_active <= capital_units")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.num_switches < 1:
            raise ValueError("num_switches must be >= 1")


@dataclass
class BacktestResult:
    """Wealth paths, reward rows, and the engine's switching history."""

    dates: list[str]  # period-end dates; dates[0] is the start
    wealth: dict[str, list[float]]
    reward_rows: list[tuple[int, int, float, int]]  # (period, arm, sharpe, reward)
    history: SwitchHistory
    ledger: TrialLedger


def backtest(table: PriceTable, config: BacktestConfig, rng: np.random.Generator) -> BacktestResult:
    """Run the constrained engine and the four pure-strategy baselines.

    One switch period per rebalance window (T=1). Capital is n equal units;
    each unit follows one active arm chosen by that unit's posterior draw,
    and wealth compounds the capital-weighted mean of the played arms'
    period returns. Baselines put all capital on one strategy everywhere.
    """
    config.validate()
    m_count = table.num_industries
    space = FactorSpace((4,) * m_count)
    layout = DesignLayout(space)
    arms = enumerate_arms(space)
    window = config.estimation_window
    days = config.rebalance_days
    needed = window + config.num_switches * days + 1
    if len(table.dates) < needed:
        raise IngestionError(
            f"need {needed} trading days for this configuration, have {len(table.dates)}"
        )

    methods = ["TSEC"] + list(STRATEGY_NAMES.values())
    wealth = {name: [1.0] for name in methods}
    result_dates = [table.dates[window]]
    pure_arms = {
        name: make_arm(space, (code,) * m_count)
        for code, name in STRATEGY_NAMES.items()
    }

    ledger = TrialLedger()
    history = SwitchHistory()
    reward_rows: list[tuple[int, int, float, int]] = []
    active = sorted(arm.index for arm in random_arm_subset(space, config.num_active, rng))
    history.record(active)
    chain = None
    n = config.capital_units

    for period in range(1, config.num_switches + 1):
        start = window + (period - 1) * days
        sleeve_returns = sleeve_return_matrix(
            table, start, days, window, config.risk_aversion
        )

        if period == 1:
            counts = np.full(config.num_active, n // config.num_active, dtype=np.int64)
            remainder = n - int(counts.sum())
            if remainder:
                extra = rng.choice(config.num_active, size=remainder, replace=False)
                counts[extra] += 1
            unit_arms = np.repeat(np.asarray(active), counts)
        else:
            chain = run_chain(
                ledger, space, layout, config.chain, rng,
                init=None if chain is None else chain.posterior_mean(),
            )
            draws = thin(chain, n, rng)
            rows = layout.encode_all([space.arm_at(i) for i in active])
            scores = rows @ draws.T
            unit_arms = np.empty(n, dtype=np.int64)
            for j in range(n):
                column = scores[:, j]
                best = np.flatnonzero(column == column.max())
                slot = int(best[0]) if best.size == 1 else int(rng.choice(best))
                unit_arms[j] = active[slot]

        played, played_counts = np.unique(unit_arms, return_counts=True)
        period_return = 0.0
        for arm_index, units in zip(played, played_counts):
            series = arm_return_series(arms[arm_index], sleeve_returns)
            sr = sharpe(series)
            reward = period_reward(sr, config.sharpe_threshold, config.strict_threshold)
            compounded = float(np.prod(1.0 + series) - 1.0)
            period_return += (units / n) * compounded
            reward_rows.append((period, int(arm_index), sr, reward))
            for _ in range(int(units)):
                ledger.append(int(arm_index), period, 1, reward)
        wealth["TSEC"].append(wealth["TSEC"][-1] * (1.0 + period_return))

        for name, arm in pure_arms.items():
            series = arm_return_series(arm, sleeve_returns)
            compounded = float(np.prod(1.0 + series) - 1.0)
            wealth[name].append(wealth[name][-1] * (1.0 + compounded))
        result_dates.append(table.dates[start + days])

        if period < config.num_switches:
            chain = run_chain(
                ledger, space, layout, config.chain, rng,
                init=None if chain is None else chain.posterior_mean(),
            )
            mu = posterior_mu_matrix(chain.betas, arms, layout)
            active = top_k_by_quantile(mu, config.num_active, config.alpha, rng)
            history.record(active)

    return BacktestResult(
        dates=result_dates,
        wealth=wealth,
        reward_rows=reward_rows,
        history=history,
        ledger=ledger,
    )


def write_wealth_csv(path, result: BacktestResult) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "method", "wealth"])
        for method, series in result.wealth.items():
            for date, value in zip(result.dates, series):
                writer.writerow([date, method, repr(float(value))])


def write_rewards_csv(path, result: BacktestResult) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["period", "arm_index", "sharpe", "reward"])
        for period, arm_index, sr, reward in result.reward_rows:
            writer.writerow([period, arm_index, repr(sr), reward])
