"""Historical price ingestion and the backtest entry point.

The input CSV has a first column named "Date" (case-insensitive, ISO-8601
dates) and one column per ticker. Rows must be complete, dates strictly
increasing, prices strictly positive; nothing is imputed.
"""

import csv
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import (
    DateOrderError,
    InsufficientDataError,
    PriceDomainError,
    PriceParseError,
)
from .harness import run_on_returns
from .types import ReturnMatrix


@dataclass(frozen=True)
class PriceTable:
    """T x N table of positive prices on strictly increasing dates."""

    dates: tuple
    prices: np.ndarray
    asset_labels: tuple

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "asset_labels", tuple(self.asset_labels))
        if prices.ndim != 2:
            raise PriceParseError("prices must form a 2-D table")
        if len(self.dates) != prices.shape[0]:
            raise PriceParseError("one date per price row is required")
        if len(self.asset_labels) != prices.shape[1]:
            raise PriceParseError("one label per price column is required")
        for k in range(1, len(self.dates)):
            if self.dates[k] <= self.dates[k - 1]:
                raise DateOrderError(
                    f"dates must be strictly increasing; row {k + 1} "
                    f"({self.dates[k]}) does not follow {self.dates[k - 1]}"
                )
        if np.any(~np.isfinite(prices)) or np.any(prices <= 0.0):
            t, i = np.argwhere(~(prices > 0.0))[0]
            raise PriceDomainError(
                f"non-positive price at row {t + 2}, column {self.asset_labels[i]}"
            )

    @property
    def num_periods(self):
        return self.prices.shape[0]


def load_prices_csv(path):
    """Parse and fully validate a price CSV into a PriceTable."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PriceParseError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0].lower() != "date":
            raise PriceParseError(
                f"{path}: first header column must be 'Date', got {header[:1]!r}"
            )
        labels = header[1:]
        dates = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise PriceParseError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            raw_date = row[0].strip()
            if not raw_date:
                raise PriceParseError(f"{path}: row {lineno}, column Date is empty")
            try:
                dates.append(date.fromisoformat(raw_date))
            except ValueError:
                raise PriceParseError(
                    f"{path}: row {lineno}, column Date: {raw_date!r} is not ISO-8601"
                ) from None
            parsed = []
            for col, cell in zip(labels, row[1:]):
                cell = cell.strip()
                if not cell:
                    raise PriceParseError(f"{path}: row {lineno}, column {col} is empty")
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise PriceParseError(
                        f"{path}: row {lineno}, column {col}: {cell!r} is not a number"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise PriceParseError(f"{path}: no data rows")
    return PriceTable(tuple(dates), np.array(rows, dtype=float), tuple(labels))


def prices_to_returns(table):
    """Simple returns r_t = (p_t - p_{t-1}) / p_{t-1}; shape (T-1) x N."""
    if table.num_periods < 2:
        raise InsufficientDataError("need at least 2 price rows to form returns")
    p = table.prices
    returns = (p[1:] - p[:-1]) / p[:-1]
    return ReturnMatrix(returns, table.asset_labels)


def trace_to_prices(returns, start_date=date(2020, 1, 1), initial_price=100.0):
    """Synthesize a PriceTable whose returns reproduce the given trace.

    Prices are compounded from ``initial_price``; dates are consecutive days.
    Requires every return > -1. Mainly used to validate that the backtest and
    simulation paths agree.
    """
    from datetime import timedelta

    values = returns.values
    factors = np.vstack([np.ones(values.shape[1]), np.cumprod(1.0 + values, axis=0)])
    prices = initial_price * factors
    dates = tuple(start_date + timedelta(days=k) for k in range(prices.shape[0]))
    return PriceTable(dates, prices, returns.asset_labels)


def run_backtest(table, cfg):
    """Backtest: the simulation pipeline applied to ingested historical returns."""
    returns = prices_to_returns(table)
    return run_on_returns(returns, cfg, base_seed=cfg.master_seed, run_index=0)
