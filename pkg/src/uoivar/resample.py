"""Moving block bootstrap over regression rows.

The resampling unit is the (y, u) ROW PAIR of the stacked regression, not the
raw series: concatenating raw-series blocks and restacking would create seam
rows whose lag windows straddle two unrelated blocks. Row-pair resampling
keeps every block's internal dependence intact, which is what makes the
per-block effective sample size L - D + 1 meaningful. The raw-series variant
is still available (mbb_sample_series) for comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError
from .varcore import RegressionForm, TimeSeries


@dataclass(frozen=True)
class MbbPlan:
    """b = ceil(n_rows/block_len) block start indices; the concatenated blocks
    are truncated to exactly n_rows rows."""

    block_len: int
    n_rows: int
    start_indices: np.ndarray

    def __post_init__(self):
        if not 1 <= self.block_len <= self.n_rows:
            raise InvalidParamsError(
                f"block_len must lie in [1, {self.n_rows}], got {self.block_len}")
        starts = np.asarray(self.start_indices, dtype=np.int64).reshape(-1)
        expected = math.ceil(self.n_rows / self.block_len)
        if starts.size != expected:
            raise InvalidParamsError(
                f"expected {expected} start indices, got {starts.size}")
        if starts.size and (starts.min() < 0 or starts.max() > self.n_rows - self.block_len):
            raise InvalidParamsError(
                f"start indices must lie in [0, {self.n_rows - self.block_len}]")
        starts.setflags(write=False)
        object.__setattr__(self, "start_indices", starts)

    @property
    def n_blocks(self) -> int:
        return self.start_indices.size

    def row_indices(self) -> np.ndarray:
        """Source row index for each of the n_rows output rows."""
        offsets = np.arange(self.block_len)
        idx = (self.start_indices[:, np.newaxis] + offsets[np.newaxis, :]).ravel()
        return idx[: self.n_rows]


def mbb_plan(n_rows: int, block_len: int,
             stream: np.random.Generator | None = None) -> MbbPlan:
    """Draw ceil(n_rows/block_len) starts iid uniform on {0..n_rows-block_len}."""
    if stream is None:
        stream = np.random.default_rng()
    if not 1 <= block_len <= n_rows:
        raise InvalidParamsError(
            f"block_len must lie in [1, {n_rows}], got {block_len}")
    b = math.ceil(n_rows / block_len)
    starts = stream.integers(0, n_rows - block_len + 1, size=b)
    return MbbPlan(block_len=block_len, n_rows=n_rows, start_indices=starts)


def mbb_sample(reg: RegressionForm, plan: MbbPlan) -> RegressionForm:
    """Bootstrap regression form: planned blocks of row pairs in draw order."""
    if plan.n_rows != reg.n_rows:
        raise InvalidParamsError(
            f"plan covers {plan.n_rows} rows, regression has {reg.n_rows}")
    return reg.take_rows(plan.row_indices())


def mbb_sample_series(series: TimeSeries, plan: MbbPlan) -> TimeSeries:
    """Raw-series bootstrap: blocks of observations concatenated and truncated.
    Restacking this output incurs seam rows; prefer mbb_sample."""
    n = series.data.shape[0]
    if plan.n_rows != n:
        raise InvalidParamsError(f"plan covers {plan.n_rows} rows, series has {n}")
    return TimeSeries(data=series.data[plan.row_indices()], columns=series.columns)


def effective_sample(plan: MbbPlan, d: int) -> int:
    """Per-block stationary sample size L - d + 1.

    Returns 0 (with a warning) when the block length cannot cover a single
    lag window; such configurations carry no theoretical support.
    """
    if d < 1:
        raise InvalidParamsError("lag order d must be >= 1")
    n_star = plan.block_len - d + 1
    if n_star < 1:
        warnings.warn(
            f"block_len {plan.block_len} <= lag order {d}: effective sample is 0; "
            "this configuration is theoretically unsupported")
        return 0
    return n_star
