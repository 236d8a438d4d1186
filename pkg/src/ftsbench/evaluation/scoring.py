"""Distribution-distance scoring of conditional samplers and rank aggregation.

A sampler is any object with
``sample(condition: N x L array, start: int, batch: int, seed: int) -> batch x N x L``;
``start`` is the row index of the condition's first step inside the scored
panel, which lets replay oracles look up the true target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from ..generators.dataset import CONDITION_LENGTH, TARGET_LENGTH
from .emd import emd1d_squared
from .moments import DegenerateSeriesError, correlation_values, moments

__all__ = ["MEASURES", "MetricTable", "ScoreConfig", "ReplaySampler",
           "score_model", "score_model_over_seeds", "combined_rank"]

MEASURES = ["Corr", "Kurt", "Mean", "Skew", "Std",
            "Corr_R", "Kurt_R", "Mean_R", "Skew_R", "Std_R"]

_MOMENT_NAMES = ["Mean", "Std", "Skew", "Kurt"]


@dataclass
class MetricTable:
    """Rows = distance measures, columns = models, cells = EMD values."""

    measures: list[str]
    models: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.measures), len(self.models)):
            raise ValueError("values must be measures x models")

    @classmethod
    def from_columns(cls, columns: dict[str, dict[str, float]],
                     measures: list[str] | None = None) -> "MetricTable":
        measures = measures or MEASURES
        models = list(columns.keys())
        values = np.array([[columns[m][meas] for m in models] for meas in measures])
        return cls(list(measures), models, values)

    def column(self, model: str) -> dict[str, float]:
        j = self.models.index(model)
        return {meas: float(self.values[i, j]) for i, meas in enumerate(self.measures)}

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("Measure," + ",".join(self.models) + "\n")
            for i, meas in enumerate(self.measures):
                cells = ",".join("%.17g" % v for v in self.values[i])
                fh.write(f"{meas},{cells}\n")

    @classmethod
    def read_csv(cls, path: str | Path) -> "MetricTable":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            models = header[1:]
            measures, rows = [], []
            for line in fh:
                parts = line.strip().split(",")
                if not parts or parts == [""]:
                    continue
                measures.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        return cls(measures, models, np.array(rows))


@dataclass
class ScoreConfig:
    batch: int = 32
    window_stride: int = 1
    rolling_window: int = TARGET_LENGTH // 3
    seed: int = 0
    max_failure_fraction: float = 0.01


class ReplaySampler:
    """Oracle that returns the true next-window target for every condition."""

    def __init__(self, returns: np.ndarray,
                 condition_length: int = CONDITION_LENGTH,
                 target_length: int = TARGET_LENGTH):
        self._returns = np.asarray(returns, dtype=np.float64)
        self._cond = condition_length
        self._target = target_length

    def sample(self, condition: np.ndarray, start: int, batch: int,
               seed: int) -> np.ndarray:
        lo = start + self._cond
        target = self._returns[lo:lo + self._target].T
        return np.repeat(target[None, :, :], batch, axis=0)


def _pool_window(window: np.ndarray, rolling: int, pools: dict,
                 rolling_pools: dict) -> None:
    """Accumulate full and rolling moment/correlation values of one N x L window."""
    n, length = window.shape
    for i in range(n):
        series = window[i]
        try:
            ms = moments(series)
        except DegenerateSeriesError:
            pools["skipped"] += 1
        else:
            pools["Mean"].append(ms.mean)
            pools["Std"].append(ms.std)
            pools["Skew"].append(ms.skew)
            pools["Kurt"].append(ms.kurt)
        for start in range(length - rolling + 1):
            try:
                ms = moments(series[start:start + rolling])
            except DegenerateSeriesError:
                rolling_pools["skipped"] += 1
            else:
                rolling_pools["Mean"].append(ms.mean)
                rolling_pools["Std"].append(ms.std)
                rolling_pools["Skew"].append(ms.skew)
                rolling_pools["Kurt"].append(ms.kurt)
    if n >= 2:
        try:
            pools["Corr"].append(correlation_values(window))
        except DegenerateSeriesError:
            pools["skipped"] += 1
        for start in range(length - rolling + 1):
            try:
                rolling_pools["Corr"].append(
                    correlation_values(window[:, start:start + rolling]))
            except DegenerateSeriesError:
                rolling_pools["skipped"] += 1


def _empty_pools() -> dict:
    return {"Mean": [], "Std": [], "Skew": [], "Kurt": [], "Corr": [], "skipped": 0}


def score_model(test_returns: np.ndarray, sampler,
                config: ScoreConfig | None = None) -> tuple[dict[str, float], dict]:
    """EMD column for one sampler against the realized next-window targets.

    Per conditioning window a generated batch is drawn; per-instrument moment
    values and correlation values are pooled over windows (and over rolling
    sub-windows for the rolling measures) for both the generated samples and
    the realized targets, and each measure reports the EMD between the two
    pooled distributions.
    """
    config = config or ScoreConfig()
    returns = np.asarray(test_returns, dtype=np.float64)
    t_total = returns.shape[0]
    need = CONDITION_LENGTH + TARGET_LENGTH
    if t_total < need:
        raise ValueError("test split too short for conditioning windows")

    real_full, real_roll = _empty_pools(), _empty_pools()
    gen_full, gen_roll = _empty_pools(), _empty_pools()
    failures = 0
    n_windows = 0
    for start in range(0, t_total - need + 1, config.window_stride):
        condition = returns[start:start + CONDITION_LENGTH].T
        target = returns[start + CONDITION_LENGTH:start + need].T
        n_windows += 1
        try:
            batch = sampler.sample(condition, start, config.batch,
                                   config.seed + start)
            batch = np.asarray(batch, dtype=np.float64)
            if not np.all(np.isfinite(batch)):
                raise FloatingPointError("sampler produced non-finite values")
        except Exception:
            failures += 1
            continue
        _pool_window(target, config.rolling_window, real_full, real_roll)
        for path in batch:
            _pool_window(path, config.rolling_window, gen_full, gen_roll)

    diagnostics = {
        "windows": n_windows,
        "failures": failures,
        "flagged": n_windows > 0 and failures / n_windows > config.max_failure_fraction,
        "skipped_real": real_full["skipped"] + real_roll["skipped"],
        "skipped_generated": gen_full["skipped"] + gen_roll["skipped"],
    }
    if n_windows == failures:
        raise ValueError("sampler failed on every conditioning window")

    column: dict[str, float] = {}
    for name in _MOMENT_NAMES:
        column[name] = emd1d_squared(np.asarray(real_full[name]),
                                     np.asarray(gen_full[name]))
        column[name + "_R"] = emd1d_squared(np.asarray(real_roll[name]),
                                            np.asarray(gen_roll[name]))
    if real_full["Corr"]:
        column["Corr"] = emd1d_squared(np.concatenate(real_full["Corr"]),
                                       np.concatenate(gen_full["Corr"]))
        column["Corr_R"] = emd1d_squared(np.concatenate(real_roll["Corr"]),
                                         np.concatenate(gen_roll["Corr"]))
    else:
        column["Corr"] = np.nan
        column["Corr_R"] = np.nan
    return column, diagnostics


def score_model_over_seeds(test_returns: np.ndarray, sampler_factory,
                           seeds: list[int],
                           config: ScoreConfig | None = None
                           ) -> tuple[dict[str, float], dict[str, float], list]:
    """Protocol run over several seeds: mean EMD per measure plus the
    per-seed spread (standard deviation) and the raw per-seed columns."""
    config = config or ScoreConfig()
    per_seed = []
    for seed in seeds:
        cfg = ScoreConfig(batch=config.batch, window_stride=config.window_stride,
                          rolling_window=config.rolling_window, seed=seed,
                          max_failure_fraction=config.max_failure_fraction)
        column, _ = score_model(test_returns, sampler_factory(seed), cfg)
        per_seed.append(column)
    mean = {m: float(np.mean([c[m] for c in per_seed])) for m in per_seed[0]}
    spread = {m: float(np.std([c[m] for c in per_seed])) for m in per_seed[0]}
    return mean, spread, per_seed


def combined_rank(tables: dict[str, MetricTable]) -> tuple[list[tuple[str, float]], dict]:
    """Equal-weighted average rank across measures and datasets.

    Per measure, models are ranked ascending by EMD with ties sharing the
    mean of the tied ranks; ranks are averaged over the measures of each
    dataset and then over datasets. Models missing any cell are excluded
    and reported in the notice dict.
    """
    if not tables:
        raise ValueError("no metric tables given")
    names = list(tables.keys())
    model_sets = [set(t.models) for t in tables.values()]
    common = set.intersection(*model_sets)
    excluded: dict[str, str] = {}
    for t in tables.values():
        for j, model in enumerate(t.models):
            if model in common and not np.all(np.isfinite(t.values[:, j])):
                excluded[model] = "missing cells"
    for s in model_sets:
        for model in set.union(*model_sets) - common:
            excluded.setdefault(model, "absent from some dataset")
    models = sorted(m for m in common if m not in excluded)
    if not models:
        raise ValueError("no model present in every table")

    per_dataset: dict[str, dict[str, float]] = {}
    for name in names:
        table = tables[name]
        cols = [table.models.index(m) for m in models]
        sub = table.values[:, cols]
        ranks = np.vstack([rankdata(row, method="average") for row in sub])
        per_dataset[name] = {m: float(r) for m, r in zip(models, ranks.mean(axis=0))}

    combined = [(m, float(np.mean([per_dataset[name][m] for name in names])))
                for m in models]
    combined.sort(key=lambda pair: (pair[1], pair[0]))
    return combined, {"per_dataset": per_dataset, "excluded": excluded}
