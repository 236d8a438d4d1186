"""Return panel container and its on-disk format."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

__all__ = ["ReturnPanel", "save_panel", "load_panel"]

_FLOAT_FMT = "%.17g"  # >= 15 significant digits round-trips float64 exactly


def _plain(obj):
    """Recursively strip numpy scalar/array types for YAML emission."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ReturnPanel:
    """T x N log returns plus per-step auxiliary channels.

    ``variance`` holds the simulator's true conditional variance per
    instrument, ``jump_counts`` the number of jumps added per step, and
    ``vol_regime`` / ``jump_regime`` the volatility-regime and large-jump-day
    labels. Channels other than ``returns`` may be None for plain datasets.
    """

    returns: np.ndarray
    instruments: list[str]
    variance: np.ndarray | None = None
    jump_counts: np.ndarray | None = None
    vol_regime: np.ndarray | None = None
    jump_regime: np.ndarray | None = None
    spec_hash: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=np.float64)
        if self.returns.ndim != 2:
            raise ValueError("returns must be a T x N matrix")
        if not np.all(np.isfinite(self.returns)):
            raise ValueError("returns contain non-finite values")
        t, n = self.returns.shape
        if len(self.instruments) != n:
            raise ValueError("one instrument id per column required")
        for name in ("variance", "jump_counts"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=np.float64)
                if arr.shape != (t, n):
                    raise ValueError(f"{name} must match returns shape")
                setattr(self, name, arr)
        for name in ("vol_regime", "jump_regime"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=np.int64)
                if arr.shape != (t,):
                    raise ValueError(f"{name} must have one label per step")
                setattr(self, name, arr)

    @property
    def n_steps(self) -> int:
        return self.returns.shape[0]

    @property
    def n_instruments(self) -> int:
        return self.returns.shape[1]

    def slice_rows(self, start: int, stop: int) -> "ReturnPanel":
        def cut(a):
            return None if a is None else a[start:stop].copy()

        return ReturnPanel(
            returns=self.returns[start:stop].copy(),
            instruments=list(self.instruments),
            variance=cut(self.variance),
            jump_counts=cut(self.jump_counts),
            vol_regime=cut(self.vol_regime),
            jump_regime=cut(self.jump_regime),
            spec_hash=self.spec_hash,
            meta=dict(self.meta),
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.returns.tobytes())
        for arr in (self.variance, self.jump_counts, self.vol_regime, self.jump_regime):
            if arr is not None:
                h.update(arr.tobytes())
        return h.hexdigest()


def _write_csv(path: Path, header: list[str], matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in matrix:
            fh.write(",".join(_FLOAT_FMT % x for x in row) + "\n")


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def save_panel(panel: ReturnPanel, path: str | Path, spec_dict: dict | None = None) -> None:
    """Write returns as CSV plus sidecar manifest and auxiliary channels.

    Auxiliary files share the base path with suffixes .variance, .jumps and
    .regime; the manifest is YAML with the generator spec, seed and hash.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(path, panel.instruments, panel.returns)
    if panel.variance is not None:
        _write_csv(path.with_suffix(path.suffix + ".variance"), panel.instruments,
                   panel.variance)
    if panel.jump_counts is not None:
        _write_csv(path.with_suffix(path.suffix + ".jumps"), panel.instruments,
                   panel.jump_counts)
    if panel.vol_regime is not None or panel.jump_regime is not None:
        t = panel.n_steps
        cols, header = [], []
        if panel.vol_regime is not None:
            cols.append(panel.vol_regime)
            header.append("vol_regime")
        if panel.jump_regime is not None:
            cols.append(panel.jump_regime)
            header.append("jump_regime")
        _write_csv(path.with_suffix(path.suffix + ".regime"), header,
                   np.column_stack(cols).astype(np.float64))
    manifest = {
        "schema_version": 1,
        "content_hash": panel.content_hash(),
        "spec_hash": panel.spec_hash,
        "instruments": list(panel.instruments),
        "spec": spec_dict if spec_dict is not None else panel.meta.get("spec"),
    }
    with open(path.with_suffix(path.suffix + ".manifest"), "w", encoding="utf-8") as fh:
        yaml.safe_dump(_plain(manifest), fh, sort_keys=True)


def load_panel(path: str | Path) -> ReturnPanel:
    path = Path(path)
    instruments, returns = _read_csv(path)
    kwargs: dict = {}
    var_path = path.with_suffix(path.suffix + ".variance")
    if var_path.exists():
        kwargs["variance"] = _read_csv(var_path)[1]
    jump_path = path.with_suffix(path.suffix + ".jumps")
    if jump_path.exists():
        kwargs["jump_counts"] = _read_csv(jump_path)[1]
    regime_path = path.with_suffix(path.suffix + ".regime")
    if regime_path.exists():
        header, data = _read_csv(regime_path)
        for i, name in enumerate(header):
            kwargs[name] = data[:, i].astype(np.int64)
    manifest_path = path.with_suffix(path.suffix + ".manifest")
    spec_hash = ""
    meta: dict = {}
    if manifest_path.exists():
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = yaml.safe_load(fh)
        spec_hash = manifest.get("spec_hash", "")
        meta["spec"] = manifest.get("spec")
        panel = ReturnPanel(returns, instruments, spec_hash=spec_hash, meta=meta, **kwargs)
        stored = manifest.get("content_hash")
        if stored and stored != panel.content_hash():
            raise ValueError(f"content hash mismatch for {path}")
        return panel
    return ReturnPanel(returns, instruments, spec_hash=spec_hash, meta=meta, **kwargs)
