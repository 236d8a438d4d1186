from .ngarch import NGarchParams, simulate_ngarch
from .heston import HestonParams, simulate_heston, correlated_pairs
from .fsv import FsvForwardParams, simulate_fsv_forward
from .layers import (BlockCorrelationSpec, RegimeConfig, JumpConfig,
                     apply_correlation, regime_labels, sample_jumps)
from .panel import ReturnPanel, save_panel, load_panel
from .dataset import (Segment, GeneratorSpec, build_dataset, split_dataset,
                      conditioning_windows, apply_regimes,
                      CONDITION_LENGTH, TARGET_LENGTH)

__all__ = [
    "NGarchParams", "simulate_ngarch",
    "HestonParams", "simulate_heston", "correlated_pairs",
    "FsvForwardParams", "simulate_fsv_forward",
    "BlockCorrelationSpec", "RegimeConfig", "JumpConfig",
    "apply_correlation", "regime_labels", "sample_jumps",
    "ReturnPanel", "save_panel", "load_panel",
    "Segment", "GeneratorSpec", "build_dataset", "split_dataset",
    "conditioning_windows", "apply_regimes",
    "CONDITION_LENGTH", "TARGET_LENGTH",
]
