"""Time-series classification forest mixing elastic-distance, BOSS dictionary
and spectral interval splitters."""

from ._kernels import BACKEND
from .core import ConfigError, LabeledDataset, TsChiefError, znormalize
from .forest import ForestConfig, TsChiefForest, train
from .io import load_model, load_ucr_file, load_ucr_split, save_model

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "ForestConfig", "LabeledDataset", "TsChiefError",
    "TsChiefForest", "load_model", "load_ucr_file", "load_ucr_split", "save_model",
    "train", "znormalize",
]
