"""Frame-pair dataset generation, persistence, and iteration."""

from .dataset import (DEFAULT_DT_OBS, Dataset, DatasetError, SPLIT_NAMES,
                      generate_dataset, iterate_samples, load_dataset)
from .ppm import read_ppm, write_ppm

__all__ = ["DEFAULT_DT_OBS", "Dataset", "DatasetError", "SPLIT_NAMES",
           "generate_dataset", "iterate_samples", "load_dataset",
           "read_ppm", "write_ppm"]
