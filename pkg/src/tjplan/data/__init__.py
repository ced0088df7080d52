"""Dataset generation, loading, and record types."""

from tjplan.data.generate import generate_dataset, sample_path, split_assignment
from tjplan.data.load import load_dataset, record_to_samples
from tjplan.data.records import DatasetManifest, TrajectoryRecord

__all__ = [
    "DatasetManifest",
    "TrajectoryRecord",
    "generate_dataset",
    "load_dataset",
    "record_to_samples",
    "sample_path",
    "split_assignment",
]
