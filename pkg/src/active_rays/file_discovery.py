"""File discovery module for pairing predictions with ground truth."""

import glob
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

from .errors import UnmatchedPairError

PRED_SUFFIX = "_pred"
GT_SUFFIX = "_gt"


@dataclass(frozen=True)
class SamplePair:
    sample_id: str
    pred_path: Path
    gt_path: Path


def _index(directory: Path, suffix: str, extension: str) -> Dict[str, Path]:
    pattern = str(directory / f"*{suffix}{extension}")
    found = {}
    for file_path in glob.glob(pattern):
        path = Path(file_path).resolve()

        # Skip directories
        if path.is_dir():
            continue

        found[path.name[: -len(suffix + extension)]] = path
    return found


def find_sample_pairs(directory: Path, extension: str = ".pgm") -> List[SamplePair]:
    """
    Find ``<id>_pred<ext>`` / ``<id>_gt<ext>`` pairs in a directory.

    Args:
        directory: Directory to search (not recursive)
        extension: File extension including the dot (".pgm" or ".csv")

    Returns:
        Pairs sorted by sample id

    Raises:
        UnmatchedPairError: If a file has no partner or no pair exists
    """
    directory = Path(directory)
    predictions = _index(directory, PRED_SUFFIX, extension)
    truths = _index(directory, GT_SUFFIX, extension)

    for sample_id in sorted(set(predictions) ^ set(truths)):
        missing = GT_SUFFIX if sample_id in predictions else PRED_SUFFIX
        raise UnmatchedPairError(
            f"sample '{sample_id}' has no {sample_id}{missing}{extension}",
            sample_id=sample_id,
        )
    if not predictions:
        raise UnmatchedPairError(
            f"no *{PRED_SUFFIX}{extension} / *{GT_SUFFIX}{extension} pairs in {directory}"
        )
    return [SamplePair(sample_id, predictions[sample_id], truths[sample_id])
            for sample_id in sorted(predictions)]
