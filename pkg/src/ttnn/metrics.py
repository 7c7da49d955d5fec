"""Recovery scores over the missing entries of a completed tensor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

PEAK = 255.0


@dataclass(frozen=True)
class RecoveryScore:
    mse: float
    psnr: float
    missing_count: int


def psnr_from_mse(mse: float, peak: float = PEAK) -> float:
    # peak is fixed at 255 regardless of the data range
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def score(recovered, truth, mask) -> RecoveryScore:
    """MSE and PSNR over the entries that ``mask`` marks as missing."""
    recovered = np.asarray(recovered, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if recovered.shape != truth.shape or truth.shape != mask.dims:
        raise DimensionError(
            f"dims disagree: recovered {recovered.shape}, truth {truth.shape}, mask {mask.dims}"
        )
    missing = mask.missing
    count = int(missing.sum())
    if count == 0:
        raise ValueError("no missing entries to score")
    err = recovered[missing] - truth[missing]
    mse = float(np.dot(err, err)) / count
    return RecoveryScore(mse, psnr_from_mse(mse), count)
