import math

import numpy as np
import pytest

from ttnn.dataio import random_mask
from ttnn.metrics import psnr_from_mse, score
from ttnn.solver import ObservationMask


def brute_mse(rec, truth, observed):
    total, count = 0.0, 0
    for idx in np.ndindex(truth.shape):
        if not observed[idx]:
            total += (rec[idx] - truth[idx]) ** 2
            count += 1
    return total / count


def test_perfect_recovery(rng):
    truth = rng.uniform(0, 255, (4, 4, 3))
    mask = random_mask(truth.shape, 0.5, "element", 3)
    sc = score(truth.copy(), truth, mask)
    assert sc.mse == 0 and math.isinf(sc.psnr)
    assert sc.missing_count == 24


def test_off_by_255_is_zero_db(rng):
    truth = rng.integers(0, 256, (5, 4, 2)).astype(float)
    mask = random_mask(truth.shape, 0.4, "element", 1)
    rec = np.where(mask.observed, truth, truth + 255.0)
    sc = score(rec, truth, mask)
    assert sc.mse == 255.0 ** 2
    assert sc.psnr == 0.0


def test_matches_brute_force(rng):
    truth = rng.uniform(0, 255, (6, 5, 3))
    rec = truth + rng.normal(0, 10, truth.shape)
    mask = random_mask(truth.shape, 0.3, "element", 11)
    sc = score(rec, truth, mask)
    expect = brute_mse(rec, truth, mask.observed)
    assert abs(sc.mse - expect) <= 1e-12 * expect
    assert abs(sc.psnr - 10 * math.log10(255 ** 2 / expect)) <= 1e-12 * abs(sc.psnr)


def test_observed_entries_are_ignored(rng):
    truth = rng.uniform(0, 255, (4, 4, 2))
    mask = random_mask(truth.shape, 0.5, "element", 2)
    rec = truth + 3.0
    perturbed = np.where(mask.observed, rec + rng.normal(0, 50, truth.shape), rec)
    assert score(rec, truth, mask) == score(perturbed, truth, mask)


def test_psnr_decreases_with_mse():
    values = [psnr_from_mse(m) for m in (0.5, 1.0, 10.0, 1e4)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_nothing_missing_is_an_error():
    with pytest.raises(ValueError):
        score(np.zeros((2, 2, 1)), np.zeros((2, 2, 1)), ObservationMask.full((2, 2, 1)))
