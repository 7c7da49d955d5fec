import numpy as np
import pytest

from ttnn import solver, talgebra
from ttnn.dataio import random_mask, synthetic_low_rank
from ttnn.errors import DimensionError, SolverDiagnostic
from ttnn.solver import (
    ObservationMask,
    SolverConfig,
    admm_inner,
    best_r,
    sweep_r,
    ttnn_complete,
    tubal_nn_complete,
)

from conftest import rel_err


@pytest.fixture(scope="module")
def small_problem():
    truth = synthetic_low_rank((15, 12, 3), 1, seed=4)
    mask = random_mask(truth.shape, 0.3, "element", seed=4)
    return truth, mask


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(r=0)
    with pytest.raises(ValueError):
        SolverConfig(mu=0)
    with pytest.raises(ValueError):
        SolverConfig(outer_eps=0)
    with pytest.raises(ValueError):
        SolverConfig(inner_eps=-1)
    with pytest.raises(ValueError):
        SolverConfig(outer_max=0)
    cfg = SolverConfig()
    assert (cfg.mu, cfg.outer_eps, cfg.outer_max, cfg.inner_eps, cfg.inner_max) == (
        5e-4, 1e-3, 50, 1e-4, 200)


def test_input_validation(small_problem):
    truth, mask = small_problem
    with pytest.raises(ValueError):
        ttnn_complete(mask.apply(truth), mask, SolverConfig(r=13))
    with pytest.raises(DimensionError):
        ttnn_complete(truth[:, :, :2], mask, SolverConfig(r=1))


@pytest.mark.parametrize("complete", [ttnn_complete, tubal_nn_complete])
def test_fully_observed(rng, complete):
    m = rng.uniform(0, 255, (6, 5, 3))
    rep = complete(m, ObservationMask.full(m.shape), SolverConfig(r=2))
    assert rep.outer_iterations == 1
    assert rep.outer_residuals == [0.0]
    assert rep.converged
    assert np.array_equal(rep.recovered, m)


def test_small_recovery_and_fidelity(small_problem):
    truth, mask = small_problem
    m = mask.apply(truth)
    rep = ttnn_complete(m, mask, SolverConfig(r=1))
    assert rel_err(rep.recovered, truth) <= 1e-2
    assert np.array_equal(rep.recovered[mask.observed], truth[mask.observed])
    assert 1 <= rep.outer_iterations <= 50
    assert len(rep.outer_residuals) == len(rep.objective_history) == rep.outer_iterations
    assert len(rep.inner_counts) == rep.outer_iterations
    assert sum(rep.inner_counts) == rep.total_inner_iterations == len(rep.inner_residuals)
    assert all(np.isfinite(rep.inner_residuals))
    for obj, expect in zip(rep.objective_history[-1:], [talgebra.truncated_norm(rep.recovered, 1)]):
        assert obj == expect


def test_tubal_baseline_small(small_problem):
    truth, mask = small_problem
    rep = tubal_nn_complete(mask.apply(truth), mask, SolverConfig(r=1))
    assert rep.method == "tubal"
    assert rel_err(rep.recovered, truth) <= 5e-2
    assert np.array_equal(rep.recovered[mask.observed], truth[mask.observed])


def test_outer_cap_is_not_an_error(small_problem):
    truth, mask = small_problem
    rep = ttnn_complete(mask.apply(truth), mask, SolverConfig(r=1, outer_max=2, inner_max=10))
    assert rep.outer_iterations == 2
    assert not rep.converged
    assert rep.total_inner_iterations == 20


def test_deterministic(small_problem):
    truth, mask = small_problem
    cfg = SolverConfig(r=1, outer_max=5)
    a = ttnn_complete(mask.apply(truth), mask, cfg)
    b = ttnn_complete(mask.apply(truth), mask, cfg)
    assert np.array_equal(a.recovered, b.recovered)
    assert a.inner_residuals == b.inner_residuals
    assert a.objective_history == b.objective_history


def test_admm_inner_full_mask_fixes_w(rng):
    m = rng.uniform(0, 255, (5, 4, 3))
    mask = ObservationMask.full(m.shape)
    f = talgebra.t_svd(m)
    A, B = talgebra.truncation_factors(f, 2)
    coupling = talgebra.t_product(talgebra.conj_transpose(A), B)
    assert coupling.shape == m.shape
    w, count = admm_inner(m, mask, A, B, m, SolverConfig(r=2))
    assert np.array_equal(w, m)
    assert 1 <= count <= 200


def test_admm_inner_steps(small_problem):
    """One inner step reproduces the three closed-form updates."""
    truth, mask = small_problem
    m = mask.apply(truth)
    cfg = SolverConfig(r=1, inner_max=1)
    A, B = talgebra.truncation_factors(talgebra.t_svd(m), 1)
    w, count = admm_inner(m, mask, A, B, m, cfg)
    mu = cfg.mu
    x1 = talgebra.t_svt(m - m / mu, 1 / mu)
    w1 = x1 + (talgebra.t_product(talgebra.conj_transpose(A), B) + m) / mu
    w1[mask.observed] = m[mask.observed]
    assert count == 1
    assert np.allclose(w, w1, rtol=0, atol=1e-9 * np.abs(w1).max())


def test_admm_inner_terminates(small_problem):
    truth, mask = small_problem
    m = mask.apply(truth)
    A, B = talgebra.truncation_factors(talgebra.t_svd(m), 1)
    residuals = []
    w, count = admm_inner(m, mask, A, B, m, SolverConfig(r=1), residuals=residuals)
    assert count <= 200 and len(residuals) == count
    assert np.all(np.isfinite(residuals))


def test_nonfinite_values_are_diagnosed(small_problem, monkeypatch):
    truth, mask = small_problem
    monkeypatch.setattr(solver.talgebra, "t_svt", lambda x, tau: np.full_like(x, np.nan))
    with pytest.raises(SolverDiagnostic) as info:
        ttnn_complete(mask.apply(truth), mask, SolverConfig(r=1))
    assert info.value.outer == 1 and info.value.inner == 1


def test_recovery_improves_with_observations():
    truth = synthetic_low_rank((30, 30, 5), 2, seed=1)
    errors = []
    for observed in (0.3, 0.6, 0.9):
        mask = random_mask(truth.shape, 1 - observed, "element", seed=1)
        rep = ttnn_complete(mask.apply(truth), mask, SolverConfig(r=2))
        errors.append(rel_err(rep.recovered, truth))
    assert errors[0] > errors[1] > errors[2]


def test_sweep_and_best_r(small_problem):
    truth, mask = small_problem
    rows = sweep_r(truth, mask, SolverConfig(r=1, outer_max=3), [1, 2, 3])
    assert [row.r for row in rows] == [1, 2, 3]
    best = best_r(rows)
    assert best.score.psnr == max(row.score.psnr for row in rows)


def test_best_r_tie_goes_to_smaller():
    class Score:
        def __init__(self, psnr):
            self.psnr = psnr

    rows = [solver.SweepRow(r, None, Score(p)) for r, p in ((1, 20.0), (2, 30.0), (3, 30.0))]
    assert best_r(rows).r == 2
    rows = [solver.SweepRow(r, None, Score(np.inf)) for r in (4, 2, 3)]
    assert best_r(rows).r == 2
