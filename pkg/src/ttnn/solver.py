"""Low-rank tensor completion solvers.

:func:`ttnn_complete` alternates between fixing the truncation factors
``(A, B)`` taken from the leading ``r`` t-SVD columns of the current
estimate, and solving

    min_X  ||X||_* - tr(A * X * B^T)   s.t.  X = M on the observed entries

by a three-step ADMM (:func:`admm_inner`). :func:`tubal_nn_complete` runs the
same iteration with the truncation term dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import talgebra
from .errors import DimensionError, SolverDiagnostic
from .tensor import as_tensor3

log = logging.getLogger(__name__)

COUPLING_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ObservationMask:
    """Observed-entry pattern of a tensor; ``observed[i, j, k]`` is True on Ω."""

    observed: np.ndarray

    def __post_init__(self):
        obs = np.array(self.observed, dtype=bool)
        if obs.ndim != 3:
            raise DimensionError("mask must be third order")
        if not obs.any():
            raise ValueError("mask observes no entries")
        obs.setflags(write=False)
        object.__setattr__(self, "observed", obs)

    @classmethod
    def full(cls, dims):
        return cls(np.ones(tuple(dims), dtype=bool))

    @classmethod
    def from_indices(cls, dims, indices):
        """Build from 1-based ``(i, j, k)`` triples."""
        obs = np.zeros(tuple(dims), dtype=bool)
        idx = np.asarray(list(indices), dtype=np.int64).reshape(-1, 3) - 1
        if idx.size and (np.any(idx < 0) or np.any(idx >= np.array(dims))):
            raise IndexError("mask index out of bounds")
        if len(np.unique(idx, axis=0)) != len(idx):
            raise ValueError("duplicate mask index")
        obs[tuple(idx.T)] = True
        return cls(obs)

    @property
    def dims(self):
        return self.observed.shape

    @property
    def missing(self) -> np.ndarray:
        return ~self.observed

    @property
    def observed_count(self) -> int:
        return int(self.observed.sum())

    @property
    def missing_count(self) -> int:
        return int(self.observed.size - self.observed.sum())

    def indices(self):
        """1-based ``(i, j, k)`` triples of Ω, first index fastest."""
        flat = np.flatnonzero(self.observed.ravel(order="F"))
        return [tuple(int(v) + 1 for v in np.unravel_index(p, self.dims, order="F"))
                for p in flat]

    def apply(self, m) -> np.ndarray:
        """Zero-fill the unobserved entries of ``m``."""
        return np.where(self.observed, m, 0.0)

    def __eq__(self, other):
        if not isinstance(other, ObservationMask):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.observed, other.observed))


@dataclass(frozen=True)
class SolverConfig:
    r: int = 1
    mu: float = 5e-4
    outer_eps: float = 1e-3
    outer_max: int = 50
    inner_eps: float = 1e-4
    inner_max: int = 200

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not (self.outer_eps > 0 and self.inner_eps > 0):
            raise ValueError("tolerances must be positive")
        if self.outer_max < 1 or self.inner_max < 1:
            raise ValueError("iteration caps must be >= 1")

    def check_dims(self, dims):
        if self.r > min(dims[0], dims[1]):
            raise ValueError(f"r={self.r} exceeds min(n1, n2)={min(dims[0], dims[1])}")


@dataclass
class SolverReport:
    method: str
    config: SolverConfig
    recovered: np.ndarray
    outer_iterations: int = 0
    total_inner_iterations: int = 0
    inner_counts: list = field(default_factory=list)
    inner_residuals: list = field(default_factory=list)
    outer_residuals: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    converged: bool = False


def _check_inputs(m, mask, cfg, truncate):
    m = as_tensor3(m)
    if mask.dims != m.shape:
        raise DimensionError(f"mask dims {mask.dims} do not match tensor {m.shape}")
    if truncate:
        cfg.check_dims(m.shape)
    return m


def _finite(t, what, outer=None, inner=None):
    if not np.all(np.isfinite(t)):
        raise SolverDiagnostic(f"non-finite values in {what}", outer=outer, inner=inner)


def admm_inner(m, mask, A, B, x0, cfg: SolverConfig, residuals=None, outer=None):
    """Solve the inner problem for fixed truncation factors.

    Pass ``A = B = None`` to drop the truncation term. Returns the final
    ``W`` iterate, which agrees with ``m`` on Ω exactly, and the number of
    iterations taken. When given, ``residuals`` collects ``||X - W||_F`` per
    step.
    """
    mu = cfg.mu
    obs = mask.observed
    m_obs = m[obs]
    if A is None:
        coupling = np.zeros_like(m)
    else:
        coupling = talgebra.t_product(talgebra.conj_transpose(A), B)
    tol = cfg.inner_eps * max(1.0, float(np.linalg.norm(m)))

    w = np.array(x0, dtype=np.float64)
    y = w.copy()
    count = 0
    for count in range(1, cfg.inner_max + 1):
        x = talgebra.t_svt(w - y / mu, 1.0 / mu)
        w = x + (coupling + y) / mu
        w[obs] = m_obs
        y = y + mu * (x - w)
        res = float(np.linalg.norm(x - w))
        if not np.isfinite(res):
            raise SolverDiagnostic("non-finite inner residual", outer=outer, inner=count)
        if residuals is not None:
            residuals.append(res)
        if res <= tol:
            break
    _finite(w, "inner iterate", outer=outer, inner=count)
    return w, count


def _check_coupling(A, B, r, outer):
    eye = talgebra.identity_tensor(r, A.shape[2])
    for name, f in (("A", A), ("B", B)):
        dev = np.linalg.norm(talgebra.t_product(f, talgebra.conj_transpose(f)) - eye)
        if not dev <= COUPLING_TOL:
            raise SolverDiagnostic(
                f"truncation factor {name} lost orthogonality ({dev:.2e})", outer=outer
            )


def _complete(m, mask, cfg, truncate):
    m = _check_inputs(m, mask, cfg, truncate)
    m_omega = mask.apply(m)
    r = cfg.r if truncate else 0
    report = SolverReport("ttnn" if truncate else "tubal", cfg, m_omega.copy())

    x = m_omega
    for outer in range(1, cfg.outer_max + 1):
        if truncate:
            factors = talgebra.t_svd(x)
            A, B = talgebra.truncation_factors(factors, r)
            _check_coupling(A, B, r, outer)
        else:
            A = B = None
        x_next, count = admm_inner(
            m, mask, A, B, x, cfg, residuals=report.inner_residuals, outer=outer
        )
        diff = float(np.linalg.norm(x_next - x))
        x = x_next
        report.outer_iterations = outer
        report.total_inner_iterations += count
        report.inner_counts.append(count)
        report.outer_residuals.append(diff)
        report.objective_history.append(talgebra.truncated_norm(x, r))
        log.info("%s outer %d: inner=%d residual=%.3e", report.method, outer, count, diff)
        if diff <= cfg.outer_eps:
            report.converged = True
            break

    report.recovered = x
    return report


def ttnn_complete(m, mask: ObservationMask, cfg: SolverConfig) -> SolverReport:
    """Complete ``m`` on the unobserved entries by truncated nuclear norm minimization."""
    return _complete(m, mask, cfg, truncate=True)


def tubal_nn_complete(m, mask: ObservationMask, cfg: SolverConfig) -> SolverReport:
    """Baseline completion with the truncation term removed; ``cfg.r`` is ignored."""
    return _complete(m, mask, cfg, truncate=False)


def complete(method: str, m, mask, cfg) -> SolverReport:
    if method == "ttnn":
        return ttnn_complete(m, mask, cfg)
    if method == "tubal":
        return tubal_nn_complete(m, mask, cfg)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SweepRow:
    r: int
    report: SolverReport
    score: object


def _sweep_one(args):
    from .metrics import score

    truth, mask, cfg, method = args
    m = mask.apply(truth)
    report = complete(method, m, mask, cfg)
    return SweepRow(cfg.r, report, score(report.recovered, truth, mask))


def sweep_r(truth, mask, cfg: SolverConfig, r_values, method="ttnn", jobs=1):
    """Run one completion per truncation count in ``r_values``, in order.

    Independent solves go to a process pool when ``jobs > 1``; the returned
    rows keep the order of ``r_values``.
    """
    truth = as_tensor3(truth)
    tasks = [(truth, mask, replace(cfg, r=int(r)), method) for r in r_values]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def best_r(rows) -> SweepRow:
    """Highest PSNR; ties go to the smaller r."""
    return min(rows, key=lambda row: (-row.score.psnr, row.r))
